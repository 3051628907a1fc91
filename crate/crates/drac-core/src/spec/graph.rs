//! Service dependency graph: an edge runs from the service that produces an
//! attribute to every service that consumes it. Used for the engine's
//! deterministic firing order and for cycle reporting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::validate::{input_source, output_landing};
use super::ArchitectureSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceGraph {
    /// All services as (drac, service), sorted by that pair.
    pub nodes: Vec<(String, String)>,
    /// Producer index -> consumer index.
    pub edges: BTreeSet<(usize, usize)>,
    /// One topological order over `nodes` (indices), smallest name first
    /// among ready nodes.
    pub topo: Vec<usize>,
}

impl ServiceGraph {
    pub fn node_index(&self, drac: &str, service: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|(d, s)| {
                (d.as_str(), s.as_str()).cmp(&(drac, service))
            })
            .ok()
    }

    pub fn has_edge(&self, from: (&str, &str), to: (&str, &str)) -> bool {
        match (self.node_index(from.0, from.1), self.node_index(to.0, to.1)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    /// The graph has a cycle; the nodes are listed in cycle order.
    CyclicDependency(Vec<(String, String)>),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::CyclicDependency(path) => {
                f.write_str("cyclic service dependency: ")?;
                for (i, (d, s)) in path.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" -> ")?;
                    }
                    write!(f, "{d}/{s}")?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn build_edges(
    spec: &ArchitectureSpec,
) -> (Vec<(String, String)>, BTreeSet<(usize, usize)>) {
    let mut nodes: Vec<(String, String)> = spec
        .dracs
        .iter()
        .flat_map(|d| {
            d.services
                .iter()
                .map(move |s| (d.name.clone(), s.name.clone()))
        })
        .collect();
    nodes.sort();
    let index: BTreeMap<(String, String), usize> = nodes
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();

    // landing attribute -> producing services
    let mut producers: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for drac in &spec.dracs {
        for svc in &drac.services {
            let p = index[&(drac.name.clone(), svc.name.clone())];
            for output in &svc.outputs {
                if let Some((d, a)) = output_landing(spec, &drac.name, output) {
                    producers
                        .entry((d.into(), a.into()))
                        .or_default()
                        .push(p);
                }
            }
        }
    }

    let mut edges = BTreeSet::new();
    for drac in &spec.dracs {
        for svc in &drac.services {
            let c = index[&(drac.name.clone(), svc.name.clone())];
            for input in &svc.inputs {
                let (d, a) = input_source(input);
                if let Some(ps) = producers.get(&(d.into(), a.into())) {
                    for &p in ps {
                        if let Some(want) = &input.peer_service {
                            if nodes[p].1 != *want {
                                continue;
                            }
                        }
                        if p != c {
                            edges.insert((p, c));
                        }
                    }
                }
            }
        }
    }
    (nodes, edges)
}

/// Build the dependency graph and one topological order. Cycles are an
/// error carrying the offending path.
pub fn service_graph(spec: &ArchitectureSpec) -> Result<ServiceGraph, GraphError> {
    let (nodes, edges) = build_edges(spec);
    let n = nodes.len();
    let mut indegree = alloc::vec![0usize; n];
    for &(_, b) in &edges {
        indegree[b] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(&next) = ready.iter().next() {
        ready.remove(&next);
        topo.push(next);
        for &(a, b) in edges.range((next, 0)..(next + 1, 0)) {
            debug_assert_eq!(a, next);
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.insert(b);
            }
        }
    }
    if topo.len() < n {
        let remaining: BTreeSet<usize> =
            (0..n).filter(|i| !topo.contains(i)).collect();
        return Err(GraphError::CyclicDependency(extract_cycle(
            &nodes, &edges, &remaining,
        )));
    }
    Ok(ServiceGraph { nodes, edges, topo })
}

/// Walk forward from the smallest stuck node, always taking the smallest
/// stuck successor, until a node repeats; the repeated segment is a cycle.
fn extract_cycle(
    nodes: &[(String, String)],
    edges: &BTreeSet<(usize, usize)>,
    remaining: &BTreeSet<usize>,
) -> Vec<(String, String)> {
    let start = *remaining.iter().next().expect("non-empty remainder");
    let mut path: Vec<usize> = alloc::vec![start];
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    seen.insert(start, 0);
    let mut cur = start;
    loop {
        let next = edges
            .range((cur, 0)..(cur + 1, 0))
            .map(|&(_, b)| b)
            .find(|b| remaining.contains(b))
            .expect("stuck node must have a stuck successor");
        if let Some(&at) = seen.get(&next) {
            return path[at..].iter().map(|&i| nodes[i].clone()).collect();
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

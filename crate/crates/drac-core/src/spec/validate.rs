//! Static checks over a parsed architecture.
//!
//! Reference errors (peers, services or attributes that do not exist) are the
//! only errors; everything else the format can express is descriptive, so
//! dataflow loose ends and integration-model mismatches are reported as
//! warnings and never block loading.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{ArchitectureSpec, InputBinding, OutputBinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub severity: Severity,
    pub line: u32,
    /// `Drac` or `Drac/Service` path the finding is attached to.
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn is_clean(&self) -> bool {
        self.error_count() == 0
    }
}

/// Where an input reads from: `peer_attribute` when named, else the payload
/// name, on the peer DRAC.
pub(crate) fn input_source(input: &InputBinding) -> (&str, &str) {
    (
        input.peer_drac.as_str(),
        input
            .peer_attribute
            .as_deref()
            .unwrap_or(input.payload_name.as_str()),
    )
}

/// Where an output lands: the named attribute on the peer when declared
/// there, else the producer's own attribute of the payload name. `None` when
/// the peer is external (no in-world landing) or nothing declares the name.
pub(crate) fn output_landing<'s>(
    spec: &'s ArchitectureSpec,
    producer: &str,
    output: &OutputBinding,
) -> Option<(&'s str, &'s str)> {
    if spec.is_external(&output.peer_drac) {
        return None;
    }
    let target = output
        .peer_attribute
        .as_deref()
        .unwrap_or(output.payload_name.as_str());
    for candidate in [output.peer_drac.as_str(), producer] {
        if let Some(drac) = spec.drac(candidate) {
            if let Some(attr) = drac.attribute(target) {
                return Some((drac.name.as_str(), attr.name.as_str()));
            }
        }
    }
    None
}

pub fn validate_architecture(spec: &ArchitectureSpec) -> ValidationReport {
    let mut findings = Vec::new();
    let err = |line: u32, location: String, message: String| Finding {
        severity: Severity::Error,
        line,
        location,
        message,
    };
    let warn = |line: u32, location: String, message: String| Finding {
        severity: Severity::Warning,
        line,
        location,
        message,
    };

    // (drac, attribute) pairs that some output lands on, or that some
    // service reads as an external stimulus surface (input with no peer
    // service), and pairs read by any input.
    let mut produced: BTreeSet<(String, String)> = BTreeSet::new();
    let mut consumed: BTreeSet<(String, String)> = BTreeSet::new();

    for drac in &spec.dracs {
        for svc in &drac.services {
            let loc = format!("{}/{}", drac.name, svc.name);
            for input in &svc.inputs {
                let peer_is_drac = spec.drac(&input.peer_drac).is_some();
                if !peer_is_drac && !spec.is_external(&input.peer_drac) {
                    findings.push(err(
                        input.line.0,
                        loc.clone(),
                        format!(
                            "input \"{}\" references unknown peer '{}'",
                            input.payload_name, input.peer_drac
                        ),
                    ));
                    continue;
                }
                if !peer_is_drac {
                    // declared external: opaque, nothing further to resolve
                    if input.peer_service.is_some() || input.peer_attribute.is_some() {
                        findings.push(err(
                            input.line.0,
                            loc.clone(),
                            format!(
                                "input \"{}\" references a service or attribute on external '{}'",
                                input.payload_name, input.peer_drac
                            ),
                        ));
                    }
                    continue;
                }
                let peer = spec.drac(&input.peer_drac).unwrap();
                if let Some(ps) = &input.peer_service {
                    if peer.service(ps).is_none() {
                        findings.push(err(
                            input.line.0,
                            loc.clone(),
                            format!(
                                "input \"{}\" references service \"{}\" which '{}' does not provide",
                                input.payload_name, ps, peer.name
                            ),
                        ));
                    }
                }
                let (src_drac, src_attr) = input_source(input);
                if peer.attribute(src_attr).is_none() {
                    if input.peer_attribute.is_some() {
                        findings.push(err(
                            input.line.0,
                            loc.clone(),
                            format!(
                                "input \"{}\" references attribute \"{}\" which '{}' does not declare",
                                input.payload_name, src_attr, peer.name
                            ),
                        ));
                    } else {
                        findings.push(warn(
                            input.line.0,
                            loc.clone(),
                            format!(
                                "input \"{}\" matches no attribute declared by '{}' and can never be satisfied",
                                input.payload_name, peer.name
                            ),
                        ));
                    }
                } else {
                    consumed.insert((src_drac.into(), src_attr.into()));
                    if input.peer_service.is_none() {
                        produced.insert((src_drac.into(), src_attr.into()));
                    }
                }
            }
            for output in &svc.outputs {
                let peer_is_drac = spec.drac(&output.peer_drac).is_some();
                if !peer_is_drac && !spec.is_external(&output.peer_drac) {
                    findings.push(err(
                        output.line.0,
                        loc.clone(),
                        format!(
                            "output \"{}\" references unknown peer '{}'",
                            output.payload_name, output.peer_drac
                        ),
                    ));
                    continue;
                }
                if !peer_is_drac {
                    if output.peer_service.is_some() || output.peer_attribute.is_some() {
                        findings.push(err(
                            output.line.0,
                            loc.clone(),
                            format!(
                                "output \"{}\" references a service or attribute on external '{}'",
                                output.payload_name, output.peer_drac
                            ),
                        ));
                    }
                    continue;
                }
                let peer = spec.drac(&output.peer_drac).unwrap();
                if let Some(ps) = &output.peer_service {
                    if peer.service(ps).is_none() {
                        findings.push(err(
                            output.line.0,
                            loc.clone(),
                            format!(
                                "output \"{}\" references service \"{}\" which '{}' does not provide",
                                output.payload_name, ps, peer.name
                            ),
                        ));
                    }
                }
                if let Some(pa) = &output.peer_attribute {
                    if peer.attribute(pa).is_none() {
                        findings.push(err(
                            output.line.0,
                            loc.clone(),
                            format!(
                                "output \"{}\" references attribute \"{}\" which '{}' does not declare",
                                output.payload_name, pa, peer.name
                            ),
                        ));
                        continue;
                    }
                }
                match output_landing(spec, &drac.name, output) {
                    Some((d, a)) => {
                        produced.insert((d.into(), a.into()));
                    }
                    None => {
                        findings.push(warn(
                            output.line.0,
                            loc.clone(),
                            format!(
                                "output \"{}\" resolves to no declared attribute and is dropped",
                                output.payload_name
                            ),
                        ));
                    }
                }
            }
            for pre in &svc.preconditions {
                if !svc.inputs.iter().any(|i| i.payload_name == pre.subject) {
                    findings.push(warn(
                        pre.line.0,
                        loc.clone(),
                        format!(
                            "precondition subject \"{}\" matches no input payload of this service",
                            pre.subject
                        ),
                    ));
                }
            }
        }
    }

    // integration-model requirements: the named owner must declare the
    // attribute; violations are the architecture's own inconsistencies
    for drac in &spec.dracs {
        for req in &drac.required_attributes {
            match spec.drac(&req.owner) {
                None => findings.push(warn(
                    req.line.0,
                    drac.name.clone(),
                    format!(
                        "requires attribute \"{}\" of unknown DRAC '{}'",
                        req.attribute, req.owner
                    ),
                )),
                Some(owner) => {
                    if owner.attribute(&req.attribute).is_none() {
                        findings.push(warn(
                            req.line.0,
                            drac.name.clone(),
                            format!(
                                "requires attribute \"{}\" owned by '{}', but '{}' does not declare it",
                                req.attribute, req.owner, req.owner
                            ),
                        ));
                    }
                }
            }
        }
    }

    // dataflow loose ends
    for drac in &spec.dracs {
        for attr in &drac.attributes {
            if !produced.contains(&(drac.name.clone(), attr.name.clone())) {
                findings.push(warn(
                    attr.line.0,
                    drac.name.clone(),
                    format!("attribute \"{}\" is never produced", attr.name),
                ));
            }
        }
    }
    let mut never_consumed: BTreeMap<(String, String), Vec<(u32, String, String)>> =
        BTreeMap::new();
    for drac in &spec.dracs {
        for svc in &drac.services {
            for output in &svc.outputs {
                if let Some((d, a)) = output_landing(spec, &drac.name, output) {
                    if !consumed.contains(&(d.into(), a.into())) {
                        never_consumed
                            .entry((d.into(), a.into()))
                            .or_default()
                            .push((
                                output.line.0,
                                format!("{}/{}", drac.name, svc.name),
                                output.payload_name.clone(),
                            ));
                    }
                }
            }
        }
    }
    for ((d, a), sites) in never_consumed {
        for (line, loc, payload) in sites {
            findings.push(Finding {
                severity: Severity::Warning,
                line,
                location: loc,
                message: format!(
                    "output \"{payload}\" lands on \"{a}\" of '{d}' which no service consumes"
                ),
            });
        }
    }

    ValidationReport { findings }
}

//! Contract-checked discrete-event execution of a validated architecture.
//!
//! A [`World`] instantiates one store per DRAC, wires outputs to the
//! attributes they land on, and repeatedly fires whichever enabled service
//! comes first in service-graph topological order. Firing is enabled when
//! every input is satisfied from its source attribute and at least one of
//! those sources has been written since the service last ran. Outputs marked
//! `via fax` ride the lossy channel and land only on delivery.

pub mod order;
pub mod trace;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{
    Channel, ChannelConfig, ChannelEvent, ChannelEventKind, Destination, MessageId,
};
use crate::spec::{
    input_source, output_landing, service_graph, ArchitectureSpec, AttrKind, Criticality,
    Frequency, InputBinding, ServiceSpec,
};
use crate::SplitMix64;
use trace::{Trace, TraceEvent, TraceKind};

/// Minutes-since-start clock plus the named deterministic generator every
/// stochastic draw flows from.
#[derive(Debug, Clone)]
pub struct SimClock {
    pub now: u64,
    pub seed: u64,
    rng: SplitMix64,
}

impl SimClock {
    pub fn new(seed: u64) -> Self {
        SimClock {
            now: 0,
            seed,
            rng: SplitMix64::new(seed),
        }
    }

    fn sample_duration(&mut self, lo_min: u32, hi_min: u32) -> u64 {
        self.rng.uniform_u32(lo_min, hi_min) as u64
    }

    fn advance_to(&mut self, t: u64) {
        debug_assert!(t >= self.now, "clock never decreases");
        self.now = t;
    }
}

#[derive(Debug, Clone, Default)]
struct Cell {
    /// Global write counter value at the most recent write; 0 = never.
    version: u64,
    /// Service that last wrote, `None` for external stimulus writes.
    writer_service: Option<String>,
    value: Option<String>,
    fired: bool,
}

/// Runtime home of one DRAC's attributes.
#[derive(Debug, Clone)]
pub struct DracInstance {
    cells: BTreeMap<String, Cell>,
}

impl DracInstance {
    pub fn event_fired(&self, attribute: &str) -> bool {
        self.cells.get(attribute).map(|c| c.fired).unwrap_or(false)
    }

    pub fn data_value(&self, attribute: &str) -> Option<&str> {
        self.cells.get(attribute).and_then(|c| c.value.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StimulusKind {
    Event,
    Data,
    /// Direct service invocation, contract-checked like any firing.
    Invoke,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub time: u64,
    pub drac: String,
    pub kind: StimulusKind,
    pub name: String,
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    UnknownDrac {
        drac: String,
    },
    UnknownService {
        drac: String,
        service: String,
    },
    UnknownAttribute {
        drac: String,
        attribute: String,
    },
    KindMismatch {
        drac: String,
        attribute: String,
    },
    /// A high-criticality precondition failed; also recorded in the trace.
    ContractViolation {
        drac: String,
        service: String,
        subject: String,
        statement: String,
    },
    NonTermination {
        drac: String,
        service: String,
        firings: u32,
    },
    ContinuousFrequency {
        drac: String,
        service: String,
    },
    StimuliOutOfOrder,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::UnknownDrac { drac } => write!(f, "unknown drac {drac}"),
            EngineError::UnknownService { drac, service } => {
                write!(f, "unknown service {drac}/{service}")
            }
            EngineError::UnknownAttribute { drac, attribute } => {
                write!(f, "unknown attribute {attribute} on {drac}")
            }
            EngineError::KindMismatch { drac, attribute } => {
                write!(f, "stimulus kind does not match attribute {attribute} on {drac}")
            }
            EngineError::ContractViolation {
                drac,
                service,
                statement,
                ..
            } => write!(f, "contract violation in {drac}/{service}: {statement}"),
            EngineError::NonTermination {
                drac,
                service,
                firings,
            } => write!(
                f,
                "{drac}/{service} fired {firings} times; likely a dependency cycle"
            ),
            EngineError::ContinuousFrequency { drac, service } => write!(
                f,
                "{drac}/{service} declares continuous frequency, which has no runtime meaning"
            ),
            EngineError::StimuliOutOfOrder => f.write_str("stimuli must be time-sorted"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub seed: u64,
    pub channel: ChannelConfig,
    /// Per-service firing cap; exceeding it aborts the run.
    pub firing_limit: u32,
    /// Order id stamped on every outgoing fax.
    pub order_id: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seed: 0,
            channel: ChannelConfig::default(),
            firing_limit: 100,
            order_id: 0,
        }
    }
}

pub const DEFAULT_FIRING_LIMIT: u32 = 100;

/// A write parked on the channel: applied when its fax delivers.
#[derive(Debug, Clone)]
struct PendingLanding {
    drac: String,
    attribute: String,
    writer_service: String,
    sender_drac: String,
}

enum FireMode {
    /// Scheduler path: caller established full enablement.
    Scheduled,
    /// Direct invocation: only high-criticality preconditions gate.
    Invoked,
}

pub struct World<'a> {
    spec: &'a ArchitectureSpec,
    instances: BTreeMap<String, DracInstance>,
    clock: SimClock,
    channel: Channel,
    trace: Trace,
    write_counter: u64,
    last_fired: BTreeMap<(String, String), u64>,
    fire_counts: BTreeMap<(String, String), u32>,
    fire_order: Vec<(String, String)>,
    pending_landings: BTreeMap<MessageId, PendingLanding>,
    firing_limit: u32,
    order_id: u64,
}

/// Fixed routing of declared externals onto channel destinations. Outputs to
/// other externals are traced as untracked sends and nothing more.
fn destination_for_external(name: &str) -> Option<Destination> {
    match name {
        "Vendor" => Some(Destination::Vendor),
        "ReceivingDept" => Some(Destination::ReceivingDept),
        _ => None,
    }
}

/// The two field roles reachable by fax inside the architecture.
fn destination_for_drac(name: &str) -> Option<Destination> {
    match name {
        "Measurer" => Some(Destination::Measurer),
        "Installer" => Some(Destination::Installer),
        _ => None,
    }
}

impl<'a> World<'a> {
    /// Build a world over a validated spec. Continuous-frequency services
    /// are rejected here; a cyclic service graph falls back to declaration
    /// order and relies on the firing limit.
    pub fn new(spec: &'a ArchitectureSpec, config: EngineConfig) -> Result<Self, EngineError> {
        for d in &spec.dracs {
            for s in &d.services {
                if s.frequency == Frequency::Continuous {
                    return Err(EngineError::ContinuousFrequency {
                        drac: d.name.clone(),
                        service: s.name.clone(),
                    });
                }
            }
        }
        let mut instances = BTreeMap::new();
        for d in &spec.dracs {
            let cells = d
                .attributes
                .iter()
                .map(|a| (a.name.clone(), Cell::default()))
                .collect();
            instances.insert(d.name.clone(), DracInstance { cells });
        }
        let fire_order = match service_graph(spec) {
            Ok(g) => g.topo.iter().map(|i| g.nodes[*i].clone()).collect(),
            Err(_) => spec
                .dracs
                .iter()
                .flat_map(|d| {
                    d.services
                        .iter()
                        .map(|s| (d.name.clone(), s.name.clone()))
                })
                .collect(),
        };
        let mut seeder = SplitMix64::new(config.seed);
        let clock_seed = seeder.next_u64();
        let channel_seed = seeder.next_u64();
        Ok(World {
            spec,
            instances,
            clock: SimClock::new(clock_seed),
            channel: Channel::new(config.channel, channel_seed),
            trace: Trace::new(),
            write_counter: 0,
            last_fired: BTreeMap::new(),
            fire_counts: BTreeMap::new(),
            fire_order,
            pending_landings: BTreeMap::new(),
            firing_limit: config.firing_limit,
            order_id: config.order_id,
        })
    }

    pub fn now(&self) -> u64 {
        self.clock.now
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut Trace {
        &mut self.trace
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn instance(&self, drac: &str) -> Option<&DracInstance> {
        self.instances.get(drac)
    }

    fn attr_kind(&self, drac: &str, attribute: &str) -> Option<&AttrKind> {
        self.spec.drac(drac)?.attribute(attribute).map(|a| &a.kind)
    }

    /// Write a value or fire an event on a declared attribute, tracing it.
    fn write_cell(
        &mut self,
        drac: &str,
        attribute: &str,
        writer_service: Option<&str>,
        value: Option<String>,
        time: u64,
        detail: String,
    ) {
        let kind = self
            .attr_kind(drac, attribute)
            .expect("writes target declared attributes")
            .clone();
        self.write_counter += 1;
        let cell = self
            .instances
            .get_mut(drac)
            .expect("instance per drac")
            .cells
            .get_mut(attribute)
            .expect("cell per declared attribute");
        cell.version = self.write_counter;
        cell.writer_service = writer_service.map(|s| s.to_string());
        let trace_kind = if kind.is_event() {
            cell.fired = true;
            TraceKind::EventFired
        } else {
            cell.value = Some(value.unwrap_or_default());
            TraceKind::DataWritten
        };
        self.trace.push(TraceEvent {
            time,
            kind: trace_kind,
            drac: drac.to_string(),
            subject: attribute.to_string(),
            detail,
        });
    }

    /// Is this input satisfied from its source attribute right now?
    fn input_satisfied(&self, input: &InputBinding) -> bool {
        let (src_drac, src_attr) = input_source(input);
        let Some(instance) = self.instances.get(src_drac) else {
            return false;
        };
        let Some(cell) = instance.cells.get(src_attr) else {
            return false;
        };
        let Some(kind) = self.attr_kind(src_drac, src_attr) else {
            return false;
        };
        let present = if kind.is_event() {
            cell.fired
        } else {
            cell.version > 0
        };
        let provenance_ok = match &input.peer_service {
            Some(tag) => cell.writer_service.as_deref() == Some(tag.as_str()),
            None => true,
        };
        present && provenance_ok
    }

    fn input_version(&self, input: &InputBinding) -> u64 {
        let (src_drac, src_attr) = input_source(input);
        self.instances
            .get(src_drac)
            .and_then(|i| i.cells.get(src_attr))
            .map(|c| c.version)
            .unwrap_or(0)
    }

    /// Enabled: every input satisfied, and some input written since the last
    /// firing. Services without inputs never self-enable.
    fn service_enabled(&self, drac: &str, service: &ServiceSpec) -> bool {
        if service.inputs.is_empty() {
            return false;
        }
        if !service.inputs.iter().all(|i| self.input_satisfied(i)) {
            return false;
        }
        let newest = service
            .inputs
            .iter()
            .map(|i| self.input_version(i))
            .max()
            .unwrap_or(0);
        let threshold = self
            .last_fired
            .get(&(drac.to_string(), service.name.clone()))
            .copied()
            .unwrap_or(0);
        newest > threshold
    }

    fn find_enabled(&self) -> Option<(String, String)> {
        for (d, s) in &self.fire_order {
            let svc = self.spec.drac(d).and_then(|dr| dr.service(s));
            if let Some(svc) = svc {
                if self.service_enabled(d, svc) {
                    return Some((d.clone(), s.clone()));
                }
            }
        }
        None
    }

    fn trace_channel_event(ev: &ChannelEvent) -> TraceEvent {
        let (kind, detail) = match &ev.kind {
            ChannelEventKind::Sent { resent_from: None } => (
                TraceKind::MessageSent,
                format!(
                    "msg {} order {} attempt {} {}",
                    ev.id, ev.order_id, ev.attempt, ev.payload
                ),
            ),
            ChannelEventKind::Sent {
                resent_from: Some(old),
            } => (
                TraceKind::MessageSent,
                format!(
                    "msg {} order {} attempt {} {} resent_from {}",
                    ev.id, ev.order_id, ev.attempt, ev.payload, old
                ),
            ),
            ChannelEventKind::Delivered => (
                TraceKind::MessageDelivered,
                format!("msg {} order {} attempt {}", ev.id, ev.order_id, ev.attempt),
            ),
            ChannelEventKind::Lost => (
                TraceKind::MessageLost,
                format!(
                    "msg {} order {} attempt {} lost in transit",
                    ev.id, ev.order_id, ev.attempt
                ),
            ),
            ChannelEventKind::Abandoned => (
                TraceKind::MessageLost,
                format!(
                    "msg {} order {} abandoned after {} attempts; operator alert",
                    ev.id, ev.order_id, ev.attempt
                ),
            ),
        };
        TraceEvent {
            time: ev.time,
            kind,
            drac: ev.sender.clone(),
            subject: ev.destination.to_string(),
            detail,
        }
    }

    fn apply_channel_events(&mut self, events: Vec<ChannelEvent>) {
        for ev in events {
            // a message can come due while a service is still running; the
            // trace records when the world saw it, not the wire time
            let seen = self.clock.now.max(ev.time);
            let mut line = Self::trace_channel_event(&ev);
            line.time = seen;
            self.trace.push(line);
            match ev.kind {
                ChannelEventKind::Sent {
                    resent_from: Some(old),
                } => {
                    if let Some(landing) = self.pending_landings.remove(&old) {
                        self.pending_landings.insert(ev.id, landing);
                    }
                }
                ChannelEventKind::Delivered => {
                    if let Some(landing) = self.pending_landings.remove(&ev.id) {
                        let detail = format!(
                            "fax delivery from {}/{}",
                            landing.sender_drac, landing.writer_service
                        );
                        self.write_cell(
                            &landing.drac.clone(),
                            &landing.attribute.clone(),
                            Some(&landing.writer_service.clone()),
                            Some(detail.clone()),
                            seen,
                            detail,
                        );
                    }
                }
                ChannelEventKind::Abandoned => {
                    // the write is genuinely lost; downstream work stalls
                    self.pending_landings.remove(&ev.id);
                }
                _ => {}
            }
        }
    }

    fn drain_channel(&mut self) {
        let due = self.channel.drain_due(self.clock.now);
        if !due.is_empty() {
            self.apply_channel_events(due);
        }
    }

    fn fire(&mut self, drac: &str, service: &str, mode: FireMode) -> Result<(), EngineError> {
        let key = (drac.to_string(), service.to_string());
        let svc = self
            .spec
            .drac(drac)
            .and_then(|d| d.service(service))
            .expect("caller verified service")
            .clone();

        if let FireMode::Invoked = mode {
            for pre in &svc.preconditions {
                if pre.criticality != Some(Criticality::High) {
                    continue;
                }
                let satisfied = match svc.inputs.iter().find(|i| i.payload_name == pre.subject) {
                    Some(input) => self.input_satisfied(input),
                    // no matching input: nothing to evaluate against
                    None => true,
                };
                if !satisfied {
                    self.trace.push(TraceEvent {
                        time: self.clock.now,
                        kind: TraceKind::ContractViolation,
                        drac: drac.to_string(),
                        subject: service.to_string(),
                        detail: pre.statement.clone(),
                    });
                    return Err(EngineError::ContractViolation {
                        drac: drac.to_string(),
                        service: service.to_string(),
                        subject: pre.subject.clone(),
                        statement: pre.statement.clone(),
                    });
                }
            }
        }

        let count = self.fire_counts.entry(key.clone()).or_insert(0);
        if *count >= self.firing_limit {
            return Err(EngineError::NonTermination {
                drac: drac.to_string(),
                service: service.to_string(),
                firings: *count,
            });
        }
        *count += 1;
        self.last_fired.insert(key, self.write_counter);

        let t0 = self.clock.now;
        self.trace.push(TraceEvent {
            time: t0,
            kind: TraceKind::ServiceStarted,
            drac: drac.to_string(),
            subject: service.to_string(),
            detail: String::new(),
        });
        let duration = self
            .clock
            .sample_duration(svc.duration.lo_min, svc.duration.hi_min);
        let t1 = t0 + duration;
        self.clock.advance_to(t1);
        self.trace.push(TraceEvent {
            time: t1,
            kind: TraceKind::ServiceCompleted,
            drac: drac.to_string(),
            subject: service.to_string(),
            detail: format!("duration {duration}"),
        });

        for out in &svc.outputs {
            if self.spec.is_external(&out.peer_drac) {
                match destination_for_external(&out.peer_drac) {
                    Some(dest) => {
                        let ev = self.channel.send(drac, self.order_id, dest, t1);
                        self.apply_channel_events(alloc::vec![ev]);
                    }
                    None => self.trace.push(TraceEvent {
                        time: t1,
                        kind: TraceKind::MessageSent,
                        drac: drac.to_string(),
                        subject: out.peer_drac.clone(),
                        detail: format!("untracked {} {}", out.payload_kind, out.payload_name),
                    }),
                }
                continue;
            }
            let Some((land_drac, land_attr)) = output_landing(self.spec, drac, out) else {
                // validation already warned that this output is dropped
                continue;
            };
            let (land_drac, land_attr) = (land_drac.to_string(), land_attr.to_string());
            match (out.via_fax, destination_for_drac(&land_drac)) {
                (true, Some(dest)) => {
                    let ev = self.channel.send(drac, self.order_id, dest, t1);
                    self.pending_landings.insert(
                        ev.id,
                        PendingLanding {
                            drac: land_drac,
                            attribute: land_attr,
                            writer_service: svc.name.clone(),
                            sender_drac: drac.to_string(),
                        },
                    );
                    self.apply_channel_events(alloc::vec![ev]);
                }
                _ => {
                    let detail = format!("by {}/{}", drac, svc.name);
                    self.write_cell(
                        &land_drac,
                        &land_attr,
                        Some(&svc.name),
                        Some(detail.clone()),
                        t1,
                        detail,
                    );
                }
            }
        }
        Ok(())
    }

    /// Invoke one service directly. High-criticality preconditions gate the
    /// run; a failure leaves the world untouched apart from the
    /// contract_violation trace line.
    pub fn execute_service(&mut self, drac: &str, service: &str) -> Result<(), EngineError> {
        let d = self
            .spec
            .drac(drac)
            .ok_or_else(|| EngineError::UnknownDrac {
                drac: drac.to_string(),
            })?;
        if d.service(service).is_none() {
            return Err(EngineError::UnknownService {
                drac: drac.to_string(),
                service: service.to_string(),
            });
        }
        self.fire(drac, service, FireMode::Invoked)?;
        self.drain_channel();
        Ok(())
    }

    fn apply_stimulus(&mut self, stimulus: &Stimulus) -> Result<(), EngineError> {
        match stimulus.kind {
            StimulusKind::Invoke => {
                match self.execute_service(&stimulus.drac, &stimulus.name) {
                    // the violation is on the trace; the run goes on
                    Err(EngineError::ContractViolation { .. }) | Ok(()) => Ok(()),
                    Err(other) => Err(other),
                }
            }
            StimulusKind::Event | StimulusKind::Data => {
                let kind = self
                    .attr_kind(&stimulus.drac, &stimulus.name)
                    .ok_or_else(|| {
                        if self.spec.drac(&stimulus.drac).is_none() {
                            EngineError::UnknownDrac {
                                drac: stimulus.drac.clone(),
                            }
                        } else {
                            EngineError::UnknownAttribute {
                                drac: stimulus.drac.clone(),
                                attribute: stimulus.name.clone(),
                            }
                        }
                    })?;
                let is_event_stim = stimulus.kind == StimulusKind::Event;
                if kind.is_event() != is_event_stim {
                    return Err(EngineError::KindMismatch {
                        drac: stimulus.drac.clone(),
                        attribute: stimulus.name.clone(),
                    });
                }
                self.write_cell(
                    &stimulus.drac.clone(),
                    &stimulus.name.clone(),
                    None,
                    stimulus.value.clone(),
                    self.clock.now,
                    "stimulus".to_string(),
                );
                Ok(())
            }
        }
    }

    /// Drive the world until nothing is enabled, no stimulus remains and the
    /// channel is idle. Stimuli must be time-sorted; each is applied once
    /// every earlier cascade has quiesced.
    pub fn run_to_quiescence(&mut self, stimuli: &[Stimulus]) -> Result<(), EngineError> {
        if stimuli.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(EngineError::StimuliOutOfOrder);
        }
        let mut next_stimulus = 0usize;
        loop {
            self.drain_channel();
            if let Some((d, s)) = self.find_enabled() {
                self.fire(&d, &s, FireMode::Scheduled)?;
                continue;
            }
            let stim_time = stimuli
                .get(next_stimulus)
                .map(|s| s.time.max(self.clock.now));
            let chan_time = self.channel.next_pending();
            match (stim_time, chan_time) {
                (Some(ts), Some(tc)) if tc <= ts => self.clock.advance_to(tc),
                (Some(_), _) => {
                    let st = &stimuli[next_stimulus];
                    next_stimulus += 1;
                    let at = st.time.max(self.clock.now);
                    self.clock.advance_to(at);
                    self.apply_stimulus(st)?;
                }
                (None, Some(tc)) => self.clock.advance_to(tc),
                (None, None) => break,
            }
        }
        Ok(())
    }
}

/// Replay a trace against the spec and confirm that every completed
/// service's high-criticality preconditions held when it started. Presence
/// is reconstructed from the write events earlier in the trace.
pub fn audit_trace(spec: &ArchitectureSpec, events: &[TraceEvent]) -> Result<(), String> {
    use alloc::collections::BTreeSet;
    let mut present: BTreeSet<(&str, &str)> = BTreeSet::new();
    let completed: BTreeSet<(&str, &str, u64)> = events
        .iter()
        .filter(|e| e.kind == TraceKind::ServiceCompleted)
        .map(|e| (e.drac.as_str(), e.subject.as_str(), e.time))
        .collect();
    for event in events {
        match event.kind {
            TraceKind::EventFired | TraceKind::DataWritten => {
                present.insert((event.drac.as_str(), event.subject.as_str()));
            }
            TraceKind::ServiceStarted => {
                // only audit firings that ran to completion
                if !completed
                    .iter()
                    .any(|(d, s, t)| *d == event.drac && *s == event.subject && *t >= event.time)
                {
                    continue;
                }
                let svc = spec
                    .drac(&event.drac)
                    .and_then(|d| d.service(&event.subject))
                    .ok_or_else(|| {
                        format!("trace names unknown service {}/{}", event.drac, event.subject)
                    })?;
                for pre in &svc.preconditions {
                    if pre.criticality != Some(Criticality::High) {
                        continue;
                    }
                    let Some(input) = svc.inputs.iter().find(|i| i.payload_name == pre.subject)
                    else {
                        continue;
                    };
                    let (src_drac, src_attr) = input_source(input);
                    if !present.contains(&(src_drac, src_attr)) {
                        return Err(format!(
                            "at t={} {}/{} started but `{}` was absent: {}",
                            event.time, event.drac, event.subject, pre.subject, pre.statement
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_architecture;
    use alloc::vec;

    const CHAIN: &str = r#"
drac A
  attribute "Go" : event
  attribute "X" : data
  service "Make X"
    duration 5 5 min
    frequency discrete
    input event "Go" from A
    output data "X" to B

drac B
  attribute "X" : data
  attribute "Done" : event
  service "Consume X"
    duration 3 3 min
    frequency discrete
    input data "X" from B service "Make X"
    output event "Done" to B
"#;

    fn stim_event(time: u64, drac: &str, name: &str) -> Stimulus {
        Stimulus {
            time,
            drac: drac.to_string(),
            kind: StimulusKind::Event,
            name: name.to_string(),
            value: None,
        }
    }

    #[test]
    fn chain_fires_in_order_with_exact_trace() {
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "A", "Go")])
            .unwrap();
        assert_eq!(
            world.trace().render(),
            "0\tevent_fired\tA\tGo\tstimulus\n\
             0\tservice_started\tA\tMake X\t\n\
             5\tservice_completed\tA\tMake X\tduration 5\n\
             5\tdata_written\tB\tX\tby A/Make X\n\
             5\tservice_started\tB\tConsume X\t\n\
             8\tservice_completed\tB\tConsume X\tduration 3\n\
             8\tevent_fired\tB\tDone\tby B/Consume X\n"
        );
        assert!(world.instance("B").unwrap().event_fired("Done"));
        assert_eq!(world.now(), 8);
    }

    #[test]
    fn empty_stimuli_leave_an_empty_trace() {
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world.run_to_quiescence(&[]).unwrap();
        assert!(world.trace().is_empty());
    }

    #[test]
    fn a_new_write_re_enables_consumers() {
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "A", "Go"), stim_event(100, "A", "Go")])
            .unwrap();
        let completions = world
            .trace()
            .events()
            .iter()
            .filter(|e| e.kind == TraceKind::ServiceCompleted)
            .count();
        assert_eq!(completions, 4, "both services fire twice");
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let ranged = CHAIN.replace("duration 5 5 min", "duration 1 60 min");
        let spec = parse_architecture(&ranged).unwrap();
        let run = |seed: u64| {
            let cfg = EngineConfig {
                seed,
                ..EngineConfig::default()
            };
            let mut world = World::new(&spec, cfg).unwrap();
            world
                .run_to_quiescence(&[stim_event(0, "A", "Go")])
                .unwrap();
            world.trace().render()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn provenance_tag_gates_consumption() {
        // X written by stimulus does not satisfy `service "Make X"` tagged input
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[Stimulus {
                time: 0,
                drac: "B".to_string(),
                kind: StimulusKind::Data,
                name: "X".to_string(),
                value: Some("handwritten".to_string()),
            }])
            .unwrap();
        assert!(!world.instance("B").unwrap().event_fired("Done"));
        assert_eq!(world.instance("B").unwrap().data_value("X"), Some("handwritten"));
    }

    const CYCLE: &str = r#"
drac A
  attribute "P" : event
  attribute "Q" : event
  service "S1"
    duration 1 1 min
    frequency discrete
    input event "Q" from A
    output event "P" to A
  service "S2"
    duration 1 1 min
    frequency discrete
    input event "P" from A
    output event "Q" to A
"#;

    #[test]
    fn cycle_trips_the_firing_limit() {
        let spec = parse_architecture(CYCLE).unwrap();
        let cfg = EngineConfig {
            firing_limit: 10,
            ..EngineConfig::default()
        };
        let mut world = World::new(&spec, cfg).unwrap();
        let err = world
            .run_to_quiescence(&[stim_event(0, "A", "P")])
            .unwrap_err();
        match err {
            EngineError::NonTermination { firings, .. } => assert_eq!(firings, 10),
            other => panic!("expected NonTermination, got {other}"),
        }
    }

    const GATED: &str = r#"
drac C
  attribute "Invoice" : data
  attribute "Paid" : event
  service "Pay Cashier"
    duration 1 1 min
    frequency discrete
    input data "Invoice" from C
    output event "Paid" to C
    pre "Invoice" "Invoice should be generated before this service" criticality high
"#;

    #[test]
    fn invoking_without_the_invoice_is_a_contract_violation() {
        let spec = parse_architecture(GATED).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        let err = world.execute_service("C", "Pay Cashier").unwrap_err();
        match &err {
            EngineError::ContractViolation { statement, .. } => {
                assert_eq!(statement, "Invoice should be generated before this service")
            }
            other => panic!("expected violation, got {other}"),
        }
        assert_eq!(
            world.trace().render(),
            "0\tcontract_violation\tC\tPay Cashier\tInvoice should be generated before this service\n"
        );
        assert!(!world.instance("C").unwrap().event_fired("Paid"));

        // with the invoice present the same invocation completes
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[Stimulus {
                time: 0,
                drac: "C".to_string(),
                kind: StimulusKind::Data,
                name: "Invoice".to_string(),
                value: Some("inv-1".to_string()),
            }])
            .unwrap();
        world.execute_service("C", "Pay Cashier").unwrap();
        assert!(world.instance("C").unwrap().event_fired("Paid"));
    }

    #[test]
    fn invoke_stimulus_records_violation_and_continues() {
        let spec = parse_architecture(GATED).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[Stimulus {
                time: 3,
                drac: "C".to_string(),
                kind: StimulusKind::Invoke,
                name: "Pay Cashier".to_string(),
                value: None,
            }])
            .unwrap();
        assert_eq!(world.trace().events().len(), 1);
        assert_eq!(world.trace().events()[0].kind, TraceKind::ContractViolation);
        assert_eq!(world.trace().events()[0].time, 3);
    }

    const FAXED: &str = r#"
drac Designer
  attribute "Kick" : event
  service "Send request to measurer"
    duration 1 1 min
    frequency discrete
    input event "Kick" from Designer
    output event "Request received" to Measurer via fax

drac Measurer
  attribute "Request received" : event
  attribute "Done" : event
  service "Go measure"
    duration 2 2 min
    frequency discrete
    input event "Request received" from Measurer
    output event "Done" to Measurer
"#;

    #[test]
    fn fax_landing_waits_for_delivery() {
        let spec = parse_architecture(FAXED).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "Designer", "Kick")])
            .unwrap();
        // sent at 1, delivered at 2, measuring 2..4
        assert!(world.instance("Measurer").unwrap().event_fired("Done"));
        let kinds: Vec<TraceKind> = world.trace().events().iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TraceKind::EventFired,       // stimulus
                TraceKind::ServiceStarted,   // send request
                TraceKind::ServiceCompleted,
                TraceKind::MessageSent,
                TraceKind::MessageDelivered,
                TraceKind::EventFired,       // fax landing
                TraceKind::ServiceStarted,   // go measure
                TraceKind::ServiceCompleted,
                TraceKind::EventFired,       // done
            ]
        );
        let landing = &world.trace().events()[5];
        assert_eq!(landing.drac, "Measurer");
        assert_eq!(landing.subject, "Request received");
        assert_eq!(landing.time, 2);
        assert_eq!(world.channel().counts().delivered, 1);
    }

    #[test]
    fn lost_fax_stalls_the_downstream_service() {
        let spec = parse_architecture(FAXED).unwrap();
        let cfg = EngineConfig {
            channel: ChannelConfig {
                loss_probability: 1.0,
                ack_timeout: 5,
                max_attempts: 2,
            },
            ..EngineConfig::default()
        };
        let mut world = World::new(&spec, cfg).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "Designer", "Kick")])
            .unwrap();
        assert!(!world.instance("Measurer").unwrap().event_fired("Done"));
        let rendered = world.trace().render();
        assert!(rendered.contains("operator alert"), "{rendered}");
        assert_eq!(world.channel().counts().abandoned, 1);
        assert_eq!(world.channel().counts().resent, 1);
        // the world still quiesced: clock sits at the final sweep
        assert!(world.channel().is_idle());
    }

    const TO_EXTERNALS: &str = r#"
drac Designer
  attribute "Ready" : event
  service "Send everywhere"
    duration 1 1 min
    frequency discrete
    input event "Ready" from Designer
    output event "Order" to Vendor
    output event "Summary" to ReceivingDept
    output event "Note" to Pigeon

external "Vendor"
external "ReceivingDept"
external "Pigeon"
"#;

    #[test]
    fn externals_route_to_channel_or_untracked() {
        let spec = parse_architecture(TO_EXTERNALS).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "Designer", "Ready")])
            .unwrap();
        // two tracked faxes, one untracked note
        assert_eq!(world.channel().total_sent(), 2);
        assert_eq!(world.channel().counts().delivered, 2);
        let rendered = world.trace().render();
        assert!(rendered.contains("\tmessage_sent\tDesigner\tvendor\t"));
        assert!(rendered.contains("\tmessage_sent\tDesigner\treceiving_dept\t"));
        assert!(rendered.contains("\tmessage_sent\tDesigner\tPigeon\tuntracked event Note"));
        // payload profiles follow the destination
        assert!(rendered.contains("full_detail"));
        assert!(rendered.contains("summary"));
    }

    #[test]
    fn trace_times_never_decrease_and_writes_are_declared() {
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[stim_event(0, "A", "Go"), stim_event(50, "A", "Go")])
            .unwrap();
        let events = world.trace().events();
        for pair in events.windows(2) {
            assert!(pair[0].time <= pair[1].time);
        }
        for e in events {
            if matches!(e.kind, TraceKind::EventFired | TraceKind::DataWritten) {
                let declared = spec
                    .drac(&e.drac)
                    .map(|d| d.attribute(&e.subject).is_some())
                    .unwrap_or(false);
                assert!(declared, "undeclared write {}/{}", e.drac, e.subject);
            }
        }
    }

    #[test]
    fn audit_accepts_real_traces_and_rejects_forged_ones() {
        let spec = parse_architecture(GATED).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        world
            .run_to_quiescence(&[Stimulus {
                time: 0,
                drac: "C".to_string(),
                kind: StimulusKind::Data,
                name: "Invoice".to_string(),
                value: None,
            }])
            .unwrap();
        world.execute_service("C", "Pay Cashier").unwrap();
        audit_trace(&spec, world.trace().events()).unwrap();

        // forge a start with no invoice write before it
        let forged = vec![
            TraceEvent {
                time: 0,
                kind: TraceKind::ServiceStarted,
                drac: "C".to_string(),
                subject: "Pay Cashier".to_string(),
                detail: String::new(),
            },
            TraceEvent {
                time: 1,
                kind: TraceKind::ServiceCompleted,
                drac: "C".to_string(),
                subject: "Pay Cashier".to_string(),
                detail: "duration 1".to_string(),
            },
        ];
        assert!(audit_trace(&spec, &forged).is_err());
    }

    #[test]
    fn load_rejects_continuous_frequency() {
        let continuous = CHAIN.replace("frequency discrete", "frequency continuous");
        let spec = parse_architecture(&continuous).unwrap();
        match World::new(&spec, EngineConfig::default()) {
            Err(EngineError::ContinuousFrequency { .. }) => {}
            other => panic!("expected ContinuousFrequency, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        let spec = parse_architecture(CHAIN).unwrap();
        let mut world = World::new(&spec, EngineConfig::default()).unwrap();
        assert!(matches!(
            world.execute_service("Z", "Make X"),
            Err(EngineError::UnknownDrac { .. })
        ));
        assert!(matches!(
            world.execute_service("A", "Nope"),
            Err(EngineError::UnknownService { .. })
        ));
        assert!(matches!(
            world.run_to_quiescence(&[stim_event(0, "A", "Nope")]),
            Err(EngineError::UnknownAttribute { .. })
        ));
        let mismatch = Stimulus {
            time: 0,
            drac: "A".to_string(),
            kind: StimulusKind::Data,
            name: "Go".to_string(),
            value: None,
        };
        assert!(matches!(
            world.run_to_quiescence(&[mismatch]),
            Err(EngineError::KindMismatch { .. })
        ));
        assert!(matches!(
            world.run_to_quiescence(&[stim_event(5, "A", "Go"), stim_event(1, "A", "Go")]),
            Err(EngineError::StimuliOutOfOrder)
        ));
    }
}

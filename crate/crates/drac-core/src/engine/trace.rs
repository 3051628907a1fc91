//! Append-only execution trace. One line per event, tab-separated, with a
//! stable sequence number breaking ties at equal times; the serialized form
//! is the byte-compared artifact in regression tests.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceKind {
    ServiceStarted,
    ServiceCompleted,
    EventFired,
    DataWritten,
    MessageSent,
    MessageDelivered,
    MessageLost,
    ContractViolation,
}

impl TraceKind {
    pub fn label(self) -> &'static str {
        match self {
            TraceKind::ServiceStarted => "service_started",
            TraceKind::ServiceCompleted => "service_completed",
            TraceKind::EventFired => "event_fired",
            TraceKind::DataWritten => "data_written",
            TraceKind::MessageSent => "message_sent",
            TraceKind::MessageDelivered => "message_delivered",
            TraceKind::MessageLost => "message_lost",
            TraceKind::ContractViolation => "contract_violation",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: u64,
    pub kind: TraceKind,
    pub drac: String,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.time, self.kind, self.drac, self.subject, self.detail
        )
    }
}

/// Strictly time-ordered event log; pushes assert monotonicity.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn push(&mut self, event: TraceEvent) {
        if let Some(last) = self.events.last() {
            debug_assert!(event.time >= last.time, "trace time went backwards");
        }
        self.events.push(event);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The byte-compared serialization: one line per event, newline after
    /// each line.
    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn line_format_is_tab_separated() {
        let e = TraceEvent {
            time: 12,
            kind: TraceKind::DataWritten,
            drac: "Designer".to_string(),
            subject: "Measurements".to_string(),
            detail: "by Record Measurements".to_string(),
        };
        assert_eq!(
            e.to_string(),
            "12\tdata_written\tDesigner\tMeasurements\tby Record Measurements"
        );
    }

    #[test]
    fn render_emits_one_line_per_event() {
        let mut t = Trace::new();
        t.push(TraceEvent {
            time: 0,
            kind: TraceKind::ServiceStarted,
            drac: "D".to_string(),
            subject: "S".to_string(),
            detail: String::new(),
        });
        t.push(TraceEvent {
            time: 3,
            kind: TraceKind::ServiceCompleted,
            drac: "D".to_string(),
            subject: "S".to_string(),
            detail: "duration 3".to_string(),
        });
        assert_eq!(
            t.render(),
            "0\tservice_started\tD\tS\t\n3\tservice_completed\tD\tS\tduration 3\n"
        );
        assert_eq!(t.len(), 2);
    }
}

//! Architecture spec model: DRACs (role components), their attributes and
//! services, and the line-oriented text format they are written in.
//!
//! Names are free-form quoted strings; durations are normalized to minutes at
//! parse time. Source line numbers ride along on every element for findings,
//! but are ignored by equality so a document round-trips through
//! [`render`] / [`parse_architecture`] to an equal value.

mod graph;
mod parse;
mod validate;

pub use graph::{service_graph, GraphError, ServiceGraph};
pub use parse::{parse_architecture, ParseError};
pub use validate::{validate_architecture, Finding, Severity, ValidationReport};

pub(crate) use validate::{input_source, output_landing};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

/// Source line carried for diagnostics. Compares equal to any other line so
/// that re-rendered documents stay structurally equal to their source.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct SrcLine(pub u32);

impl PartialEq for SrcLine {
    fn eq(&self, _other: &SrcLine) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Criticality {
    High,
    Medium,
    Low,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criticality::High => "high",
            Criticality::Medium => "medium",
            Criticality::Low => "low",
        })
    }
}

/// Attribute payload shape: persistent data with a cardinality, or a
/// monotone event flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Data { cardinality: u32 },
    Event,
}

impl AttrKind {
    pub fn is_event(&self) -> bool {
        matches!(self, AttrKind::Event)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttrKind,
    pub description: Option<String>,
    /// Knowledge-model references, stored verbatim and never resolved.
    pub model_refs: Vec<String>,
    pub line: SrcLine,
}

/// Service duration as a closed interval in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DurationRange {
    pub lo_min: u32,
    pub hi_min: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Discrete,
    /// Accepted by the grammar; the engine refuses to run it.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    Data,
    Event,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadKind::Data => "data",
            PayloadKind::Event => "event",
        })
    }
}

/// One consumed payload. The source attribute is `peer_attribute` when given,
/// otherwise the payload name, looked up on `peer_drac`. A binding with no
/// peer service and no peer attribute is an external stimulus surface.
/// When `peer_service` is present the value must have been written by that
/// service for the input to be satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBinding {
    pub payload_name: String,
    pub payload_kind: PayloadKind,
    pub peer_drac: String,
    pub peer_service: Option<String>,
    pub peer_attribute: Option<String>,
    pub line: SrcLine,
}

/// One produced payload, addressed to a peer DRAC or a declared external.
/// `via_fax` routes the write through the lossy channel; it lands only when
/// the fax is delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBinding {
    pub payload_name: String,
    pub payload_kind: PayloadKind,
    pub peer_drac: String,
    pub peer_service: Option<String>,
    pub peer_attribute: Option<String>,
    pub via_fax: bool,
    pub line: SrcLine,
}

/// Pre- or postcondition. Criticality is mandatory for preconditions
/// (enforced at parse time) and optional for postconditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub subject: String,
    pub statement: String,
    pub criticality: Option<Criticality>,
    pub line: SrcLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceSpec {
    pub name: String,
    pub duration: DurationRange,
    pub frequency: Frequency,
    pub inputs: Vec<InputBinding>,
    pub outputs: Vec<OutputBinding>,
    pub preconditions: Vec<Condition>,
    pub postconditions: Vec<Condition>,
    pub line: SrcLine,
}

/// Integration-model requirement: this DRAC needs `attribute`, which the
/// architecture says is owned by `owner`. Transcribed as written; ownership
/// violations are reported by validation, not rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredAttribute {
    pub attribute: String,
    pub owner: String,
    pub line: SrcLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DracSpec {
    pub name: String,
    pub attributes: Vec<AttributeSpec>,
    pub services: Vec<ServiceSpec>,
    pub required_attributes: Vec<RequiredAttribute>,
    pub line: SrcLine,
}

impl DracSpec {
    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn service(&self, name: &str) -> Option<&ServiceSpec> {
        self.services.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub name: String,
    pub line: SrcLine,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArchitectureSpec {
    pub dracs: Vec<DracSpec>,
    pub externals: Vec<ExternalSpec>,
}

impl ArchitectureSpec {
    pub fn drac(&self, name: &str) -> Option<&DracSpec> {
        self.dracs.iter().find(|d| d.name == name)
    }

    pub fn is_external(&self, name: &str) -> bool {
        self.externals.iter().any(|e| e.name == name)
    }

    pub fn service_count(&self) -> usize {
        self.dracs.iter().map(|d| d.services.len()).sum()
    }
}

fn push_name(out: &mut String, name: &str) {
    let bare = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if bare {
        out.push_str(name);
    } else {
        out.push('"');
        out.push_str(name);
        out.push('"');
    }
}

fn push_quoted(out: &mut String, text: &str) {
    out.push('"');
    out.push_str(text);
    out.push('"');
}

/// Render a spec in canonical form: grouped attribute / requires / service
/// blocks, durations in minutes, two-space indentation. Parsing the result
/// yields a value equal to the original.
pub fn render(spec: &ArchitectureSpec) -> String {
    let mut out = String::new();
    for drac in &spec.dracs {
        out.push_str("drac ");
        push_name(&mut out, &drac.name);
        out.push('\n');
        for attr in &drac.attributes {
            out.push_str("  attribute ");
            push_quoted(&mut out, &attr.name);
            match attr.kind {
                AttrKind::Data { cardinality } => {
                    let _ = write!(out, " : data cardinality {cardinality}");
                }
                AttrKind::Event => out.push_str(" : event"),
            }
            if let Some(desc) = &attr.description {
                out.push_str(" desc ");
                push_quoted(&mut out, desc);
            }
            for r in &attr.model_refs {
                out.push_str(" ref ");
                push_quoted(&mut out, r);
            }
            out.push('\n');
        }
        for req in &drac.required_attributes {
            out.push_str("  requires attribute ");
            push_quoted(&mut out, &req.attribute);
            out.push_str(" of ");
            push_name(&mut out, &req.owner);
            out.push('\n');
        }
        for svc in &drac.services {
            out.push_str("  service ");
            push_quoted(&mut out, &svc.name);
            out.push('\n');
            let _ = writeln!(
                out,
                "    duration {} {} min",
                svc.duration.lo_min, svc.duration.hi_min
            );
            out.push_str(match svc.frequency {
                Frequency::Discrete => "    frequency discrete\n",
                Frequency::Continuous => "    frequency continuous\n",
            });
            for input in &svc.inputs {
                let _ = write!(out, "    input {} ", input.payload_kind);
                push_quoted(&mut out, &input.payload_name);
                out.push_str(" from ");
                push_name(&mut out, &input.peer_drac);
                if let Some(s) = &input.peer_service {
                    out.push_str(" service ");
                    push_quoted(&mut out, s);
                }
                if let Some(a) = &input.peer_attribute {
                    out.push_str(" attribute ");
                    push_quoted(&mut out, a);
                }
                out.push('\n');
            }
            for output in &svc.outputs {
                let _ = write!(out, "    output {} ", output.payload_kind);
                push_quoted(&mut out, &output.payload_name);
                out.push_str(" to ");
                push_name(&mut out, &output.peer_drac);
                if let Some(s) = &output.peer_service {
                    out.push_str(" service ");
                    push_quoted(&mut out, s);
                }
                if let Some(a) = &output.peer_attribute {
                    out.push_str(" attribute ");
                    push_quoted(&mut out, a);
                }
                if output.via_fax {
                    out.push_str(" via fax");
                }
                out.push('\n');
            }
            for pre in &svc.preconditions {
                out.push_str("    pre ");
                push_quoted(&mut out, &pre.subject);
                out.push(' ');
                push_quoted(&mut out, &pre.statement);
                if let Some(c) = pre.criticality {
                    let _ = write!(out, " criticality {c}");
                }
                out.push('\n');
            }
            for post in &svc.postconditions {
                out.push_str("    post ");
                push_quoted(&mut out, &post.subject);
                out.push(' ');
                push_quoted(&mut out, &post.statement);
                if let Some(c) = post.criticality {
                    let _ = write!(out, " criticality {c}");
                }
                out.push('\n');
            }
        }
        out.push('\n');
    }
    for ext in &spec.externals {
        out.push_str("external ");
        push_quoted(&mut out, &ext.name);
        out.push('\n');
    }
    out
}

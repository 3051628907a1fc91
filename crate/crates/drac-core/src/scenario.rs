//! Scenario scripts: a line-oriented format that seeds one order, feeds
//! stimuli to the engine, and states what the resulting trace must contain.
//!
//! Expectations are matched as a subsequence of the trace, not an exact
//! transcript: the architecture fixes orderings only where dependencies
//! exist, and exact matching would encode scheduler accidents. The script
//! also drives a projection of the trace onto the order lifecycle so runs
//! can assert a terminal order state.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::domain::{parse_eighth_inches, CustomerInfo, EighthInches};
use crate::engine::order::{
    execute_transition, install_gate, LifecycleEvent, OrderLine, OrderRecord, OrderState,
};
use crate::engine::trace::{TraceEvent, TraceKind};
use crate::engine::{Stimulus, StimulusKind};
use crate::pricing::{apply_markdown, Disposition, MarkdownItem, MarkdownReason, MarkdownRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptError {
    pub line: u32,
    pub message: String,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "script line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryChoice {
    Store,
    Customer,
    Installer,
}

/// The order the scenario is about. Scripts without an `order` directive get
/// an anonymous in-stock order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSetup {
    pub phone: String,
    pub special_order: bool,
    pub delivery: DeliveryChoice,
    pub install: bool,
    /// Measurements taken by the store before the run starts.
    pub hd_measured: bool,
}

impl Default for OrderSetup {
    fn default() -> Self {
        OrderSetup {
            phone: String::from("0000000000"),
            special_order: false,
            delivery: DeliveryChoice::Store,
            install: false,
            hd_measured: false,
        }
    }
}

/// One product line: dimensions in inches as written, parsed to eighths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptLine {
    pub sku: String,
    pub width: EighthInches,
    pub height: EighthInches,
    pub reverse_controls: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelOverrides {
    pub loss_probability: Option<f64>,
    pub ack_timeout: Option<u64>,
    pub max_attempts: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReturnDirective {
    pub reason: MarkdownReason,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseKind {
    /// Matches a service_completed line.
    Service,
    Event,
    Data,
    /// Matches a message_sent line; the subject is the destination.
    Message,
    /// Matches a message_delivered line.
    Delivered,
    /// Matches a contract_violation line by its detail text.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchClause {
    pub kind: ClauseKind,
    pub drac: String,
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioScript {
    pub id: u32,
    pub title: String,
    pub order: OrderSetup,
    pub lines: Vec<ScriptLine>,
    pub channel: ChannelOverrides,
    pub stimuli: Vec<Stimulus>,
    pub returns: Option<ReturnDirective>,
    pub expected: Vec<MatchClause>,
    pub terminal: Option<OrderState>,
}

enum Tok {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str, lineno: u32) -> Result<Vec<Tok>, ScriptError> {
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => s.push(ch),
                    None => {
                        return Err(ScriptError {
                            line: lineno,
                            message: "unterminated quote".to_string(),
                        })
                    }
                }
            }
            toks.push(Tok::Quoted(s));
        } else {
            let mut s = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '"' || ch == '#' {
                    break;
                }
                s.push(ch);
                chars.next();
            }
            toks.push(Tok::Word(s));
        }
    }
    Ok(toks)
}

struct Cur {
    toks: Vec<Tok>,
    pos: usize,
    line: u32,
}

impl Cur {
    fn err(&self, message: impl Into<String>) -> ScriptError {
        ScriptError {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn word(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w.clone()),
            Some(Tok::Quoted(_)) => Err(self.err(format!("expected {what}, found quoted text"))),
            None => Err(self.err(format!("expected {what}"))),
        }
    }

    fn quoted(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.next() {
            Some(Tok::Quoted(q)) => Ok(q.clone()),
            Some(Tok::Word(w)) => {
                let w = w.clone();
                Err(self.err(format!("expected quoted {what}, found `{w}`")))
            }
            None => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    /// A DRAC name: bare word or quoted.
    fn name(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.next() {
            Some(Tok::Quoted(q)) => Ok(q.clone()),
            Some(Tok::Word(w)) => Ok(w.clone()),
            None => Err(self.err(format!("expected {what}"))),
        }
    }

    fn number<T: core::str::FromStr>(&mut self, what: &str) -> Result<T, ScriptError> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| self.err(format!("bad {what} `{w}`")))
    }

    fn peek_word(&self) -> Option<&str> {
        match self.toks.get(self.pos) {
            Some(Tok::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn end(&self) -> Result<(), ScriptError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("trailing tokens"))
        }
    }
}

/// Parse a scenario script. The first directive must be
/// `scenario <id> "<title>"`.
pub fn parse_script(text: &str) -> Result<ScenarioScript, ScriptError> {
    let mut script: Option<ScenarioScript> = None;
    let mut order_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx as u32 + 1;
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cur {
            toks,
            pos: 0,
            line: lineno,
        };
        let keyword = cur.word("directive")?;
        if script.is_none() && keyword != "scenario" {
            return Err(cur.err("script must start with a scenario directive"));
        }
        match keyword.as_str() {
            "scenario" => {
                if script.is_some() {
                    return Err(cur.err("duplicate scenario directive"));
                }
                let id: u32 = cur.number("scenario id")?;
                let title = cur.quoted("title")?;
                cur.end()?;
                script = Some(ScenarioScript {
                    id,
                    title,
                    order: OrderSetup::default(),
                    lines: Vec::new(),
                    channel: ChannelOverrides::default(),
                    stimuli: Vec::new(),
                    returns: None,
                    expected: Vec::new(),
                    terminal: None,
                });
            }
            "order" => {
                let s = script.as_mut().expect("scenario seen");
                if order_seen {
                    return Err(cur.err("duplicate order directive"));
                }
                order_seen = true;
                let kw = cur.word("order field")?;
                if kw != "phone" {
                    return Err(cur.err("order directive starts with `phone`"));
                }
                s.order.phone = cur.quoted("phone number")?;
                let kw = cur.word("order field")?;
                if kw != "kind" {
                    return Err(cur.err("expected `kind` after the phone number"));
                }
                s.order.special_order = match cur.word("order kind")?.as_str() {
                    "instock" => false,
                    "special" => true,
                    other => return Err(cur.err(format!("unknown order kind `{other}`"))),
                };
                while let Some(flag) = cur.peek_word() {
                    match flag {
                        "delivery" => {
                            cur.word("flag")?;
                            s.order.delivery = match cur.word("delivery choice")?.as_str() {
                                "store" => DeliveryChoice::Store,
                                "customer" => DeliveryChoice::Customer,
                                "installer" => DeliveryChoice::Installer,
                                other => {
                                    return Err(
                                        cur.err(format!("unknown delivery choice `{other}`"))
                                    )
                                }
                            };
                        }
                        "install" => {
                            cur.word("flag")?;
                            s.order.install = true;
                        }
                        "hd-measured" => {
                            cur.word("flag")?;
                            s.order.hd_measured = true;
                        }
                        other => return Err(cur.err(format!("unknown order flag `{other}`"))),
                    }
                }
                cur.end()?;
            }
            "line" => {
                let s = script.as_mut().expect("scenario seen");
                if cur.word("field")? != "sku" {
                    return Err(cur.err("line directive starts with `sku`"));
                }
                let sku = cur.quoted("sku")?;
                if cur.word("field")? != "w" {
                    return Err(cur.err("expected `w`"));
                }
                let w_text = cur.quoted("width in inches")?;
                if cur.word("field")? != "h" {
                    return Err(cur.err("expected `h`"));
                }
                let h_text = cur.quoted("height in inches")?;
                let width = parse_eighth_inches(&w_text)
                    .map_err(|e| cur.err(format!("width: {e}")))?;
                let height = parse_eighth_inches(&h_text)
                    .map_err(|e| cur.err(format!("height: {e}")))?;
                let mut reverse = false;
                if cur.peek_word() == Some("controls") {
                    cur.word("flag")?;
                    reverse = match cur.word("controls scheme")?.as_str() {
                        "standard" => false,
                        "reverse" => true,
                        other => {
                            return Err(cur.err(format!("unknown controls scheme `{other}`")))
                        }
                    };
                }
                cur.end()?;
                s.lines.push(ScriptLine {
                    sku,
                    width,
                    height,
                    reverse_controls: reverse,
                });
            }
            "channel" => {
                let s = script.as_mut().expect("scenario seen");
                while let Some(field) = cur.peek_word() {
                    match field {
                        "loss" => {
                            cur.word("field")?;
                            s.channel.loss_probability = Some(cur.number("loss probability")?);
                        }
                        "ack-timeout" => {
                            cur.word("field")?;
                            s.channel.ack_timeout = Some(cur.number("ack timeout")?);
                        }
                        "max-attempts" => {
                            cur.word("field")?;
                            s.channel.max_attempts = Some(cur.number("max attempts")?);
                        }
                        other => return Err(cur.err(format!("unknown channel field `{other}`"))),
                    }
                }
                cur.end()?;
            }
            "stimulus" => {
                let s = script.as_mut().expect("scenario seen");
                let time: u64 = cur.number("stimulus time")?;
                let drac = cur.name("drac name")?;
                let kind = match cur.word("stimulus kind")?.as_str() {
                    "event" => StimulusKind::Event,
                    "data" => StimulusKind::Data,
                    "invoke" => StimulusKind::Invoke,
                    other => return Err(cur.err(format!("unknown stimulus kind `{other}`"))),
                };
                let name = cur.quoted("attribute or service name")?;
                let value = if cur.pos < cur.toks.len() {
                    Some(cur.quoted("value")?)
                } else {
                    None
                };
                cur.end()?;
                if let Some(last) = s.stimuli.last() {
                    if time < last.time {
                        return Err(cur.err("stimulus times must be non-decreasing"));
                    }
                }
                s.stimuli.push(Stimulus {
                    time,
                    drac,
                    kind,
                    name,
                    value,
                });
            }
            "return" => {
                let s = script.as_mut().expect("scenario seen");
                let reason = match cur.word("return reason")?.as_str() {
                    "returned" => MarkdownReason::Returned,
                    "damaged" => MarkdownReason::Damaged,
                    "lost" => MarkdownReason::Lost,
                    "stolen" => MarkdownReason::Stolen,
                    other => return Err(cur.err(format!("unknown return reason `{other}`"))),
                };
                let disposition = match cur.word("disposition")?.as_str() {
                    "back_to_shelf" => Disposition::BackToShelf,
                    "rtv" => Disposition::Rtv,
                    "trash" => Disposition::Trash,
                    other => return Err(cur.err(format!("unknown disposition `{other}`"))),
                };
                cur.end()?;
                s.returns = Some(ReturnDirective {
                    reason,
                    disposition,
                });
            }
            "expect" => {
                let s = script.as_mut().expect("scenario seen");
                let kind = match cur.word("clause kind")?.as_str() {
                    "service" => ClauseKind::Service,
                    "event" => ClauseKind::Event,
                    "data" => ClauseKind::Data,
                    "message" => ClauseKind::Message,
                    "delivered" => ClauseKind::Delivered,
                    "violation" => ClauseKind::Violation,
                    other => return Err(cur.err(format!("unknown clause kind `{other}`"))),
                };
                let drac = cur.name("drac name")?;
                let subject = cur.quoted("subject")?;
                cur.end()?;
                s.expected.push(MatchClause {
                    kind,
                    drac,
                    subject,
                });
            }
            "terminal" => {
                let s = script.as_mut().expect("scenario seen");
                let label = cur.word("order state")?;
                let state = OrderState::from_label(&label)
                    .ok_or_else(|| cur.err(format!("unknown order state `{label}`")))?;
                cur.end()?;
                s.terminal = Some(state);
            }
            other => return Err(cur.err(format!("unknown directive `{other}`"))),
        }
    }
    script.ok_or(ScriptError {
        line: 1,
        message: "empty script".to_string(),
    })
}

fn clause_matches(clause: &MatchClause, event: &TraceEvent) -> bool {
    let kind_ok = match clause.kind {
        ClauseKind::Service => event.kind == TraceKind::ServiceCompleted,
        ClauseKind::Event => event.kind == TraceKind::EventFired,
        ClauseKind::Data => event.kind == TraceKind::DataWritten,
        ClauseKind::Message => event.kind == TraceKind::MessageSent,
        ClauseKind::Delivered => event.kind == TraceKind::MessageDelivered,
        ClauseKind::Violation => event.kind == TraceKind::ContractViolation,
    };
    if !kind_ok || event.drac != clause.drac {
        return false;
    }
    match clause.kind {
        ClauseKind::Violation => event.detail == clause.subject,
        _ => event.subject == clause.subject,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub matched: bool,
    /// Index of the first clause with no matching event, when unmatched.
    pub first_unmatched: Option<usize>,
    /// How far into the trace matching got.
    pub trace_position: usize,
}

/// Subsequence matching: each clause must match some event strictly after
/// the previous clause's match. Empty expectations match vacuously.
pub fn compare_trace(events: &[TraceEvent], expected: &[MatchClause]) -> MatchOutcome {
    let mut pos = 0usize;
    for (ci, clause) in expected.iter().enumerate() {
        match events[pos..].iter().position(|e| clause_matches(clause, e)) {
            Some(offset) => pos += offset + 1,
            None => {
                return MatchOutcome {
                    matched: false,
                    first_unmatched: Some(ci),
                    trace_position: events.len(),
                }
            }
        }
    }
    MatchOutcome {
        matched: true,
        first_unmatched: None,
        trace_position: pos,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOutcome {
    pub record: OrderRecord,
    pub transitions: Vec<(LifecycleEvent, u64)>,
    pub policy_exceptions: Vec<String>,
    /// Install-gate breach to append to the trace, when one occurred.
    pub gate_violation: Option<TraceEvent>,
    pub markdown: Option<MarkdownRecord>,
    pub errors: Vec<String>,
}

const GATE_DETAIL: &str = "install blocked: measurements not taken by the store";

/// Project a trace onto the order lifecycle. Workflow landmarks in the trace
/// (quote generated, invoice written, payment made, vendor fax, delivery,
/// installation) drive lifecycle transitions; the install gate and the
/// return directive are applied once the trace is exhausted.
pub fn project_lifecycle(
    script: &ScenarioScript,
    events: &[TraceEvent],
    lines: Vec<OrderLine>,
) -> ProjectionOutcome {
    let mut record = OrderRecord::new(
        script.id as u64,
        CustomerInfo::new("Customer", script.order.phone.clone()),
        script.order.special_order,
        0,
    );
    record.lines = lines;
    record.install_requested = script.order.install;
    record.measured_by_hd = script.order.hd_measured;

    let mut out = ProjectionOutcome {
        record,
        transitions: Vec::new(),
        policy_exceptions: Vec::new(),
        gate_violation: None,
        markdown: None,
        errors: Vec::new(),
    };

    fn apply(out: &mut ProjectionOutcome, event: LifecycleEvent, time: u64) {
        match execute_transition(&out.record, event, time) {
            Ok(res) => {
                out.transitions.push((event, time));
                if let Some(p) = res.policy_exception {
                    out.policy_exceptions.push(p);
                }
                out.record = res.record;
            }
            Err(e) => out.errors.push(e.to_string()),
        }
    }

    let mut vendor_faxed = false;
    let mut install_blocked = false;
    for ev in events {
        let t = ev.time;
        match ev.kind {
            TraceKind::EventFired => match ev.subject.as_str() {
                "Measurement service requested" if out.record.state == OrderState::Draft => {
                    apply(&mut out, LifecycleEvent::RequestMeasurement, t);
                }
                "Measurements recorded" => {
                    out.record.measured_by_hd = true;
                    if out.record.state == OrderState::AwaitingMeasurement {
                        apply(&mut out, LifecycleEvent::RecordMeasurements, t);
                    }
                }
                "Quote generated"
                    if matches!(out.record.state, OrderState::Draft | OrderState::Measured) =>
                {
                    apply(&mut out, LifecycleEvent::Quote, t);
                }
                "Payment for Invoice made" if out.record.state == OrderState::Invoiced => {
                    apply(&mut out, LifecycleEvent::Pay, t);
                }
                "Products delivered"
                    if ev.drac == "Installer"
                        && script.order.delivery == DeliveryChoice::Installer
                        && out.record.state == OrderState::Faxed =>
                {
                    apply(&mut out, LifecycleEvent::DeliverInstaller, t);
                }
                "Products Installed" if out.record.state == OrderState::DeliveredInstaller => {
                    if install_gate(&out.record) {
                        apply(&mut out, LifecycleEvent::Install, t);
                    } else {
                        install_blocked = true;
                    }
                }
                _ => {}
            },
            TraceKind::DataWritten if ev.drac == "Customer" && ev.subject == "Invoice" => {
                if matches!(out.record.state, OrderState::Draft | OrderState::Measured) {
                    apply(&mut out, LifecycleEvent::Quote, t);
                }
                if out.record.state == OrderState::Quoted {
                    apply(&mut out, LifecycleEvent::Invoice, t);
                }
            }
            TraceKind::MessageSent if ev.subject == "vendor" && !vendor_faxed => {
                vendor_faxed = true;
                if script.order.special_order && out.record.state == OrderState::Paid {
                    apply(&mut out, LifecycleEvent::FaxSent, t);
                }
            }
            _ => {}
        }
    }

    let end_time = events.last().map(|e| e.time).unwrap_or(0);

    // in-stock carry-out closes at the register once everything settles
    if !script.order.special_order && out.record.state == OrderState::Paid {
        apply(&mut out, LifecycleEvent::Close, end_time);
    }

    // the installer walks away from self-measured orders
    if script.order.install
        && !install_gate(&out.record)
        && (install_blocked || out.record.state == OrderState::DeliveredInstaller)
    {
        out.policy_exceptions.push(String::from(GATE_DETAIL));
        out.gate_violation = Some(TraceEvent {
            time: end_time,
            kind: TraceKind::ContractViolation,
            drac: String::from("Installer"),
            subject: String::from("Arrive at site and install products"),
            detail: String::from(GATE_DETAIL),
        });
    }

    if let Some(ret) = script.returns {
        apply(&mut out, LifecycleEvent::Return, end_time);
        if out.record.state == OrderState::Returned {
            let item = MarkdownItem {
                sku: out
                    .record
                    .lines
                    .first()
                    .map(|l| l.sku.clone())
                    .unwrap_or_else(|| String::from("unknown")),
                original_price: out.record.lines.iter().map(|l| l.unit_price).sum(),
                special_order: script.order.special_order,
            };
            match apply_markdown(&item, ret.reason, ret.disposition, end_time) {
                Ok(rec) => out.markdown = Some(rec),
                Err(e) => out.errors.push(e.to_string()),
            }
        }
    }

    out
}

//! Line-oriented parser for the architecture format.
//!
//! Each line is one declaration; `#` starts a comment (outside quotes);
//! indentation is cosmetic. Context is tracked by keyword: `attribute`,
//! `requires` and `service` attach to the current `drac` block, the service
//! detail lines attach to the current `service`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{
    ArchitectureSpec, AttrKind, AttributeSpec, Condition, Criticality, DracSpec, DurationRange,
    ExternalSpec, Frequency, InputBinding, OutputBinding, PayloadKind, RequiredAttribute,
    ServiceSpec, SrcLine,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str, line_no: u32) -> Result<Vec<Tok>, ParseError> {
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
                        return Err(ParseError {
                            line: line_no,
                            message: "unterminated quoted name".to_string(),
                        })
                    }
                }
            }
            toks.push(Tok::Quoted(s));
        } else {
            let mut w = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '"' || ch == '#' {
                    break;
                }
                w.push(ch);
                chars.next();
            }
            toks.push(Tok::Word(w));
        }
    }
    Ok(toks)
}

/// Cursor over one line's tokens.
struct Cur {
    toks: Vec<Tok>,
    pos: usize,
    line: u32,
}

impl Cur {
    fn err(&self, msg: impl fmt::Display) -> ParseError {
        ParseError {
            line: self.line,
            message: msg.to_string(),
        }
    }

    fn peek_word(&self) -> Option<&str> {
        match self.toks.get(self.pos) {
            Some(Tok::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_word(&mut self, want: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Word(w)) if w == want => Ok(()),
            other => Err(self.err(format!("expected '{want}', found {}", describe(&other)))),
        }
    }

    /// A name: quoted string or bare word.
    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Quoted(s)) => Ok(s),
            Some(Tok::Word(w)) => Ok(w),
            None => Err(self.err(format!("expected {what}"))),
        }
    }

    fn quoted(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Quoted(s)) => Ok(s),
            other => Err(self.err(format!(
                "expected quoted {what}, found {}",
                describe(&other)
            ))),
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ParseError> {
        match self.next() {
            Some(Tok::Word(w)) => w
                .parse::<u32>()
                .map_err(|_| self.err(format!("expected {what}, found '{w}'"))),
            other => Err(self.err(format!("expected {what}, found {}", describe(&other)))),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("trailing tokens on line"))
        }
    }
}

fn describe(tok: &Option<Tok>) -> String {
    match tok {
        Some(Tok::Word(w)) => format!("'{w}'"),
        Some(Tok::Quoted(s)) => format!("\"{s}\""),
        None => "end of line".to_string(),
    }
}

fn unit_minutes(word: &str) -> Option<u32> {
    match word {
        "min" | "minute" | "minutes" => Some(1),
        "hr" | "hour" | "hours" => Some(60),
        "day" | "days" => Some(1440),
        _ => None,
    }
}

/// `duration <lo> [unit] <hi> <unit>`; a single trailing unit applies to both
/// bounds. Normalized to minutes; `lo > hi` is malformed.
fn parse_duration(cur: &mut Cur) -> Result<DurationRange, ParseError> {
    let lo = cur.number("duration lower bound")?;
    let lo_unit = cur.peek_word().and_then(unit_minutes);
    if lo_unit.is_some() {
        cur.next();
    }
    let hi = cur.number("duration upper bound")?;
    let hi_unit = match cur.next() {
        Some(Tok::Word(w)) => unit_minutes(&w)
            .ok_or_else(|| cur.err(format!("unknown duration unit '{w}'")))?,
        other => {
            return Err(cur.err(format!(
                "expected duration unit, found {}",
                describe(&other)
            )))
        }
    };
    let lo_min = lo * lo_unit.unwrap_or(hi_unit);
    let hi_min = hi * hi_unit;
    if lo_min > hi_min {
        return Err(cur.err(format!(
            "malformed duration: lower bound {lo_min} min exceeds upper bound {hi_min} min"
        )));
    }
    Ok(DurationRange { lo_min, hi_min })
}

/// `from`/`to` clause: peer name plus optional `service "..."`,
/// `attribute "..."` and (outputs only) `via fax`.
struct PeerClause {
    drac: String,
    service: Option<String>,
    attribute: Option<String>,
    via_fax: bool,
}

fn parse_peer(cur: &mut Cur, direction: &str, allow_fax: bool) -> Result<PeerClause, ParseError> {
    cur.expect_word(direction)?;
    let drac = cur.name("peer name")?;
    let mut clause = PeerClause {
        drac,
        service: None,
        attribute: None,
        via_fax: false,
    };
    while let Some(word) = cur.peek_word() {
        match word {
            "service" => {
                cur.next();
                clause.service = Some(cur.quoted("service name")?);
            }
            "attribute" => {
                cur.next();
                clause.attribute = Some(cur.quoted("attribute name")?);
            }
            "via" if allow_fax => {
                cur.next();
                cur.expect_word("fax")?;
                clause.via_fax = true;
            }
            other => return Err(cur.err(format!("unexpected token '{other}'"))),
        }
    }
    Ok(clause)
}

fn parse_payload_kind(cur: &mut Cur) -> Result<PayloadKind, ParseError> {
    match cur.next() {
        Some(Tok::Word(w)) if w == "data" => Ok(PayloadKind::Data),
        Some(Tok::Word(w)) if w == "event" => Ok(PayloadKind::Event),
        other => Err(cur.err(format!(
            "expected payload kind 'data' or 'event', found {}",
            describe(&other)
        ))),
    }
}

fn parse_criticality(cur: &mut Cur) -> Result<Criticality, ParseError> {
    match cur.next() {
        Some(Tok::Word(w)) if w == "high" => Ok(Criticality::High),
        Some(Tok::Word(w)) if w == "medium" => Ok(Criticality::Medium),
        Some(Tok::Word(w)) if w == "low" => Ok(Criticality::Low),
        other => Err(cur.err(format!(
            "expected criticality high|medium|low, found {}",
            describe(&other)
        ))),
    }
}

pub fn parse_architecture(text: &str) -> Result<ArchitectureSpec, ParseError> {
    let mut spec = ArchitectureSpec::default();
    // indices into spec.dracs / its services, to keep borrows simple
    let mut cur_drac: Option<usize> = None;
    let mut cur_service: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let toks = tokenize(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cur {
            toks,
            pos: 0,
            line: line_no,
        };
        let keyword = match cur.next() {
            Some(Tok::Word(w)) => w,
            other => {
                return Err(cur.err(format!(
                    "expected a declaration keyword, found {}",
                    describe(&other)
                )))
            }
        };
        match keyword.as_str() {
            "drac" => {
                let name = cur.name("DRAC name")?;
                cur.end()?;
                if spec.drac(&name).is_some() {
                    return Err(cur.err(format!("duplicate DRAC '{name}'")));
                }
                spec.dracs.push(DracSpec {
                    name,
                    attributes: Vec::new(),
                    services: Vec::new(),
                    required_attributes: Vec::new(),
                    line: SrcLine(line_no),
                });
                cur_drac = Some(spec.dracs.len() - 1);
                cur_service = None;
            }
            "external" => {
                let name = cur.name("external name")?;
                cur.end()?;
                if spec.is_external(&name) {
                    return Err(cur.err(format!("duplicate external '{name}'")));
                }
                spec.externals.push(ExternalSpec {
                    name,
                    line: SrcLine(line_no),
                });
                cur_drac = None;
                cur_service = None;
            }
            "attribute" => {
                let d = cur_drac.ok_or_else(|| cur.err("'attribute' outside a drac block"))?;
                let name = cur.quoted("attribute name")?;
                cur.expect_word(":")
                    .map_err(|_| cur.err("expected ':' after attribute name"))?;
                let kind = match cur.next() {
                    Some(Tok::Word(w)) if w == "data" => {
                        let mut cardinality = 1;
                        if cur.peek_word() == Some("cardinality") {
                            cur.next();
                            cardinality = cur.number("cardinality")?;
                            if cardinality == 0 {
                                return Err(cur.err("cardinality must be at least 1"));
                            }
                        }
                        AttrKind::Data { cardinality }
                    }
                    Some(Tok::Word(w)) if w == "event" => AttrKind::Event,
                    other => {
                        return Err(cur.err(format!(
                            "expected attribute kind 'data' or 'event', found {}",
                            describe(&other)
                        )))
                    }
                };
                let mut description = None;
                let mut model_refs = Vec::new();
                while let Some(word) = cur.peek_word() {
                    match word {
                        "desc" => {
                            cur.next();
                            description = Some(cur.quoted("description")?);
                        }
                        "ref" => {
                            cur.next();
                            model_refs.push(cur.quoted("model reference")?);
                        }
                        other => return Err(cur.err(format!("unexpected token '{other}'"))),
                    }
                }
                let drac = &mut spec.dracs[d];
                if drac.attribute(&name).is_some() {
                    return Err(cur.err(format!(
                        "duplicate attribute '{name}' in DRAC '{}'",
                        drac.name
                    )));
                }
                drac.attributes.push(AttributeSpec {
                    name,
                    kind,
                    description,
                    model_refs,
                    line: SrcLine(line_no),
                });
            }
            "requires" => {
                let d = cur_drac.ok_or_else(|| cur.err("'requires' outside a drac block"))?;
                cur.expect_word("attribute")?;
                let attribute = cur.quoted("attribute name")?;
                cur.expect_word("of")?;
                let owner = cur.name("owning DRAC name")?;
                cur.end()?;
                spec.dracs[d].required_attributes.push(RequiredAttribute {
                    attribute,
                    owner,
                    line: SrcLine(line_no),
                });
            }
            "service" => {
                let d = cur_drac.ok_or_else(|| cur.err("'service' outside a drac block"))?;
                let name = cur.quoted("service name")?;
                cur.end()?;
                let drac = &mut spec.dracs[d];
                if drac.service(&name).is_some() {
                    return Err(cur.err(format!(
                        "duplicate service '{name}' in DRAC '{}'",
                        drac.name
                    )));
                }
                drac.services.push(ServiceSpec {
                    name,
                    duration: DurationRange {
                        lo_min: 0,
                        hi_min: 0,
                    },
                    frequency: Frequency::Discrete,
                    inputs: Vec::new(),
                    outputs: Vec::new(),
                    preconditions: Vec::new(),
                    postconditions: Vec::new(),
                    line: SrcLine(line_no),
                });
                cur_service = Some(drac.services.len() - 1);
            }
            "duration" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "duration")?;
                let range = parse_duration(&mut cur)?;
                cur.end()?;
                spec.dracs[d].services[s].duration = range;
            }
            "frequency" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "frequency")?;
                let freq = match cur.next() {
                    Some(Tok::Word(w)) if w == "discrete" => Frequency::Discrete,
                    Some(Tok::Word(w)) if w == "continuous" => Frequency::Continuous,
                    other => {
                        return Err(cur.err(format!(
                            "expected frequency discrete|continuous, found {}",
                            describe(&other)
                        )))
                    }
                };
                cur.end()?;
                spec.dracs[d].services[s].frequency = freq;
            }
            "input" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "input")?;
                let payload_kind = parse_payload_kind(&mut cur)?;
                let payload_name = cur.quoted("payload name")?;
                let peer = parse_peer(&mut cur, "from", false)?;
                cur.end()?;
                spec.dracs[d].services[s].inputs.push(InputBinding {
                    payload_name,
                    payload_kind,
                    peer_drac: peer.drac,
                    peer_service: peer.service,
                    peer_attribute: peer.attribute,
                    line: SrcLine(line_no),
                });
            }
            "output" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "output")?;
                let payload_kind = parse_payload_kind(&mut cur)?;
                let payload_name = cur.quoted("payload name")?;
                let peer = parse_peer(&mut cur, "to", true)?;
                cur.end()?;
                spec.dracs[d].services[s].outputs.push(OutputBinding {
                    payload_name,
                    payload_kind,
                    peer_drac: peer.drac,
                    peer_service: peer.service,
                    peer_attribute: peer.attribute,
                    via_fax: peer.via_fax,
                    line: SrcLine(line_no),
                });
            }
            "pre" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "pre")?;
                let subject = cur.quoted("condition subject")?;
                let statement = cur.quoted("condition statement")?;
                cur.expect_word("criticality")
                    .map_err(|_| cur.err("preconditions require a criticality"))?;
                let crit = parse_criticality(&mut cur)?;
                cur.end()?;
                spec.dracs[d].services[s].preconditions.push(Condition {
                    subject,
                    statement,
                    criticality: Some(crit),
                    line: SrcLine(line_no),
                });
            }
            "post" => {
                let (d, s) = service_ctx(cur_drac, cur_service, &cur, "post")?;
                let subject = cur.quoted("condition subject")?;
                let statement = cur.quoted("condition statement")?;
                let criticality = if cur.peek_word() == Some("criticality") {
                    cur.next();
                    Some(parse_criticality(&mut cur)?)
                } else {
                    None
                };
                cur.end()?;
                spec.dracs[d].services[s].postconditions.push(Condition {
                    subject,
                    statement,
                    criticality,
                    line: SrcLine(line_no),
                });
            }
            other => {
                return Err(cur.err(format!("unknown declaration keyword '{other}'")));
            }
        }
    }
    Ok(spec)
}

fn service_ctx(
    drac: Option<usize>,
    service: Option<usize>,
    cur: &Cur,
    what: &str,
) -> Result<(usize, usize), ParseError> {
    match (drac, service) {
        (Some(d), Some(s)) => Ok((d, s)),
        _ => Err(cur.err(format!("'{what}' outside a service block"))),
    }
}

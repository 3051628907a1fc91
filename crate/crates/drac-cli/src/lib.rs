//! File loading and the scenario runner: everything the `drac` binary does,
//! callable from tests.

pub mod store;

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use drac_core::channel::ChannelConfig;
use drac_core::domain::Controls;
use drac_core::engine::order::{OrderLine, OrderRecord, OrderState};
use drac_core::engine::trace::TraceEvent;
use drac_core::engine::{audit_trace, EngineConfig, World};
use drac_core::pricing::{lookup_price, MarkdownRecord, PriceBook};
use drac_core::scenario::{
    compare_trace, parse_script, project_lifecycle, ClauseKind, MatchClause, MatchOutcome,
    ScenarioScript,
};
use drac_core::spec::{parse_architecture, validate_architecture, ArchitectureSpec, ValidationReport};

pub fn load_spec(path: &Path) -> Result<ArchitectureSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading architecture file {}", path.display()))?;
    parse_architecture(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn load_prices(path: &Path) -> Result<PriceBook> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading price book {}", path.display()))?;
    PriceBook::parse_csv(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioScript> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    parse_script(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Command-line knobs layered over whatever the script sets.
#[derive(Debug, Clone, Copy)]
pub struct RunOverrides {
    pub seed: u64,
    pub loss_probability: Option<f64>,
    pub ack_timeout: Option<u64>,
    pub max_attempts: Option<u32>,
}

impl Default for RunOverrides {
    fn default() -> Self {
        RunOverrides {
            seed: 1,
            loss_probability: None,
            ack_timeout: None,
            max_attempts: None,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub script_id: u32,
    pub title: String,
    pub trace_text: String,
    pub clauses: MatchOutcome,
    pub expected_len: usize,
    pub terminal: OrderState,
    pub expected_terminal: Option<OrderState>,
    /// Expected clauses all matched and the terminal state agrees.
    pub matched: bool,
    /// Human-readable first divergence, when not matched.
    pub divergence: Option<String>,
    pub record: OrderRecord,
    pub policy_exceptions: Vec<String>,
    pub markdown: Option<MarkdownRecord>,
    pub projection_errors: Vec<String>,
    pub audit: Result<(), String>,
}

fn describe_clause(clause: &MatchClause) -> String {
    let kind = match clause.kind {
        ClauseKind::Service => "service",
        ClauseKind::Event => "event",
        ClauseKind::Data => "data",
        ClauseKind::Message => "message",
        ClauseKind::Delivered => "delivered",
        ClauseKind::Violation => "violation",
    };
    format!("{kind} {} \"{}\"", clause.drac, clause.subject)
}

/// Price the script's order lines against the book.
pub fn resolve_lines(book: &PriceBook, script: &ScenarioScript) -> Result<Vec<OrderLine>> {
    let mut lines = Vec::new();
    for line in &script.lines {
        let product = book
            .sku_product(&line.sku)
            .with_context(|| format!("sku {} is not in the price book", line.sku))?;
        let unit_price = lookup_price(book, &line.sku, (line.width, line.height))
            .map_err(|e| anyhow::anyhow!("pricing {}: {e}", line.sku))?;
        let controls = if line.reverse_controls {
            Controls::reverse_for(product)
        } else {
            Controls::standard_for(product)
        };
        lines.push(OrderLine {
            sku: line.sku.clone(),
            product,
            dims: Some((line.width, line.height)),
            controls,
            unit_price,
        });
    }
    Ok(lines)
}

fn channel_config(script: &ScenarioScript, overrides: &RunOverrides) -> ChannelConfig {
    let mut cfg = ChannelConfig::default();
    if let Some(p) = script.channel.loss_probability {
        cfg.loss_probability = p;
    }
    if let Some(t) = script.channel.ack_timeout {
        cfg.ack_timeout = t;
    }
    if let Some(n) = script.channel.max_attempts {
        cfg.max_attempts = n;
    }
    if let Some(p) = overrides.loss_probability {
        cfg.loss_probability = p;
    }
    if let Some(t) = overrides.ack_timeout {
        cfg.ack_timeout = t;
    }
    if let Some(n) = overrides.max_attempts {
        cfg.max_attempts = n;
    }
    cfg
}

pub fn run_scenario(
    spec: &ArchitectureSpec,
    book: &PriceBook,
    script: &ScenarioScript,
    overrides: RunOverrides,
) -> Result<RunReport> {
    let report: ValidationReport = validate_architecture(spec);
    if !report.is_clean() {
        let first = report.errors().next().unwrap();
        bail!(
            "architecture has {} reference error(s); first at line {}: {}",
            report.error_count(),
            first.line,
            first.message
        );
    }

    let config = EngineConfig {
        seed: overrides.seed,
        channel: channel_config(script, &overrides),
        order_id: script.id as u64,
        ..EngineConfig::default()
    };
    let mut world = World::new(spec, config)
        .map_err(|e| anyhow::anyhow!("engine rejected the architecture: {e}"))?;
    world
        .run_to_quiescence(&script.stimuli)
        .map_err(|e| anyhow::anyhow!("scenario {} did not settle: {e}", script.id))?;

    let lines = resolve_lines(book, script)?;
    let projection = project_lifecycle(script, world.trace().events(), lines);
    if let Some(violation) = projection.gate_violation.clone() {
        world.trace_mut().push(violation);
    }

    let events: &[TraceEvent] = world.trace().events();
    let clauses = compare_trace(events, &script.expected);
    let terminal = projection.record.state;
    let terminal_ok = script.terminal.map_or(true, |t| t == terminal);
    let matched = clauses.matched && terminal_ok;
    let divergence = if !clauses.matched {
        let idx = clauses.first_unmatched.unwrap();
        Some(format!(
            "clause {} ({}) never matched; trace exhausted at position {}",
            idx + 1,
            describe_clause(&script.expected[idx]),
            clauses.trace_position
        ))
    } else if !terminal_ok {
        Some(format!(
            "terminal state is {}, expected {}",
            terminal.label(),
            script.terminal.unwrap().label()
        ))
    } else {
        None
    };

    let audit = audit_trace(spec, events);
    Ok(RunReport {
        script_id: script.id,
        title: script.title.clone(),
        trace_text: world.trace().render(),
        clauses,
        expected_len: script.expected.len(),
        terminal,
        expected_terminal: script.terminal,
        matched,
        divergence,
        record: projection.record,
        policy_exceptions: projection.policy_exceptions,
        markdown: projection.markdown,
        projection_errors: projection.errors,
        audit,
    })
}

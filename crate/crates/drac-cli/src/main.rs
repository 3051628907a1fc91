use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use drac_cli::store::RecordingStore;
use drac_cli::{load_prices, load_scenario, load_spec, run_scenario, RunOverrides};
use drac_core::spec::validate_architecture;

#[derive(Parser)]
#[command(name = "drac", version, about = "Design-center architecture runtime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an architecture file and report reference errors and warnings
    Validate {
        /// Architecture file
        spec: PathBuf,
    },
    /// Run a scenario script and compare the trace against its expectations
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fax loss probability, overriding the script
        #[arg(long)]
        loss_prob: Option<f64>,
        /// Minutes before an unacknowledged fax is resent, overriding the script
        #[arg(long)]
        ack_timeout_min: Option<u64>,
        /// Send attempts before a fax is abandoned, overriding the script
        #[arg(long)]
        max_attempts: Option<u32>,
        /// Exit 2 when the trace does not match the script
        #[arg(long)]
        strict: bool,
        /// Write the rendered trace to a file
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Append the final order record to this store file
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

fn validate_cmd(spec_path: &PathBuf) -> anyhow::Result<ExitCode> {
    let spec = load_spec(spec_path)?;
    let report = validate_architecture(&spec);
    for finding in &report.findings {
        println!(
            "{}: line {}: {}: {}",
            finding.severity, finding.line, finding.location, finding.message
        );
    }
    println!(
        "{} dracs, {} services ({})",
        spec.dracs.len(),
        spec.service_count(),
        spec.dracs
            .iter()
            .map(|d| format!("{} {}", d.name, d.services.len()))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "{} error(s), {} warning(s)",
        report.error_count(),
        report.warning_count()
    );
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cmd(
    spec_path: &PathBuf,
    prices: &PathBuf,
    scenario: &PathBuf,
    overrides: RunOverrides,
    strict: bool,
    trace_out: Option<&PathBuf>,
    store: Option<&PathBuf>,
) -> anyhow::Result<ExitCode> {
    let spec = load_spec(spec_path)?;
    let book = load_prices(prices)?;
    let script = load_scenario(scenario)?;
    let report = run_scenario(&spec, &book, &script, overrides)?;

    println!("scenario {}: {}", report.script_id, report.title);
    println!(
        "clauses matched: {}/{}",
        if report.clauses.matched {
            report.expected_len
        } else {
            report.clauses.first_unmatched.unwrap()
        },
        report.expected_len
    );
    match report.expected_terminal {
        Some(expected) => println!(
            "terminal state: {} (expected {})",
            report.terminal.label(),
            expected.label()
        ),
        None => println!("terminal state: {}", report.terminal.label()),
    }
    for policy in &report.policy_exceptions {
        println!("policy exception: {policy}");
    }
    if let Some(md) = &report.markdown {
        println!(
            "markdown: {} {} -> {} ({:?})",
            md.sku, md.original_price, md.marked_price, md.disposition
        );
    }
    for err in &report.projection_errors {
        println!("projection error: {err}");
    }
    if let Err(e) = &report.audit {
        println!("trace audit failed: {e}");
    }
    match &report.divergence {
        None => println!("result: match"),
        Some(d) => println!("result: mismatch; {d}"),
    }

    if let Some(path) = trace_out {
        fs::write(path, &report.trace_text)?;
    }
    if let Some(path) = store {
        RecordingStore::new(path).append(&report.record)?;
    }

    Ok(if report.matched {
        ExitCode::SUCCESS
    } else if strict {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { spec } => validate_cmd(spec),
        Command::Run {
            spec,
            prices,
            scenario,
            seed,
            loss_prob,
            ack_timeout_min,
            max_attempts,
            strict,
            trace_out,
            store,
        } => run_cmd(
            spec,
            prices,
            scenario,
            RunOverrides {
                seed: *seed,
                loss_probability: *loss_prob,
                ack_timeout: *ack_timeout_min,
                max_attempts: *max_attempts,
            },
            *strict,
            trace_out.as_ref(),
            store.as_ref(),
        ),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

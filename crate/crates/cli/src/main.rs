//! `sosc`: validate, simulate, explore, conform, report.
//!
//! Exit codes: 0 when the command succeeds and any check passes, 1
//! when a check fails (diagnostics, property violation, refinement
//! violation), 2 on usage, IO, or parse errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sosc_avsos::{
    composition, contracts, default_timeouts, transport_contract, Agreement, AvOptions,
    GiveUpBound, SingleDecision, TransportKind,
};
use sosc_cli::{monte_carlo_loss, validate_fault_model, LossOptions};
use sosc_conformance::{refines, Verdict};
use sosc_core::{Contract, Severity, Value};
use sosc_dsl::{parse_document, ModelDocument};
use sosc_engine::{
    event_line, explore, simulate, write_trace, ExecutionConfig, ExploreConfig, ExploreOutcome,
    FaultPolicy, Property, System,
};

#[derive(Parser)]
#[command(
    name = "sosc",
    version,
    about = "Contract models: validation, simulation, exploration, refinement, loss analysis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a model file and run every structural and fault-model
    /// check; exit 1 when any error-severity diagnostic fires.
    Validate { file: PathBuf },
    /// Run one seeded execution and write the trace as JSON lines.
    Simulate {
        /// Model file, or `builtin:avsos` for the packaged election
        /// case study.
        source: String,
        /// Device count (builtin:avsos only).
        #[arg(long)]
        devices: Option<u32>,
        /// Route device traffic through retry wrappers
        /// (builtin:avsos only).
        #[arg(long)]
        fault_tolerant: bool,
        /// Retransmission budget per wrapper (builtin:avsos only).
        #[arg(long)]
        max_retries: Option<i64>,
        /// Use the lossless transport (builtin:avsos only).
        #[arg(long)]
        nominal: bool,
        /// Probability that an eligible error move fires at each
        /// opportunity.
        #[arg(long, default_value_t = 0.0)]
        drop_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Composition to run when the file defines several.
        #[arg(long)]
        sos: Option<String>,
        /// Timeout duration, repeatable (file models declare names
        /// only).
        #[arg(long = "timeout", value_name = "NAME=TICKS")]
        timeouts: Vec<String>,
        /// Trace file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore every schedule up to a depth bound, checking
    /// properties, and write a JSON report; exit 1 on FAIL.
    Explore {
        source: String,
        #[arg(long)]
        devices: Option<u32>,
        #[arg(long)]
        fault_tolerant: bool,
        #[arg(long)]
        max_retries: Option<i64>,
        #[arg(long)]
        nominal: bool,
        /// Error-move budget: how many injections each schedule may
        /// contain.
        #[arg(long, default_value_t = 0)]
        budget: u32,
        /// Count the budget per message identity instead of one pool.
        #[arg(long)]
        per_message: bool,
        /// Exempt acknowledgements from injection.
        #[arg(long)]
        data_only: bool,
        /// Property to check, repeatable: agreement,
        /// no-duplicate-decision, give-up-bound.
        #[arg(long)]
        property: Vec<String>,
        #[arg(long, default_value_t = 50)]
        max_depth: u32,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long)]
        sos: Option<String>,
        #[arg(long = "timeout", value_name = "NAME=TICKS")]
        timeouts: Vec<String>,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check bounded trace refinement of an implementation contract
    /// against a specification contract; exit 1 on VIOLATES.
    Conform {
        /// Implementation: `builtin:tl-nominal`, `builtin:tl-faulty`,
        /// or `file.sosc#ContractName`.
        #[arg(long = "impl")]
        subject: String,
        /// Specification, same forms as --impl.
        #[arg(long)]
        contract: String,
        /// Visible-trace length bound.
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Statistical reports over the packaged models.
    Report {
        /// Monte Carlo loss measurement over the retry/lossy-link
        /// rig.
        #[arg(long)]
        loss: bool,
        #[arg(long, default_value_t = 0.0)]
        drop_prob: f64,
        #[arg(long, default_value_t = 1)]
        retries: i64,
        #[arg(long, default_value_t = 1000)]
        messages: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Let acknowledgements be dropped too.
        #[arg(long)]
        drop_acks: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Validate { file } => cmd_validate(&file),
        Cmd::Simulate {
            source,
            devices,
            fault_tolerant,
            max_retries,
            nominal,
            drop_prob,
            seed,
            max_steps,
            sos,
            timeouts,
            out,
        } => {
            let sys = build_system(
                &source,
                BuiltinShape { devices, fault_tolerant, max_retries, nominal },
                sos.as_deref(),
                &timeouts,
            )?;
            let policy =
                FaultPolicy::Probabilistic { drop_prob, drop_acks: true, window: None };
            let exec = ExecutionConfig { max_steps, seed, record_internal: true };
            let report = simulate(&sys, &policy, &exec).map_err(|e| e.to_string())?;
            write_output(out.as_ref(), &write_trace(&report.trace))?;
            if let Some(v) = report.violation {
                eprintln!("invariant violation: {v}");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Explore {
            source,
            devices,
            fault_tolerant,
            max_retries,
            nominal,
            budget,
            per_message,
            data_only,
            property,
            max_depth,
            max_states,
            sos,
            timeouts,
            out,
        } => {
            let sys = build_system(
                &source,
                BuiltinShape { devices, fault_tolerant, max_retries, nominal },
                sos.as_deref(),
                &timeouts,
            )?;
            let props = build_properties(&property, &sys)?;
            let refs: Vec<&dyn Property> = props.iter().map(Box::as_ref).collect();
            let policy = FaultPolicy::Exhaustive { budget, per_message, data_only };
            let outcome = explore(&sys, &policy, &ExploreConfig { max_depth, max_states }, &refs)
                .map_err(|e| e.to_string())?;
            write_output(out.as_ref(), &(explore_report_json(&outcome) + "\n"))?;
            Ok(match outcome {
                ExploreOutcome::Pass(_) => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            })
        }
        Cmd::Conform { subject, contract, depth, out } => {
            let subject = load_contract_ref(&subject)?;
            let target = load_contract_ref(&contract)?;
            let report = refines(&subject, &target, depth).map_err(|e| e.to_string())?;
            write_output(out.as_ref(), &(report.to_json() + "\n"))?;
            Ok(match report.verdict {
                Verdict::Conforms => ExitCode::SUCCESS,
                Verdict::Violates => ExitCode::from(1),
            })
        }
        Cmd::Report { loss, drop_prob, retries, messages, seed, drop_acks, out } => {
            if !loss {
                return Err("pick a report kind: --loss".to_string());
            }
            let report = monte_carlo_loss(&LossOptions {
                drop_prob,
                max_retries: retries,
                messages,
                seed,
                drop_acks,
            })
            .map_err(|e| e.to_string())?;
            write_output(out.as_ref(), &(report.to_json() + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_validate(file: &PathBuf) -> Result<ExitCode, String> {
    let doc = load_document(&file.display().to_string())?;
    let mut diags = doc.validate();
    // The fault-model pass re-runs the dependability checks; keep
    // each diagnostic once.
    for d in validate_fault_model(&doc) {
        if !diags.contains(&d) {
            diags.push(d);
        }
    }
    for d in &diags {
        println!("{}:{d}", file.display());
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        eprintln!("{errors} error(s)");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

/// The builtin-only shape flags; rejected for file sources.
struct BuiltinShape {
    devices: Option<u32>,
    fault_tolerant: bool,
    max_retries: Option<i64>,
    nominal: bool,
}

fn build_system(
    source: &str,
    shape: BuiltinShape,
    sos: Option<&str>,
    timeout_flags: &[String],
) -> Result<System, String> {
    let overrides = parse_timeouts(timeout_flags)?;
    if source == "builtin:avsos" {
        if sos.is_some() {
            return Err(
                "builtin:avsos picks its composition with --fault-tolerant, not --sos".to_string()
            );
        }
        let opts = AvOptions {
            devices: shape.devices.unwrap_or(2),
            fault_tolerant: shape.fault_tolerant,
            transport: if shape.nominal { TransportKind::Nominal } else { TransportKind::Faulty },
            max_retries: shape.max_retries.unwrap_or(1),
        };
        let mut timeouts = default_timeouts();
        timeouts.extend(overrides);
        return System::build(&contracts(), &composition(opts), timeouts)
            .map_err(|e| e.to_string());
    }
    if source.starts_with("builtin:") {
        return Err(format!("unknown builtin `{source}`; available: builtin:avsos"));
    }
    if shape.devices.is_some()
        || shape.fault_tolerant
        || shape.max_retries.is_some()
        || shape.nominal
    {
        return Err(
            "--devices, --fault-tolerant, --max-retries, and --nominal apply only to builtin:avsos"
                .to_string(),
        );
    }
    let doc = load_document(source)?;
    let errors: Vec<String> = doc
        .validate()
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| format!("{source}:{d}"))
        .collect();
    if !errors.is_empty() {
        return Err(format!("model fails validation\n{}", errors.join("\n")));
    }
    let comp = match sos {
        Some(name) => doc
            .composition(name)
            .ok_or_else(|| format!("{source}: no sos block named `{name}`"))?,
        None => doc
            .compositions
            .first()
            .ok_or_else(|| format!("{source}: no sos block to run"))?,
    };
    System::build(&doc.contracts, comp, overrides).map_err(|e| e.to_string())
}

fn load_contract_ref(spec: &str) -> Result<Contract, String> {
    match spec {
        "builtin:tl-nominal" => Ok(transport_contract(TransportKind::Nominal)),
        "builtin:tl-faulty" => Ok(transport_contract(TransportKind::Faulty)),
        other if other.starts_with("builtin:") => Err(format!(
            "unknown builtin `{other}`; available: builtin:tl-nominal, builtin:tl-faulty"
        )),
        path_spec => {
            let (path, name) = match path_spec.split_once('#') {
                Some((p, n)) => (p, Some(n)),
                None => (path_spec, None),
            };
            let doc = load_document(path)?;
            match name {
                Some(n) => doc
                    .contract(n)
                    .cloned()
                    .ok_or_else(|| format!("{path}: no contract named `{n}`")),
                None if doc.contracts.len() == 1 => Ok(doc.contracts[0].clone()),
                None => Err(format!(
                    "{path} defines {} contracts; pick one with `{path}#Name`",
                    doc.contracts.len()
                )),
            }
        }
    }
}

fn load_document(path: &str) -> Result<ModelDocument, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    parse_document(&text).map_err(|e| {
        format!("{path}:{}:{}: error[PARSE]: {}", e.pos.line, e.pos.col, e.message)
    })
}

fn parse_timeouts(flags: &[String]) -> Result<BTreeMap<String, u64>, String> {
    let mut map = BTreeMap::new();
    for flag in flags {
        let (name, ticks) = flag
            .split_once('=')
            .ok_or_else(|| format!("--timeout wants NAME=TICKS, got `{flag}`"))?;
        let ticks =
            ticks.parse().map_err(|_| format!("--timeout `{flag}`: ticks must be an integer"))?;
        map.insert(name.to_string(), ticks);
    }
    Ok(map)
}

fn int_param(sys: &System, contract: &str, param: &str) -> Option<i64> {
    sys.instances
        .iter()
        .filter(|i| i.contract == contract)
        .filter_map(|i| match i.params.get(param) {
            Some(Value::Int(n)) => Some(*n),
            _ => None,
        })
        .max()
}

fn build_properties(names: &[String], sys: &System) -> Result<Vec<Box<dyn Property>>, String> {
    let mut props: Vec<Box<dyn Property>> = Vec::new();
    for name in names {
        match name.as_str() {
            "agreement" => {
                let expected = int_param(sys, "LE_Device", "myId").ok_or_else(|| {
                    "agreement needs LE_Device instances to decide a leader".to_string()
                })?;
                props.push(Box::new(Agreement { expected }));
            }
            "no-duplicate-decision" => props.push(Box::new(SingleDecision)),
            "give-up-bound" => {
                let max_retries = int_param(sys, "LE_Wrapper", "maxRetries").unwrap_or(0);
                props.push(Box::new(GiveUpBound { max_retries }));
            }
            other => {
                return Err(format!(
                    "unknown property `{other}`; registry: agreement, no-duplicate-decision, give-up-bound"
                ))
            }
        }
    }
    Ok(props)
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string encodes")
}

fn explore_report_json(outcome: &ExploreOutcome) -> String {
    let (result, stats) = match outcome {
        ExploreOutcome::Pass(stats) => ("PASS", stats),
        ExploreOutcome::Fail { stats, .. } => ("FAIL", stats),
        ExploreOutcome::StateCapExceeded(stats) => ("STATE_CAP_EXCEEDED", stats),
    };
    let mut out = format!(
        "{{\"result\":\"{result}\",\"states\":{},\"transitions\":{},\"traces\":{},\"frontierAtBound\":{},\"maxDepthReached\":{}",
        stats.states, stats.transitions, stats.terminals, stats.frontier_at_bound, stats.max_depth_reached,
    );
    if let ExploreOutcome::Fail { property, message, counterexample, .. } = outcome {
        out.push_str(&format!(
            ",\"property\":{},\"message\":{},\"counterexample\":[",
            json_str(property),
            json_str(message)
        ));
        let lines: Vec<String> = counterexample.events.iter().map(event_line).collect();
        out.push_str(&lines.join(","));
        out.push(']');
    }
    out.push('}');
    out
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

//! `popsym`: simulate, script and analyze population protocols under
//! parallel matching schedulers.
//!
//! Exit codes: 0 on success, 1 on domain errors (reported as a single
//! `error: ...` line on stderr), 2 on usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use popsym_core::analysis;
use popsym_core::dsl;
use popsym_core::experiment::{
    self, aggregates_csv, records_csv, ExperimentSpec, MeasurementMode,
};
use popsym_core::graph::{self, GraphLimits};
use popsym_core::model::{enabled_effective_pairs, output_of_config, Configuration, Protocol};
use popsym_core::scheduler::{
    script_for_builtin, RandomScheduler, Schedule, SchedulerKind,
};
use popsym_core::Builtin;

#[derive(Parser)]
#[command(name = "popsym", version, about = "Population protocol symmetry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a protocol, check its invariants and print the static analysis report.
    Validate(ProtocolArgs),
    /// Print the static analysis report (reachability, stable states, lints).
    Analyze(ProtocolArgs),
    /// Simulate one run under a scheduler and print the trace summary.
    Run(RunArgs),
    /// Exact or scripted symmetry of a protocol on an initial configuration.
    Symmetry(SymmetryArgs),
    /// Print the scripted symmetry-maximizing schedule for a builtin.
    Schedule(ScheduleArgs),
    /// Merge output-stable states into a disseminating state and print the result.
    Transform(ProtocolArgs),
    /// Seeded sweep over population sizes; emits CSV records.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    /// Protocol file in the line-oriented text format.
    file: Option<PathBuf>,
    /// Builtin family: count_to_x | positive_lc | majority | k_majority | parity.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Threshold x for count_to_x.
    #[arg(long)]
    x: Option<u32>,
    /// Coefficients for positive_lc, comma separated (e.g. 1,2).
    #[arg(long, value_delimiter = ',')]
    coeffs: Option<Vec<u32>>,
    /// Threshold c for positive_lc.
    #[arg(long)]
    threshold: Option<u32>,
    /// Symmetry parameter k for k_majority.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args, Clone)]
struct InitArgs {
    /// Initial counts by state, e.g. q1=100 or l_1=5,l_m1=3.
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<String>>,
    /// Population size, all nodes on the protocol's default input.
    #[arg(long)]
    n: Option<u32>,
    /// Count of input 0 (count_to_x).
    #[arg(long)]
    n0: Option<u32>,
    /// Count of input 1 (count_to_x).
    #[arg(long)]
    n1: Option<u32>,
    /// Count of input a (majority families).
    #[arg(long)]
    na: Option<u32>,
    /// Count of input b (majority families).
    #[arg(long)]
    nb: Option<u32>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    init: InitArgs,
    /// seq | maxmatch | maximal | script:<name>.
    #[arg(long, default_value = "maxmatch")]
    scheduler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of parallel steps.
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SymmetryArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    init: InitArgs,
    /// exact: configuration-graph search; scripted: replay the symmetry-maximizing schedule.
    #[arg(long, value_enum)]
    mode: SymmetryMode,
    /// Expected output symbol ("0"/"1"); required for file protocols in exact mode.
    #[arg(long)]
    expect: Option<String>,
    /// Node budget for the exact search.
    #[arg(long, default_value_t = 2_000_000)]
    budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryMode {
    Exact,
    Scripted,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    init: InitArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Sizes as start:end:step (e.g. 100:1000:100) or a comma list.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 30)]
    reps: u32,
    /// until_stability | until_alarm_majority.
    #[arg(long, default_value = "until_stability")]
    mode: String,
    /// seq | maxmatch | maximal.
    #[arg(long, default_value = "maxmatch")]
    scheduler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
    /// Input symbol assigned to every node.
    #[arg(long)]
    input: Option<String>,
    /// Write per-run CSV here instead of stdout.
    #[arg(long)]
    records_out: Option<PathBuf>,
    /// Write the per-size aggregate CSV to this file.
    #[arg(long)]
    aggregate_out: Option<PathBuf>,
    /// Write the growth-fit summary JSON to this file.
    #[arg(long)]
    fit_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// The protocol selected on the command line, with the builtin kept around
/// for predicate/stability knowledge when there is one.
struct Selected {
    builtin: Option<Builtin>,
    protocol: Protocol,
}

fn resolve_protocol(args: &ProtocolArgs) -> Result<Selected> {
    if let Some(path) = &args.file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let protocol = dsl::parse_protocol(&text)?;
        return Ok(Selected {
            builtin: None,
            protocol,
        });
    }
    let name = args
        .builtin
        .as_deref()
        .ok_or_else(|| anyhow!("either a protocol file or --builtin is required"))?;
    let builtin = match name {
        "count_to_x" => Builtin::CountToX {
            x: args.x.ok_or_else(|| anyhow!("count_to_x requires --x"))?,
        },
        "positive_lc" => Builtin::PositiveLc {
            coeffs: args
                .coeffs
                .clone()
                .ok_or_else(|| anyhow!("positive_lc requires --coeffs"))?,
            threshold: args
                .threshold
                .ok_or_else(|| anyhow!("positive_lc requires --threshold"))?,
        },
        "majority" => Builtin::Majority,
        "k_majority" => Builtin::KMajority {
            k: args.k.ok_or_else(|| anyhow!("k_majority requires --k"))?,
        },
        "parity" => Builtin::ParityLeader,
        other => bail!("unknown builtin `{other}`"),
    };
    builtin.validate()?;
    Ok(Selected {
        protocol: builtin.protocol(),
        builtin: Some(builtin),
    })
}

fn build_c0(sel: &Selected, init: &InitArgs) -> Result<Configuration> {
    let p = &sel.protocol;
    if let Some(entries) = &init.init {
        let mut counts = Vec::new();
        for e in entries {
            let (state, count) = e
                .split_once('=')
                .ok_or_else(|| anyhow!("--init entries have the form state=count, got `{e}`"))?;
            counts.push((state.trim().to_string(), count.trim().parse::<u32>()?));
        }
        return Ok(p.configuration_from_states(&counts)?);
    }
    let mut by_input: Vec<(String, u32)> = Vec::new();
    let mut push = |sym: &str, count: Option<u32>| {
        if let Some(k) = count {
            by_input.push((sym.to_string(), k));
        }
    };
    push("0", init.n0);
    push("1", init.n1);
    push("a", init.na);
    push("b", init.nb);
    if let Some(n) = init.n {
        let sym = match &sel.builtin {
            Some(b) => b.default_sweep_input().to_string(),
            None => p
                .inputs()
                .first()
                .cloned()
                .ok_or_else(|| anyhow!("protocol has no inputs; use --init"))?,
        };
        by_input.push((sym, n));
    }
    if by_input.is_empty() {
        bail!("no initial configuration given; use --init or the count flags (--n, --n0, --n1, --na, --nb)");
    }
    Ok(p.configuration_from_inputs(&by_input)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_kind(s: &str) -> Result<SchedulerKind> {
    match s {
        "seq" => Ok(SchedulerKind::SequentialRandom),
        "maxmatch" => Ok(SchedulerKind::RandomMaximumMatching),
        "maximal" => Ok(SchedulerKind::RandomMaximalMatching),
        other => bail!("unknown scheduler `{other}` (expected seq, maxmatch or maximal)"),
    }
}

fn cmd_validate(args: &ProtocolArgs) -> Result<()> {
    let sel = resolve_protocol(args)?;
    let report = analysis::analyze(
        &sel.protocol,
        predicate_coefficients(&sel.builtin).as_deref(),
    );
    print_json(&serde_json::json!({
        "valid": true,
        "protocol": sel.protocol.name(),
        "states": sel.protocol.num_states(),
        "effective_rules": sel.protocol.num_effective_rules(),
        "analysis": report,
    }))
}

fn predicate_coefficients(b: &Option<Builtin>) -> Option<Vec<i64>> {
    match b {
        Some(Builtin::CountToX { .. }) => Some(vec![1]),
        Some(Builtin::PositiveLc { coeffs, .. }) => {
            Some(coeffs.iter().map(|&a| i64::from(a)).collect())
        }
        Some(Builtin::Majority) | Some(Builtin::KMajority { .. }) => Some(vec![1, -1]),
        Some(Builtin::ParityLeader) | None => None,
    }
}

fn cmd_analyze(args: &ProtocolArgs) -> Result<()> {
    let sel = resolve_protocol(args)?;
    let report = analysis::analyze(
        &sel.protocol,
        predicate_coefficients(&sel.builtin).as_deref(),
    );
    print_json(&report)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let sel = resolve_protocol(&args.protocol)?;
    let c0 = build_c0(&sel, &args.init)?;
    let p = &sel.protocol;

    if let Some(script) = args.scheduler.strip_prefix("script:") {
        let b = sel
            .builtin
            .as_ref()
            .ok_or_else(|| anyhow!("scripted schedulers require --builtin"))?;
        let schedule = script_for_builtin(b, p, &c0)?;
        if schedule.script != script {
            bail!(
                "script `{script}` does not match builtin `{}` (expected `{}`)",
                p.name(),
                schedule.script
            );
        }
        return report_run(
            args.format,
            p,
            schedule.steps.len() as u64,
            schedule.achieved_min_symmetry,
            "stable",
            &schedule.final_config,
        );
    }

    let kind = parse_kind(&args.scheduler)?;
    match &sel.builtin {
        Some(b) => {
            let r = experiment::run_once(
                b,
                p,
                &c0,
                kind,
                args.seed,
                MeasurementMode::UntilStability,
                args.cap,
                0,
            )?;
            report_run(
                args.format,
                p,
                r.steps,
                r.observed_min_symmetry,
                r.terminal.as_str(),
                &r.final_config,
            )
        }
        None => {
            // File protocols have no analytic stability detector; stop when
            // no effective pair is enabled.
            let scheduler = RandomScheduler::new(kind, args.seed);
            let mut current = c0.clone();
            let mut min = current.symmetry();
            let mut steps = 0u64;
            let terminal = loop {
                if enabled_effective_pairs(p, &current).is_empty() {
                    break "quiescent";
                }
                if steps >= args.cap {
                    break "step-cap";
                }
                let step = scheduler.step(&current, steps)?;
                current = popsym_core::model::apply_step(p, &current, &step)?;
                steps += 1;
                min = min.min(current.symmetry());
            };
            report_run(args.format, p, steps, min, terminal, &current)
        }
    }
}

fn report_run(
    format: Format,
    p: &Protocol,
    steps: u64,
    min_symmetry: u32,
    terminal: &str,
    final_config: &Configuration,
) -> Result<()> {
    let outputs = output_of_config(p, final_config);
    match format {
        Format::Json => print_json(&serde_json::json!({
            "protocol": p.name(),
            "steps": steps,
            "min_symmetry": min_symmetry,
            "terminal": terminal,
            "final": p.named_counts(final_config),
            "outputs": outputs,
        })),
        Format::Text => {
            println!("protocol: {}", p.name());
            println!("steps: {steps}");
            println!("min_symmetry: {min_symmetry}");
            println!("terminal: {terminal}");
            let parts: Vec<String> = outputs.iter().map(|(y, k)| format!("{y}:{k}")).collect();
            println!("outputs: {}", parts.join(" "));
            Ok(())
        }
    }
}

fn cmd_symmetry(args: &SymmetryArgs) -> Result<()> {
    let sel = resolve_protocol(&args.protocol)?;
    let c0 = build_c0(&sel, &args.init)?;
    let p = &sel.protocol;
    match args.mode {
        SymmetryMode::Exact => {
            let expected = match (&args.expect, &sel.builtin) {
                (Some(y), _) => y.clone(),
                (None, Some(b)) => b.expected_output(p, &c0),
                (None, None) => bail!("exact mode on a file protocol requires --expect"),
            };
            let limits = GraphLimits {
                max_nodes: args.budget,
            };
            let exact = graph::exact_symmetry(p, &c0, &expected, limits)?;
            print_json(&exact.to_report(p))
        }
        SymmetryMode::Scripted => {
            let b = sel
                .builtin
                .as_ref()
                .ok_or_else(|| anyhow!("scripted mode requires --builtin"))?;
            let schedule = script_for_builtin(b, p, &c0)?;
            let verified = verify_schedule(p, &schedule)?;
            let mut report = serde_json::to_value(schedule.to_report(p))?;
            report["replay_verified_min_symmetry"] = serde_json::json!(verified);
            print_json(&report)
        }
    }
}

/// Replays a schedule through the step semantics and returns the verified
/// minimum symmetry.
fn verify_schedule(p: &Protocol, s: &Schedule) -> Result<u32> {
    let trace = popsym_core::model::ExecutionTrace::replay(p, s.initial.clone(), s.steps.clone())?;
    if trace.min_symmetry() != s.achieved_min_symmetry {
        bail!(
            "replay disagrees with schedule: {} vs {}",
            trace.min_symmetry(),
            s.achieved_min_symmetry
        );
    }
    Ok(trace.min_symmetry())
}

fn cmd_schedule(args: &ScheduleArgs) -> Result<()> {
    let sel = resolve_protocol(&args.protocol)?;
    let b = sel
        .builtin
        .as_ref()
        .ok_or_else(|| anyhow!("schedule requires --builtin"))?;
    let c0 = build_c0(&sel, &args.init)?;
    let schedule = script_for_builtin(b, &sel.protocol, &c0)?;
    verify_schedule(&sel.protocol, &schedule)?;
    print_json(&schedule.to_report(&sel.protocol))
}

fn cmd_transform(args: &ProtocolArgs) -> Result<()> {
    let sel = resolve_protocol(args)?;
    let transformed = analysis::disseminating_transform(&sel.protocol)?;
    print!("{}", dsl::serialize_protocol(&transformed));
    Ok(())
}

fn parse_sizes(spec: &str) -> Result<Vec<u32>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("sizes range has the form start:end:step");
        }
        let (start, end, step) = (
            parts[0].parse::<u32>()?,
            parts[1].parse::<u32>()?,
            parts[2].parse::<u32>()?,
        );
        if step == 0 || end < start {
            bail!("invalid sizes range `{spec}`");
        }
        Ok((start..=end).step_by(step as usize).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<u32>().map_err(Into::into))
            .collect()
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let sel = resolve_protocol(&args.protocol)?;
    let b = sel
        .builtin
        .clone()
        .ok_or_else(|| anyhow!("experiment requires --builtin"))?;
    let mode = match args.mode.as_str() {
        "until_stability" => MeasurementMode::UntilStability,
        "until_alarm_majority" => MeasurementMode::UntilAlarmMajority,
        other => bail!("unknown mode `{other}`"),
    };
    let mut spec = ExperimentSpec::new(b, parse_sizes(&args.sizes)?, args.reps);
    spec.scheduler = parse_kind(&args.scheduler)?;
    spec.base_seed = args.seed;
    spec.mode = mode;
    spec.step_cap = args.cap;
    if let Some(input) = &args.input {
        spec.initial_input = input.clone();
    }
    let result = experiment::run_sweep(&spec)?;
    let records = records_csv(&result);
    match &args.records_out {
        Some(path) => fs::write(path, records)?,
        None => print!("{records}"),
    }
    if let Some(path) = &args.aggregate_out {
        fs::write(path, aggregates_csv(&result.aggregates))?;
    }
    if let Some(path) = &args.fit_out {
        let fit = experiment::growth_fit(&result.aggregates)?;
        fs::write(path, serde_json::to_string_pretty(&fit)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Run(a) => cmd_run(a),
        Command::Symmetry(a) => cmd_symmetry(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! `lotforge`: generate lot-sizing instances, solve them, verify schedules,
//! and benchmark the approximation against exact optima.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 algorithmic failure,
//! 3 verification mismatch.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lotforge::instance::{self, check_feasible, gen_kc_gap, gen_random, CmilsInstance, GenParams, OrderSchedule};
use lotforge::master::{run_pipeline, PipelineConfig, PipelineError};
use lotforge::num::{format_rational, int, parse_rational, Rational};
use lotforge::oracles::{brute_force_cmils, MAX_CMILS_HORIZON};
use rayon::prelude::*;

use report::RunReport;

#[derive(Parser)]
#[command(name = "lotforge", version, about = "Capacitated multi-item lot-sizing approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate(GenerateArgs),
    /// Run the cut loop, rounding and assignment on an instance; print a report.
    Solve(SolveArgs),
    /// Re-check a schedule's feasibility and cost fields against an instance.
    Verify {
        instance: PathBuf,
        schedule: PathBuf,
    },
    /// Solve a range of generated instances and print one CSV row per seed.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Random,
    KcGap,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "random")]
    family: Family,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "T", default_value_t = 6)]
    horizon: usize,
    #[arg(long = "N", default_value_t = 4)]
    items: usize,
    /// Cumulative capacity over cumulative due demand, at least 1.
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    slack: Rational,
    /// Scale of the gap instance.
    #[arg(long = "R", default_value = "1000", value_parser = rational_arg)]
    scale: Rational,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Where to write the schedule JSON.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    max_rounds: usize,
    /// Add every violated cut of a round instead of the first.
    #[arg(long)]
    add_all: bool,
    /// Print the cut loop and rounding trace to stderr (also LOTFORGE_TRACE=1).
    #[arg(long)]
    trace: bool,
    /// Also compute the exact optimum by enumeration.
    #[arg(long)]
    oracle: bool,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Inclusive seed range `a..b`; empty when `a > b`.
    #[arg(long, value_parser = seed_range)]
    seeds: (u64, u64),
    #[arg(long = "T", default_value_t = 6)]
    horizon: usize,
    #[arg(long = "N", default_value_t = 4)]
    items: usize,
    /// Compare against the exact optimum and fail if any ratio exceeds 10.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 200)]
    max_rounds: usize,
    #[arg(long)]
    timing: bool,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let parse = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("bad seed {v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn algorithm(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Invalid(_) | PipelineError::Instance(_) => Failure::usage(e),
            _ => Failure::algorithm(e),
        }
    }
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::usage(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => emit(text),
    }
}

fn trace_enabled(flag: bool) -> bool {
    flag || std::env::var("LOTFORGE_TRACE").is_ok_and(|v| v == "1")
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let inst = match args.family {
        Family::Random => {
            let params = GenParams {
                slack_factor: args.slack.clone(),
                ..GenParams::new(args.horizon, args.items)
            };
            gen_random(args.seed, &params)
        }
        Family::KcGap => gen_kc_gap(&args.scale),
    }
    .map_err(Failure::usage)?;
    write_output(args.out.as_deref(), &(inst.to_json_string() + "\n"))
}

fn oracle_cost(inst: &CmilsInstance) -> Result<Rational, Failure> {
    if inst.horizon > MAX_CMILS_HORIZON {
        return Err(Failure::usage(format!(
            "--oracle needs T <= {MAX_CMILS_HORIZON}, instance has T = {}",
            inst.horizon
        )));
    }
    brute_force_cmils(inst)
        .map(|r| r.optimum_cost)
        .map_err(Failure::algorithm)
}

/// One pipeline run plus its report; the schedule is returned for writing.
fn run_one(
    id: String,
    inst: &CmilsInstance,
    config: &PipelineConfig,
    oracle: bool,
    timing: bool,
) -> Result<(RunReport, OrderSchedule, Vec<String>), Failure> {
    let start = Instant::now();
    let run = run_pipeline(inst, config)?;
    let elapsed = start.elapsed();
    let opt = if oracle { Some(oracle_cost(inst)?) } else { None };
    let mut report = RunReport::new(
        id,
        &run.certificate.lp_value,
        &run.schedule.costs,
        opt.as_ref(),
        run.certificate.rounds,
        run.certificate.num_cuts,
    );
    if timing {
        report.wall_time_ms = Some(elapsed.as_millis() as u64);
    }
    Ok((report, run.schedule, run.trace))
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = CmilsInstance::load(&args.instance).map_err(Failure::usage)?;
    let tracing = trace_enabled(args.trace);
    let config = PipelineConfig {
        max_rounds: args.max_rounds,
        add_all_violated: args.add_all,
        trace: tracing,
    };
    let id = args
        .instance
        .file_stem()
        .map_or_else(|| "instance".to_string(), |s| s.to_string_lossy().into_owned());
    let (report, schedule, trace) = run_one(id, &inst, &config, args.oracle, args.timing)?;
    for line in &trace {
        eprintln!("{line}");
    }
    if let Some(path) = &args.out {
        schedule.save(path).map_err(Failure::usage)?;
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(&(json + "\n"))
}

/// Returns the mismatches between a schedule and an instance, one per line.
fn verify_pair(inst: &CmilsInstance, sched: &OrderSchedule) -> Vec<String> {
    let mut problems: Vec<String> = instance::validate(inst).iter().map(|v| format!("instance: {v}")).collect();
    if !problems.is_empty() {
        return problems;
    }
    let report = check_feasible(inst, sched);
    problems.extend(report.violations.iter().map(|v| v.to_string()));
    if !report.is_feasible() {
        return problems;
    }
    let costs = instance::cost(inst, sched).expect("feasible schedule prices");
    for (name, claimed, actual) in [
        ("ordering", &sched.costs.ordering, &costs.ordering),
        ("holding", &sched.costs.holding, &costs.holding),
        ("total", &sched.costs.total, &costs.total),
    ] {
        if claimed != actual {
            problems.push(format!(
                "{name} cost field {} but recomputed {}",
                format_rational(claimed),
                format_rational(actual)
            ));
        }
    }
    problems
}

fn verify(instance: &Path, schedule: &Path) -> Result<(), Failure> {
    let inst = CmilsInstance::load(instance).map_err(Failure::usage)?;
    let sched = OrderSchedule::load(schedule).map_err(Failure::usage)?;
    let problems = verify_pair(&inst, &sched);
    if problems.is_empty() {
        return emit(&format!("ok: feasible, total cost {}\n", format_rational(&sched.costs.total)));
    }
    Err(Failure {
        code: 3,
        message: problems.join("\n"),
    })
}

fn bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.oracle && args.horizon > MAX_CMILS_HORIZON {
        return Err(Failure::usage(format!("--oracle needs --T <= {MAX_CMILS_HORIZON}")));
    }
    let (a, b) = args.seeds;
    let seeds: Vec<u64> = if a <= b { (a..=b).collect() } else { Vec::new() };
    let config = PipelineConfig {
        max_rounds: args.max_rounds,
        ..PipelineConfig::default()
    };
    let params = GenParams::new(args.horizon, args.items);
    // Rows come back in seed order regardless of completion order.
    let rows: Vec<Result<RunReport, Failure>> = seeds
        .par_iter()
        .map(|&seed| {
            let inst = gen_random(seed, &params).map_err(Failure::usage)?;
            run_one(format!("seed-{seed}"), &inst, &config, args.oracle, args.timing)
                .map(|(r, _, _)| r)
                .map_err(|f| Failure {
                    message: format!("seed {seed}: {}", f.message),
                    ..f
                })
        })
        .collect();
    let mut csv = String::from(RunReport::CSV_HEADER);
    csv.push('\n');
    let mut reports = Vec::with_capacity(rows.len());
    for row in rows {
        let r = row?;
        csv.push_str(&r.csv_row());
        csv.push('\n');
        reports.push(r);
    }
    write_output(args.out.as_deref(), &csv)?;
    if args.oracle {
        let ten = int(10);
        let bad: Vec<&str> = reports
            .iter()
            .filter(|r| {
                r.ratio_vs_opt
                    .as_ref()
                    .is_some_and(|v| parse_rational(&v.exact).expect("own output") > ten)
            })
            .map(|r| r.instance_id.as_str())
            .collect();
        if !bad.is_empty() {
            return Err(Failure::algorithm(format!("ratio above 10 on {}", bad.join(", "))));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Verify { instance, schedule } => verify(instance, schedule),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

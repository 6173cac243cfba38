//! `mbgf`: run balanced gradient flow experiments and verification suites.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or
//! config error, 3 numeric-domain or divergence error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbgf::config::{parse_unvalidated, ExperimentConfig, Mode};
use mbgf::experiment::run_experiment;
use mbgf::problems::{builtin, builtin_title, BUILTIN_NAMES};
use mbgf::verify::{run_suite, Suite, SuiteReport, VerifyOptions};
use mbgf::Error;

#[derive(Parser)]
#[command(
    name = "mbgf",
    version,
    about = "Multiobjective balanced gradient flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the first-order flow and write the trajectory as CSV.
    Run(RunArgs),
    /// Integrate the accelerated flow.
    Accel(RunArgs),
    /// Run the discrete scheme and write the iterates as CSV.
    Discrete(RunArgs),
    /// Run verification suites; exits 1 if any gating check fails.
    Verify(VerifyArgs),
    /// List the built-in problems.
    ListProblems,
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct RunArgs {
    /// Config file (JSON or `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// p1, p2, p3 or p4.
    #[arg(long)]
    problem: Option<String>,
    /// e.g. `const:1,1` or `gradnorm:eta=0.1,min=0.5,max=10`.
    #[arg(long)]
    scaling: Option<String>,
    /// Start point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Damping numerator (accelerated).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Time shift (accelerated).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// rk4 or proximal (accelerated).
    #[arg(long)]
    scheme: Option<String>,
    /// Iteration count (discrete).
    #[arg(long, allow_hyphen_values = true)]
    iters: Option<String>,
    /// Fraction of the largest admissible step (discrete).
    #[arg(long, allow_hyphen_values = true)]
    safety: Option<String>,
    /// Record every N-th step.
    #[arg(long, allow_hyphen_values = true)]
    record_every: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// CSV output; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// Summary JSON output.
    #[arg(long)]
    summary: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`. Repeatable.
    #[arg(long, required = true)]
    suite: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here (an array when several suites run).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    print_json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run(a) => run(a, Mode::Flow),
        Command::Accel(a) => run(a, Mode::Accel),
        Command::Discrete(a) => run(a, Mode::Discrete),
        Command::Verify(a) => verify(a),
        Command::ListProblems => list_problems(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mbgf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Caps the worker pool at `MBGF_THREADS` when set.
fn configure_threads() {
    let Ok(raw) = std::env::var("MBGF_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("mbgf: ignoring MBGF_THREADS={raw:?} (expected a positive integer)"),
    }
}

fn build_config(a: &RunArgs, mode: Mode) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_unvalidated(&text)?
        }
        None => ExperimentConfig::new(""),
    };
    cfg.mode = mode;
    let overrides = [
        ("problem", &a.problem),
        ("scaling", &a.scaling),
        ("x0", &a.x0),
        ("t_end", &a.t_end),
        ("dt", &a.dt),
        ("r", &a.r),
        ("theta", &a.theta),
        ("scheme", &a.scheme),
        ("iters", &a.iters),
        ("safety", &a.safety),
        ("record_every", &a.record_every),
        ("seed", &a.seed),
        ("out", &a.out),
        ("summary", &a.summary),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs, mode: Mode) -> Result<u8, Error> {
    let cfg = build_config(&a, mode)?;
    let outcome = run_experiment(&cfg)?;
    if cfg.out.is_none() {
        std::io::stdout().write_all(outcome.csv.as_bytes())?;
    }
    let last = &outcome.summary["final"];
    eprintln!(
        "{} {}: {} records, final f = {}, scaled criticality = {}",
        cfg.problem,
        mode.name(),
        outcome.summary["records"],
        last["f"],
        last["crit_scaled"]
    );
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8, Error> {
    let mut suites = Vec::new();
    for name in &a.suite {
        if name == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(name.parse::<Suite>()?);
        }
    }
    let opts = VerifyOptions { seed: a.seed };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        if !a.print_json {
            print!("{}", report.table());
        }
        reports.push(report);
    }
    let json = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        json_array(&reports)
    };
    if a.print_json {
        println!("{json}");
    }
    if let Some(path) = &a.json {
        fs::write(path, format!("{json}\n"))?;
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.suite.as_str())
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("mbgf: failing suites: {}", failed.join(", "));
        Ok(1)
    }
}

fn json_array(reports: &[SuiteReport]) -> String {
    let items: Vec<String> = reports
        .iter()
        .map(|r| {
            r.to_json()
                .lines()
                .map(|l| format!("  {l}"))
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    format!("[\n{}\n]", items.join(",\n"))
}

fn list_problems() -> Result<u8, Error> {
    println!(
        "{:<4}  {:<24}  {:>3}  {:>3}  {:<15}  start points",
        "name", "title", "n", "m", "class"
    );
    for name in BUILTIN_NAMES {
        let p = builtin::<f64>(name).expect("built-in problem");
        let starts: Vec<String> = p
            .start_points
            .iter()
            .map(|x| {
                format!(
                    "({})",
                    x.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        println!(
            "{:<4}  {:<24}  {:>3}  {:>3}  {:<15}  {}",
            name,
            builtin_title(name).unwrap_or(""),
            p.dim,
            p.objectives,
            format!("{:?}", p.class),
            starts.join(" ")
        );
    }
    Ok(0)
}

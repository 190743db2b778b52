use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use popsim::adversary::InitKind;
use popsim::oracle::DEFAULT_BUDGET;
use popsim::ProtocolKind;
use popsim_cli::{execute, CliError, Command, ExperimentSpec, Format, Overrides, Process};

#[derive(Parser)]
#[command(name = "popsim", version, about = "Self-stabilizing ranking protocols: simulation, sweeps and exact checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One row per (n, trial).
    Run(Common),
    /// Like run, plus a log-log fit of mean stabilization time against n.
    Sweep(Common),
    /// Epidemic and roll-call reference processes.
    Baseline(Common),
    /// Exhaustive self-stabilization check on a tiny population (JSON).
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<ProtocolKind>,
    #[arg(long, value_parser = parse_init)]
    init: Option<InitKind>,
    /// Population size, or a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Master seed.
    #[arg(long, env = "POPSIM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_interactions: Option<u64>,
    #[arg(long)]
    tail_margin: Option<u64>,
    /// Size of the name universe (default n^3).
    #[arg(long)]
    name_space: Option<u64>,
    #[arg(long)]
    r_max: Option<u32>,
    #[arg(long)]
    d_max: Option<u32>,
    #[arg(long)]
    c_max: Option<u32>,
    /// Give two linear_time agents the same name after generating the start.
    #[arg(long)]
    plant_collision: bool,
    /// Baseline process (repeatable); both when omitted.
    #[arg(long, value_delimiter = ',')]
    process: Vec<Process>,
    /// Largest configuration graph verify will build.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// csv or json; verify always writes json.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    s.parse().map_err(|e: popsim::SimError| e.to_string())
}

fn parse_init(s: &str) -> Result<InitKind, String> {
    s.parse().map_err(|e: popsim::SimError| e.to_string())
}

fn to_spec(command: Command, a: Common) -> ExperimentSpec {
    let default_format = if command == Command::Verify { Format::Json } else { Format::Csv };
    ExperimentSpec {
        command,
        protocol: a.protocol,
        init: a.init,
        ns: a.n,
        trials: a.trials,
        seed: a.seed,
        overrides: Overrides {
            max_interactions: a.max_interactions,
            tail_margin: a.tail_margin,
            name_space: a.name_space,
            r_max: a.r_max,
            d_max: a.d_max,
            c_max: a.c_max,
        },
        plant_collision: a.plant_collision,
        processes: a.process,
        budget: a.budget,
        format: a.format.unwrap_or(default_format),
        out: a.out,
        jobs: a.jobs,
    }
}

/// One line on stderr: `{"error": kind, "message": text}`.
fn report(e: &CliError) {
    let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            report(&CliError::Spec(first));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let spec = match cli.command {
        Cmd::Run(a) => to_spec(Command::Run, a),
        Cmd::Sweep(a) => to_spec(Command::Sweep, a),
        Cmd::Baseline(a) => to_spec(Command::Baseline, a),
        Cmd::Verify(a) => to_spec(Command::Verify, a),
    };
    match execute(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

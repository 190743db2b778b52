//! Experiment specification and execution.
//!
//! Each trial draws from its own substream of the master seed, indexed by
//! `(n << 32) | trial`, so output never depends on scheduling or `--jobs`.

use std::path::PathBuf;

use popsim::adversary::{generate_initial, plant_name_collision, Adversary, InitKind};
use popsim::analysis::{epidemic_trial, fit_loglog, roll_call_trial, ScalingFit};
use popsim::oracle::{build_config_graph, verify_self_stabilizing, Enumerable, VerificationReport};
use popsim::protocols::{Cai, LinearState, LinearTime, LogTime, Obs};
use popsim::{run, Params, ProtocolKind, RngStream, RunMetrics, RunOptions};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::output::{render, write_rows, Field, Format, Record};

pub const RUN_HEADER: [&str; 11] = [
    "protocol",
    "n",
    "init",
    "seed",
    "trial",
    "interactions",
    "parallel_time",
    "silence_interaction",
    "convergence_interaction",
    "timed_out",
    "reset_triggers",
];

pub const FIT_HEADER: [&str; 8] = ["protocol", "init", "metric", "points", "slope", "intercept", "r_squared", "trials"];

pub const BASELINE_HEADER: [&str; 6] = ["process", "n", "seed", "trial", "interactions", "parallel_time"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Baseline,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Process {
    Epidemic,
    RollCall,
}

impl Process {
    pub const ALL: [Process; 2] = [Process::Epidemic, Process::RollCall];

    pub fn tag(self) -> &'static str {
        match self {
            Process::Epidemic => "epidemic",
            Process::RollCall => "roll_call",
        }
    }
}

impl std::str::FromStr for Process {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Process::ALL
            .into_iter()
            .find(|p| p.tag() == s)
            .ok_or_else(|| format!("unknown process `{s}` (expected epidemic or roll_call)"))
    }
}

/// Optional overrides on top of the default parameters for each `n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub max_interactions: Option<u64>,
    pub tail_margin: Option<u64>,
    pub name_space: Option<u64>,
    pub r_max: Option<u32>,
    pub d_max: Option<u32>,
    pub c_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub protocol: Option<ProtocolKind>,
    pub init: Option<InitKind>,
    pub ns: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub overrides: Overrides,
    pub plant_collision: bool,
    pub processes: Vec<Process>,
    pub budget: u128,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Spec(msg));
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        if self.ns.is_empty() {
            return bad("--n needs at least one population size".into());
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 2) {
            return bad(format!("population size {n} is below 2"));
        }
        if self.ns.iter().any(|&n| n as u64 > u32::MAX as u64) {
            return bad("population sizes must fit in 32 bits".into());
        }
        if self.trials > u32::MAX as u64 {
            return bad("--trials must fit in 32 bits".into());
        }
        if self.jobs == Some(0) {
            return bad("--jobs must be at least 1".into());
        }
        let needs_protocol = matches!(self.command, Command::Run | Command::Sweep | Command::Verify);
        if needs_protocol && self.protocol.is_none() {
            return bad("--protocol is required".into());
        }
        if matches!(self.command, Command::Run | Command::Sweep) && self.init.is_none() {
            return bad("--init is required".into());
        }
        if self.plant_collision && self.protocol != Some(ProtocolKind::LinearTime) {
            return bad("--plant-collision only applies to linear_time".into());
        }
        match self.command {
            Command::Sweep => {
                if self.ns.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("--n must be strictly increasing for a sweep".into());
                }
                if self.ns.len() < 3 {
                    return bad("a sweep needs at least 3 population sizes".into());
                }
            }
            Command::Verify => {
                if self.ns.len() != 1 {
                    return bad("verify takes a single --n".into());
                }
                if self.format != Format::Json {
                    return bad("verify only writes json".into());
                }
            }
            Command::Run | Command::Baseline => {}
        }
        Ok(())
    }

    /// Parameters for one population size with the overrides applied.
    pub fn params(&self, n: usize) -> Result<Params> {
        let kind = self.protocol.unwrap_or(ProtocolKind::Cai);
        apply_overrides(default_params(kind, n)?, &self.overrides)
    }
}

/// Default parameters, except that the n-state protocol gets a horizon of
/// `10 n^3` interactions since its worst case needs about `n^3 / 2`.
pub fn default_params(kind: ProtocolKind, n: usize) -> Result<Params> {
    let params = Params::new(n)?;
    Ok(match kind {
        ProtocolKind::Cai => {
            let cube = 10u64.saturating_mul((n as u64).saturating_pow(3));
            let horizon = params.max_interactions.max(cube);
            params.with_max_interactions(horizon)
        }
        _ => params,
    })
}

pub fn apply_overrides(mut params: Params, o: &Overrides) -> Result<Params> {
    if let Some(m) = o.max_interactions {
        params = params.with_max_interactions(m);
    }
    if let Some(t) = o.tail_margin {
        params = params.with_tail_margin(t);
    }
    if let Some(q) = o.name_space {
        params = params.with_name_space(q)?;
    }
    if o.r_max.is_some() || o.d_max.is_some() || o.c_max.is_some() {
        let (r, d, c) = (
            o.r_max.unwrap_or(params.r_max),
            o.d_max.unwrap_or(params.d_max),
            o.c_max.unwrap_or(params.c_max),
        );
        params = params.with_ceilings(r, d, c)?;
    }
    params.validate()?;
    Ok(params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub protocol: ProtocolKind,
    pub init: InitKind,
    pub params: Params,
    pub plant_collision: bool,
}

pub fn trial_stream(seed: u64, n: usize, trial: u64) -> RngStream {
    RngStream::substream(seed, ((n as u64) << 32) | trial)
}

fn simulate<P: Adversary>(p: &P, init: InitKind, rng: &mut RngStream) -> Result<RunMetrics> {
    let config = generate_initial(p, init, rng)?;
    Ok(run(p, config, rng, options_for(p.kind()))?.metrics)
}

/// Non-silent protocols stop once correctness has held for the tail margin.
fn options_for(kind: ProtocolKind) -> RunOptions {
    RunOptions {
        record_trace: false,
        halt_on_stable_tail: !kind.is_silent(),
    }
}

pub fn run_trial(setup: &TrialSetup, seed: u64, trial: u64) -> Result<RunMetrics> {
    let mut rng = trial_stream(seed, setup.params.n, trial);
    let params = setup.params.clone();
    match setup.protocol {
        ProtocolKind::Cai => simulate(&Cai::new(params)?, setup.init, &mut rng),
        ProtocolKind::LinearTime => {
            let p = LinearTime::new(params)?;
            let mut config = generate_initial(&p, setup.init, &mut rng)?;
            if setup.plant_collision {
                plant_name_collision(&mut config, &setup.params, &mut rng)?;
            }
            Ok(run(&p, config, &mut rng, options_for(ProtocolKind::LinearTime))?.metrics)
        }
        ProtocolKind::LinearState => simulate(&LinearState::new(params)?, setup.init, &mut rng),
        ProtocolKind::LogTime => simulate(&LogTime::new(params)?, setup.init, &mut rng),
        ProtocolKind::Obs => simulate(&Obs::new(params)?, setup.init, &mut rng),
    }
}

/// Interaction at which the protocol counts as stabilized: silence for silent
/// protocols, hindsight convergence otherwise.
pub fn stabilization(kind: ProtocolKind, m: &RunMetrics) -> Option<u64> {
    if kind.is_silent() {
        m.silence_interaction
    } else {
        m.convergence_interaction
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub protocol: ProtocolKind,
    pub init: InitKind,
    pub n: usize,
    pub seed: u64,
    pub trial: u64,
    pub metrics: RunMetrics,
}

impl TrialRow {
    pub fn record(&self) -> Record {
        let m = &self.metrics;
        vec![
            ("protocol", Field::Text(self.protocol.tag().into())),
            ("n", Field::Int(self.n as u64)),
            ("init", Field::Text(self.init.tag().into())),
            ("seed", Field::Int(self.seed)),
            ("trial", Field::Int(self.trial)),
            ("interactions", Field::Int(m.interactions)),
            ("parallel_time", Field::Time(m.parallel_time)),
            ("silence_interaction", Field::MaybeInt(m.silence_interaction)),
            ("convergence_interaction", Field::MaybeInt(m.convergence_interaction)),
            ("timed_out", Field::Flag(m.timed_out)),
            ("reset_triggers", Field::Int(m.reset_triggers)),
        ]
    }

    /// Stabilization in parallel time, if reached.
    pub fn stabilization_time(&self) -> Option<f64> {
        stabilization(self.protocol, &self.metrics).map(|t| t as f64 / self.n as f64)
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Spec(format!("cannot start worker pool: {e}")))
}

/// Runs every `(n, trial)` pair on the pool; rows come back ordered by
/// `(n, trial)`.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<TrialRow>> {
    let protocol = spec.protocol.ok_or_else(|| CliError::Spec("--protocol is required".into()))?;
    let init = spec.init.ok_or_else(|| CliError::Spec("--init is required".into()))?;
    let setups = spec
        .ns
        .iter()
        .map(|&n| {
            Ok(TrialSetup {
                protocol,
                init,
                params: spec.params(n)?,
                plant_collision: spec.plant_collision,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, u64)> = (0..setups.len())
        .flat_map(|i| (0..spec.trials).map(move |t| (i, t)))
        .collect();
    pool(spec.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(i, trial)| {
                let setup = &setups[i];
                Ok(TrialRow {
                    protocol,
                    init,
                    n: setup.params.n,
                    seed: spec.seed,
                    trial,
                    metrics: run_trial(setup, spec.seed, trial)?,
                })
            })
            .collect()
    })
}

/// Mean stabilization parallel time per `n`, over the trials that stabilized.
pub fn per_n_means(rows: &[TrialRow]) -> Vec<(usize, f64, usize)> {
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    for row in rows {
        if out.last().map(|e| e.0) != Some(row.n) {
            out.push((row.n, 0.0, 0));
        }
        if let Some(t) = row.stabilization_time() {
            let e = out.last_mut().unwrap();
            e.1 += t;
            e.2 += 1;
        }
    }
    out.into_iter()
        .map(|(n, sum, k)| (n, if k > 0 { sum / k as f64 } else { f64::NAN }, k))
        .collect()
}

pub fn sweep_fit(rows: &[TrialRow]) -> Result<ScalingFit> {
    let means = per_n_means(rows);
    if let Some(&(n, _, _)) = means.iter().find(|e| e.2 == 0) {
        return Err(CliError::Sim(popsim::SimError::Domain(format!("no trial stabilized at n = {n}"))));
    }
    let points: Vec<(f64, f64)> = means.iter().map(|&(n, m, _)| (n as f64, m)).collect();
    Ok(fit_loglog(&points)?)
}

fn fit_record(spec: &ExperimentSpec, fit: &ScalingFit, points: usize) -> Record {
    let protocol = spec.protocol.unwrap_or(ProtocolKind::Cai);
    let metric = if protocol.is_silent() { "silence_parallel_time" } else { "convergence_parallel_time" };
    vec![
        ("protocol", Field::Text(protocol.tag().into())),
        ("init", Field::Text(spec.init.map(|k| k.tag()).unwrap_or("").into())),
        ("metric", Field::Text(metric.into())),
        ("points", Field::Int(points as u64)),
        ("slope", Field::Real(fit.slope)),
        ("intercept", Field::Real(fit.intercept)),
        ("r_squared", Field::Real(fit.r_squared)),
        ("trials", Field::Int(spec.trials)),
    ]
}

/// Where the sweep summary goes: next to the rows as `<stem>.fit.<ext>`.
pub fn fit_path(out: &std::path::Path, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.fit.{format}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub process: Process,
    pub n: usize,
    pub seed: u64,
    pub trial: u64,
    pub interactions: u64,
}

impl BaselineRow {
    pub fn record(&self) -> Record {
        vec![
            ("process", Field::Text(self.process.tag().into())),
            ("n", Field::Int(self.n as u64)),
            ("seed", Field::Int(self.seed)),
            ("trial", Field::Int(self.trial)),
            ("interactions", Field::Int(self.interactions)),
            ("parallel_time", Field::Time(self.interactions as f64 / self.n as f64)),
        ]
    }
}

pub fn run_baseline(spec: &ExperimentSpec) -> Result<Vec<BaselineRow>> {
    let processes = if spec.processes.is_empty() { Process::ALL.to_vec() } else { spec.processes.clone() };
    let tasks: Vec<(Process, usize, u64)> = processes
        .iter()
        .flat_map(|&p| spec.ns.iter().flat_map(move |&n| (0..spec.trials).map(move |t| (p, n, t))))
        .collect();
    pool(spec.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(process, n, trial)| {
                // the top bits keep the two processes on disjoint streams
                let index = ((process as u64) << 62) | ((n as u64) << 32) | trial;
                let mut rng = RngStream::substream(spec.seed, index);
                let interactions = match process {
                    Process::Epidemic => epidemic_trial(n, &mut rng)?,
                    Process::RollCall => roll_call_trial(n, &mut rng)?,
                };
                Ok(BaselineRow {
                    process,
                    n,
                    seed: spec.seed,
                    trial,
                    interactions,
                })
            })
            .collect()
    })
}

fn verify_with<P: Enumerable>(p: &P, budget: u128) -> Result<VerificationReport> {
    let graph = build_config_graph(p, budget)?;
    Ok(verify_self_stabilizing(&graph))
}

pub fn run_verify(spec: &ExperimentSpec) -> Result<VerificationReport> {
    let protocol = spec.protocol.ok_or_else(|| CliError::Spec("--protocol is required".into()))?;
    let params = spec.params(spec.ns[0])?;
    match protocol {
        ProtocolKind::Cai => verify_with(&Cai::new(params)?, spec.budget),
        ProtocolKind::LinearTime => verify_with(&LinearTime::new(params)?, spec.budget),
        ProtocolKind::LinearState => verify_with(&LinearState::new(params)?, spec.budget),
        ProtocolKind::Obs => verify_with(&Obs::new(params)?, spec.budget),
        ProtocolKind::LogTime => Err(CliError::Sim(popsim::SimError::Unsupported {
            protocol,
            op: "verify (unbounded state set)",
        })),
    }
}

/// Runs the experiment and writes its output. A sweep summary goes to
/// `<stem>.fit.<ext>` beside `--out`, or to stderr without one.
pub fn execute(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    let out = spec.out.as_deref();
    match spec.command {
        Command::Run => {
            let rows: Vec<Record> = run_trials(spec)?.iter().map(TrialRow::record).collect();
            write_rows(&RUN_HEADER, &rows, spec.format, out)
        }
        Command::Sweep => {
            let trials = run_trials(spec)?;
            let rows: Vec<Record> = trials.iter().map(TrialRow::record).collect();
            write_rows(&RUN_HEADER, &rows, spec.format, out)?;
            let fit = sweep_fit(&trials)?;
            let summary = render(&FIT_HEADER, &[fit_record(spec, &fit, spec.ns.len())], spec.format)?;
            match out {
                Some(path) => crate::output::emit(&summary, Some(&fit_path(path, spec.format))),
                None => {
                    eprint!("{}", String::from_utf8_lossy(&summary));
                    Ok(())
                }
            }
        }
        Command::Baseline => {
            let rows: Vec<Record> = run_baseline(spec)?.iter().map(BaselineRow::record).collect();
            write_rows(&BASELINE_HEADER, &rows, spec.format, out)
        }
        Command::Verify => {
            let report = run_verify(spec)?;
            let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Encode(e.to_string()))?;
            text.push('\n');
            crate::output::emit(text.as_bytes(), out)
        }
    }
}

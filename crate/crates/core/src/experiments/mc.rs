//! Chunked, trial-parallel Monte Carlo over either computation path.
//!
//! Trials are grouped in chunks of [`CHUNK_TRIALS`]; chunk `c` of a run draws
//! from `RngStream::new(seed, base + c)`. The output therefore depends on the
//! seed only, never on the number of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{EmpiricalDistribution, RunningMoments};
use crate::adaptive::{DirectDraw, DirectSimulator, ScenarioParams, SignalModel, Training};
use crate::error::{Error, Result};
use crate::randvar::RngStream;
use crate::represent::{RepSampler, TtildeVariant};

pub const CHUNK_TRIALS: usize = 1024;

const DIRECT_STREAM_BASE: u64 = 0;
const REP_STREAM_BASE: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Direct,
    Rep,
    Both,
}

impl FromStr for Path {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Path::Direct),
            "rep" | "representation" => Ok(Path::Rep),
            "both" => Ok(Path::Both),
            _ => Err(Error::invalid(format!(
                "unknown path '{s}', expected direct, rep or both"
            ))),
        }
    }
}

impl Path {
    pub fn runs_direct(self) -> bool {
        matches!(self, Path::Direct | Path::Both)
    }

    pub fn runs_rep(self) -> bool {
        matches!(self, Path::Rep | Path::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Rho,
    Beta,
    TTilde,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Rho => "rho",
            Statistic::Beta => "beta",
            Statistic::TTilde => "t_tilde",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One Monte Carlo run: a scenario, a training law, a statistic, a path.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: ScenarioParams,
    pub training: Training,
    pub statistic: Statistic,
    pub trials: usize,
    pub seed: u64,
    pub path: Path,
    pub variant: TtildeVariant,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Covariance and signature of the direct path; `None` is `Σ = I`, `v = e_N`.
    pub model: Option<SignalModel>,
}

impl RunConfig {
    pub fn new(scenario: ScenarioParams, training: Training, statistic: Statistic, trials: usize, seed: u64) -> Self {
        Self {
            scenario,
            training,
            statistic,
            trials,
            seed,
            path: Path::Rep,
            variant: TtildeVariant::default(),
            workers: None,
            model: None,
        }
    }

    pub fn with_path(mut self, path: Path) -> Self {
        self.path = path;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_variant(mut self, variant: TtildeVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_model(mut self, model: SignalModel) -> Self {
        self.model = Some(model);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be >= 1"));
        }
        Ok(())
    }
}

/// Sorted samples from one or both paths.
#[derive(Clone, Debug, Default)]
pub struct McOutput {
    pub direct: Option<EmpiricalDistribution>,
    pub rep: Option<EmpiricalDistribution>,
}

impl McOutput {
    /// The representation sample when present, else the direct one.
    pub fn primary(&self) -> &EmpiricalDistribution {
        self.rep
            .as_ref()
            .or(self.direct.as_ref())
            .expect("at least one path ran")
    }
}

/// Exceedance probability estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub standard_error: f64,
}

impl Proportion {
    fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            hits,
            trials,
            estimate: p,
            standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

type TrialFn = Box<dyn Fn(&mut RngStream) -> Result<f64> + Send + Sync>;

fn direct_trial(config: &RunConfig) -> Result<TrialFn> {
    let model = match &config.model {
        Some(m) => m.clone(),
        None => SignalModel::canonical(config.scenario.n as usize),
    };
    let sim = DirectSimulator::new(&config.scenario, &model, config.training)?;
    let hyp = config.scenario.hypothesis();
    let stat = config.statistic;
    Ok(Box::new(move |s: &mut RngStream| {
        let d = sim.trial(hyp, s)?;
        Ok(match stat {
            Statistic::Rho => d.rho,
            Statistic::Beta => d.beta,
            Statistic::TTilde => d.t_tilde,
        })
    }))
}

fn rep_trial(config: &RunConfig) -> Result<TrialFn> {
    let p = &config.scenario;
    let rep = match config.training {
        Training::Gaussian => RepSampler::gaussian(p.n, p.k, p.snr_bar)?,
        Training::Student => RepSampler::student(p.n, p.k, p.nu, p.mu, p.snr_bar, config.variant)?,
    };
    Ok(match (config.training, config.statistic) {
        (Training::Gaussian, Statistic::Rho) => Box::new(move |s: &mut RngStream| Ok(rep.rho_gaussian(s).value)),
        (Training::Gaussian, Statistic::Beta) => Box::new(move |s: &mut RngStream| Ok(rep.beta_gaussian(s).value)),
        (Training::Gaussian, Statistic::TTilde) => Box::new(move |s: &mut RngStream| Ok(rep.ttilde_gaussian(s).value)),
        (Training::Student, Statistic::Rho) => Box::new(move |s: &mut RngStream| Ok(rep.rho_student(s)?.value)),
        (Training::Student, Statistic::Beta) => Box::new(move |s: &mut RngStream| Ok(rep.beta_student(s)?.value)),
        (Training::Student, Statistic::TTilde) => Box::new(move |s: &mut RngStream| Ok(rep.ttilde_student(s)?.value)),
    })
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `trials` calls of `trial` in chunks and folds each chunk with
/// `fold`, returning the per-chunk accumulators in chunk order.
fn run_chunks<T, A: Send>(
    trials: usize,
    seed: u64,
    stream_base: u64,
    workers: Option<usize>,
    trial: &(dyn Fn(&mut RngStream) -> Result<T> + Sync),
    init: impl Fn() -> A + Sync + Send,
    fold: impl Fn(&mut A, T) + Sync + Send,
) -> Result<Vec<A>> {
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    with_pool(workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut stream = RngStream::new(seed, stream_base + c as u64);
                let start = c * CHUNK_TRIALS;
                let count = CHUNK_TRIALS.min(trials - start);
                let mut acc = init();
                for i in 0..count {
                    let v = trial(&mut stream).map_err(|e| Error::Trial {
                        index: start + i,
                        source: Box::new(e),
                    })?;
                    fold(&mut acc, v);
                }
                Ok(acc)
            })
            .collect::<Result<Vec<A>>>()
    })?
}

fn paths(config: &RunConfig) -> Result<Vec<(Path, TrialFn, u64)>> {
    let mut out = Vec::new();
    if config.path.runs_direct() {
        out.push((Path::Direct, direct_trial(config)?, DIRECT_STREAM_BASE));
    }
    if config.path.runs_rep() {
        out.push((Path::Rep, rep_trial(config)?, REP_STREAM_BASE));
    }
    Ok(out)
}

/// Draws `config.trials` samples of the statistic on the requested path(s).
pub fn run_monte_carlo(config: &RunConfig) -> Result<McOutput> {
    config.validate()?;
    let mut out = McOutput::default();
    for (path, trial, base) in paths(config)? {
        let chunks = run_chunks(
            config.trials,
            config.seed,
            base,
            config.workers,
            &trial,
            || Vec::with_capacity(CHUNK_TRIALS),
            |v: &mut Vec<f64>, x| v.push(x),
        )?;
        let dist = EmpiricalDistribution::new(chunks.concat());
        match path {
            Path::Direct => out.direct = Some(dist),
            _ => out.rep = Some(dist),
        }
    }
    Ok(out)
}

/// Runs an arbitrary per-trial closure with the chunked substream layout of
/// the engine, starting at substream `stream_base`. Results are in trial order.
pub fn collect_trials<T: Send>(
    trials: usize,
    seed: u64,
    stream_base: u64,
    workers: Option<usize>,
    trial: &(dyn Fn(&mut RngStream) -> Result<T> + Sync),
) -> Result<Vec<T>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let chunks = run_chunks(
        trials,
        seed,
        stream_base,
        workers,
        trial,
        || Vec::with_capacity(CHUNK_TRIALS),
        |v: &mut Vec<T>, x| v.push(x),
    )?;
    Ok(chunks.into_iter().flatten().collect())
}

/// All three statistics of each direct-path trial, in trial order. The draws
/// coincide with those behind [`run_monte_carlo`] on the direct path.
pub fn run_direct_draws(config: &RunConfig) -> Result<Vec<DirectDraw>> {
    config.validate()?;
    let model = match &config.model {
        Some(m) => m.clone(),
        None => SignalModel::canonical(config.scenario.n as usize),
    };
    let sim = DirectSimulator::new(&config.scenario, &model, config.training)?;
    let hyp = config.scenario.hypothesis();
    collect_trials(config.trials, config.seed, DIRECT_STREAM_BASE, config.workers, &|s| {
        sim.trial(hyp, s)
    })
}

/// `P(statistic > threshold)` without storing samples. Returns
/// `(direct, rep)` estimates for the requested paths.
pub fn exceedance_probability(config: &RunConfig, threshold: f64) -> Result<(Option<Proportion>, Option<Proportion>)> {
    config.validate()?;
    let mut out = (None, None);
    for (path, trial, base) in paths(config)? {
        let hits: u64 = run_chunks(
            config.trials,
            config.seed,
            base,
            config.workers,
            &trial,
            || 0u64,
            |h: &mut u64, x| *h += u64::from(x > threshold),
        )?
        .into_iter()
        .sum();
        let p = Proportion::new(hits, config.trials as u64);
        match path {
            Path::Direct => out.0 = Some(p),
            _ => out.1 = Some(p),
        }
    }
    Ok(out)
}

/// Streaming mean and variance of the statistic. Returns `(direct, rep)`.
pub fn mean_statistic(config: &RunConfig) -> Result<(Option<RunningMoments>, Option<RunningMoments>)> {
    config.validate()?;
    let mut out = (None, None);
    for (path, trial, base) in paths(config)? {
        let chunks = run_chunks(
            config.trials,
            config.seed,
            base,
            config.workers,
            &trial,
            RunningMoments::default,
            |m: &mut RunningMoments, x| m.push(x),
        )?;
        let mut total = RunningMoments::default();
        chunks.iter().for_each(|c| total.merge(c));
        match path {
            Path::Direct => out.0 = Some(total),
            _ => out.1 = Some(total),
        }
    }
    Ok(out)
}

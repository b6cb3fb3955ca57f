//! Data generators for the distribution, mean, sample-support and false-alarm
//! figures. Each returns a [`Table`]; rendering is left to the consumer.

use std::str::FromStr;

use serde::Serialize;

use super::mc::{exceedance_probability, mean_statistic, run_monte_carlo, Path, RunConfig, Statistic};
use super::output::{Cell, Table};
use super::stats::EmpiricalDistribution;
use crate::adaptive::{ScenarioParams, Training};
use crate::analytic::{
    gaussian_pfa_threshold, mean_rho_gaussian, mean_rho_student, pdf_beta_gaussian, pdf_rho_student,
};
use crate::error::{Error, Result};
use crate::represent::TtildeVariant;

pub const DEFAULT_SEED: u64 = 20_160_601;
pub const DEFAULT_K_CAP: u32 = 4096;

/// Choice of the training scale `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MuRule {
    /// `μ = ν - N`
    Matched,
    Fixed(f64),
}

impl FromStr for MuRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("nu-n") {
            return Ok(MuRule::Matched);
        }
        match t.parse::<f64>() {
            Ok(mu) if mu > 0.0 && mu.is_finite() => Ok(MuRule::Fixed(mu)),
            _ => Err(Error::invalid(format!(
                "mu must be a positive number or 'nu-N', got '{s}'"
            ))),
        }
    }
}

impl MuRule {
    pub fn mu(self, n: u32, nu: u32) -> f64 {
        match self {
            MuRule::Matched => f64::from(nu) - f64::from(n),
            MuRule::Fixed(mu) => mu,
        }
    }
}

/// Grid and Monte Carlo settings shared by the generators.
#[derive(Clone, Debug)]
pub struct FigureConfig {
    pub n: u32,
    pub ks: Vec<u32>,
    pub nus: Vec<u32>,
    pub mu: MuRule,
    pub snr_bar: f64,
    pub trials: usize,
    pub seed: u64,
    pub path: Path,
    pub variant: TtildeVariant,
    pub workers: Option<usize>,
    /// Histogram bins on the statistic axis.
    pub bins: usize,
    /// Gaussian-case false-alarm target that fixes the threshold.
    pub pfa: f64,
    pub k_cap: u32,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            n: 16,
            ks: vec![24, 32, 48, 64],
            nus: vec![18, 32, 160],
            mu: MuRule::Matched,
            snr_bar: 0.0,
            trials: 1_000_000,
            seed: DEFAULT_SEED,
            path: Path::Rep,
            variant: TtildeVariant::default(),
            workers: None,
            bins: 200,
            pfa: 1e-3,
            k_cap: DEFAULT_K_CAP,
        }
    }
}

impl FigureConfig {
    /// Default grid for the mean-versus-K figure: `K = N, N+4, ..., 8N`.
    pub fn mean_vs_k_grid(n: u32) -> Vec<u32> {
        (n..=8 * n).step_by(4).collect()
    }

    /// Default ν grid for the false-alarm figure.
    pub fn pfa_nu_grid(n: u32) -> Vec<u32> {
        vec![n + 2, n + 8, 2 * n, 3 * n, 4 * n, 6 * n, 8 * n, 10 * n, 12 * n]
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::invalid("K grid is empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.bins == 0 {
            return Err(Error::invalid("bins must be >= 1"));
        }
        for grid in [&self.ks, &self.nus] {
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("grids must be sorted and free of duplicates"));
            }
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::invalid(format!(
                "target Pfa must lie in (0, 1), got {}",
                self.pfa
            )));
        }
        Ok(())
    }

    fn scenario(&self, k: u32, nu: u32, snr_bar: f64) -> Result<ScenarioParams> {
        ScenarioParams::new(self.n, k, nu, self.mu.mu(self.n, nu), snr_bar)
    }

    /// Scenario for Gaussian-training runs; ν and μ are placeholders.
    fn gaussian_scenario(&self, k: u32, snr_bar: f64) -> Result<ScenarioParams> {
        ScenarioParams::new(self.n, k, self.n + 1, 1.0, snr_bar)
    }

    fn run(&self, scenario: ScenarioParams, training: Training, statistic: Statistic, trials: usize) -> RunConfig {
        let mut c = RunConfig::new(scenario, training, statistic, trials, self.seed)
            .with_path(self.path)
            .with_variant(self.variant);
        c.workers = self.workers;
        c
    }
}

fn label(k: u32, nu: Option<u32>) -> String {
    match nu {
        Some(nu) => format!("K{k}_nu{nu}"),
        None => format!("K{k}_gaussian"),
    }
}

/// Pairs each sample set with its column suffix.
fn by_path(out: super::mc::McOutput, path: Path) -> Vec<(String, EmpiricalDistribution)> {
    let suffix = |s: &str| {
        if path == Path::Both {
            format!("_{s}")
        } else {
            String::new()
        }
    };
    let mut v = Vec::new();
    if let Some(d) = out.direct {
        v.push((suffix("direct"), d));
    }
    if let Some(r) = out.rep {
        v.push((suffix("rep"), r));
    }
    v
}

/// Density estimate on bins of width `h` centred at `i·h`.
fn centred_histogram(d: &EmpiricalDistribution, h: f64, points: usize) -> Vec<f64> {
    let mut counts = vec![0u64; points];
    for &x in d.samples() {
        let i = (x / h).round();
        if i >= 0.0 && (i as usize) < points {
            counts[i as usize] += 1;
        }
    }
    let norm = d.count() as f64 * h;
    counts.into_iter().map(|c| c as f64 / norm).collect()
}

struct Curve {
    name: String,
    cdf: Vec<f64>,
    cdf_se: Vec<f64>,
    hist: Vec<f64>,
}

type Overlay = Box<dyn Fn(f64) -> Result<f64>>;

fn distribution_figure(cfg: &FigureConfig, statistic: Statistic) -> Result<Table> {
    cfg.validate()?;
    let snr = if statistic == Statistic::TTilde {
        cfg.snr_bar
    } else {
        0.0
    };
    let mut runs: Vec<(String, Training, ScenarioParams, Option<Overlay>)> = Vec::new();
    for &k in &cfg.ks {
        for &nu in &cfg.nus {
            let sc = cfg.scenario(k, nu, snr)?;
            let overlay: Option<Overlay> = match statistic {
                Statistic::Rho => Some(Box::new(move |x| pdf_rho_student(x, sc.n, k, nu))),
                _ => None,
            };
            runs.push((label(k, Some(nu)), Training::Student, sc, overlay));
        }
        let sc = cfg.gaussian_scenario(k, snr)?;
        let dof = f64::from(k - cfg.n + 1);
        let overlay: Option<Overlay> = match statistic {
            Statistic::Rho => Some(Box::new(move |x| pdf_beta_gaussian(x, sc.n, k))),
            Statistic::Beta => Some(Box::new(move |x| pdf_beta_gaussian(x, sc.n, k))),
            // Under H0 the Gaussian t̃ is Cχ²₁/Cχ²_{K-N+1}.
            Statistic::TTilde if snr == 0.0 => Some(Box::new(move |x: f64| Ok(dof * (1.0 + x).powf(-(dof + 1.0))))),
            Statistic::TTilde => None,
        };
        runs.push((label(k, None), Training::Gaussian, sc, overlay));
    }

    let mut samples = Vec::new();
    for (name, training, sc, overlay) in runs {
        let out = run_monte_carlo(&cfg.run(sc, training, statistic, cfg.trials))?;
        samples.push((name, by_path(out, cfg.path), overlay));
    }

    let upper = match statistic {
        Statistic::TTilde => samples
            .iter()
            .flat_map(|(_, d, _)| d.iter().map(|(_, e)| e.quantile(0.999)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max),
        _ => 1.0,
    };
    let h = upper / cfg.bins as f64;
    let points = cfg.bins + 1;
    let grid: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();

    let mut curves = Vec::new();
    let mut overlays = Vec::new();
    for (name, dists, overlay) in samples {
        for (suffix, d) in dists {
            curves.push(Curve {
                name: format!("{name}{suffix}"),
                cdf: grid.iter().map(|&x| d.cdf(x)).collect(),
                cdf_se: grid.iter().map(|&x| d.cdf_standard_error(x)).collect(),
                hist: centred_histogram(&d, h, points),
            });
        }
        if let Some(f) = overlay {
            let values = grid
                .iter()
                .map(|&x| {
                    if x > 0.0 && x < 1.0 || statistic == Statistic::TTilde {
                        f(x)
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            overlays.push((name, values));
        }
    }

    let mut header = vec![statistic.name().to_owned()];
    for c in &curves {
        header.push(format!("cdf_{}", c.name));
        header.push(format!("cdf_se_{}", c.name));
        header.push(format!("pdf_hist_{}", c.name));
    }
    for (name, _) in &overlays {
        header.push(format!("pdf_analytic_{name}"));
    }
    let mut table = Table::new(header);
    for (i, &x) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(x)];
        for c in &curves {
            row.extend([c.cdf[i].into(), c.cdf_se[i].into(), c.hist[i].into()]);
        }
        row.extend(overlays.iter().map(|(_, v)| Cell::Num(v[i])));
        table.push(row)?;
    }
    Ok(table)
}

/// CDF and density of the SNR loss `ρ` per `(K, ν)` plus the Gaussian reference per K.
pub fn generate_fig_snrloss(cfg: &FigureConfig) -> Result<Table> {
    distribution_figure(cfg, Statistic::Rho)
}

/// CDF and density of the loss factor `β`.
pub fn generate_fig_beta(cfg: &FigureConfig) -> Result<Table> {
    distribution_figure(cfg, Statistic::Beta)
}

/// CDF and density of Kelly's statistic `t̃` at `cfg.snr_bar`.
pub fn generate_fig_ttilde(cfg: &FigureConfig) -> Result<Table> {
    distribution_figure(cfg, Statistic::TTilde)
}

/// `E[ρ]` versus K: closed form, Monte Carlo with its standard error, and the
/// Gaussian value `(K-N+2)/(K+1)`.
pub fn generate_fig_mean_vs_k(cfg: &FigureConfig) -> Result<Table> {
    cfg.validate()?;
    let paths: Vec<(Path, &str)> = match cfg.path {
        Path::Both => vec![(Path::Direct, "_direct"), (Path::Rep, "_rep")],
        p => vec![(p, "")],
    };
    let mut header = vec!["K".to_owned()];
    for &nu in &cfg.nus {
        header.push(format!("analytic_nu{nu}"));
        for (_, s) in &paths {
            header.push(format!("mc_nu{nu}{s}"));
            header.push(format!("mc_se_nu{nu}{s}"));
        }
    }
    header.push("gaussian".into());
    let mut table = Table::new(header);
    for &k in &cfg.ks {
        let mut row = vec![Cell::from(k)];
        for &nu in &cfg.nus {
            row.push(mean_rho_student(cfg.n, k, nu)?.into());
            let mut run = cfg.run(cfg.scenario(k, nu, 0.0)?, Training::Student, Statistic::Rho, cfg.trials);
            run.path = cfg.path;
            let (d, r) = mean_statistic(&run)?;
            for m in [d, r].into_iter().flatten() {
                row.extend([m.mean.into(), m.standard_error().into()]);
            }
        }
        row.push(mean_rho_gaussian(cfg.n, k)?.into());
        table.push(row)?;
    }
    Ok(table)
}

/// Smallest `K >= N` whose mean SNR loss exceeds one half. `nu = None`
/// selects Gaussian training.
pub fn find_k_for_half_loss(n: u32, nu: Option<u32>, cap: u32) -> Result<u32> {
    if cap < n {
        return Err(Error::invalid(format!("K cap {cap} is below N={n}")));
    }
    let mean = |k: u32| match nu {
        Some(nu) => mean_rho_student(n, k, nu),
        None => mean_rho_gaussian(n, k),
    };
    let reaches = |k: u32| mean(k).map(|m| m > 0.5);
    if reaches(n)? {
        return Ok(n);
    }
    // Invariant: mean(lo) <= 0.5 < mean(hi).
    let mut lo = n;
    let mut step = 1u32;
    let mut hi = loop {
        let k = lo.saturating_add(step).min(cap);
        if reaches(k)? {
            break k;
        }
        if k == cap {
            return Err(Error::NotFound { cap });
        }
        lo = k;
        step = step.saturating_mul(2);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Required K per ν, with a Gaussian row.
pub fn generate_fig_find_k(cfg: &FigureConfig) -> Result<Table> {
    let mut table = Table::new(["nu", "K", "mean_at_K", "mean_at_K_minus_1"]);
    let rows = std::iter::once(None).chain(cfg.nus.iter().copied().map(Some));
    for nu in rows {
        let k = find_k_for_half_loss(cfg.n, nu, cfg.k_cap)?;
        let mean = |k: u32| match nu {
            Some(nu) => mean_rho_student(cfg.n, k, nu),
            None => mean_rho_gaussian(cfg.n, k),
        };
        let prev = if k > cfg.n { mean(k - 1)? } else { f64::NAN };
        let name = nu.map_or(Cell::from("gaussian"), Cell::from);
        table.push(vec![name, k.into(), mean(k)?.into(), prev.into()])?;
    }
    Ok(table)
}

/// False-alarm probability of `t̃` under Student training versus ν, with the
/// threshold set for `cfg.pfa` under Gaussian training. A Gaussian-training
/// Monte Carlo at the same threshold is included per K.
pub fn generate_fig_pfa(cfg: &FigureConfig) -> Result<Table> {
    cfg.validate()?;
    if cfg.nus.is_empty() {
        return Err(Error::invalid("nu grid is empty"));
    }
    let suffixes: Vec<&str> = match cfg.path {
        Path::Both => vec!["_direct", "_rep"],
        _ => vec![""],
    };
    let mut header = vec!["nu".to_owned()];
    let mut gaussian = Vec::new();
    for &k in &cfg.ks {
        let eta = gaussian_pfa_threshold(cfg.pfa, cfg.n, k)?;
        header.push(format!("eta_K{k}"));
        for s in &suffixes {
            header.push(format!("pfa_K{k}{s}"));
            header.push(format!("pfa_se_K{k}{s}"));
        }
        header.push(format!("gaussian_pfa_K{k}"));
        header.push(format!("gaussian_pfa_se_K{k}"));
        let run = cfg.run(
            cfg.gaussian_scenario(k, 0.0)?,
            Training::Gaussian,
            Statistic::TTilde,
            cfg.trials,
        );
        let run = RunConfig { path: Path::Rep, ..run };
        let (_, g) = exceedance_probability(&run, eta)?;
        gaussian.push((eta, g.expect("representation path ran")));
    }
    let mut table = Table::new(header);
    for &nu in &cfg.nus {
        let mut row = vec![Cell::from(nu)];
        for (&k, (eta, g)) in cfg.ks.iter().zip(&gaussian) {
            row.push((*eta).into());
            let run = cfg.run(
                cfg.scenario(k, nu, 0.0)?,
                Training::Student,
                Statistic::TTilde,
                cfg.trials,
            );
            let (d, r) = exceedance_probability(&run, *eta)?;
            for p in [d, r].into_iter().flatten() {
                row.extend([p.estimate.into(), p.standard_error.into()]);
            }
            row.extend([g.estimate.into(), g.standard_error.into()]);
        }
        table.push(row)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FigureConfig {
        FigureConfig {
            ks: vec![32],
            nus: vec![32],
            trials: 200_000,
            ..Default::default()
        }
    }

    fn at(table: &Table, x_col: &str, x: f64, col: &str) -> f64 {
        let xs = table.numeric_column(x_col).unwrap();
        let i = xs.iter().position(|&v| (v - x).abs() < 1e-12).unwrap();
        table.numeric_column(col).unwrap()[i]
    }

    #[test]
    fn snrloss_figure_values_at_half() {
        let t = generate_fig_snrloss(&small()).unwrap();
        assert_eq!(t.rows.len(), 201);
        assert!((at(&t, "rho", 0.5, "cdf_K32_nu32") - 0.7464).abs() < 0.005);
        assert!((at(&t, "rho", 0.5, "cdf_K32_gaussian") - 0.2983).abs() < 0.005);
        // histogram and overlay agree in the bulk
        let hist = at(&t, "rho", 0.4, "pdf_hist_K32_nu32");
        let pdf = at(&t, "rho", 0.4, "pdf_analytic_K32_nu32");
        assert!((hist - pdf).abs() < 0.05 * pdf.max(1.0), "{hist} vs {pdf}");
    }

    #[test]
    fn both_paths_get_suffixed_columns() {
        let cfg = FigureConfig {
            trials: 5_000,
            path: Path::Both,
            bins: 20,
            ..small()
        };
        let t = generate_fig_beta(&cfg).unwrap();
        assert!(t.column("cdf_K32_nu32_direct").is_some());
        assert!(t.column("cdf_K32_nu32_rep").is_some());
        assert!(t.column("pdf_analytic_K32_gaussian").is_some());
    }

    #[test]
    fn ttilde_figure_gaussian_overlay() {
        let cfg = FigureConfig {
            nus: vec![],
            bins: 50,
            ..small()
        };
        let t = generate_fig_ttilde(&cfg).unwrap();
        let x = t.numeric_column("t_tilde").unwrap();
        let cdf = t.numeric_column("cdf_K32_gaussian").unwrap();
        for (x, c) in x.iter().zip(cdf) {
            assert!((c - (1.0 - (1.0 + x).powi(-17))).abs() < 0.005);
        }
    }

    #[test]
    fn mean_vs_k_columns() {
        let cfg = FigureConfig {
            ks: vec![24, 32, 64],
            trials: 100_000,
            ..small()
        };
        let t = generate_fig_mean_vs_k(&cfg).unwrap();
        assert!((at(&t, "K", 32.0, "gaussian") - 18.0 / 33.0).abs() < 1e-15);
        let a = t.numeric_column("analytic_nu32").unwrap();
        let m = t.numeric_column("mc_nu32").unwrap();
        for (a, m) in a.iter().zip(&m) {
            assert!((a - m).abs() < 0.003);
        }
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn find_k_values() {
        assert_eq!(find_k_for_half_loss(16, None, 4096).unwrap(), 30);
        let k = find_k_for_half_loss(16, Some(18), 4096).unwrap();
        assert!((94..=98).contains(&k), "{k}");
        assert!(mean_rho_student(16, k, 18).unwrap() >= 0.5);
        assert!(mean_rho_student(16, k - 1, 18).unwrap() < 0.5);
        assert!(matches!(
            find_k_for_half_loss(16, Some(18), 40),
            Err(Error::NotFound { cap: 40 })
        ));
    }

    #[test]
    fn pfa_figure_shape() {
        let cfg = FigureConfig {
            ks: vec![32, 64],
            nus: vec![18, 160],
            trials: 100_000,
            ..Default::default()
        };
        let t = generate_fig_pfa(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        let p32 = t.numeric_column("pfa_K32").unwrap();
        let p64 = t.numeric_column("pfa_K64").unwrap();
        assert!(p32.iter().zip(&p64).all(|(a, b)| a < b));
        assert!(p32.iter().all(|&p| p > 1e-3));
    }

    #[test]
    fn mu_rule_parsing() {
        assert_eq!("nu-N".parse::<MuRule>().unwrap(), MuRule::Matched);
        assert_eq!("2.5".parse::<MuRule>().unwrap(), MuRule::Fixed(2.5));
        assert!("-1".parse::<MuRule>().is_err());
        assert!(FigureConfig {
            ks: vec![32, 24],
            ..small()
        }
        .validate()
        .is_err());
    }
}

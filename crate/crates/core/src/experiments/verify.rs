//! Cross-validation suite: direct versus representation paths, density
//! normalizations, closed-form means, partitioned-F block laws, the
//! Gaussian false-alarm calibration and a mutation check.

use serde::Serialize;

use super::mc::{
    collect_trials, exceedance_probability, mean_statistic, run_direct_draws, run_monte_carlo, Path, RunConfig,
    Statistic,
};
use super::output::Table;
use super::stats::{ks_distance, pearson, EmpiricalDistribution};
use crate::adaptive::{ScenarioParams, Training};
use crate::analytic::{
    gaussian_pfa_threshold, integrate, integrate_half_line, mean_rho_student, pdf_beta_gaussian, pdf_f1, pdf_f2,
    pdf_f22, pdf_rho_given_f1, pdf_rho_student, pdf_t12_norm_sq,
};
use crate::error::Result;
use crate::matvar::{partition_f, schur_f, FSampler};
use crate::represent::{RepSampler, TtildeVariant};

/// Substream offset for auxiliary samplers, clear of the engine's ranges.
const AUX_STREAM_BASE: u64 = 1 << 48;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n: u32,
    pub ks: Vec<u32>,
    pub nus: Vec<u32>,
    /// SNR of the H1 comparisons.
    pub snr_bar: f64,
    /// Trials per path in the two-path comparisons.
    pub trials: usize,
    /// Draws for the Monte Carlo means.
    pub mean_trials: usize,
    /// Draws for the partitioned-F checks.
    pub block_trials: usize,
    /// Draws for the Gaussian false-alarm calibration.
    pub pfa_trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 16,
            ks: vec![24, 32, 64],
            nus: vec![18, 32, 160],
            snr_bar: 10.0,
            trials: 100_000,
            mean_trials: 1_000_000,
            block_trials: 1_000_000,
            pfa_trials: 10_000_000,
            seed: super::figures::DEFAULT_SEED,
            workers: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `measured < limit`.
    Below,
    /// Passes when `measured > limit`.
    Above,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(group: &'static str, name: impl Into<String>, measured: f64, bound: Bound, limit: f64) -> Self {
        let passed = match bound {
            Bound::Below => measured < limit,
            Bound::Above => measured > limit,
        };
        Self {
            group,
            name: name.into(),
            measured,
            bound,
            limit,
            passed,
        }
    }
}

/// Largest two-path KS distance of the `t̃` comparisons for each variant.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VariantDecision {
    pub independent_max_ks: f64,
    pub shared_max_ks: f64,
    pub chosen: TtildeVariant,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub variant: Option<VariantDecision>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["group", "check", "measured", "bound", "limit", "status"]);
        for c in &self.checks {
            let bound = match c.bound {
                Bound::Below => "<",
                Bound::Above => ">",
            };
            let status = if c.passed { "PASS" } else { "FAIL" };
            t.push(vec![
                c.group.into(),
                c.name.clone().into(),
                c.measured.into(),
                bound.into(),
                c.limit.into(),
                status.into(),
            ])
            .expect("fixed width");
        }
        if let Some(v) = &self.variant {
            let chosen = match v.chosen {
                TtildeVariant::Independent => "independent",
                TtildeVariant::Shared => "shared",
            };
            for (name, ks) in [("independent", v.independent_max_ks), ("shared", v.shared_max_ks)] {
                let status = if name == chosen { "CHOSEN" } else { "REJECTED" };
                t.push(vec![
                    "variant".into(),
                    format!("ttilde_{name}_max_ks").into(),
                    ks.into(),
                    "".into(),
                    f64::NAN.into(),
                    status.into(),
                ])
                .expect("fixed width");
            }
        }
        t
    }
}

fn dist(values: impl IntoIterator<Item = f64>) -> EmpiricalDistribution {
    values.into_iter().collect()
}

/// Direct and representation samples for one `(K, ν)` point.
pub struct TwoPathSamples {
    pub k: u32,
    pub nu: u32,
    pub direct_rho: EmpiricalDistribution,
    pub direct_beta: EmpiricalDistribution,
    pub direct_ttilde_h0: EmpiricalDistribution,
    pub direct_ttilde_h1: EmpiricalDistribution,
    pub rep_rho: EmpiricalDistribution,
    pub rep_beta: EmpiricalDistribution,
    /// Indexed by variant: `[independent, shared]`.
    pub rep_ttilde_h0: [EmpiricalDistribution; 2],
    pub rep_ttilde_h1: [EmpiricalDistribution; 2],
}

const VARIANTS: [TtildeVariant; 2] = [TtildeVariant::Independent, TtildeVariant::Shared];

pub fn two_path_samples(cfg: &VerifyConfig, k: u32, nu: u32) -> Result<TwoPathSamples> {
    let h0 = ScenarioParams::with_matched_mu(cfg.n, k, nu, 0.0)?;
    let h1 = ScenarioParams::with_matched_mu(cfg.n, k, nu, cfg.snr_bar)?;
    let run = |sc: ScenarioParams, stat: Statistic, path: Path, variant: TtildeVariant| {
        let mut c = RunConfig::new(sc, Training::Student, stat, cfg.trials, cfg.seed)
            .with_path(path)
            .with_variant(variant);
        c.workers = cfg.workers;
        c
    };
    // ρ and β do not depend on the hypothesis, so one H0 run supplies them.
    let d0 = run_direct_draws(&run(h0, Statistic::Rho, Path::Direct, TtildeVariant::default()))?;
    let d1 = run_direct_draws(&run(h1, Statistic::TTilde, Path::Direct, TtildeVariant::default()))?;
    let rep = |sc, stat, variant| -> Result<EmpiricalDistribution> {
        Ok(run_monte_carlo(&run(sc, stat, Path::Rep, variant))?
            .rep
            .expect("rep path ran"))
    };
    let variant_pair = |sc| -> Result<[EmpiricalDistribution; 2]> {
        Ok([
            rep(sc, Statistic::TTilde, VARIANTS[0])?,
            rep(sc, Statistic::TTilde, VARIANTS[1])?,
        ])
    };
    Ok(TwoPathSamples {
        k,
        nu,
        direct_rho: dist(d0.iter().map(|d| d.rho)),
        direct_beta: dist(d0.iter().map(|d| d.beta)),
        direct_ttilde_h0: dist(d0.iter().map(|d| d.t_tilde)),
        direct_ttilde_h1: dist(d1.iter().map(|d| d.t_tilde)),
        rep_rho: rep(h0, Statistic::Rho, TtildeVariant::default())?,
        rep_beta: rep(h0, Statistic::Beta, TtildeVariant::default())?,
        rep_ttilde_h0: variant_pair(h0)?,
        rep_ttilde_h1: variant_pair(h1)?,
    })
}

/// KS distances of every two-path comparison, the variant decision, and
/// per-statistic checks against `tol` for the chosen variant.
pub fn two_path_checks(cfg: &VerifyConfig, tol: f64) -> Result<(Vec<Check>, VariantDecision, Vec<TwoPathSamples>)> {
    let mut samples = Vec::new();
    for &k in &cfg.ks {
        for &nu in &cfg.nus {
            samples.push(two_path_samples(cfg, k, nu)?);
        }
    }
    let mut max_ks = [0.0f64; 2];
    for s in &samples {
        for (v, worst) in max_ks.iter_mut().enumerate() {
            let h0 = ks_distance(&s.direct_ttilde_h0, &s.rep_ttilde_h0[v])?;
            let h1 = ks_distance(&s.direct_ttilde_h1, &s.rep_ttilde_h1[v])?;
            *worst = worst.max(h0).max(h1);
        }
    }
    let chosen_idx = if max_ks[1] <= max_ks[0] { 1 } else { 0 };
    let decision = VariantDecision {
        independent_max_ks: max_ks[0],
        shared_max_ks: max_ks[1],
        chosen: VARIANTS[chosen_idx],
    };
    let mut checks = Vec::new();
    for s in &samples {
        let tag = format!("K{}_nu{}", s.k, s.nu);
        let pairs = [
            ("rho", &s.direct_rho, &s.rep_rho),
            ("beta", &s.direct_beta, &s.rep_beta),
            ("ttilde_h0", &s.direct_ttilde_h0, &s.rep_ttilde_h0[chosen_idx]),
            ("ttilde_h1", &s.direct_ttilde_h1, &s.rep_ttilde_h1[chosen_idx]),
        ];
        for (name, a, b) in pairs {
            checks.push(Check::new(
                "two_path",
                format!("ks_{name}_{tag}"),
                ks_distance(a, b)?,
                Bound::Below,
                tol,
            ));
        }
    }
    Ok((checks, decision, samples))
}

/// KS distance between the direct `t̃` under H0 and a representation that
/// omits the `(1 + 1/F22)` factor.
pub fn mutation_ks(cfg: &VerifyConfig, direct_ttilde_h0: &EmpiricalDistribution, k: u32, nu: u32) -> Result<f64> {
    let sc = ScenarioParams::with_matched_mu(cfg.n, k, nu, 0.0)?;
    let bad = RepSampler::student(sc.n, sc.k, sc.nu, sc.mu, 0.0, TtildeVariant::default())?.without_f22_inflation();
    let draws = collect_trials(cfg.trials, cfg.seed, AUX_STREAM_BASE, cfg.workers, &|s| {
        Ok(bad.ttilde_student(s)?.value)
    })?;
    ks_distance(direct_ttilde_h0, &dist(draws))
}

/// Normalization of every closed-form density used by the library.
pub fn normalization_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let unit = |f: &dyn Fn(f64) -> f64| integrate(f, 0.0, 1.0, 1e-10, 0.0).map(|q| (q.value - 1.0).abs());
    let half = |f: &dyn Fn(f64) -> f64| integrate_half_line(f, 1e-10, 0.0).map(|q| (q.value - 1.0).abs());
    let mut checks = Vec::new();
    for &k in &cfg.ks {
        for &nu in &cfg.nus {
            let err = unit(&|r| pdf_rho_student(r, n, k, nu).unwrap_or(f64::NAN))?;
            checks.push(Check::new(
                "density",
                format!("pdf_rho_student_K{k}_nu{nu}"),
                err,
                Bound::Below,
                1e-6,
            ));
        }
        let err = unit(&|r| pdf_beta_gaussian(r, n, k).unwrap_or(f64::NAN))?;
        checks.push(Check::new(
            "density",
            format!("pdf_rho_gaussian_K{k}"),
            err,
            Bound::Below,
            1e-8,
        ));
        let err = unit(&|r| pdf_rho_given_f1(r, 2.0, n, k).unwrap_or(f64::NAN))?;
        checks.push(Check::new(
            "density",
            format!("pdf_rho_given_f1_2_K{k}"),
            err,
            Bound::Below,
            1e-8,
        ));
        let err = half(&|f| pdf_f2(f, n, k).unwrap_or(f64::NAN))?;
        checks.push(Check::new("density", format!("pdf_f2_K{k}"), err, Bound::Below, 1e-8));
    }
    let (p, q, m) = BLOCK_PARAMS;
    let err = half(&|f| pdf_f22(f, p, q, m).unwrap_or(f64::NAN))?;
    checks.push(Check::new(
        "density",
        format!("pdf_f22_p{p}_q{q}_n{m}"),
        err,
        Bound::Below,
        1e-8,
    ));
    let err = half(&|u| pdf_t12_norm_sq(u, p, q, m).unwrap_or(f64::NAN))?;
    checks.push(Check::new(
        "density",
        format!("pdf_t12_p{p}_q{q}_n{m}"),
        err,
        Bound::Below,
        1e-5,
    ));
    Ok(checks)
}

/// Largest relative gap between the closed-form `p(ρ)` and the quadrature
/// of `p(ρ|F1)·p(F1)` at `ρ = i/11`, `i = 1..=10`.
pub fn marginalization_gap(n: u32, k: u32, nu: u32) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 1..=10 {
        let rho = f64::from(i) / 11.0;
        let marg = integrate_half_line(
            |f1| pdf_rho_given_f1(rho, f1, n, k).unwrap_or(f64::NAN) * pdf_f1(f1, n, k, nu).unwrap_or(f64::NAN),
            1e-11,
            0.0,
        )?
        .value;
        let closed = pdf_rho_student(rho, n, k, nu)?;
        worst = worst.max((closed - marg).abs() / marg.abs());
    }
    Ok(worst)
}

/// Closed form, quadrature and Monte Carlo of `E[ρ]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanTriple {
    pub closed_form: f64,
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
}

impl MeanTriple {
    pub fn max_gap(&self) -> f64 {
        let v = [self.closed_form, self.quadrature, self.monte_carlo];
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        hi - lo
    }
}

pub fn mean_triple(n: u32, k: u32, nu: u32, trials: usize, seed: u64, workers: Option<usize>) -> Result<MeanTriple> {
    let closed_form = mean_rho_student(n, k, nu)?;
    let quadrature = integrate(
        |r| r * pdf_rho_student(r, n, k, nu).unwrap_or(f64::NAN),
        0.0,
        1.0,
        1e-10,
        0.0,
    )?
    .value;
    let mut c = RunConfig::new(
        ScenarioParams::with_matched_mu(n, k, nu, 0.0)?,
        Training::Student,
        Statistic::Rho,
        trials,
        seed,
    );
    c.workers = workers;
    let (_, m) = mean_statistic(&c)?;
    let m = m.expect("rep path ran");
    Ok(MeanTriple {
        closed_form,
        quadrature,
        monte_carlo: m.mean,
        monte_carlo_se: m.standard_error(),
    })
}

/// `CF_p(q, n)` parameters of the block-law checks.
pub const BLOCK_PARAMS: (u32, u32, u32) = (4, 8, 16);

/// Measured block-law statistics of `CF_p(q, n)` partitioned with `r = p-1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockLaws {
    /// Correlation of `tr F1.2` and `F22`.
    pub correlation: f64,
    /// Sup-norm between the `F22` histogram and its density on `[0, 5]`.
    pub f22_sup: f64,
    /// Sup-norm between the `‖t12‖²` histogram and its density on `[0, 5]`.
    pub t12_sup: f64,
    /// KS distance of `tr F1.2` against a direct `CF_r(q-1, n)` sampler.
    pub schur_ks: f64,
}

pub fn block_laws(p: u32, q: u32, n: u32, trials: usize, seed: u64, workers: Option<usize>) -> Result<BlockLaws> {
    let pu = p as usize;
    let full = FSampler::new(pu, q, n)?;
    let draws = collect_trials(trials, seed, AUX_STREAM_BASE + (1 << 32), workers, &|s| {
        let pf = partition_f(&full.sample(s)?, pu - 1)?;
        let t12 = pf.t12()?.norm_squared();
        Ok((schur_f(&pf)?.trace(), pf.f22[(0, 0)].re, t12))
    })?;
    let reference = FSampler::new(pu - 1, q - 1, n)?;
    let reference = collect_trials(trials, seed, AUX_STREAM_BASE + (2 << 32), workers, &|s| {
        Ok(reference.sample(s)?.trace())
    })?;

    let tr: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let f22: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let sup = |d: EmpiricalDistribution, pdf: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut worst = 0.0f64;
        for (x, h) in d.histogram(0.0, 5.0, 100)? {
            worst = worst.max((h - pdf(x)?).abs());
        }
        Ok(worst)
    };
    Ok(BlockLaws {
        correlation: pearson(&tr, &f22),
        f22_sup: sup(dist(f22.iter().copied()), &|x| pdf_f22(x, p, q, n))?,
        t12_sup: sup(dist(draws.iter().map(|d| d.2)), &|x| pdf_t12_norm_sq(x, p, q, n))?,
        schur_ks: ks_distance(&dist(tr), &dist(reference))?,
    })
}

/// Monte Carlo false-alarm rate of the Gaussian `t̃` at the threshold for `pfa`.
pub fn gaussian_pfa_mc(
    n: u32,
    k: u32,
    pfa: f64,
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<(f64, f64)> {
    let eta = gaussian_pfa_threshold(pfa, n, k)?;
    let sc = ScenarioParams::new(n, k, n + 1, 1.0, 0.0)?;
    let mut c = RunConfig::new(sc, Training::Gaussian, Statistic::TTilde, trials, seed);
    c.workers = workers;
    let (_, p) = exceedance_probability(&c, eta)?;
    let p = p.expect("rep path ran");
    Ok((p.estimate, p.standard_error))
}

pub fn verify_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let (mut checks, decision, samples) = two_path_checks(cfg, 0.01)?;

    // The mutation is most visible where 1/F22 is large: smallest ν, largest K.
    if let Some(s) = samples.iter().min_by_key(|s| (s.nu, std::cmp::Reverse(s.k))) {
        let ks = mutation_ks(cfg, &s.direct_ttilde_h0, s.k, s.nu)?;
        checks.push(Check::new(
            "mutation",
            format!("ks_without_f22_factor_K{}_nu{}", s.k, s.nu),
            ks,
            Bound::Above,
            0.05,
        ));
    }
    drop(samples);

    checks.extend(normalization_checks(cfg)?);
    if let (Some(&k), Some(&nu)) = (cfg.ks.first(), cfg.nus.first()) {
        let gap = marginalization_gap(cfg.n, k, nu)?;
        checks.push(Check::new(
            "density",
            format!("rho_marginalization_K{k}_nu{nu}"),
            gap,
            Bound::Below,
            1e-6,
        ));
    }

    for &k in &cfg.ks {
        for &nu in &cfg.nus {
            let m = mean_triple(cfg.n, k, nu, cfg.mean_trials, cfg.seed, cfg.workers)?;
            checks.push(Check::new(
                "mean",
                format!("three_way_K{k}_nu{nu}"),
                m.max_gap(),
                Bound::Below,
                0.003,
            ));
        }
    }

    let (p, q, n) = BLOCK_PARAMS;
    let b = block_laws(p, q, n, cfg.block_trials, cfg.seed, cfg.workers)?;
    let tag = format!("p{p}_q{q}_n{n}");
    checks.push(Check::new(
        "block",
        format!("corr_schur_f22_{tag}"),
        b.correlation.abs(),
        Bound::Below,
        0.01,
    ));
    checks.push(Check::new(
        "block",
        format!("f22_density_sup_{tag}"),
        b.f22_sup,
        Bound::Below,
        0.05,
    ));
    checks.push(Check::new(
        "block",
        format!("t12_density_sup_{tag}"),
        b.t12_sup,
        Bound::Below,
        0.05,
    ));
    checks.push(Check::new(
        "block",
        format!("ks_schur_trace_{tag}"),
        b.schur_ks,
        Bound::Below,
        0.015,
    ));

    for &k in &cfg.ks {
        let (pfa, _) = gaussian_pfa_mc(cfg.n, k, 1e-3, cfg.pfa_trials, cfg.seed, cfg.workers)?;
        checks.push(Check::new(
            "pfa",
            format!("gaussian_pfa_rel_err_K{k}"),
            (pfa / 1e-3 - 1.0).abs(),
            Bound::Below,
            0.1,
        ));
    }

    Ok(VerifyReport {
        checks,
        variant: Some(decision),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Cell;

    fn small() -> VerifyConfig {
        VerifyConfig {
            ks: vec![32],
            nus: vec![18],
            trials: 100_000,
            mean_trials: 200_000,
            block_trials: 100_000,
            pfa_trials: 1_000_000,
            ..Default::default()
        }
    }

    #[test]
    fn small_suite_passes_reports_variant_and_detects_mutation() {
        let r = verify_suite(&small()).unwrap();
        let failed: Vec<_> = r.failures().map(|c| (&c.name, c.measured)).collect();
        assert!(r.passed(), "{failed:?}");
        let v = r.variant.unwrap();
        assert_eq!(v.chosen, TtildeVariant::Shared);
        let t = r.to_table();
        assert!(t.rows.iter().any(|row| row[5] == Cell::from("CHOSEN")));
        let m = r.checks.iter().find(|c| c.group == "mutation").unwrap();
        assert!(m.measured > 0.05);
    }

    #[test]
    fn check_bounds() {
        assert!(Check::new("g", "a", 0.1, Bound::Below, 0.2).passed);
        assert!(!Check::new("g", "a", 0.3, Bound::Below, 0.2).passed);
        assert!(Check::new("g", "a", 0.3, Bound::Above, 0.2).passed);
        assert!(!Check::new("g", "a", f64::NAN, Bound::Below, 0.2).passed);
    }
}

//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts.

use std::io::Write;

use num_complex::Complex64;
use snrloss::adaptive::{steering_vector, toeplitz_covariance, ScenarioParams, SignalModel, Training};
use snrloss::analytic::{integrate, mean_rho_gaussian, mean_rho_student, pdf_rho_student};
use snrloss::experiments::figures::DEFAULT_SEED;
use snrloss::experiments::verify::{block_laws, gaussian_pfa_mc, marginalization_gap, mean_triple, two_path_checks};
use snrloss::experiments::{
    find_k_for_half_loss, generate_fig_pfa, ks_distance, mean_statistic, run_direct_draws, run_monte_carlo,
    EmpiricalDistribution, FigureConfig, Path, RunConfig, Statistic, VerifyConfig,
};

const N: u32 = 16;

fn report(id: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{status} criterion {id}: {detail}");
    assert!(pass, "criterion {id}: {detail}");
}

fn rep(training: Training, k: u32, nu: u32, statistic: Statistic, trials: usize) -> EmpiricalDistribution {
    let sc = ScenarioParams::with_matched_mu(N, k, nu, 0.0).unwrap();
    run_monte_carlo(&RunConfig::new(sc, training, statistic, trials, DEFAULT_SEED))
        .unwrap()
        .rep
        .unwrap()
}

#[test]
fn criterion_01_snr_loss_cdf_at_half() {
    let cases = [
        ("gaussian", Training::Gaussian, N + 1, 0.3),
        ("nu=160", Training::Student, 160, 0.4),
        ("nu=32", Training::Student, 32, 0.748),
        ("nu=18", Training::Student, 18, 0.896),
    ];
    let mut pass = true;
    let mut detail = String::from("N=16 K=32 P(rho<=0.5), 1e6 draws:");
    for (name, training, nu, target) in cases {
        let p = rep(training, 32, nu, Statistic::Rho, 1_000_000).cdf(0.5);
        let ok = (p - target).abs() <= 0.005;
        pass &= ok;
        detail += &format!(
            " {name} {p:.5} (target {target}±0.005{})",
            if ok { "" } else { ", OUT" }
        );
    }
    report(1, pass, &detail);
}

#[test]
fn criterion_02_k_dependence() {
    let s = rep(Training::Student, 64, 32, Statistic::Rho, 1_000_000).cdf(0.5);
    let sc = ScenarioParams::with_matched_mu(N, 64, 32, 0.0).unwrap();
    let g = run_monte_carlo(&RunConfig::new(
        sc,
        Training::Gaussian,
        Statistic::Rho,
        10_000_000,
        DEFAULT_SEED,
    ))
    .unwrap()
    .rep
    .unwrap()
    .cdf(0.5);
    let pass = (s - 0.19).abs() <= 0.005 && (g - 3.65e-6).abs() <= 2e-6;
    report(
        2,
        pass,
        &format!("N=16 K=64: Student nu=32 P(rho<=0.5)={s:.5} (0.19±0.005); Gaussian {g:.3e} (3.65e-6±2e-6)"),
    );
}

#[test]
fn criterion_03_analytic_mean() {
    let mut worst: f64 = 0.0;
    let mut gaussian_exact = true;
    for k in [24, 32, 48, 64] {
        for nu in [18, 32, 160] {
            let sc = ScenarioParams::with_matched_mu(N, k, nu, 0.0).unwrap();
            let (_, m) = mean_statistic(&RunConfig::new(
                sc,
                Training::Student,
                Statistic::Rho,
                10_000_000,
                DEFAULT_SEED,
            ))
            .unwrap();
            worst = worst.max((m.unwrap().mean - mean_rho_student(N, k, nu).unwrap()).abs());
        }
        gaussian_exact &= mean_rho_gaussian(N, k).unwrap() == f64::from(k - N + 2) / f64::from(k + 1);
    }
    let pass = worst < 0.002 && gaussian_exact;
    report(3, pass, &format!("max |E[rho] closed form - MC(1e7)| over 12 points = {worst:.2e} (< 2e-3); Gaussian exact: {gaussian_exact}"));
}

#[test]
fn criterion_04_required_support() {
    let g = find_k_for_half_loss(N, None, 4096).unwrap();
    let s = find_k_for_half_loss(N, Some(N + 2), 4096).unwrap();
    report(
        4,
        g == 30 && s.abs_diff(96) <= 2,
        &format!("K(E[rho]=0.5): Gaussian {g} (30), nu=18 {s} (96±2)"),
    );
}

#[test]
fn criterion_05_two_path_equivalence() {
    let cfg = VerifyConfig::default();
    let (checks, decision, _) = two_path_checks(&cfg, 0.01).unwrap();
    let worst = checks.iter().max_by(|a, b| a.measured.total_cmp(&b.measured)).unwrap();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}={:.4}", c.name, c.measured))
        .collect();
    report(
        5,
        failed.is_empty(),
        &format!(
            "{} KS comparisons at 1e5 trials, worst {} = {:.4} (< 0.01); variant {:?} (max KS independent {:.4}, shared {:.4}){}",
            checks.len(),
            worst.name,
            worst.measured,
            decision.chosen,
            decision.independent_max_ks,
            decision.shared_max_ks,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    );
}

#[test]
fn criterion_06_gaussian_pfa_calibration() {
    let (pfa, se) = gaussian_pfa_mc(N, 32, 1e-3, 10_000_000, DEFAULT_SEED, None).unwrap();
    let rel = (pfa / 1e-3 - 1.0).abs();
    report(
        6,
        rel < 0.1,
        &format!("eta=10^(3/17)-1, N=16 K=32, 1e7 draws: Pfa={pfa:.4e} ± {se:.1e} (rel err {rel:.3} < 0.1)"),
    );
}

#[test]
fn criterion_07_student_pfa_inflation() {
    let cfg = FigureConfig {
        ks: vec![2 * N, 4 * N],
        nus: FigureConfig::pfa_nu_grid(N),
        trials: 10_000_000,
        ..Default::default()
    };
    let t = generate_fig_pfa(&cfg).unwrap();
    let nus = t.numeric_column("nu").unwrap();
    let p32 = t.numeric_column("pfa_K32").unwrap();
    let p64 = t.numeric_column("pfa_K64").unwrap();
    let se32 = t.numeric_column("pfa_se_K32").unwrap();
    let above = p32.iter().chain(&p64).all(|&p| p > 1e-3);
    let ordered = p32.iter().zip(&p64).all(|(a, b)| b > a);
    let i = nus.iter().position(|&nu| nu == f64::from(10 * N)).unwrap();
    let z = (p32[i] - 1e-3) / se32[i];
    let pass = above && ordered && z > 3.0;
    let curve: Vec<String> = nus
        .iter()
        .zip(p32.iter().zip(&p64))
        .map(|(nu, (a, b))| format!("{nu}:{a:.2e}/{b:.2e}"))
        .collect();
    report(
        7,
        pass,
        &format!("all > 1e-3: {above}; K=64 > K=32: {ordered}; nu=160 K=32 excess = {z:.1} SE (> 3); nu:Pfa(K32)/Pfa(K64) {}", curve.join(" ")),
    );
}

#[test]
fn criterion_08_block_laws() {
    let b = block_laws(4, 8, 16, 1_000_000, DEFAULT_SEED, None).unwrap();
    let pass = b.correlation.abs() < 0.01 && b.f22_sup < 0.05 && b.t12_sup < 0.05;
    report(
        8,
        pass,
        &format!(
            "CF_4(8,16), 1e6 draws: |corr(tr F1.2, F22)|={:.4} (< 0.01); F22 density sup={:.4} (< 0.05); |t12|^2 density sup={:.4} (< 0.05)",
            b.correlation.abs(),
            b.f22_sup,
            b.t12_sup
        ),
    );
}

#[test]
fn criterion_09_density_and_mean_consistency() {
    let mut norm_err: f64 = 0.0;
    let mut mean_gap: f64 = 0.0;
    for k in [24, 32, 64] {
        for nu in [18, 32, 160] {
            let q = integrate(|r| pdf_rho_student(r, N, k, nu).unwrap(), 0.0, 1.0, 1e-10, 0.0).unwrap();
            norm_err = norm_err.max((q.value - 1.0).abs());
            mean_gap = mean_gap.max(mean_triple(N, k, nu, 1_000_000, DEFAULT_SEED, None).unwrap().max_gap());
        }
    }
    let marg = marginalization_gap(N, 32, 32).unwrap();
    let pass = norm_err < 1e-6 && marg < 1e-6 && mean_gap < 0.003;
    report(
        9,
        pass,
        &format!("max |int p(rho) - 1| = {norm_err:.1e} (< 1e-6); marginalization rel err = {marg:.1e} (< 1e-6); mean three-way gap = {mean_gap:.1e} (< 3e-3)"),
    );
}

#[test]
fn criterion_10_invariance() {
    let sc = |snr| ScenarioParams::with_matched_mu(N, 32, 32, snr).unwrap();
    let sigma = toeplitz_covariance(N as usize, 0.9).unwrap();
    let model = SignalModel::new(sigma, steering_vector(N as usize, 0.1), Complex64::ZERO).unwrap();
    let draws = |snr, structured: bool| {
        let c = RunConfig::new(
            sc(snr),
            Training::Student,
            Statistic::Rho,
            100_000,
            DEFAULT_SEED + u64::from(structured),
        )
        .with_path(Path::Direct);
        let c = if structured { c.with_model(model.clone()) } else { c };
        run_direct_draws(&c).unwrap()
    };
    let (a0, b0, a1, b1) = (
        draws(0.0, false),
        draws(0.0, true),
        draws(10.0, false),
        draws(10.0, true),
    );
    let ks = |a: &[snrloss::adaptive::DirectDraw],
              b: &[snrloss::adaptive::DirectDraw],
              f: fn(&snrloss::adaptive::DirectDraw) -> f64| {
        ks_distance(&a.iter().map(f).collect(), &b.iter().map(f).collect()).unwrap()
    };
    let values = [
        ("rho", ks(&a0, &b0, |d| d.rho)),
        ("beta", ks(&a0, &b0, |d| d.beta)),
        ("ttilde_h0", ks(&a0, &b0, |d| d.t_tilde)),
        ("ttilde_h1", ks(&a1, &b1, |d| d.t_tilde)),
    ];
    let pass = values.iter().all(|(_, v)| *v < 0.01);
    let detail: Vec<String> = values.iter().map(|(n, v)| format!("{n} {v:.4}")).collect();
    report(
        10,
        pass,
        &format!(
            "Toeplitz(0.9)+steering vs identity+e_N, Student K=32 nu=32, 1e5 trials, KS: {} (< 0.01)",
            detail.join(", ")
        ),
    );
}

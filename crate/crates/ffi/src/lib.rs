//! C interface to `snrloss`.
//!
//! Every fallible function returns a [`SnrlossStatus`] and writes its result
//! through an out-pointer. On failure the message is available from
//! [`snrloss_last_error`] on the same thread. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use snrloss::adaptive::{DirectSimulator, Hypothesis, ScenarioParams, SignalModel, Training};
use snrloss::analytic;
use snrloss::experiments::{self, EmpiricalDistribution, Path, RunConfig, Statistic};
use snrloss::represent::{RepSampler, TtildeVariant};
use snrloss::{Error, RngStream};

pub const SNRLOSS_TRAINING_GAUSSIAN: u32 = 0;
pub const SNRLOSS_TRAINING_STUDENT: u32 = 1;

pub const SNRLOSS_STATISTIC_RHO: u32 = 0;
pub const SNRLOSS_STATISTIC_BETA: u32 = 1;
pub const SNRLOSS_STATISTIC_TTILDE: u32 = 2;

pub const SNRLOSS_PATH_DIRECT: u32 = 0;
pub const SNRLOSS_PATH_REP: u32 = 1;

pub const SNRLOSS_VARIANT_SHARED: u32 = 0;
pub const SNRLOSS_VARIANT_INDEPENDENT: u32 = 1;

pub const SNRLOSS_H0: u32 = 0;
pub const SNRLOSS_H1: u32 = 1;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnrlossStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

/// Statistics of one direct-path trial.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SnrlossDraw {
    pub rho: f64,
    pub beta: f64,
    pub t_tilde: f64,
}

/// Random stream (ChaCha8 keyed by seed and stream id).
pub struct SnrlossRng(RngStream);

/// Direct-path simulator with identity covariance and the last unit vector as
/// steering vector.
pub struct SnrlossDirect {
    sim: DirectSimulator,
}

/// Sorted Monte Carlo samples.
pub struct SnrlossSamples(EmpiricalDistribution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FfiResult<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> SnrlossStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SnrlossStatus::Ok
        }
        Ok(Err(Fail::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            SnrlossStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_last_error(msg);
            SnrlossStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(e.to_string());
            if e.is_argument_error() {
                SnrlossStatus::InvalidArgument
            } else {
                SnrlossStatus::Numerical
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SnrlossStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, name: &'static str) -> FfiResult<&'a mut T> {
    // SAFETY: caller guarantees a non-null pointer is valid and writable.
    unsafe { p.as_mut() }.ok_or(Fail::Null(name))
}

fn handle<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    // SAFETY: caller guarantees a non-null handle came from this library.
    unsafe { p.as_ref() }.ok_or(Fail::Null(name))
}

fn training(code: u32) -> FfiResult<Training> {
    match code {
        SNRLOSS_TRAINING_GAUSSIAN => Ok(Training::Gaussian),
        SNRLOSS_TRAINING_STUDENT => Ok(Training::Student),
        _ => Err(Fail::Arg(format!("unknown training code {code}"))),
    }
}

fn statistic(code: u32) -> FfiResult<Statistic> {
    match code {
        SNRLOSS_STATISTIC_RHO => Ok(Statistic::Rho),
        SNRLOSS_STATISTIC_BETA => Ok(Statistic::Beta),
        SNRLOSS_STATISTIC_TTILDE => Ok(Statistic::TTilde),
        _ => Err(Fail::Arg(format!("unknown statistic code {code}"))),
    }
}

fn variant(code: u32) -> FfiResult<TtildeVariant> {
    match code {
        SNRLOSS_VARIANT_SHARED => Ok(TtildeVariant::Shared),
        SNRLOSS_VARIANT_INDEPENDENT => Ok(TtildeVariant::Independent),
        _ => Err(Fail::Arg(format!("unknown variant code {code}"))),
    }
}

fn path(code: u32) -> FfiResult<Path> {
    match code {
        SNRLOSS_PATH_DIRECT => Ok(Path::Direct),
        SNRLOSS_PATH_REP => Ok(Path::Rep),
        _ => Err(Fail::Arg(format!("unknown path code {code}"))),
    }
}

fn hypothesis(code: u32) -> FfiResult<Hypothesis> {
    match code {
        SNRLOSS_H0 => Ok(Hypothesis::H0),
        SNRLOSS_H1 => Ok(Hypothesis::H1),
        _ => Err(Fail::Arg(format!("unknown hypothesis code {code}"))),
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn snrloss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn snrloss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a random stream. Returns NULL only on allocation failure.
#[no_mangle]
pub extern "C" fn snrloss_rng_new(seed: u64, stream_id: u64) -> *mut SnrlossRng {
    Box::into_raw(Box::new(SnrlossRng(RngStream::new(seed, stream_id))))
}

/// Releases a stream. NULL is ignored.
///
/// # Safety
/// `rng` must be NULL or a pointer from `snrloss_rng_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snrloss_rng_free(rng: *mut SnrlossRng) {
    if !rng.is_null() {
        drop(unsafe { Box::from_raw(rng) });
    }
}

/// One draw of `statistic` from the chi-square representation.
///
/// `nu` and `mu` are ignored for Gaussian training; `snr_bar` and `variant`
/// only matter for t-tilde.
///
/// # Safety
/// `rng` must be a live stream and `out` a writable `double`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn snrloss_rep_draw(
    rng: *mut SnrlossRng,
    training_code: u32,
    statistic_code: u32,
    n: u32,
    k: u32,
    nu: u32,
    mu: f64,
    snr_bar: f64,
    variant_code: u32,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let rng = &mut out(rng, "rng")?.0;
        let out_value = out(out_value, "out_value")?;
        let stat = statistic(statistic_code)?;
        let value = match training(training_code)? {
            Training::Gaussian => {
                let s = RepSampler::gaussian(n, k, snr_bar)?;
                match stat {
                    Statistic::Rho => s.rho_gaussian(rng),
                    Statistic::Beta => s.beta_gaussian(rng),
                    Statistic::TTilde => s.ttilde_gaussian(rng),
                }
            }
            Training::Student => {
                let s = RepSampler::student(n, k, nu, mu, snr_bar, variant(variant_code)?)?;
                match stat {
                    Statistic::Rho => s.rho_student(rng)?,
                    Statistic::Beta => s.beta_student(rng)?,
                    Statistic::TTilde => s.ttilde_student(rng)?,
                }
            }
        };
        *out_value = value.value;
        Ok(())
    })
}

/// Builds a direct-path simulator. For Gaussian training pass `nu = n + 1`.
///
/// # Safety
/// `out_sim` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn snrloss_direct_new(
    n: u32,
    k: u32,
    nu: u32,
    mu: f64,
    snr_bar: f64,
    training_code: u32,
    out_sim: *mut *mut SnrlossDirect,
) -> SnrlossStatus {
    guard(|| {
        let slot = out(out_sim, "out_sim")?;
        *slot = ptr::null_mut();
        let params = ScenarioParams::new(n, k, nu, mu, snr_bar)?;
        let model = SignalModel::canonical(n as usize);
        let sim = DirectSimulator::new(&params, &model, training(training_code)?)?;
        *slot = Box::into_raw(Box::new(SnrlossDirect { sim }));
        Ok(())
    })
}

/// Runs one trial under `hypothesis` (SNRLOSS_H0 or SNRLOSS_H1).
///
/// # Safety
/// `sim` and `rng` must be live handles and `out_draw` writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_direct_trial(
    sim: *const SnrlossDirect,
    rng: *mut SnrlossRng,
    hypothesis_code: u32,
    out_draw: *mut SnrlossDraw,
) -> SnrlossStatus {
    guard(|| {
        let sim = handle(sim, "sim")?;
        let rng = &mut out(rng, "rng")?.0;
        let out_draw = out(out_draw, "out_draw")?;
        let d = sim.sim.trial(hypothesis(hypothesis_code)?, rng)?;
        *out_draw = SnrlossDraw {
            rho: d.rho,
            beta: d.beta,
            t_tilde: d.t_tilde,
        };
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or a pointer from `snrloss_direct_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snrloss_direct_free(sim: *mut SnrlossDirect) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Monte Carlo run of `trials` draws of one statistic on one path.
/// `workers = 0` uses every core; results do not depend on `workers`.
/// For Gaussian training pass `nu = n + 1`.
///
/// # Safety
/// `out_samples` must be a writable pointer slot.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn snrloss_mc_run(
    n: u32,
    k: u32,
    nu: u32,
    mu: f64,
    snr_bar: f64,
    training_code: u32,
    statistic_code: u32,
    path_code: u32,
    variant_code: u32,
    trials: usize,
    seed: u64,
    workers: usize,
    out_samples: *mut *mut SnrlossSamples,
) -> SnrlossStatus {
    guard(|| {
        let slot = out(out_samples, "out_samples")?;
        *slot = ptr::null_mut();
        let params = ScenarioParams::new(n, k, nu, mu, snr_bar)?;
        let mut cfg = RunConfig::new(
            params,
            training(training_code)?,
            statistic(statistic_code)?,
            trials,
            seed,
        )
        .with_path(path(path_code)?)
        .with_variant(variant(variant_code)?);
        if workers > 0 {
            cfg = cfg.with_workers(workers);
        }
        let dist = experiments::run_monte_carlo(&cfg)?.primary().clone();
        *slot = Box::into_raw(Box::new(SnrlossSamples(dist)));
        Ok(())
    })
}

/// Number of samples; 0 for NULL.
///
/// # Safety
/// `samples` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snrloss_samples_len(samples: *const SnrlossSamples) -> usize {
    unsafe { samples.as_ref() }.map_or(0, |s| s.0.count())
}

/// Sorted samples, valid until the handle is freed; NULL for NULL.
///
/// # Safety
/// `samples` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snrloss_samples_data(samples: *const SnrlossSamples) -> *const f64 {
    unsafe { samples.as_ref() }.map_or(ptr::null(), |s| s.0.samples().as_ptr())
}

/// Empirical CDF at `x`.
///
/// # Safety
/// `samples` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_samples_cdf(
    samples: *const SnrlossSamples,
    x: f64,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let s = handle(samples, "samples")?;
        *out(out_value, "out_value")? = s.0.cdf(x);
        Ok(())
    })
}

/// Empirical quantile at probability `q` in [0, 1].
///
/// # Safety
/// `samples` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_samples_quantile(
    samples: *const SnrlossSamples,
    q: f64,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let s = handle(samples, "samples")?;
        *out(out_value, "out_value")? = s.0.quantile(q)?;
        Ok(())
    })
}

/// # Safety
/// `samples` must be NULL or a pointer from `snrloss_mc_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snrloss_samples_free(samples: *mut SnrlossSamples) {
    if !samples.is_null() {
        drop(unsafe { Box::from_raw(samples) });
    }
}

/// Two-sample Kolmogorov-Smirnov distance.
///
/// # Safety
/// `a` and `b` must be live handles and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_ks_distance(
    a: *const SnrlossSamples,
    b: *const SnrlossSamples,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        *out(out_value, "out_value")? = experiments::ks_distance(&a.0, &b.0)?;
        Ok(())
    })
}

/// Density of the SNR loss at `rho`. `nu` is ignored for Gaussian training.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_pdf_rho(
    rho: f64,
    n: u32,
    k: u32,
    nu: u32,
    training_code: u32,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = match training(training_code)? {
            Training::Gaussian => analytic::pdf_rho_gaussian(rho, n, k)?,
            Training::Student => analytic::pdf_rho_student(rho, n, k, nu)?,
        };
        Ok(())
    })
}

/// Mean SNR loss. `nu` is ignored for Gaussian training.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_mean_rho(
    n: u32,
    k: u32,
    nu: u32,
    training_code: u32,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = match training(training_code)? {
            Training::Gaussian => analytic::mean_rho_gaussian(n, k)?,
            Training::Student => analytic::mean_rho_student(n, k, nu)?,
        };
        Ok(())
    })
}

/// Kelly threshold giving false-alarm probability `pfa` under Gaussian training.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_gaussian_pfa_threshold(
    pfa: f64,
    n: u32,
    k: u32,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        *out(out_value, "out_value")? = analytic::gaussian_pfa_threshold(pfa, n, k)?;
        Ok(())
    })
}

/// Gauss hypergeometric function 2F1(a, b; c; x).
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_hyp2f1(a: f64, b: f64, c: f64, x: f64, out_value: *mut f64) -> SnrlossStatus {
    guard(|| {
        *out(out_value, "out_value")? = analytic::hyp2f1(a, b, c, x)?.into_value("hyp2f1")?;
        Ok(())
    })
}

/// 3F2(a1, a2, a3; b1, b2; 1). Needs `b1 + b2 - a1 - a2 - a3 > 0`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snrloss_hyp3f2_unit(
    a1: f64,
    a2: f64,
    a3: f64,
    b1: f64,
    b2: f64,
    out_value: *mut f64,
) -> SnrlossStatus {
    guard(|| {
        *out(out_value, "out_value")? = analytic::hyp3f2_unit(a1, a2, a3, b1, b2)?.into_value("hyp3f2")?;
        Ok(())
    })
}

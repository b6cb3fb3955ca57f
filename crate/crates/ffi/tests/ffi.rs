use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use snrloss_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(snrloss_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn analytic_values() {
    let mut v = f64::NAN;
    unsafe {
        assert_eq!(
            snrloss_mean_rho(16, 32, 0, SNRLOSS_TRAINING_GAUSSIAN, &mut v),
            SnrlossStatus::Ok
        );
        assert_eq!(v, 18.0 / 33.0);
        assert_eq!(snrloss_gaussian_pfa_threshold(1e-3, 16, 32, &mut v), SnrlossStatus::Ok);
        assert!((v - (10f64.powf(3.0 / 17.0) - 1.0)).abs() < 1e-14);
        assert_eq!(snrloss_hyp2f1(1.0, 1.0, 2.0, 0.5, &mut v), SnrlossStatus::Ok);
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(
            snrloss_pdf_rho(0.5, 16, 32, 32, SNRLOSS_TRAINING_STUDENT, &mut v),
            SnrlossStatus::Ok
        );
        assert!(v > 0.0);
    }
    assert!(last_error().is_empty());
}

#[test]
fn error_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(
            snrloss_mean_rho(16, 8, 0, SNRLOSS_TRAINING_GAUSSIAN, &mut v),
            SnrlossStatus::InvalidArgument
        );
        assert!(last_error().contains("K"));
        assert_eq!(snrloss_mean_rho(16, 32, 0, 9, &mut v), SnrlossStatus::InvalidArgument);
        assert_eq!(
            snrloss_mean_rho(16, 32, 0, 0, ptr::null_mut()),
            SnrlossStatus::NullPointer
        );
        assert!(last_error().contains("out_value"));
        assert_eq!(
            snrloss_samples_cdf(ptr::null(), 0.5, &mut v),
            SnrlossStatus::NullPointer
        );
        assert_eq!(snrloss_samples_len(ptr::null()), 0);
        assert!(snrloss_samples_data(ptr::null()).is_null());
        snrloss_samples_free(ptr::null_mut());
        snrloss_rng_free(ptr::null_mut());
        snrloss_direct_free(ptr::null_mut());
    }
}

#[test]
fn monte_carlo_handles() {
    let run = |path, workers| {
        let mut s = ptr::null_mut();
        let status = unsafe {
            snrloss_mc_run(
                16,
                32,
                32,
                16.0,
                0.0,
                SNRLOSS_TRAINING_STUDENT,
                SNRLOSS_STATISTIC_RHO,
                path,
                SNRLOSS_VARIANT_SHARED,
                20_000,
                11,
                workers,
                &mut s,
            )
        };
        assert_eq!(status, SnrlossStatus::Ok, "{}", last_error());
        s
    };
    let rep1 = run(SNRLOSS_PATH_REP, 1);
    let rep4 = run(SNRLOSS_PATH_REP, 4);
    let direct = run(SNRLOSS_PATH_DIRECT, 0);
    unsafe {
        assert_eq!(snrloss_samples_len(rep1), 20_000);
        let a = std::slice::from_raw_parts(snrloss_samples_data(rep1), 20_000);
        let b = std::slice::from_raw_parts(snrloss_samples_data(rep4), 20_000);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        let mut ks = 1.0;
        assert_eq!(snrloss_ks_distance(rep1, direct, &mut ks), SnrlossStatus::Ok);
        assert!(ks < 0.03, "ks {ks}");
        let mut med = 0.0;
        assert_eq!(snrloss_samples_quantile(rep1, 0.5, &mut med), SnrlossStatus::Ok);
        assert!(med > 0.3 && med < 0.6);
        assert_eq!(
            snrloss_samples_quantile(rep1, 2.0, &mut med),
            SnrlossStatus::InvalidArgument
        );
        snrloss_samples_free(rep1);
        snrloss_samples_free(rep4);
        snrloss_samples_free(direct);
    }
}

#[test]
fn scalar_draws_and_direct_trials() {
    unsafe {
        let rng = snrloss_rng_new(5, 0);
        let mut v = -1.0;
        for stat in [SNRLOSS_STATISTIC_RHO, SNRLOSS_STATISTIC_BETA] {
            for training in [SNRLOSS_TRAINING_GAUSSIAN, SNRLOSS_TRAINING_STUDENT] {
                let s = snrloss_rep_draw(
                    rng,
                    training,
                    stat,
                    16,
                    32,
                    32,
                    16.0,
                    0.0,
                    SNRLOSS_VARIANT_SHARED,
                    &mut v,
                );
                assert_eq!(s, SnrlossStatus::Ok, "{}", last_error());
                assert!(v > 0.0 && v <= 1.0);
            }
        }
        let s = snrloss_rep_draw(
            rng,
            SNRLOSS_TRAINING_STUDENT,
            SNRLOSS_STATISTIC_TTILDE,
            16,
            32,
            32,
            16.0,
            10.0,
            1,
            &mut v,
        );
        assert_eq!(s, SnrlossStatus::Ok);
        assert!(v >= 0.0);

        let mut sim = ptr::null_mut();
        assert_eq!(
            snrloss_direct_new(16, 32, 32, 16.0, 10.0, SNRLOSS_TRAINING_STUDENT, &mut sim),
            SnrlossStatus::Ok
        );
        let mut d = SnrlossDraw::default();
        assert_eq!(snrloss_direct_trial(sim, rng, SNRLOSS_H0, &mut d), SnrlossStatus::Ok);
        assert!(d.rho > 0.0 && d.rho <= d.beta.max(1.0));
        assert_eq!(
            snrloss_direct_trial(sim, rng, 5, &mut d),
            SnrlossStatus::InvalidArgument
        );
        snrloss_direct_free(sim);

        let mut bad = ptr::null_mut();
        assert_eq!(
            snrloss_direct_new(16, 8, 32, 16.0, 0.0, SNRLOSS_TRAINING_STUDENT, &mut bad),
            SnrlossStatus::InvalidArgument
        );
        assert!(bad.is_null());
        snrloss_rng_free(rng);
    }
}

#[test]
fn header_declares_the_api() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/snrloss.h")).unwrap();
    for name in [
        "SNRLOSS_H",
        "SNRLOSS_STATUS_OK",
        "SNRLOSS_TRAINING_STUDENT",
        "typedef struct SnrlossSamples SnrlossSamples",
        "snrloss_mc_run",
        "snrloss_direct_trial",
        "snrloss_last_error",
        "snrloss_hyp3f2_unit",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles `tests/c/smoke.c` against the cdylib when a C compiler is present.
#[test]
fn c_smoke() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping C smoke test: no C compiler `{cc}`");
        return;
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Integration test binaries live in target/<profile>/deps; the cdylib sits one level up.
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    assert!(
        lib_dir.join("libsnrloss_ffi.so").exists() || lib_dir.join("libsnrloss_ffi.dylib").exists(),
        "cdylib not found in {}",
        lib_dir.display()
    );
    let bin = std::env::temp_dir().join(format!("snrloss_ffi_smoke_{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lsnrloss_ffi", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .env("DYLD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(
        out.status.success(),
        "smoke failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("ffi smoke ok"));
}

//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Long ensembles run here (the whole suite takes a few core-hours). CSV
//! outputs are kept under `$CARGO_TARGET_TMPDIR/acceptance` for plotting.
//! `MONBCS_WORKERS` sets the thread count (default: one per core).

mod common;

use std::f64::consts::LN_2;
use std::fs;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use monbcs::engine::{
    calibration_from, check_gamma_grid, default_window, gamma_sweep, run_ensemble, run_ensemble_series,
    run_trajectory, size_scaling_fit, Backend, EnsembleResult, TrajectoryConfig,
};
use monbcs::gge::{entropy_density, gge_entropy_curve, nn_pairing_neel_discrete, saturation_time};
use monbcs::io::{self, SteadyRow};
use monbcs::measurement::RngStream;
use monbcs::{ModelParams, Result};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn workers() -> usize {
    std::env::var("MONBCS_WORKERS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn out_dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    fs::create_dir_all(&d).expect("output directory");
    d
}

fn config(l: usize, delta: f64, gamma: f64, n_traj: usize, seed: u64) -> TrajectoryConfig {
    let params = ModelParams::new(l, 1.0, delta, gamma).expect("valid parameters");
    let mut cfg = TrajectoryConfig::new(params, default_window(l).1);
    cfg.n_traj = n_traj;
    cfg.base_seed = seed;
    cfg
}

/// Runs an ensemble and stores its time series and steady-state row.
fn ensemble(cfg: &TrajectoryConfig, name: &str, w: usize) -> Result<EnsembleResult> {
    let r = run_ensemble::<f64>(cfg, w)?;
    let dir = out_dir(name);
    io::write_timeseries(&dir.join(io::TIMESERIES_FILE), &r)?;
    let p = &cfg.params;
    io::write_steady_state(&dir.join(io::STEADY_STATE_FILE), &[SteadyRow::from_result(p.l, p.j, p.delta, p.gamma, &r)])?;
    Ok(r)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn a1() -> Result<Verdict> {
    let c = entropy_density(&ModelParams::new(2, 1.0, 0.0, 0.0)?)?;
    let err = (c - 2.0 * LN_2).abs();
    verdict(err <= 1e-10, format!("c(0) = {c:.12}, |c - 2 ln 2| = {err:.1e} (tol 1e-10)"))
}

/// Shared by A2 and A3: unmonitored L = 128 quenches, sampled every 0.5.
struct Unmonitored {
    deltas: Vec<f64>,
    results: Vec<EnsembleResult>,
}

fn unmonitored_128() -> Result<Unmonitored> {
    let deltas = vec![0.0, 1.0, 2.0];
    let mut results = Vec::new();
    for &d in &deltas {
        let mut cfg = config(128, d, 0.0, 1, 0);
        cfg.obs_stride = 50;
        results.push(ensemble(&cfg, &format!("a2_delta{d}"), workers())?);
    }
    Ok(Unmonitored { deltas, results })
}

fn a2(u: &Unmonitored) -> Result<Verdict> {
    let l = 128;
    let cal = calibration_from(&u.results[0], l)?;
    let mut pass = true;
    let mut parts = vec![format!(
        "kappa = {:.4} from delta = 0 (c*L off by {:+.1}%, c*L/2 off by {:+.1}%)",
        cal.convention.factor,
        100.0 * cal.off_chain_length,
        100.0 * cal.off_subsystem
    )];
    for (d, r) in u.deltas.iter().zip(&u.results) {
        let p = ModelParams::new(l, 1.0, *d, 0.0)?;
        let curve = gge_entropy_curve(&p, l, cal.convention)?;
        let plateau_err = rel(r.s_steady, curve.s_plateau);
        let t95 = r
            .times
            .iter()
            .zip(&r.mean_s)
            .find(|(_, s)| **s >= 0.95 * r.s_steady)
            .map(|(t, _)| *t)
            .unwrap_or(f64::NAN);
        let tau = saturation_time(&p, l)?;
        let tau_err = rel(t95, tau);
        pass &= plateau_err <= 0.03 && tau_err <= 0.15;
        parts.push(format!(
            "delta={d}: S={:.3} vs {:.3} ({:.1}%), t95={t95:.1} vs tau={tau:.1} ({:.0}%)",
            r.s_steady,
            curve.s_plateau,
            100.0 * plateau_err,
            100.0 * tau_err
        ));
    }
    verdict(pass, parts.join("; "))
}

fn a3(u: &Unmonitored) -> Result<Verdict> {
    let worst = u.results.iter().map(|r| r.max_onsite_pairing).fold(0.0, f64::max);
    verdict(worst <= 1e-8, format!("max |<c_j,dn c_j,up>| = {worst:.2e} over delta in {{0,1,2}} (tol 1e-8)"))
}

fn a4(r0: &EnsembleResult) -> Result<Verdict> {
    let oracle = nn_pairing_neel_discrete(&ModelParams::new(32, 1.0, 1.0, 0.0)?, 32, 1)?;
    let err = rel(r0.staggered_steady, oracle);
    verdict(
        err <= 0.03,
        format!("staggered NN pairing {:.6} vs {oracle:.6} ({:.2}%, tol 3%)", r0.staggered_steady, 100.0 * err),
    )
}

fn a5_config() -> TrajectoryConfig {
    config(32, 1.0, 10.0, 100, 5)
}

fn a5(r0: &EnsembleResult) -> Result<Verdict> {
    let r = ensemble(&a5_config(), "a5_gamma10", workers())?;
    let ratio = r.pairing_steady / r0.pairing_steady;
    verdict(
        ratio < 0.2,
        format!(
            "NN pairing {:.4} ± {:.4} at gamma=10 vs {:.4} at gamma=0, ratio {ratio:.3} (< 0.2)",
            r.pairing_steady, r.pairing_steady_err, r0.pairing_steady
        ),
    )
}

fn a6() -> Result<Verdict> {
    let mut s = Vec::new();
    for g in [0.0, 10.0, 70.0] {
        let r = ensemble(&config(32, 2.0, g, 200, 6), &format!("a6_gamma{g}"), workers())?;
        s.push((r.s_steady, r.s_steady_err));
    }
    let sep = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0) / (a.1 * a.1 + b.1 * b.1).sqrt().max(f64::MIN_POSITIVE);
    let (up, down) = (sep(s[1], s[0]), sep(s[1], s[2]));
    verdict(
        up >= 3.0 && down >= 3.0,
        format!(
            "S(0)={:.4}±{:.4}, S(10)={:.4}±{:.4}, S(70)={:.4}±{:.4}; S(10)-S(0) = {up:.1} SE, S(10)-S(70) = {down:.1} SE (need >= 3)",
            s[0].0, s[0].1, s[1].0, s[1].1, s[2].0, s[2].1
        ),
    )
}

fn a7() -> Result<Verdict> {
    let grid = [0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    check_gamma_grid(&grid)?;
    let mut peaks = Vec::new();
    let mut parts = Vec::new();
    for d in [1.0, 2.0, 3.0] {
        let sweep = gamma_sweep::<f64>(&config(32, d, 0.0, 100, 7), &grid, workers())?;
        let dir = out_dir(&format!("a7_delta{d}"));
        let rows: Vec<SteadyRow> =
            grid.iter().zip(&sweep.results).map(|(g, r)| SteadyRow::from_result(32, 1.0, d, *g, r)).collect();
        io::write_steady_state(&dir.join(io::GAMMA_SWEEP_FILE), &rows)?;
        io::write_gamma_peak(&dir.join(io::GAMMA_PEAK_FILE), d, 32, &sweep.peak)?;
        let s: Vec<String> = sweep.results.iter().map(|r| format!("{:.3}", r.s_steady)).collect();
        parts.push(format!("delta={d}: peak {} [S = {}]", sweep.peak.gamma_peak, s.join(" ")));
        peaks.push(sweep.peak.gamma_peak);
    }
    verdict(peaks.windows(2).all(|w| w[1] >= w[0]), parts.join("; "))
}

fn a8() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for backend in [Backend::Nambu, Backend::Orbital] {
        for l in [2, 4] {
            for traj in 0..3 {
                let params = ModelParams::new(l, 1.0, 1.0, 5.0)?;
                let mut cfg = TrajectoryConfig::new(params, 2.0);
                cfg.obs_stride = 1;
                cfg.extras = true;
                cfg.backend = backend;
                cfg.base_seed = 8;
                let ours = run_trajectory::<f64>(&cfg, traj)?;
                let reference = common::fock_trajectory(
                    l,
                    1.0,
                    1.0,
                    5.0,
                    0.01,
                    200,
                    1,
                    l / 2,
                    RngStream::for_trajectory(8, traj),
                );
                for (i, r) in reference.iter().enumerate() {
                    worst = worst.max((ours.entropy[i] - r.entropy).abs());
                    let ex = &ours.extras[i];
                    for (a, b) in ex.occupations.iter().zip(&r.occupations) {
                        worst = worst.max((a - b).abs());
                    }
                    for (a, b) in ex.pairing.iter().zip(&r.pairing) {
                        worst = worst.max((a.0 - b.re).abs()).max((a.1 - b.im).abs());
                    }
                }
            }
        }
    }
    verdict(
        worst <= 1e-8,
        format!("max deviation from the 4^L state vector {worst:.2e} (L in {{2,4}}, both backends; tol 1e-8)"),
    )
}

fn a9() -> Result<Verdict> {
    let params = ModelParams::new(16, 1.0, 2.0, 10.0)?;
    let mut cfg = TrajectoryConfig::new(params, 50.0);
    cfg.obs_stride = 1;
    cfg.backend = Backend::Nambu;
    cfg.extras = true;
    cfg.base_seed = 9;
    let series = run_ensemble_series::<f64>(&cfg, 1)?;
    let s = &series[0];
    let (mut sym, mut pur, mut tr, mut lo, mut hi, mut comp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 1.0f64, 0.0f64);
    for (x, e) in s.extras.iter().zip(&s.entropy) {
        sym = sym.max(x.diagnostics.symmetry);
        pur = pur.max(x.diagnostics.purity);
        tr = tr.max(x.diagnostics.trace);
        lo = lo.min(x.restricted_min);
        hi = hi.max(x.restricted_max);
        comp = comp.max((e - x.entropy_complement).abs());
    }
    let pass = sym <= 1e-8 && pur <= 1e-8 && tr <= 1e-8 && lo >= -1e-10 && hi <= 1.0 + 1e-10 && comp <= 1e-8;
    verdict(
        pass,
        format!(
            "{} samples: symmetry {sym:.1e}, purity {pur:.1e}, trace {tr:.1e}, spectrum [{lo:.1e}, 1{:+.1e}], |S(A)-S(B)| {comp:.1e}",
            s.times.len(),
            hi - 1.0
        ),
    )
}

fn a10() -> Result<Verdict> {
    let sizes = [16usize, 32, 64];
    let mut fits = Vec::new();
    for g in [4.0, 16.0] {
        let mut pts = Vec::new();
        let mut rows = Vec::new();
        for &l in &sizes {
            let cfg = config(l, 2.0, g, 100, 10);
            let r = ensemble(&cfg, &format!("a10_gamma{g}_L{l}"), workers())?;
            pts.push((l, r.s_steady, r.s_steady_err));
            rows.push(SteadyRow::from_result(l, 1.0, 2.0, g, &r));
        }
        let fit = size_scaling_fit(&pts)?;
        let dir = out_dir(&format!("a10_gamma{g}"));
        io::write_steady_state(&dir.join(io::STEADY_STATE_FILE), &rows)?;
        io::write_scaling_fit(&dir.join(io::SCALING_FIT_FILE), 2.0, g, &fit, &sizes)?;
        fits.push((g, fit, pts));
    }
    let (f4, f16) = (&fits[0].1, &fits[1].1);
    let pass = f4.lambda > 0.0 && f4.r_squared >= 0.98 && f16.lambda < f4.lambda;
    let parts: Vec<String> = fits
        .iter()
        .map(|(g, f, pts)| {
            let s: Vec<String> = pts.iter().map(|p| format!("{:.3}", p.1)).collect();
            format!("gamma={g}: lambda={:.4}, r2={:.3} [S = {}]", f.lambda, f.r_squared, s.join(" "))
        })
        .collect();
    verdict(pass, parts.join("; "))
}

fn a11() -> Result<Verdict> {
    let first = out_dir("a5_gamma10");
    let base = workers();
    let other = if base == 3 { 2 } else { 3 };
    ensemble(&a5_config(), "a11_rerun", other)?;
    let again = out_dir("a11_rerun");
    let same = [io::TIMESERIES_FILE, io::STEADY_STATE_FILE]
        .iter()
        .all(|f| fs::read(first.join(f)).ok() == fs::read(again.join(f)).ok());
    verdict(same, format!("A5 rerun on {other} workers (first run on {base}, 0 = per core): CSV bytes identical = {same}"))
}

fn report(name: &str, f: impl FnOnce() -> Result<Verdict>) -> bool {
    let start = Instant::now();
    let v = match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => Verdict { pass: false, detail: format!("error: {e}") },
        Err(_) => Verdict { pass: false, detail: "panicked".into() },
    };
    println!(
        "{name} {} {} [{:.0} s]",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        start.elapsed().as_secs_f64()
    );
    std::io::stdout().flush().ok();
    v.pass
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report("A1", a1);
    all &= report("A8", a8);
    all &= report("A9", a9);

    match unmonitored_128() {
        Ok(u) => {
            all &= report("A2", || a2(&u));
            all &= report("A3", || a3(&u));
        }
        Err(e) => {
            for name in ["A2", "A3"] {
                all &= report(name, || Err(e.to_string()).map_err(monbcs::Error::Numeric));
            }
        }
    }

    match ensemble(&config(32, 1.0, 0.0, 100, 5), "a4_gamma0", workers()) {
        Ok(r0) => {
            all &= report("A4", || a4(&r0));
            all &= report("A5", || a5(&r0));
        }
        Err(e) => {
            for name in ["A4", "A5"] {
                all &= report(name, || Err(e.to_string()).map_err(monbcs::Error::Numeric));
            }
        }
    }
    all &= report("A11", a11);
    all &= report("A6", a6);
    all &= report("A10", a10);
    all &= report("A7", a7);

    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

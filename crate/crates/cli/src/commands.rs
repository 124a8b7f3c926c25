use std::fs;
use std::path::Path;
use std::time::Instant;

use monbcs::engine::{self, Backend, EnsembleResult, TrajectoryConfig};
use monbcs::gge;
use monbcs::io::{self, SteadyRow};
use monbcs::{Error, ModelParams, Result};

use crate::config::RunConfig;

/// Worker threads from `MONBCS_WORKERS`; 0 (or unset) lets rayon decide.
pub fn workers() -> Result<usize> {
    match std::env::var("MONBCS_WORKERS") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("MONBCS_WORKERS must be an integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Creates `dir`, refusing to reuse one that already holds a manifest.
fn prepare_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.join(io::MANIFEST_FILE).exists() && !overwrite {
        return Err(Error::Config(format!(
            "{} already contains a manifest; pass --overwrite to replace it",
            dir.display()
        )));
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

fn finish_manifest(dir: &Path, command: &str, mut entries: Vec<(String, String)>, started: Instant) -> Result<()> {
    entries.insert(0, ("command".into(), command.into()));
    entries.push(("version".into(), format!("monbcs {}", env!("CARGO_PKG_VERSION"))));
    entries.push(("workers".into(), workers()?.to_string()));
    entries.push(("wall_time_s".into(), format!("{:.3}", started.elapsed().as_secs_f64())));
    io::write_manifest(&dir.join(io::MANIFEST_FILE), &entries)
}

fn steady_row(cfg: &TrajectoryConfig, r: &EnsembleResult) -> SteadyRow {
    let p = &cfg.params;
    SteadyRow::from_result(p.l, p.j, p.delta, p.gamma, r)
}

fn resolved(cfg: &TrajectoryConfig) -> Vec<(String, String)> {
    vec![
        ("resolved_t_max".into(), cfg.t_max.to_string()),
        ("resolved_window".into(), format!("{} {}", cfg.window.0, cfg.window.1)),
        ("resolved_cut".into(), cfg.cut.to_string()),
        ("obs_stride".into(), cfg.obs_stride.to_string()),
    ]
}

pub fn run(config: &RunConfig, overwrite: bool) -> Result<()> {
    let started = Instant::now();
    let cfg = config.trajectory(config.l, config.gamma()?)?;
    prepare_dir(&config.output_dir, overwrite)?;
    let r = engine::run_ensemble::<f64>(&cfg, workers()?)?;
    io::write_timeseries(&config.output_dir.join(io::TIMESERIES_FILE), &r)?;
    io::write_steady_state(&config.output_dir.join(io::STEADY_STATE_FILE), &[steady_row(&cfg, &r)])?;
    let mut m = config.manifest();
    m.extend(resolved(&cfg));
    finish_manifest(&config.output_dir, "run", m, started)?;
    println!("S_steady = {:.6} ± {:.6} over {} trajectories", r.s_steady, r.s_steady_err, r.n_traj_effective);
    Ok(())
}

/// File name of the time series for one point of a γ sweep.
pub fn gamma_timeseries_file(gamma: f64) -> String {
    format!("entropy_timeseries_gamma_{gamma}.csv")
}

pub fn sweep_gamma(config: &RunConfig, gammas: &[f64], overwrite: bool) -> Result<()> {
    let started = Instant::now();
    engine::check_gamma_grid(gammas)?;
    let cfg = config.trajectory(config.l, gammas[0])?;
    prepare_dir(&config.output_dir, overwrite)?;
    let sweep = engine::gamma_sweep::<f64>(&cfg, gammas, workers()?)?;
    let mut rows = Vec::with_capacity(gammas.len());
    for (g, r) in gammas.iter().zip(&sweep.results) {
        rows.push(SteadyRow::from_result(config.l, config.j, config.delta, *g, r));
        io::write_timeseries(&config.output_dir.join(gamma_timeseries_file(*g)), r)?;
    }
    io::write_steady_state(&config.output_dir.join(io::GAMMA_SWEEP_FILE), &rows)?;
    io::write_gamma_peak(&config.output_dir.join(io::GAMMA_PEAK_FILE), config.delta, config.l, &sweep.peak)?;
    let mut m = config.manifest();
    m.push(("gammas".into(), join(gammas)));
    m.extend(resolved(&cfg));
    finish_manifest(&config.output_dir, "sweep-gamma", m, started)?;
    println!("gamma_peak = {} (grid spacing {})", sweep.peak.gamma_peak, sweep.peak.spacing);
    Ok(())
}

pub fn sweep_size(config: &RunConfig, sizes: &[usize], overwrite: bool) -> Result<()> {
    let started = Instant::now();
    let gamma = config.gamma()?;
    let cfgs = sizes.iter().map(|&l| config.trajectory(l, gamma)).collect::<Result<Vec<_>>>()?;
    prepare_dir(&config.output_dir, overwrite)?;
    let w = workers()?;
    let mut rows = Vec::with_capacity(sizes.len());
    for cfg in &cfgs {
        let r = engine::run_ensemble::<f64>(cfg, w)?;
        rows.push(steady_row(cfg, &r));
    }
    let points: Vec<_> = rows.iter().map(|r| (r.l, r.s_steady, r.s_steady_err)).collect();
    let fit = engine::size_scaling_fit(&points)?;
    io::write_steady_state(&config.output_dir.join(io::STEADY_STATE_FILE), &rows)?;
    io::write_scaling_fit(&config.output_dir.join(io::SCALING_FIT_FILE), config.delta, gamma, &fit, sizes)?;
    let mut m = config.manifest();
    m.push(("sizes".into(), sizes.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")));
    finish_manifest(&config.output_dir, "sweep-size", m, started)?;
    println!("lambda = {:.6}, intercept = {:.6}, r^2 = {:.4}", fit.lambda, fit.intercept, fit.r_squared);
    Ok(())
}

pub fn gge_table(j: f64, deltas: &[f64], output_dir: Option<&Path>, overwrite: bool) -> Result<()> {
    let started = Instant::now();
    let rows = gge::gge_table(j, deltas)?;
    match output_dir {
        Some(dir) => {
            prepare_dir(dir, overwrite)?;
            io::write_gge(&dir.join(io::GGE_FILE), &rows)?;
            let m = vec![("J".into(), j.to_string()), ("deltas".into(), join(deltas))];
            finish_manifest(dir, "gge", m, started)?;
        }
        None => {
            println!("{}", io::GGE_HEADER.join(","));
            for r in rows {
                println!("{}", [r.delta, r.c_delta, r.tau_over_l, r.nn_pairing].map(io::fmt_real).join(","));
            }
        }
    }
    Ok(())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
}

/// Invariant suite on an L = 8 monitored chain. Returns an integrity error
/// if any bound is exceeded.
pub fn selfcheck() -> Result<()> {
    let params = ModelParams::new(8, 1.0, 2.0, 10.0)?;
    let mut cfg = TrajectoryConfig::new(params, 10.0);
    cfg.n_traj = 2;
    cfg.base_seed = 11;
    cfg.obs_stride = 5;
    cfg.backend = Backend::Nambu;
    cfg.extras = true;
    let nambu = engine::run_ensemble_series::<f64>(&cfg, workers()?)?;
    cfg.backend = Backend::Orbital;
    cfg.extras = false;
    let orbital = engine::run_ensemble_series::<f64>(&cfg, workers()?)?;

    let samples = nambu.iter().flat_map(|s| s.extras.iter().zip(&s.entropy));
    let mut diag = 0.0f64;
    let mut window = 0.0f64;
    let mut complement = 0.0f64;
    for (x, s) in samples {
        diag = diag.max(x.diagnostics.symmetry).max(x.diagnostics.purity).max(x.diagnostics.trace);
        window = window.max(-x.restricted_min).max(x.restricted_max - 1.0);
        complement = complement.max((s - x.entropy_complement).abs());
    }
    let agree = nambu
        .iter()
        .zip(&orbital)
        .flat_map(|(a, b)| a.entropy.iter().zip(&b.entropy))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    // the on-site null holds for unitary dynamics only
    let mut free = TrajectoryConfig::new(ModelParams::new(8, 1.0, 2.0, 0.0)?, 20.0);
    free.obs_stride = 5;
    let onsite = engine::run_ensemble::<f64>(&free, 1)?.max_onsite_pairing;
    let c0 = gge::entropy_density(&ModelParams::new(8, 1.0, 0.0, 0.0)?)?;

    let checks = [
        Check { name: "covariance symmetry, purity, trace", value: diag, bound: 1e-8 },
        Check { name: "restricted spectrum inside [0, 1]", value: window.max(0.0), bound: 1e-10 },
        Check { name: "S(A) = S(complement)", value: complement, bound: 1e-8 },
        Check { name: "orbital and Nambu backends agree", value: agree, bound: 1e-8 },
        Check { name: "on-site pairing vanishes at gamma = 0", value: onsite, bound: 1e-8 },
        Check { name: "c(0) = 2 ln 2", value: (c0 - 2.0 * std::f64::consts::LN_2).abs(), bound: 1e-10 },
    ];
    let mut failed = Vec::new();
    for c in &checks {
        let ok = c.value <= c.bound;
        println!("{} {:<38} {:.3e} (bound {:.0e})", if ok { "ok  " } else { "FAIL" }, c.name, c.value, c.bound);
        if !ok {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Integrity(format!("selfcheck failed: {}", failed.join("; "))))
    }
}

//! Trajectories, ensembles, sweeps and fits.
//!
//! A trajectory alternates one unitary step with a round of stochastic
//! site measurements, sampling observables every `obs_stride` steps. It is
//! a pure function of `(config, traj_id)`: the random stream is seeded from
//! both, and ensemble reduction always runs in ascending id order, so the
//! worker count never changes a single output bit.

use rayon::prelude::*;

use crate::bdg::{build_bdg, build_propagator, evolve_step, BdGPropagator};
use crate::error::{Error, Result};
use crate::gaussian::{Diagnostics, NambuCovariance, ABORT_THRESHOLD};
use crate::gge::{entropy_density, SizeConvention};
use crate::lattice::{InitState, ModelParams, Spin};
use crate::measurement::{measure_site, select_sites, MeasurementRecord, RngStream};
use crate::observables::{
    entropy_of_sites, nn_pairing, onsite_pairing_max, restricted_spectrum, staggered_nn_pairing, Region,
};
use crate::orbital::{OrbitalState, RealSpaceOrbitals, SectorModel};
use crate::scalar::Real;

/// Steps between symmetry / orthonormality repairs.
pub const REPAIR_INTERVAL: usize = 100;
pub const DEFAULT_OBS_STRIDE: usize = 10;

/// State representation used to run trajectories.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// L orbitals of the spin-mixed sector in the Hamiltonian eigenbasis.
    Orbital,
    /// Full Nambu covariance, propagated by `W Γ W†`. Slow; for cross-checks.
    Nambu,
}

/// Steady-state window `[150, 300] · L/32`.
pub fn default_window(l: usize) -> (f64, f64) {
    let s = l as f64 / 32.0;
    (150.0 * s, 300.0 * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub t_max: f64,
    pub window: (f64, f64),
    pub n_traj: usize,
    pub base_seed: u64,
    pub init: InitState,
    /// Entropy is that of sites `1..=cut`.
    pub cut: usize,
    pub obs_stride: usize,
    pub backend: Backend,
    /// Also record occupations, the pairing matrix and covariance diagnostics.
    pub extras: bool,
    pub keep_records: bool,
}

impl TrajectoryConfig {
    /// Defaults: one Néel trajectory, seed 0, half-chain cut, stride 10, the
    /// size-scaled window (or `[t_max/2, t_max]` if that does not fit).
    pub fn new(params: ModelParams, t_max: f64) -> Self {
        let w = default_window(params.l);
        let window = if w.1 <= t_max { w } else { (t_max / 2.0, t_max) };
        TrajectoryConfig {
            params,
            t_max,
            window,
            n_traj: 1,
            base_seed: 0,
            init: InitState::Neel,
            cut: params.l / 2,
            obs_stride: DEFAULT_OBS_STRIDE,
            backend: Backend::Orbital,
            extras: false,
            keep_records: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (ta, tb) = self.window;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(0.0 <= ta && ta < tb && tb <= self.t_max + 1e-9) {
            return Err(Error::Config(format!("window [{ta}, {tb}] must satisfy 0 <= start < end <= t_max")));
        }
        if self.n_traj == 0 {
            return Err(Error::Config("n_traj must be >= 1".into()));
        }
        if self.cut == 0 || self.cut >= self.params.l {
            return Err(Error::Config(format!("cut must be in [1, L-1], got {}", self.cut)));
        }
        if self.obs_stride == 0 {
            return Err(Error::Config("obs_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.params.dt).round() as usize
    }

    fn time(&self, step: usize) -> f64 {
        step as f64 * self.params.dt
    }
}

/// Expensive per-sample observables, recorded only on request.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleExtras {
    /// Flat mode order.
    pub occupations: Vec<f64>,
    /// `⟨c_{i↓} c_{j↑}⟩` as `(re, im)`, row-major over 0-based `(i, j)`.
    pub pairing: Vec<(f64, f64)>,
    pub entropy_complement: f64,
    pub diagnostics: Diagnostics<f64>,
    /// Extremes of the Nambu-restricted spectrum of the cut region.
    pub restricted_min: f64,
    pub restricted_max: f64,
}

/// Sampled time series of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySeries {
    pub traj_id: u64,
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub nn_pairing: Vec<f64>,
    pub staggered: Vec<(f64, f64)>,
    pub onsite_max: Vec<f64>,
    pub extras: Vec<SampleExtras>,
    pub records: Vec<MeasurementRecord>,
    pub n_measurements: u64,
}

impl TrajectorySeries {
    fn with_capacity(traj_id: u64, n: usize) -> Self {
        TrajectorySeries {
            traj_id,
            times: Vec::with_capacity(n),
            entropy: Vec::with_capacity(n),
            nn_pairing: Vec::with_capacity(n),
            staggered: Vec::with_capacity(n),
            onsite_max: Vec::with_capacity(n),
            extras: Vec::new(),
            records: Vec::new(),
            n_measurements: 0,
        }
    }

    /// Mean of `values` over the samples with `t ∈ [ta, tb]`.
    pub fn window_mean(&self, values: &[f64], window: (f64, f64)) -> Result<f64> {
        window_mean(&self.times, values, window)
    }
}

fn window_mean(times: &[f64], values: &[f64], (ta, tb): (f64, f64)) -> Result<f64> {
    let eps = 1e-9;
    let (sum, n) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= ta - eps && **t <= tb + eps)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    if n == 0 {
        return Err(Error::Config(format!("no samples inside window [{ta}, {tb}]")));
    }
    Ok(sum / n as f64)
}

/// Mean and standard error (`sd/√n`, zero for `n = 1`), two-pass.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if values.iter().all(|v| *v == values[0]) {
        // also covers n = 1; avoids rounding noise for replicated series
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Time average over `window` in each series, then mean and standard
/// error across series.
pub fn steady_state_value(times: &[f64], series: &[Vec<f64>], window: (f64, f64)) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no trajectories".into()));
    }
    let avgs = series.iter().map(|s| window_mean(times, s, window)).collect::<Result<Vec<_>>>()?;
    Ok(mean_stderr(&avgs))
}

/// Everything that can be built once per ensemble.
enum Prepared<T: Real> {
    Orbital(SectorModel<T>),
    Nambu(BdGPropagator<T>),
}

fn prepare<T: Real>(cfg: &TrajectoryConfig) -> Result<Prepared<T>> {
    cfg.validate()?;
    Ok(match cfg.backend {
        Backend::Orbital => Prepared::Orbital(SectorModel::new(&cfg.params)?),
        Backend::Nambu => {
            let h = build_bdg::<T>(&cfg.params)?;
            Prepared::Nambu(build_propagator(&h, T::of(cfg.params.dt))?)
        }
    })
}

fn initial_nambu<T: Real>(init: InitState, l: usize) -> Result<NambuCovariance<T>> {
    match init {
        InitState::Neel => NambuCovariance::neel(l),
        InitState::Vacuum => NambuCovariance::vacuum(l),
    }
}

fn extras_of<T: Real>(g: &NambuCovariance<T>, cfg: &TrajectoryConfig) -> Result<SampleExtras> {
    let l = g.l();
    let region = Region::prefix(cfg.cut, l)?;
    let spec = restricted_spectrum(g, &region.sites())?;
    let f = |x: T| x.to_f64_lossy();
    let d = g.diagnostics();
    let mut pairing = Vec::with_capacity(l * l);
    for i in 0..l {
        for j in 0..l {
            let z = g.gamma12[(l + i, j)];
            pairing.push((f(z.re), f(z.im)));
        }
    }
    Ok(SampleExtras {
        occupations: (0..2 * l).map(|i| f(g.gamma22[(i, i)].re)).collect(),
        pairing,
        entropy_complement: f(entropy_of_sites(g, &region.complement(l))?),
        diagnostics: Diagnostics { symmetry: f(d.symmetry), purity: f(d.purity), trace: f(d.trace) },
        restricted_min: spec.iter().fold(f64::INFINITY, |m, x| m.min(f(*x))),
        restricted_max: spec.iter().fold(f64::NEG_INFINITY, |m, x| m.max(f(*x))),
    })
}

fn push_nambu<T: Real>(
    out: &mut TrajectorySeries,
    g: &NambuCovariance<T>,
    cfg: &TrajectoryConfig,
    t: f64,
) -> Result<()> {
    let sites: Vec<usize> = (1..=cfg.cut).collect();
    let z = staggered_nn_pairing(g);
    out.times.push(t);
    out.entropy.push(entropy_of_sites(g, &sites)?.to_f64_lossy());
    out.nn_pairing.push(nn_pairing(g).to_f64_lossy());
    out.staggered.push((z.re.to_f64_lossy(), z.im.to_f64_lossy()));
    out.onsite_max.push(onsite_pairing_max(g).to_f64_lossy());
    if cfg.extras {
        out.extras.push(extras_of(g, cfg)?);
    }
    Ok(())
}

fn push_orbital<T: Real>(
    out: &mut TrajectorySeries,
    rs: &RealSpaceOrbitals<T>,
    cfg: &TrajectoryConfig,
    t: f64,
) -> Result<()> {
    let sites: Vec<usize> = (1..=cfg.cut).collect();
    let z = rs.staggered_nn_pairing();
    out.times.push(t);
    out.entropy.push(rs.entropy_of_sites(&sites)?.to_f64_lossy());
    out.nn_pairing.push(rs.nn_pairing().to_f64_lossy());
    out.staggered.push((z.re.to_f64_lossy(), z.im.to_f64_lossy()));
    out.onsite_max.push(rs.onsite_pairing_max().to_f64_lossy());
    if cfg.extras {
        out.extras.push(extras_of(&rs.to_nambu(), cfg)?);
    }
    Ok(())
}

fn at_step(traj_id: u64, step: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Trajectory { traj_id, step, source: Box::new(e) }
}

fn run_prepared<T: Real>(prep: &Prepared<T>, cfg: &TrajectoryConfig, traj_id: u64) -> Result<TrajectorySeries> {
    let l = cfg.params.l;
    let p = cfg.params.p();
    let n_steps = cfg.steps();
    let mut out = TrajectorySeries::with_capacity(traj_id, n_steps / cfg.obs_stride + 1);
    let mut rng = RngStream::for_trajectory(cfg.base_seed, traj_id);
    let abort = T::tol(ABORT_THRESHOLD);
    match prep {
        Prepared::Orbital(model) => {
            let init = OrbitalState::initial(model, cfg.init);
            if p == 0.0 {
                // closed-form evolution straight to each sample time
                for step in (0..=n_steps).step_by(cfg.obs_stride) {
                    let t = cfg.time(step);
                    let mut s = init.clone();
                    s.evolve_by(model, T::of(t));
                    push_orbital(&mut out, &s.real_space(model), cfg, t).map_err(at_step(traj_id, step))?;
                }
                return Ok(out);
            }
            let mut s = init;
            push_orbital(&mut out, &s.real_space(model), cfg, 0.0).map_err(at_step(traj_id, 0))?;
            for step in 1..=n_steps {
                let t = cfg.time(step);
                s.step(model);
                for site in select_sites(&mut rng, l, p) {
                    for spin in Spin::BOTH {
                        let x = rng.uniform();
                        let rec = s.measure_mode(model, site, spin, x, t).map_err(at_step(traj_id, step))?;
                        out.n_measurements += 1;
                        if cfg.keep_records {
                            out.records.push(rec);
                        }
                    }
                }
                if step % REPAIR_INTERVAL == 0 {
                    let drift = s.reorthonormalize();
                    if !(drift <= abort) {
                        return Err(at_step(traj_id, step)(Error::Integrity(format!(
                            "orbital orthonormality drift {drift:e} exceeds abort threshold"
                        ))));
                    }
                }
                if step % cfg.obs_stride == 0 {
                    push_orbital(&mut out, &s.real_space(model), cfg, t).map_err(at_step(traj_id, step))?;
                }
            }
        }
        Prepared::Nambu(prop) => {
            let mut g = initial_nambu::<T>(cfg.init, l)?;
            push_nambu(&mut out, &g, cfg, 0.0).map_err(at_step(traj_id, 0))?;
            for step in 1..=n_steps {
                let t = cfg.time(step);
                let res: Result<()> = (|| {
                    evolve_step(&mut g, prop)?;
                    for site in select_sites(&mut rng, l, p) {
                        let recs = measure_site(&mut g, site, &mut rng, t)?;
                        out.n_measurements += 2;
                        if cfg.keep_records {
                            out.records.extend(recs);
                        }
                    }
                    if step % REPAIR_INTERVAL == 0 {
                        g.enforce_symmetry(abort)?;
                    }
                    if step % cfg.obs_stride == 0 {
                        push_nambu(&mut out, &g, cfg, t)?;
                    }
                    Ok(())
                })();
                res.map_err(at_step(traj_id, step))?;
            }
        }
    }
    Ok(out)
}

/// One trajectory; a deterministic function of `(cfg, traj_id)`.
pub fn run_trajectory<T: Real>(cfg: &TrajectoryConfig, traj_id: u64) -> Result<TrajectorySeries> {
    run_prepared(&prepare::<T>(cfg)?, cfg, traj_id)
}

/// Trajectory-averaged results of an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean_s: Vec<f64>,
    pub stderr_s: Vec<f64>,
    pub mean_nn_pairing: Vec<f64>,
    pub stderr_nn_pairing: Vec<f64>,
    /// Real part of the staggered nearest-neighbour pairing, averaged.
    pub mean_staggered: Vec<f64>,
    pub s_steady: f64,
    pub s_steady_err: f64,
    pub pairing_steady: f64,
    pub pairing_steady_err: f64,
    pub staggered_steady: f64,
    pub staggered_steady_err: f64,
    /// Window average of each trajectory's entropy, by trajectory id.
    pub window_entropy: Vec<f64>,
    pub max_onsite_pairing: f64,
    pub n_measurements: u64,
    pub n_traj_effective: usize,
    pub window: (f64, f64),
}

/// Runs `cfg.n_traj` trajectories on `workers` threads (0 picks rayon's
/// default) and reduces them in id order.
pub fn run_ensemble<T: Real>(cfg: &TrajectoryConfig, workers: usize) -> Result<EnsembleResult> {
    let series = run_ensemble_series::<T>(cfg, workers)?;
    reduce(&series, cfg.window)
}

/// The raw per-trajectory series behind [`run_ensemble`].
pub fn run_ensemble_series<T: Real>(cfg: &TrajectoryConfig, workers: usize) -> Result<Vec<TrajectorySeries>> {
    let prep = prepare::<T>(cfg)?;
    if cfg.params.p() == 0.0 {
        // without measurements every trajectory is the same
        let one = run_prepared(&prep, cfg, 0)?;
        return Ok((0..cfg.n_traj as u64).map(|id| TrajectorySeries { traj_id: id, ..one.clone() }).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<TrajectorySeries>> =
        pool.install(|| (0..cfg.n_traj as u64).into_par_iter().map(|id| run_prepared(&prep, cfg, id)).collect());
    results.into_iter().collect()
}

fn column_stats(series: &[TrajectorySeries], pick: impl Fn(&TrajectorySeries) -> &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n_t = pick(&series[0]).len();
    let mut means = Vec::with_capacity(n_t);
    let mut errs = Vec::with_capacity(n_t);
    let mut col = vec![0.0; series.len()];
    for i in 0..n_t {
        for (c, s) in col.iter_mut().zip(series) {
            *c = pick(s)[i];
        }
        let (m, e) = mean_stderr(&col);
        means.push(m);
        errs.push(e);
    }
    (means, errs)
}

/// Ensemble statistics of already-computed series.
pub fn reduce(series: &[TrajectorySeries], window: (f64, f64)) -> Result<EnsembleResult> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no trajectories".into()));
    }
    let times = series[0].times.clone();
    if series.iter().any(|s| s.times != times) {
        return Err(Error::Integrity("trajectories sampled on different time grids".into()));
    }
    let (mean_s, stderr_s) = column_stats(series, |s| &s.entropy);
    let (mean_nn, stderr_nn) = column_stats(series, |s| &s.nn_pairing);
    let stag: Vec<Vec<f64>> = series.iter().map(|s| s.staggered.iter().map(|z| z.0).collect()).collect();
    let mean_staggered = (0..times.len())
        .map(|i| stag.iter().map(|s| s[i]).sum::<f64>() / series.len() as f64)
        .collect();
    let window_entropy = series.iter().map(|s| s.window_mean(&s.entropy, window)).collect::<Result<Vec<_>>>()?;
    let (s_steady, s_steady_err) = mean_stderr(&window_entropy);
    let pair: Vec<Vec<f64>> = series.iter().map(|s| s.nn_pairing.clone()).collect();
    let (pairing_steady, pairing_steady_err) = steady_state_value(&times, &pair, window)?;
    let (staggered_steady, staggered_steady_err) = steady_state_value(&times, &stag, window)?;
    Ok(EnsembleResult {
        mean_s,
        stderr_s,
        mean_nn_pairing: mean_nn,
        stderr_nn_pairing: stderr_nn,
        mean_staggered,
        s_steady,
        s_steady_err,
        pairing_steady,
        pairing_steady_err,
        staggered_steady,
        staggered_steady_err,
        window_entropy,
        max_onsite_pairing: series.iter().flat_map(|s| s.onsite_max.iter()).fold(0.0, |m, x| m.max(*x)),
        n_measurements: series.iter().map(|s| s.n_measurements).sum(),
        n_traj_effective: series.len(),
        window,
        times,
    })
}

/// Location of the largest steady-state entropy on a γ grid.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GammaPeak {
    pub gamma_peak: f64,
    /// Largest spacing to a neighbouring grid point.
    pub spacing: f64,
}

#[derive(Clone, Debug)]
pub struct GammaSweep {
    pub gammas: Vec<f64>,
    pub results: Vec<EnsembleResult>,
    pub peak: GammaPeak,
}

/// Discrete argmax of `values` over `grid`; ties go to the smaller γ.
pub fn find_peak(grid: &[f64], values: &[f64]) -> Result<GammaPeak> {
    if grid.is_empty() || grid.len() != values.len() {
        return Err(Error::InsufficientData("peak search needs matching non-empty grid and values".into()));
    }
    let mut best = 0;
    for i in 1..grid.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    let left = if best > 0 { grid[best] - grid[best - 1] } else { 0.0 };
    let right = if best + 1 < grid.len() { grid[best + 1] - grid[best] } else { 0.0 };
    Ok(GammaPeak { gamma_peak: grid[best], spacing: left.max(right) })
}

pub fn check_gamma_grid(gammas: &[f64]) -> Result<()> {
    if gammas.len() < 2 {
        return Err(Error::Config("γ grid needs at least two values".into()));
    }
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("γ grid must be strictly ascending".into()));
    }
    Ok(())
}

/// One ensemble per γ, everything else from `cfg`.
pub fn gamma_sweep<T: Real>(cfg: &TrajectoryConfig, gammas: &[f64], workers: usize) -> Result<GammaSweep> {
    check_gamma_grid(gammas)?;
    let mut results = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let mut c = cfg.clone();
        c.params.gamma = g;
        results.push(run_ensemble::<T>(&c, workers)?);
    }
    let s: Vec<f64> = results.iter().map(|r| r.s_steady).collect();
    Ok(GammaSweep { gammas: gammas.to_vec(), peak: find_peak(gammas, &s)?, results })
}

/// `S = λ ln²L + c`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Weighted least squares of `s` on `ln²L` from `(L, s, err)` triples.
/// Weights are `1/err²` when every error is positive, uniform otherwise.
pub fn size_scaling_fit(points: &[(usize, f64, f64)]) -> Result<ScalingFit> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 distinct sizes, got {}", sizes.len())));
    }
    let weighted = points.iter().all(|p| p.2 > 0.0);
    let w = |p: &(usize, f64, f64)| if weighted { 1.0 / (p.2 * p.2) } else { 1.0 };
    let x = |p: &(usize, f64, f64)| (p.0 as f64).ln().powi(2);
    let sw: f64 = points.iter().map(w).sum();
    let mx = points.iter().map(|p| w(p) * x(p)).sum::<f64>() / sw;
    let my = points.iter().map(|p| w(p) * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| w(p) * (x(p) - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| w(p) * (x(p) - mx) * (p.1 - my)).sum();
    let lambda = sxy / sxx;
    let intercept = my - lambda * mx;
    let ss_res: f64 = points.iter().map(|p| w(p) * (p.1 - lambda * x(p) - intercept).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| w(p) * (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ScalingFit { lambda, intercept, r_squared })
}

/// Outcome of measuring [`SizeConvention`] on an unmonitored run.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Calibration {
    pub l: usize,
    pub plateau: f64,
    pub c_delta: f64,
    pub convention: SizeConvention,
    /// Relative deviation of the plateau from `c_Δ·L` and from `c_Δ·L/2`.
    pub off_chain_length: f64,
    pub off_subsystem: f64,
}

/// Measures the size factor from the window-averaged half-chain entropy of
/// an unmonitored `Δ = 0` Néel quench, where `c_Δ = 2 ln 2` exactly.
pub fn calibrate_convention(l: usize, obs_stride: usize) -> Result<Calibration> {
    let params = ModelParams::new(l, 1.0, 0.0, 0.0)?;
    let mut cfg = TrajectoryConfig::new(params, default_window(l).1);
    cfg.obs_stride = obs_stride;
    calibration_from(&run_ensemble::<f64>(&cfg, 1)?, l)
}

/// [`calibrate_convention`] from an existing `Δ = 0`, `γ = 0` result.
pub fn calibration_from(r: &EnsembleResult, l: usize) -> Result<Calibration> {
    let c = entropy_density(&ModelParams::new(l, 1.0, 0.0, 0.0)?)?;
    let off = |conv: SizeConvention| r.s_steady / (c * conv.length(l)) - 1.0;
    Ok(Calibration {
        l,
        plateau: r.s_steady,
        c_delta: c,
        convention: SizeConvention { factor: r.s_steady / (c * l as f64) },
        off_chain_length: off(SizeConvention::CHAIN_LENGTH),
        off_subsystem: off(SizeConvention::SUBSYSTEM),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_helpers() {
        assert_eq!(mean_stderr(&[3.0]), (3.0, 0.0));
        let (m, e) = mean_stderr(&[1.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((e - 1.5).abs() < 1e-15);
        let t = vec![0.0, 1.0, 2.0, 3.0];
        let (m, e) = steady_state_value(&t, &[vec![5.0; 4]], (1.0, 3.0)).unwrap();
        assert_eq!((m, e), (5.0, 0.0));
        assert!(steady_state_value(&t, &[vec![5.0; 4]], (3.5, 4.0)).is_err());
    }

    #[test]
    fn peak_ties_go_low() {
        let p = find_peak(&[0.0, 2.0, 4.0, 8.0], &[1.0, 3.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.gamma_peak, 2.0);
        assert_eq!(p.spacing, 2.0);
        let p = find_peak(&[0.0, 2.0, 4.0, 8.0], &[1.0, 2.0, 3.0, 3.5]).unwrap();
        assert_eq!((p.gamma_peak, p.spacing), (8.0, 4.0));
    }

    #[test]
    fn grid_validation() {
        assert!(check_gamma_grid(&[0.0]).is_err());
        assert!(check_gamma_grid(&[0.0, 2.0, 1.0]).is_err());
        assert!(check_gamma_grid(&[0.0, 0.0]).is_err());
        assert!(check_gamma_grid(&[0.0, 10.0]).is_ok());
    }

    #[test]
    fn config_defaults_and_validation() {
        let p = ModelParams::new(32, 1.0, 1.0, 10.0).unwrap();
        let c = TrajectoryConfig::new(p, 300.0);
        assert_eq!(c.window, (150.0, 300.0));
        assert_eq!(c.steps(), 30000);
        c.validate().unwrap();
        let c = TrajectoryConfig::new(ModelParams::new(8, 1.0, 1.0, 0.0).unwrap(), 10.0);
        assert_eq!(c.window, (5.0, 10.0));
        let mut bad = c.clone();
        bad.window = (6.0, 5.0);
        assert!(bad.validate().is_err());
        bad = c.clone();
        bad.n_traj = 0;
        assert!(bad.validate().is_err());
    }
}

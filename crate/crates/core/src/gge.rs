//! Quasiparticle picture of the unmonitored quench.
//!
//! After a quench from the Néel (or vacuum) state the BCS chain relaxes
//! locally to a generalized Gibbs ensemble fixed by the conserved
//! Bogoliubov occupations. Entropy, saturation time and the surviving
//! nearest-neighbour pairing all reduce to Brillouin-zone integrals of the
//! dispersion `E_k = √(ξ_k² + Δ²)`, `ξ_k = −2J cos k`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::lattice::ModelParams;
use crate::observables::binary_entropy;
use crate::quadrature::{golden_section_max, integrate};

/// Absolute tolerance for every zone integral.
pub const QUAD_TOL: f64 = 1e-10;
const E_FLOOR: f64 = 1e-300;

/// Single-momentum data of the quasiparticle spectrum.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QuasiparticleSpectrum {
    /// Momentum wrapped into `[−π, π)`.
    pub k: f64,
    pub xi: f64,
    pub e: f64,
    /// Coherence factors; `None` when `Δ = J = 0` leaves them undefined.
    pub uv: Option<(f64, f64)>,
    pub vg: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl QuasiparticleSpectrum {
    pub fn coherence(&self) -> Result<(f64, f64)> {
        self.uv.ok_or_else(|| Error::Degenerate("coherence factors undefined at Δ = J = 0".into()))
    }
}

pub fn wrap_momentum(k: f64) -> f64 {
    let w = (k + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

#[inline]
fn energy(j: f64, delta: f64, k: f64) -> (f64, f64) {
    let xi = -2.0 * j * k.cos();
    (xi, (xi * xi + delta * delta).sqrt().max(E_FLOOR))
}

#[inline]
fn lambda_plus(j: f64, delta: f64, k: f64) -> f64 {
    let (_, e) = energy(j, delta, k);
    0.5 + delta / (2.0 * e)
}

#[inline]
fn group_velocity(j: f64, delta: f64, k: f64) -> f64 {
    let (_, e) = energy(j, delta, k);
    -2.0 * j * j * (2.0 * k).sin() / e
}

pub fn spectrum_at(k: f64, params: &ModelParams) -> QuasiparticleSpectrum {
    let k = wrap_momentum(k);
    let (j, delta) = (params.j, params.delta);
    let (xi, e) = energy(j, delta, k);
    let uv = if j == 0.0 && delta == 0.0 {
        None
    } else {
        let r = (xi / e).clamp(-1.0, 1.0);
        Some(((0.5 * (1.0 + r)).sqrt(), (0.5 * (1.0 - r)).sqrt()))
    };
    let lp = 0.5 + delta / (2.0 * e);
    QuasiparticleSpectrum {
        k,
        xi,
        e,
        uv,
        vg: group_velocity(j, delta, k),
        lambda_plus: lp,
        lambda_minus: 1.0 - lp,
    }
}

fn zone_average(f: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(integrate(f, -PI, PI, QUAD_TOL * 2.0 * PI)?.value / (2.0 * PI))
}

/// `(1/L) Σ_n f(2πn/L)`.
fn discrete_average(l: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::Config("momentum grid needs L >= 1".into()));
    }
    Ok((0..l).map(|n| f(2.0 * PI * n as f64 / l as f64)).sum::<f64>() / l as f64)
}

/// Steady-state entropy per site, `c_Δ = 2 ∫ dk/2π F(λ⁺_k)`.
pub fn entropy_density(params: &ModelParams) -> Result<f64> {
    let (j, d) = (params.j, params.delta);
    if d == 0.0 {
        return Ok(2.0 * LN_2);
    }
    Ok(2.0 * zone_average(|k| binary_entropy(lambda_plus(j, d, k)))?)
}

/// [`entropy_density`] with the integral replaced by the `L`-point momentum sum.
pub fn entropy_density_discrete(params: &ModelParams, l: usize) -> Result<f64> {
    let (j, d) = (params.j, params.delta);
    Ok(2.0 * discrete_average(l, |k| binary_entropy(lambda_plus(j, d, k)))?)
}

/// `max_k |v_g(k)|` and its location in `[0, π/2]`.
pub fn max_group_velocity(params: &ModelParams) -> Result<(f64, f64)> {
    if params.j == 0.0 {
        return Err(Error::Numeric("flat band: J = 0 gives no propagation".into()));
    }
    let (j, d) = (params.j, params.delta);
    let (k, v) = golden_section_max(|k| group_velocity(j, d, k).abs(), 0.0, PI / 2.0, 1e-12);
    Ok((v, k))
}

/// Time for the light cone to cross a chain of `l` sites, `l / (2 v_max)`.
pub fn saturation_time(params: &ModelParams, l: usize) -> Result<f64> {
    let (v, _) = max_group_velocity(params)?;
    Ok(l as f64 / (2.0 * v))
}

fn pairing_integrand(j: f64, d: f64, k: f64) -> f64 {
    let xi = -2.0 * j * k.cos();
    let c = k.cos();
    c * c / (xi * xi + d * d)
}

/// Time-averaged `⟨c_{j↓} c_{j+1,↑}⟩` after a Néel quench, staggered in `j`.
pub fn nn_pairing_neel(params: &ModelParams, j: usize) -> Result<f64> {
    Ok(stagger(j) * nn_pairing_vacuum(params)?)
}

/// Time-averaged nearest-neighbour pairing after a vacuum quench (uniform).
pub fn nn_pairing_vacuum(params: &ModelParams) -> Result<f64> {
    let (j, d) = (params.j, params.delta);
    if j == 0.0 || d == 0.0 {
        return Ok(0.0);
    }
    Ok(j * d * zone_average(|k| pairing_integrand(j, d, k))?)
}

/// [`nn_pairing_neel`] on the `L`-point momentum grid.
pub fn nn_pairing_neel_discrete(params: &ModelParams, l: usize, j: usize) -> Result<f64> {
    let (jj, d) = (params.j, params.delta);
    if jj == 0.0 || d == 0.0 {
        return Ok(0.0);
    }
    Ok(stagger(j) * jj * d * discrete_average(l, |k| pairing_integrand(jj, d, k))?)
}

fn stagger(j: usize) -> f64 {
    if j % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Multiplier `κ` in the plateau prediction `S = κ · c_Δ · L` for the
/// half-chain entropy of an `L`-site ring. Measured once by
/// [`crate::engine::calibrate_convention`]; the two textbook readings are
/// provided as constants.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SizeConvention {
    pub factor: f64,
}

impl SizeConvention {
    /// `S = c_Δ · L`.
    pub const CHAIN_LENGTH: SizeConvention = SizeConvention { factor: 1.0 };
    /// `S = c_Δ · L/2`, the size of the half chain.
    pub const SUBSYSTEM: SizeConvention = SizeConvention { factor: 0.5 };

    pub fn length(self, l: usize) -> f64 {
        self.factor * l as f64
    }
}

/// Plateau entropy and saturation time for a chain of `l` sites.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GgeCurve {
    pub s_plateau: f64,
    pub tau: f64,
}

pub fn gge_entropy_curve(params: &ModelParams, l: usize, convention: SizeConvention) -> Result<GgeCurve> {
    Ok(GgeCurve {
        s_plateau: entropy_density(params)? * convention.length(l),
        tau: saturation_time(params, l)?,
    })
}

/// One row of the Δ-grid table.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GgeRow {
    pub delta: f64,
    pub c_delta: f64,
    pub tau_over_l: f64,
    pub nn_pairing: f64,
}

pub fn gge_table(j: f64, deltas: &[f64]) -> Result<Vec<GgeRow>> {
    if deltas.is_empty() {
        return Err(Error::Config("empty Δ grid".into()));
    }
    deltas
        .iter()
        .map(|&delta| {
            if !(delta >= 0.0) {
                return Err(Error::Config(format!("Δ must be >= 0, got {delta}")));
            }
            let p = ModelParams { l: 2, j, delta, gamma: 0.0, dt: ModelParams::DEFAULT_DT };
            Ok(GgeRow {
                delta,
                c_delta: entropy_density(&p)?,
                tau_over_l: saturation_time(&p, 1)?,
                nn_pairing: nn_pairing_vacuum(&p)?,
            })
        })
        .collect()
}

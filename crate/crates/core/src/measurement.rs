//! Spin-resolved projective charge measurements on Gaussian states.
//!
//! # Random stream
//!
//! Every trajectory owns a [`RngStream`]: ChaCha8 seeded from
//! `splitmix64`-expanded 64-bit seeds. Uniforms are `(next_u64 >> 11) · 2⁻⁵³`,
//! i.e. 53-bit values on `[0, 1)`. Per time step the schedule is fixed:
//! `L` site-selection draws in ascending site order, then two outcome draws
//! (↑ then ↓) for each selected site, again in ascending order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::{NambuCovariance, ABORT_THRESHOLD};
use crate::lattice::{flatten, Spin};
use crate::scalar::{re, Real, C};

/// Born probabilities within this distance of 0 or 1 are treated as certain.
pub const P_MIN: f64 = 1e-12;

/// Tolerance on a raw `⟨n⟩` before it is clamped into `[0, 1]`.
pub const BORN_TOLERANCE: f64 = 1e-8;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the splitmix64 generator: advances `state` and returns the
/// mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `traj_id`: splitmix64 output after seeding with
/// `base_seed ^ traj_id·φ` (φ the 64-bit golden-ratio constant).
pub fn trajectory_seed(base_seed: u64, traj_id: u64) -> u64 {
    let mut s = base_seed ^ traj_id.wrapping_mul(GOLDEN);
    splitmix64(&mut s)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        RngStream { seed, rng: ChaCha8Rng::from_seed(key), draws: 0 }
    }

    pub fn for_trajectory(base_seed: u64, traj_id: u64) -> Self {
        Self::new(trajectory_seed(base_seed, traj_id))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of uniforms consumed so far.
    pub fn position(&self) -> u64 {
        self.draws
    }

    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Occupied,
    Empty,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub t: f64,
    pub site: usize,
    pub spin: Spin,
    pub outcome: Outcome,
    /// `⟨n⟩` just before the collapse.
    pub born_p: f64,
}

/// Sites (1-based) chosen for measurement this step. Always consumes
/// exactly `l` uniforms.
pub fn select_sites(rng: &mut RngStream, l: usize, p: f64) -> Vec<usize> {
    (1..=l).filter(|_| rng.uniform() < p).collect()
}

/// Outcome for Born probability `q` and uniform `x`, plus whether the
/// branch was forced by `q` being within [`P_MIN`] of 0 or 1.
pub fn decide_outcome(q: f64, x: f64) -> (Outcome, bool) {
    if q < P_MIN {
        (Outcome::Empty, true)
    } else if q > 1.0 - P_MIN {
        (Outcome::Occupied, true)
    } else if x <= q {
        (Outcome::Occupied, false)
    } else {
        (Outcome::Empty, false)
    }
}

pub(crate) fn clamp_born<T: Real>(raw: T) -> Result<T> {
    let tol = T::tol(BORN_TOLERANCE);
    if raw.is_nan() || raw < -tol || raw > T::one() + tol {
        return Err(Error::Integrity(format!("Born probability {:e} outside [0, 1]", raw)));
    }
    Ok(raw.max(T::zero()).min(T::one()))
}

pub fn born_probability<T: Real>(state: &NambuCovariance<T>, site: usize, spin: Spin) -> Result<T> {
    let a = flatten(site, spin, state.l())?;
    clamp_born(state.gamma22[(a, a)].re)
}

fn forbidden(site: usize, spin: Spin, what: &str, q: f64) -> Error {
    Error::BranchForbidden(format!("{what} outcome at site {site} {spin} has probability {q:e}"))
}

/// Collapse onto `n_a = 1`:
///
/// `Γ²²_ij += δ_ia δ_ja − (Γ²²_ia Γ²²_aj + Γ¹²_ja (Γ¹²_ai)*) / ⟨n⟩`
/// `Γ¹²_ij += (Γ¹²_ja Γ²²_ai − Γ¹²_ia Γ²²_aj) / ⟨n⟩`
pub fn project_occupied<T: Real>(state: &mut NambuCovariance<T>, site: usize, spin: Spin) -> Result<()> {
    let a = flatten(site, spin, state.l())?;
    let q = born_probability(state, site, spin)?;
    if q < T::of(P_MIN) {
        return Err(forbidden(site, spin, "occupied", q.to_f64_lossy()));
    }
    let n = state.modes();
    let inv = T::one() / q;
    let g22_col: Vec<C<T>> = (0..n).map(|i| state.gamma22[(i, a)]).collect();
    let g22_row: Vec<C<T>> = (0..n).map(|j| state.gamma22[(a, j)]).collect();
    let g12_col: Vec<C<T>> = (0..n).map(|i| state.gamma12[(i, a)]).collect();
    let g12_row: Vec<C<T>> = (0..n).map(|j| state.gamma12[(a, j)]).collect();
    for j in 0..n {
        for i in 0..n {
            let d = g22_col[i] * g22_row[j] + g12_col[j] * g12_row[i].conj();
            state.gamma22[(i, j)] -= d.scale(inv);
            let e = g12_col[j] * g22_row[i] - g12_col[i] * g22_row[j];
            state.gamma12[(i, j)] += e.scale(inv);
        }
    }
    state.gamma22[(a, a)] += re(T::one());
    Ok(())
}

/// Collapse onto `n_a = 0`:
///
/// `Γ²²_ij += −δ_ia δ_ja + (Γ¹²_ja (Γ¹²_ai)* + (δ_ia − Γ²²_ia)(δ_aj − Γ²²_aj)) / (1 − ⟨n⟩)`
/// `Γ¹²_ij += (Γ¹²_ja (δ_ai − Γ²²_ai) − Γ¹²_ia (δ_aj − Γ²²_aj)) / (1 − ⟨n⟩)`
pub fn project_empty<T: Real>(state: &mut NambuCovariance<T>, site: usize, spin: Spin) -> Result<()> {
    let a = flatten(site, spin, state.l())?;
    let q = born_probability(state, site, spin)?;
    let m = T::one() - q;
    if m < T::of(P_MIN) {
        return Err(forbidden(site, spin, "empty", m.to_f64_lossy()));
    }
    let n = state.modes();
    let inv = T::one() / m;
    let delta = |i: usize| if i == a { re(T::one()) } else { re(T::zero()) };
    let h_col: Vec<C<T>> = (0..n).map(|i| delta(i) - state.gamma22[(i, a)]).collect();
    let h_row: Vec<C<T>> = (0..n).map(|j| delta(j) - state.gamma22[(a, j)]).collect();
    let g12_col: Vec<C<T>> = (0..n).map(|i| state.gamma12[(i, a)]).collect();
    let g12_row: Vec<C<T>> = (0..n).map(|j| state.gamma12[(a, j)]).collect();
    for j in 0..n {
        for i in 0..n {
            let d = g12_col[j] * g12_row[i].conj() + h_col[i] * h_row[j];
            state.gamma22[(i, j)] += d.scale(inv);
            let e = g12_col[j] * h_row[i] - g12_col[i] * h_row[j];
            state.gamma12[(i, j)] += e.scale(inv);
        }
    }
    state.gamma22[(a, a)] -= re(T::one());
    Ok(())
}

/// Certain outcome: set the occupation exactly and drop the mode's
/// couplings, which the projection would remove up to `O(P_MIN)`.
fn pin<T: Real>(state: &mut NambuCovariance<T>, a: usize, outcome: Outcome) {
    let n = state.modes();
    for i in 0..n {
        state.gamma22[(i, a)] = re(T::zero());
        state.gamma22[(a, i)] = re(T::zero());
        state.gamma12[(i, a)] = re(T::zero());
        state.gamma12[(a, i)] = re(T::zero());
    }
    state.gamma22[(a, a)] = match outcome {
        Outcome::Occupied => re(T::one()),
        Outcome::Empty => re(T::zero()),
    };
}

/// Measures one spin species at `site` with the uniform `x`.
pub fn measure_mode<T: Real>(
    state: &mut NambuCovariance<T>,
    site: usize,
    spin: Spin,
    x: f64,
    t: f64,
) -> Result<MeasurementRecord> {
    let a = flatten(site, spin, state.l())?;
    let q = born_probability(state, site, spin)?.to_f64_lossy();
    let (outcome, forced) = decide_outcome(q, x);
    if forced {
        pin(state, a, outcome);
    } else {
        match outcome {
            Outcome::Occupied => project_occupied(state, site, spin)?,
            Outcome::Empty => project_empty(state, site, spin)?,
        }
    }
    Ok(MeasurementRecord { t, site, spin, outcome, born_p: q })
}

/// Measures `n_{site,↑}` and then `n_{site,↓}` on the collapsed state,
/// drawing one uniform for each, and repairs symmetry drift afterwards.
pub fn measure_site<T: Real>(
    state: &mut NambuCovariance<T>,
    site: usize,
    rng: &mut RngStream,
    t: f64,
) -> Result<[MeasurementRecord; 2]> {
    let x_up = rng.uniform();
    let up = measure_mode(state, site, Spin::Up, x_up, t)?;
    let x_dn = rng.uniform();
    let dn = measure_mode(state, site, Spin::Down, x_dn, t)?;
    state.enforce_symmetry(T::tol(ABORT_THRESHOLD))?;
    Ok([up, dn])
}

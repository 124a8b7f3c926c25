//! Quantities read off a Nambu covariance matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::NambuCovariance;
use crate::lattice::{flatten, Spin};
use crate::scalar::{cabs, Real, C};

/// Allowed excursion of restricted eigenvalues outside `[0, 1]`.
pub const EIGEN_WINDOW: f64 = 1e-10;

/// `F(x) = −x ln x − (1 − x) ln(1 − x)`, with `x` clamped to `[0, 1]`.
pub fn binary_entropy<T: Real>(x: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    let h = |p: T| if p > T::zero() { -p * p.ln() } else { T::zero() };
    h(x) + h(T::one() - x)
}

/// Contiguous block of sites `[start, end]`, 1-based, both spins included.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub start: usize,
    pub end: usize,
}

impl Region {
    pub fn new(start: usize, end: usize, l: usize) -> Result<Self> {
        if start == 0 || start > end || end > l {
            return Err(Error::Config(format!("region [{start}, {end}] invalid for L = {l}")));
        }
        Ok(Region { start, end })
    }

    /// Sites `[1, cut]`.
    pub fn prefix(cut: usize, l: usize) -> Result<Self> {
        Self::new(1, cut, l)
    }

    pub fn half_chain(l: usize) -> Self {
        Region { start: 1, end: l / 2 }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    pub fn complement(&self, l: usize) -> Vec<usize> {
        (1..=l).filter(|s| *s < self.start || *s > self.end).collect()
    }
}

/// Eigenvalues of the 4ℓ×4ℓ Nambu restriction of `Γ` to `sites`.
pub fn restricted_spectrum<T: Real>(state: &NambuCovariance<T>, sites: &[usize]) -> Result<Vec<T>> {
    let l = state.l();
    let n = state.modes();
    let mut modes = Vec::with_capacity(2 * sites.len());
    for spin in Spin::BOTH {
        for &s in sites {
            modes.push(flatten(s, spin, l)?);
        }
    }
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| n + m)).collect();
    let g = state.full();
    let k = idx.len();
    let mut sub = DMatrix::<C<T>>::from_fn(k, k, |i, j| g[(idx[i], idx[j])]);
    sub = (&sub + sub.adjoint()).scale(T::of(0.5));
    Ok(sub.symmetric_eigenvalues().iter().copied().collect())
}

/// Sum of `F(λ)` over eigenvalues after the integrity window check.
pub(crate) fn entropy_of_spectrum<T: Real>(eigs: &[T]) -> Result<T> {
    let tol = T::tol(EIGEN_WINDOW);
    let mut s = T::zero();
    for &lam in eigs {
        if lam.is_nan() || lam < -tol || lam > T::one() + tol {
            return Err(Error::Integrity(format!("restricted eigenvalue {:e} outside [0, 1]", lam)));
        }
        s += binary_entropy(lam);
    }
    Ok(s)
}

/// Von Neumann entropy of an arbitrary site set. The Nambu restriction
/// lists every mode twice (as `λ` and `1 − λ`), hence the factor ½.
pub fn entropy_of_sites<T: Real>(state: &NambuCovariance<T>, sites: &[usize]) -> Result<T> {
    let eigs = restricted_spectrum(state, sites)?;
    Ok(entropy_of_spectrum(&eigs)? * T::of(0.5))
}

pub fn entanglement_entropy<T: Real>(state: &NambuCovariance<T>, region: Region) -> Result<T> {
    entropy_of_sites(state, &region.sites())
}

/// `⟨c_{i↓} c_{j↑}⟩`, 1-based sites.
pub fn pairing<T: Real>(state: &NambuCovariance<T>, i: usize, j: usize) -> Result<C<T>> {
    let l = state.l();
    Ok(state.gamma12[(flatten(i, Spin::Down, l)?, flatten(j, Spin::Up, l)?)])
}

/// `|⟨c_{i↓} c_{j↑}⟩|` as an L×L matrix (0-based indices for sites i+1, j+1).
pub fn pairing_matrix<T: Real>(state: &NambuCovariance<T>) -> DMatrix<T> {
    let l = state.l();
    DMatrix::from_fn(l, l, |i, j| cabs(state.gamma12[(l + i, j)]))
}

/// Mean over `j` of `|⟨c_{j↓} c_{j+1,↑}⟩|`, periodic.
pub fn nn_pairing<T: Real>(state: &NambuCovariance<T>) -> T {
    let l = state.l();
    let sum = (0..l).fold(T::zero(), |acc, j| acc + cabs(state.gamma12[(l + j, (j + 1) % l)]));
    sum / T::of(l as f64)
}

/// `(1/L) Σ_j (−1)^{j+1} ⟨c_{j↓} c_{j+1,↑}⟩` with 1-based `j`.
pub fn staggered_nn_pairing<T: Real>(state: &NambuCovariance<T>) -> C<T> {
    let l = state.l();
    let mut acc = C::new(T::zero(), T::zero());
    for j in 0..l {
        let z = state.gamma12[(l + j, (j + 1) % l)];
        // site j+1 is odd when j is even, giving sign +1
        if j % 2 == 0 {
            acc += z;
        } else {
            acc -= z;
        }
    }
    acc.unscale(T::of(l as f64))
}

/// `max_j |⟨c_{j↓} c_{j↑}⟩|`.
pub fn onsite_pairing_max<T: Real>(state: &NambuCovariance<T>) -> T {
    let l = state.l();
    (0..l).fold(T::zero(), |m, j| m.max(cabs(state.gamma12[(l + j, j)])))
}

/// `⟨n_x⟩` in flat mode order.
pub fn occupation_profile<T: Real>(state: &NambuCovariance<T>) -> Vec<T> {
    (0..state.modes()).map(|i| state.gamma22[(i, i)].re.max(T::zero()).min(T::one())).collect()
}

//! Real-space Bogoliubov–de Gennes matrix of the BCS chain and its
//! single-particle propagator.
//!
//! With `H = ½ C† 𝓗 C + ½ tr A` and `C = (c, c†)`, the Heisenberg
//! equation gives `C(t) = e^{−i𝓗t} C`, so `Γ(t) = W Γ(0) W†` with
//! `W = e^{−i𝓗t}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{NambuCovariance, ABORT_THRESHOLD};
use crate::lattice::{flatten, ModelParams, Spin};
use crate::scalar::{c, cabs, re, Real, C};

/// `𝓗 = [[A, B], [B†, −Aᵀ]]` on the Nambu spinor `(c_x, c†_x)`.
///
/// `A` is the hopping block (−J on periodic nearest-neighbour bonds, both
/// spins) and `B` the antisymmetric pairing block with
/// `B[j↑, j↓] = −Δ`, `B[j↓, j↑] = +Δ`.
#[derive(Clone, Debug)]
pub struct BdGMatrix<T: Real> {
    pub l: usize,
    pub h: DMatrix<C<T>>,
}

pub fn build_bdg<T: Real>(params: &ModelParams) -> Result<BdGMatrix<T>> {
    params.validate()?;
    let l = params.l;
    let n = 2 * l;
    let j = T::of(params.j);
    let delta = T::of(params.delta);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for spin in Spin::BOTH {
        for site in 1..=l {
            let x = flatten(site, spin, l)?;
            let y = flatten(site % l + 1, spin, l)?;
            // particle block A and hole block −Aᵀ
            h[(x, y)] -= re(j);
            h[(y, x)] -= re(j);
            h[(n + x, n + y)] += re(j);
            h[(n + y, n + x)] += re(j);
        }
    }
    for site in 1..=l {
        let up = flatten(site, Spin::Up, l)?;
        let dn = flatten(site, Spin::Down, l)?;
        // B and B† = −B* (B real here)
        h[(up, n + dn)] -= re(delta);
        h[(dn, n + up)] += re(delta);
        h[(n + dn, up)] -= re(delta);
        h[(n + up, dn)] += re(delta);
    }
    Ok(BdGMatrix { l, h })
}

impl<T: Real> BdGMatrix<T> {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hermiticity_defect(&self) -> T {
        let d = &self.h - self.h.adjoint();
        d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<T> {
        let mut e: Vec<T> = self.h.clone().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    pub fn eigen(&self) -> Result<BdGEigen<T>> {
        let eig = nalgebra::linalg::SymmetricEigen::try_new(self.h.clone(), T::default_epsilon(), 0)
            .ok_or_else(|| Error::Numeric("BdG eigendecomposition did not converge".into()))?;
        Ok(BdGEigen { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    /// `⟨H⟩ = −½ tr(𝓗 Γ) + ½ tr A`.
    pub fn energy(&self, state: &NambuCovariance<T>) -> T {
        let n = 2 * self.l;
        let g = state.full();
        let tr_hg = (&self.h * &g).trace();
        let tr_a = self.h.view((0, 0), (n, n)).trace();
        (tr_a - tr_hg).re * T::of(0.5)
    }
}

/// Eigendecomposition `𝓗 = V diag(E) V†`.
#[derive(Clone, Debug)]
pub struct BdGEigen<T: Real> {
    pub energies: Vec<T>,
    pub vectors: DMatrix<C<T>>,
}

impl<T: Real> BdGEigen<T> {
    /// `V diag(e^{−iE t}) V†`.
    pub fn unitary(&self, t: T) -> DMatrix<C<T>> {
        let mut vp = self.vectors.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let ph = c((e * t).cos(), -(e * t).sin());
            vp.column_mut(k).scale_mut_complex(ph);
        }
        vp * self.vectors.adjoint()
    }
}

trait ScaleComplex<T: Real> {
    fn scale_mut_complex(&mut self, s: C<T>);
}

impl<T: Real, S: nalgebra::storage::StorageMut<C<T>, nalgebra::Dyn, nalgebra::U1>> ScaleComplex<T>
    for nalgebra::Matrix<C<T>, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_complex(&mut self, s: C<T>) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// Single-particle propagator for one time step.
#[derive(Clone, Debug)]
pub struct BdGPropagator<T: Real> {
    pub v: DMatrix<C<T>>,
    pub dt: T,
}

pub fn build_propagator<T: Real>(h: &BdGMatrix<T>, dt: T) -> Result<BdGPropagator<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Config("propagator time step must be > 0".into()));
    }
    let eig = h.eigen()?;
    Ok(BdGPropagator { v: eig.unitary(dt), dt })
}

impl<T: Real> BdGPropagator<T> {
    pub fn unitarity_defect(&self) -> T {
        let n = self.v.nrows();
        let d = &self.v * self.v.adjoint() - DMatrix::<C<T>>::identity(n, n);
        d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
    }
}

/// `Γ ← W Γ W†`. This is the one place the conjugation convention lives.
pub fn conjugate_full<T: Real>(g: &DMatrix<C<T>>, w: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    w * g * w.adjoint()
}

pub fn evolve_step<T: Real>(state: &mut NambuCovariance<T>, prop: &BdGPropagator<T>) -> Result<()> {
    evolve_with(state, &prop.v)
}

pub(crate) fn evolve_with<T: Real>(state: &mut NambuCovariance<T>, w: &DMatrix<C<T>>) -> Result<()> {
    let g = conjugate_full(&state.full(), w);
    let next = NambuCovariance::from_full(&g)?;
    // cheap proxy for the purity check: the stored diagonal must stay in [0, 1]
    let tol = T::tol(ABORT_THRESHOLD);
    for i in 0..next.modes() {
        let n = next.gamma22[(i, i)].re;
        if n < -tol || n > T::one() + tol || n.is_nan() {
            return Err(Error::Integrity(format!("occupation {:e} left [0, 1] during evolution", n)));
        }
    }
    *state = next;
    Ok(())
}

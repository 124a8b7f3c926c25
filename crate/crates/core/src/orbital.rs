//! Fast trajectory backend.
//!
//! The BCS Hamiltonian and the charge measurements both conserve the
//! number of `Ψ = (c_{1↑}, …, c_{L↑}, c†_{1↓}, …, c†_{L↓})` quanta, and
//! `{Ψ_a, Ψ†_b} = δ_ab`. In this basis
//!
//! ```text
//! H = Ψ† h Ψ + const,   h = [[−J T, −Δ 𝟙], [−Δ 𝟙, +J T]]
//! ```
//!
//! with `T` the periodic nearest-neighbour adjacency, and the Néel and
//! vacuum states are Slater determinants of `L` Ψ-orbitals. The state is
//! therefore a 2L×L orthonormal orbital matrix, stored in the eigenbasis of
//! `h` so that a time step is a diagonal phase. The whole 4L×4L Nambu
//! covariance is recovered from `C_ab = ⟨Ψ†_a Ψ_b⟩ = Σ_m U*_am U_bm`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::NambuCovariance;
use crate::lattice::{InitState, ModelParams, Spin};
use crate::measurement::{decide_outcome, MeasurementRecord, Outcome};
use crate::observables::entropy_of_spectrum;
use crate::scalar::{c, cabs, norm_sqr, re, Real, C};

/// Eigen-decomposed sector Hamiltonian and the per-step phases.
#[derive(Clone, Debug)]
pub struct SectorModel<T: Real> {
    l: usize,
    n: usize,
    energies: Vec<T>,
    /// `V[a, b]`, row-major: row `a` is a real-space mode.
    v: Vec<C<T>>,
    phases: Vec<C<T>>,
    dt: T,
}

/// The 2L×2L single-particle Hamiltonian of the Ψ sector.
pub fn sector_hamiltonian<T: Real>(params: &ModelParams) -> Result<DMatrix<C<T>>> {
    params.validate()?;
    let l = params.l;
    let j = T::of(params.j);
    let delta = T::of(params.delta);
    let mut h = DMatrix::zeros(2 * l, 2 * l);
    for i in 0..l {
        let k = (i + 1) % l;
        h[(i, k)] -= re(j);
        h[(k, i)] -= re(j);
        h[(l + i, l + k)] += re(j);
        h[(l + k, l + i)] += re(j);
        h[(i, l + i)] -= re(delta);
        h[(l + i, i)] -= re(delta);
    }
    Ok(h)
}

impl<T: Real> SectorModel<T> {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let h = sector_hamiltonian::<T>(params)?;
        let n = h.nrows();
        let eig = nalgebra::linalg::SymmetricEigen::try_new(h, T::default_epsilon(), 0)
            .ok_or_else(|| Error::Numeric("sector eigendecomposition did not converge".into()))?;
        let energies: Vec<T> = eig.eigenvalues.iter().copied().collect();
        let mut v = vec![re(T::zero()); n * n];
        for a in 0..n {
            for b in 0..n {
                v[a * n + b] = eig.eigenvectors[(a, b)];
            }
        }
        let dt = T::of(params.dt);
        let phases = energies.iter().map(|&e| c((e * dt).cos(), -(e * dt).sin())).collect();
        Ok(SectorModel { l: params.l, n, energies, v, phases, dt })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn vrow(&self, a: usize) -> &[C<T>] {
        &self.v[a * self.n..(a + 1) * self.n]
    }

    /// Real-space mode index of `(site, spin)` in the Ψ basis.
    pub fn psi_index(&self, site: usize, spin: Spin) -> Result<usize> {
        if site == 0 || site > self.l {
            return Err(Error::Index { site, l: self.l });
        }
        Ok(match spin {
            Spin::Up => site - 1,
            Spin::Down => self.l + site - 1,
        })
    }
}

/// Slater determinant of `L` Ψ-orbitals, columns stored in the eigenbasis
/// of the sector Hamiltonian (column-major, `n = 2L` rows).
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalState<T: Real> {
    n: usize,
    np: usize,
    u: Vec<C<T>>,
}

impl<T: Real> OrbitalState<T> {
    /// Orbitals localised on the given real-space Ψ modes.
    pub fn from_modes(model: &SectorModel<T>, modes: &[usize]) -> Self {
        let n = model.n;
        let mut u = Vec::with_capacity(n * modes.len());
        for &a in modes {
            u.extend(model.vrow(a).iter().map(|z| z.conj()));
        }
        OrbitalState { n, np: modes.len(), u }
    }

    pub fn initial(model: &SectorModel<T>, init: InitState) -> Self {
        let l = model.l;
        // Ψ-occupied: c_{j↑} where ↑ sits, c†_{j↓} where ↓ is absent
        let modes: Vec<usize> = match init {
            InitState::Neel => (0..l).step_by(2).flat_map(|i| [i, l + i]).collect(),
            InitState::Vacuum => (l..2 * l).collect(),
        };
        Self::from_modes(model, &modes)
    }

    pub fn particles(&self) -> usize {
        self.np
    }

    fn col(&self, m: usize) -> &[C<T>] {
        &self.u[m * self.n..(m + 1) * self.n]
    }

    /// One time step `δt`.
    pub fn step(&mut self, model: &SectorModel<T>) {
        for col in self.u.chunks_exact_mut(self.n) {
            for (z, p) in col.iter_mut().zip(&model.phases) {
                *z *= *p;
            }
        }
    }

    /// Evolves by an arbitrary time `t` in one shot.
    pub fn evolve_by(&mut self, model: &SectorModel<T>, t: T) {
        let ph: Vec<C<T>> = model.energies.iter().map(|&e| c((e * t).cos(), -(e * t).sin())).collect();
        for col in self.u.chunks_exact_mut(self.n) {
            for (z, p) in col.iter_mut().zip(&ph) {
                *z *= *p;
            }
        }
    }

    /// Real-space amplitudes `U[a, m]` of mode `a` across all orbitals.
    pub fn real_row(&self, model: &SectorModel<T>, a: usize) -> Vec<C<T>> {
        let vr = model.vrow(a);
        (0..self.np).map(|m| dot(vr, self.col(m))).collect()
    }

    /// The full real-space orbital matrix, column-major.
    pub fn real_space(&self, model: &SectorModel<T>) -> RealSpaceOrbitals<T> {
        let n = self.n;
        let mut out = vec![re(T::zero()); n * self.np];
        for m in 0..self.np {
            let col = self.col(m);
            for a in 0..n {
                out[m * n + a] = dot(model.vrow(a), col);
            }
        }
        RealSpaceOrbitals { l: model.l, n, np: self.np, u: out }
    }

    /// Projects Ψ-mode `a` onto occupied or empty given its real-space row.
    fn project(&mut self, model: &SectorModel<T>, a: usize, row: &[C<T>], occupied: bool) -> Result<()> {
        let n = self.n;
        let last = self.np - 1;
        let rnorm2 = row.iter().fold(T::zero(), |s, z| s + norm_sqr(*z));
        let rnorm = rnorm2.sqrt();
        if rnorm == T::zero() {
            if occupied {
                return Err(Error::BranchForbidden(format!("Ψ-mode {a} has zero weight")));
            }
            return Ok(());
        }
        // Householder reflector Q = 𝟙 − τ h h† with row·Q = α e_last
        let rl = row[last];
        let rl_abs = cabs(rl);
        let phase = if rl_abs > T::zero() { rl.unscale(rl_abs) } else { re(T::one()) };
        let alpha = -phase.scale(rnorm);
        let mut h: Vec<C<T>> = row.iter().map(|z| z.conj()).collect();
        h[last] -= alpha.conj();
        let hh = h.iter().fold(T::zero(), |s, z| s + norm_sqr(*z));
        let tau = T::of(2.0) / hh;
        let mut y = vec![re(T::zero()); n];
        for (m, hm) in h.iter().enumerate() {
            axpy(*hm, self.col(m), &mut y);
        }
        for (m, hm) in h.iter().enumerate() {
            let s = -(hm.conj()).scale(tau);
            let col = &mut self.u[m * n..(m + 1) * n];
            axpy(s, &y, col);
        }
        let va = model.vrow(a);
        let col = &mut self.u[last * n..(last + 1) * n];
        if occupied {
            for (z, v) in col.iter_mut().zip(va) {
                *z = v.conj();
            }
        } else {
            for (z, v) in col.iter_mut().zip(va) {
                *z -= alpha * v.conj();
            }
            let nrm = col.iter().fold(T::zero(), |s, z| s + norm_sqr(*z)).sqrt();
            if !(nrm > T::zero()) {
                return Err(Error::BranchForbidden(format!("empty outcome of Ψ-mode {a} has zero weight")));
            }
            for z in col.iter_mut() {
                *z = z.unscale(nrm);
            }
        }
        Ok(())
    }

    /// Measures `n_{site,σ}` with uniform `x`.
    pub fn measure_mode(
        &mut self,
        model: &SectorModel<T>,
        site: usize,
        spin: Spin,
        x: f64,
        t: f64,
    ) -> Result<MeasurementRecord> {
        let a = model.psi_index(site, spin)?;
        let row = self.real_row(model, a);
        let occ_psi = row.iter().fold(T::zero(), |s, z| s + norm_sqr(*z)).to_f64_lossy();
        if occ_psi > 1.0 + T::tol(1e-8).to_f64_lossy() || occ_psi.is_nan() {
            return Err(Error::Integrity(format!("Ψ occupation {occ_psi:e} above 1")));
        }
        let occ_psi = occ_psi.min(1.0);
        let q = match spin {
            Spin::Up => occ_psi,
            Spin::Down => 1.0 - occ_psi,
        };
        let (outcome, _) = decide_outcome(q, x);
        let psi_occupied = (outcome == Outcome::Occupied) == (spin == Spin::Up);
        self.project(model, a, &row, psi_occupied)?;
        Ok(MeasurementRecord { t, site, spin, outcome, born_p: q })
    }

    /// Modified Gram–Schmidt on the orbital columns; returns the largest
    /// departure from orthonormality found before the repair.
    pub fn reorthonormalize(&mut self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for m in 0..self.np {
            for k in 0..m {
                let (head, tail) = self.u.split_at_mut(m * n);
                let qk = &head[k * n..(k + 1) * n];
                let um = &mut tail[..n];
                let proj = cdot(qk, um);
                worst = worst.max(cabs(proj));
                axpy(-proj, qk, um);
            }
            let um = &mut self.u[m * n..(m + 1) * n];
            let nrm = um.iter().fold(T::zero(), |s, z| s + norm_sqr(*z)).sqrt();
            worst = worst.max((nrm - T::one()).abs());
            for z in um.iter_mut() {
                *z = z.unscale(nrm);
            }
        }
        worst
    }

    /// `‖U†U − 𝟙‖_max`.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for m in 0..self.np {
            for k in 0..=m {
                let d = cdot(self.col(k), self.col(m));
                let target = if k == m { re(T::one()) } else { re(T::zero()) };
                worst = worst.max(cabs(d - target));
            }
        }
        worst
    }
}

/// Real-space orbitals `U[a, m]` (column-major), from which every
/// observable is read.
#[derive(Clone, Debug)]
pub struct RealSpaceOrbitals<T: Real> {
    l: usize,
    n: usize,
    np: usize,
    u: Vec<C<T>>,
}

impl<T: Real> RealSpaceOrbitals<T> {
    fn at(&self, a: usize, m: usize) -> C<T> {
        self.u[m * self.n + a]
    }

    /// `⟨Ψ†_a Ψ_b⟩`.
    pub fn corr(&self, a: usize, b: usize) -> C<T> {
        let mut s = re(T::zero());
        for m in 0..self.np {
            s += self.at(a, m).conj() * self.at(b, m);
        }
        s
    }

    /// `⟨c_{i↓} c_{j↑}⟩` for 1-based sites.
    pub fn pairing(&self, i: usize, j: usize) -> C<T> {
        self.corr(self.l + i - 1, j - 1)
    }

    pub fn nn_pairing(&self) -> T {
        let l = self.l;
        let sum = (1..=l).fold(T::zero(), |acc, j| acc + cabs(self.pairing(j, j % l + 1)));
        sum / T::of(l as f64)
    }

    pub fn staggered_nn_pairing(&self) -> C<T> {
        let l = self.l;
        let mut acc = re(T::zero());
        for j in 1..=l {
            let z = self.pairing(j, j % l + 1);
            if j % 2 == 1 {
                acc += z;
            } else {
                acc -= z;
            }
        }
        acc.unscale(T::of(l as f64))
    }

    pub fn onsite_pairing_max(&self) -> T {
        (1..=self.l).fold(T::zero(), |m, j| m.max(cabs(self.pairing(j, j))))
    }

    /// Electron occupations in flat order `(1↑…L↑, 1↓…L↓)`.
    pub fn occupations(&self) -> Vec<T> {
        let l = self.l;
        let mut out = Vec::with_capacity(2 * l);
        for a in 0..l {
            out.push(self.corr(a, a).re);
        }
        for a in l..2 * l {
            out.push(T::one() - self.corr(a, a).re);
        }
        out
    }

    /// Entropy of a set of 1-based sites: `Σ F(λ)` over the spectrum of
    /// the restricted Ψ correlation matrix.
    pub fn entropy_of_sites(&self, sites: &[usize]) -> Result<T> {
        let l = self.l;
        let rows: Vec<usize> = sites.iter().map(|s| s - 1).chain(sites.iter().map(|s| l + s - 1)).collect();
        let k = rows.len();
        let eigs: Vec<T> = if k <= self.np {
            let mut ca = DMatrix::<C<T>>::zeros(k, k);
            for j in 0..k {
                for i in 0..=j {
                    let z = self.corr(rows[i], rows[j]);
                    ca[(i, j)] = z;
                    ca[(j, i)] = z.conj();
                }
            }
            ca.symmetric_eigenvalues().iter().copied().collect()
        } else {
            // same non-zero spectrum as the np×np Gram matrix of the rows
            let mut g = DMatrix::<C<T>>::zeros(self.np, self.np);
            for q in 0..self.np {
                for p in 0..=q {
                    let mut s = re(T::zero());
                    for &a in &rows {
                        s += self.at(a, p).conj() * self.at(a, q);
                    }
                    g[(p, q)] = s;
                    g[(q, p)] = s.conj();
                }
            }
            g.symmetric_eigenvalues().iter().copied().collect()
        };
        entropy_of_spectrum(&eigs)
    }

    /// The equivalent Nambu covariance.
    pub fn to_nambu(&self) -> NambuCovariance<T> {
        let l = self.l;
        let n = 2 * l;
        let mut corr = DMatrix::<C<T>>::zeros(n, n);
        for b in 0..n {
            for a in 0..n {
                corr[(a, b)] = self.corr(a, b);
            }
        }
        let mut g22 = DMatrix::zeros(n, n);
        let mut g12 = DMatrix::zeros(n, n);
        for i in 0..l {
            for j in 0..l {
                g22[(i, j)] = corr[(i, j)];
                let d = if i == j { T::one() } else { T::zero() };
                g22[(l + i, l + j)] = re(d) - corr[(l + j, l + i)];
                g12[(i, l + j)] = -corr[(l + j, i)];
                g12[(l + i, j)] = corr[(l + i, j)];
            }
        }
        NambuCovariance::from_blocks(g22, g12).expect("square blocks")
    }
}

#[inline]
fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    let mut re_ = T::zero();
    let mut im_ = T::zero();
    for (x, y) in a.iter().zip(b) {
        re_ += x.re * y.re - x.im * y.im;
        im_ += x.re * y.im + x.im * y.re;
    }
    c(re_, im_)
}

/// `Σ conj(a_i) b_i`
#[inline]
fn cdot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    let mut re_ = T::zero();
    let mut im_ = T::zero();
    for (x, y) in a.iter().zip(b) {
        re_ += x.re * y.re + x.im * y.im;
        im_ += x.re * y.im - x.im * y.re;
    }
    c(re_, im_)
}

#[inline]
fn axpy<T: Real>(alpha: C<T>, x: &[C<T>], y: &mut [C<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

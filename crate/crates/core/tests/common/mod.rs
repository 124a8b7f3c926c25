//! Brute-force many-body reference: the full 4^L state vector under
//! Jordan–Wigner, with no Gaussian-state machinery at all.
#![allow(dead_code)]

use monbcs::measurement::RngStream;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Cx = Complex64;

/// Fermionic Fock space over `m` modes. Basis index bit `k` is the
/// occupation of mode `k`; `|b⟩ = Π_{k ascending} (c†_k)^{b_k} |0⟩`.
#[derive(Clone, Debug)]
pub struct Fock {
    pub modes: usize,
    pub psi: Vec<Cx>,
}

fn parity_below(b: usize, k: usize) -> f64 {
    if (b & ((1usize << k) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_k |b⟩` as `(index, sign)`.
pub fn annihilate(b: usize, k: usize) -> Option<(usize, f64)> {
    if b & (1 << k) == 0 {
        return None;
    }
    Some((b ^ (1 << k), parity_below(b, k)))
}

pub fn create(b: usize, k: usize) -> Option<(usize, f64)> {
    if b & (1 << k) != 0 {
        return None;
    }
    Some((b | (1 << k), parity_below(b, k)))
}

/// Matrix of `c†_a c_b` (if `dagger_b` is false) or `c†_a c†_b`.
fn two_body(m: usize, a: usize, b: usize, dagger_b: bool) -> DMatrix<Cx> {
    let dim = 1 << m;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let first = if dagger_b { create(col, b) } else { annihilate(col, b) };
        if let Some((mid, s1)) = first {
            if let Some((row, s2)) = create(mid, a) {
                out[(row, col)] += Cx::new(s1 * s2, 0.0);
            }
        }
    }
    out
}

/// Many-body BCS Hamiltonian on `l` sites (flat mode `σ·L + j − 1`).
pub fn hamiltonian(l: usize, j: f64, delta: f64) -> DMatrix<Cx> {
    let m = 2 * l;
    let dim = 1 << m;
    let mut h = DMatrix::<Cx>::zeros(dim, dim);
    for s in 0..2 {
        for i in 0..l {
            let a = s * l + i;
            let b = s * l + (i + 1) % l;
            let hop = two_body(m, a, b, false);
            h -= (&hop + hop.adjoint()) * Cx::new(j, 0.0);
        }
    }
    for i in 0..l {
        let pair = two_body(m, i, l + i, true);
        h -= (&pair + pair.adjoint()) * Cx::new(delta, 0.0);
    }
    h
}

/// `exp(−i H t)` through the eigendecomposition of the Hermitian `h`.
pub fn propagator(h: &DMatrix<Cx>, t: f64) -> DMatrix<Cx> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Cx::new((e * t).cos(), -(e * t).sin())));
    v * d * v.adjoint()
}

impl Fock {
    pub fn basis(modes: usize, occupied: &[usize]) -> Self {
        let mut psi = vec![Cx::new(0.0, 0.0); 1 << modes];
        let b = occupied.iter().fold(0usize, |b, k| b | (1 << k));
        psi[b] = Cx::new(1.0, 0.0);
        Fock { modes, psi }
    }

    /// Néel `|↑ ↓ ↑ ↓ …⟩`.
    pub fn neel(l: usize) -> Self {
        let occ: Vec<usize> = (0..l).map(|i| if i % 2 == 0 { i } else { l + i }).collect();
        Self::basis(2 * l, &occ)
    }

    pub fn vacuum(l: usize) -> Self {
        Self::basis(2 * l, &[])
    }

    pub fn apply(&mut self, u: &DMatrix<Cx>) {
        let v = nalgebra::DVector::from_vec(self.psi.clone());
        self.psi = (u * v).iter().copied().collect();
    }

    pub fn norm2(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn occupation(&self, k: usize) -> f64 {
        self.psi.iter().enumerate().filter(|(b, _)| b & (1 << k) != 0).map(|(_, z)| z.norm_sqr()).sum()
    }

    /// Projects onto `n_k = occupied` and renormalises.
    pub fn project(&mut self, k: usize, occupied: bool) {
        for (b, z) in self.psi.iter_mut().enumerate() {
            if (b & (1 << k) != 0) != occupied {
                *z = Cx::new(0.0, 0.0);
            }
        }
        let n = self.norm2().sqrt();
        assert!(n > 0.0, "projected onto a zero-weight branch");
        for z in &mut self.psi {
            *z /= n;
        }
    }

    fn expect_pair(&self, op: impl Fn(usize) -> Option<(usize, f64)>) -> Cx {
        let mut s = Cx::new(0.0, 0.0);
        for (col, z) in self.psi.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            if let Some((row, sign)) = op(col) {
                s += self.psi[row].conj() * z * sign;
            }
        }
        s
    }

    /// `⟨c†_a c_b⟩`
    pub fn hopping(&self, a: usize, b: usize) -> Cx {
        self.expect_pair(|col| {
            let (mid, s1) = annihilate(col, b)?;
            let (row, s2) = create(mid, a)?;
            Some((row, s1 * s2))
        })
    }

    /// `⟨c_a c_b⟩`
    pub fn anomalous(&self, a: usize, b: usize) -> Cx {
        self.expect_pair(|col| {
            let (mid, s1) = annihilate(col, b)?;
            let (row, s2) = annihilate(mid, a)?;
            Some((row, s1 * s2))
        })
    }

    /// Von Neumann entropy of the modes in `region` (any subset). The
    /// modes are first reordered to the front of the Jordan–Wigner string,
    /// which makes the ordinary partial trace the fermionic one.
    pub fn entropy(&self, region: &[usize]) -> f64 {
        let m = self.modes;
        let mut order: Vec<usize> = region.to_vec();
        order.extend((0..m).filter(|k| !region.contains(k)));
        let mut new_pos = vec![0; m];
        for (p, &k) in order.iter().enumerate() {
            new_pos[k] = p;
        }
        let na = region.len();
        let dim_a = 1 << na;
        let dim_b = 1 << (m - na);
        let mut mat = DMatrix::<Cx>::zeros(dim_a, dim_b);
        for (b, z) in self.psi.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let occ: Vec<usize> = (0..m).filter(|k| b & (1 << k) != 0).collect();
            let mut inversions = 0;
            for x in 0..occ.len() {
                for y in x + 1..occ.len() {
                    if new_pos[occ[x]] > new_pos[occ[y]] {
                        inversions += 1;
                    }
                }
            }
            let nb = occ.iter().fold(0usize, |acc, k| acc | (1 << new_pos[*k]));
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            mat[(nb & (dim_a - 1), nb >> na)] = z * sign;
        }
        let rho = &mat * mat.adjoint();
        rho.symmetric_eigenvalues().iter().filter(|p| **p > 1e-300).map(|p| -p * p.ln()).sum()
    }
}

/// Flat modes of sites `1..=cut`, both spins.
pub fn prefix_modes(l: usize, cut: usize) -> Vec<usize> {
    (0..cut).chain(l..l + cut).collect()
}

/// One sample of the reference trajectory.
#[derive(Clone, Debug)]
pub struct FockSample {
    pub t: f64,
    pub entropy: f64,
    pub occupations: Vec<f64>,
    /// `⟨c_{i↓} c_{j↑}⟩`, row-major over 0-based `(i, j)`.
    pub pairing: Vec<Cx>,
}

/// Replays the monitored protocol on the state vector, consuming `rng`
/// in the engine's order: `L` selection draws per step, then one draw per
/// spin of every selected site, ↑ first.
pub fn fock_trajectory(
    l: usize,
    j: f64,
    delta: f64,
    gamma: f64,
    dt: f64,
    steps: usize,
    stride: usize,
    cut: usize,
    mut rng: RngStream,
) -> Vec<FockSample> {
    let h = hamiltonian(l, j, delta);
    let u = propagator(&h, dt);
    let p = gamma * dt;
    let mut state = Fock::neel(l);
    let region = prefix_modes(l, cut);
    let sample = |s: &Fock, t: f64| FockSample {
        t,
        entropy: s.entropy(&region),
        occupations: (0..2 * l).map(|k| s.occupation(k)).collect(),
        pairing: (0..l).flat_map(|i| (0..l).map(move |jj| (i, jj))).map(|(i, jj)| s.anomalous(l + i, jj)).collect(),
    };
    let mut out = vec![sample(&state, 0.0)];
    for step in 1..=steps {
        let t = step as f64 * dt;
        state.apply(&u);
        let selected: Vec<usize> = (0..l).filter(|_| rng.uniform() < p).collect();
        for i in selected {
            for k in [i, l + i] {
                let x = rng.uniform();
                let q = state.occupation(k);
                state.project(k, x <= q);
            }
        }
        if step % stride == 0 {
            out.push(sample(&state, t));
        }
    }
    out
}

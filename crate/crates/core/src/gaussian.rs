//! The Nambu covariance matrix `Γ = ⟨C C†⟩` with `C = (c, c†)`.
//!
//! Only the `Γ²² = ⟨c† c⟩` and `Γ¹² = ⟨c c⟩` blocks are stored. The other
//! two follow from the anticommutation relations:
//! `Γ¹¹ = 𝟙 − (Γ²²)ᵀ` and `Γ²¹ = −(Γ¹²)*`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{flatten, Spin};
use crate::scalar::{cabs, re, Real, C};

/// Defect above which drift is treated as a logic error.
pub const ABORT_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct NambuCovariance<T: Real> {
    l: usize,
    /// `⟨c†_x c_y⟩`
    pub gamma22: DMatrix<C<T>>,
    /// `⟨c_x c_y⟩`
    pub gamma12: DMatrix<C<T>>,
}

impl<T: Real> NambuCovariance<T> {
    pub fn from_blocks(gamma22: DMatrix<C<T>>, gamma12: DMatrix<C<T>>) -> Result<Self> {
        let n = gamma22.nrows();
        if n % 2 != 0
            || gamma22.ncols() != n
            || gamma12.nrows() != n
            || gamma12.ncols() != n
        {
            return Err(Error::Config(format!(
                "covariance blocks must be square 2L x 2L, got {}x{} and {}x{}",
                gamma22.nrows(),
                gamma22.ncols(),
                gamma12.nrows(),
                gamma12.ncols()
            )));
        }
        Ok(NambuCovariance { l: n / 2, gamma22, gamma12 })
    }

    /// Spin-up on odd sites, spin-down on even sites.
    pub fn neel(l: usize) -> Result<Self> {
        check_even(l)?;
        let n = 2 * l;
        let mut g22 = DMatrix::zeros(n, n);
        for site in 1..=l {
            let spin = if site % 2 == 1 { Spin::Up } else { Spin::Down };
            let x = flatten(site, spin, l)?;
            g22[(x, x)] = re(T::one());
        }
        Ok(NambuCovariance { l, gamma22: g22, gamma12: DMatrix::zeros(n, n) })
    }

    pub fn vacuum(l: usize) -> Result<Self> {
        check_even(l)?;
        let n = 2 * l;
        Ok(NambuCovariance { l, gamma22: DMatrix::zeros(n, n), gamma12: DMatrix::zeros(n, n) })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn modes(&self) -> usize {
        2 * self.l
    }

    pub fn gamma11(&self) -> DMatrix<C<T>> {
        let n = self.modes();
        DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { T::one() } else { T::zero() };
            re(d) - self.gamma22[(j, i)]
        })
    }

    pub fn gamma21(&self) -> DMatrix<C<T>> {
        self.gamma12.map(|z| -z.conj())
    }

    /// The assembled 4L×4L matrix.
    pub fn full(&self) -> DMatrix<C<T>> {
        let n = self.modes();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&self.gamma11());
        g.view_mut((0, n), (n, n)).copy_from(&self.gamma12);
        g.view_mut((n, 0), (n, n)).copy_from(&self.gamma21());
        g.view_mut((n, n), (n, n)).copy_from(&self.gamma22);
        g
    }

    /// Reads the stored blocks back out of an assembled matrix; the derived
    /// blocks of `g` are ignored.
    pub fn from_full(g: &DMatrix<C<T>>) -> Result<Self> {
        let n2 = g.nrows();
        if n2 % 4 != 0 || g.ncols() != n2 {
            return Err(Error::Config(format!("full covariance must be 4L x 4L, got {}x{}", n2, g.ncols())));
        }
        let n = n2 / 2;
        Self::from_blocks(g.view((n, n), (n, n)).into_owned(), g.view((0, n), (n, n)).into_owned())
    }

    pub fn trace(&self) -> C<T> {
        self.full().trace()
    }

    /// Largest violation of `Γ²² = (Γ²²)†` and `Γ¹² = −(Γ¹²)ᵀ`.
    pub fn symmetry_defect(&self) -> T {
        let n = self.modes();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let a = cabs(self.gamma22[(i, j)] - self.gamma22[(j, i)].conj());
                let b = cabs(self.gamma12[(i, j)] + self.gamma12[(j, i)]);
                worst = worst.max(a).max(b);
            }
        }
        worst
    }

    /// `‖Γ² − Γ‖_max`; zero for a pure Gaussian state.
    pub fn purity_defect(&self) -> T {
        let g = self.full();
        let d = &g * &g - &g;
        d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
    }

    /// Repairs rounding drift in the stored blocks. Fails if the defect is
    /// above `abort`, which means something upstream is wrong.
    pub fn enforce_symmetry(&mut self, abort: T) -> Result<()> {
        let defect = self.symmetry_defect();
        if !(defect <= abort) {
            return Err(Error::Integrity(format!(
                "symmetry defect {:e} exceeds abort threshold {:e}",
                defect, abort
            )));
        }
        let n = self.modes();
        let half = T::of(0.5);
        for i in 0..n {
            for j in i..n {
                let h = (self.gamma22[(i, j)] + self.gamma22[(j, i)].conj()).scale(half);
                self.gamma22[(i, j)] = h;
                self.gamma22[(j, i)] = h.conj();
                let a = (self.gamma12[(i, j)] - self.gamma12[(j, i)]).scale(half);
                self.gamma12[(i, j)] = a;
                self.gamma12[(j, i)] = -a;
            }
        }
        Ok(())
    }

    pub fn gamma22_eigenvalues(&self) -> Vec<T> {
        let h = (&self.gamma22 + self.gamma22.adjoint()).scale(T::of(0.5));
        h.symmetric_eigenvalues().iter().copied().collect()
    }

    /// Symmetry, purity and `|tr Γ − 2L|` in one pass.
    pub fn diagnostics(&self) -> Diagnostics<T> {
        let g = self.full();
        let d = &g * &g - &g;
        let purity = d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
        let tr = g.trace();
        let trace = cabs(tr - re(T::of(self.modes() as f64)));
        Diagnostics { symmetry: self.symmetry_defect(), purity, trace }
    }

    pub fn cast<U: Real>(&self) -> NambuCovariance<U> {
        let f = |z: &C<T>| C::new(U::of(z.re.to_f64_lossy()), U::of(z.im.to_f64_lossy()));
        NambuCovariance { l: self.l, gamma22: self.gamma22.map(|z| f(&z)), gamma12: self.gamma12.map(|z| f(&z)) }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Diagnostics<T> {
    pub symmetry: T,
    pub purity: T,
    pub trace: T,
}

impl<T: Real> Diagnostics<T> {
    pub fn worst(&self) -> T {
        self.symmetry.max(self.purity).max(self.trace)
    }
}

fn check_even(l: usize) -> Result<()> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::Config(format!("L must be even and >= 2, got {l}")));
    }
    Ok(())
}

const CHECKPOINT_MAGIC: &[u8; 5] = b"NCOV1";

/// Binary checkpoint: `NCOV1`, `L` as u64 LE, then `Γ²²` and `Γ¹²` row-major
/// as interleaved little-endian `f64` (re, im).
pub fn write_checkpoint<T: Real>(state: &NambuCovariance<T>) -> Vec<u8> {
    let n = state.modes();
    let mut out = Vec::with_capacity(13 + 2 * n * n * 16);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(state.l as u64).to_le_bytes());
    for block in [&state.gamma22, &state.gamma12] {
        for i in 0..n {
            for j in 0..n {
                let z = block[(i, j)];
                out.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
                out.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
            }
        }
    }
    out
}

pub fn read_checkpoint<T: Real>(bytes: &[u8]) -> Result<NambuCovariance<T>> {
    let bad = |m: &str| Error::Config(format!("bad checkpoint: {m}"));
    if bytes.len() < 13 || &bytes[..5] != CHECKPOINT_MAGIC {
        return Err(bad("missing NCOV1 header"));
    }
    let l = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    let n = 2 * l;
    if bytes.len() != 13 + 2 * n * n * 16 {
        return Err(bad("length does not match L"));
    }
    let mut vals = bytes[13..].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    let mut read_block = || {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (vals.next().unwrap(), vals.next().unwrap());
                m[(i, j)] = C::new(T::of(a), T::of(b));
            }
        }
        m
    };
    let g22 = read_block();
    let g12 = read_block();
    NambuCovariance::from_blocks(g22, g12)
}

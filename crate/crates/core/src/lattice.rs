//! Model parameters and the mode-index convention.
//!
//! Sites are 1-based everywhere a user sees them. Flat mode indices are
//! 0-based and ordered `(1↑, …, L↑, 1↓, …, L↓)`; [`flatten`] and
//! [`unflatten`] are the only places that cross between the two.
//! Boundaries are periodic: site `L + 1` is site `1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::Up => write!(f, "up"),
            Spin::Down => write!(f, "down"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub site: usize,
    pub spin: Spin,
}

/// Flat index of `(site, spin)` for a chain of `l` sites.
pub fn flatten(site: usize, spin: Spin, l: usize) -> Result<usize> {
    if site == 0 || site > l {
        return Err(Error::Index { site, l });
    }
    Ok(match spin {
        Spin::Up => site - 1,
        Spin::Down => l + site - 1,
    })
}

pub fn unflatten(flat: usize, l: usize) -> Result<ModeIndex> {
    if flat >= 2 * l {
        return Err(Error::Index { site: flat + 1, l });
    }
    Ok(if flat < l {
        ModeIndex { site: flat + 1, spin: Spin::Up }
    } else {
        ModeIndex { site: flat - l + 1, spin: Spin::Down }
    })
}

/// Physical parameters of one run. Energies in units where the paper's
/// default `J = 1`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub l: usize,
    pub j: f64,
    pub delta: f64,
    pub gamma: f64,
    pub dt: f64,
}

impl ModelParams {
    pub const DEFAULT_DT: f64 = 0.01;

    pub fn new(l: usize, j: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = ModelParams { l, j, delta, gamma, dt: Self::DEFAULT_DT };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.l % 2 != 0 {
            return Err(Error::Config(format!("L must be even and >= 2, got {}", self.l)));
        }
        if !self.j.is_finite() {
            return Err(Error::Config(format!("J must be finite, got {}", self.j)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.gamma * self.dt > 1.0 {
            return Err(Error::Config(format!(
                "gamma * dt = {} exceeds 1; not a valid measurement probability",
                self.gamma * self.dt
            )));
        }
        Ok(())
    }

    /// Per-site, per-step measurement probability `γ δt`.
    pub fn p(&self) -> f64 {
        self.gamma * self.dt
    }

    pub fn modes(&self) -> usize {
        2 * self.l
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum InitState {
    #[default]
    Neel,
    Vacuum,
}

impl fmt::Display for InitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitState::Neel => write!(f, "neel"),
            InitState::Vacuum => write!(f, "vacuum"),
        }
    }
}

impl FromStr for InitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neel" => Ok(InitState::Neel),
            "vacuum" => Ok(InitState::Vacuum),
            other => Err(Error::Config(format!("unknown init_state '{other}' (expected neel or vacuum)"))),
        }
    }
}

//! CSV tables and run manifests.
//!
//! Every table is UTF-8 with a header row. Reals are written in exponent
//! form with the shortest digit string that parses back to the same `f64`
//! (`1.3862943611198906e0`), integers as integers.

use std::fs;
use std::path::Path;

use crate::engine::{EnsembleResult, GammaPeak, ScalingFit};
use crate::error::{Error, Result};
use crate::gge::GgeRow;

pub const TIMESERIES_FILE: &str = "entropy_timeseries.csv";
pub const STEADY_STATE_FILE: &str = "steady_state.csv";
pub const GAMMA_SWEEP_FILE: &str = "gamma_sweep.csv";
pub const GAMMA_PEAK_FILE: &str = "gamma_peak.csv";
pub const SCALING_FIT_FILE: &str = "scaling_fit.csv";
pub const GGE_FILE: &str = "gge.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const TIMESERIES_HEADER: [&str; 5] = ["t", "mean_S", "stderr_S", "mean_nn_pairing", "stderr_nn_pairing"];
pub const STEADY_STATE_HEADER: [&str; 9] =
    ["L", "J", "delta", "gamma", "n_traj", "s_steady", "s_steady_err", "window_start", "window_end"];
pub const GAMMA_PEAK_HEADER: [&str; 4] = ["delta", "L", "gamma_peak", "gamma_grid_spacing"];
pub const SCALING_FIT_HEADER: [&str; 6] = ["delta", "gamma", "lambda", "intercept", "r_squared", "L_list"];
pub const GGE_HEADER: [&str; 4] = ["delta", "c_delta", "tau_over_L", "nn_pairing"];

/// Shortest exact round-trip representation, exponent form.
pub fn fmt_real(x: f64) -> String {
    format!("{x:e}")
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Config(format!("not a number: {s:?}")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file read back as strings.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(str::to_owned).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("missing column {name:?}")))?;
        self.rows.iter().map(|r| parse_real(&r[i])).collect()
    }
}

pub fn write_timeseries(path: &Path, r: &EnsembleResult) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..r.times.len())
        .map(|i| {
            [r.times[i], r.mean_s[i], r.stderr_s[i], r.mean_nn_pairing[i], r.stderr_nn_pairing[i]]
                .iter()
                .map(|x| fmt_real(*x))
                .collect()
        })
        .collect();
    write_table(path, &TIMESERIES_HEADER, &rows)
}

/// One line of `steady_state.csv` / `gamma_sweep.csv`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SteadyRow {
    pub l: usize,
    pub j: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n_traj: usize,
    pub s_steady: f64,
    pub s_steady_err: f64,
    pub window: (f64, f64),
}

impl SteadyRow {
    pub fn from_result(l: usize, j: f64, delta: f64, gamma: f64, r: &EnsembleResult) -> Self {
        SteadyRow {
            l,
            j,
            delta,
            gamma,
            n_traj: r.n_traj_effective,
            s_steady: r.s_steady,
            s_steady_err: r.s_steady_err,
            window: r.window,
        }
    }

    fn cells(&self) -> Vec<String> {
        let mut v = vec![self.l.to_string()];
        v.extend([self.j, self.delta, self.gamma].map(fmt_real));
        v.push(self.n_traj.to_string());
        v.extend([self.s_steady, self.s_steady_err, self.window.0, self.window.1].map(fmt_real));
        v
    }
}

pub fn write_steady_state(path: &Path, rows: &[SteadyRow]) -> Result<()> {
    write_table(path, &STEADY_STATE_HEADER, &rows.iter().map(SteadyRow::cells).collect::<Vec<_>>())
}

pub fn write_gamma_peak(path: &Path, delta: f64, l: usize, peak: &GammaPeak) -> Result<()> {
    let row = vec![fmt_real(delta), l.to_string(), fmt_real(peak.gamma_peak), fmt_real(peak.spacing)];
    write_table(path, &GAMMA_PEAK_HEADER, &[row])
}

/// `L_list` is written as sizes joined by `;`.
pub fn write_scaling_fit(path: &Path, delta: f64, gamma: f64, fit: &ScalingFit, sizes: &[usize]) -> Result<()> {
    let list = sizes.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";");
    let mut row: Vec<String> = [delta, gamma, fit.lambda, fit.intercept, fit.r_squared].map(fmt_real).to_vec();
    row.push(list);
    write_table(path, &SCALING_FIT_HEADER, &[row])
}

pub fn write_gge(path: &Path, rows: &[GgeRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| [r.delta, r.c_delta, r.tau_over_l, r.nn_pairing].map(fmt_real).to_vec())
        .collect();
    write_table(path, &GGE_HEADER, &rows)
}

/// `key = value` lines, in the given order.
pub fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let body: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(path, body)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<(String, String)>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once(" = ")
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
                .ok_or_else(|| Error::Config(format!("bad manifest line {l:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trip_format() {
        let x = 2.0 * std::f64::consts::LN_2;
        assert_eq!(fmt_real(x), "1.3862943611198906e0");
        assert_eq!(parse_real(&fmt_real(x)).unwrap(), x);
        assert_eq!(fmt_real(0.0), "0e0");
        assert_eq!(fmt_real(-1.5e-7), "-1.5e-7");
        assert_eq!(parse_real(" 1.38629436e0").unwrap(), 1.38629436);
        assert!(parse_real("x").is_err());
    }
}

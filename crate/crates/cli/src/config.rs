//! Run configuration: a flat TOML document plus `--set key=value` overrides.

use std::fs;
use std::path::{Path, PathBuf};

use monbcs::engine::TrajectoryConfig;
use monbcs::{Error, InitState, ModelParams, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J", default = "default_j")]
    pub j: f64,
    pub delta: f64,
    /// Required by `run`; sweeps supply their own values.
    pub gamma: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_max: f64,
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    #[serde(default = "default_init")]
    pub init_state: String,
    pub cut: Option<usize>,
    pub output_dir: PathBuf,
}

fn default_j() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    ModelParams::DEFAULT_DT
}

fn default_init() -> String {
    "neel".into()
}

/// Parses `value` as a TOML literal, falling back to a bare string.
fn override_value(value: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(value.to_owned()),
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            table.insert(k.trim().to_owned(), override_value(v.trim()));
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_owned()))
    }

    pub fn init(&self) -> Result<InitState> {
        self.init_state.parse()
    }

    pub fn gamma(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::Config("missing key `gamma`".into()))
    }

    /// Engine configuration for `(l, gamma)`; `t_max` and any explicit
    /// window are scaled by `l / L` so that sweeps over sizes keep the same
    /// time in units of the crossing time.
    pub fn trajectory(&self, l: usize, gamma: f64) -> Result<TrajectoryConfig> {
        let params = ModelParams::new(l, self.j, self.delta, gamma)?.with_dt(self.dt)?;
        let scale = l as f64 / self.l as f64;
        let mut cfg = TrajectoryConfig::new(params, self.t_max * scale);
        match (self.window_start, self.window_end) {
            (Some(a), Some(b)) => cfg.window = (a * scale, b * scale),
            (None, None) => {}
            _ => return Err(Error::Config("window_start and window_end must be given together".into())),
        }
        cfg.n_traj = self.n_traj;
        cfg.base_seed = self.seed;
        cfg.init = self.init()?;
        if let Some(c) = self.cut {
            if l != self.l {
                return Err(Error::Config("an explicit cut cannot be combined with a size sweep".into()));
            }
            cfg.cut = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key = value` pairs for the manifest, in document order.
    pub fn manifest(&self) -> Vec<(String, String)> {
        let opt = |x: Option<f64>| x.map_or("default".to_owned(), |v| v.to_string());
        vec![
            ("L".into(), self.l.to_string()),
            ("J".into(), self.j.to_string()),
            ("delta".into(), self.delta.to_string()),
            ("gamma".into(), opt(self.gamma)),
            ("dt".into(), self.dt.to_string()),
            ("t_max".into(), self.t_max.to_string()),
            ("window_start".into(), opt(self.window_start)),
            ("window_end".into(), opt(self.window_end)),
            ("n_traj".into(), self.n_traj.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("init_state".into(), self.init_state.clone()),
            ("cut".into(), self.cut.map_or("default".to_owned(), |c| c.to_string())),
            ("output_dir".into(), self.output_dir.display().to_string()),
        ]
    }
}

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::WellPreparedFamily;
use crate::models::{PlasmaParams, PressureLaw};
use crate::timestep::StepPolicy;

use super::SweepConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Standard,
    Zero,
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!(
                "unknown family {other:?} (expected standard or zero)"
            ))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Zero => "zero",
        })
    }
}

/// Flat run settings as read from a `key = value` file and command-line
/// flags. Keys use underscores; hyphens are accepted too.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub model: String,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub d: usize,
    pub n: usize,
    pub s: u32,
    pub t_end: f64,
    pub sample_interval: f64,
    pub cfl: f64,
    pub gamma_i: f64,
    pub gamma_e: f64,
    pub k_i: f64,
    pub k_e: f64,
    pub delta0: f64,
    pub family: FamilyKind,
}

impl Default for RunSettings {
    fn default() -> Self {
        let params = PlasmaParams::default();
        let policy = StepPolicy::default();
        Self {
            model: "bep".into(),
            eps: 0.1,
            eps_list: vec![0.4, 0.2, 0.1, 0.05],
            d: 1,
            n: 128,
            s: params.sobolev_order,
            t_end: policy.t_end,
            sample_interval: policy.sample_interval,
            cfl: policy.cfl_number,
            gamma_i: params.ion_law.gamma,
            gamma_e: params.electron_law.gamma,
            k_i: params.ion_law.k,
            k_e: params.electron_law.k,
            delta0: 0.05,
            family: FamilyKind::Standard,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

impl RunSettings {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "model" => self.model = value.to_string(),
            "eps" => self.eps = parse(&key, value)?,
            "eps_list" => {
                self.eps_list = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|p| !p.is_empty())
                    .map(|p| parse(&key, p))
                    .collect::<Result<_>>()?
            }
            "d" => self.d = parse(&key, value)?,
            "n" => self.n = parse(&key, value)?,
            "s" => self.s = parse(&key, value)?,
            "t_end" => self.t_end = parse(&key, value)?,
            "sample_interval" => self.sample_interval = parse(&key, value)?,
            "cfl" => self.cfl = parse(&key, value)?,
            "gamma_i" => self.gamma_i = parse(&key, value)?,
            "gamma_e" => self.gamma_e = parse(&key, value)?,
            "k_i" => self.k_i = parse(&key, value)?,
            "k_e" => self.k_e = parse(&key, value)?,
            "delta0" => self.delta0 = parse(&key, value)?,
            "family" => self.family = value.parse()?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut s = Self::default();
        s.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(s)
    }

    /// `key = value` text that reproduces these settings.
    pub fn to_text(&self) -> String {
        let list: Vec<String> = self.eps_list.iter().map(|e| e.to_string()).collect();
        format!(
            "model = {}\neps = {}\neps_list = {}\nd = {}\nn = {}\ns = {}\nt_end = {}\n\
             sample_interval = {}\ncfl = {}\ngamma_i = {}\ngamma_e = {}\nk_i = {}\nk_e = {}\n\
             delta0 = {}\nfamily = {}\n",
            self.model,
            self.eps,
            list.join(", "),
            self.d,
            self.n,
            self.s,
            self.t_end,
            self.sample_interval,
            self.cfl,
            self.gamma_i,
            self.gamma_e,
            self.k_i,
            self.k_e,
            self.delta0,
            self.family,
        )
    }

    pub fn params(&self) -> Result<PlasmaParams> {
        Ok(PlasmaParams {
            epsilon: self.eps,
            ion_law: PressureLaw::new(self.k_i, self.gamma_i)?,
            electron_law: PressureLaw::new(self.k_e, self.gamma_e)?,
            sobolev_order: self.s,
        })
    }

    pub fn policy(&self) -> StepPolicy {
        StepPolicy {
            cfl_number: self.cfl,
            t_end: self.t_end,
            sample_interval: self.sample_interval,
        }
    }

    /// Sweep configuration over `eps_list`.
    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let mut c = SweepConfig::standard(self.d, self.n)?;
        c.epsilons = self.eps_list.clone();
        c.params = self.params()?;
        c.policy = self.policy();
        c.family = match self.family {
            FamilyKind::Standard => c.family.with_delta0(self.delta0),
            FamilyKind::Zero => WellPreparedFamily::zero(c.grid()),
        };
        Ok(c)
    }

    /// Sweep configuration whose only ε is `eps`, for single runs.
    pub fn single_config(&self) -> Result<SweepConfig> {
        let mut c = self.sweep_config()?;
        c.epsilons = vec![self.eps];
        c.validate_case(self.eps)?;
        Ok(c)
    }
}

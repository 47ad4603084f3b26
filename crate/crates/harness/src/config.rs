//! Experiment configuration in a flat `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored; lists are comma
//! separated. Unknown keys are rejected so typos do not pass silently.
//!
//! ```text
//! seed = 0
//! m = 4
//! l = 4
//! n = 3
//! sigma_v_sq = 0.5
//! p_grid = 0.5, 1, 2, 4, 8
//! policies = vec-minsum, lower-bound
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use reconfig_core::tracking::ReconfigPolicy;

use crate::error::{HarnessError, Result};

/// The only supported generator, `ChaCha20Rng` from `rand_chacha` 0.9
/// seeded through `SeedableRng::seed_from_u64`.
pub const RNG_NAME: &str = "chacha20";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyName {
    VecMinSum,
    VecMinMax,
    ScalarMinSum,
    ScalarMinMax,
    LowerBound,
}

impl PolicyName {
    pub const ALL: [PolicyName; 5] = [
        PolicyName::VecMinSum,
        PolicyName::VecMinMax,
        PolicyName::ScalarMinSum,
        PolicyName::ScalarMinMax,
        PolicyName::LowerBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::VecMinSum => "vec-minsum",
            PolicyName::VecMinMax => "vec-minmax",
            PolicyName::ScalarMinSum => "scalar-minsum",
            PolicyName::ScalarMinMax => "scalar-minmax",
            PolicyName::LowerBound => "lower-bound",
        }
    }

    pub fn policy(self) -> ReconfigPolicy {
        match self {
            PolicyName::VecMinSum => ReconfigPolicy::VecMinSum,
            PolicyName::VecMinMax => ReconfigPolicy::VecMinMax,
            PolicyName::ScalarMinSum => ReconfigPolicy::ScalarMinSum,
            PolicyName::ScalarMinMax => ReconfigPolicy::ScalarMinMax,
            PolicyName::LowerBound => ReconfigPolicy::LowerBound,
        }
    }

    pub fn is_scalar(self) -> bool {
        matches!(self, PolicyName::ScalarMinSum | PolicyName::ScalarMinMax)
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        PolicyName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown policy '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub sigma_v_sq: f64,
    pub spectral_radius_target: f64,
    pub p_grid: Vec<f64>,
    pub policies: Vec<PolicyName>,
    /// Systems are drawn for seeds `seed, seed + 1, ..., seed + num_seeds - 1`.
    pub num_seeds: usize,
    pub steady_tol: f64,
    pub max_iters: usize,
    pub rng: String,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

/// `0.5, 0.5·√2, ..., 8`.
pub fn default_p_grid() -> Vec<f64> {
    (0..9).map(|k| 0.5 * 2f64.powf(k as f64 / 2.0)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            m: 4,
            l: 4,
            n: 3,
            sigma_v_sq: 0.5,
            spectral_radius_target: 0.9,
            p_grid: default_p_grid(),
            policies: PolicyName::ALL.to_vec(),
            num_seeds: 1,
            steady_tol: 1e-8,
            max_iters: 1000,
            rng: RNG_NAME.to_string(),
            out_csv: None,
            out_svg: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("invalid value '{value}' for '{key}'")))
}

pub fn parse_p_grid(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value("p_grid", s))
        .collect()
}

pub fn parse_policies(value: &str) -> Result<Vec<PolicyName>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => cfg.seed = parse_value(key, value)?,
                "m" => cfg.m = parse_value(key, value)?,
                "l" => cfg.l = parse_value(key, value)?,
                "n" => cfg.n = parse_value(key, value)?,
                "sigma_v_sq" => cfg.sigma_v_sq = parse_value(key, value)?,
                "spectral_radius_target" => cfg.spectral_radius_target = parse_value(key, value)?,
                "p_grid" => cfg.p_grid = parse_p_grid(value)?,
                "policies" => cfg.policies = parse_policies(value)?,
                "num_seeds" => cfg.num_seeds = parse_value(key, value)?,
                "steady_tol" => cfg.steady_tol = parse_value(key, value)?,
                "max_iters" => cfg.max_iters = parse_value(key, value)?,
                "rng" => cfg.rng = value.to_string(),
                "out_csv" => cfg.out_csv = Some(PathBuf::from(value)),
                "out_svg" => cfg.out_svg = Some(PathBuf::from(value)),
                other => {
                    return Err(HarnessError::Config(format!("line {}: unknown key '{other}'", lineno + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.m == 0 || self.l == 0 || self.n == 0 {
            return bad(format!("dimensions must be at least 1 (m = {}, l = {}, n = {})", self.m, self.l, self.n));
        }
        if !(self.sigma_v_sq > 0.0 && self.sigma_v_sq.is_finite()) {
            return bad(format!("sigma_v_sq must be positive, got {}", self.sigma_v_sq));
        }
        if !(self.spectral_radius_target > 0.0 && self.spectral_radius_target < 1.0) {
            return bad(format!("spectral_radius_target must lie in (0, 1), got {}", self.spectral_radius_target));
        }
        if self.p_grid.is_empty() {
            return bad("p_grid is empty".into());
        }
        if self.p_grid.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return bad("p_grid entries must be finite and nonnegative".into());
        }
        if self.p_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("p_grid must be strictly increasing".into());
        }
        if self.policies.is_empty() {
            return bad("policy list is empty".into());
        }
        if self.num_seeds == 0 {
            return bad("num_seeds must be at least 1".into());
        }
        if !(self.steady_tol > 0.0) || self.max_iters == 0 {
            return bad("steady_tol must be positive and max_iters at least 1".into());
        }
        if self.rng != RNG_NAME {
            return bad(format!("unsupported rng '{}', only '{RNG_NAME}' is available", self.rng));
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.num_seeds as u64).map(move |k| self.seed.wrapping_add(k))
    }
}

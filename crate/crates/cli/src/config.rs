//! Flat TOML experiment configuration with field-level validation.

use std::path::{Path, PathBuf};

use dampwave::spectral::{DampingPair, ModeIndex};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Analytic damping families selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingKind {
    Zero,
    Constant,
    /// `a1 = level (1 + slope s)`, `a2 = level`.
    Affine,
    /// Samples read from `damping_csv` (columns `s,a1,a2`).
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub tau: f64,
    pub dt_factor: f64,
    pub damping: DampingKind,
    pub damping_level: f64,
    pub damping_slope: f64,
    pub damping_csv: Option<PathBuf>,
    /// Initial displacement `phi_kl` for `forward`.
    pub initial_mode: [usize; 2],
    pub probe_budget: usize,
    pub truncation: usize,
    pub guard: f64,
    pub recon_mode: [usize; 2],
    pub lsq_iters: usize,
    pub lsq_order: usize,
    pub family_epsilons: Vec<f64>,
    pub calibration_member: Option<String>,
    pub m_lower: Option<f64>,
    pub m_upper: Option<f64>,
    /// Multiplies every tolerance of `verify`.
    pub tolerance_scale: f64,
    pub svg: bool,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 65,
            tau: 4.0,
            dt_factor: dampwave::wave::DEFAULT_DT_FACTOR,
            damping: DampingKind::Affine,
            damping_level: 0.1,
            damping_slope: 0.5,
            damping_csv: None,
            initial_mode: [0, 0],
            probe_budget: dampwave::reconstruction::DEFAULT_PROBE_BUDGET,
            truncation: 4,
            guard: dampwave::reconstruction::DEFAULT_GUARD,
            recon_mode: [0, 0],
            lsq_iters: 8,
            lsq_order: dampwave::reconstruction::MAX_LSQ_ORDER,
            family_epsilons: vec![0.4, 0.2, 0.1, 0.05],
            calibration_member: None,
            m_lower: None,
            m_upper: None,
            tolerance_scale: 1.0,
            svg: true,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative damping CSV paths are taken from the config's directory
        if let (Some(p), Some(dir)) = (&cfg.damping_csv, path.parent()) {
            if p.is_relative() {
                cfg.damping_csv = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < dampwave::wave::Grid2D::MIN_NODES {
            return Err(field_err("n", format!("must be >= 17, got {}", self.n)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(field_err("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(self.dt_factor > 0.0 && self.dt_factor <= 0.5) {
            return Err(field_err("dt_factor", format!("must lie in (0, 0.5], got {}", self.dt_factor)));
        }
        if !(0.0..=0.5).contains(&self.guard) {
            return Err(field_err("guard", format!("must lie in [0, 0.5], got {}", self.guard)));
        }
        if !(self.damping_level >= 0.0 && self.damping_level.is_finite()) {
            return Err(field_err("damping_level", format!("must be >= 0, got {}", self.damping_level)));
        }
        if !self.damping_slope.is_finite() || self.damping_slope < -1.0 {
            return Err(field_err(
                "damping_slope",
                format!("must be >= -1 to keep the damping nonnegative, got {}", self.damping_slope),
            ));
        }
        if self.damping == DampingKind::Csv && self.damping_csv.is_none() {
            return Err(field_err("damping_csv", "required when damping = \"csv\""));
        }
        if self.lsq_order > dampwave::reconstruction::MAX_LSQ_ORDER {
            return Err(field_err(
                "lsq_order",
                format!("must be <= {}, got {}", dampwave::reconstruction::MAX_LSQ_ORDER, self.lsq_order),
            ));
        }
        if self.family_epsilons.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(field_err("family_epsilons", "entries must be finite and >= 0"));
        }
        if let Some(m) = self.m_lower {
            if !(m >= 0.0) {
                return Err(field_err("m_lower", format!("must be >= 0, got {m}")));
            }
        }
        if let Some(m) = self.m_upper {
            if !(m > 0.0) {
                return Err(field_err("m_upper", format!("must be > 0, got {m}")));
            }
        }
        if !(self.tolerance_scale >= 0.0 && self.tolerance_scale.is_finite()) {
            return Err(field_err("tolerance_scale", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn initial_mode(&self) -> ModeIndex {
        ModeIndex::new(self.initial_mode[0], self.initial_mode[1])
    }

    pub fn recon_mode(&self) -> ModeIndex {
        ModeIndex::new(self.recon_mode[0], self.recon_mode[1])
    }

    /// Damping sampled on `n` nodes (CSV input is resampled when its node
    /// count differs).
    pub fn damping_pair(&self, n: usize) -> Result<DampingPair, CliError> {
        let pair = match self.damping {
            DampingKind::Zero => DampingPair::zero(n),
            DampingKind::Constant => DampingPair::constant(n, self.damping_level),
            DampingKind::Affine => DampingPair::affine(n, self.damping_level, self.damping_slope),
            DampingKind::Csv => {
                let path = self.damping_csv.as_ref().expect("validated");
                let a = DampingPair::load_csv(path).map_err(|e| field_err("damping_csv", e))?;
                if a.len() == n {
                    Ok(a)
                } else {
                    a.resample(n)
                }
            }
        };
        pair.map_err(|e| field_err("damping", e))
    }

    /// Family ids as written to the sweep CSV.
    pub fn family_ids(&self) -> Vec<String> {
        self.family_epsilons.iter().map(|e| format!("eps{e}")).collect()
    }

    pub fn calibration_index(&self) -> Result<usize, CliError> {
        match &self.calibration_member {
            None => Ok(0),
            Some(id) => self
                .family_ids()
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| field_err("calibration_member", format!("no family member with id `{id}`"))),
        }
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::velocity::PicardSettings;

/// Which parts of the model are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ModelVariant {
    /// No velocity: `v = 0`, no convection.
    #[serde(rename = "I")]
    NoVelocity,
    /// Darcy-Brinkman flow, Forchheimer terms switched off.
    #[serde(rename = "II")]
    Brinkman,
    /// Full Darcy-Forchheimer-Brinkman flow.
    #[serde(rename = "III")]
    #[default]
    Full,
    /// Full flow with the nonlocal chemical potential.
    #[serde(rename = "nonlocal")]
    Nonlocal,
}

impl ModelVariant {
    pub fn has_velocity(self) -> bool {
        !matches!(self, ModelVariant::NoVelocity)
    }

    pub fn has_forchheimer(self) -> bool {
        matches!(self, ModelVariant::Full | ModelVariant::Nonlocal)
    }

    pub fn is_nonlocal(self) -> bool {
        matches!(self, ModelVariant::Nonlocal)
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelVariant::NoVelocity => "I",
            ModelVariant::Brinkman => "II",
            ModelVariant::Full => "III",
            ModelVariant::Nonlocal => "nonlocal",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(ModelVariant::NoVelocity),
            "II" | "ii" | "2" => Ok(ModelVariant::Brinkman),
            "III" | "iii" | "3" => Ok(ModelVariant::Full),
            "nonlocal" => Ok(ModelVariant::Nonlocal),
            other => Err(Error::Config(format!(
                "unknown model variant {other:?} (expected I, II, III or nonlocal)"
            ))),
        }
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    /// Time step (days).
    pub dt: f64,
    /// Final time (days).
    pub t_end: f64,
    /// Tolerance on `max |phi_T^(k+1) - phi_T^k|` of the inner loop.
    pub gs_tol: f64,
    pub gs_max_iter: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Also require the nutrient increment to drop below `gs_tol`.
    pub strict_stopping: bool,
    /// Days between full-field snapshots; 0 disables snapshots.
    pub snapshot_interval: f64,
    #[serde(skip)]
    pub variant: ModelVariant,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_end: 21.0,
            gs_tol: 1e-6,
            gs_max_iter: 100,
            picard_tol: 1e-8,
            picard_max: 50,
            strict_stopping: false,
            snapshot_interval: 3.0,
            variant: ModelVariant::Full,
        }
    }
}

impl StepperConfig {
    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn picard(&self) -> PicardSettings {
        PicardSettings {
            tol: self.picard_tol,
            max_iter: self.picard_max,
        }
    }

    /// Names of the offending fields, empty when valid.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push("dt");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            out.push("t_end");
        }
        if !(self.gs_tol > 0.0) {
            out.push("gs_tol");
        }
        if self.gs_max_iter < 1 {
            out.push("gs_max_iter");
        }
        if !(self.picard_tol > 0.0) {
            out.push("picard_tol");
        }
        if self.picard_max < 1 {
            out.push("picard_max");
        }
        if !(self.snapshot_interval >= 0.0) {
            out.push("snapshot_interval");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.violations();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid stepper settings: {}", bad.join(", "))))
        }
    }

    /// Number of steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

//! TOML run configuration.
//!
//! ```toml
//! seed = 1
//! output_dir = "out"
//!
//! [model]
//! variant = "III"          # I, II, III or nonlocal
//! lambda_T = 1.0           # any of the 13 parameter names
//! kernel = "gaussian"      # nonlocal only: gaussian or indicator
//! kernel_width = 0.01
//! kernel_amplitude = 2.5   # gaussian only; matched to eps_T when absent
//!
//! [mesh]
//! kind = "radial"          # radial, disk or interval
//! n_cells = 256            # radial and interval
//! radius = 0.32
//! h = 0.01                 # disk
//! d_radial = 2             # spatial dimension of the radial model
//!
//! [initial]
//! confluence = 0.00562     # radial and interval
//! steepness = 200.0
//! shape = "a"              # disk
//!
//! [stepper]
//! dt = 0.05
//! t_end = 21.0
//!
//! [priors]
//! lambda_T = [0.01, 1.0]
//!
//! [sensitivity]
//! n_sobol = 2000
//! n_gradients = 300
//! ```
//!
//! Every section and key is optional; unknown keys are errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::mesh::{build_disk_mesh, build_radial_mesh_with_exponent, Mesh, ScalarField, DOMAIN_RADIUS};
use crate::model::{
    validate_assumptions, AssumptionReport, DoubleWellPotential, MobilityModel, ParameterVector,
    PARAMETER_NAMES,
};
use crate::nonlocal::{Kernel, KernelKind};
use crate::sensitivity::{PriorSpec, SimulationSetup, TimeMatching, DEFAULT_NOISE_STD, DEFAULT_REL_STEP};
use crate::stepper::{
    default_kernel, initial_2d_tumor, initial_radial_tumor, ModelVariant, StepperConfig, TumorShape,
    REFERENCE_CONFLUENCE,
};

/// Checks that must pass before any run. (A6) is reported but not enforced.
const REQUIRED_CHECKS: [&str; 5] = ["A1", "A2", "A3", "A4", "A5"];

/// `[model]`: variant, parameters and the optional kernel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelSection {
    pub variant: ModelVariant,
    pub parameters: ParameterVector,
    pub kernel: KernelSettings,
}

/// Kernel selection of the nonlocal variant. Absent fields fall back to the
/// Gaussian matched to `eps_T` with standard deviation `eps_T`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelSettings {
    pub kind: Option<KernelKind>,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
}

const KERNEL_KEYS: [&str; 3] = ["kernel", "kernel_width", "kernel_amplitude"];

impl TryFrom<Table> for ModelSection {
    type Error = String;

    fn try_from(mut table: Table) -> Result<Self, String> {
        let variant = match table.remove("variant") {
            None => ModelVariant::default(),
            Some(Value::String(s)) => s.parse().map_err(|e: Error| e.to_string())?,
            Some(other) => return Err(format!("model.variant must be a string, got {other}")),
        };
        let number = |v: Value, key: &str| -> Result<f64, String> {
            match v {
                Value::Float(f) => Ok(f),
                Value::Integer(i) => Ok(i as f64),
                other => Err(format!("model.{key} must be a number, got {other}")),
            }
        };
        let kind = match table.remove("kernel") {
            None => None,
            Some(v) => Some(v.try_into::<KernelKind>().map_err(|e| format!("model.kernel: {e}"))?),
        };
        let width = table.remove("kernel_width").map(|v| number(v, "kernel_width")).transpose()?;
        let amplitude = table
            .remove("kernel_amplitude")
            .map(|v| number(v, "kernel_amplitude"))
            .transpose()?;
        let parameters: ParameterVector = Value::Table(table).try_into().map_err(|e| format!("[model]: {e}"))?;
        Ok(Self {
            variant,
            parameters,
            kernel: KernelSettings { kind, width, amplitude },
        })
    }
}

impl From<ModelSection> for Table {
    fn from(m: ModelSection) -> Table {
        let mut t = Table::new();
        t.insert("variant".into(), Value::String(m.variant.label().into()));
        for (name, v) in PARAMETER_NAMES.iter().zip(m.parameters.to_array()) {
            t.insert((*name).into(), Value::Float(v));
        }
        if let Some(kind) = m.kernel.kind {
            let s = match kind {
                KernelKind::Gaussian => "gaussian",
                KernelKind::Indicator => "indicator",
            };
            t.insert(KERNEL_KEYS[0].into(), Value::String(s.into()));
        }
        if let Some(w) = m.kernel.width {
            t.insert(KERNEL_KEYS[1].into(), Value::Float(w));
        }
        if let Some(a) = m.kernel.amplitude {
            t.insert(KERNEL_KEYS[2].into(), Value::Float(a));
        }
        t
    }
}

impl Serialize for ModelSection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Table::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::try_from(Table::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    /// Radially symmetric model on `[0, radius]`.
    #[default]
    Radial,
    /// Triangulated disk of radius `radius`.
    Disk,
    /// Plain 1D interval `[0, radius]`.
    Interval,
}

/// `[mesh]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSettings {
    pub kind: MeshKind,
    pub n_cells: usize,
    pub radius: f64,
    /// Target edge length of the disk mesh.
    pub h: f64,
    /// Spatial dimension represented by the radial mesh (1, 2 or 3).
    pub d_radial: u32,
}

impl Default for MeshSettings {
    fn default() -> Self {
        Self {
            kind: MeshKind::Radial,
            n_cells: 256,
            radius: DOMAIN_RADIUS,
            h: 0.01,
            d_radial: 2,
        }
    }
}

impl MeshSettings {
    pub fn violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if self.n_cells < 2 && self.kind != MeshKind::Disk {
            bad.push("mesh.n_cells");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            bad.push("mesh.radius");
        }
        if self.kind == MeshKind::Disk && !(self.h > 0.0 && self.h < self.radius) {
            bad.push("mesh.h");
        }
        if !(1..=3).contains(&self.d_radial) {
            bad.push("mesh.d_radial");
        }
        bad
    }

    pub fn build(&self) -> Result<Mesh> {
        match self.kind {
            MeshKind::Radial => build_radial_mesh_with_exponent(self.n_cells, self.radius, self.d_radial - 1),
            MeshKind::Interval => Mesh::interval(self.n_cells, 0.0, self.radius, 0),
            MeshKind::Disk => build_disk_mesh(self.h, self.radius),
        }
    }
}

/// `[initial]`: sigmoid profile on 1D meshes, a named shape on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialCondition {
    pub confluence: f64,
    pub steepness: f64,
    pub shape: TumorShape,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            confluence: REFERENCE_CONFLUENCE,
            steepness: 200.0,
            shape: TumorShape::A,
        }
    }
}

impl InitialCondition {
    pub fn violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if !(self.confluence > 0.0 && self.confluence < 1.0) {
            bad.push("initial.confluence");
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            bad.push("initial.steepness");
        }
        bad
    }

    pub fn field(&self, mesh: Arc<Mesh>) -> Result<ScalarField> {
        if mesh.dim() == 2 {
            initial_2d_tumor(mesh, self.shape)
        } else {
            initial_radial_tumor(mesh, self.confluence, self.steepness)
        }
    }
}

/// `[priors]`: `name = [lower, upper]`, defaults for absent names.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PriorTable(pub PriorSpec);

impl TryFrom<Table> for PriorTable {
    type Error = String;

    fn try_from(table: Table) -> Result<Self, String> {
        let mut spec = PriorSpec::default();
        for (key, value) in table {
            let i = PARAMETER_NAMES
                .iter()
                .position(|n| *n == key)
                .ok_or_else(|| format!("unknown key `{key}` in [priors]"))?;
            let pair: Vec<f64> = value
                .try_into()
                .map_err(|_| format!("priors.{key} must be a [lower, upper] pair of numbers"))?;
            let [lo, hi] = pair[..] else {
                return Err(format!("priors.{key} must have exactly two entries"));
            };
            spec.bounds[i] = (lo, hi);
        }
        Ok(Self(spec))
    }
}

impl From<PriorTable> for Table {
    fn from(p: PriorTable) -> Table {
        PARAMETER_NAMES
            .iter()
            .zip(p.0.bounds)
            .map(|(n, (a, b))| ((*n).to_string(), Value::Array(vec![Value::Float(a), Value::Float(b)])))
            .collect()
    }
}

impl Serialize for PriorTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Table::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PriorTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::try_from(Table::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `[sensitivity]`: sample sizes and the radial forward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivitySettings {
    pub n_sobol: usize,
    pub n_gradients: usize,
    pub rel_step: f64,
    pub noise_std: f64,
    pub matching: TimeMatching,
    pub n_cells: usize,
    pub dt: f64,
}

impl Default for SensitivitySettings {
    fn default() -> Self {
        let setup = SimulationSetup::default();
        Self {
            n_sobol: 2000,
            n_gradients: 300,
            rel_step: DEFAULT_REL_STEP,
            noise_std: DEFAULT_NOISE_STD,
            matching: setup.matching,
            n_cells: setup.n_cells,
            dt: setup.stepper.dt,
        }
    }
}

impl SensitivitySettings {
    pub fn violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if self.n_sobol < 2 {
            bad.push("sensitivity.n_sobol");
        }
        if self.n_gradients < 1 {
            bad.push("sensitivity.n_gradients");
        }
        if !(self.rel_step > 0.0 && self.rel_step < 0.5) {
            bad.push("sensitivity.rel_step");
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            bad.push("sensitivity.noise_std");
        }
        if self.n_cells < 2 {
            bad.push("sensitivity.n_cells");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad.push("sensitivity.dt");
        }
        bad
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub model: ModelSection,
    pub mesh: MeshSettings,
    pub initial: InitialCondition,
    pub stepper: StepperConfig,
    pub priors: PriorTable,
    pub sensitivity: SensitivitySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            model: ModelSection::default(),
            mesh: MeshSettings::default(),
            initial: InitialCondition::default(),
            stepper: StepperConfig::default(),
            priors: PriorTable::default(),
            sensitivity: SensitivitySettings::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates TOML text. `origin` labels error messages.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let config = Self::from_toml_unchecked(text, origin)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses without [`RunConfig::validate`]; unknown keys and type
    /// errors are still rejected.
    pub fn from_toml_unchecked(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }

    pub fn parameters(&self) -> &ParameterVector {
        &self.model.parameters
    }

    /// Stepper settings with the configured variant.
    pub fn stepper_config(&self) -> StepperConfig {
        self.stepper.with_variant(self.model.variant)
    }

    /// Radial forward model of the sensitivity studies.
    pub fn simulation_setup(&self) -> SimulationSetup {
        let mut setup = SimulationSetup {
            n_cells: self.sensitivity.n_cells,
            measure_exponent: self.mesh.d_radial - 1,
            steepness: self.initial.steepness,
            matching: self.sensitivity.matching,
            ..Default::default()
        };
        setup.stepper.dt = self.sensitivity.dt;
        setup.stepper.gs_tol = self.stepper.gs_tol;
        setup.stepper.gs_max_iter = self.stepper.gs_max_iter;
        setup
    }

    /// Kernel of the nonlocal variant on `mesh`.
    pub fn kernel(&self, mesh: &Mesh) -> Result<Kernel> {
        let k = self.model.kernel;
        let p = &self.model.parameters;
        let dim = if mesh.dim() == 2 { 2 } else { mesh.measure_exponent() as usize + 1 };
        match k.kind {
            None if k.width.is_none() && k.amplitude.is_none() => default_kernel(mesh, p),
            None | Some(KernelKind::Gaussian) => {
                let width = k.width.unwrap_or(p.eps_t);
                match k.amplitude {
                    Some(a) => Kernel::gaussian(dim, a, width),
                    None => Kernel::gaussian_matching(dim, p.eps_t, width),
                }
            }
            Some(KernelKind::Indicator) => {
                if k.amplitude.is_some() {
                    return Err(Error::Config(
                        "model.kernel_amplitude is fixed by the width for the indicator kernel".into(),
                    ));
                }
                Kernel::indicator(dim, 1.0 / k.width.unwrap_or(p.eps_t))
            }
        }
    }

    /// Assumption report for the configured parameters (with the kernel
    /// checks in the nonlocal variant).
    pub fn assumptions(&self) -> Result<AssumptionReport> {
        let p = &self.model.parameters;
        let potential = DoubleWellPotential::new(p.e_bar);
        let mobility = MobilityModel::constant(p);
        if self.model.variant.is_nonlocal() {
            let mesh = self.mesh.build()?;
            let kernel = self.kernel(&mesh)?;
            Ok(validate_assumptions(p, &potential, &mobility, Some((&kernel, &mesh))))
        } else {
            Ok(validate_assumptions(p, &potential, &mobility, None))
        }
    }

    /// Full validation, listing every offending key.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        bad.extend(self.model.parameters.violations().iter().map(|n| format!("model.{n}")));
        bad.extend(self.stepper.violations().iter().map(|n| format!("stepper.{n}")));
        bad.extend(self.mesh.violations().iter().map(|s| s.to_string()));
        bad.extend(self.initial.violations().iter().map(|s| s.to_string()));
        bad.extend(self.sensitivity.violations().iter().map(|s| s.to_string()));
        let k = self.model.kernel;
        if k.width.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
            bad.push("model.kernel_width".into());
        }
        if k.amplitude.is_some_and(|a| !(a >= 0.0 && a.is_finite())) {
            bad.push("model.kernel_amplitude".into());
        }
        for (i, name) in PARAMETER_NAMES.iter().enumerate() {
            let (a, b) = self.priors.0.bounds[i];
            if !(a < b && a.is_finite() && b.is_finite()) {
                bad.push(format!("priors.{name}"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Config(format!("invalid values for: {}", bad.join(", "))));
        }
        let report = self.assumptions()?;
        let mut required: Vec<&str> = REQUIRED_CHECKS.to_vec();
        if self.model.variant.is_nonlocal() {
            required.push("A7");
        }
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| required.contains(&c.id) && !c.passed)
            .map(|c| format!("{} ({})", c.id, c.detail))
            .collect();
        if !failed.is_empty() {
            return Err(Error::Config(format!("assumptions violated: {}", failed.join("; "))));
        }
        if let Some(a6) = report.get("A6").filter(|c| !c.passed) {
            log::warn!("A6 does not hold: {}", a6.detail);
        }
        Ok(())
    }
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml(&text, path)
}

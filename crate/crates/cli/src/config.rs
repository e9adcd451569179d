//! Run configuration: JSON schema, defaults and validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qle_core::constants::ELECTRON_MASS_CGS;
use qle_core::numerics::{lin_space, log_space};
use qle_core::thermo::Dimension;
use qle_core::{MemoryKernel, ParticleModel, PhysicalConstants};

use crate::error::CliError;

pub const COMMANDS: [&str; 8] = [
    "susceptibility",
    "causality",
    "free-energy",
    "shift",
    "welton",
    "electron-motion",
    "diffusion",
    "oracle",
];

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Dimensionless,
    Cgs,
}

impl Units {
    pub fn constants(self) -> PhysicalConstants {
        match self {
            Self::Dimensionless => PhysicalConstants::dimensionless(),
            Self::Cgs => PhysicalConstants::cgs(),
        }
    }

    fn default_mass(self) -> f64 {
        match self {
            Self::Dimensionless => 1.0,
            Self::Cgs => ELECTRON_MASS_CGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// `ohmic`, `single-relaxation` or `blackbody`.
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// Form-factor cutoff: a frequency, a multiple of `1/tau_e`, or the point limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffSpec {
    Frequency(f64),
    Named(String),
    Scaled { per_tau_e: f64 },
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self::Named("point-limit".into())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default)]
    pub spring: f64,
    #[serde(default)]
    pub cutoff: CutoffSpec,
}

/// A sampling grid: explicit values or `points` samples between `start` and `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Range {
                start,
                stop,
                points,
                spacing,
            } => match spacing {
                Spacing::Linear => lin_space(*start, *stop, *points),
                Spacing::Log => log_space(*start, *stop, *points),
            },
        }
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        if let Self::Range {
            start,
            stop,
            points,
            spacing,
        } = self
        {
            if *points < 1 {
                return Err(CliError::config(format!("{key}.points must be at least 1")));
            }
            if *spacing == Spacing::Log && !(*start > 0.0 && *stop > 0.0) {
                return Err(CliError::config(format!(
                    "{key}: log spacing needs positive bounds"
                )));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(CliError::config(format!("{key} is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{key} has non-finite entries")));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("grid not increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSpec {
    /// `zero`, `ramped-constant`, `sinusoid` or `gaussian-pulse`.
    pub kind: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

impl Default for ForceSpec {
    fn default() -> Self {
        Self {
            kind: "zero".into(),
            amplitude: 0.0,
            start: None,
            width: None,
            frequency: None,
            phase: None,
            center: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    /// `point-limit`, `causal` or `abraham-lorentz`.
    #[serde(default = "default_equation")]
    pub equation: String,
    #[serde(default)]
    pub force: ForceSpec,
    /// Initial `[x, v, a]`.
    #[serde(default)]
    pub initial: [f64; 3],
}

fn default_equation() -> String {
    "causal".into()
}

impl Default for MotionSpec {
    fn default() -> Self {
        Self {
            equation: default_equation(),
            force: ForceSpec::default(),
            initial: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_n_bath")]
    pub n_bath: usize,
    /// Upper edge of the bath frequency window.
    pub omega_max: f64,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    /// `clamped` (force autocorrelation) or `thermal` (displacement).
    #[serde(default = "default_start")]
    pub start: String,
    /// Write the raw trajectories next to the CSV.
    #[serde(default)]
    pub dump: bool,
}

fn default_n_bath() -> usize {
    200
}

fn default_n_traj() -> usize {
    4000
}

fn default_start() -> String {
    "clamped".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub units: Units,
    /// `1` or `3`; scales free energies and shifts by the number of dimensions.
    #[serde(default = "default_dim")]
    pub dim: u8,
    /// Relative quadrature tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub allow_acausal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<GridSpec>,
    /// Cutoff sweep for `causality`, in units of `1/tau_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// `quantum`, `classical` or `auto` for the diffusion integrand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Stem of the output files; defaults to the command name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Output summary written by a previous run. Ignored on input.
    #[serde(default, skip_serializing)]
    pub sidecar: Option<serde_json::Value>,
}

fn default_dim() -> u8 {
    1
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let cfg = read_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a config file without the semantic checks, so that command-line
/// overrides can fill in missing values first.
pub fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_unchecked(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg = parse_unchecked(text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_unchecked(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
    cfg.sidecar = None;
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("{key} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(CliError::unknown_command(&self.command));
        }
        match self.kernel.variant.as_str() {
            "ohmic" => {
                positive("kernel.gamma", self.kernel.gamma.unwrap_or(f64::NAN))?;
            }
            "single-relaxation" => {
                positive("kernel.gamma", self.kernel.gamma.unwrap_or(f64::NAN))?;
                positive("kernel.tau", self.kernel.tau.unwrap_or(f64::NAN))?;
            }
            "blackbody" => {}
            other => {
                return Err(CliError::config(format!(
                    "kernel.variant: unknown variant \"{other}\" (expected ohmic, single-relaxation or blackbody)"
                )))
            }
        }
        if let CutoffSpec::Named(n) = &self.model.cutoff {
            if n != "point-limit" {
                return Err(CliError::config(format!(
                    "model.cutoff: expected a number, {{\"per_tau_e\": x}} or \"point-limit\", got \"{n}\""
                )));
            }
        }
        if self.dim != 1 && self.dim != 3 {
            return Err(CliError::config(format!(
                "dim must be 1 or 3, got {}",
                self.dim
            )));
        }
        positive("tolerance", self.tolerance)?;
        for (key, grid) in [
            ("temperatures", &self.temperatures),
            ("times", &self.times),
            ("frequencies", &self.frequencies),
            ("cutoffs", &self.cutoffs),
        ] {
            if let Some(g) = grid {
                g.validate(key)?;
            }
        }
        if let Some(t) = self.temperature {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::config(format!(
                    "temperature must be non-negative, got {t}"
                )));
            }
        }
        if let Some(c) = &self.coth {
            if !matches!(c.as_str(), "quantum" | "classical" | "auto") {
                return Err(CliError::config(format!("coth: unknown mode \"{c}\"")));
            }
        }
        if let Some(name) = &self.name {
            let ok = !name.is_empty()
                && name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
                && !name.starts_with('.');
            if !ok {
                return Err(CliError::config(format!(
                    "name must be a plain file stem, got \"{name}\""
                )));
            }
        }
        if let Some(m) = &self.motion {
            if !matches!(
                m.equation.as_str(),
                "point-limit" | "causal" | "abraham-lorentz"
            ) {
                return Err(CliError::config(format!(
                    "motion.equation: unknown equation \"{}\"",
                    m.equation
                )));
            }
            if !matches!(
                m.force.kind.as_str(),
                "zero" | "ramped-constant" | "sinusoid" | "gaussian-pulse"
            ) {
                return Err(CliError::config(format!(
                    "motion.force.kind: unknown kind \"{}\"",
                    m.force.kind
                )));
            }
        }
        if let Some(o) = &self.oracle {
            if !matches!(o.start.as_str(), "clamped" | "thermal") {
                return Err(CliError::config(format!(
                    "oracle.start: unknown start \"{}\"",
                    o.start
                )));
            }
        }
        let need = |key: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(CliError::config(format!(
                    "command {} needs \"{key}\"",
                    self.command
                )))
            }
        };
        match self.command.as_str() {
            "susceptibility" => need("frequencies", self.frequencies.is_some())?,
            "free-energy" | "shift" | "welton" => {
                need("temperatures", self.temperatures.is_some())?
            }
            "electron-motion" => need("times", self.times.is_some())?,
            "diffusion" => {
                need("times", self.times.is_some())?;
                need("temperature", self.temperature.is_some())?;
            }
            "oracle" => {
                need("times", self.times.is_some())?;
                need("temperature", self.temperature.is_some())?;
                need("oracle", self.oracle.is_some())?;
                need("seed", self.seed.is_some())?;
            }
            _ => {}
        }
        self.particle_model()?;
        Ok(())
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.units.constants()
    }

    pub fn dimension(&self) -> Dimension {
        if self.dim == 3 {
            Dimension::Three
        } else {
            Dimension::One
        }
    }

    pub fn mass(&self) -> f64 {
        self.model.mass.unwrap_or_else(|| self.units.default_mass())
    }

    /// Model with the configured cutoff resolved.
    pub fn particle_model(&self) -> Result<ParticleModel, CliError> {
        let k = self.constants();
        let mass = self.mass();
        let built = match &self.model.cutoff {
            CutoffSpec::Frequency(w) => ParticleModel::new(mass, self.model.spring, *w, k),
            CutoffSpec::Named(_) => ParticleModel::point_limit(mass, self.model.spring, k),
            CutoffSpec::Scaled { per_tau_e } => {
                let tau = k.radiation_coefficient() / mass;
                ParticleModel::new(mass, self.model.spring, per_tau_e / tau, k)
            }
        };
        built.map_err(|e| CliError::config(format!("model: {e}")))
    }

    pub fn memory_kernel(&self, model: &ParticleModel) -> Result<MemoryKernel, CliError> {
        let k = match self.kernel.variant.as_str() {
            "ohmic" => MemoryKernel::ohmic(self.kernel.gamma.unwrap_or(f64::NAN), model.mass),
            "single-relaxation" => MemoryKernel::single_relaxation(
                self.kernel.gamma.unwrap_or(f64::NAN),
                self.kernel.tau.unwrap_or(f64::NAN),
                model.mass,
            ),
            _ => model.blackbody_kernel(),
        };
        k.map_err(|e| CliError::config(format!("kernel: {e}")))
    }

    pub fn stem(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.command)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(r#"{"command": "causality", "kernel": {"variant": "blackbody"}}"#)
            .unwrap();
        assert_eq!(c.units, Units::Dimensionless);
        assert_eq!(c.dim, 1);
        assert_eq!(c.tolerance, DEFAULT_TOLERANCE);
        assert_eq!(c.model.cutoff, CutoffSpec::Named("point-limit".into()));
        assert_eq!(c.mass(), 1.0);
    }

    #[test]
    fn unknown_variant_names_the_key() {
        let e = parse_config(r#"{"command": "causality", "kernel": {"variant": "lorentz"}}"#)
            .unwrap_err();
        assert!(e.reason.contains("variant"), "{}", e.reason);
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config(
            r#"{"command": "causality", "kernel": {"variant": "blackbody"}, "temprature": 1}"#,
        )
        .unwrap_err();
        assert!(e.reason.contains("temprature"), "{}", e.reason);
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse_config("{\n  \"command\": \"causality\",\n  \"kernel\": }").unwrap_err();
        assert!(e.reason.contains("line 3"), "{}", e.reason);
        assert!(e.reason.contains("column"), "{}", e.reason);
    }

    #[test]
    fn decreasing_grid_rejected() {
        let e = parse_config(
            r#"{"command": "free-energy", "kernel": {"variant": "blackbody"}, "temperatures": [2.0, 1.0]}"#,
        )
        .unwrap_err();
        assert_eq!(e.reason, "grid not increasing");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_command_has_its_own_code() {
        let e =
            parse_config(r#"{"command": "plot", "kernel": {"variant": "blackbody"}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn oracle_requires_seed() {
        let e = parse_config(
            r#"{"command": "oracle", "kernel": {"variant": "ohmic", "gamma": 1},
                "times": [0, 1], "temperature": 1, "oracle": {"omega_max": 50}}"#,
        )
        .unwrap_err();
        assert!(e.reason.contains("seed"));
    }

    #[test]
    fn cgs_constants_give_radiation_rate() {
        let c = parse_config(
            r#"{"command": "causality", "kernel": {"variant": "blackbody"}, "units": "cgs"}"#,
        )
        .unwrap();
        let m = c.particle_model().unwrap();
        let rate = 1.0 / m.tau_e();
        assert!((rate / 1.60e23 - 1.0).abs() < 5e-3, "{rate:e}");
    }

    #[test]
    fn cutoff_in_units_of_radiation_time() {
        let c = parse_config(
            r#"{"command": "causality", "kernel": {"variant": "blackbody"}, "model": {"cutoff": {"per_tau_e": 1.1}}}"#,
        )
        .unwrap();
        let m = c.particle_model().unwrap();
        assert!((m.cutoff * m.tau_e() - 1.1).abs() < 1e-12);
    }
}

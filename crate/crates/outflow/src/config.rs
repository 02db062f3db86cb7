//! TOML run configuration with explicit-default resolution.
//!
//! A parsed configuration is *resolved*: every optional field is replaced by
//! its documented default and the far-field velocity is made explicit (a
//! `mach_target` is converted to `u_plus = -mach * c(v_plus, theta_plus)`).
//! The resolved form serializes back to TOML, and re-running from that file
//! reproduces the run byte for byte.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::{sound_speed_mach, ClosureRegistry, EosError, GasModel, PhysicalParams, ThermoState};
use crate::harness::{PerturbationShape, PerturbationSpec};
use crate::transient::FarFieldMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("inadmissible far field: u_plus = {u_plus} >= 0 has no stationary solution")]
    NoSolution { u_plus: f64 },
    #[error(transparent)]
    Eos(#[from] EosError),
}

fn default_closure() -> String {
    "ideal-polytropic".into()
}
fn default_one() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.8
}
fn default_t_end() -> f64 {
    10.0
}
fn default_stride() -> usize {
    100
}
fn default_seed_scale() -> f64 {
    0.05
}
fn default_profile_n() -> usize {
    20_000
}
fn default_width() -> f64 {
    2.0
}
fn default_amp() -> f64 {
    0.005
}
fn default_far_mode() -> String {
    "dirichlet".into()
}
fn default_out() -> String {
    "out".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(default = "default_closure")]
    pub closure: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Default for GasSection {
    fn default() -> Self {
        Self {
            closure: default_closure(),
            params: BTreeMap::from([("gamma".into(), 1.4), ("r".into(), 1.0)]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldSection {
    #[serde(default = "default_one")]
    pub v_plus: f64,
    #[serde(default = "default_one")]
    pub theta_plus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_plus: Option<f64>,
    /// Mach number target; resolved to `u_plus = -mach * c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mach_target: Option<f64>,
}

impl Default for FarFieldSection {
    fn default() -> Self {
        Self {
            v_plus: 1.0,
            theta_plus: 1.0,
            u_plus: None,
            mach_target: Some(1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default = "default_one")]
    pub mu: f64,
    #[serde(default = "default_one")]
    pub kappa: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { mu: 1.0, kappa: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    /// Transonic center-manifold seed (`y10`) or non-degenerate boundary
    /// amplitude (`eps`), depending on the classified regime.
    #[serde(default = "default_seed_scale")]
    pub seed: f64,
    /// Domain length; `0` selects the regime-dependent default.
    #[serde(default)]
    pub l: f64,
    #[serde(default = "default_profile_n")]
    pub n: usize,
    /// Stable-eigenvector weights for supersonic seeding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_weights: Option<[f64; 2]>,
}

impl Default for StationarySection {
    fn default() -> Self {
        Self {
            seed: default_seed_scale(),
            l: 0.0,
            n: default_profile_n(),
            seed_weights: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSection {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// `"dirichlet"` or `"zero-gradient"`.
    #[serde(default = "default_far_mode")]
    pub far_field_mode: String,
}

impl Default for TransientSection {
    fn default() -> Self {
        Self {
            cfl: default_cfl(),
            t_end: default_t_end(),
            stride: default_stride(),
            far_field_mode: default_far_mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    /// `"gaussian-bump"`, `"compact-bump"`, or `"decaying-wave"`.
    #[serde(default = "default_closure_shape")]
    pub shape: String,
    #[serde(default)]
    pub a_rho: f64,
    #[serde(default = "default_amp")]
    pub a_u: f64,
    #[serde(default = "default_amp")]
    pub a_theta: f64,
    /// Center; `0` selects a quarter of the domain length.
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Phase offset for the wave shape; randomized by `--seed`.
    #[serde(default)]
    pub phase: f64,
}

fn default_closure_shape() -> String {
    "gaussian-bump".into()
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            shape: default_closure_shape(),
            a_rho: 0.0,
            a_u: default_amp(),
            a_theta: default_amp(),
            center: 0.0,
            width: default_width(),
            phase: 0.0,
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub gas: GasSection,
    #[serde(default)]
    pub far_field: FarFieldSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub transient: TransientSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default = "default_out")]
    pub output_dir: String,
}

impl RunConfig {
    pub fn far_field_mode(&self) -> Result<FarFieldMode, ConfigError> {
        match self.transient.far_field_mode.as_str() {
            "dirichlet" => Ok(FarFieldMode::Dirichlet),
            "zero-gradient" => Ok(FarFieldMode::ZeroGradient),
            other => Err(ConfigError::Invalid(format!(
                "far_field_mode must be \"dirichlet\" or \"zero-gradient\", got {other:?}"
            ))),
        }
    }

    pub fn perturbation_shape(&self) -> Result<PerturbationShape, ConfigError> {
        match self.perturbation.shape.as_str() {
            "gaussian-bump" => Ok(PerturbationShape::GaussianBump),
            "compact-bump" => Ok(PerturbationShape::CompactBump),
            "decaying-wave" => Ok(PerturbationShape::DecayingWave),
            other => Err(ConfigError::Invalid(format!(
                "perturbation shape must be gaussian-bump, compact-bump or decaying-wave, \
                 got {other:?}"
            ))),
        }
    }

    /// Build the perturbation spec for a domain of length `l`.
    pub fn perturbation_spec(&self, l: f64) -> Result<PerturbationSpec, ConfigError> {
        let p = &self.perturbation;
        Ok(PerturbationSpec {
            shape: self.perturbation_shape()?,
            a_rho: p.a_rho,
            a_u: p.a_u,
            a_theta: p.a_theta,
            center: if p.center > 0.0 { p.center } else { l / 4.0 },
            width: p.width,
            phase: p.phase,
        })
    }

    pub fn physical_params(&self) -> PhysicalParams {
        PhysicalParams {
            mu: self.physics.mu,
            kappa: self.physics.kappa,
        }
    }
}

/// Parse a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: RunConfig = toml::from_str(&text)?;
    Ok(cfg)
}

/// A validated configuration plus its constructed gas model and explicit
/// far-field velocity.
pub struct Resolved {
    pub config: RunConfig,
    pub model: Arc<dyn GasModel>,
    pub u_plus: f64,
}

/// Validate and resolve a configuration (defaults explicit, `u_plus`
/// computed, gas model instantiated).
pub fn resolve(mut cfg: RunConfig, registry: &ClosureRegistry) -> Result<Resolved, ConfigError> {
    let model = registry.build(&cfg.gas.closure, &cfg.gas.params)?;
    let ff = &cfg.far_field;
    if !(ff.v_plus > 0.0) || !(ff.theta_plus > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "far field must have v_plus > 0 and theta_plus > 0, got ({}, {})",
            ff.v_plus, ff.theta_plus
        )));
    }
    let state = ThermoState::new(ff.v_plus, ff.theta_plus)?;
    let u_plus = match (ff.u_plus, ff.mach_target) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "specify either u_plus or mach_target, not both".into(),
            ))
        }
        (None, None) => {
            return Err(ConfigError::Invalid(
                "far field needs u_plus or mach_target".into(),
            ))
        }
        (Some(u), None) => u,
        (None, Some(m)) => {
            if !(m > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "mach_target must be positive, got {m}"
                )));
            }
            let ss = sound_speed_mach(model.as_ref(), state, -1.0)?;
            -m * ss.c
        }
    };
    if !(u_plus < 0.0) {
        return Err(ConfigError::NoSolution { u_plus });
    }
    if !(cfg.physics.mu > 0.0) || !(cfg.physics.kappa > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "physics requires mu > 0 and kappa > 0, got ({}, {})",
            cfg.physics.mu, cfg.physics.kappa
        )));
    }
    if cfg.stationary.n < 4 {
        return Err(ConfigError::Invalid(format!(
            "stationary.n = {} too small",
            cfg.stationary.n
        )));
    }
    // Make the resolved velocity explicit for round-tripping.
    cfg.far_field.u_plus = Some(u_plus);
    cfg.far_field.mach_target = None;
    Ok(Resolved {
        config: cfg,
        model,
        u_plus,
    })
}

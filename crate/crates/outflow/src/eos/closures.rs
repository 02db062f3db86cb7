use std::collections::BTreeMap;
use std::sync::Arc;

use super::{EosError, GasModel, IdealPolytropic, IdealPolytropicParams, ThermoState};

/// A gas closure defined by two plain functions `p(v, theta)` and `e(v, theta)`.
///
/// Partials and entropy go through the generic finite-difference and
/// quadrature paths of the trait defaults. Intended for test closures and
/// small analytic models.
pub struct AnalyticClosure<P, E> {
    name: String,
    pressure: P,
    energy: E,
    reference: ThermoState,
}

impl<P, E> AnalyticClosure<P, E>
where
    P: Fn(f64, f64) -> f64 + Send + Sync,
    E: Fn(f64, f64) -> f64 + Send + Sync,
{
    pub fn new(name: &str, pressure: P, energy: E, reference: ThermoState) -> Self {
        Self {
            name: name.to_string(),
            pressure,
            energy,
            reference,
        }
    }
}

impl<P, E> GasModel for AnalyticClosure<P, E>
where
    P: Fn(f64, f64) -> f64 + Send + Sync,
    E: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn pressure(&self, v: f64, theta: f64) -> f64 {
        (self.pressure)(v, theta)
    }

    fn energy(&self, v: f64, theta: f64) -> f64 {
        (self.energy)(v, theta)
    }

    fn reference(&self) -> ThermoState {
        self.reference
    }
}

type Factory =
    Box<dyn Fn(&BTreeMap<String, f64>) -> Result<Arc<dyn GasModel>, EosError> + Send + Sync>;

/// Name-keyed closure registry.
///
/// Built-in closures:
/// - `"ideal-polytropic"`: params `gamma`, `r`, optional `a` (default 1).
/// - `"power-law"`: `p = c theta v^-n`, `e = cv theta`; params `c`, `n`, `cv`.
///   Maxwell-compatible because `theta p_theta - p = 0 = e_v`.
/// - `"volume-corrected"`: `p = r theta / v - a / v^2`, `e = cv theta - a / v`;
///   params `r`, `a`, `cv`. A non-ideal but thermodynamically consistent test
///   gas (`e_v = theta p_theta - p = a / v^2`).
///
/// Additional closures can be registered under new names.
pub struct ClosureRegistry {
    factories: BTreeMap<String, Factory>,
}

impl ClosureRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
        };
        reg.register("ideal-polytropic", |params| {
            let gamma = require("ideal-polytropic", params, "gamma")?;
            let r = require("ideal-polytropic", params, "r")?;
            let a = params.get("a").copied().unwrap_or(1.0);
            Ok(Arc::new(IdealPolytropic::new(IdealPolytropicParams {
                gamma,
                r,
                a,
            })?))
        });
        reg.register("power-law", |params| {
            let c = require("power-law", params, "c")?;
            let n = require("power-law", params, "n")?;
            let cv = require("power-law", params, "cv")?;
            check_positive("power-law", "c", c)?;
            check_positive("power-law", "cv", cv)?;
            Ok(Arc::new(AnalyticClosure::new(
                "power-law",
                move |v: f64, theta: f64| c * theta * v.powf(-n),
                move |_v: f64, theta: f64| cv * theta,
                ThermoState::new(1.0, 1.0)?,
            )))
        });
        reg.register("volume-corrected", |params| {
            let r = require("volume-corrected", params, "r")?;
            let a = require("volume-corrected", params, "a")?;
            let cv = require("volume-corrected", params, "cv")?;
            check_positive("volume-corrected", "r", r)?;
            check_positive("volume-corrected", "cv", cv)?;
            Ok(Arc::new(AnalyticClosure::new(
                "volume-corrected",
                move |v: f64, theta: f64| r * theta / v - a / (v * v),
                move |v: f64, theta: f64| cv * theta - a / v,
                ThermoState::new(1.0, 1.0)?,
            )))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BTreeMap<String, f64>) -> Result<Arc<dyn GasModel>, EosError>
            + Send
            + Sync
            + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn build(
        &self,
        name: &str,
        params: &BTreeMap<String, f64>,
    ) -> Result<Arc<dyn GasModel>, EosError> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| EosError::UnknownClosure(name.to_string()))?;
        factory(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}

fn require(closure: &str, params: &BTreeMap<String, f64>, key: &str) -> Result<f64, EosError> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| EosError::MissingParameter {
            closure: closure.to_string(),
            param: key.to_string(),
        })
}

fn check_positive(closure: &str, param: &str, value: f64) -> Result<(), EosError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(EosError::BadParameter {
            closure: closure.to_string(),
            param: param.to_string(),
            value,
        })
    }
}

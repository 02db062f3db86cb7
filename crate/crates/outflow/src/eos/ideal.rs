use serde::{Deserialize, Serialize};

use super::{EosError, GasModel, Partials, ThermoState};

/// Parameters of the ideal polytropic closure
/// `p = R rho theta = A rho^gamma exp((gamma - 1) s / R)`, `e = R theta / (gamma - 1)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdealPolytropicParams {
    pub gamma: f64,
    pub r: f64,
    /// Entropy-pressure constant of the `(v, s)` form of the closure. Only the
    /// entropy offset depends on it; we normalize `s = 0` at the reference
    /// state instead, so `a` is carried for reporting.
    pub a: f64,
}

/// Ideal polytropic gas with analytic partials and closed-form entropy.
#[derive(Debug, Clone, Copy)]
pub struct IdealPolytropic {
    params: IdealPolytropicParams,
    reference: ThermoState,
}

impl IdealPolytropic {
    pub fn new(params: IdealPolytropicParams) -> Result<Self, EosError> {
        Self::with_reference(params, ThermoState::new(1.0, 1.0)?)
    }

    pub fn with_reference(
        params: IdealPolytropicParams,
        reference: ThermoState,
    ) -> Result<Self, EosError> {
        if !(params.gamma > 1.0) {
            return Err(EosError::BadParameter {
                closure: "ideal-polytropic".into(),
                param: "gamma".into(),
                value: params.gamma,
            });
        }
        if !(params.r > 0.0) {
            return Err(EosError::BadParameter {
                closure: "ideal-polytropic".into(),
                param: "r".into(),
                value: params.r,
            });
        }
        if !(params.a > 0.0) {
            return Err(EosError::BadParameter {
                closure: "ideal-polytropic".into(),
                param: "a".into(),
                value: params.a,
            });
        }
        Ok(Self { params, reference })
    }

    pub fn params(&self) -> IdealPolytropicParams {
        self.params
    }
}

impl GasModel for IdealPolytropic {
    fn name(&self) -> &str {
        "ideal-polytropic"
    }

    fn pressure(&self, v: f64, theta: f64) -> f64 {
        self.params.r * theta / v
    }

    fn energy(&self, _v: f64, theta: f64) -> f64 {
        self.params.r * theta / (self.params.gamma - 1.0)
    }

    fn reference(&self) -> ThermoState {
        self.reference
    }

    fn has_analytic_partials(&self) -> bool {
        true
    }

    fn local_coeffs(&self, v: f64, theta: f64) -> (f64, f64, f64, f64) {
        let IdealPolytropicParams { gamma, r, .. } = self.params;
        (
            r * theta / v,
            -r * theta / (v * v),
            r / v,
            r / (gamma - 1.0),
        )
    }

    fn partials(&self, st: ThermoState) -> Result<Partials, EosError> {
        let st = ThermoState::new(st.v, st.theta)?;
        let IdealPolytropicParams { gamma, r, .. } = self.params;
        let (v, theta) = (st.v, st.theta);
        Ok(Partials {
            p: r * theta / v,
            e: r * theta / (gamma - 1.0),
            p_v: -r * theta / (v * v),
            p_theta: r / v,
            e_v: 0.0,
            e_theta: r / (gamma - 1.0),
            p_vv: 2.0 * r * theta / (v * v * v),
            p_vtheta: -r / (v * v),
            p_thetatheta: 0.0,
            e_vv: 0.0,
            e_vtheta: 0.0,
            e_thetatheta: 0.0,
        })
    }

    fn entropy(&self, st: ThermoState) -> Result<f64, EosError> {
        let st = ThermoState::new(st.v, st.theta)?;
        let IdealPolytropicParams { gamma, r, .. } = self.params;
        Ok(r / (gamma - 1.0) * (st.theta / self.reference.theta).ln()
            + r * (st.v / self.reference.v).ln())
    }

    fn theta_from_entropy(&self, v: f64, s: f64) -> Result<f64, EosError> {
        if !(v > 0.0) {
            return Err(EosError::Domain { v, theta: f64::NAN });
        }
        let IdealPolytropicParams { gamma, r, .. } = self.params;
        let log_theta = (gamma - 1.0) / r * (s - r * (v / self.reference.v).ln());
        Ok(self.reference.theta * log_theta.exp())
    }
}

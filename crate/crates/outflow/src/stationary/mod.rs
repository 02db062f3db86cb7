//! Stationary boundary-layer solutions of the outflow problem.
//!
//! After eliminating the velocity through the constant mass flux
//! `rho u = rho_+ u_+`, the stationary system reduces to a planar autonomous
//! ODE `W_x = G(W)` for `W = (v, theta)` with equilibrium at the far field.
//! The sign of `det J_+` classifies the far field into the supersonic,
//! subsonic and transonic regimes; the non-degenerate profiles are built by
//! backward integration from a stable-manifold seed and the degenerate
//! transonic profile through a center-manifold reduction.

mod fit;
mod profile;
mod reduction;
mod verify;

pub use fit::{exponential_rate, linear_fit, log_log_slope};
pub use profile::{
    build_nondegenerate_profile, build_transonic_profile, FarFieldScalars, StationaryProfile,
};
pub use reduction::{
    integrate_planar, integrate_scalar, transonic_reduction, CenterManifoldData,
};
pub use verify::{verify_profile, ResidualReport, TransonicChecks};

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::eos::{
    sound_speed_mach, EosError, GasModel, PhysicalParams, ThermoState, TRANSONIC_MACH_TOL,
};

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error(transparent)]
    Eos(#[from] EosError),
    #[error("u_plus = {u_plus} >= 0: the integrated mass flux rho u = rho_+ u_+ admits no stationary solution with outflow boundary velocity")]
    NoSolution { u_plus: f64 },
    #[error("operation requires the {expected:?} regime but the far field is {actual:?} (M = {mach})")]
    WrongRegime {
        expected: RegimeKind,
        actual: RegimeKind,
        mach: f64,
    },
    #[error("a_plus = {a_plus} <= 0: extra sign conditions violated or numerically marginal")]
    Inadmissible { a_plus: f64 },
    #[error("initial center coordinate y10 = {y10} rejected: forward reduced dynamics blows up for y10 < 0 and {max} is the configured small-data threshold")]
    BadSeed { y10: f64, max: f64 },
    #[error("grid too coarse: step {h} over length {l} cannot resolve the profile (limit {limit})")]
    GridTooCoarse { h: f64, l: f64, limit: f64 },
    #[error("backward trajectory left the admissible domain at x = {x} (v = {v}, theta = {theta}): seed amplitude too large")]
    SeedTooLarge { x: f64, v: f64, theta: f64 },
}

/// Small-data threshold for profile seeds, in reduced coordinates.
pub const DELTA0_DEFAULT: f64 = 0.1;

/// Far-field data of the stationary problem.
#[derive(Clone)]
pub struct FarFieldSpec {
    pub model: Arc<dyn GasModel>,
    pub phys: PhysicalParams,
    pub v_plus: f64,
    pub theta_plus: f64,
    pub u_plus: f64,
    pub p_plus: f64,
    pub e_plus: f64,
    pub s_plus: f64,
}

impl FarFieldSpec {
    pub fn new(
        model: Arc<dyn GasModel>,
        phys: PhysicalParams,
        v_plus: f64,
        theta_plus: f64,
        u_plus: f64,
    ) -> Result<Self, StationaryError> {
        let st = ThermoState::new(v_plus, theta_plus)?;
        if !(u_plus < 0.0) {
            return Err(StationaryError::NoSolution { u_plus });
        }
        let p_plus = model.pressure(st.v, st.theta);
        let e_plus = model.energy(st.v, st.theta);
        let s_plus = model.entropy(st)?;
        Ok(Self {
            model,
            phys,
            v_plus,
            theta_plus,
            u_plus,
            p_plus,
            e_plus,
            s_plus,
        })
    }

    pub fn plus_state(&self) -> ThermoState {
        ThermoState {
            v: self.v_plus,
            theta: self.theta_plus,
        }
    }

    pub fn rho_plus(&self) -> f64 {
        1.0 / self.v_plus
    }

    /// Right-hand side `(g1, g2)` of the reduced planar system.
    pub fn rhs(&self, v: f64, theta: f64) -> Result<(f64, f64), StationaryError> {
        let st = ThermoState::new(v, theta)?;
        let PhysicalParams { mu, kappa } = self.phys;
        let (u, vp) = (self.u_plus, self.v_plus);
        let p = self.model.pressure(st.v, st.theta);
        let e = self.model.energy(st.v, st.theta);
        let dv = v - vp;
        let g1 = u / (mu * vp) * dv + vp / (mu * u) * (p - self.p_plus);
        let g2 = u / (kappa * vp) * (e - self.e_plus) - u.powi(3) / (2.0 * kappa * vp.powi(3)) * dv * dv
            + u / (kappa * vp) * self.p_plus * dv;
        Ok((g1, g2))
    }

    /// Jacobian of `(g1, g2)` at an arbitrary point, via the model partials.
    pub fn rhs_jacobian(&self, v: f64, theta: f64) -> Result<[[f64; 2]; 2], StationaryError> {
        let st = ThermoState::new(v, theta)?;
        let parts = self.model.partials(st)?;
        let PhysicalParams { mu, kappa } = self.phys;
        let (u, vp) = (self.u_plus, self.v_plus);
        Ok([
            [u / (mu * vp) + vp / (mu * u) * parts.p_v, vp / (mu * u) * parts.p_theta],
            [
                u / (kappa * vp) * (parts.e_v + self.p_plus)
                    - u.powi(3) / (kappa * vp.powi(3)) * (v - vp),
                u / (kappa * vp) * parts.e_theta,
            ],
        ])
    }

    /// Jacobian `J_+` at the far field with the regime classification.
    pub fn jacobian_plus(&self) -> Result<RegimeClass, StationaryError> {
        let st = self.plus_state();
        let parts = self.model.partials(st)?;
        if !(parts.p_v < 0.0) || !(parts.e_theta > 0.0) {
            return Err(EosError::BasicConditions {
                v: st.v,
                theta: st.theta,
            }
            .into());
        }
        let PhysicalParams { mu, kappa } = self.phys;
        let (u, vp) = (self.u_plus, self.v_plus);
        let theta = self.theta_plus;

        let j = [
            [
                vp / (mu * u) * ((u / vp).powi(2) + parts.p_v),
                vp / (mu * u) * parts.p_theta,
            ],
            [
                u / (kappa * vp) * (parts.e_v + parts.p),
                u / (kappa * vp) * parts.e_theta,
            ],
        ];
        let det_direct = j[0][0] * j[1][1] - j[0][1] * j[1][0];

        let tilde_pv = parts.p_v - theta * parts.p_theta * parts.p_theta / parts.e_theta;
        let det_formula = ((u / vp).powi(2) + tilde_pv) * parts.e_theta / (mu * kappa);
        let b = vp / (mu * u)
            * ((u / vp).powi(2) + tilde_pv + theta * parts.p_theta * parts.p_theta / parts.e_theta)
            + u / (kappa * vp) * parts.e_theta;

        let disc = b * b - 4.0 * det_formula;
        let sq = disc.max(0.0).sqrt();
        let lambda1 = 0.5 * (b - sq);
        let lambda2 = 0.5 * (b + sq);

        let sound = sound_speed_mach(self.model.as_ref(), st, u)?;
        let margin = (sound.mach - 1.0).abs();
        let kind = if margin < TRANSONIC_MACH_TOL {
            RegimeKind::Transonic
        } else if sound.mach > 1.0 {
            RegimeKind::Supersonic
        } else {
            RegimeKind::Subsonic
        };

        Ok(RegimeClass {
            kind,
            mach: sound.mach,
            sound_speed: sound.c,
            j,
            det_j: det_direct,
            det_j_formula: det_formula,
            trace_b: b,
            discriminant: disc,
            lambda1,
            lambda2,
            margin,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeKind {
    Supersonic,
    Subsonic,
    Transonic,
}

/// Far-field regime classification data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeClass {
    pub kind: RegimeKind,
    pub mach: f64,
    pub sound_speed: f64,
    /// `J_+` assembled entrywise.
    pub j: [[f64; 2]; 2],
    /// Determinant computed directly from the entries.
    pub det_j: f64,
    /// Determinant through the closed formula in terms of `p_v(v, s)`.
    pub det_j_formula: f64,
    /// Trace of `J_+`.
    pub trace_b: f64,
    pub discriminant: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `|M - 1|`.
    pub margin: f64,
}

impl RegimeClass {
    /// Unit eigenvector for one of the two eigenvalues.
    pub fn eigenvector(&self, lambda: f64) -> [f64; 2] {
        // a12 = (v_+ / mu u_+) p_theta is nonzero on the admissible domain.
        let r = [self.j[0][1], lambda - self.j[0][0]];
        let norm = (r[0] * r[0] + r[1] * r[1]).sqrt();
        let sign = if r[0] < 0.0 || (r[0] == 0.0 && r[1] < 0.0) {
            -1.0
        } else {
            1.0
        };
        [sign * r[0] / norm, sign * r[1] / norm]
    }
}

//! Center-manifold reduction at the degenerate (transonic) far field.
//!
//! With `det J_+ = 0` the linearization has a zero eigenvalue; the similarity
//! transform by `B` splits the dynamics into a center coordinate `y1` and a
//! fast stable coordinate `y2`. On the quadratically truncated center manifold
//! `y2 = h2 y1^2` the profile tail is governed by the scalar equation
//! `y1' = -a_+ y1^2 + f1(y1, h2 y1^2)`.

use serde::Serialize;

use super::{FarFieldSpec, RegimeKind, StationaryError};
use crate::eos::PhysicalParams;

/// Artifacts of the transonic reduction.
#[derive(Debug, Clone, Serialize)]
pub struct CenterManifoldData {
    /// Entries of `J_+` at the transonic far field.
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    /// Nonzero eigenvalue, `lambda2 = a11 + a22 < 0`.
    pub lambda2: f64,
    /// Entries of the transform `B = [[1, b1], [-b1, b2]]`.
    pub b1: f64,
    pub b2: f64,
    /// Quadratic coefficient of the reduced equation; positive under the extra
    /// sign conditions.
    pub a_plus: f64,
    /// Quadratic `y1^2` coefficients of the transformed nonlinearities
    /// `(f1_tilde, f2_tilde)` before the diagonalizing combination.
    pub f1_tilde_quad: f64,
    pub f2_tilde_quad: f64,
    /// Quadratic `y1^2` coefficient of `f2`.
    pub f2_quad: f64,
    /// Quadratic coefficient of the center manifold `y2 = h2 y1^2`, from
    /// leading-order invariance: `h2 = -f2_quad / lambda2`.
    pub h2: f64,
    #[serde(skip)]
    spec_cache: SpecCache,
}

#[derive(Debug, Clone, Copy)]
struct SpecCache {
    v_plus: f64,
    theta_plus: f64,
    u_plus: f64,
    p_plus: f64,
    e_plus: f64,
    p_v: f64,
    p_theta: f64,
    e_v: f64,
    e_theta: f64,
    mu: f64,
    kappa: f64,
}

/// Build the reduction data at a transonic far field.
pub fn transonic_reduction(spec: &FarFieldSpec) -> Result<CenterManifoldData, StationaryError> {
    let regime = spec.jacobian_plus()?;
    if regime.kind != RegimeKind::Transonic {
        return Err(StationaryError::WrongRegime {
            expected: RegimeKind::Transonic,
            actual: regime.kind,
            mach: regime.mach,
        });
    }
    let parts = spec.model.partials(spec.plus_state())?;
    let PhysicalParams { mu, kappa } = spec.phys;
    let (u, vp, theta) = (spec.u_plus, spec.v_plus, spec.theta_plus);

    let b1 = theta * parts.p_theta / parts.e_theta;
    let b2 = mu * theta * u * u / (kappa * vp * vp);
    let denom = b2 + b1 * b1;

    // Quadratic y1^2 coefficients of the nonlinearity in the original chart,
    // restricted to the center direction (dv, dtheta) = (1, -b1) y1. The
    // second-derivative combinations carry the 1/2 Taylor factor; the kinetic
    // dv^2 term is exact and keeps its own 1/2.
    let f1_tilde_quad = vp / (mu * u)
        * 0.5
        * (parts.p_vv - 2.0 * b1 * parts.p_vtheta + b1 * b1 * parts.p_thetatheta);
    let f2_tilde_quad = u / (kappa * vp)
        * (0.5 * (parts.e_vv - 2.0 * b1 * parts.e_vtheta + b1 * b1 * parts.e_thetatheta)
            - u * u / (2.0 * vp * vp));

    let a_plus = -(b2 * f1_tilde_quad - b1 * f2_tilde_quad) / denom;
    if !(a_plus > 0.0) {
        return Err(StationaryError::Inadmissible { a_plus });
    }
    let f2_quad = (b1 * f1_tilde_quad + f2_tilde_quad) / denom;

    let lambda2 = regime.j[0][0] + regime.j[1][1];
    let h2 = -f2_quad / lambda2;

    Ok(CenterManifoldData {
        a11: regime.j[0][0],
        a12: regime.j[0][1],
        a21: regime.j[1][0],
        a22: regime.j[1][1],
        lambda2,
        b1,
        b2,
        a_plus,
        f1_tilde_quad,
        f2_tilde_quad,
        f2_quad,
        h2,
        spec_cache: SpecCache {
            v_plus: vp,
            theta_plus: theta,
            u_plus: u,
            p_plus: spec.p_plus,
            e_plus: spec.e_plus,
            p_v: parts.p_v,
            p_theta: parts.p_theta,
            e_v: parts.e_v,
            e_theta: parts.e_theta,
            mu,
            kappa,
        },
    })
}

impl CenterManifoldData {
    pub fn b_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0, self.b1], [-self.b1, self.b2]]
    }

    pub fn b_inverse(&self) -> [[f64; 2]; 2] {
        let d = self.b2 + self.b1 * self.b1;
        [[self.b2 / d, -self.b1 / d], [self.b1 / d, 1.0 / d]]
    }

    /// `(v, theta)` offset from the far field for reduced coordinates.
    pub fn w_from_y(&self, y1: f64, y2: f64) -> (f64, f64) {
        (y1 + self.b1 * y2, -self.b1 * y1 + self.b2 * y2)
    }

    /// Full transformed nonlinearity `(f1, f2)(y1, y2)` using the exact
    /// closures, not the quadratic truncation.
    pub fn nonlinearity(&self, model: &dyn crate::eos::GasModel, y1: f64, y2: f64) -> (f64, f64) {
        let c = &self.spec_cache;
        let (dv, dtheta) = self.w_from_y(y1, y2);
        let v = c.v_plus + dv;
        let theta = c.theta_plus + dtheta;
        let p = model.pressure(v, theta);
        let e = model.energy(v, theta);
        let f1_tilde = c.v_plus / (c.mu * c.u_plus)
            * (p - c.p_plus - c.p_v * dv - c.p_theta * dtheta);
        let f2_tilde = c.u_plus / (c.kappa * c.v_plus)
            * (e - c.e_plus - c.e_v * dv - c.e_theta * dtheta)
            - c.u_plus.powi(3) / (2.0 * c.kappa * c.v_plus.powi(3)) * dv * dv;
        let denom = self.b2 + self.b1 * self.b1;
        let f1 = (self.b2 * f1_tilde - self.b1 * f2_tilde) / denom + self.a_plus * y1 * y1;
        let f2 = (self.b1 * f1_tilde + f2_tilde) / denom;
        (f1, f2)
    }

    /// Right-hand side of the reduced center equation on the quadratic
    /// manifold: `-a_+ y1^2 + f1(y1, h2 y1^2)`.
    pub fn reduced_rhs(&self, model: &dyn crate::eos::GasModel, y1: f64) -> f64 {
        let y2 = self.h2 * y1 * y1;
        let (f1, _) = self.nonlinearity(model, y1, y2);
        -self.a_plus * y1 * y1 + f1
    }

    /// Right-hand side of the fast equation, for manifold-validation runs.
    pub fn fast_rhs(&self, model: &dyn crate::eos::GasModel, y1: f64, y2: f64) -> f64 {
        let (_, f2) = self.nonlinearity(model, y1, y2);
        self.lambda2 * y2 + f2
    }
}

/// Classical fixed-step fourth-order integration of a scalar autonomous ODE,
/// returning the value at every node `0..=n`.
pub fn integrate_scalar(rhs: &dyn Fn(f64) -> f64, y0: f64, h: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push(y);
    for _ in 0..n {
        let k1 = rhs(y);
        let k2 = rhs(y + 0.5 * h * k1);
        let k3 = rhs(y + 0.5 * h * k2);
        let k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    out
}

/// Fixed-step fourth-order integration of a planar autonomous ODE.
pub fn integrate_planar(
    rhs: &dyn Fn([f64; 2]) -> [f64; 2],
    w0: [f64; 2],
    h: f64,
    n: usize,
) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n + 1);
    let mut w = w0;
    out.push(w);
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    for _ in 0..n {
        let k1 = rhs(w);
        let k2 = rhs(add(w, k1, 0.5 * h));
        let k3 = rhs(add(w, k2, 0.5 * h));
        let k4 = rhs(add(w, k3, h));
        w = [
            w[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            w[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        out.push(w);
    }
    out
}

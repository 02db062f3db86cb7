//! Equation-of-state abstraction and thermodynamic identities.
//!
//! A [`GasModel`] supplies the closures `p(v, theta)` and `e(v, theta)` on the
//! admissible domain `v > 0`, `theta > 0`, subject to the basic conditions
//! `p_rho > 0` and `e_theta > 0`. Everything else (entropy, derivatives in the
//! `(v, s)` chart, sound speed, the far-field sign conditions) is derived here.
//!
//! Entropy is normalized to `s = 0` at the model's reference state. All
//! downstream quantities use entropy differences, so the additive constant
//! cancels.

mod closures;
mod conditions;
mod ideal;

pub use closures::{AnalyticClosure, ClosureRegistry};
pub use conditions::{
    check_conditions, ideal_betas, second_tilde_derivatives, sound_speed_mach, tilde_derivatives,
    ConditionReport, SoundSpeed, TRANSONIC_MACH_TOL,
};
pub use ideal::{IdealPolytropic, IdealPolytropicParams};

use serde::Serialize;
use thiserror::Error;

/// Machine epsilon for `f64`.
pub(crate) const EPS: f64 = f64::EPSILON;

#[derive(Debug, Error)]
pub enum EosError {
    #[error("state outside the admissible domain: v = {v}, theta = {theta}")]
    Domain { v: f64, theta: f64 },
    #[error("finite-difference stencil leaves the admissible domain at v = {v}, theta = {theta}")]
    StencilOutOfDomain { v: f64, theta: f64 },
    #[error("basic conditions p_rho > 0, e_theta > 0 violated at v = {v}, theta = {theta}")]
    BasicConditions { v: f64, theta: f64 },
    #[error("failed to bracket theta while inverting s(v, theta) = {s} at v = {v}")]
    InversionBracket { v: f64, s: f64 },
    #[error("unknown gas closure {0:?}")]
    UnknownClosure(String),
    #[error("closure {closure:?} missing parameter {param:?}")]
    MissingParameter { closure: String, param: String },
    #[error("closure {closure:?}: parameter {param} = {value} out of range")]
    BadParameter {
        closure: String,
        param: String,
        value: f64,
    },
}

/// A point of the thermodynamic `(v, theta)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoState {
    /// Specific volume, `v = 1/rho > 0`.
    pub v: f64,
    /// Absolute temperature, `theta > 0`.
    pub theta: f64,
}

impl ThermoState {
    pub fn new(v: f64, theta: f64) -> Result<Self, EosError> {
        if !(v > 0.0) || !(theta > 0.0) || !v.is_finite() || !theta.is_finite() {
            return Err(EosError::Domain { v, theta });
        }
        Ok(Self { v, theta })
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.v
    }
}

/// Viscosity and heat conductivity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhysicalParams {
    pub mu: f64,
    pub kappa: f64,
}

impl PhysicalParams {
    pub fn new(mu: f64, kappa: f64) -> Result<Self, EosError> {
        if !(mu > 0.0) || !(kappa > 0.0) {
            return Err(EosError::BadParameter {
                closure: "physics".into(),
                param: if mu > 0.0 { "kappa".into() } else { "mu".into() },
                value: if mu > 0.0 { kappa } else { mu },
            });
        }
        Ok(Self { mu, kappa })
    }
}

/// First and second partial derivatives of `p` and `e` in the `(v, theta)` chart.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Partials {
    pub p: f64,
    pub e: f64,
    pub p_v: f64,
    pub p_theta: f64,
    pub e_v: f64,
    pub e_theta: f64,
    pub p_vv: f64,
    pub p_vtheta: f64,
    pub p_thetatheta: f64,
    pub e_vv: f64,
    pub e_vtheta: f64,
    pub e_thetatheta: f64,
}

/// Derivatives of `p`, `theta` and `e` in the `(v, s)` chart, obtained from the
/// closed thermodynamic identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TildeDerivatives {
    /// `p_v(v,s) = p_v - theta p_theta^2 / e_theta < 0`.
    pub p_v: f64,
    /// `p_s(v,s) = theta p_theta / e_theta`.
    pub p_s: f64,
    /// `theta_v(v,s) = -theta p_theta / e_theta`.
    pub theta_v: f64,
    /// `theta_s(v,s) = theta / e_theta`.
    pub theta_s: f64,
    /// `e_vv(v,s) = -p_v(v,s) > 0`.
    pub e_vv: f64,
    /// `e_vs(v,s) = -theta p_theta / e_theta`.
    pub e_vs: f64,
    /// `e_ss(v,s) = theta / e_theta > 0`.
    pub e_ss: f64,
}

/// Second derivatives of `p(v, s)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SecondTildeDerivatives {
    pub p_vv: f64,
    pub p_vs: f64,
    pub p_ss: f64,
}

/// An equation-of-state closure.
///
/// Implementors provide `pressure` and `energy`; the default methods derive
/// partials by centered finite differences and entropy by integrating the
/// differential form `p_theta dv + (e_theta / theta) dtheta` from the
/// reference state. Closures with closed forms override them.
///
/// All methods are pure; a model is safe for concurrent read-only use.
pub trait GasModel: Send + Sync {
    fn name(&self) -> &str;

    fn pressure(&self, v: f64, theta: f64) -> f64;

    fn energy(&self, v: f64, theta: f64) -> f64;

    /// Reference state at which the entropy is normalized to zero.
    fn reference(&self) -> ThermoState;

    fn has_analytic_partials(&self) -> bool {
        false
    }

    /// First and second partials of `p` and `e` at `st`.
    fn partials(&self, st: ThermoState) -> Result<Partials, EosError> {
        fd_partials(self, st)
    }

    /// Entropy with `s(reference) = 0`.
    fn entropy(&self, st: ThermoState) -> Result<f64, EosError> {
        entropy_by_quadrature(self, st)
    }

    /// Cheap per-node coefficients `(p, p_v, p_theta, e_theta)` for time
    /// stepping.
    ///
    /// The default uses centered differences; analytic closures should
    /// override. No domain validation — hot path, the caller guarantees
    /// `v > 0`, `theta > 0`.
    fn local_coeffs(&self, v: f64, theta: f64) -> (f64, f64, f64, f64) {
        let hv = EPS.cbrt() * v.max(1.0);
        let ht = EPS.cbrt() * theta.max(1.0);
        let p = self.pressure(v, theta);
        let p_v = (self.pressure(v + hv, theta) - self.pressure(v - hv, theta)) / (2.0 * hv);
        let p_theta = (self.pressure(v, theta + ht) - self.pressure(v, theta - ht)) / (2.0 * ht);
        let e_theta = (self.energy(v, theta + ht) - self.energy(v, theta - ht)) / (2.0 * ht);
        (p, p_v, p_theta, e_theta)
    }

    /// Invert `s(v, theta) = s` for `theta` at fixed `v`.
    ///
    /// `s_theta = e_theta / theta > 0` guarantees monotonicity; a geometric
    /// bracket growth around the reference temperature followed by safeguarded
    /// Newton/bisection converges unconditionally.
    fn theta_from_entropy(&self, v: f64, s: f64) -> Result<f64, EosError> {
        invert_entropy(self, v, s)
    }
}

/// Centered finite-difference partials.
///
/// First derivatives use `h = eps^(1/3) max(1, |x|)`. Second derivatives use
/// the wider `h = eps^(1/4) max(1, |x|)` with one Richardson level; the
/// narrower first-derivative step amplifies roundoff through the second
/// difference.
pub(crate) fn fd_partials<G: GasModel + ?Sized>(
    model: &G,
    st: ThermoState,
) -> Result<Partials, EosError> {
    let h1v = EPS.cbrt() * st.v.abs().max(1.0);
    let h1t = EPS.cbrt() * st.theta.abs().max(1.0);
    let h2v = EPS.powf(0.25) * st.v.abs().max(1.0);
    let h2t = EPS.powf(0.25) * st.theta.abs().max(1.0);

    let max_h = h2v.max(h1v);
    if st.v - 2.0 * max_h <= 0.0 || st.theta - 2.0 * h2t.max(h1t) <= 0.0 {
        return Err(EosError::StencilOutOfDomain {
            v: st.v,
            theta: st.theta,
        });
    }

    let (v, theta) = (st.v, st.theta);
    let p = |v: f64, theta: f64| model.pressure(v, theta);
    let e = |v: f64, theta: f64| model.energy(v, theta);

    let d1 = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    // Second central difference with one Richardson extrapolation level.
    let d2 = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| {
        let coarse = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let hh = 0.5 * h;
        let fine = (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh);
        (4.0 * fine - coarse) / 3.0
    };
    let cross = |f: &dyn Fn(f64, f64) -> f64, hv: f64, ht: f64| {
        let c = |hv: f64, ht: f64| {
            (f(v + hv, theta + ht) - f(v + hv, theta - ht) - f(v - hv, theta + ht)
                + f(v - hv, theta - ht))
                / (4.0 * hv * ht)
        };
        let coarse = c(hv, ht);
        let fine = c(0.5 * hv, 0.5 * ht);
        (4.0 * fine - coarse) / 3.0
    };

    Ok(Partials {
        p: p(v, theta),
        e: e(v, theta),
        p_v: d1(&|x| p(x, theta), v, h1v),
        p_theta: d1(&|x| p(v, x), theta, h1t),
        e_v: d1(&|x| e(x, theta), v, h1v),
        e_theta: d1(&|x| e(v, x), theta, h1t),
        p_vv: d2(&|x| p(x, theta), v, h2v),
        p_vtheta: cross(&p, h2v, h2t),
        p_thetatheta: d2(&|x| p(v, x), theta, h2t),
        e_vv: d2(&|x| e(x, theta), v, h2v),
        e_vtheta: cross(&e, h2v, h2t),
        e_thetatheta: d2(&|x| e(v, x), theta, h2t),
    })
}

/// Entropy by line integral of `p_theta dv + (e_theta / theta) dtheta` along
/// the L-shaped path reference -> (v, theta_ref) -> (v, theta).
///
/// Path independence holds by the Maxwell compatibility `s_v = p_theta`,
/// `s_theta = e_theta / theta`; the loop-integral test checks it per closure.
pub(crate) fn entropy_by_quadrature<G: GasModel + ?Sized>(
    model: &G,
    st: ThermoState,
) -> Result<f64, EosError> {
    let st = ThermoState::new(st.v, st.theta)?;
    let r = model.reference();
    let h_theta = EPS.cbrt() * r.theta.max(1.0);
    let p_theta_at = |v: f64| {
        (model.pressure(v, r.theta + h_theta) - model.pressure(v, r.theta - h_theta))
            / (2.0 * h_theta)
    };
    let leg1 = adaptive_simpson(&p_theta_at, r.v, st.v, 1e-11);

    let e_theta_over_theta = |theta: f64| {
        let h = EPS.cbrt() * theta.max(1.0);
        let e_theta = (model.energy(st.v, theta + h) - model.energy(st.v, theta - h)) / (2.0 * h);
        e_theta / theta
    };
    let leg2 = adaptive_simpson(&e_theta_over_theta, r.theta, st.theta, 1e-11);

    Ok(leg1 + leg2)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 40)
}

fn invert_entropy<G: GasModel + ?Sized>(model: &G, v: f64, s: f64) -> Result<f64, EosError> {
    let r = model.reference();
    let f = |theta: f64| -> Result<f64, EosError> {
        Ok(model.entropy(ThermoState::new(v, theta)?)? - s)
    };

    // Grow a bracket geometrically from the reference temperature. Entropy is
    // strictly increasing in theta.
    let mut lo = r.theta;
    let mut hi = r.theta;
    let mut flo = f(lo)?;
    let mut fhi = flo;
    for _ in 0..200 {
        if flo <= 0.0 && fhi >= 0.0 {
            break;
        }
        if flo > 0.0 {
            lo *= 0.5;
            flo = f(lo)?;
        }
        if fhi < 0.0 {
            hi *= 2.0;
            fhi = f(hi)?;
        }
    }
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Err(EosError::InversionBracket { v, s });
    }

    // Safeguarded Newton with bisection fallback; s_theta = e_theta / theta.
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fv = f(theta)?;
        if fv > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let h = EPS.cbrt() * theta;
        let e_theta = (model.energy(v, theta + h) - model.energy(v, theta - h)) / (2.0 * h);
        let slope = e_theta / theta;
        let mut next = theta - fv / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - theta).abs() <= 4.0 * EPS * theta {
            return Ok(next);
        }
        theta = next;
    }
    Ok(theta)
}

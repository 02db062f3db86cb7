//! The `(v, s)`-chart derivatives, sound speed and the far-field sign
//! conditions that drive the transonic energy estimate.

use serde::Serialize;

use super::{
    EosError, GasModel, SecondTildeDerivatives, ThermoState, TildeDerivatives, EPS,
};

/// Tolerance under which `|M - 1|` classifies a far field as transonic.
/// Callers wanting exact transonic data should construct `u = -c(v, s)`.
pub const TRANSONIC_MACH_TOL: f64 = 1e-8;

/// `(v, s)`-chart first derivatives by the closed identities.
pub fn tilde_derivatives(
    model: &dyn GasModel,
    st: ThermoState,
) -> Result<TildeDerivatives, EosError> {
    let p = model.partials(st)?;
    // Basic conditions: p_rho = -v^2 p_v > 0 and e_theta > 0.
    if !(p.p_v < 0.0) || !(p.e_theta > 0.0) {
        return Err(EosError::BasicConditions {
            v: st.v,
            theta: st.theta,
        });
    }
    let theta = st.theta;
    let ratio = theta * p.p_theta / p.e_theta;
    Ok(TildeDerivatives {
        p_v: p.p_v - ratio * p.p_theta,
        p_s: ratio,
        theta_v: -ratio,
        theta_s: theta / p.e_theta,
        e_vv: -p.p_v + ratio * p.p_theta,
        e_vs: -ratio,
        e_ss: theta / p.e_theta,
    })
}

/// Second derivatives of `p(v, s)` by nested centered differences over
/// `(v, s)`, with `theta(v, s)` recovered by root-finding on the entropy.
pub fn second_tilde_derivatives(
    model: &dyn GasModel,
    st: ThermoState,
) -> Result<SecondTildeDerivatives, EosError> {
    let s0 = model.entropy(st)?;
    let p_tilde = |v: f64, s: f64| -> Result<f64, EosError> {
        let theta = model.theta_from_entropy(v, s)?;
        Ok(model.pressure(v, theta))
    };

    let hv = EPS.powf(0.25) * st.v.abs().max(1.0);
    let hs = EPS.powf(0.25) * s0.abs().max(1.0);
    if st.v - 2.0 * hv <= 0.0 {
        return Err(EosError::StencilOutOfDomain {
            v: st.v,
            theta: st.theta,
        });
    }

    let d2v = |h: f64| -> Result<f64, EosError> {
        Ok((p_tilde(st.v + h, s0)? - 2.0 * p_tilde(st.v, s0)? + p_tilde(st.v - h, s0)?) / (h * h))
    };
    let d2s = |h: f64| -> Result<f64, EosError> {
        Ok((p_tilde(st.v, s0 + h)? - 2.0 * p_tilde(st.v, s0)? + p_tilde(st.v, s0 - h)?) / (h * h))
    };
    let cross = |hv: f64, hs: f64| -> Result<f64, EosError> {
        Ok((p_tilde(st.v + hv, s0 + hs)? - p_tilde(st.v + hv, s0 - hs)?
            - p_tilde(st.v - hv, s0 + hs)?
            + p_tilde(st.v - hv, s0 - hs)?)
            / (4.0 * hv * hs))
    };
    // One Richardson level on each second difference.
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    Ok(SecondTildeDerivatives {
        p_vv: richardson(d2v(hv)?, d2v(0.5 * hv)?),
        p_vs: richardson(cross(hv, hs)?, cross(0.5 * hv, 0.5 * hs)?),
        p_ss: richardson(d2s(hs)?, d2s(0.5 * hs)?),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SoundSpeed {
    pub c: f64,
    pub mach: f64,
}

/// Sound speed `c = sqrt(-v^2 p_v(v, s))` and Mach number `M = |u| / c`.
pub fn sound_speed_mach(
    model: &dyn GasModel,
    st: ThermoState,
    u: f64,
) -> Result<SoundSpeed, EosError> {
    let tilde = tilde_derivatives(model, st)?;
    let c = (-st.v * st.v * tilde.p_v).sqrt();
    Ok(SoundSpeed { c, mach: u.abs() / c })
}

/// Full far-field condition report: the basic signs, the extra transonic sign
/// conditions, the beta values, the quadratic-form matrix `A` and its leading
/// principal minors.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub state: ThermoState,
    pub u_plus: f64,
    pub s_plus: f64,
    pub p_plus: f64,
    /// `p_rho > 0` and `e_theta > 0`.
    pub basic_ok: bool,
    /// `p_v(v, s) < 0`.
    pub tilde_pv: f64,
    /// The six extra sign conditions required in the transonic case:
    /// `p_theta > 0`, `p_vv >= 0`, `p_thetatheta >= 0`, `p_vtheta <= 0`,
    /// `e_vv <= 0`, `e_thetatheta <= 0` at the far field.
    pub transonic_extra_ok: bool,
    pub transonic_extra: [bool; 6],
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub betas_ok: bool,
    /// Symmetric 3x3 matrix of the quadratic form `f(phi, chi, psi)`.
    pub matrix_a: [[f64; 3]; 3],
    /// Leading principal minors of `matrix_a`, in order.
    pub minors: [f64; 3],
    pub minors_ok: bool,
    pub tilde_second: SecondTildeDerivatives,
    pub tilde_first: TildeDerivatives,
    pub sound_speed: f64,
    pub mach: f64,
}

/// Evaluate every sign condition at the far-field state. A failed condition is
/// a report entry, not an error; only domain violations fail.
pub fn check_conditions(
    model: &dyn GasModel,
    plus_state: ThermoState,
    u_plus: f64,
) -> Result<ConditionReport, EosError> {
    let parts = model.partials(plus_state)?;
    let basic_ok = parts.p_v < 0.0 && parts.e_theta > 0.0;
    if !basic_ok {
        // Without (1.2)-type signs the tilde chart is ill-defined; report the
        // failure with the rest zeroed.
        return Ok(ConditionReport {
            state: plus_state,
            u_plus,
            s_plus: f64::NAN,
            p_plus: parts.p,
            basic_ok,
            tilde_pv: f64::NAN,
            transonic_extra_ok: false,
            transonic_extra: [false; 6],
            beta1: f64::NAN,
            beta2: f64::NAN,
            beta3: f64::NAN,
            betas_ok: false,
            matrix_a: [[f64::NAN; 3]; 3],
            minors: [f64::NAN; 3],
            minors_ok: false,
            tilde_second: SecondTildeDerivatives {
                p_vv: f64::NAN,
                p_vs: f64::NAN,
                p_ss: f64::NAN,
            },
            tilde_first: TildeDerivatives {
                p_v: f64::NAN,
                p_s: f64::NAN,
                theta_v: f64::NAN,
                theta_s: f64::NAN,
                e_vv: f64::NAN,
                e_vs: f64::NAN,
                e_ss: f64::NAN,
            },
            sound_speed: f64::NAN,
            mach: f64::NAN,
        });
    }

    let tilde_first = tilde_derivatives(model, plus_state)?;
    let tilde_second = second_tilde_derivatives(model, plus_state)?;
    let s_plus = model.entropy(plus_state)?;
    let sound = sound_speed_mach(model, plus_state, u_plus)?;

    let transonic_extra = [
        parts.p_theta > 0.0,
        parts.p_vv >= 0.0,
        parts.p_thetatheta >= 0.0,
        parts.p_vtheta <= 0.0,
        parts.e_vv <= 0.0,
        parts.e_thetatheta <= 0.0,
    ];

    let v = plus_state.v;
    let rho = 1.0 / v;
    let beta1 = tilde_second.p_vv + tilde_first.p_v / v;
    let off_vs = tilde_second.p_vs + tilde_first.p_s / (2.0 * v);
    let beta2 = beta1 * tilde_second.p_ss - off_vs * off_vs;
    let beta3 = -4.0 * v * tilde_first.p_v * beta2 - tilde_first.p_s.powi(2) * beta1;

    let off_su = tilde_first.p_s / (2.0 * u_plus);
    let matrix_a = [
        [beta1, off_vs, 0.0],
        [off_vs, tilde_second.p_ss, off_su],
        [0.0, off_su, rho],
    ];
    let a1 = beta1;
    let a2 = beta1 * tilde_second.p_ss - off_vs * off_vs;
    let a3 = rho * a2 - off_su * off_su * a1;

    Ok(ConditionReport {
        state: plus_state,
        u_plus,
        s_plus,
        p_plus: parts.p,
        basic_ok,
        tilde_pv: tilde_first.p_v,
        transonic_extra_ok: transonic_extra.iter().all(|&b| b),
        transonic_extra,
        beta1,
        beta2,
        beta3,
        betas_ok: beta1 > 0.0 && beta2 > 0.0 && beta3 > 0.0,
        matrix_a,
        minors: [a1, a2, a3],
        minors_ok: a1 > 0.0 && a2 > 0.0 && a3 > 0.0,
        tilde_second,
        tilde_first,
        sound_speed: sound.c,
        mach: sound.mach,
    })
}

/// Closed-form betas of the ideal polytropic gas, used as the independent
/// oracle for the nested-difference route.
pub fn ideal_betas(gamma: f64, r: f64, v_plus: f64, p_plus: f64) -> (f64, f64, f64) {
    let g1 = (gamma - 1.0) * (gamma - 1.0) / (r * r);
    (
        gamma * gamma * p_plus / (v_plus * v_plus),
        g1 * (gamma - 0.25) * p_plus * p_plus / (v_plus * v_plus),
        g1 * gamma * (3.0 * gamma - 1.0) * p_plus.powi(3) / (v_plus * v_plus),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{AnalyticClosure, IdealPolytropic, IdealPolytropicParams};
    use approx::assert_relative_eq;

    fn ideal(gamma: f64) -> IdealPolytropic {
        IdealPolytropic::new(IdealPolytropicParams {
            gamma,
            r: 1.0,
            a: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn tilde_pv_ideal() {
        // p_v(v,s) = -gamma R theta / v^2 = -1.4 at (1, 1).
        let gas = ideal(1.4);
        let st = ThermoState::new(1.0, 1.0).unwrap();
        let t = tilde_derivatives(&gas, st).unwrap();
        assert_relative_eq!(t.p_v, -1.4, max_relative = 1e-12);
        assert!(t.p_v < 0.0);
        assert!(t.e_ss > 0.0);
        assert!(t.e_vv > 0.0);
        assert_relative_eq!(t.e_ss, 1.0 / (1.0 / 0.4), max_relative = 1e-12);
    }

    #[test]
    fn sound_speed_ideal() {
        let gas = ideal(1.4);
        let st = ThermoState::new(1.0, 1.0).unwrap();
        let s = sound_speed_mach(&gas, st, 0.0).unwrap();
        assert_relative_eq!(s.c, 1.4f64.sqrt(), max_relative = 1e-12);
        assert_eq!(s.mach, 0.0);
        let s = sound_speed_mach(&gas, st, -s.c).unwrap();
        assert_relative_eq!(s.mach, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn betas_match_ideal_closed_forms() {
        // gamma = 1.4, R = 1, (v, theta) = (1, 1), p+ = 1:
        // beta1 = 1.96, beta2 = 0.16 * 1.15 = 0.184, beta3 = 0.16 * 1.4 * 3.2.
        let gas = ideal(1.4);
        let st = ThermoState::new(1.0, 1.0).unwrap();
        let c = 1.4f64.sqrt();
        let report = check_conditions(&gas, st, -c).unwrap();
        assert_relative_eq!(report.beta1, 1.96, max_relative = 1e-5);
        assert_relative_eq!(report.beta2, 0.184, max_relative = 1e-5);
        assert_relative_eq!(report.beta3, 0.7168, max_relative = 1e-5);
        let (b1, b2, b3) = ideal_betas(1.4, 1.0, 1.0, 1.0);
        assert_relative_eq!(b1, 1.96, max_relative = 1e-14);
        assert_relative_eq!(b2, 0.184, max_relative = 1e-14);
        assert_relative_eq!(b3, 0.7168, max_relative = 1e-14);
    }

    #[test]
    fn ideal_conditions_all_pass() {
        for &(v, theta) in &[(1.0, 1.0), (0.7, 1.6), (2.1, 0.8)] {
            let gas = ideal(1.4);
            let st = ThermoState::new(v, theta).unwrap();
            let c = sound_speed_mach(&gas, st, 0.0).unwrap().c;
            let report = check_conditions(&gas, st, -c).unwrap();
            assert!(report.basic_ok);
            assert!(report.transonic_extra_ok);
            assert!(report.betas_ok);
            assert!(report.minors_ok);
        }
    }

    #[test]
    fn minor3_closed_expression_at_transonic() {
        // A3 = (1 / (2u)^2)(-4 v p_v A2 - p_s^2 A1) when M = 1.
        let gas = ideal(1.4);
        let st = ThermoState::new(1.0, 1.0).unwrap();
        let c = 1.4f64.sqrt();
        let r = check_conditions(&gas, st, -c).unwrap();
        let closed = (-4.0 * st.v * r.tilde_pv * r.minors[1]
            - r.tilde_first.p_s.powi(2) * r.minors[0])
            / (2.0 * r.u_plus).powi(2);
        assert_relative_eq!(r.minors[2], closed, max_relative = 1e-10);
        assert!(r.minors[2] > 0.0);
    }

    #[test]
    fn artificial_closure_with_negative_e_theta_reports_failure() {
        let bad = AnalyticClosure::new(
            "bad",
            |v, theta| theta / v,
            |_, theta| -theta,
            ThermoState::new(1.0, 1.0).unwrap(),
        );
        let st = ThermoState::new(1.0, 1.0).unwrap();
        let report = check_conditions(&bad, st, -1.0).unwrap();
        assert!(!report.basic_ok);
    }

    #[test]
    fn transonic_equivalence() {
        // |u| = c  <=>  -p_v(v,s) = (rho u)^2.
        let gas = ideal(5.0 / 3.0);
        for &(v, theta) in &[(1.0, 1.0), (1.3, 0.9)] {
            let st = ThermoState::new(v, theta).unwrap();
            let t = tilde_derivatives(&gas, st).unwrap();
            let c = (-v * v * t.p_v).sqrt();
            let u = -c;
            let rho_u = u / v;
            assert_relative_eq!(-t.p_v, rho_u * rho_u, max_relative = 1e-12);
        }
    }
}

//! Independent verification of constructed profiles.
//!
//! The builders in `profile` obtain derivatives by evaluating the reduced
//! ODE right-hand side. Here derivatives are recomputed by finite
//! differences of the sampled arrays, so the reported residuals measure the
//! genuine defect of the trajectory against the stationary flow equations
//! rather than reproducing the construction.

use serde::Serialize;

use super::fit::log_log_slope;
use super::{FarFieldSpec, StationaryError, StationaryProfile};

/// Residuals of a sampled profile against the stationary equations.
///
/// All derivative inputs are second-order finite differences of the sampled
/// arrays. `momentum` and `energy` refer to the once-integrated forms
/// (constants of the flow fixed by the far field), so they involve only
/// first derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// `max |rho u - rho_+ u_+| / |rho_+ u_+|`.
    pub mass_flux_max_rel: f64,
    /// `max |mu u_x - rho_+ u_+ (u - u_+) - (p - p_+)|`.
    pub momentum_max_abs: f64,
    pub momentum_scale: f64,
    pub momentum_max_rel: f64,
    /// Residual of the integrated energy balance.
    pub energy_max_abs: f64,
    pub energy_scale: f64,
    pub energy_max_rel: f64,
    /// FD `v_x` against the model right-hand side `g_1(v, theta)`.
    pub ode_v_max_abs: f64,
    /// FD `theta_x` against `g_2(v, theta)`.
    pub ode_theta_max_abs: f64,
    /// Stored derivative arrays against the FD route.
    pub deriv_v_max_abs: f64,
    pub deriv_theta_max_abs: f64,
    /// `|(v, theta)(L) - (v_+, theta_+)|`.
    pub far_field_gap: f64,
    pub transonic: Option<TransonicChecks>,
}

/// Extra diagnostics for the degenerate profile.
#[derive(Debug, Clone, Serialize)]
pub struct TransonicChecks {
    pub a_plus: f64,
    /// Decay scale `a_+ z(0)` of the algebraic tail.
    pub tail_delta: f64,
    /// Range of `|u - u_+| (1 + tail_delta x)` over the tail window; a tight
    /// range confirms the first-order algebraic rate.
    pub ratio0_min: f64,
    pub ratio0_max: f64,
    /// Range of `|u_x| (1 + tail_delta x)^2` over the tail window.
    pub ratio1_min: f64,
    pub ratio1_max: f64,
    /// Log-log fits of the same two quantities (expected near -1 and -2).
    pub slope0: f64,
    pub slope1: f64,
    /// Reduced variable stays positive and decreasing.
    pub z_positive: bool,
    pub z_monotone: bool,
    /// Max relative deviation of `z` from the leading-order algebraic decay
    /// `z(0) / (1 + tail_delta x)`; first order in `z(0)`.
    pub z_leading_order_max_rel: f64,
}

/// One-sided and central second-order finite differences on a uniform grid.
fn fd_derivative(x_step: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * x_step);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * x_step);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * x_step);
    d
}

/// Verify a profile against the model it was built from.
pub fn verify_profile(
    spec: &FarFieldSpec,
    profile: &StationaryProfile,
) -> Result<ResidualReport, StationaryError> {
    let n = profile.len();
    let h = profile.dx();
    let flux = spec.rho_plus() * spec.u_plus;
    let mu = spec.phys.mu;
    let kappa = spec.phys.kappa;

    let u_x_fd = fd_derivative(h, &profile.u);
    let v_x_fd = fd_derivative(h, &profile.v);
    let theta_x_fd = fd_derivative(h, &profile.theta);

    let mut mass_flux_max_rel = 0.0f64;
    let mut momentum_max_abs = 0.0f64;
    let mut energy_max_abs = 0.0f64;
    let mut ode_v_max_abs = 0.0f64;
    let mut ode_theta_max_abs = 0.0f64;
    let mut deriv_v_max_abs = 0.0f64;
    let mut deriv_theta_max_abs = 0.0f64;

    let ke_plus = 0.5 * spec.u_plus * spec.u_plus;
    for i in 0..n {
        let v = profile.v[i];
        let u = profile.u[i];
        let theta = profile.theta[i];
        let p = spec.model.pressure(v, theta);
        let e = spec.model.energy(v, theta);

        mass_flux_max_rel = mass_flux_max_rel.max((u / v - flux).abs() / flux.abs());

        let r_mom = mu * u_x_fd[i] - flux * (u - spec.u_plus) - (p - spec.p_plus);
        momentum_max_abs = momentum_max_abs.max(r_mom.abs());

        let r_en = kappa * theta_x_fd[i] + mu * u * u_x_fd[i]
            - flux * ((e - spec.e_plus) + (0.5 * u * u - ke_plus))
            - (p * u - spec.p_plus * spec.u_plus);
        energy_max_abs = energy_max_abs.max(r_en.abs());

        let (g1, g2) = spec.rhs(v, theta)?;
        ode_v_max_abs = ode_v_max_abs.max((v_x_fd[i] - g1).abs());
        ode_theta_max_abs = ode_theta_max_abs.max((theta_x_fd[i] - g2).abs());

        deriv_v_max_abs = deriv_v_max_abs.max((v_x_fd[i] - profile.v_x[i]).abs());
        deriv_theta_max_abs = deriv_theta_max_abs.max((theta_x_fd[i] - profile.theta_x[i]).abs());
    }

    let momentum_scale = (flux * spec.u_plus).abs() + spec.p_plus.abs();
    let energy_scale =
        (flux * (spec.e_plus + ke_plus)).abs() + (spec.p_plus * spec.u_plus).abs();
    let far_field_gap = ((profile.v[n - 1] - spec.v_plus).powi(2)
        + (profile.theta[n - 1] - spec.theta_plus).powi(2))
    .sqrt();

    let transonic = match (&profile.z, profile.a_plus) {
        (Some(z), Some(a_plus)) if z[0] > 0.0 => {
            Some(transonic_checks(spec, profile, z, a_plus))
        }
        _ => None,
    };

    Ok(ResidualReport {
        mass_flux_max_rel,
        momentum_max_abs,
        momentum_scale,
        momentum_max_rel: momentum_max_abs / momentum_scale,
        energy_max_abs,
        energy_scale,
        energy_max_rel: energy_max_abs / energy_scale,
        ode_v_max_abs,
        ode_theta_max_abs,
        deriv_v_max_abs,
        deriv_theta_max_abs,
        far_field_gap,
        transonic,
    })
}

fn transonic_checks(
    spec: &FarFieldSpec,
    profile: &StationaryProfile,
    z: &[f64],
    a_plus: f64,
) -> TransonicChecks {
    let n = profile.len();
    let tail_delta = a_plus * z[0];
    // Tail window: past the transient near x = 0, before truncation effects.
    let lo = n / 5;
    let hi = 3 * n / 5;

    let mut ratio0_min = f64::INFINITY;
    let mut ratio0_max = 0.0f64;
    let mut ratio1_min = f64::INFINITY;
    let mut ratio1_max = 0.0f64;
    let mut dev0 = Vec::with_capacity(hi - lo);
    let mut dev1 = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let w = 1.0 + tail_delta * profile.x[i];
        let d0 = (profile.u[i] - spec.u_plus).abs();
        let d1 = profile.u_x[i].abs();
        ratio0_min = ratio0_min.min(d0 * w);
        ratio0_max = ratio0_max.max(d0 * w);
        ratio1_min = ratio1_min.min(d1 * w * w);
        ratio1_max = ratio1_max.max(d1 * w * w);
        dev0.push(d0);
        dev1.push(d1);
    }
    let slope0 = log_log_slope(&profile.x[lo..hi], &dev0, tail_delta);
    let slope1 = log_log_slope(&profile.x[lo..hi], &dev1, tail_delta);

    let z_positive = z.iter().all(|&zi| zi > 0.0);
    let z_monotone = z.windows(2).all(|w| w[1] <= w[0]);
    let z_leading_order_max_rel = z
        .iter()
        .zip(&profile.x)
        .map(|(&zi, &xi)| {
            let lead = z[0] / (1.0 + tail_delta * xi);
            (zi - lead).abs() / lead
        })
        .fold(0.0f64, f64::max);

    TransonicChecks {
        a_plus,
        tail_delta,
        ratio0_min,
        ratio0_max,
        ratio1_min,
        ratio1_max,
        slope0,
        slope1,
        z_positive,
        z_monotone,
        z_leading_order_max_rel,
    }
}

#[cfg(test)]
mod tests {
    use super::super::profile::{build_nondegenerate_profile, build_transonic_profile};
    use super::super::tests::ideal_spec;
    use super::*;

    #[test]
    fn transonic_profile_satisfies_flow_equations() {
        let spec = ideal_spec(-(1.4f64.sqrt()));
        let y10 = 5e-3;
        let p = build_transonic_profile(&spec, y10, None, 100_000).unwrap();
        let r = verify_profile(&spec, &p).unwrap();
        assert!(r.mass_flux_max_rel < 1e-12, "mass {}", r.mass_flux_max_rel);
        // Center-manifold truncation leaves an O(y10^3) model defect.
        assert!(r.momentum_max_rel < 1e-6, "momentum {}", r.momentum_max_rel);
        assert!(r.energy_max_rel < 1e-6, "energy {}", r.energy_max_rel);
        // Algebraic tail: at L = 50 / (a_+ y10) the residual deviation is
        // about y10 / 51.
        assert!(r.far_field_gap < 0.03 * y10, "gap {}", r.far_field_gap);
    }

    #[test]
    fn nondegenerate_profile_satisfies_flow_equations() {
        let spec = ideal_spec(-0.7 * 1.4f64.sqrt());
        let p = build_nondegenerate_profile(&spec, 0.02, None, None, 40_000).unwrap();
        let r = verify_profile(&spec, &p).unwrap();
        assert!(r.mass_flux_max_rel < 1e-12);
        // The trajectory solves the exact reduced ODE; the residual floor is
        // the O(h^2) error of the FD route.
        assert!(r.momentum_max_rel < 1e-7, "momentum {}", r.momentum_max_rel);
        assert!(r.energy_max_rel < 1e-7, "energy {}", r.energy_max_rel);
        assert!(r.ode_v_max_abs < 1e-7, "ode v {}", r.ode_v_max_abs);
        assert!(r.transonic.is_none());
    }

    #[test]
    fn transonic_tail_diagnostics() {
        let spec = ideal_spec(-(1.4f64.sqrt()));
        let p = build_transonic_profile(&spec, 0.05, None, 40_000).unwrap();
        let r = verify_profile(&spec, &p).unwrap();
        let t = r.transonic.expect("transonic diagnostics expected");
        assert!(t.z_positive);
        assert!(t.z_monotone);
        assert!((t.slope0 + 1.0).abs() < 0.1, "slope0 {}", t.slope0);
        assert!((t.slope1 + 2.0).abs() < 0.2, "slope1 {}", t.slope1);
        assert!(
            t.ratio0_max / t.ratio0_min < 1.1,
            "ratio0 spread {} / {}",
            t.ratio0_max,
            t.ratio0_min
        );
        assert!(t.z_leading_order_max_rel < 0.3);
    }

    #[test]
    fn fd_route_differs_from_stored_by_truncation_only() {
        let spec = ideal_spec(-0.7 * 1.4f64.sqrt());
        let coarse = build_nondegenerate_profile(&spec, 0.02, None, Some(10.0), 1_000).unwrap();
        let fine = build_nondegenerate_profile(&spec, 0.02, None, Some(10.0), 2_000).unwrap();
        let rc = verify_profile(&spec, &coarse).unwrap();
        let rf = verify_profile(&spec, &fine).unwrap();
        // Central differences are second order: halving h should shrink the
        // FD-vs-stored mismatch by about 4.
        let ratio = rc.deriv_v_max_abs / rf.deriv_v_max_abs;
        assert!(
            (3.0..5.0).contains(&ratio),
            "refinement ratio {ratio} (coarse {} fine {})",
            rc.deriv_v_max_abs,
            rf.deriv_v_max_abs
        );
    }
}

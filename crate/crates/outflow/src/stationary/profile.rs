//! Boundary-layer profile construction.

use serde::Serialize;

use super::reduction::{integrate_planar, integrate_scalar, transonic_reduction};
use super::{FarFieldSpec, RegimeClass, RegimeKind, StationaryError, DELTA0_DEFAULT};

/// Far-field scalars carried by a profile so it stays self-contained.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FarFieldScalars {
    pub v_plus: f64,
    pub u_plus: f64,
    pub theta_plus: f64,
    pub rho_plus: f64,
    pub p_plus: f64,
    pub e_plus: f64,
    pub s_plus: f64,
}

impl FarFieldScalars {
    fn from_spec(spec: &FarFieldSpec) -> Self {
        Self {
            v_plus: spec.v_plus,
            u_plus: spec.u_plus,
            theta_plus: spec.theta_plus,
            rho_plus: spec.rho_plus(),
            p_plus: spec.p_plus,
            e_plus: spec.e_plus,
            s_plus: spec.s_plus,
        }
    }
}

/// A sampled stationary boundary-layer solution on `0 = x_0 < ... < x_N = L`.
///
/// Velocity is reconstructed from the constant mass flux, `u = (u_+/v_+) v`,
/// so `rho u = rho_+ u_+` holds exactly at every node. Derivative arrays come
/// from evaluating the reduced ODE right-hand side along the profile;
/// `verify_profile` recomputes them by finite differences as the independent
/// route.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryProfile {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub v_x: Vec<f64>,
    pub u_x: Vec<f64>,
    pub theta_x: Vec<f64>,
    pub v_xx: Vec<f64>,
    pub u_xx: Vec<f64>,
    pub theta_xx: Vec<f64>,
    /// Solution of the reduced tail equation (transonic only).
    pub z: Option<Vec<f64>>,
    pub regime: RegimeClass,
    pub far: FarFieldScalars,
    /// `|(u_- - u_+, theta_- - theta_+)|` realized at `x = 0`.
    pub delta: f64,
    pub u_minus: f64,
    pub theta_minus: f64,
    /// Reduction coefficient (transonic only).
    pub a_plus: Option<f64>,
}

impl StationaryProfile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn length(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

/// Fill velocity and derivative arrays given `(v, theta)` samples.
fn finish_profile(
    spec: &FarFieldSpec,
    x: Vec<f64>,
    v: Vec<f64>,
    theta: Vec<f64>,
    z: Option<Vec<f64>>,
    regime: RegimeClass,
    a_plus: Option<f64>,
) -> Result<StationaryProfile, StationaryError> {
    let n = x.len();
    let ratio = spec.u_plus / spec.v_plus;
    let u: Vec<f64> = v.iter().map(|&vi| ratio * vi).collect();

    let mut v_x = vec![0.0; n];
    let mut theta_x = vec![0.0; n];
    let mut v_xx = vec![0.0; n];
    let mut theta_xx = vec![0.0; n];
    for i in 0..n {
        let (g1, g2) = spec.rhs(v[i], theta[i])?;
        v_x[i] = g1;
        theta_x[i] = g2;
        let j = spec.rhs_jacobian(v[i], theta[i])?;
        v_xx[i] = j[0][0] * g1 + j[0][1] * g2;
        theta_xx[i] = j[1][0] * g1 + j[1][1] * g2;
    }
    let u_x: Vec<f64> = v_x.iter().map(|&d| ratio * d).collect();
    let u_xx: Vec<f64> = v_xx.iter().map(|&d| ratio * d).collect();

    let u_minus = u[0];
    let theta_minus = theta[0];
    let delta = ((u_minus - spec.u_plus).powi(2) + (theta_minus - spec.theta_plus).powi(2)).sqrt();

    Ok(StationaryProfile {
        x,
        v,
        u,
        theta,
        v_x,
        u_x,
        theta_x,
        v_xx,
        u_xx,
        theta_xx,
        z,
        regime,
        far: FarFieldScalars::from_spec(spec),
        delta,
        u_minus,
        theta_minus,
        a_plus,
    })
}

/// Build the degenerate transonic profile from the center-manifold coordinate.
///
/// The profile is integrated forward from `y1(0) = y10 > 0`; the induced
/// admissible boundary data `(u_-, theta_-)` is recorded, parametrizing the
/// admissible boundary curve by `y10`. `l = None` selects the default length
/// `50 / (a_+ y10)`, long enough that the algebraic window dominates.
pub fn build_transonic_profile(
    spec: &FarFieldSpec,
    y10: f64,
    l: Option<f64>,
    n: usize,
) -> Result<StationaryProfile, StationaryError> {
    let cm = transonic_reduction(spec)?;
    let regime = spec.jacobian_plus()?;
    if !(0.0..=DELTA0_DEFAULT).contains(&y10) {
        return Err(StationaryError::BadSeed {
            y10,
            max: DELTA0_DEFAULT,
        });
    }
    let l = l.unwrap_or_else(|| {
        if y10 > 0.0 {
            50.0 / (cm.a_plus * y10)
        } else {
            10.0
        }
    });
    if n < 2 {
        return Err(StationaryError::GridTooCoarse {
            h: l,
            l,
            limit: 0.0,
        });
    }
    let h = l / n as f64;
    // Resolve both the reduced decay scale and the fast eigenvalue.
    let limit = (0.1 / (cm.a_plus * y10.max(1e-300))).min(0.5 / cm.lambda2.abs());
    if y10 > 0.0 && h > limit {
        return Err(StationaryError::GridTooCoarse { h, l, limit });
    }

    let model = spec.model.clone();
    let rhs = |y: f64| cm.reduced_rhs(model.as_ref(), y);
    let y1 = integrate_scalar(&rhs, y10, h, n);

    let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut v = Vec::with_capacity(n + 1);
    let mut theta = Vec::with_capacity(n + 1);
    for &y in &y1 {
        let y2 = cm.h2 * y * y;
        let (dv, dtheta) = cm.w_from_y(y, y2);
        v.push(spec.v_plus + dv);
        theta.push(spec.theta_plus + dtheta);
    }
    let z = y1;
    finish_profile(spec, x, v, theta, Some(z), regime, Some(cm.a_plus))
}

/// Build a non-degenerate (supersonic or subsonic) profile.
///
/// `eps` is the target boundary amplitude `|(v, theta)(0) - (v_+, theta_+)|`.
///
/// Supersonic far fields are stable nodes of the reduced flow: every nearby
/// state lies on the two-dimensional stable manifold, so the profile is
/// obtained by forward integration from `W_+ + eps * dir`, where
/// `seed_weights` selects the combination of the two stable eigenvectors
/// (default equal weight; `[0, 1]` isolates the slow direction).
///
/// Subsonic far fields are saddles with a one-dimensional stable manifold.
/// Forward integration from near the stable eigenvector drifts off along the
/// unstable direction, so the profile is integrated backward from a tiny seed
/// `W_+ + eps_seed * r_1` placed at `x = L`, with `eps_seed` sized so the
/// backward growth at rate `|lambda_1|` reaches amplitude `eps` at `x = 0`.
/// Backward dynamics attract onto the stable manifold, making this route
/// numerically robust. Oversized `L` forces `eps_seed` below resolvable size
/// and the amplified sweep leaves the admissibility window.
pub fn build_nondegenerate_profile(
    spec: &FarFieldSpec,
    eps: f64,
    seed_weights: Option<[f64; 2]>,
    l: Option<f64>,
    n: usize,
) -> Result<StationaryProfile, StationaryError> {
    let regime = spec.jacobian_plus()?;
    if regime.kind == RegimeKind::Transonic {
        return Err(StationaryError::WrongRegime {
            expected: RegimeKind::Subsonic,
            actual: regime.kind,
            mach: regime.mach,
        });
    }
    if !(0.0..=DELTA0_DEFAULT).contains(&eps) {
        return Err(StationaryError::BadSeed {
            y10: eps,
            max: DELTA0_DEFAULT,
        });
    }

    // Smallest seed amplitude still well above roundoff in W_+ + seed.
    const SEED_FLOOR: f64 = 1e-12;

    let weights = seed_weights.unwrap_or(match regime.kind {
        RegimeKind::Supersonic => [std::f64::consts::FRAC_1_SQRT_2; 2],
        _ => [1.0, 0.0],
    });
    let rate = match regime.kind {
        // Backward amplification rate (subsonic) or tail decay rate of the
        // slowest component present in the seed (supersonic).
        RegimeKind::Subsonic => regime.lambda1.abs(),
        RegimeKind::Supersonic => {
            if weights[1] != 0.0 {
                regime.lambda2.abs()
            } else {
                regime.lambda1.abs()
            }
        }
        RegimeKind::Transonic => unreachable!(),
    };
    let l = l.unwrap_or(match regime.kind {
        RegimeKind::Subsonic => ((eps.max(SEED_FLOOR)) / SEED_FLOOR).ln() / rate,
        _ => 30.0 / rate,
    });
    if n < 2 {
        return Err(StationaryError::GridTooCoarse {
            h: l,
            l,
            limit: 0.0,
        });
    }
    let h = l / n as f64;
    let limit = 0.2 / regime.lambda1.abs();
    if eps > 0.0 && h > limit {
        return Err(StationaryError::GridTooCoarse { h, l, limit });
    }

    if eps == 0.0 {
        let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let v = vec![spec.v_plus; n + 1];
        let theta = vec![spec.theta_plus; n + 1];
        return finish_profile(spec, x, v, theta, None, regime, None);
    }

    let dir = {
        let r1 = regime.eigenvector(regime.lambda1);
        let r2 = regime.eigenvector(regime.lambda2);
        let d = [
            weights[0] * r1[0] + weights[1] * r2[0],
            weights[0] * r1[1] + weights[1] * r2[1],
        ];
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[0] / norm, d[1] / norm]
    };

    // Admissibility window for the integration sweep.
    let v_bounds = (spec.v_plus / 5.0, spec.v_plus * 5.0);
    let t_bounds = (spec.theta_plus / 5.0, spec.theta_plus * 5.0);
    let check = |x: f64, w: [f64; 2]| -> Result<(), StationaryError> {
        if !w[0].is_finite()
            || !w[1].is_finite()
            || w[0] < v_bounds.0
            || w[0] > v_bounds.1
            || w[1] < t_bounds.0
            || w[1] > t_bounds.1
        {
            Err(StationaryError::SeedTooLarge {
                x,
                v: w[0],
                theta: w[1],
            })
        } else {
            Ok(())
        }
    };

    let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut v = vec![0.0; n + 1];
    let mut theta = vec![0.0; n + 1];
    match regime.kind {
        RegimeKind::Supersonic => {
            let seed = [spec.v_plus + eps * dir[0], spec.theta_plus + eps * dir[1]];
            let rhs = |w: [f64; 2]| {
                let (g1, g2) = spec.rhs(w[0], w[1]).unwrap_or((f64::NAN, f64::NAN));
                [g1, g2]
            };
            let forward = integrate_planar(&rhs, seed, h, n);
            for (i, w) in forward.iter().enumerate() {
                check(i as f64 * h, *w)?;
                v[i] = w[0];
                theta[i] = w[1];
            }
        }
        RegimeKind::Subsonic => {
            let eps_seed = (eps * (-rate * l).exp()).max(SEED_FLOOR).min(eps);
            let seed = [
                spec.v_plus + eps_seed * dir[0],
                spec.theta_plus + eps_seed * dir[1],
            ];
            let rhs = |w: [f64; 2]| {
                // Backward in x: flip the sign of G.
                let (g1, g2) = spec.rhs(w[0], w[1]).unwrap_or((f64::NAN, f64::NAN));
                [-g1, -g2]
            };
            let backward = integrate_planar(&rhs, seed, h, n);
            for (k, w) in backward.iter().enumerate() {
                let i = n - k; // backward sweep starts at x = L
                check(i as f64 * h, *w)?;
                v[i] = w[0];
                theta[i] = w[1];
            }
        }
        RegimeKind::Transonic => unreachable!(),
    }
    finish_profile(spec, x, v, theta, None, regime, None)
}

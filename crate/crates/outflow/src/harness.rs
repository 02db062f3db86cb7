//! Perturbation construction, norm/energy tracking, and stability verdicts.
//!
//! The perturbation variables are `(phi, psi, zeta) = (rho - rho_hat,
//! u - u_hat, theta - theta_hat)` against a stationary profile sampled on the
//! solver grid. All spatial quadrature is composite trapezoid on that grid;
//! derivatives are second-order finite differences (centered interior,
//! one-sided ends).

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::eos::{ConditionReport, EosError, GasModel, ThermoState};
use crate::stationary::StationaryProfile;
use crate::transient::FlowState;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Eos(#[from] EosError),
    #[error("perturbation amplitude too large: node {node} has rho = {rho}, theta = {theta}")]
    AmplitudeTooLarge { node: usize, rho: f64, theta: f64 },
    #[error("state has {state} nodes but the profile has {profile}")]
    GridMismatch { state: usize, profile: usize },
    #[error("series is empty")]
    EmptySeries,
}

/// Perturbation shape; every shape is smooth and effectively supported away
/// from `x = 0`, and node 0 is clamped to the profile exactly so the boundary
/// compatibility `psi(0) = zeta(0) = 0` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PerturbationShape {
    /// `exp(-((x - c)/w)^2)`.
    GaussianBump,
    /// `exp(1 - 1/(1 - r^2))` on `|r| < 1`, `r = (x - c)/w`; identically zero
    /// outside.
    CompactBump,
    /// Wave packet `sin(2 pi (x - c)/w) exp(-((x - c)/w)^2)`.
    DecayingWave,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerturbationSpec {
    pub shape: PerturbationShape,
    pub a_rho: f64,
    pub a_u: f64,
    pub a_theta: f64,
    pub center: f64,
    pub width: f64,
    /// Phase offset of the wave shape (ignored by the bump shapes).
    pub phase: f64,
}

impl PerturbationSpec {
    pub fn shape_value(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.width;
        match self.shape {
            PerturbationShape::GaussianBump => (-r * r).exp(),
            PerturbationShape::CompactBump => {
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            PerturbationShape::DecayingWave => {
                (2.0 * std::f64::consts::PI * r + self.phase).sin() * (-r * r).exp()
            }
        }
    }
}

/// Norms of the initial perturbation, reported by [`make_initial`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InitialNorms {
    pub l2: f64,
    pub h1_seminorm: f64,
    pub h1: f64,
    pub sup: f64,
}

/// Sample `profile + perturbation` as transient initial data.
pub fn make_initial(
    profile: &StationaryProfile,
    spec: &PerturbationSpec,
) -> Result<(FlowState, InitialNorms), HarnessError> {
    let n = profile.len();
    let mut state = FlowState::from_profile(profile);
    for i in 1..n {
        let g = spec.shape_value(profile.x[i]);
        state.rho[i] += spec.a_rho * g;
        state.u[i] += spec.a_u * g;
        state.theta[i] += spec.a_theta * g;
    }
    // Node 0 keeps the exact profile values (boundary compatibility).
    for i in 0..n {
        if !(state.rho[i] > 0.0) || !(state.theta[i] > 0.0) {
            return Err(HarnessError::AmplitudeTooLarge {
                node: i,
                rho: state.rho[i],
                theta: state.theta[i],
            });
        }
    }

    let dx = profile.dx();
    let phi: Vec<f64> = (0..n).map(|i| state.rho[i] - 1.0 / profile.v[i]).collect();
    let psi: Vec<f64> = (0..n).map(|i| state.u[i] - profile.u[i]).collect();
    let zeta: Vec<f64> = (0..n).map(|i| state.theta[i] - profile.theta[i]).collect();
    let l2sq = trapezoid_sq(&phi, dx) + trapezoid_sq(&psi, dx) + trapezoid_sq(&zeta, dx);
    let h1ssq = trapezoid_sq(&fd(&phi, dx), dx)
        + trapezoid_sq(&fd(&psi, dx), dx)
        + trapezoid_sq(&fd(&zeta, dx), dx);
    let sup = (0..n)
        .map(|i| (phi[i] * phi[i] + psi[i] * psi[i] + zeta[i] * zeta[i]).sqrt())
        .fold(0.0f64, f64::max);
    Ok((
        state,
        InitialNorms {
            l2: l2sq.sqrt(),
            h1_seminorm: h1ssq.sqrt(),
            h1: (l2sq + h1ssq).sqrt(),
            sup,
        },
    ))
}

fn trapezoid_sq(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let interior: f64 = f[1..n - 1].iter().map(|&a| a * a).sum();
    dx * (interior + 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]))
}

fn trapezoid(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let interior: f64 = f[1..n - 1].iter().sum();
    dx * (interior + 0.5 * (f[0] + f[n - 1]))
}

/// Second-order finite-difference first derivative on a uniform grid.
fn fd(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    d
}

fn fd2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dx * dx);
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}

/// Per-snapshot perturbation norms plus cumulative dissipation integrals.
#[derive(Debug, Clone, Default, Serialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    /// `||(phi, psi, zeta)||_{L2}`.
    pub l2: Vec<f64>,
    /// `||(phi_x, psi_x, zeta_x)||_{L2}`.
    pub h1_seminorm: Vec<f64>,
    pub sup: Vec<f64>,
    /// `|phi(0, t)|`.
    pub boundary_phi: Vec<f64>,
    /// `|phi_x(0, t)|`.
    pub boundary_phi_x: Vec<f64>,
    /// Cumulative `int_0^t (||phi_x||^2 + ||psi_x||^2 + ||zeta_x||^2
    /// + ||psi_xx||^2 + ||zeta_xx||^2)`.
    pub dissipation: Vec<f64>,
    /// Cumulative `int_0^t (phi(0)^2 + phi_x(0)^2)`.
    pub boundary_dissipation: Vec<f64>,
}

/// Energy functional series and empirical equivalence constants.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// `E(t) = int rho_hat * energy_density dx`.
    pub total_energy: Vec<f64>,
    /// Empirical `inf` and `sup` of `energy_density / |(phi,psi,zeta)|^2`
    /// over all nodes and snapshots with non-negligible perturbation.
    pub c1_hat: f64,
    pub c2_hat: f64,
    /// Fraction of sampled nodes where the density was negative (should be 0
    /// in the small-perturbation regime).
    pub negative_fraction: f64,
}

/// Pointwise energy density
/// `(e - e_hat) - theta_hat (s - s_hat) + psi^2/2 + p_hat (1/rho - 1/rho_hat)`.
pub fn energy_density(
    model: &dyn GasModel,
    v_hat: f64,
    theta_hat: f64,
    u_hat: f64,
    state_v: f64,
    state_theta: f64,
    state_u: f64,
) -> Result<f64, HarnessError> {
    let e = model.energy(state_v, state_theta);
    let e_hat = model.energy(v_hat, theta_hat);
    let s = model.entropy(ThermoState::new(state_v, state_theta)?)?;
    let s_hat = model.entropy(ThermoState::new(v_hat, theta_hat)?)?;
    let p_hat = model.pressure(v_hat, theta_hat);
    let psi = state_u - u_hat;
    Ok((e - e_hat) - theta_hat * (s - s_hat) + 0.5 * psi * psi + p_hat * (state_v - v_hat))
}

/// Observer that accumulates [`NormSeries`] and [`EnergyReport`] during a run.
pub struct Tracker {
    model: Arc<dyn GasModel>,
    x: Vec<f64>,
    dx: f64,
    rho_hat: Vec<f64>,
    u_hat: Vec<f64>,
    theta_hat: Vec<f64>,
    v_hat: Vec<f64>,
    series: NormSeries,
    energy_times: Vec<f64>,
    total_energy: Vec<f64>,
    ratio_min: f64,
    ratio_max: f64,
    negative: usize,
    sampled: usize,
    /// Ratio floor: nodes with `|(phi,psi,zeta)|^2` below this fraction of the
    /// snapshot maximum are excluded from the equivalence-constant scan.
    ratio_floor: f64,
    prev_diss_integrand: Option<(f64, f64, f64)>,
}

impl Tracker {
    pub fn new(model: Arc<dyn GasModel>, profile: &StationaryProfile) -> Self {
        Self {
            model,
            x: profile.x.clone(),
            dx: profile.dx(),
            rho_hat: profile.v.iter().map(|&v| 1.0 / v).collect(),
            u_hat: profile.u.clone(),
            theta_hat: profile.theta.clone(),
            v_hat: profile.v.clone(),
            series: NormSeries::default(),
            energy_times: Vec::new(),
            total_energy: Vec::new(),
            ratio_min: f64::INFINITY,
            ratio_max: 0.0,
            negative: 0,
            sampled: 0,
            ratio_floor: 1e-6,
            prev_diss_integrand: None,
        }
    }

    pub fn observe(&mut self, state: &FlowState) -> Result<(), HarnessError> {
        let n = self.x.len();
        if state.len() != n {
            return Err(HarnessError::GridMismatch {
                state: state.len(),
                profile: n,
            });
        }
        let dx = self.dx;
        let phi: Vec<f64> = (0..n).map(|i| state.rho[i] - self.rho_hat[i]).collect();
        let psi: Vec<f64> = (0..n).map(|i| state.u[i] - self.u_hat[i]).collect();
        let zeta: Vec<f64> = (0..n).map(|i| state.theta[i] - self.theta_hat[i]).collect();
        let phi_x = fd(&phi, dx);
        let psi_x = fd(&psi, dx);
        let zeta_x = fd(&zeta, dx);
        let psi_xx = fd2(&psi, dx);
        let zeta_xx = fd2(&zeta, dx);

        let l2sq = trapezoid_sq(&phi, dx) + trapezoid_sq(&psi, dx) + trapezoid_sq(&zeta, dx);
        let h1ssq =
            trapezoid_sq(&phi_x, dx) + trapezoid_sq(&psi_x, dx) + trapezoid_sq(&zeta_x, dx);
        let sup_sq = (0..n)
            .map(|i| phi[i] * phi[i] + psi[i] * psi[i] + zeta[i] * zeta[i])
            .fold(0.0f64, f64::max);

        let diss_now =
            h1ssq + trapezoid_sq(&psi_xx, dx) + trapezoid_sq(&zeta_xx, dx);
        let bdiss_now = phi[0] * phi[0] + phi_x[0] * phi_x[0];

        let (mut diss_cum, mut bdiss_cum) = (0.0, 0.0);
        if let Some((t_prev, d_prev, b_prev)) = self.prev_diss_integrand {
            let dt = state.t - t_prev;
            diss_cum = self.series.dissipation.last().copied().unwrap_or(0.0)
                + 0.5 * dt * (d_prev + diss_now);
            bdiss_cum = self.series.boundary_dissipation.last().copied().unwrap_or(0.0)
                + 0.5 * dt * (b_prev + bdiss_now);
        }
        self.prev_diss_integrand = Some((state.t, diss_now, bdiss_now));

        self.series.times.push(state.t);
        self.series.l2.push(l2sq.sqrt());
        self.series.h1_seminorm.push(h1ssq.sqrt());
        self.series.sup.push(sup_sq.sqrt());
        self.series.boundary_phi.push(phi[0].abs());
        self.series.boundary_phi_x.push(phi_x[0].abs());
        self.series.dissipation.push(diss_cum);
        self.series.boundary_dissipation.push(bdiss_cum);

        // Energy functional and equivalence-constant scan.
        let mut density = vec![0.0; n];
        let floor = sup_sq * self.ratio_floor;
        for i in 0..n {
            let v = 1.0 / state.rho[i];
            let en = energy_density(
                self.model.as_ref(),
                self.v_hat[i],
                self.theta_hat[i],
                self.u_hat[i],
                v,
                state.theta[i],
                state.u[i],
            )?;
            density[i] = self.rho_hat[i] * en;
            let amp = phi[i] * phi[i] + psi[i] * psi[i] + zeta[i] * zeta[i];
            // Where the perturbation is negligible, the density is roundoff
            // noise of either sign; exclude those nodes from the sign scan.
            if amp > floor && amp > 0.0 {
                self.sampled += 1;
                if en < 0.0 {
                    self.negative += 1;
                }
                let ratio = en / amp;
                self.ratio_min = self.ratio_min.min(ratio);
                self.ratio_max = self.ratio_max.max(ratio);
            }
        }
        self.energy_times.push(state.t);
        self.total_energy.push(trapezoid(&density, dx));
        Ok(())
    }

    pub fn finish(self) -> (NormSeries, EnergyReport) {
        let report = EnergyReport {
            times: self.energy_times,
            total_energy: self.total_energy,
            c1_hat: if self.ratio_min.is_finite() {
                self.ratio_min
            } else {
                0.0
            },
            c2_hat: self.ratio_max,
            negative_fraction: if self.sampled == 0 {
                0.0
            } else {
                self.negative as f64 / self.sampled as f64
            },
        };
        (self.series, report)
    }
}

/// Stability verdict from the sup-norm monotone envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Converging,
    Stagnating,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub verdict: Verdict,
    /// `envelope(t_end) / envelope(0)`.
    pub envelope_ratio: f64,
    /// First time at which the envelope halves, if it does.
    pub half_life: Option<f64>,
    /// Peak excursion `max_t sup / sup(0)`.
    pub peak_ratio: f64,
}

/// Analyze the sup-norm trend. The envelope is the smallest non-increasing
/// majorant (running max from the right), so transient oscillations do not
/// fake divergence or convergence.
pub fn decay_report(series: &NormSeries) -> Result<DecayReport, HarnessError> {
    let sup = &series.sup;
    if sup.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    let n = sup.len();
    let mut envelope = sup.clone();
    for i in (0..n - 1).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let e0 = envelope[0];
    if e0 == 0.0 {
        // Identically-zero perturbation: trivially converged.
        return Ok(DecayReport {
            verdict: Verdict::Converging,
            envelope_ratio: 0.0,
            half_life: Some(0.0),
            peak_ratio: 0.0,
        });
    }
    if n < 5 {
        return Ok(DecayReport {
            verdict: Verdict::Inconclusive,
            envelope_ratio: envelope[n - 1] / e0,
            half_life: None,
            peak_ratio: sup.iter().fold(0.0f64, |a, &b| a.max(b)) / sup[0].max(e0),
        });
    }
    let ratio = envelope[n - 1] / e0;
    let peak = sup.iter().fold(0.0f64, |a, &b| a.max(b)) / sup[0];
    let half_life = envelope
        .iter()
        .zip(&series.times)
        .find(|(&e, _)| e <= 0.5 * e0)
        .map(|(_, &t)| t);
    let verdict = if ratio > 1.5 || peak > 3.0 {
        Verdict::Diverging
    } else if ratio < 0.5 {
        Verdict::Converging
    } else {
        Verdict::Stagnating
    };
    Ok(DecayReport {
        verdict,
        envelope_ratio: ratio,
        half_life,
        peak_ratio: peak,
    })
}

/// A-priori-bound surrogate
/// `[ ||(phi,psi,zeta)(t_end)||_1^2 + dissipation + boundary dissipation ]
///  / ||(phi,psi,zeta)(0)||_1^2`.
pub fn a_priori_ratio(series: &NormSeries) -> Result<f64, HarnessError> {
    let n = series.times.len();
    if n == 0 {
        return Err(HarnessError::EmptySeries);
    }
    let h1sq_end = series.l2[n - 1].powi(2) + series.h1_seminorm[n - 1].powi(2);
    let h1sq_0 = series.l2[0].powi(2) + series.h1_seminorm[0].powi(2);
    if h1sq_0 == 0.0 {
        return Ok(0.0);
    }
    Ok((h1sq_end + series.dissipation[n - 1] + series.boundary_dissipation[n - 1]) / h1sq_0)
}

/// Result of the quadratic-form positivity scan.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticFormReport {
    pub minors: [f64; 3],
    pub minors_positive: bool,
    pub min_eigenvalue: f64,
    pub samples: usize,
    pub positive_samples: usize,
    pub all_positive: bool,
    /// Sylvester cross-check: positivity of `f` on every sample agrees with
    /// positivity of all minors.
    pub sylvester_consistent: bool,
}

/// Evaluate `f(x) = x^T A x` for the report's matrix.
pub fn quadratic_form(a: &[[f64; 3]; 3], x: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += x[i] * a[i][j] * x[j];
        }
    }
    s
}

/// Smallest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
pub fn min_eigenvalue_sym3(a: &[[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let tr = a[0][0] + a[1][1] + a[2][2];
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let q = tr / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *a;
    for i in 0..3 {
        b[i][i] -= q;
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // Eigenvalues are q + 2p cos(phi + 2k pi / 3); with phi in [0, pi/3],
    // k = 1 gives the smallest.
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos()
}

/// Monte-Carlo positivity scan of the quadratic form against the Sylvester
/// criterion.
pub fn quadratic_form_check(
    report: &ConditionReport,
    seed: u64,
    samples: usize,
) -> QuadraticFormReport {
    let a = &report.matrix_a;
    let minors = report.minors;
    let minors_positive = minors.iter().all(|&m| m > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positive = 0usize;
    for _ in 0..samples {
        let x = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let norm2: f64 = x.iter().map(|c| c * c).sum();
        if norm2 < 1e-12 {
            positive += 1; // indistinguishable from the zero triple
            continue;
        }
        if quadratic_form(a, &x) > 0.0 {
            positive += 1;
        }
    }
    let all_positive = positive == samples;
    QuadraticFormReport {
        minors,
        minors_positive,
        min_eigenvalue: min_eigenvalue_sym3(a),
        samples,
        positive_samples: positive,
        all_positive,
        sylvester_consistent: all_positive == minors_positive,
    }
}

//! Drivers that turn the limit theorems into measured numbers: log-log rate
//! sweeps for the parabolic and real-damping limits (deterministic and
//! noise-coupled), Cauchy-in-truncation tests for Wick powers, the exact
//! coupled mode-covariance rate, and energy-uniformity probes.
//!
//! Every sweep couples its runs through the counter-based noise stream, so
//! the same Brownian increments drive both sides of each comparison.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::gaussian::{sample_mu, ModeOu};
use crate::linalg2::expm;
use crate::noise::NoiseStream;
use crate::nonlinear::{run_cgl, run_spde, SpdeRun};
use crate::propagators::{energy_ratio, nrl_linear_error, url_linear_error, LinearSolveSpec};
use crate::spectral::norms::{neg_holder_proxy_on, sobolev_norm};
use crate::spectral::transform::{to_physical_on, to_spectral};
use crate::spectral::{FrequencyLattice, SpectralField};
use crate::stats::{log_log_fit, mean_se, spearman, LineFit, Spearman};
use crate::symbols::{lambda_pm_at, ModelParams};
use crate::wick::{hermite_eval, pointwise_variance};
use crate::Result;

type C = Complex64;

/// Fitted power law of an error against a sweep parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub param_name: String,
    /// Strictly decreasing sweep values.
    pub param_values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Monte-Carlo standard errors (zero for deterministic sweeps).
    pub ses: Vec<f64>,
    /// Per-value (paths, excluded blow-ups); empty for deterministic sweeps.
    pub survival: Vec<(usize, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
}

impl RateReport {
    fn new(
        param_name: &str,
        param_values: Vec<f64>,
        errors: Vec<f64>,
        ses: Vec<f64>,
        survival: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if param_values.len() < 2 {
            return Err(CoreError::InvalidParams(
                "a rate fit needs at least two sweep values".into(),
            ));
        }
        if !param_values.windows(2).all(|w| w[0] > w[1]) {
            return Err(CoreError::InvalidParams(
                "sweep values must be strictly decreasing".into(),
            ));
        }
        if errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CoreError::Numerical(
                "sweep produced a non-positive or non-finite error".into(),
            ));
        }
        let fit: LineFit = log_log_fit(&param_values, &errors);
        Ok(Self {
            param_name: param_name.into(),
            param_values,
            errors,
            ses,
            survival,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            slope_se: fit.slope_se,
        })
    }
}

/// Canonical initial-data fixtures used by the rate and uniformity probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFixture {
    /// One excited mode.
    SingleMode,
    /// Gaussian-decaying spectrum with deterministic phases.
    BroadbandSmooth,
    /// Borderline-regular data: coefficients `<k>^{-1.9}` with phases, just
    /// inside `H^{0.9}`.
    RoughSobolev,
}

impl DataFixture {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleMode => "single_mode",
            Self::BroadbandSmooth => "broadband_smooth",
            Self::RoughSobolev => "rough_h09",
        }
    }
}

/// Deterministic `(phi0, phi1)` for a fixture. The velocity component is
/// deliberately order-one: it carries the leading `eps^1` term of the
/// parabolic limit error.
pub fn fixture_data(
    fixture: DataFixture,
    lattice: &Arc<FrequencyLattice>,
) -> (SpectralField, SpectralField) {
    let mut phi0 = SpectralField::zero(lattice);
    let mut phi1 = SpectralField::zero(lattice);
    for &(k1, k2) in lattice.modes() {
        let r2 = (k1 * k1 + k2 * k2) as f64;
        let (a, b) = match fixture {
            DataFixture::SingleMode => {
                if (k1, k2) == (1, 0) {
                    (C::new(0.25, 0.0), C::new(1.0, 0.0))
                } else {
                    (C::default(), C::default())
                }
            }
            DataFixture::BroadbandSmooth => {
                let decay = (-r2 / 4.0).exp();
                let p0 = 0.7 * k1 as f64 + 1.3 * k2 as f64;
                let p1 = 1.1 * k1 as f64 - 0.5 * k2 as f64;
                (
                    0.25 * decay * C::from_polar(1.0, p0),
                    decay * C::from_polar(1.0, p1),
                )
            }
            DataFixture::RoughSobolev => {
                let w = (1.0 + r2).sqrt();
                let p0 = (k1 as f64 * 12.9898 + k2 as f64 * 78.233).sin() * 3.0;
                let p1 = (k1 as f64 * 3.7 - k2 as f64 * 9.1).cos() * 3.0;
                (
                    0.5 * w.powf(-1.9) * C::from_polar(1.0, p0),
                    w.powf(-0.9) * C::from_polar(1.0, p1),
                )
            }
        };
        phi0.set((k1, k2), a);
        phi1.set((k1, k2), b);
    }
    (phi0, phi1)
}

fn check_sweep(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(CoreError::InvalidParams(
            "sweep needs at least two parameter values".into(),
        ));
    }
    if !values.windows(2).all(|w| w[0] > w[1]) {
        return Err(CoreError::InvalidParams(
            "sweep values must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Deterministic parabolic-limit sweep: for each `eps`, the distance of the
/// damped wave solution to the heat solution with shared smooth data.
pub fn nrl_deterministic_sweep(
    alpha: C,
    eps_values: &[f64],
    n_max: u32,
    dt: f64,
    steps: usize,
    sigma: f64,
) -> Result<RateReport> {
    check_sweep(eps_values)?;
    let lattice = FrequencyLattice::linear(n_max);
    let (phi0, phi1) = fixture_data(DataFixture::BroadbandSmooth, &lattice);
    let errors: Vec<f64> = eps_values
        .iter()
        .map(|&eps| {
            let params = ModelParams::new(eps, alpha, 1, n_max, dt * steps as f64 + 1e-9)?;
            let spec = LinearSolveSpec {
                params,
                phi0: phi0.clone(),
                phi1: phi1.clone(),
                forcing: vec![],
                dt,
                steps,
            };
            nrl_linear_error(&spec, sigma)
        })
        .collect::<Result<_>>()?;
    RateReport::new(
        "eps",
        eps_values.to_vec(),
        errors,
        vec![0.0; eps_values.len()],
        vec![],
    )
}

/// Deterministic real-damping sweep: distance of the `alpha_1 + i alpha_2`
/// wave to the real-damped wave, in the energy pair norm.
pub fn url_deterministic_sweep(
    alpha1: f64,
    alpha2_values: &[f64],
    n_max: u32,
    dt: f64,
    steps: usize,
    sigma: f64,
) -> Result<RateReport> {
    check_sweep(alpha2_values)?;
    let lattice = FrequencyLattice::linear(n_max);
    let (phi0, phi1) = fixture_data(DataFixture::BroadbandSmooth, &lattice);
    let errors: Vec<f64> = alpha2_values
        .iter()
        .map(|&a2| url_linear_error(alpha1, a2, &phi0, &phi1, &[], dt, steps, sigma))
        .collect::<Result<_>>()?;
    RateReport::new(
        "alpha2",
        alpha2_values.to_vec(),
        errors,
        vec![0.0; alpha2_values.len()],
        vec![],
    )
}

/// Options of the stochastic sweeps.
#[derive(Debug, Clone, Copy)]
pub struct StochasticSweepOptions {
    pub count: usize,
    pub dt: f64,
    pub steps: usize,
    /// Negative-order comparison norm `H^{-delta}`.
    pub delta: f64,
    pub nonlinearity: bool,
}

fn sup_pair_distance_scalar(
    a: &[SpectralField],
    b: &[SpectralField],
    delta: f64,
) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| sobolev_norm(&x.sub(y), -delta))
        .fold(0.0, f64::max)
}

/// Noise-coupled parabolic-limit sweep: the truncated wave equation and its
/// parabolic limit are driven by the same Wiener increments and started from
/// the same position sample; the per-path error is
/// `sup_t |Psi_eps - Psi_cgl|_{H^{-delta}}`. Blown-up paths are excluded and
/// counted.
pub fn nrl_stochastic_sweep(
    template: &ModelParams,
    eps_values: &[f64],
    opts: StochasticSweepOptions,
    stream: &NoiseStream,
) -> Result<RateReport> {
    check_sweep(eps_values)?;
    let lattice = SpdeRun::lattice_for(template);
    let mut errors = Vec::new();
    let mut ses = Vec::new();
    let mut survival = Vec::new();
    for &eps in eps_values {
        let params = ModelParams::new(
            eps,
            template.alpha,
            template.degree,
            template.n_max,
            opts.dt * opts.steps as f64 + 1e-9,
        )?;
        let per_path: Vec<Option<f64>> = (0..opts.count)
            .into_par_iter()
            .map(|i| {
                let sub = stream.trajectory(i as u64);
                let initial = sample_mu(&lattice, &sub);
                let mut run = SpdeRun::new(params, initial.clone(), opts.dt, opts.steps, sub)
                    .expect("validated");
                run.nonlinearity = opts.nonlinearity;
                let wave = run_spde(&run).expect("run");
                let cgl = run_cgl(
                    &params,
                    &initial.psi,
                    opts.dt,
                    opts.steps,
                    &sub,
                    1,
                    1.0,
                    opts.nonlinearity,
                    1e8,
                )
                .expect("run");
                if wave.blowup.is_some() || cgl.blowup.is_some() {
                    return None;
                }
                let wave_psi: Vec<SpectralField> =
                    wave.states.into_iter().map(|s| s.psi).collect();
                Some(sup_pair_distance_scalar(&wave_psi, &cgl.states, opts.delta))
            })
            .collect();
        let alive: Vec<f64> = per_path.iter().filter_map(|x| *x).collect();
        let blowups = opts.count - alive.len();
        if alive.is_empty() {
            return Err(CoreError::Numerical(format!(
                "all paths blew up at eps = {eps}"
            )));
        }
        let (m, se) = mean_se(&alive);
        errors.push(m);
        ses.push(se);
        survival.push((opts.count, blowups));
    }
    RateReport::new("eps", eps_values.to_vec(), errors, ses, survival)
}

/// Noise-coupled real-damping sweep at `eps = 1`: the complex-damped
/// truncated equation against the real-damped target with shared increments.
pub fn url_stochastic_sweep(
    template: &ModelParams,
    alpha1: f64,
    alpha2_values: &[f64],
    opts: StochasticSweepOptions,
    stream: &NoiseStream,
) -> Result<RateReport> {
    check_sweep(alpha2_values)?;
    let lattice = SpdeRun::lattice_for(template);
    let mut errors = Vec::new();
    let mut ses = Vec::new();
    let mut survival = Vec::new();
    let horizon = opts.dt * opts.steps as f64 + 1e-9;
    for &a2 in alpha2_values {
        let params = ModelParams::new(
            1.0,
            C::new(alpha1, a2),
            template.degree,
            template.n_max,
            horizon,
        )?;
        let target_params =
            ModelParams::new(1.0, C::new(alpha1, 0.0), template.degree, template.n_max, horizon)?;
        let per_path: Vec<Option<f64>> = (0..opts.count)
            .into_par_iter()
            .map(|i| {
                let sub = stream.trajectory(i as u64);
                let initial = sample_mu(&lattice, &sub);
                let mut run =
                    SpdeRun::new(params, initial.clone(), opts.dt, opts.steps, sub).expect("run");
                run.nonlinearity = opts.nonlinearity;
                let mut target_run =
                    SpdeRun::new(target_params, initial, opts.dt, opts.steps, sub).expect("run");
                target_run.nonlinearity = opts.nonlinearity;
                let a = run_spde(&run).expect("run");
                let b = run_spde(&target_run).expect("run");
                if a.blowup.is_some() || b.blowup.is_some() {
                    return None;
                }
                Some(
                    a.states
                        .iter()
                        .zip(&b.states)
                        .map(|(x, y)| sobolev_norm(&x.psi.sub(&y.psi), -opts.delta))
                        .fold(0.0, f64::max),
                )
            })
            .collect();
        let alive: Vec<f64> = per_path.iter().filter_map(|x| *x).collect();
        let blowups = opts.count - alive.len();
        if alive.is_empty() {
            return Err(CoreError::Numerical(format!(
                "all paths blew up at alpha2 = {a2}"
            )));
        }
        let (m, se) = mean_se(&alive);
        errors.push(m);
        ses.push(se);
        survival.push((opts.count, blowups));
    }
    RateReport::new("alpha2", alpha2_values.to_vec(), errors, ses, survival)
}

// ---------------------------------------------------------------------------
// Wick-Cauchy test across truncation levels
// ---------------------------------------------------------------------------

/// Monte-Carlo comparison of Wick powers across truncation levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WickCauchyReport {
    pub n_values: Vec<u32>,
    pub m: u32,
    pub n: u32,
    pub delta: f64,
    /// Pairs `(N_i, N_j)`, `N_i < N_j`.
    pub pairs: Vec<(u32, u32)>,
    /// Monte-Carlo mean of `sup_t` of the smoothed-sup distance per pair.
    pub mean_diffs: Vec<f64>,
    pub ses: Vec<f64>,
    /// Trend of the pair distance against `min(N_i, N_j)`.
    pub trend: Spearman,
}

/// Evolves the stationary linear solution on the largest lattice and measures
/// `E sup_t |H_{m,n}(Pi_{N_i} Z; C_{N_i}) - H_{m,n}(Pi_{N_j} Z; C_{N_j})|`
/// in the smoothed-sup proxy norm, for every pair of truncation levels.
pub fn wick_cauchy_test(
    params: &ModelParams,
    n_values: &[u32],
    m: u32,
    n: u32,
    dt: f64,
    steps: usize,
    count: usize,
    delta: f64,
    stream: &NoiseStream,
) -> Result<WickCauchyReport> {
    if n_values.len() < 2 {
        return Err(CoreError::InvalidParams(
            "need at least two truncation levels".into(),
        ));
    }
    if !n_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(CoreError::InvalidParams(
            "truncation levels must be strictly increasing".into(),
        ));
    }
    let n_top = *n_values.last().unwrap();
    let ext_n = (m + n).max(1) * n_top;
    let ext = FrequencyLattice::new(ext_n, 2 * ext_n as usize + 4)?;
    let evolve_lattice = FrequencyLattice::new(n_top, ext.grid_size())?;
    let proxy_grid = ext.grid_size();

    let pairs: Vec<(u32, u32)> = {
        let mut v = Vec::new();
        for i in 0..n_values.len() {
            for j in (i + 1)..n_values.len() {
                v.push((n_values[i], n_values[j]));
            }
        }
        v
    };
    let sub_lattices: Vec<Arc<FrequencyLattice>> = n_values
        .iter()
        .map(|&nv| FrequencyLattice::new(nv, ext.grid_size()))
        .collect::<Result<_>>()?;
    let constants: Vec<f64> = n_values.iter().map(|&nv| pointwise_variance(nv)).collect();

    let per_path: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub = stream.trajectory(i as u64);
            let initial = sample_mu(&evolve_lattice, &sub);
            let traj =
                crate::gaussian::sample_z_trajectory(params, dt, steps, &initial, &sub, 1.0)
                    .expect("linear trajectory");
            let mut sups = vec![0.0f64; pairs.len()];
            for state in traj.iter() {
                // Wick powers of each truncation on the shared grid
                let fields: Vec<SpectralField> = sub_lattices
                    .iter()
                    .zip(&constants)
                    .map(|(lat, &cn)| {
                        let z = state.psi.project_to(lat);
                        let grid = {
                            let mut g = to_physical_on(&z, proxy_grid);
                            for v in g.values_mut() {
                                *v = hermite_eval(m, n, cn, *v);
                            }
                            g
                        };
                        to_spectral(&grid, &ext).expect("alias-free by construction")
                    })
                    .collect();
                for (p, &(ni, nj)) in pairs.iter().enumerate() {
                    let ii = n_values.iter().position(|&x| x == ni).unwrap();
                    let jj = n_values.iter().position(|&x| x == nj).unwrap();
                    let d = fields[ii].sub(&fields[jj]);
                    let v = neg_holder_proxy_on(&d, delta, proxy_grid);
                    sups[p] = sups[p].max(v);
                }
            }
            sups
        })
        .collect();

    let mut mean_diffs = Vec::new();
    let mut ses = Vec::new();
    for p in 0..pairs.len() {
        let vals: Vec<f64> = per_path.iter().map(|v| v[p]).collect();
        let (mval, se) = mean_se(&vals);
        mean_diffs.push(mval);
        ses.push(se);
    }
    let xs: Vec<f64> = pairs.iter().map(|&(a, _)| a as f64).collect();
    let trend = spearman(&xs, &mean_diffs);
    Ok(WickCauchyReport {
        n_values: n_values.to_vec(),
        m,
        n,
        delta,
        pairs,
        mean_diffs,
        ses,
        trend,
    })
}

/// Stationary projection-tail check for the `(1,0)` power: the mean squared
/// `L^2` distance of two truncations equals the exact lattice tail sum
/// `sum_{N_i < |k| <= N_j} 2/<k>^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCheck {
    pub n_low: u32,
    pub n_high: u32,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub exact: f64,
}

pub fn projection_tail_check(
    params: &ModelParams,
    n_low: u32,
    n_high: u32,
    t: f64,
    steps: usize,
    count: usize,
    stream: &NoiseStream,
) -> Result<TailCheck> {
    if n_low >= n_high {
        return Err(CoreError::InvalidParams("need n_low < n_high".into()));
    }
    let lattice = FrequencyLattice::linear(n_high);
    let dt = t / steps as f64;
    let vals: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub = stream.trajectory(i as u64);
            let initial = sample_mu(&lattice, &sub);
            let traj = crate::gaussian::sample_z_trajectory(params, dt, steps, &initial, &sub, 1.0)
                .expect("trajectory");
            let last = &traj.last().unwrap().psi;
            // tail = Pi_{N_high} Z - Pi_{N_low} Z
            last.lattice()
                .modes()
                .iter()
                .zip(last.coeffs())
                .filter(|(&(k1, k2), _)| {
                    let r2 = (k1 * k1 + k2 * k2) as i64;
                    r2 > (n_low as i64).pow(2)
                })
                .map(|(_, c)| c.norm_sqr())
                .sum()
        })
        .collect();
    let (mc_mean, mc_se) = mean_se(&vals);
    let exact: f64 = lattice
        .modes()
        .iter()
        .filter(|&&(k1, k2)| (k1 as i64 * k1 as i64 + k2 as i64 * k2 as i64) > (n_low as i64).pow(2))
        .map(|&(k1, k2)| 2.0 / ModelParams::bracket_sq((k1, k2)))
        .sum();
    Ok(TailCheck {
        n_low,
        n_high,
        mc_mean,
        mc_se,
        exact,
    })
}

// ---------------------------------------------------------------------------
// Exact coupled mode-covariance rate
// ---------------------------------------------------------------------------

/// Exact second moments of the coupled system `(z_eps, y_eps, z_cgl)` driven
/// by one Wiener process and started from the same position sample.
#[derive(Debug, Clone, Copy)]
pub struct CoupledMoments {
    /// `E |z_eps - z_cgl|^2` at the evaluation time.
    pub diff_second_moment: f64,
    /// `|E[(z_eps - z_cgl) conj(z_eps)]|`.
    pub cross_eps: f64,
    /// `|E[(z_eps - z_cgl) conj(z_cgl)]|`.
    pub cross_cgl: f64,
}

fn phi1_c(mu: C, t: f64) -> C {
    let z = mu * t;
    if z.norm() < 1e-8 {
        t * (C::new(1.0, 0.0) + z * 0.5 + z * z / 6.0)
    } else {
        (z.exp() - 1.0) / mu
    }
}

/// Closed-form evaluation of the coupled covariance at time `t`: the
/// propagated initial block plus the noise integral expanded over the three
/// exponential rates `lambda^+, lambda^-, -gamma`.
pub fn coupled_mode_moments(eps: f64, alpha: C, k: (i32, i32), t: f64) -> Result<CoupledMoments> {
    let ksq = ModelParams::bracket_sq(k);
    let (lp, lm) = lambda_pm_at(eps, alpha, ksq);
    if (lp - lm).norm() < 1e-8 * (lp.norm() + lm.norm()) {
        return Err(CoreError::Numerical(
            "coupled covariance needs distinct branch rates; use Im(alpha) != 0".into(),
        ));
    }
    let gamma = ksq / (2.0 * alpha);
    let a = 1.0 / eps;
    let b2 = C::new(2.0 * alpha.re.sqrt() / eps, 0.0);
    let b3 = alpha.re.sqrt() / alpha;
    // e^{A s} B = c+ v+ e^{lp s} + c- v- e^{lm s}, v+- = (a, lambda+-)
    let cp = b2 / (lp - lm);
    let cm = -cp;
    let rates = [lp, lm, -gamma];
    let weights: [[C; 3]; 3] = [
        [cp * a, cp * lp, C::default()],
        [cm * a, cm * lm, C::default()],
        [C::default(), C::default(), b3],
    ];
    // noise block: Q_{ij} = sum_{m,m'} w_m[i] conj(w_{m'}[j]) 2 phi1(mu_m + conj(mu_m'), t)
    let mut q = [[C::default(); 3]; 3];
    for m1 in 0..3 {
        for m2 in 0..3 {
            let f = 2.0 * phi1_c(rates[m1] + rates[m2].conj(), t);
            for i in 0..3 {
                for j in 0..3 {
                    q[i][j] += weights[m1][i] * weights[m2][j].conj() * f;
                }
            }
        }
    }
    // propagated initial covariance: block-diagonal propagator
    let p = ModelParams::new(eps.min(1.0), alpha, 1, 1, 1.0)?;
    let mode = ModeOu::new(&p, k);
    let e2 = expm(&mode.drift_matrix(), t);
    let ec = (-gamma * t).exp();
    // full 3x3 propagator
    let mut e = [[C::default(); 3]; 3];
    for i in 0..2 {
        for j in 0..2 {
            e[i][j] = e2.0[i][j];
        }
    }
    e[2][2] = ec;
    let v = 2.0 / ksq;
    let s0: [[C; 3]; 3] = [
        [C::new(v, 0.0), C::default(), C::new(v, 0.0)],
        [C::default(), C::new(2.0, 0.0), C::default()],
        [C::new(v, 0.0), C::default(), C::new(v, 0.0)],
    ];
    // E S0 E^*
    let mut es = [[C::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                es[i][j] += e[i][l] * s0[l][j];
            }
        }
    }
    let mut sigma = q;
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                sigma[i][j] += es[i][l] * e[j][l].conj();
            }
        }
    }
    let diff = (sigma[0][0] + sigma[2][2] - sigma[0][2] - sigma[2][0]).re;
    Ok(CoupledMoments {
        diff_second_moment: diff.max(0.0),
        cross_eps: (sigma[0][0] - sigma[2][0]).norm(),
        cross_cgl: (sigma[0][2] - sigma[2][2]).norm(),
    })
}

/// Dense RK4 integration of the coupled covariance ODE
/// `S' = A S + S A^* + 2 B B^*`; the independent oracle for
/// [`coupled_mode_moments`].
pub fn coupled_mode_moments_ode(
    eps: f64,
    alpha: C,
    k: (i32, i32),
    t: f64,
    steps: usize,
) -> CoupledMoments {
    let ksq = ModelParams::bracket_sq(k);
    let gamma = ksq / (2.0 * alpha);
    let mut a = [[C::default(); 3]; 3];
    a[0][1] = C::new(1.0 / eps, 0.0);
    a[1][0] = C::new(-ksq / eps, 0.0);
    a[1][1] = -2.0 * alpha / (eps * eps);
    a[2][2] = -gamma;
    let b = [
        C::default(),
        C::new(2.0 * alpha.re.sqrt() / eps, 0.0),
        alpha.re.sqrt() / alpha,
    ];
    let mut r = [[C::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = 2.0 * b[i] * b[j].conj();
        }
    }
    let v = 2.0 / ksq;
    let mut s: [[C; 3]; 3] = [
        [C::new(v, 0.0), C::default(), C::new(v, 0.0)],
        [C::default(), C::new(2.0, 0.0), C::default()],
        [C::new(v, 0.0), C::default(), C::new(v, 0.0)],
    ];
    let dt = t / steps as f64;
    let deriv = |s: &[[C; 3]; 3]| {
        let mut d = r;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    d[i][j] += a[i][l] * s[l][j] + s[i][l] * a[j][l].conj();
                }
            }
        }
        d
    };
    let axpy = |s: &[[C; 3]; 3], d: &[[C; 3]; 3], h: f64| {
        let mut out = *s;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += h * d[i][j];
            }
        }
        out
    };
    for _ in 0..steps {
        let k1 = deriv(&s);
        let k2 = deriv(&axpy(&s, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&s, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&s, &k3, dt));
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    CoupledMoments {
        diff_second_moment: (s[0][0] + s[2][2] - s[0][2] - s[2][0]).re.max(0.0),
        cross_eps: (s[0][0] - s[2][0]).norm(),
        cross_cgl: (s[0][2] - s[2][2]).norm(),
    }
}

/// Rate report of the coupled mode covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceRateReport {
    /// Rate of the root coupled difference `(E|z_eps - z_cgl|^2)^{1/2}` in eps.
    pub rate: RateReport,
    /// `(mode, rms difference at the reference eps)` across probe modes.
    pub prefactors: Vec<((i32, i32), f64)>,
    pub prefactor_monotone: bool,
    /// Raw cross-covariances at the reference eps, with the bound value
    /// `eps^theta <k>^{-(2+theta)}`: the pair `(measured, bound)` per mode.
    pub bound_probe: Vec<((i32, i32), f64, f64)>,
    pub bound_holds: bool,
    pub theta: f64,
    pub t_eval: f64,
}

/// Deterministic covariance-rate experiment: no Monte-Carlo anywhere. The
/// fitted rate is the eps-slope of the root coupled second moment at `k`;
/// bound probes check the raw cross-covariances against
/// `eps^theta <k>^{-(2+theta)}` across the probe modes.
pub fn mode_covariance_rate(
    alpha: C,
    k: (i32, i32),
    theta: f64,
    eps_values: &[f64],
    t_eval: f64,
) -> Result<CovarianceRateReport> {
    check_sweep(eps_values)?;
    let errors: Vec<f64> = eps_values
        .iter()
        .map(|&eps| Ok(coupled_mode_moments(eps, alpha, k, t_eval)?.diff_second_moment.sqrt()))
        .collect::<Result<_>>()?;
    let rate = RateReport::new(
        "eps",
        eps_values.to_vec(),
        errors,
        vec![0.0; eps_values.len()],
        vec![],
    )?;
    let probe_modes = [(0, 0), (1, 0), (2, 1)];
    let eps_ref = eps_values[eps_values.len() / 2];
    let mut prefactors = Vec::new();
    let mut bound_probe = Vec::new();
    for &km in &probe_modes {
        let m = coupled_mode_moments(eps_ref, alpha, km, t_eval)?;
        prefactors.push((km, m.diff_second_moment.sqrt()));
        let bound = eps_ref.powf(theta) * ModelParams::bracket_sq(km).powf(-(2.0 + theta) / 2.0);
        // the bound carries an implicit constant; record the raw pair and
        // check with the constant calibrated at the first probe mode
        bound_probe.push((km, m.cross_eps.max(m.cross_cgl), bound));
    }
    let prefactor_monotone = prefactors.windows(2).all(|w| w[0].1 > w[1].1);
    let c0 = bound_probe[0].1 / bound_probe[0].2;
    let bound_holds = bound_probe
        .iter()
        .all(|&(_, measured, bound)| measured <= 1.5 * c0.max(1.0) * bound + 1e-14);
    Ok(CovarianceRateReport {
        rate,
        prefactors,
        prefactor_monotone,
        bound_probe,
        bound_holds,
        theta,
        t_eval,
    })
}

// ---------------------------------------------------------------------------
// Energy uniformity probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureUniformity {
    pub fixture: String,
    pub alpha: (f64, f64),
    /// `(eps, empirical constant)` over the sweep.
    pub ratios: Vec<(f64, f64)>,
    pub spread: f64,
    /// One-sided p-value against "constant grows as eps decreases".
    pub p_against_growth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyUniformityReport {
    pub results: Vec<FixtureUniformity>,
    pub worst_spread: f64,
}

/// Empirical constants of the energy estimate across an `(alpha, eps)` grid
/// and three data fixtures; reports the spread and a monotone-growth test.
pub fn energy_uniformity_probe(
    alphas: &[C],
    eps_values: &[f64],
    n_max: u32,
    dt: f64,
    steps: usize,
    sigma: f64,
) -> Result<EnergyUniformityReport> {
    if alphas.is_empty() || eps_values.len() < 3 {
        return Err(CoreError::InvalidParams(
            "need at least one alpha and three eps values".into(),
        ));
    }
    let lattice = FrequencyLattice::linear(n_max);
    let horizon = dt * steps as f64 + 1e-9;
    let mut results = Vec::new();
    let mut worst: f64 = 0.0;
    for fixture in [
        DataFixture::SingleMode,
        DataFixture::BroadbandSmooth,
        DataFixture::RoughSobolev,
    ] {
        let (phi0, phi1) = fixture_data(fixture, &lattice);
        // constant-in-time smooth forcing for the broadband fixture
        let forcing: Vec<SpectralField> = if fixture == DataFixture::BroadbandSmooth {
            let mut f = SpectralField::zero(&lattice);
            for &(k1, k2) in lattice.modes() {
                let r2 = (k1 * k1 + k2 * k2) as f64;
                f.set((k1, k2), 0.5 * (-r2 / 2.0).exp() * C::from_polar(1.0, 0.3 * k1 as f64));
            }
            vec![f; steps]
        } else {
            vec![]
        };
        for &alpha in alphas {
            let mut ratios = Vec::new();
            for &eps in eps_values {
                let params = ModelParams::new(eps, alpha, 1, n_max, horizon)?;
                let spec = LinearSolveSpec {
                    params,
                    phi0: phi0.clone(),
                    phi1: phi1.clone(),
                    forcing: forcing.clone(),
                    dt,
                    steps,
                };
                ratios.push((eps, energy_ratio(&spec, sigma)?));
            }
            let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
            let min = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let spread = max / min;
            worst = worst.max(spread);
            let xs: Vec<f64> = ratios.iter().map(|r| r.0).collect();
            let ys: Vec<f64> = ratios.iter().map(|r| r.1).collect();
            // growth as eps -> 0 shows up as negative correlation with eps
            let sp = spearman(&xs, &ys);
            results.push(FixtureUniformity {
                fixture: fixture.name().into(),
                alpha: (alpha.re, alpha.im),
                ratios,
                spread,
                p_against_growth: sp.p_negative,
            });
        }
    }
    Ok(EnergyUniformityReport {
        results,
        worst_spread: worst,
    })
}

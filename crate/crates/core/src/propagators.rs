//! Deterministic linear solvers for `eps^2 u'' + 2 alpha u' + (1 - Lap) u = f`
//! in mild form, the hyperbolic-function representation that survives real
//! damping, the frequency split at `|eps k| ~ 1`, and the two limit equations
//! (parabolic as `eps -> 0`, real-damped wave as `Im alpha -> 0`).
//!
//! Forcing is treated as piecewise constant on steps, which makes the
//! per-mode Duhamel integral closed form; the nonlinear exponential-Euler
//! stepper is exactly these solvers applied to frozen nonlinearities.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::gaussian::ModeOu;
use crate::linalg2::{expm, phi1, Mat2, Vec2};
use crate::spectral::norms::{smooth_step, sobolev_norm};
use crate::spectral::{PairState, SpectralField};
use crate::symbols::{lambda_pm_at, ModelParams};
use crate::Result;

type C = Complex64;

/// One deterministic linear initial-value problem. `forcing` is either empty
/// (zero force) or one field per step, held constant on `[t_i, t_{i+1})`.
#[derive(Debug, Clone)]
pub struct LinearSolveSpec {
    pub params: ModelParams,
    pub phi0: SpectralField,
    pub phi1: SpectralField,
    pub forcing: Vec<SpectralField>,
    pub dt: f64,
    pub steps: usize,
}

impl LinearSolveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CoreError::InvalidParams("dt must be positive".into()));
        }
        if self.dt * self.steps as f64 > self.params.horizon * (1.0 + 1e-9) {
            return Err(CoreError::InvalidParams(format!(
                "dt * steps = {} exceeds horizon {}",
                self.dt * self.steps as f64,
                self.params.horizon
            )));
        }
        if !self.phi0.same_lattice(&self.phi1) {
            return Err(CoreError::LatticeMismatch(
                "phi0 and phi1 lattices differ".into(),
            ));
        }
        if !(self.forcing.is_empty() || self.forcing.len() == self.steps) {
            return Err(CoreError::InvalidParams(format!(
                "forcing must supply 0 or {} samples, got {}",
                self.steps,
                self.forcing.len()
            )));
        }
        Ok(())
    }

    fn force_at(&self, step: usize, idx: usize) -> C {
        self.forcing
            .get(step)
            .map(|f| f.coeffs()[idx])
            .unwrap_or_default()
    }
}

/// Mode decomposition of initial data onto the two exponential branches:
/// returns `(phi_hat^+, phi_hat^-, f_mult)` with `f_hat^{+-} = +- f_mult * f_hat`,
/// `f_mult = 1 / (2 sqrt(alpha^2 - eps^2 <k>^2))`.
///
/// The denominator is bounded below by `sqrt(2 |Re(alpha) Im(alpha)|)`, which
/// is asserted before any division; real `alpha` is rejected on this path.
pub fn mild_coefficients(
    p: &ModelParams,
    k: (i32, i32),
    phi0_hat: C,
    phi1_hat: C,
) -> Result<(C, C, C)> {
    if !p.has_complex_damping() {
        return Err(CoreError::Unsupported(
            "mild-form branch split requires Im(alpha) != 0; use the hyperbolic path".into(),
        ));
    }
    let ksq = ModelParams::bracket_sq(k);
    let (lp, lm) = lambda_pm_at(p.eps, p.alpha, ksq);
    let eps2 = p.eps * p.eps;
    let root = (lp - lm) * eps2 * 0.5; // sqrt(alpha^2 - eps^2 <k>^2)
    let floor = (2.0 * (p.alpha.re * p.alpha.im).abs()).sqrt();
    debug_assert!(
        root.norm() >= floor * (1.0 - 1e-9),
        "branch denominator below its lower bound"
    );
    let inv = 0.5 / root;
    let phi_p = (-eps2 * lm * phi0_hat + p.eps * phi1_hat) * inv;
    let phi_m = (eps2 * lp * phi0_hat - p.eps * phi1_hat) * inv;
    Ok((phi_p, phi_m, inv))
}

enum MildMode {
    Branch {
        lp: C,
        lm: C,
        elp: C,
        elm: C,
        inv2root: C,
        eps: f64,
        eps2: f64,
    },
    // near eigenvalue collision the branch formulas cancel badly; fall back
    // to the hyperbolic matrix step
    Matrix {
        exp_a: Mat2,
        fgain: Vec2,
    },
}

impl MildMode {
    fn new(p: &ModelParams, k: (i32, i32), dt: f64) -> Result<Self> {
        let ksq = ModelParams::bracket_sq(k);
        let (lp, lm) = lambda_pm_at(p.eps, p.alpha, ksq);
        if (lp - lm).norm() < 1e-6 * (lp.norm() + lm.norm()) {
            let mode = ModeOu::new(p, k);
            let a = mode.drift_matrix();
            let exp_a = expm(&a, dt);
            let fgain = phi1(&a, &exp_a)?.mulvec(&[C::default(), C::new(1.0 / p.eps, 0.0)]);
            return Ok(Self::Matrix { exp_a, fgain });
        }
        let eps2 = p.eps * p.eps;
        Ok(Self::Branch {
            lp,
            lm,
            elp: (lp * dt).exp(),
            elm: (lm * dt).exp(),
            inv2root: 1.0 / ((lp - lm) * eps2),
            eps: p.eps,
            eps2,
        })
    }

    /// Advance `(u, eps u')` by one step with frozen forcing `f`.
    fn step(&self, u: C, v: C, f: C) -> (C, C) {
        match self {
            Self::Matrix { exp_a, fgain } => {
                let x = exp_a.mulvec(&[u, v]);
                (x[0] + fgain[0] * f, x[1] + fgain[1] * f)
            }
            Self::Branch {
                lp,
                lm,
                elp,
                elm,
                inv2root,
                eps,
                eps2,
            } => {
                let phi_p = (-eps2 * lm * u + eps * v) * inv2root;
                let phi_m = (eps2 * lp * u - eps * v) * inv2root;
                let fp = f * inv2root;
                let one = C::new(1.0, 0.0);
                // f^+ + f^- = 0, so the boundary terms of d_t u cancel
                let u1 = elp * phi_p + elm * phi_m + fp * ((elp - one) / lp - (elm - one) / lm);
                let v1 = eps
                    * (lp * elp * phi_p + lm * elm * phi_m + fp * ((elp - one) - (elm - one)));
                (u1, v1)
            }
        }
    }
}

fn run_pair_solver<F>(spec: &LinearSolveSpec, make: F) -> Result<Vec<PairState>>
where
    F: Fn((i32, i32)) -> Result<MildMode>,
{
    spec.validate()?;
    let lattice = spec.phi0.lattice();
    let modes: Vec<MildMode> = lattice
        .modes()
        .iter()
        .map(|&k| make(k))
        .collect::<Result<_>>()?;
    let mut state = PairState::new(spec.phi0.clone(), spec.phi1.clone())?;
    let mut out = Vec::with_capacity(spec.steps + 1);
    out.push(state.clone());
    for s in 0..spec.steps {
        for (i, m) in modes.iter().enumerate() {
            let (u, v) = m.step(
                state.psi.coeffs()[i],
                state.phi.coeffs()[i],
                spec.force_at(s, i),
            );
            state.psi.coeffs_mut()[i] = u;
            state.phi.coeffs_mut()[i] = v;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Mild-form solve with explicit branch exponentials. Requires complex
/// damping; near-degenerate modes switch to the hyperbolic step.
pub fn linear_solve_mild(spec: &LinearSolveSpec) -> Result<Vec<PairState>> {
    if !spec.params.has_complex_damping() {
        return Err(CoreError::Unsupported(
            "mild path requires Im(alpha) != 0; use linear_solve_sinh".into(),
        ));
    }
    run_pair_solver(spec, |k| MildMode::new(&spec.params, k, spec.dt))
}

/// Hyperbolic-function solve `u = e^{-alpha t/eps^2}(cosh + sinh/q ...)`,
/// expressed as the phase-space matrix exponential with `sinh(z)/z` evaluated
/// by series near the branch point. Valid for any `Re(alpha) > 0`, real
/// damping included.
pub fn linear_solve_sinh(spec: &LinearSolveSpec) -> Result<Vec<PairState>> {
    run_pair_solver(spec, |k| {
        let mode = ModeOu::new(&spec.params, k);
        let a = mode.drift_matrix();
        let exp_a = expm(&a, spec.dt);
        let fgain = phi1(&a, &exp_a)?.mulvec(&[C::default(), C::new(1.0 / spec.params.eps, 0.0)]);
        Ok(MildMode::Matrix { exp_a, fgain })
    })
}

/// Smooth frequency cutoff: 1 on `|xi| <= 1`, 0 on `|xi| >= 2`.
pub fn frequency_cutoff(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

/// Splits `f` into `(I(eps k) f, (1 - I(eps k)) f)`. The sum reconstructs `f`
/// exactly; the low part vanishes on `|eps k| >= 2`, the high part on
/// `|eps k| <= 1`.
pub fn split_low_high(f: &SpectralField, eps: f64) -> (SpectralField, SpectralField) {
    let low = f.multiplier(|(k1, k2)| {
        let r = eps * ((k1 as f64).powi(2) + (k2 as f64).powi(2)).sqrt();
        C::new(frequency_cutoff(r), 0.0)
    });
    let high = f.sub(&low);
    (low, high)
}

/// Exact mild solve of the parabolic limit `2 alpha v' + (1 - Lap) v = f`:
/// per-mode decay `e^{-<k>^2 dt / (2 alpha)}` and closed-form Duhamel gain
/// `(1 - decay)/<k>^2` on frozen forcing.
pub fn heat_solve(
    alpha: C,
    phi0: &SpectralField,
    forcing: &[SpectralField],
    dt: f64,
    steps: usize,
) -> Result<Vec<SpectralField>> {
    if !(alpha.re > 0.0) {
        return Err(CoreError::InvalidParams("Re(alpha) must be > 0".into()));
    }
    if !(dt > 0.0) {
        return Err(CoreError::InvalidParams("dt must be positive".into()));
    }
    if !(forcing.is_empty() || forcing.len() == steps) {
        return Err(CoreError::InvalidParams(
            "forcing must supply 0 or `steps` samples".into(),
        ));
    }
    let lattice = phi0.lattice();
    let gains: Vec<(C, C)> = lattice
        .modes()
        .iter()
        .map(|&k| {
            let ksq = ModelParams::bracket_sq(k);
            let decay = (-ksq * dt / (2.0 * alpha)).exp();
            (decay, (C::new(1.0, 0.0) - decay) / ksq)
        })
        .collect();
    let mut state = phi0.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for s in 0..steps {
        for (i, (decay, gain)) in gains.iter().enumerate() {
            let f = forcing.get(s).map(|f| f.coeffs()[i]).unwrap_or_default();
            state.coeffs_mut()[i] = decay * state.coeffs()[i] + gain * f;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Real-damped wave equation `v'' + 2 alpha1 v' + (1 - Lap) v = f` via the
/// hyperbolic path at `eps = 1`.
pub fn real_damped_wave_solve(
    alpha1: f64,
    phi0: &SpectralField,
    phi1: &SpectralField,
    forcing: &[SpectralField],
    dt: f64,
    steps: usize,
    horizon: f64,
) -> Result<Vec<PairState>> {
    if !(alpha1 > 0.0) {
        return Err(CoreError::InvalidParams("alpha1 must be positive".into()));
    }
    let params = ModelParams::new(1.0, C::new(alpha1, 0.0), 1, phi0.lattice().n_max(), horizon)?;
    let spec = LinearSolveSpec {
        params,
        phi0: phi0.clone(),
        phi1: phi1.clone(),
        forcing: forcing.to_vec(),
        dt,
        steps,
    };
    linear_solve_sinh(&spec)
}

/// `sup_t |u(t) - v(t)|_{H^sigma}` over recorded samples.
pub fn sup_h_sigma_distance(u: &[SpectralField], v: &[SpectralField], sigma: f64) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| sobolev_norm(&a.sub(b), sigma))
        .fold(0.0, f64::max)
}

/// Distance of the damped Klein-Gordon solution to its parabolic limit with
/// shared data: `sup_t |u_eps(t) - v(t)|_{H^sigma}`.
pub fn nrl_linear_error(spec: &LinearSolveSpec, sigma: f64) -> Result<f64> {
    let u = linear_solve_sinh(spec)?;
    let v = heat_solve(
        spec.params.alpha,
        &spec.phi0,
        &spec.forcing,
        spec.dt,
        spec.steps,
    )?;
    let u_fields: Vec<SpectralField> = u.into_iter().map(|s| s.psi).collect();
    Ok(sup_h_sigma_distance(&u_fields, &v, sigma))
}

/// Distance of the complex-damped wave to the real-damped wave with shared
/// data, in the energy pair norm `H^sigma x H^{sigma-1}`.
pub fn url_linear_error(
    alpha1: f64,
    alpha2: f64,
    phi0: &SpectralField,
    phi1: &SpectralField,
    forcing: &[SpectralField],
    dt: f64,
    steps: usize,
    sigma: f64,
) -> Result<f64> {
    let horizon = dt * steps as f64 + 1e-9;
    let params = ModelParams::new(
        1.0,
        C::new(alpha1, alpha2),
        1,
        phi0.lattice().n_max(),
        horizon,
    )?;
    let spec = LinearSolveSpec {
        params,
        phi0: phi0.clone(),
        phi1: phi1.clone(),
        forcing: forcing.to_vec(),
        dt,
        steps,
    };
    let u = linear_solve_sinh(&spec)?;
    let v = real_damped_wave_solve(alpha1, phi0, phi1, forcing, dt, steps, horizon)?;
    Ok(u.iter()
        .zip(&v)
        .map(|(a, b)| {
            let du = a.psi.sub(&b.psi);
            let dv = a.phi.sub(&b.phi);
            let x = sobolev_norm(&du, sigma);
            let y = sobolev_norm(&dv, sigma - 1.0);
            (x * x + y * y).sqrt()
        })
        .fold(0.0, f64::max))
}

/// Empirical constant of the energy estimate on one data set:
/// `sup_t |(u, eps u')|_{H^sigma x H^{sigma-1}} / (|phi0|_{H^sigma} +
/// |phi1|_{H^{sigma-1}} + |f|_{L^2_T H^{sigma-1}})`.
pub fn energy_ratio(spec: &LinearSolveSpec, sigma: f64) -> Result<f64> {
    let traj = linear_solve_sinh(spec)?;
    let lhs = traj
        .iter()
        .map(|s| s.pair_norm(sigma))
        .fold(0.0, f64::max);
    let f_l2: f64 = spec
        .forcing
        .iter()
        .map(|f| {
            let n = sobolev_norm(f, sigma - 1.0);
            n * n * spec.dt
        })
        .sum::<f64>()
        .sqrt();
    let rhs = sobolev_norm(&spec.phi0, sigma) + sobolev_norm(&spec.phi1, sigma - 1.0) + f_l2;
    if rhs == 0.0 {
        return Err(CoreError::InvalidParams(
            "energy ratio needs nonzero data".into(),
        ));
    }
    Ok(lhs / rhs)
}

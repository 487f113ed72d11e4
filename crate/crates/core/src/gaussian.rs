//! Complex Gaussian sampling and exact per-mode integration of the linear
//! stochastic system.
//!
//! Per mode `k` the pair `x = (z_hat, y_hat)` with `y = eps d_t z` solves the
//! linear SDE `dx = A x dt + B dW_hat(k)` with
//!
//! ```text
//!     A = [ 0              1/eps      ]        B = ( 0, 2 sqrt(Re alpha) / eps )
//!         [ -<k>^2/eps    -2 alpha/eps^2 ]
//! ```
//!
//! The per-mode Wiener process is `W_hat(k) = beta_R + i beta_I` with two
//! independent real Brownian motions, so `dW dconj(W) = 2 dt`; the Lyapunov
//! forcing constant `R = diag(0, 8 Re(alpha) / eps^2)` is `B (2 dt) B^*`
//! folded into one place. The stationary covariance
//! `Sigma = diag(2 / <k>^2, 2)` solves `A Sigma + Sigma A^* + R = 0`
//! identically in `(eps, alpha, k)`, which is the computable certificate that
//! the Gaussian product measure is invariant.
//!
//! Transitions are exact in distribution: the mean is `exp(A dt) x`, the
//! fluctuation covariance is `Q(dt) = Sigma - exp(A dt) Sigma exp(A^* dt)`
//! (the stationarity identity; collision-free in contrast to an
//! eigen-decomposition of `A`). Each fluctuation is split into the coarse
//! Wiener component shared with coupled integrators plus an independent
//! within-step residual, so two solvers stepped with the same stream are
//! driven by the same Brownian increments.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::linalg2::{cholesky, expm, phi1, Mat2, Vec2};
use crate::noise::{mode_key, slots, NoiseStream};
use crate::spectral::{FrequencyLattice, PairState, SpectralField};
use crate::symbols::ModelParams;
use crate::Result;

type C = Complex64;

/// Draw from the circular complex normal `N_c(0, r)`: the law of `X + iY`
/// with independent real Gaussians of variance `r/2`, density
/// `(pi r)^{-1} exp(-|z|^2 / r)`. `r = 0` degenerates to exactly zero.
pub fn sample_complex_normal(
    r: f64,
    stream: &NoiseStream,
    step: u64,
    mode: u64,
    slot: u32,
) -> Result<C> {
    if r < 0.0 {
        return Err(CoreError::InvalidParams(format!(
            "complex normal variance must be >= 0, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(C::default());
    }
    Ok(stream.std_complex_normal(step, mode, slot) * r.sqrt())
}

/// Sample of the invariant Gaussian pair measure: independently per mode,
/// `psi_hat(k) ~ N_c(0, 2/<k>^2)` and `phi_hat(k) ~ N_c(0, 2)`.
pub fn sample_mu(lattice: &Arc<FrequencyLattice>, stream: &NoiseStream) -> PairState {
    let mut psi = SpectralField::zero(lattice);
    let mut phi = SpectralField::zero(lattice);
    for (i, &k) in lattice.modes().iter().enumerate() {
        let key = mode_key(k);
        let w = 1.0 + (k.0 as f64).powi(2) + (k.1 as f64).powi(2);
        psi.coeffs_mut()[i] = stream.std_complex_normal(0, key, slots::MU_PSI) * (2.0 / w).sqrt();
        phi.coeffs_mut()[i] = stream.std_complex_normal(0, key, slots::MU_PHI) * 2f64.sqrt();
    }
    PairState { psi, phi }
}

/// Per-mode drift data of the linear system.
#[derive(Debug, Clone, Copy)]
pub struct ModeOu {
    pub k: (i32, i32),
    pub ksq: f64,
    pub eps: f64,
    pub alpha: C,
}

impl ModeOu {
    pub fn new(p: &ModelParams, k: (i32, i32)) -> Self {
        Self {
            k,
            ksq: ModelParams::bracket_sq(k),
            eps: p.eps,
            alpha: p.alpha,
        }
    }

    pub fn drift_matrix(&self) -> Mat2 {
        let e = self.eps;
        Mat2([
            [C::default(), C::new(1.0 / e, 0.0)],
            [C::new(-self.ksq / e, 0.0), -2.0 * self.alpha / (e * e)],
        ])
    }

    /// Noise vector `B = (0, 2 sqrt(Re alpha)/eps)`.
    pub fn noise_vector(&self) -> Vec2 {
        [
            C::default(),
            C::new(2.0 * self.alpha.re.sqrt() / self.eps, 0.0),
        ]
    }

    /// Lyapunov forcing `R = diag(0, 8 Re(alpha)/eps^2)`.
    pub fn noise_rate(&self) -> Mat2 {
        Mat2::diag(
            C::default(),
            C::new(8.0 * self.alpha.re / (self.eps * self.eps), 0.0),
        )
    }

    /// Stationary covariance `Sigma = diag(2/<k>^2, 2)`.
    pub fn stationary_cov(&self) -> Mat2 {
        Mat2::diag(C::new(2.0 / self.ksq, 0.0), C::new(2.0, 0.0))
    }

    /// Max-abs entry of `A Sigma + Sigma A^* + R`; zero up to rounding.
    pub fn lyapunov_residual(&self) -> f64 {
        let a = self.drift_matrix();
        let s = self.stationary_cov();
        a.mul(&s)
            .add(&s.mul(&a.adjoint()))
            .add(&self.noise_rate())
            .max_abs()
    }

    /// Exact transition over `dt >= 0`.
    pub fn transition(&self, dt: f64) -> Result<OuTransition> {
        OuTransition::new(self, dt)
    }
}

/// Exact-in-distribution Gaussian transition of one mode over a fixed step.
#[derive(Debug, Clone)]
pub struct OuTransition {
    exp_a: Mat2,
    /// `Phi_1(dt) (0, 1/eps)`: gain applied to a forcing value held constant
    /// over the step (enters the second component of the first-order system).
    forcing_gain: Vec2,
    /// Projection of the fluctuation on the coarse Wiener increment,
    /// normalized so the shared draw is a standard complex normal.
    wiener_gain: Vec2,
    /// Cholesky factor of the within-step residual covariance.
    resid_chol: Mat2,
    cov: Mat2,
}

impl OuTransition {
    fn new(mode: &ModeOu, dt: f64) -> Result<Self> {
        if dt < 0.0 {
            return Err(CoreError::InvalidParams("dt must be >= 0".into()));
        }
        let a = mode.drift_matrix();
        let exp_a = expm(&a, dt);
        if dt == 0.0 {
            return Ok(Self {
                exp_a: Mat2::identity(),
                forcing_gain: [C::default(); 2],
                wiener_gain: [C::default(); 2],
                resid_chol: Mat2::zero(),
                cov: Mat2::zero(),
            });
        }
        let p1 = phi1(&a, &exp_a)?;
        let forcing_gain = p1.mulvec(&[C::default(), C::new(1.0 / mode.eps, 0.0)]);

        // Q(dt) via the stationarity identity.
        let sigma = mode.stationary_cov();
        let cov = sigma.sub(&exp_a.mul(&sigma).mul(&exp_a.adjoint()));

        // Coarse Wiener projection: E[xi dconj(DW)] = 2 Phi_1 B, DW of
        // covariance 2 dt, shared draw eta_w ~ N_c(0,1) with DW = sqrt(2dt) eta_w.
        let b = mode.noise_vector();
        let c_w = p1.mulvec(&b);
        let inv_sqrt = 1.0 / (2.0 * dt).sqrt();
        let wiener_gain = [2.0 * c_w[0] * inv_sqrt, 2.0 * c_w[1] * inv_sqrt];

        // Residual covariance Q - a a^* (Schur complement; PSD up to rounding).
        let outer = Mat2([
            [
                wiener_gain[0] * wiener_gain[0].conj(),
                wiener_gain[0] * wiener_gain[1].conj(),
            ],
            [
                wiener_gain[1] * wiener_gain[0].conj(),
                wiener_gain[1] * wiener_gain[1].conj(),
            ],
        ]);
        let resid = cov.sub(&outer);
        let resid_chol = cholesky(&resid)?;
        Ok(Self {
            exp_a,
            forcing_gain,
            wiener_gain,
            resid_chol,
            cov,
        })
    }

    pub fn mean_map(&self) -> &Mat2 {
        &self.exp_a
    }

    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    pub fn forcing_gain(&self) -> &Vec2 {
        &self.forcing_gain
    }

    /// Advance one mode: exact linear flow, frozen forcing, exact noise.
    /// `noise_scale` rescales the fluctuation (0 disables noise for
    /// deterministic cross-checks).
    pub fn step(
        &self,
        state: Vec2,
        forcing: C,
        stream: &NoiseStream,
        step: u64,
        mode: u64,
        noise_scale: f64,
    ) -> Vec2 {
        let mut x = self.exp_a.mulvec(&state);
        x[0] += self.forcing_gain[0] * forcing;
        x[1] += self.forcing_gain[1] * forcing;
        if noise_scale != 0.0 {
            let eta_w = stream.std_complex_normal(step, mode, slots::WIENER);
            let eta_a = stream.std_complex_normal(step, mode, slots::RESIDUAL_A);
            let eta_b = stream.std_complex_normal(step, mode, slots::RESIDUAL_B);
            let l = &self.resid_chol.0;
            x[0] += noise_scale * (self.wiener_gain[0] * eta_w + l[0][0] * eta_a);
            x[1] += noise_scale
                * (self.wiener_gain[1] * eta_w + l[1][0] * eta_a + l[1][1] * eta_b);
        }
        x
    }
}

/// Precomputed transitions for every lattice mode at a fixed step size.
pub struct PairStepper {
    transitions: Vec<OuTransition>,
    keys: Vec<u64>,
}

impl PairStepper {
    pub fn new(p: &ModelParams, lattice: &Arc<FrequencyLattice>, dt: f64) -> Result<Self> {
        let mut transitions = Vec::with_capacity(lattice.len());
        let mut keys = Vec::with_capacity(lattice.len());
        for &k in lattice.modes() {
            transitions.push(ModeOu::new(p, k).transition(dt)?);
            keys.push(mode_key(k));
        }
        Ok(Self { transitions, keys })
    }

    pub fn transition(&self, idx: usize) -> &OuTransition {
        &self.transitions[idx]
    }

    /// One full-field step. `forcing`, if present, is held constant over the
    /// step and enters the second component as `forcing / eps`.
    pub fn step(
        &self,
        state: &mut PairState,
        forcing: Option<&SpectralField>,
        stream: &NoiseStream,
        step: u64,
        noise_scale: f64,
    ) {
        for i in 0..self.transitions.len() {
            let f = forcing.map(|g| g.coeffs()[i]).unwrap_or_default();
            let x = self.transitions[i].step(
                [state.psi.coeffs()[i], state.phi.coeffs()[i]],
                f,
                stream,
                step,
                self.keys[i],
                noise_scale,
            );
            state.psi.coeffs_mut()[i] = x[0];
            state.phi.coeffs_mut()[i] = x[1];
        }
    }
}

/// Trajectory of the linear stochastic pair system, recorded every step
/// (index 0 is the initial state). `noise_scale = 0` reduces to the
/// deterministic linear flow.
pub fn sample_z_trajectory(
    p: &ModelParams,
    dt: f64,
    steps: usize,
    initial: &PairState,
    stream: &NoiseStream,
    noise_scale: f64,
) -> Result<Vec<PairState>> {
    let stepper = PairStepper::new(p, initial.lattice(), dt)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    let mut state = initial.clone();
    for s in 0..steps {
        stepper.step(&mut state, None, stream, s as u64, noise_scale);
        out.push(state.clone());
    }
    Ok(out)
}

/// Exact scalar transition for the parabolic limit equation
/// `2 alpha d_t z + <k>^2 z = 2 sqrt(Re alpha) dW/dt` per mode:
/// decay rate `gamma = <k>^2 / (2 alpha)`, noise `sqrt(Re alpha)/alpha dW`,
/// stationary variance `2 / <k>^2`.
#[derive(Debug, Clone, Copy)]
pub struct CglTransition {
    pub decay: C,
    /// Gain on a forcing value held constant over the step (for `+f` on the
    /// right-hand side): `(1 - decay) / <k>^2`.
    pub duhamel: C,
    wiener_gain: C,
    resid_std: f64,
}

fn phi1_scalar(mu: C, t: f64) -> C {
    let z = mu * t;
    if z.norm() < 1e-6 {
        t * (C::new(1.0, 0.0) + z * 0.5 + z * z / 6.0)
    } else {
        (z.exp() - 1.0) / mu
    }
}

impl CglTransition {
    pub fn new(alpha: C, ksq: f64, dt: f64) -> Result<Self> {
        if dt < 0.0 {
            return Err(CoreError::InvalidParams("dt must be >= 0".into()));
        }
        if !(alpha.re > 0.0) {
            return Err(CoreError::InvalidParams("Re(alpha) must be > 0".into()));
        }
        if dt == 0.0 {
            return Ok(Self {
                decay: C::new(1.0, 0.0),
                duhamel: C::default(),
                wiener_gain: C::default(),
                resid_std: 0.0,
            });
        }
        let gamma = ksq / (2.0 * alpha);
        let decay = (-gamma * dt).exp();
        let duhamel = (C::new(1.0, 0.0) - decay) / ksq;
        let b = alpha.re.sqrt() / alpha;
        let c_w = 2.0 * b * phi1_scalar(-gamma, dt);
        let wiener_gain = c_w / (2.0 * dt).sqrt();
        let total_var = (2.0 / ksq) * (1.0 - (-2.0 * gamma.re * dt).exp());
        let resid_var = (total_var - wiener_gain.norm_sqr()).max(0.0);
        Ok(Self {
            decay,
            duhamel,
            wiener_gain,
            resid_std: resid_var.sqrt(),
        })
    }

    pub fn step(
        &self,
        z: C,
        forcing: C,
        stream: &NoiseStream,
        step: u64,
        mode: u64,
        noise_scale: f64,
    ) -> C {
        let mut out = self.decay * z + self.duhamel * forcing;
        if noise_scale != 0.0 {
            let eta_w = stream.std_complex_normal(step, mode, slots::WIENER);
            let eta_r = stream.std_complex_normal(step, mode, slots::CGL_RESIDUAL);
            out += noise_scale * (self.wiener_gain * eta_w + self.resid_std * eta_r);
        }
        out
    }
}

/// Per-lattice bundle of scalar parabolic transitions.
pub struct CglStepper {
    transitions: Vec<CglTransition>,
    keys: Vec<u64>,
}

impl CglStepper {
    pub fn new(alpha: C, lattice: &Arc<FrequencyLattice>, dt: f64) -> Result<Self> {
        let mut transitions = Vec::with_capacity(lattice.len());
        let mut keys = Vec::with_capacity(lattice.len());
        for (i, &k) in lattice.modes().iter().enumerate() {
            let _ = i;
            let ksq = 1.0 + (k.0 as f64).powi(2) + (k.1 as f64).powi(2);
            transitions.push(CglTransition::new(alpha, ksq, dt)?);
            keys.push(mode_key(k));
        }
        Ok(Self { transitions, keys })
    }

    pub fn step(
        &self,
        state: &mut SpectralField,
        forcing: Option<&SpectralField>,
        stream: &NoiseStream,
        step: u64,
        noise_scale: f64,
    ) {
        for i in 0..self.transitions.len() {
            let f = forcing.map(|g| g.coeffs()[i]).unwrap_or_default();
            state.coeffs_mut()[i] = self.transitions[i].step(
                state.coeffs()[i],
                f,
                stream,
                step,
                self.keys[i],
                noise_scale,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::batch_means_se;

    fn params(eps: f64, alpha: C) -> ModelParams {
        ModelParams::new(eps, alpha, 1, 4, 1.0).unwrap()
    }

    #[test]
    fn complex_normal_moments_and_degeneracy() {
        let stream = NoiseStream::new(11);
        let n = 100_000u64;
        let r = 2.0;
        let mut abs2 = 0.0;
        let mut sq = C::default();
        for i in 0..n {
            let z = sample_complex_normal(r, &stream, i, 0, slots::AUX).unwrap();
            abs2 += z.norm_sqr();
            sq += z * z;
        }
        let mean_abs2 = abs2 / n as f64;
        let se = r / (n as f64).sqrt();
        assert!((mean_abs2 - r).abs() < 3.0 * se, "E|z|^2 = {mean_abs2}");
        assert!((sq / n as f64).norm() < 3.0 * se, "E z^2 not ~ 0");

        assert_eq!(
            sample_complex_normal(0.0, &stream, 0, 0, 0).unwrap(),
            C::default()
        );
        assert!(sample_complex_normal(-1.0, &stream, 0, 0, 0).is_err());
    }

    #[test]
    fn mu_mode_variances() {
        let lat = FrequencyLattice::linear(2);
        let base = NoiseStream::new(5);
        let n = 40_000;
        let (mut v00, mut v10, mut cross) = (0.0, 0.0, C::default());
        for i in 0..n {
            let s = sample_mu(&lat, &base.trajectory(i));
            let z0 = s.psi.get((0, 0));
            v00 += z0.norm_sqr();
            v10 += s.psi.get((1, 0)).norm_sqr();
            cross += z0 * s.phi.get((0, 0)).conj();
        }
        let nf = n as f64;
        assert!((v00 / nf - 2.0).abs() < 3.0 * 2.0 / nf.sqrt());
        assert!((v10 / nf - 1.0).abs() < 3.0 * 1.0 / nf.sqrt());
        // independence of psi and phi at a mode
        assert!((cross / nf).norm() < 3.0 * 2.0 / nf.sqrt());
    }

    #[test]
    fn drift_eigenvalues_are_lambda_pm() {
        use crate::symbols::lambda_pm;
        let p = params(0.25, C::new(1.0, 1.0));
        for &k in &[(0, 0), (2, -1), (4, 0)] {
            let m = ModeOu::new(&p, k);
            let a = m.drift_matrix();
            let (lp, lm) = lambda_pm(&p, k);
            for l in [lp, lm] {
                // det(A - l I) = 0
                let shifted = a.sub(&Mat2::diag(l, l));
                let res = shifted.det().norm();
                let scale = a.max_abs().powi(2).max(1.0);
                assert!(res < 1e-10 * scale, "residual {res:e}");
            }
        }
    }

    #[test]
    fn lyapunov_certificate_over_parameter_grid() {
        let lat = FrequencyLattice::linear(16);
        let alphas = [C::new(1.0, 1.0), C::new(2.0, 1.0), C::new(1.0, 3.0)];
        for j in 0..=6 {
            let eps = 2f64.powi(-j);
            for &alpha in &alphas {
                let p = params(eps, alpha);
                for &k in lat.modes() {
                    let r = ModeOu::new(&p, k).lyapunov_residual();
                    assert!(r < 1e-10, "residual {r:e} at eps={eps}, k={k:?}");
                }
            }
        }
    }

    #[test]
    fn transition_dt_zero_is_identity() {
        let p = params(0.5, C::new(1.0, 1.0));
        let t = ModeOu::new(&p, (1, 1)).transition(0.0).unwrap();
        let s = NoiseStream::new(3);
        let x = [C::new(0.3, -0.2), C::new(1.0, 0.5)];
        let y = t.step(x, C::default(), &s, 0, 0, 1.0);
        assert_eq!(x, y);
    }

    #[test]
    fn chapman_kolmogorov_mean_and_covariance() {
        for &(eps, alpha) in &[
            (1.0, C::new(1.0, 1.0)),
            (0.125, C::new(2.0, 1.0)),
            (1.0, C::new(1.0, 0.0)), // real damping, branch point territory
        ] {
            let p = params(eps, alpha);
            let m = ModeOu::new(&p, (1, 0));
            let full = m.transition(0.2).unwrap();
            let half = m.transition(0.1).unwrap();
            let comp_mean = half.mean_map().mul(half.mean_map());
            assert!(comp_mean.sub(full.mean_map()).max_abs() < 1e-10);
            let comp_cov = half
                .mean_map()
                .mul(half.cov())
                .mul(&half.mean_map().adjoint())
                .add(half.cov());
            assert!(comp_cov.sub(full.cov()).max_abs() < 1e-10);
        }
    }

    #[test]
    fn long_run_occupation_matches_stationary_law() {
        // one long trajectory at k = 0, started from the invariant law
        let p = params(1.0, C::new(1.0, 1.0));
        let mode = ModeOu::new(&p, (0, 0));
        let t = mode.transition(0.01).unwrap();
        let stream = NoiseStream::new(20_240_501);
        let key = mode_key((0, 0));
        let mut x = [
            sample_complex_normal(2.0, &stream, 0, key, slots::MU_PSI).unwrap(),
            sample_complex_normal(2.0, &stream, 0, key, slots::MU_PHI).unwrap(),
        ];
        let steps = 20_000;
        let mut series = Vec::with_capacity(steps);
        for s in 0..steps {
            x = t.step(x, C::default(), &stream, s as u64, key, 1.0);
            series.push(x[0].norm_sqr());
        }
        let mean = series.iter().sum::<f64>() / steps as f64;
        let se = batch_means_se(&series, 50);
        assert!(
            (mean - 2.0).abs() < 3.0 * se,
            "mean {mean}, se {se}: outside 3 SE of 2"
        );
    }

    #[test]
    fn one_step_law_matches_transition_formula() {
        // covariance at t = 1 over many paths vs exp(A) Sigma0 exp(A*) + Q(1)
        let p = params(0.5, C::new(1.0, 1.0));
        let mode = ModeOu::new(&p, (1, 0));
        let t = mode.transition(1.0).unwrap();
        let n = 10_000;
        let base = NoiseStream::new(99);
        let mut acc = Mat2::zero();
        for i in 0..n {
            let s = base.trajectory(i);
            let key = mode_key((1, 0));
            let x0 = [
                sample_complex_normal(1.0, &s, 0, key, slots::MU_PSI).unwrap(),
                sample_complex_normal(2.0, &s, 0, key, slots::MU_PHI).unwrap(),
            ];
            let x = t.step(x0, C::default(), &s, 0, key, 1.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc.0[a][b] += x[a] * x[b].conj();
                }
            }
        }
        let emp = acc.scale(C::new(1.0 / n as f64, 0.0));
        let sigma0 = Mat2::diag(C::new(1.0, 0.0), C::new(2.0, 0.0));
        let expect = t
            .mean_map()
            .mul(&sigma0)
            .mul(&t.mean_map().adjoint())
            .add(t.cov());
        // 3 SE with SE ~ entry scale / sqrt(n)
        let tol = 3.0 * 2.5 / (n as f64).sqrt();
        assert!(
            emp.sub(&expect).max_abs() < tol,
            "deviation {:e} > {tol:e}",
            emp.sub(&expect).max_abs()
        );
    }

    #[test]
    fn trajectories_are_bit_reproducible() {
        let p = params(0.5, C::new(1.0, 1.0));
        let lat = FrequencyLattice::linear(3);
        let stream = NoiseStream::new(7).trajectory(9);
        let init = sample_mu(&lat, &stream);
        let a = sample_z_trajectory(&p, 0.05, 40, &init, &stream, 1.0).unwrap();
        let b = sample_z_trajectory(&p, 0.05, 40, &init, &stream, 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.psi.coeffs(), y.psi.coeffs());
            assert_eq!(x.phi.coeffs(), y.phi.coeffs());
        }
    }

    #[test]
    fn cross_mode_covariance_vanishes() {
        let p = params(1.0, C::new(1.0, 1.0));
        let lat = FrequencyLattice::linear(1);
        let base = NoiseStream::new(31);
        let n = 20_000;
        let mut cross = C::default();
        for i in 0..n {
            let s = base.trajectory(i);
            let init = sample_mu(&lat, &s);
            let traj = sample_z_trajectory(&p, 0.1, 5, &init, &s, 1.0).unwrap();
            let last = traj.last().unwrap();
            cross += last.psi.get((1, 0)) * last.psi.get((0, 1)).conj();
        }
        let nf = n as f64;
        assert!((cross / nf).norm() < 3.0 * 1.0 / nf.sqrt());
    }

    #[test]
    fn cgl_rate_variance_identity_per_mode() {
        // 2 Re(gamma) * stationary_var == 2 |b|^2 with gamma = <k>^2/(2 alpha),
        // b = sqrt(Re alpha)/alpha: the scalar Lyapunov identity.
        for &alpha in &[C::new(1.0, 1.0), C::new(2.0, 1.0), C::new(1.0, 3.0)] {
            let lat = FrequencyLattice::linear(4);
            for &k in lat.modes() {
                let ksq = ModelParams::bracket_sq(k);
                let gamma = ksq / (2.0 * alpha);
                let b = alpha.re.sqrt() / alpha;
                let lhs = 2.0 * gamma.re * (2.0 / ksq);
                let rhs = 2.0 * b.norm_sqr();
                assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn cgl_dt_zero_identity_and_long_run_variance() {
        let alpha = C::new(1.0, 1.0);
        let t0 = CglTransition::new(alpha, 2.0, 0.0).unwrap();
        let s = NoiseStream::new(2);
        let z = C::new(0.7, -0.3);
        assert_eq!(t0.step(z, C::default(), &s, 0, 0, 1.0), z);

        let ksq = 2.0;
        let t = CglTransition::new(alpha, ksq, 0.05).unwrap();
        let stream = NoiseStream::new(314);
        let key = mode_key((1, 0));
        let mut z = sample_complex_normal(2.0 / ksq, &stream, 0, key, slots::MU_PSI).unwrap();
        let steps = 40_000;
        let mut series = Vec::with_capacity(steps);
        for i in 0..steps {
            z = t.step(z, C::default(), &stream, i as u64, key, 1.0);
            series.push(z.norm_sqr());
        }
        let mean = series.iter().sum::<f64>() / steps as f64;
        let se = batch_means_se(&series, 50);
        assert!(
            (mean - 2.0 / ksq).abs() < 3.0 * se,
            "mean {mean} vs {} (se {se})",
            2.0 / ksq
        );
    }
}

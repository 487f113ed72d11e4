//! The truncated Gibbs ensemble: quartic interaction evaluation, importance
//! sampling from the Gaussian pair measure, and the statistical invariance
//! test of the weighted ensemble under the nonlinear flow.
//!
//! The target density against the Gaussian pair measure is
//! `exp(-1/(2n+2) int H_{n+1,n+1}(Pi_N psi; C_N) dx)`; the velocity marginal
//! never enters the weight and is sampled exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::gaussian::sample_mu;
use crate::noise::NoiseStream;
use crate::nonlinear::{run_spde, SpdeRun};
use crate::spectral::transform::to_physical_on;
use crate::spectral::{PairState, SpectralField};
use crate::stats::weighted_mean_se;
use crate::symbols::ModelParams;
use crate::wick::{hermite_eval, pointwise_variance};
use crate::Result;

/// One weighted draw targeting the truncated Gibbs measure.
#[derive(Debug, Clone)]
pub struct GibbsSample {
    pub state: PairState,
    /// `-1/(2n+2) int H_{n+1,n+1}(Pi_N psi; C_N) dx`.
    pub log_weight: f64,
}

/// Renormalized interaction `1/(2n+2) int H_{n+1,n+1}(Pi_N psi; C_N) dx`,
/// with the quadrature grid chosen internally so the degree-`2n+2` integrand
/// is alias-free. `H_{m,m}` is real; a non-vanishing imaginary part is a
/// numerical failure.
pub fn interaction_energy(psi: &SpectralField, degree: u32, n_trunc: u32) -> Result<f64> {
    let d = 2 * degree as usize + 2;
    let grid = (d + 1) * n_trunc as usize + 2;
    interaction_energy_on(psi, degree, n_trunc, grid.max(4))
}

/// Same with an explicit quadrature grid; rejects grids that alias the
/// degree-`2n+2` product.
pub fn interaction_energy_on(
    psi: &SpectralField,
    degree: u32,
    n_trunc: u32,
    grid_size: usize,
) -> Result<f64> {
    let d = 2 * degree as usize + 2;
    let required = (d * n_trunc as usize + 1).max(2 * n_trunc as usize + 2);
    if grid_size < required {
        return Err(CoreError::GridTooSmall {
            required,
            actual: grid_size,
        });
    }
    let truncated = if psi.lattice().n_max() == n_trunc {
        psi.clone()
    } else {
        let target = crate::spectral::FrequencyLattice::new(n_trunc, grid_size)?;
        psi.project_to(&target)
    };
    let sigma = pointwise_variance(n_trunc);
    let grid = to_physical_on(&truncated, grid_size);
    let mut acc = num_complex::Complex64::default();
    for &v in grid.values() {
        acc += hermite_eval(degree + 1, degree + 1, sigma, v);
    }
    let cell = (2.0 * std::f64::consts::PI / grid_size as f64).powi(2);
    let integral = acc * cell;
    if integral.im.abs() > 1e-10 * integral.re.abs().max(1.0) {
        return Err(CoreError::Numerical(format!(
            "interaction integral has imaginary part {:e}",
            integral.im
        )));
    }
    Ok(integral.re / (2.0 * degree as f64 + 2.0))
}

/// Self-normalized weighted ensemble targeting the truncated Gibbs measure.
#[derive(Debug)]
pub struct GibbsEnsemble {
    pub samples: Vec<GibbsSample>,
    pub ess: f64,
    pub low_ess: bool,
}

impl GibbsEnsemble {
    /// Normalized weights (sum to 1).
    pub fn weights(&self) -> Vec<f64> {
        let max = self
            .samples
            .iter()
            .map(|s| s.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = self
            .samples
            .iter()
            .map(|s| (s.log_weight - max).exp())
            .collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }

    /// Weighted mean and standard error of an observable of the states.
    pub fn estimate<F: Fn(&PairState) -> f64>(&self, f: F) -> (f64, f64) {
        let vals: Vec<f64> = self.samples.iter().map(|s| f(&s.state)).collect();
        let raw: Vec<f64> = {
            let max = self
                .samples
                .iter()
                .map(|s| s.log_weight)
                .fold(f64::NEG_INFINITY, f64::max);
            self.samples
                .iter()
                .map(|s| (s.log_weight - max).exp())
                .collect()
        };
        let (m, se, _) = weighted_mean_se(&vals, &raw);
        (m, se)
    }
}

/// Importance sampling from the Gaussian measure: draw `(psi, phi)` from the
/// product law, weight by the interaction. The velocity marginal is exact.
pub fn sample_rho_n(
    params: &ModelParams,
    count: usize,
    stream: &NoiseStream,
) -> Result<GibbsEnsemble> {
    if count < 1 {
        return Err(CoreError::InvalidParams("count must be >= 1".into()));
    }
    let lattice = SpdeRun::lattice_for(params);
    let degree = params.degree;
    let n_trunc = lattice.n_max();
    let samples: Vec<GibbsSample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub = stream.trajectory(i as u64);
            let state = sample_mu(&lattice, &sub);
            let energy = interaction_energy(&state.psi, degree, n_trunc)
                .expect("internally sized grid cannot alias");
            GibbsSample {
                state,
                log_weight: -energy,
            }
        })
        .collect();
    let max = samples
        .iter()
        .map(|s| s.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = samples.iter().map(|s| (s.log_weight - max).exp()).collect();
    let wsum: f64 = w.iter().sum();
    let w2sum: f64 = w.iter().map(|x| x * x).sum();
    let ess = wsum * wsum / w2sum;
    Ok(GibbsEnsemble {
        samples,
        ess,
        low_ess: ess < 10.0,
    })
}

/// Result of one tracked observable in the ensemble-invariance test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableZ {
    pub name: String,
    pub mean_initial: f64,
    pub mean_final: f64,
    /// Weighted paired difference (final - initial).
    pub bias: f64,
    pub se: f64,
    pub z: f64,
}

/// Report of the weighted-ensemble invariance test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub observables: Vec<ObservableZ>,
    pub count: usize,
    pub blowups: usize,
    pub ess: f64,
    pub dt: f64,
    pub horizon: f64,
    pub nonlinearity: bool,
}

impl InvarianceReport {
    pub fn max_abs_z(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.z.abs())
            .fold(0.0, f64::max)
    }
}

/// Evolves a (weighted) equilibrium ensemble for `horizon` and compares
/// time-averaged observables at the endpoint to their initial values using
/// paired differences. With `nonlinearity = false` the weights are identically
/// one and the test reduces to the exactly-invariant Gaussian case.
pub fn invariance_test(
    params: &ModelParams,
    dt: f64,
    horizon: f64,
    count: usize,
    stream: &NoiseStream,
    nonlinearity: bool,
) -> Result<InvarianceReport> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(CoreError::InvalidParams("dt and horizon must be > 0".into()));
    }
    let steps = (horizon / dt).round().max(1.0) as usize;
    let lattice = SpdeRun::lattice_for(params);
    let degree = params.degree;
    let n_trunc = lattice.n_max();
    let tracked: Vec<(String, Box<dyn Fn(&PairState) -> f64 + Sync>)> = vec![
        (
            "occupation_psi_00".into(),
            Box::new(|s: &PairState| s.psi.get((0, 0)).norm_sqr()),
        ),
        (
            "occupation_psi_10".into(),
            Box::new(|s: &PairState| s.psi.get((1, 0)).norm_sqr()),
        ),
        (
            "occupation_psi_11".into(),
            Box::new(|s: &PairState| s.psi.get((1, 1)).norm_sqr()),
        ),
        (
            "occupation_phi_00".into(),
            Box::new(|s: &PairState| s.phi.get((0, 0)).norm_sqr()),
        ),
    ];

    struct PathResult {
        log_weight: f64,
        initial: Vec<f64>,
        fin: Option<Vec<f64>>,
    }

    let results: Vec<PathResult> = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub = stream.trajectory(i as u64);
            let state = sample_mu(&lattice, &sub);
            let log_weight = if nonlinearity {
                -interaction_energy(&state.psi, degree, n_trunc).expect("sized grid")
            } else {
                0.0
            };
            let mut initial: Vec<f64> = tracked.iter().map(|(_, f)| f(&state)).collect();
            initial.push(
                interaction_energy(&state.psi, degree, n_trunc).expect("sized grid"),
            );
            let run = SpdeRun {
                params: *params,
                lattice: std::sync::Arc::clone(&lattice),
                initial: state,
                dt,
                steps,
                stream: sub,
                record_stride: steps,
                noise_scale: 1.0,
                nonlinearity,
                blowup_threshold: 1e8,
            };
            let traj = run_spde(&run).expect("validated run");
            let fin = if traj.blowup.is_some() {
                None
            } else {
                let last = traj.states.last().unwrap();
                let mut v: Vec<f64> = tracked.iter().map(|(_, f)| f(last)).collect();
                v.push(interaction_energy(&last.psi, degree, n_trunc).expect("sized grid"));
                Some(v)
            };
            PathResult {
                log_weight,
                initial,
                fin,
            }
        })
        .collect();

    let survivors: Vec<&PathResult> = results.iter().filter(|r| r.fin.is_some()).collect();
    let blowups = results.len() - survivors.len();
    if survivors.is_empty() {
        return Err(CoreError::Numerical("every trajectory blew up".into()));
    }
    let max_lw = survivors
        .iter()
        .map(|r| r.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = survivors
        .iter()
        .map(|r| (r.log_weight - max_lw).exp())
        .collect();
    let wsum: f64 = weights.iter().sum();
    let w2sum: f64 = weights.iter().map(|w| w * w).sum();
    let ess = wsum * wsum / w2sum;

    let mut names: Vec<String> = tracked.iter().map(|(n, _)| n.clone()).collect();
    names.push("interaction_energy".into());
    let mut observables = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let init: Vec<f64> = survivors.iter().map(|r| r.initial[j]).collect();
        let fin: Vec<f64> = survivors.iter().map(|r| r.fin.as_ref().unwrap()[j]).collect();
        let diffs: Vec<f64> = init.iter().zip(&fin).map(|(a, b)| b - a).collect();
        let (bias, se, _) = weighted_mean_se(&diffs, &weights);
        let (m0, _, _) = weighted_mean_se(&init, &weights);
        let (mt, _, _) = weighted_mean_se(&fin, &weights);
        observables.push(ObservableZ {
            name: name.clone(),
            mean_initial: m0,
            mean_final: mt,
            bias,
            se,
            z: if se > 0.0 { bias / se } else { 0.0 },
        });
    }
    Ok(InvarianceReport {
        observables,
        count,
        blowups,
        ess,
        dt,
        horizon,
        nonlinearity,
    })
}

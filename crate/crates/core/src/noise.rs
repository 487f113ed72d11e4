//! Counter-based Gaussian noise.
//!
//! Every draw is a pure function of `(seed, trajectory, step, mode, slot)`:
//! the tuple is folded through a 64-bit avalanche mixer and expanded by
//! Box-Muller. Identical tuples yield identical draws regardless of
//! evaluation order or thread schedule, which is what makes coupled
//! Monte-Carlo sweeps (same increments across `eps` or `alpha` values) and
//! parallel ensembles bit-reproducible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Fixed roles for the `slot` coordinate of a draw.
pub mod slots {
    /// Initial `psi` coefficient when sampling the Gaussian measure.
    pub const MU_PSI: u32 = 0;
    /// Initial `phi` coefficient when sampling the Gaussian measure.
    pub const MU_PHI: u32 = 1;
    /// Coarse Wiener increment shared by coupled integrators.
    pub const WIENER: u32 = 2;
    /// First within-step residual of the phase-space transition.
    pub const RESIDUAL_A: u32 = 3;
    /// Second within-step residual of the phase-space transition.
    pub const RESIDUAL_B: u32 = 4;
    /// Within-step residual of the scalar (parabolic) transition.
    pub const CGL_RESIDUAL: u32 = 5;
    /// General-purpose draws for samplers built on top of the stream.
    pub const AUX: u32 = 6;
}

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn fold(h: u64, v: u64) -> u64 {
    mix(h ^ mix(v))
}

/// Key a mode vector independently of any lattice ordering, so coupled runs
/// on different truncations see the same draws at the same mode.
#[inline]
pub fn mode_key(k: (i32, i32)) -> u64 {
    ((k.0 as u32 as u64) << 32) | (k.1 as u32 as u64)
}

/// A deterministic noise source identified by `(seed, trajectory_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseStream {
    seed: u64,
    trajectory_id: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            trajectory_id: 0,
        }
    }

    /// Sub-stream for one Monte-Carlo trajectory.
    pub fn trajectory(&self, id: u64) -> Self {
        Self {
            seed: self.seed,
            trajectory_id: id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trajectory_id(&self) -> u64 {
        self.trajectory_id
    }

    #[inline]
    fn key(&self, step: u64, mode: u64, slot: u32) -> u64 {
        let mut h = fold(0x5DEE_CE66_D1CE_4E5B, self.seed);
        h = fold(h, self.trajectory_id);
        h = fold(h, step);
        h = fold(h, mode);
        fold(h, slot as u64)
    }

    /// Uniform in `(0, 1]` (never 0, so logarithms are safe).
    #[inline]
    pub fn uniform(&self, step: u64, mode: u64, slot: u32, lane: u32) -> f64 {
        let v = mix(self.key(step, mode, slot) ^ ((lane as u64) << 32 | 0xA5A5));
        ((v >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Independent standard normal pair via Box-Muller.
    #[inline]
    pub fn std_normal_pair(&self, step: u64, mode: u64, slot: u32) -> (f64, f64) {
        let u1 = self.uniform(step, mode, slot, 0);
        let u2 = self.uniform(step, mode, slot, 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        (r * th.cos(), r * th.sin())
    }

    /// Standard circular complex normal `N_c(0, 1)`: `E[z conj(z)] = 1`,
    /// `E[z^2] = 0`.
    #[inline]
    pub fn std_complex_normal(&self, step: u64, mode: u64, slot: u32) -> Complex64 {
        let (x, y) = self.std_normal_pair(step, mode, slot);
        Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
    }
}

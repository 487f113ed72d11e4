//! Frequency lattice, spectral fields, and phase-space pairs on the torus
//! `T^2 = (R / 2 pi Z)^2`.
//!
//! Conventions. The Fourier basis is `e_k(x) = (2 pi)^{-1} exp(i k . x)`,
//! orthonormal in `L^2(T^2)`, and a field is stored by its coefficients
//! `f_hat(k) = <f, e_k>` over the truncated mode set `|k| <= N` (Euclidean
//! norm). The Japanese bracket is `<k>^2 = 1 + |k|^2 >= 1`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::Result;

pub mod norms;
pub mod transform;

pub use norms::{besov_norm, neg_holder_proxy, neg_holder_proxy_on, sobolev_norm, Lq};
pub use transform::{to_physical, to_physical_on, to_spectral, PhysicalGrid};

/// Truncated index set `{k in Z^2 : |k| <= N}` with its physical-grid metadata.
///
/// Modes are ordered lexicographically in `(k1, k2)`; the ordering is part of
/// the serialization contract. The set is symmetric under `k -> -k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyLattice {
    n_max: u32,
    grid_size: usize,
    modes: Vec<(i32, i32)>,
}

impl FrequencyLattice {
    /// Builds the lattice with an explicit grid. The grid must resolve every
    /// mode without aliasing, i.e. `grid_size >= 2 N + 2`.
    pub fn new(n_max: u32, grid_size: usize) -> Result<Arc<Self>> {
        let required = 2 * n_max as usize + 2;
        if grid_size < required {
            return Err(CoreError::GridTooSmall {
                required,
                actual: grid_size,
            });
        }
        let n = n_max as i64;
        let mut modes = Vec::new();
        for k1 in -n..=n {
            for k2 in -n..=n {
                if k1 * k1 + k2 * k2 <= n * n {
                    modes.push((k1 as i32, k2 as i32));
                }
            }
        }
        Ok(Arc::new(Self {
            n_max,
            grid_size,
            modes,
        }))
    }

    /// Minimal alias-free lattice for linear (degree-1) work.
    pub fn linear(n_max: u32) -> Arc<Self> {
        Self::new(n_max, 2 * n_max as usize + 2).expect("minimal grid is always valid")
    }

    /// Lattice whose grid keeps pointwise products of `degree` fields
    /// alias-free after projection back to `|k| <= N`:
    /// `M >= (degree + 1) N + 2`, rounded up to a multiple of 4.
    pub fn alias_free(n_max: u32, degree: u32) -> Arc<Self> {
        let mut m = ((degree as usize + 1) * n_max as usize + 2).max(2 * n_max as usize + 2);
        m = (m + 3) / 4 * 4;
        Self::new(n_max, m).expect("alias-free grid exceeds the minimal grid")
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn modes(&self) -> &[(i32, i32)] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Position of mode `k` in the canonical ordering.
    pub fn index_of(&self, k: (i32, i32)) -> Option<usize> {
        self.modes.binary_search(&k).ok()
    }

    /// `<k>^2 = 1 + |k|^2` for the mode at `idx`.
    pub fn weight(&self, idx: usize) -> f64 {
        let (k1, k2) = self.modes[idx];
        1.0 + (k1 as f64).powi(2) + (k2 as f64).powi(2)
    }

    /// Largest product degree whose projection back to this lattice stays
    /// alias-free on the stored grid.
    pub fn alias_free_degree(&self) -> u32 {
        if self.n_max == 0 {
            return u32::MAX;
        }
        let d = (self.grid_size - 1) / self.n_max as usize;
        (d.saturating_sub(1)) as u32
    }
}

/// Complex Fourier coefficients of a function on `T^2` over a fixed lattice.
/// Value semantics: cloning copies the coefficients, the lattice is shared.
#[derive(Debug, Clone)]
pub struct SpectralField {
    lattice: Arc<FrequencyLattice>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(lattice: &Arc<FrequencyLattice>) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    pub fn from_coeffs(lattice: &Arc<FrequencyLattice>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(CoreError::LatticeMismatch(format!(
                "coefficient count {} does not match lattice mode count {}",
                coeffs.len(),
                lattice.len()
            )));
        }
        Ok(Self {
            lattice: Arc::clone(lattice),
            coeffs,
        })
    }

    /// Field with a single excited mode.
    pub fn single_mode(lattice: &Arc<FrequencyLattice>, k: (i32, i32), value: Complex64) -> Self {
        let mut f = Self::zero(lattice);
        f.set(k, value);
        f
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, k: (i32, i32)) -> Complex64 {
        self.lattice
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, k: (i32, i32), value: Complex64) {
        if let Some(i) = self.lattice.index_of(k) {
            self.coeffs[i] = value;
        }
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice == other.lattice
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Projection onto another lattice: common modes are copied, the rest is
    /// dropped or zero-filled. With a smaller target this is the Galerkin
    /// projector `Pi_N`.
    pub fn project_to(&self, target: &Arc<FrequencyLattice>) -> Self {
        let mut out = Self::zero(target);
        for (i, &k) in target.modes().iter().enumerate() {
            out.coeffs[i] = self.get(k);
        }
        out
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert!(self.same_lattice(other));
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.same_lattice(other));
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a - b)
            .collect();
        Self {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        }
    }

    /// Applies a radial Fourier multiplier `m(k)`.
    pub fn multiplier<F: Fn((i32, i32)) -> Complex64>(&self, m: F) -> Self {
        let coeffs = self
            .lattice
            .modes()
            .iter()
            .zip(self.coeffs.iter())
            .map(|(&k, &c)| m(k) * c)
            .collect();
        Self {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        }
    }

    /// True when coefficients satisfy `f_hat(-k) = conj(f_hat(k))` within
    /// `tol`, i.e. the physical field is real-valued.
    pub fn is_conj_symmetric(&self, tol: f64) -> bool {
        self.lattice.modes().iter().enumerate().all(|(i, &(a, b))| {
            let j = self
                .lattice
                .index_of((-a, -b))
                .expect("lattice is symmetric");
            (self.coeffs[i] - self.coeffs[j].conj()).norm() <= tol
        })
    }
}

/// Phase-space point `(psi, phi)` of the second-order system, with the
/// convention `phi = eps * d_t psi`.
#[derive(Debug, Clone)]
pub struct PairState {
    pub psi: SpectralField,
    pub phi: SpectralField,
}

impl PairState {
    pub fn new(psi: SpectralField, phi: SpectralField) -> Result<Self> {
        if !psi.same_lattice(&phi) {
            return Err(CoreError::LatticeMismatch(
                "pair components live on different lattices".into(),
            ));
        }
        Ok(Self { psi, phi })
    }

    pub fn zero(lattice: &Arc<FrequencyLattice>) -> Self {
        Self {
            psi: SpectralField::zero(lattice),
            phi: SpectralField::zero(lattice),
        }
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        self.psi.lattice()
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.phi.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.psi.max_abs().max(self.phi.max_abs())
    }

    /// Energy-space norm `(|psi|_{H^sigma}^2 + |phi|_{H^{sigma-1}}^2)^{1/2}`.
    pub fn pair_norm(&self, sigma: f64) -> f64 {
        let a = sobolev_norm(&self.psi, sigma);
        let b = sobolev_norm(&self.phi, sigma - 1.0);
        (a * a + b * b).sqrt()
    }
}

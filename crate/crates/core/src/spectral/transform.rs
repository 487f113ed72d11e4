//! Forward/inverse Fourier transforms between spectral coefficients and
//! uniform physical grids.
//!
//! The inverse transform realizes `f(x) = sum_k f_hat(k) (2 pi)^{-1} e^{i k.x}`
//! on the `M x M` grid `x_{ij} = 2 pi (i, j) / M`; the forward transform is the
//! trapezoidal quadrature of `<f, e_k>`, exact for band-limited data whenever
//! `M >= 2 N + 2`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::CoreError;
use crate::Result;

use super::{FrequencyLattice, SpectralField};

/// Complex values on the uniform `size x size` grid, row-major with index
/// `i * size + j` at the point `x = 2 pi (i, j) / size`.
#[derive(Debug, Clone)]
pub struct PhysicalGrid {
    size: usize,
    values: Vec<Complex64>,
}

impl PhysicalGrid {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            values: vec![Complex64::default(); size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Quadrature `L^2` norm: `((2 pi / M)^2 sum |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let cell = (2.0 * PI / self.size as f64).powi(2);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// Quadrature of `f` over the torus: `(2 pi / M)^2 sum f`.
    pub fn integral(&self) -> Complex64 {
        let cell = (2.0 * PI / self.size as f64).powi(2);
        self.values.iter().sum::<Complex64>() * cell
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft2(values: &mut [Complex64], size: usize, forward: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(size)
        } else {
            p.plan_fft_inverse(size)
        }
    });
    // rows
    fft.process(values);
    // columns via transpose, rows, transpose back
    transpose(values, size);
    fft.process(values);
    transpose(values, size);
}

fn transpose(values: &mut [Complex64], size: usize) {
    for i in 0..size {
        for j in (i + 1)..size {
            values.swap(i * size + j, j * size + i);
        }
    }
}

/// Inverse transform onto the lattice's own grid.
pub fn to_physical(f: &SpectralField) -> PhysicalGrid {
    to_physical_on(f, f.lattice().grid_size())
}

/// Inverse transform onto an explicit grid (e.g. oversampled or zero-padded
/// for dealiased products). Requires `size >= 2 N + 2`.
pub fn to_physical_on(f: &SpectralField, size: usize) -> PhysicalGrid {
    let n = f.lattice().n_max() as usize;
    assert!(size >= 2 * n + 2, "grid {size} cannot resolve modes up to {n}");
    let mut grid = PhysicalGrid::zeros(size);
    let scale = 1.0 / (2.0 * PI);
    let m = size as i64;
    for (&(k1, k2), &c) in f.lattice().modes().iter().zip(f.coeffs()) {
        let r1 = (k1 as i64).rem_euclid(m) as usize;
        let r2 = (k2 as i64).rem_euclid(m) as usize;
        grid.values[r1 * size + r2] += c * scale;
    }
    fft2(&mut grid.values, size, false);
    grid
}

/// Forward transform: trapezoidal Fourier coefficients of grid data over the
/// target lattice. Rejects grids that cannot resolve the lattice.
pub fn to_spectral(grid: &PhysicalGrid, lattice: &Arc<FrequencyLattice>) -> Result<SpectralField> {
    let n = lattice.n_max() as usize;
    let required = 2 * n + 2;
    if grid.size < required {
        return Err(CoreError::GridTooSmall {
            required,
            actual: grid.size,
        });
    }
    let size = grid.size;
    let mut work = grid.values.clone();
    fft2(&mut work, size, true);
    let scale = 2.0 * PI / (size as f64 * size as f64);
    let m = size as i64;
    let coeffs = lattice
        .modes()
        .iter()
        .map(|&(k1, k2)| {
            let r1 = (k1 as i64).rem_euclid(m) as usize;
            let r2 = (k2 as i64).rem_euclid(m) as usize;
            work[r1 * size + r2] * scale
        })
        .collect();
    SpectralField::from_coeffs(lattice, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct `O(modes * M^2)` evaluation of the inverse transform, kept
    /// independent of the FFT path.
    pub fn dense_to_physical(f: &SpectralField, size: usize) -> PhysicalGrid {
        let mut grid = PhysicalGrid::zeros(size);
        let scale = 1.0 / (2.0 * PI);
        for i in 0..size {
            for j in 0..size {
                let x1 = 2.0 * PI * i as f64 / size as f64;
                let x2 = 2.0 * PI * j as f64 / size as f64;
                let mut acc = Complex64::default();
                for (&(k1, k2), &c) in f.lattice().modes().iter().zip(f.coeffs()) {
                    let phase = k1 as f64 * x1 + k2 as f64 * x2;
                    acc += c * Complex64::new(phase.cos(), phase.sin());
                }
                grid.values[i * size + j] = acc * scale;
            }
        }
        grid
    }

    fn test_field() -> SpectralField {
        let lat = FrequencyLattice::linear(3);
        let mut f = SpectralField::zero(&lat);
        // deterministic pseudo-random coefficients
        for (i, &(k1, k2)) in lat.modes().to_vec().iter().enumerate() {
            let re = ((i as f64) * 0.37 + k1 as f64).sin();
            let im = ((i as f64) * 0.11 - k2 as f64).cos();
            f.set((k1, k2), Complex64::new(re, im));
        }
        f
    }

    #[test]
    fn constant_mode_gives_constant_field() {
        let lat = FrequencyLattice::linear(2);
        let f = SpectralField::single_mode(&lat, (0, 0), Complex64::new(1.0, 0.0));
        let grid = to_physical(&f);
        let expected = 1.0 / (2.0 * PI);
        for v in grid.values() {
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_is_plane_wave() {
        let lat = FrequencyLattice::linear(2);
        let f = SpectralField::single_mode(&lat, (1, 0), Complex64::new(1.0, 0.0));
        let grid = to_physical(&f);
        let m = grid.size();
        for i in 0..m {
            for j in 0..m {
                let x1 = 2.0 * PI * i as f64 / m as f64;
                let expected = Complex64::new(x1.cos(), x1.sin()) / (2.0 * PI);
                assert!((grid.values()[i * m + j] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fft_matches_dense_dft_oracle() {
        let f = test_field();
        let fast = to_physical(&f);
        let dense = dense_to_physical(&f, f.lattice().grid_size());
        let diff = fast
            .values()
            .iter()
            .zip(dense.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "fft vs dense dft deviation {diff:e}");
    }

    #[test]
    fn round_trip_identity_on_band_limited_data() {
        let f = test_field();
        let grid = to_physical(&f);
        let g = to_spectral(&grid, f.lattice()).unwrap();
        let diff = f.sub(&g).max_abs();
        assert!(diff < 1e-12, "round-trip deviation {diff:e}");
    }

    #[test]
    fn round_trip_survives_oversampling() {
        let f = test_field();
        let grid = to_physical_on(&f, 31); // odd, oversampled
        let g = to_spectral(&grid, f.lattice()).unwrap();
        assert!(f.sub(&g).max_abs() < 1e-12);
    }

    #[test]
    fn parseval_on_grid_quadrature() {
        let f = test_field();
        let grid = to_physical(&f);
        let l2_grid = grid.l2_norm();
        let l2_coeff = f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((l2_grid - l2_coeff).abs() < 1e-10);
    }

    #[test]
    fn undersized_grid_rejected() {
        let lat = FrequencyLattice::linear(4);
        let grid = PhysicalGrid::zeros(8);
        assert!(matches!(
            to_spectral(&grid, &lat),
            Err(CoreError::GridTooSmall { .. })
        ));
    }
}

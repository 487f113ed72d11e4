//! Complex Hermite polynomials, the renormalization constant, and Wick powers
//! of spectral fields.
//!
//! `H_{m,n}(z; sigma)` is defined by the generating function
//! `exp(t conj(z) + conj(t) z - sigma t conj(t)) = sum conj(t)^m t^n / (m! n!) H_{m,n}(z; sigma)`
//! and evaluated here in closed form
//!
//! ```text
//!     H_{m,n}(z; sigma) = sum_{j=0}^{m /\ n} (-sigma)^j j! C(m,j) C(n,j) z^{m-j} conj(z)^{n-j},
//! ```
//!
//! exact for the small degrees in scope. Differentiation lowers the degree
//! with a combinatorial factor, `d/d(conj z) H_{m,n} = n H_{m,n-1}` (visible
//! already on `H_{1,2}`), and conjugation swaps the indices.
//!
//! The Wick power `:z^m conj(z)^n:` of a truncated field is the pointwise
//! Hermite polynomial of the physical-space samples with the truncation
//! variance `C_N = sum_{|k| <= N} 2 / (1 + |k|^2)` as the renormalization
//! parameter, transformed back to coefficients on an alias-free grid.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::noise::{slots, NoiseStream};
use crate::spectral::transform::{to_physical_on, to_spectral, PhysicalGrid};
use crate::spectral::{FrequencyLattice, SpectralField};
use crate::Result;

type C = Complex64;

/// Renormalization constant of the truncation: exact lattice sum
/// `C_N = sum_{|k| <= N} 2 / (1 + |k|^2)`; strictly increasing, `~ log N`.
pub fn c_n(n_max: u32) -> f64 {
    let n = n_max as i64;
    let mut total = 0.0;
    for k1 in -n..=n {
        for k2 in -n..=n {
            let r2 = k1 * k1 + k2 * k2;
            if r2 <= n * n {
                total += 2.0 / (1.0 + r2 as f64);
            }
        }
    }
    total
}

/// Pointwise variance of the stationary truncated field,
/// `E |Pi_N Z(t, x)|^2 = C_N / (2 pi)^2` under the orthonormal basis
/// `e_k = (2 pi)^{-1} e^{ikx}`. This is the parameter that renormalizes
/// pointwise Hermite evaluations of physical-space samples; using the bare
/// lattice sum there would over-subtract by the basis normalization and the
/// Wick powers would no longer be Cauchy in the truncation.
pub fn pointwise_variance(n_max: u32) -> f64 {
    c_n(n_max) / (2.0 * std::f64::consts::PI).powi(2)
}

/// Parameters of one complex Hermite polynomial.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HermiteSpec {
    pub m: u32,
    pub n: u32,
    pub sigma: f64,
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc as f64
}

/// Closed-form evaluation of `H_{m,n}(z; sigma)`.
pub fn hermite_eval(m: u32, n: u32, sigma: f64, z: C) -> C {
    let zb = z.conj();
    let mut acc = C::default();
    let mut sigma_pow = 1.0; // (-sigma)^j
    for j in 0..=m.min(n) {
        let coeff = sigma_pow * factorial(j) * binomial(m, j) * binomial(n, j);
        acc += coeff * z.powu(m - j) * zb.powu(n - j);
        sigma_pow *= -sigma;
    }
    acc
}

/// `|H_{m,n}(z + w) - sum C(m,m') C(n,n') w^{m-m'} conj(w)^{n-n'} H_{m',n'}(z)|`:
/// the translation identity holds exactly, so this is rounding-level.
pub fn hermite_translation_residual(m: u32, n: u32, sigma: f64, z: C, w: C) -> f64 {
    let lhs = hermite_eval(m, n, sigma, z + w);
    let mut rhs = C::default();
    for mp in 0..=m {
        for np in 0..=n {
            rhs += binomial(m, mp)
                * binomial(n, np)
                * w.powu(m - mp)
                * w.conj().powu(n - np)
                * hermite_eval(mp, np, sigma, z);
        }
    }
    (lhs - rhs).norm()
}

/// Residual of the Wirtinger lowering identity
/// `d/d(conj z) H_{m,n} = n H_{m,n-1}`, with the derivative taken by central
/// finite differences of step `h` in the `conj(z)` direction
/// (`d_zbar = (d_x + i d_y)/2`). Requires `n >= 1`.
pub fn hermite_wirtinger_residual(m: u32, n: u32, sigma: f64, z: C, h: f64) -> f64 {
    assert!(n >= 1);
    let fx = (hermite_eval(m, n, sigma, z + C::new(h, 0.0))
        - hermite_eval(m, n, sigma, z - C::new(h, 0.0)))
        / (2.0 * h);
    let fy = (hermite_eval(m, n, sigma, z + C::new(0.0, h))
        - hermite_eval(m, n, sigma, z - C::new(0.0, h)))
        / (2.0 * h);
    let dzbar = (fx + C::new(0.0, 1.0) * fy) * 0.5;
    (dzbar - n as f64 * hermite_eval(m, n - 1, sigma, z)).norm()
}

/// Monte-Carlo estimate of `E[H_{m,n}(X; sX) H_{k,l}(Y; sY)]` for jointly
/// circular complex Gaussians with `E[|X|^2] = sX`, `E[|Y|^2] = sY`,
/// `E[conj(X) Y] = cross`, against the closed form
/// `1_{m=l, n=k} m! n! cross^n conj(cross)^m`.
#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityEstimate {
    pub mean: C,
    /// Componentwise standard errors (re, im).
    pub se: (f64, f64),
    pub expected: C,
    pub samples: u64,
}

pub fn orthogonality_expected(m: u32, n: u32, k: u32, l: u32, cross: C) -> C {
    if m == l && n == k {
        factorial(m) * factorial(n) * cross.powu(n) * cross.conj().powu(m)
    } else {
        C::default()
    }
}

pub fn orthogonality_mc(
    m: u32,
    n: u32,
    k: u32,
    l: u32,
    sigma_x: f64,
    sigma_y: f64,
    cross: C,
    samples: u64,
    stream: &NoiseStream,
) -> Result<OrthogonalityEstimate> {
    if sigma_x <= 0.0 || sigma_y <= 0.0 || cross.norm_sqr() > sigma_x * sigma_y {
        return Err(CoreError::InvalidParams(format!(
            "infeasible covariance: |cross|^2 = {} > sX sY = {}",
            cross.norm_sqr(),
            sigma_x * sigma_y
        )));
    }
    let a = cross / sigma_x.sqrt();
    let b = (sigma_y - a.norm_sqr()).max(0.0).sqrt();
    let mut sum = C::default();
    let mut sum_re2 = 0.0;
    let mut sum_im2 = 0.0;
    for i in 0..samples {
        let e1 = stream.std_complex_normal(i, 0, slots::AUX);
        let e2 = stream.std_complex_normal(i, 1, slots::AUX);
        let x = sigma_x.sqrt() * e1;
        let y = a * e1 + b * e2;
        let v = hermite_eval(m, n, sigma_x, x) * hermite_eval(k, l, sigma_y, y);
        sum += v;
        sum_re2 += v.re * v.re;
        sum_im2 += v.im * v.im;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var_re = (sum_re2 / nf - mean.re * mean.re).max(0.0);
    let var_im = (sum_im2 / nf - mean.im * mean.im).max(0.0);
    Ok(OrthogonalityEstimate {
        mean,
        se: ((var_re / nf).sqrt(), (var_im / nf).sqrt()),
        expected: orthogonality_expected(m, n, k, l, cross),
        samples,
    })
}

fn product_alias_requirement(source_n: u32, degree: u32, target_n: u32) -> usize {
    let d = degree as usize * source_n as usize;
    d + d.min(target_n as usize) + 1
}

/// Wick power `:z^m conj(z)^n:` with renormalization constant `c`, computed
/// pointwise on the field's own grid and projected back to its lattice.
/// Rejects grids that would alias the degree-`(m+n)` product.
pub fn wick_power_field(z: &SpectralField, m: u32, n: u32, c: f64) -> Result<SpectralField> {
    wick_power_on(z, m, n, c, z.lattice())
}

/// Same, but with the result represented on `target` (e.g. an extended
/// lattice holding every product mode exactly).
pub fn wick_power_on(
    z: &SpectralField,
    m: u32,
    n: u32,
    c: f64,
    target: &Arc<FrequencyLattice>,
) -> Result<SpectralField> {
    let grid_size = target.grid_size().max(z.lattice().grid_size());
    let required = product_alias_requirement(z.lattice().n_max(), m + n, target.n_max());
    if grid_size < required {
        return Err(CoreError::GridTooSmall {
            required,
            actual: grid_size,
        });
    }
    let mut grid = to_physical_on(z, grid_size);
    for v in grid.values_mut() {
        *v = hermite_eval(m, n, c, *v);
    }
    to_spectral(&grid, target)
}

/// Wick powers `:Z^k conj(Z)^l:` for `k <= n+1`, `l <= n`, stored on an
/// extended lattice that represents every product mode exactly. Feeding these
/// into the binomial expansion reproduces the pointwise Hermite polynomial of
/// the sum without any intermediate truncation.
#[derive(Debug, Clone)]
pub struct WickTable {
    degree: u32,
    lattice: Arc<FrequencyLattice>,
    entries: BTreeMap<(u32, u32), SpectralField>,
}

impl WickTable {
    /// Builds the full table from a truncated field sample. `c` is the
    /// renormalization constant of the field's truncation.
    pub fn build(z: &SpectralField, degree: u32, c: f64) -> Result<Self> {
        let source_n = z.lattice().n_max();
        let ext_n = (2 * degree + 1) * source_n;
        let ext_grid = 2 * ext_n as usize + 2;
        let own_grid = z.lattice().grid_size();
        let lattice = FrequencyLattice::new(ext_n, ext_grid.max(own_grid))?;
        let mut entries = BTreeMap::new();
        for k in 0..=degree + 1 {
            for l in 0..=degree {
                entries.insert((k, l), wick_power_on(z, k, l, c, &lattice)?);
            }
        }
        Ok(Self {
            degree,
            lattice,
            entries,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn get(&self, k: u32, l: u32) -> Result<&SpectralField> {
        self.entries
            .get(&(k, l))
            .ok_or(CoreError::MissingWickEntry { m: k, n: l })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &SpectralField)> {
        self.entries.iter()
    }

    /// Table of the zero field: `(0,0) -> 1`, everything else zero. Turns the
    /// renormalized nonlinearity into the plain power `Pi_N(U^{n+1} conj(U)^n)`.
    pub fn trivial(degree: u32, source_n: u32) -> Self {
        let ext_n = (2 * degree + 1) * source_n;
        let lattice = FrequencyLattice::new(ext_n, 2 * ext_n as usize + 2).expect("valid grid");
        let mut entries = BTreeMap::new();
        for k in 0..=degree + 1 {
            for l in 0..=degree {
                let mut f = SpectralField::zero(&lattice);
                if k == 0 && l == 0 {
                    // the constant function 1 has coefficient 2 pi at k = 0
                    f.set((0, 0), C::new(2.0 * std::f64::consts::PI, 0.0));
                }
                entries.insert((k, l), f);
            }
        }
        Self {
            degree,
            lattice,
            entries,
        }
    }
}

/// Binomial expansion of the renormalized nonlinearity:
///
/// ```text
///   :(U+Z)^{n+1} conj(U+Z)^n: = sum_{k<=n+1, l<=n} C(n+1,k) C(n,l)
///                               U^{n+1-k} conj(U)^{n-l} :Z^k conj(Z)^l:,
/// ```
///
/// evaluated pseudo-spectrally on the table's grid and projected onto the
/// lattice of `U`.
pub fn renormalized_nonlinearity(
    u: &SpectralField,
    table: &WickTable,
    degree: u32,
) -> Result<SpectralField> {
    if degree != table.degree() {
        return Err(CoreError::InvalidParams(format!(
            "table was built for degree {}, requested {degree}",
            table.degree()
        )));
    }
    let n_u = u.lattice().n_max();
    let grid_size = table.lattice().grid_size();
    let required = product_alias_requirement(n_u, 2 * degree + 1, n_u);
    if grid_size < required {
        return Err(CoreError::GridTooSmall {
            required,
            actual: grid_size,
        });
    }
    let u_phys = to_physical_on(u, grid_size);
    let mut terms: Vec<(u32, u32, f64, PhysicalGrid)> = Vec::new();
    for k in 0..=degree + 1 {
        for l in 0..=degree {
            let w = table.get(k, l)?;
            let coeff = binomial(degree + 1, k) * binomial(degree, l);
            terms.push((k, l, coeff, to_physical_on(w, grid_size)));
        }
    }
    let mut acc = PhysicalGrid::zeros(grid_size);
    for (idx, out) in acc.values_mut().iter_mut().enumerate() {
        let uv = u_phys.values()[idx];
        let ub = uv.conj();
        let mut total = C::default();
        for (k, l, coeff, w) in &terms {
            total += *coeff * uv.powu(degree + 1 - k) * ub.powu(degree - l) * w.values()[idx];
        }
        *out = total;
    }
    to_spectral(&acc, u.lattice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sample_complex_normal;

    #[test]
    fn c_n_small_values() {
        assert!((c_n(0) - 2.0).abs() < 1e-14);
        assert!((c_n(1) - 6.0).abs() < 1e-14);
        assert!((c_n(2) - 154.0 / 15.0).abs() < 1e-12);
        // strictly increasing
        let mut prev = 0.0;
        for n in 0..=16 {
            let v = c_n(n);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn hermite_low_order_table() {
        let z = C::new(1.3, -0.4);
        let s = 0.7;
        assert_eq!(hermite_eval(0, 0, s, z), C::new(1.0, 0.0));
        assert!((hermite_eval(1, 0, s, z) - z).norm() < 1e-15);
        assert!((hermite_eval(2, 0, s, z) - z * z).norm() < 1e-15);
        assert!((hermite_eval(1, 1, s, z) - (z * z.conj() - s)).norm() < 1e-15);
        assert!((hermite_eval(2, 1, s, z) - (z * z * z.conj() - 2.0 * s * z)).norm() < 1e-14);
        assert!((hermite_eval(3, 0, s, z) - z.powu(3)).norm() < 1e-14);
    }

    #[test]
    fn hermite_examples() {
        // H_{1,1}(2; 1) = |2|^2 - 1 = 3
        assert!((hermite_eval(1, 1, 1.0, C::new(2.0, 0.0)) - C::new(3.0, 0.0)).norm() < 1e-14);
        // H_{2,1}(1+i; 1) = z^2 zbar - 2 z = 0
        assert!(hermite_eval(2, 1, 1.0, C::new(1.0, 1.0)).norm() < 1e-14);
        // H_{m,m}(0; sigma) = m! (-sigma)^m
        for m in 0..5u32 {
            let v = hermite_eval(m, m, 0.9, C::default());
            let expect = factorial(m) * (-0.9f64).powi(m as i32);
            assert!((v - C::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermite_conjugation_symmetry() {
        for (i, &(m, n)) in [(0u32, 1u32), (1, 1), (2, 1), (3, 2), (2, 4)].iter().enumerate() {
            let z = C::new(0.3 + i as f64 * 0.7, -1.1 + i as f64 * 0.2);
            let a = hermite_eval(m, n, 1.3, z);
            let b = hermite_eval(n, m, 1.3, z).conj();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn generating_function_partial_sum() {
        let z = C::new(0.8, -0.5);
        let sigma = 1.1;
        for &t in &[C::new(0.3, 0.0), C::new(0.1, -0.25), C::new(-0.2, 0.2)] {
            let lhs = (t * z.conj() + t.conj() * z - sigma * t * t.conj()).exp();
            let mut rhs = C::default();
            for m in 0..=8u32 {
                for n in 0..=8u32 {
                    rhs += t.conj().powu(m) * t.powu(n) / (factorial(m) * factorial(n))
                        * hermite_eval(m, n, sigma, z);
                }
            }
            assert!((lhs - rhs).norm() < 1e-8, "t = {t}: {:e}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn translation_identity() {
        // w = 0 is exact
        assert_eq!(
            hermite_translation_residual(3, 2, 1.4, C::new(0.2, 0.7), C::default()),
            0.0
        );
        // random points, low degrees
        for i in 0..20 {
            let z = C::new((i as f64 * 0.37).sin(), (i as f64 * 0.61).cos());
            let w = C::new((i as f64 * 1.3).cos() * 0.8, (i as f64 * 0.23).sin() * 0.5);
            for &(m, n) in &[(1u32, 1u32), (2, 1), (3, 2)] {
                let r = hermite_translation_residual(m, n, 0.9, z, w);
                assert!(r < 1e-12, "residual {r:e} at ({m},{n})");
            }
        }
        // z = 0 reduces to the pure-power expansion against H_{m',n'}(0)
        let w = C::new(0.4, -0.9);
        assert!(hermite_translation_residual(2, 2, 1.7, C::default(), w) < 1e-12);
    }

    #[test]
    fn wirtinger_lowering() {
        let h = 1e-5;
        // paper-table cases, combinatorial factor invisible at n = 1
        assert!(hermite_wirtinger_residual(1, 1, 0.8, C::new(0.3, 0.4), h) < 1e-6);
        assert!(hermite_wirtinger_residual(2, 1, 0.8, C::new(-0.7, 0.2), h) < 1e-6);
        assert!(hermite_wirtinger_residual(0, 1, 0.8, C::new(1.0, -1.0), h) < 1e-6);
        // factor n visible at n = 2: d/d(zbar) H_{1,2} = 2 H_{1,1}
        assert!(hermite_wirtinger_residual(1, 2, 0.8, C::new(0.5, 0.1), h) < 1e-6);
        let z = C::new(0.5, 0.1);
        let wrong = {
            let fx = (hermite_eval(1, 2, 0.8, z + C::new(h, 0.0))
                - hermite_eval(1, 2, 0.8, z - C::new(h, 0.0)))
                / (2.0 * h);
            let fy = (hermite_eval(1, 2, 0.8, z + C::new(0.0, h))
                - hermite_eval(1, 2, 0.8, z - C::new(0.0, h)))
                / (2.0 * h);
            ((fx + C::new(0.0, 1.0) * fy) * 0.5 - hermite_eval(1, 1, 0.8, z)).norm()
        };
        assert!(wrong > 1e-2, "missing factor n would go unnoticed");
    }

    #[test]
    fn orthogonality_cross_term() {
        // (m,n) = (1,0), (k,l) = (0,1): E[X conj(Y)] = conj(rho) = rho for real rho
        let stream = NoiseStream::new(404);
        let rho = 0.6;
        let est = orthogonality_mc(1, 0, 0, 1, 1.0, 1.0, C::new(rho, 0.0), 100_000, &stream)
            .unwrap();
        assert!((est.expected - C::new(rho, 0.0)).norm() < 1e-14);
        assert!((est.mean.re - rho).abs() < 3.0 * est.se.0);
        assert!(est.mean.im.abs() < 3.0 * est.se.1.max(1e-8));
    }

    #[test]
    fn orthogonality_indicator_kills_mismatched_orders() {
        let stream = NoiseStream::new(405);
        let est = orthogonality_mc(
            1,
            1,
            2,
            0,
            1.0,
            1.0,
            C::new(0.4, 0.2),
            100_000,
            &stream,
        )
        .unwrap();
        assert_eq!(est.expected, C::default());
        assert!(est.mean.re.abs() < 3.0 * est.se.0);
        assert!(est.mean.im.abs() < 3.0 * est.se.1);
    }

    #[test]
    fn orthogonality_diagonal_is_sigma_squared() {
        let stream = NoiseStream::new(406);
        let sigma = 1.5;
        // X = Y: cross = sigma
        let est = orthogonality_mc(
            1,
            1,
            1,
            1,
            sigma,
            sigma,
            C::new(sigma, 0.0),
            100_000,
            &stream,
        )
        .unwrap();
        assert!((est.expected - C::new(sigma * sigma, 0.0)).norm() < 1e-12);
        assert!((est.mean.re - sigma * sigma).abs() < 3.0 * est.se.0);
    }

    #[test]
    fn orthogonality_complex_cross_orientation() {
        // complex cross-covariance distinguishes cross^n conj(cross)^m from
        // the swapped orientation
        let stream = NoiseStream::new(407);
        let cross = C::new(0.3, 0.45);
        let est = orthogonality_mc(1, 0, 0, 1, 1.0, 1.0, cross, 200_000, &stream).unwrap();
        // expected = conj(cross) for (m,n,k,l) = (1,0,0,1)
        assert!((est.expected - cross.conj()).norm() < 1e-14);
        assert!((est.mean - cross.conj()).norm() < 3.0 * (est.se.0 + est.se.1));
        let swapped = cross;
        assert!((est.mean - swapped).norm() > 6.0 * (est.se.0 + est.se.1));
    }

    #[test]
    fn orthogonality_rejects_infeasible_covariance() {
        let stream = NoiseStream::new(1);
        assert!(orthogonality_mc(1, 0, 0, 1, 1.0, 1.0, C::new(1.5, 0.0), 10, &stream).is_err());
    }

    // --- Wick powers of fields ---

    fn dense_product(
        f: &SpectralField,
        g: &SpectralField,
        target: &Arc<FrequencyLattice>,
    ) -> SpectralField {
        // (fg)_hat(k) = (2 pi)^{-1} sum_{k1 + k2 = k} f_hat(k1) g_hat(k2)
        let mut out = SpectralField::zero(target);
        for (i, &k) in target.modes().iter().enumerate() {
            let mut acc = C::default();
            for (&k1, &c1) in f.lattice().modes().iter().zip(f.coeffs()) {
                let k2 = (k.0 - k1.0, k.1 - k1.1);
                acc += c1 * g.get(k2);
            }
            out.coeffs_mut()[i] = acc / (2.0 * std::f64::consts::PI);
        }
        out
    }

    fn conj_field(f: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zero(f.lattice());
        for (i, &(a, b)) in f.lattice().modes().iter().enumerate() {
            out.coeffs_mut()[i] = f.get((-a, -b)).conj();
        }
        out
    }

    fn five_mode_field() -> SpectralField {
        let lat = FrequencyLattice::alias_free(2, 3);
        let mut z = SpectralField::zero(&lat);
        z.set((0, 0), C::new(0.4, -0.1));
        z.set((1, 0), C::new(-0.3, 0.2));
        z.set((0, 1), C::new(0.1, 0.5));
        z.set((-1, -1), C::new(0.25, 0.0));
        z.set((2, 0), C::new(0.0, -0.35));
        z
    }

    #[test]
    fn wick_identity_power_returns_field() {
        let z = five_mode_field();
        let w = wick_power_field(&z, 1, 0, 3.7).unwrap();
        assert!(w.sub(&z).max_abs() < 1e-12);
    }

    #[test]
    fn wick_h11_of_matched_constant_vanishes() {
        let lat = FrequencyLattice::alias_free(0, 2);
        let c: f64 = 2.0; // C_0
        // physical value with |value|^2 = c: coefficient = 2 pi value
        let value = C::new(c.sqrt(), 0.0);
        let z = SpectralField::single_mode(&lat, (0, 0), 2.0 * std::f64::consts::PI * value);
        let w = wick_power_field(&z, 1, 1, c).unwrap();
        assert!(w.max_abs() < 1e-12);
    }

    #[test]
    fn wick_h11_matches_dense_convolution_oracle() {
        let z = five_mode_field();
        let c = 0.8;
        let w = wick_power_field(&z, 1, 1, c).unwrap();
        // oracle: z * conj(z) - c, dense convolution, projected
        let mut oracle = dense_product(&z, &conj_field(&z), z.lattice());
        let k0 = oracle.lattice().index_of((0, 0)).unwrap();
        oracle.coeffs_mut()[k0] -= C::new(2.0 * std::f64::consts::PI * c, 0.0);
        assert!(w.sub(&oracle).max_abs() < 1e-10);
    }

    #[test]
    fn wick_with_zero_constant_is_plain_power() {
        let z = five_mode_field();
        let w = wick_power_field(&z, 2, 1, 0.0).unwrap();
        // exact degree-3 product: square on an extended lattice first so no
        // intermediate truncation sneaks in
        let big = FrequencyLattice::linear(4);
        let z2_big = dense_product(&z, &z, &big);
        let oracle = dense_product(&z2_big, &conj_field(&z), z.lattice());
        assert!(w.sub(&oracle).max_abs() < 1e-10);
    }

    #[test]
    fn wick_rejects_aliasing_grid() {
        let lat = FrequencyLattice::linear(4); // minimal grid, degree-1 only
        let mut z = SpectralField::zero(&lat);
        z.set((4, 0), C::new(1.0, 0.0));
        assert!(matches!(
            wick_power_field(&z, 2, 1, 1.0),
            Err(CoreError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn renormalized_nonlinearity_trivial_table_is_plain_cubic() {
        let u = five_mode_field();
        let table = WickTable::trivial(1, u.lattice().n_max());
        let f = renormalized_nonlinearity(&u, &table, 1).unwrap();
        // oracle: U^2 conj(U) built densely without intermediate truncation
        let big = FrequencyLattice::new(6, table.lattice().grid_size()).unwrap();
        let u2 = dense_product(&u, &u, &big);
        let oracle = dense_product(&u2, &conj_field(&u), u.lattice());
        assert!(f.sub(&oracle).max_abs() < 1e-10);
    }

    #[test]
    fn renormalized_nonlinearity_zero_u_returns_top_entry() {
        let z = five_mode_field();
        let c = 1.3;
        let table = WickTable::build(&z, 1, c).unwrap();
        let u = SpectralField::zero(z.lattice());
        let f = renormalized_nonlinearity(&u, &table, 1).unwrap();
        let top = table.get(2, 1).unwrap().project_to(u.lattice());
        assert!(f.sub(&top).max_abs() < 1e-10);
    }

    #[test]
    fn renormalized_nonlinearity_matches_pointwise_hermite_of_sum() {
        // the expansion must equal H_{n+1,n}(U + Z; c) at every grid point
        let z = five_mode_field();
        let mut u = SpectralField::zero(z.lattice());
        u.set((1, 0), C::new(0.2, 0.3));
        u.set((0, -1), C::new(-0.15, 0.05));
        let c = 0.9;
        let table = WickTable::build(&z, 1, c).unwrap();
        let f = renormalized_nonlinearity(&u, &table, 1).unwrap();

        // oracle: evaluate H_{2,1}(u+z; c) pointwise on the same grid and
        // project, entirely through the dense path
        let m = table.lattice().grid_size();
        let sum_grid = {
            let ug = to_physical_on(&u, m);
            let zg = to_physical_on(&z, m);
            let mut g = PhysicalGrid::zeros(m);
            for (i, v) in g.values_mut().iter_mut().enumerate() {
                *v = hermite_eval(2, 1, c, ug.values()[i] + zg.values()[i]);
            }
            g
        };
        let oracle = to_spectral(&sum_grid, u.lattice()).unwrap();
        assert!(f.sub(&oracle).max_abs() < 1e-10);
    }

    #[test]
    fn missing_table_entry_reported() {
        let z = five_mode_field();
        let table = WickTable::build(&z, 1, 1.0).unwrap();
        assert!(matches!(
            table.get(3, 3),
            Err(CoreError::MissingWickEntry { m: 3, n: 3 })
        ));
    }

    #[test]
    fn wick_moments_match_gaussian_theory() {
        // E[:|Z|^2:] = 0 and Var[H_{1,1}(Z; sigma)] = sigma^2 for Z ~ N_c(0, sigma)
        let stream = NoiseStream::new(31_337);
        let sigma = 1.9;
        let n = 100_000u64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let z = sample_complex_normal(sigma, &stream, i, 0, slots::AUX).unwrap();
            let h = hermite_eval(1, 1, sigma, z).re;
            s1 += h;
            s2 += h * h;
        }
        let nf = n as f64;
        let mean = s1 / nf;
        let var = s2 / nf - mean * mean;
        let se_mean = sigma / nf.sqrt();
        assert!(mean.abs() < 3.0 * se_mean);
        // Var[H] = sigma^2; fourth-moment fluctuations give SE ~ sigma^2 sqrt(8/n)
        assert!((var - sigma * sigma).abs() < 3.0 * sigma * sigma * (8.0 / nf).sqrt());
    }
}

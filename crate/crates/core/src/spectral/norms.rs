//! Norms computed in coefficient space: Sobolev `H^s`, dyadic Besov
//! `B^s_{q,2}` for `q in {2, inf}`, and a grid-sup proxy for `W^{-delta,inf}`.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::Result;

use super::transform::{to_physical, to_physical_on};
use super::SpectralField;

/// `|f|_{H^s} = (sum_k <k>^{2s} |f_hat(k)|^2)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.lattice()
        .modes()
        .iter()
        .zip(f.coeffs())
        .map(|(&(k1, k2), c)| {
            let w = 1.0 + (k1 as f64).powi(2) + (k2 as f64).powi(2);
            w.powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Lebesgue exponent of the inner norm in a Besov block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lq {
    Two,
    Inf,
}

// Smooth transition 0 -> 1 on [0, 1] built from exp(-1/t); C-infinity.
pub(crate) fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Low-pass bump: 1 on `r <= 3/4`, 0 on `r >= 4/3`, smooth in between.
fn lp_low(r: f64) -> f64 {
    1.0 - smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Dyadic bump `chi_j`. `chi_{-1}` is the low-pass block; for `j >= 0` the
/// telescoping difference supported on `3/4 * 2^j <= r <= 8/3 * 2^j`.
/// By construction `sum_{j >= -1} chi_j = 1` pointwise.
pub fn dyadic_bump(j: i32, r: f64) -> f64 {
    if j == -1 {
        lp_low(r)
    } else {
        let p = 2f64.powi(j);
        lp_low(r / (2.0 * p)) - lp_low(r / p)
    }
}

fn block(f: &SpectralField, j: i32) -> SpectralField {
    f.multiplier(|(k1, k2)| {
        let r = ((k1 as f64).powi(2) + (k2 as f64).powi(2)).sqrt();
        Complex64::new(dyadic_bump(j, r), 0.0)
    })
}

fn max_block_index(f: &SpectralField) -> i32 {
    let n = f.lattice().n_max() as f64 * std::f64::consts::SQRT_2;
    let mut j = 0;
    while 0.75 * 2f64.powi(j) <= n {
        j += 1;
    }
    j
}

/// `|f|_{B^s_{q,2}} = (sum_{j >= -1} (2^{js} |Delta_j f|_{L^q})^2)^{1/2}`.
///
/// Only the diagnostic cases `q in {2, inf}`, `r = 2` are supported; anything
/// else is rejected. The `L^inf` block norm is evaluated as a grid sup.
pub fn besov_norm(f: &SpectralField, s: f64, q: Lq, r: u32) -> Result<f64> {
    if r != 2 {
        return Err(CoreError::Unsupported(format!(
            "Besov summability r = {r}; only r = 2 is implemented"
        )));
    }
    let mut total = 0.0;
    for j in -1..=max_block_index(f) {
        let bj = block(f, j);
        let bn = match q {
            Lq::Two => bj.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Lq::Inf => to_physical(&bj).sup_abs(),
        };
        let term = 2f64.powi(j).powf(s) * bn;
        total += term * term;
    }
    Ok(total.sqrt())
}

/// Grid-sup proxy for `|f|_{W^{-delta,inf}}`: smooth by `<nabla>^{-delta}` in
/// coefficient space, transform, and take the sup over the lattice grid.
pub fn neg_holder_proxy(f: &SpectralField, delta: f64) -> f64 {
    neg_holder_proxy_on(f, delta, f.lattice().grid_size())
}

/// Same proxy with an explicit evaluation grid (the refinement knob; the sup
/// over the continuum is approached from below as the grid refines).
pub fn neg_holder_proxy_on(f: &SpectralField, delta: f64, grid_size: usize) -> f64 {
    assert!(delta >= 0.0, "negative-order smoothing requires delta >= 0");
    let smoothed = f.multiplier(|(k1, k2)| {
        let w = 1.0 + (k1 as f64).powi(2) + (k2 as f64).powi(2);
        Complex64::new(w.powf(-delta / 2.0), 0.0)
    });
    to_physical_on(&smoothed, grid_size).sup_abs()
}

//! Propagator symbols: the principal branch square root, the dispersion roots
//! `lambda^{+-}`, the exponential-shift parameter `beta`, and numerical probes
//! of the elementary bounds that control every constant in the solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// Model parameters of the damped Klein-Gordon system
/// `eps^2 d_t^2 u + 2 alpha d_t u + (1 - Lap) u = ...` with nonlinearity
/// degree `n` (the Wick power is `psi^{n+1} conj(psi)^n`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    /// Inverse light speed, in `(0, 1]`.
    pub eps: f64,
    /// Complex damping, `Re(alpha) > 0`.
    pub alpha: Complex64,
    /// Nonlinearity degree `n >= 1`.
    pub degree: u32,
    /// Galerkin truncation radius.
    pub n_max: u32,
    /// Time horizon `T > 0`.
    pub horizon: f64,
}

impl ModelParams {
    pub fn new(eps: f64, alpha: Complex64, degree: u32, n_max: u32, horizon: f64) -> Result<Self> {
        let p = Self {
            eps,
            alpha,
            degree,
            n_max,
            horizon,
        };
        let violations = p.violations();
        if violations.is_empty() {
            Ok(p)
        } else {
            Err(CoreError::InvalidParams(violations.join("; ")))
        }
    }

    /// All constraint violations, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            v.push(format!("eps must lie in (0, 1], got {}", self.eps));
        }
        if !(self.alpha.re > 0.0) {
            v.push(format!("Re(alpha) must be positive, got {}", self.alpha.re));
        }
        if self.degree < 1 {
            v.push("nonlinearity degree n must be >= 1".into());
        }
        if !(self.horizon > 0.0) {
            v.push(format!("horizon T must be positive, got {}", self.horizon));
        }
        v
    }

    pub fn has_complex_damping(&self) -> bool {
        self.alpha.im != 0.0
    }

    /// `<k>^2` at a mode.
    pub fn bracket_sq(k: (i32, i32)) -> f64 {
        1.0 + (k.0 as f64).powi(2) + (k.1 as f64).powi(2)
    }
}

/// Principal square root with the branch cut convention
/// `sqrt(e^{i theta}) = e^{i theta / 2}`, `theta in (-pi, pi]`:
/// `Re >= 0` always, and negative reals map to the positive imaginary axis.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re < 0.0 {
        // force theta = +pi regardless of the sign bit of the zero
        Complex64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

/// Roots of `eps^2 lambda^2 + 2 alpha lambda + s = 0` at `s = <k>^2`:
/// `lambda^{+-} = (-alpha +- sqrt(alpha^2 - eps^2 <k>^2)) / eps^2`.
pub fn lambda_pm(p: &ModelParams, k: (i32, i32)) -> (Complex64, Complex64) {
    lambda_pm_at(p.eps, p.alpha, ModelParams::bracket_sq(k))
}

pub fn lambda_pm_at(eps: f64, alpha: Complex64, ksq: f64) -> (Complex64, Complex64) {
    let eps2 = eps * eps;
    let root = branch_sqrt(alpha * alpha - eps2 * ksq);
    // rationalized: (-alpha + root)/eps^2 = -ksq / (alpha + root); avoids the
    // cancellation when eps^2 ksq << |alpha|^2 (Re(alpha) > 0 and
    // Re(root) >= 0 keep the denominator away from zero)
    (-ksq / (alpha + root), (-alpha - root) / eps2)
}

/// Exponential shift `beta = (alpha - sqrt(alpha^2 - eps^2)) / eps^2` used by
/// the massless transform `v = e^{beta t} u`. Asserts `Re(beta) >= 0` and
/// `|eps beta| <= eps / Re(alpha)`.
pub fn beta_shift(p: &ModelParams) -> Complex64 {
    let eps2 = p.eps * p.eps;
    let beta = (p.alpha - branch_sqrt(p.alpha * p.alpha - eps2)) / eps2;
    debug_assert!(beta.re >= -1e-12, "Re(beta) = {} < 0", beta.re);
    debug_assert!(
        (p.eps * beta).norm() <= p.eps / p.alpha.re + 1e-9,
        "|eps beta| bound violated"
    );
    beta
}

/// Outcome of probing one of the five elementary symbol bounds over a grid in
/// `s`. `worst_margin >= 0` means the bound held everywhere; `argmin_s` is the
/// grid point attaining the worst margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundProbeItem {
    pub item: u8,
    pub grid_size: usize,
    pub pass: bool,
    pub worst_margin: f64,
    pub argmin_s: f64,
}

fn probe<F: Fn(f64) -> f64>(item: u8, s_grid: &[f64], margin: F) -> BoundProbeItem {
    let mut worst = f64::INFINITY;
    let mut arg = f64::NAN;
    for &s in s_grid {
        let m = margin(s);
        if m < worst {
            worst = m;
            arg = s;
        }
    }
    BoundProbeItem {
        item,
        grid_size: s_grid.len(),
        pass: worst >= 0.0,
        worst_margin: worst,
        argmin_s: arg,
    }
}

/// Evaluates the five bounds on `sqrt(alpha^2 - s)` over `s_grid` and reports
/// the worst margin per item:
///
/// 1. `0 < Re sqrt(alpha^2 - s) <= Re(alpha)`, strictly decreasing in `s`;
/// 2. `|sqrt(alpha^2 - s)| >= sqrt(2 |Re(alpha) Im(alpha)|)`;
/// 3. `Re(-alpha + sqrt(alpha^2 - s)) <= -C_alpha (s /\ 1)` with
///    `C_alpha = Re(alpha) / (2 |alpha|^2 + 1)`;
/// 4. `|sqrt(s) / sqrt(alpha^2 - s)| <= sqrt(1 + |alpha|^2 / (2 |Re Im|))`;
/// 5. the two asymptotic expansions with remainder constants 8 and 6:
///    `sqrt(alpha^2 - s) = alpha - s/(2 alpha) + h`, `|h| <= 8 s^2 / |alpha|^3`
///    for `s < |alpha|^2 / 2`, and `sqrt(alpha^2 - s) = i sqrt(s) + g`,
///    `|g| <= 6 |alpha|^2 / sqrt(s)` for `s > 2 |alpha|^2`
///    (wave regime stated for `Im(alpha) > 0`).
pub fn probe_base_bounds(alpha: Complex64, s_grid: &[f64]) -> Vec<BoundProbeItem> {
    assert!(alpha.re > 0.0, "probe requires Re(alpha) > 0");
    let root = |s: f64| branch_sqrt(alpha * alpha - s);
    let mut items = Vec::with_capacity(5);

    // (1) 0 < Re sqrt <= Re alpha, strictly decreasing.
    let item1 = {
        let mut worst = f64::INFINITY;
        let mut arg = f64::NAN;
        let mut prev: Option<(f64, f64)> = None;
        for &s in s_grid {
            let re = root(s).re;
            let m = re.min(alpha.re - re);
            if m < worst {
                worst = m;
                arg = s;
            }
            if let Some((ps, pre)) = prev {
                if s > ps && re >= pre {
                    worst = worst.min(pre - re); // non-decrease shows up as <= 0
                    arg = s;
                }
            }
            prev = Some((s, re));
        }
        BoundProbeItem {
            item: 1,
            grid_size: s_grid.len(),
            pass: worst > 0.0,
            worst_margin: worst,
            argmin_s: arg,
        }
    };
    items.push(item1);

    let floor = (2.0 * (alpha.re * alpha.im).abs()).sqrt();
    items.push(probe(2, s_grid, |s| root(s).norm() - floor));

    let c_alpha = alpha.re / (2.0 * alpha.norm_sqr() + 1.0);
    items.push(probe(3, s_grid, |s| {
        -c_alpha * s.min(1.0) - (-alpha + root(s)).re
    }));

    let ratio_bound = if alpha.im == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + alpha.norm_sqr() / (2.0 * (alpha.re * alpha.im).abs())).sqrt()
    };
    items.push(probe(4, s_grid, |s| {
        ratio_bound - (s.sqrt() / root(s).norm())
    }));

    let asq = alpha.norm_sqr();
    items.push(probe(5, s_grid, |s| {
        if s < asq / 2.0 {
            let h = root(s) - (alpha - s / (2.0 * alpha));
            8.0 * s * s / asq.powf(1.5) - h.norm()
        } else if s > 2.0 * asq {
            let g = root(s) - Complex64::new(0.0, s.sqrt());
            6.0 * asq / s.sqrt() - g.norm()
        } else {
            f64::INFINITY // between the regimes neither expansion applies
        }
    }));

    items
}

/// Log-spaced grid, inclusive of both endpoints.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

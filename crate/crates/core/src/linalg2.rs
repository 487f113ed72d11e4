//! Tiny dense complex 2x2 helpers for the per-mode phase-space propagators.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::symbols::branch_sqrt;
use crate::Result;

pub type C = Complex64;
pub type Vec2 = [C; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[C::default(); 2]; 2])
    }

    pub fn identity() -> Self {
        let one = C::new(1.0, 0.0);
        Mat2([[one, C::default()], [C::default(), one]])
    }

    pub fn diag(a: C, b: C) -> Self {
        Mat2([[a, C::default()], [C::default(), b]])
    }

    pub fn trace(&self) -> C {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[C::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    pub fn mulvec(&self, v: &Vec2) -> Vec2 {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: C) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] *= s;
            }
        }
        r
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return Err(CoreError::Numerical("singular 2x2 matrix".into()));
        }
        let inv = C::new(1.0, 0.0) / d;
        Ok(Mat2([
            [self.0[1][1] * inv, -self.0[0][1] * inv],
            [-self.0[1][0] * inv, self.0[0][0] * inv],
        ]))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `sinh(z)/z`, series expansion below `|z| = 1e-2` to avoid cancellation at
/// the branch point `z = 0`.
pub fn sinhc(z: C) -> C {
    if z.norm() < 1e-2 {
        let z2 = z * z;
        let mut term = C::new(1.0, 0.0);
        let mut acc = term;
        for k in 1..=4u32 {
            let d = (2 * k) as f64 * (2 * k + 1) as f64;
            term = term * z2 / d;
            acc += term;
        }
        acc
    } else {
        z.sinh() / z
    }
}

/// `exp(A t)` for 2x2 `A` via the trace-split closed form
/// `e^{mt} (cosh(qt) I + t sinhc(qt) (A - mI))`, `m = tr(A)/2`,
/// `q = sqrt(m^2 - det A)`. Uniformly valid through eigenvalue collisions.
/// For large `|qt|` the cosh/sinh pair is recombined into the bare
/// exponentials `e^{(m +- q)t}` so that stiff modes (`Re(m) t` very negative)
/// never produce `0 * inf`.
pub fn expm(a: &Mat2, t: f64) -> Mat2 {
    let m = a.trace() * 0.5;
    let q = branch_sqrt(m * m - a.det());
    let qt = q * t;
    let dev = a.sub(&Mat2::diag(m, m));
    let (c, s) = if qt.norm() < 1e-2 {
        let em = (m * t).exp();
        (em * qt.cosh(), em * sinhc(qt) * t)
    } else {
        let ep = ((m + q) * t).exp();
        let en = ((m - q) * t).exp();
        ((ep + en) * 0.5, (ep - en) / (2.0 * q))
    };
    Mat2::identity().scale(c).add(&dev.scale(s))
}

/// `Phi_1(t) = int_0^t exp(A s) ds = A^{-1} (exp(At) - I)` for invertible `A`.
pub fn phi1(a: &Mat2, exp_at: &Mat2) -> Result<Mat2> {
    Ok(a.inverse()?.mul(&exp_at.sub(&Mat2::identity())))
}

/// Lower Cholesky factor of a Hermitian PSD 2x2 matrix. Small negative
/// diagonals from rounding are clamped to zero; a genuinely indefinite input
/// is reported as an error.
pub fn cholesky(q: &Mat2) -> Result<Mat2> {
    let scale = q.max_abs().max(1e-300);
    let tol = 1e-10 * scale;
    let q11 = q.0[0][0].re;
    let q22 = q.0[1][1].re;
    if q11 < -tol || q22 < -tol || q.0[0][0].im.abs() > tol || q.0[1][1].im.abs() > tol {
        return Err(CoreError::CovarianceNotPsd {
            residual: q11.min(q22),
        });
    }
    let l11 = q11.max(0.0).sqrt();
    let l21 = if l11 > 0.0 {
        q.0[1][0] / l11
    } else {
        C::default()
    };
    let rem = q22 - l21.norm_sqr();
    if rem < -tol {
        return Err(CoreError::CovarianceNotPsd { residual: rem });
    }
    let l22 = rem.max(0.0).sqrt();
    Ok(Mat2([
        [C::new(l11, 0.0), C::default()],
        [l21, C::new(l22, 0.0)],
    ]))
}

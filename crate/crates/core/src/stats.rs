//! Small statistics toolbox: least-squares fits for log-log rate plots,
//! tie-aware Spearman rank correlation with a Student-t p-value, batch-means
//! standard errors, and self-normalized importance-sampling summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Ordinary least squares `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need >= 2 points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let slope_se = (ss_res / dof / sxx).sqrt();
    LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
    }
}

/// Fit of `ln y` against `ln x`; the slope is the empirical power-law rate.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(&lx, &ly)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// One-sided p-value for the alternative `rho < 0`.
    pub p_negative: f64,
    /// One-sided p-value for the alternative `rho > 0`.
    pub p_positive: f64,
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Spearman {
    assert!(xs.len() == ys.len() && xs.len() >= 3, "need >= 3 points");
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let fit = line_fit(&rx, &ry);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let sxx: f64 = rx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = rx.iter().zip(&ry).map(|(x, y)| (x - mx) * (y - my)).sum();
    let _ = fit;
    let rho = if sxx > 0.0 && syy > 0.0 {
        sxy / (sxx * syy).sqrt()
    } else {
        0.0
    };
    // t-approximation for the null distribution
    let dof = n - 2.0;
    let (p_neg, p_pos) = if rho.abs() >= 1.0 {
        if rho > 0.0 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let t = rho * (dof / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).expect("valid dof");
        (dist.cdf(t), 1.0 - dist.cdf(t))
    };
    Spearman {
        rho,
        p_negative: p_neg,
        p_positive: p_pos,
    }
}

/// Standard error of the mean of a correlated series via batch means.
pub fn batch_means_se(series: &[f64], batches: usize) -> f64 {
    assert!(batches >= 2 && series.len() >= 2 * batches);
    let bs = series.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * bs..(b + 1) * bs].iter().sum::<f64>() / bs as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (var / batches as f64).sqrt()
}

/// Mean and standard error of i.i.d. samples.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (m, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Self-normalized weighted mean with its delta-method standard error and the
/// effective sample size `(sum w)^2 / sum w^2`.
pub fn weighted_mean_se(values: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    assert_eq!(values.len(), weights.len());
    let wsum: f64 = weights.iter().sum();
    let w2sum: f64 = weights.iter().map(|w| w * w).sum();
    let mean = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * w)
        .sum::<f64>()
        / wsum;
    let var_num: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| (w * (v - mean)).powi(2))
        .sum();
    let se = var_num.sqrt() / wsum;
    let ess = wsum * wsum / w2sum;
    (mean, se, ess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let f = line_fit(&xs, &ys);
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept + 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-10);
    }

    #[test]
    fn log_log_fit_recovers_power_law() {
        let xs: Vec<f64> = (1..=7).map(|j| 2f64.powi(-j)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x.powf(1.5)).collect();
        let f = log_log_fit(&xs, &ys);
        assert!((f.slope - 1.5).abs() < 1e-10);
    }

    #[test]
    fn spearman_detects_monotone_decrease() {
        let xs = [2.0, 2.0, 2.0, 4.0, 4.0, 8.0];
        let ys = [0.9, 1.0, 0.95, 0.5, 0.55, 0.2];
        let s = spearman(&xs, &ys);
        assert!(s.rho < -0.8);
        assert!(s.p_negative < 0.01, "p = {}", s.p_negative);
    }

    #[test]
    fn spearman_flat_is_insignificant() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [0.5, 0.52, 0.49, 0.51, 0.5, 0.5];
        let s = spearman(&xs, &ys);
        assert!(s.p_negative > 0.05 && s.p_positive > 0.05);
    }

    #[test]
    fn weighted_mean_with_unit_weights_is_plain_mean() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let w = [1.0; 4];
        let (m, se, ess) = weighted_mean_se(&v, &w);
        let (pm, pse) = mean_se(&v);
        assert!((m - pm).abs() < 1e-14);
        assert!((ess - 4.0).abs() < 1e-12);
        // delta-method SE uses 1/n normalization instead of 1/(n-1)
        assert!((se - pse * (3.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn batch_means_tracks_iid_se() {
        // deterministic pseudo-random series
        let series: Vec<f64> = (0..4000)
            .map(|i| ((i as f64 * 12.9898).sin() * 43758.5453).fract())
            .collect();
        let se = batch_means_se(&series, 40);
        let (_, iid) = mean_se(&series);
        assert!(se < 3.0 * iid && se > iid / 3.0);
    }
}

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

/// Minimum sample size accepted by [`normality_score`].
pub const MIN_NORMALITY_SAMPLES: usize = 20;

/// 1% critical value of the adjusted Anderson-Darling statistic
/// `A*² = A²(1 + 0.75/n + 2.25/n²)` for normality with estimated mean and
/// variance.
pub const AD_CRITICAL_1PCT: f64 = 1.035;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityScores {
    /// Anderson-Darling `A²` of the studentized sample against N(0,1).
    pub ad: f64,
    /// Small-sample adjusted `A*²`, comparable to [`AD_CRITICAL_1PCT`].
    pub ad_adjusted: f64,
    /// Kolmogorov-Smirnov distance.
    pub ks: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    if xs.len() < 2 {
        return (xs.first().copied().unwrap_or(f64::NAN), f64::NAN);
    }
    (mean(xs), (variance(xs) / xs.len() as f64).sqrt())
}

/// Anderson-Darling, Kolmogorov-Smirnov, skewness and excess kurtosis of
/// the studentized sample.
pub fn normality_score(samples: &[f64]) -> Result<NormalityScores> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return domain(format!("normality scores need at least {MIN_NORMALITY_SAMPLES} samples, got {n}"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return domain("non-finite sample");
    }
    let m = mean(samples);
    let sd = variance(samples).sqrt();
    if !(sd > 0.0) || sd <= 1e-14 * m.abs() {
        return Err(Error::Numerical("degenerate variance: samples are constant".into()));
    }
    let mut z: Vec<f64> = samples.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let std_normal = Normal::standard();
    let nf = n as f64;

    let mut s = 0.0;
    for i in 0..n {
        let lower = std_normal.cdf(z[i]).ln();
        let upper = std_normal.cdf(-z[n - 1 - i]).ln();
        s += (2.0 * i as f64 + 1.0) * (lower + upper);
    }
    let ad = -nf - s / nf;
    let ad_adjusted = ad * (1.0 + 0.75 / nf + 2.25 / (nf * nf));

    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = std_normal.cdf(v);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);

    let zm = z.iter().sum::<f64>() / nf;
    let (m2, m3, m4) = z.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &v| {
        let dv = v - zm;
        (a + dv * dv / nf, b + dv * dv * dv / nf, c + dv * dv * dv * dv / nf)
    });
    Ok(NormalityScores { ad, ad_adjusted, ks, skewness: m3 / m2.powf(1.5), excess_kurtosis: m4 / (m2 * m2) - 3.0 })
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Wilson score interval for a binomial proportion, `z = 1.96`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wilson {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Wilson {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

pub fn wilson(successes: usize, trials: usize) -> Wilson {
    if trials == 0 {
        return Wilson { estimate: f64::NAN, lower: 0.0, upper: 1.0 };
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lower = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let upper = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Wilson { estimate: p, lower, upper }
}

/// Unbiased sample covariance matrix of the rows of `data` (replicates × coordinates).
pub fn covariance(data: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = data.len();
    let l = data.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..l).map(|j| data.iter().map(|row| row[j]).sum::<f64>() / r as f64).collect();
    let mut cov = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in i..l {
            let c = data.iter().map(|row| (row[i] - means[i]) * (row[j] - means[j])).sum::<f64>() / (r as f64 - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    cov
}

/// Jackknife standard error of the unbiased sample covariance of `(x, y)`.
pub fn jackknife_covariance_se(x: &[f64], y: &[f64]) -> f64 {
    let r = x.len();
    if r < 3 {
        return f64::NAN;
    }
    let rf = r as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let loo: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let (mx, my) = ((sx - a) / (rf - 1.0), (sy - b) / (rf - 1.0));
            (sxy - a * b - (rf - 1.0) * mx * my) / (rf - 2.0)
        })
        .collect();
    let m = mean(&loo);
    ((rf - 1.0) / rf * loo.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (matrix[i][j] + matrix[j][i])).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

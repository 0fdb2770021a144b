//! Kolmogorov–Smirnov distances with asymptotic p-values.

use serde::{Deserialize, Serialize};

use super::LawError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub distance: f64,
    pub p_value: f64,
    /// `n` for one sample, `nm/(n+m)` for two.
    pub n_eff: f64,
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi theta form converges fast for small x
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut s = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            s += (-odd * odd * c).exp();
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Critical distance at level `alpha`: `c_α / sqrt(n_eff)` with `P(K > c_α) = α`.
pub fn ks_threshold(n_eff: f64, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.1, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / n_eff.sqrt()
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample distance `sup |F_n - F|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, LawError> {
    if sample.is_empty() {
        return Err(LawError::EmptySample);
    }
    let xs = sorted(sample);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        distance: d,
        p_value: kolmogorov_sf(n.sqrt() * d),
        n_eff: n,
    })
}

/// Two-sample distance between empirical CDFs, ties handled jointly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, LawError> {
    if a.is_empty() || b.is_empty() {
        return Err(LawError::EmptySample);
    }
    let (xs, ys) = (sorted(a), sorted(b));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        distance: d,
        p_value: kolmogorov_sf(n_eff.sqrt() * d),
        n_eff,
    })
}

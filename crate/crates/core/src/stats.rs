//! Kolmogorov-Smirnov goodness-of-fit helpers and binomial confidence
//! intervals, used by the validation layer.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Asymptotic KS critical coefficient `c(alpha) = sqrt(ln(2/alpha)/2)`.
pub fn ks_critical_coefficient(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    ((2.0 / alpha).ln() / 2.0).sqrt()
}

/// Sup-distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty sample set"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    Ok(d)
}

/// One-sample KS test at significance `alpha` against a continuous CDF.
pub fn ks_test_one_sample<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    alpha: f64,
) -> Result<KsOutcome> {
    let statistic = ks_statistic(samples, cdf)?;
    let critical = ks_critical_coefficient(alpha) / (samples.len() as f64).sqrt();
    Ok(KsOutcome {
        statistic,
        critical,
        pass: statistic < critical,
    })
}

/// Two-sample KS test at significance `alpha`.
pub fn ks_test_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("samples", "empty sample set"));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = xa[i].min(xb[j]);
        while i < n && xa[i] <= t {
            i += 1;
        }
        while j < m && xb[j] <= t {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(gap);
    }
    let critical =
        ks_critical_coefficient(alpha) * ((n + m) as f64 / (n as f64 * m as f64)).sqrt();
    Ok(KsOutcome {
        statistic: d,
        critical,
        pass: d < critical,
    })
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("trials", "zero trials"));
    }
    if successes > trials {
        return Err(Error::invalid("successes", "more successes than trials"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

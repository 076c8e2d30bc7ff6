//! Sample-based estimators of the top-q share and of the tail index.
//!
//! Two threshold conventions exist side by side and the distinction is
//! load-bearing for the bias experiments:
//!
//! * `kappa_hat_q`: the "naive" estimator. The threshold is re-read
//!   from the sample (the k-th largest value, k = floor(q*n)), so it
//!   moves with every redraw.
//! * `kappa_hat_h`: the threshold is frozen at an externally supplied
//!   h; the count above it is whatever it happens to be.
//!
//! Both are ratios of sums. Summation order is part of the contract:
//! the top group is accumulated in descending value order, the
//! denominator in storage order, so results are reproducible bit for
//! bit and equal to a full-sort reference implementation. The top
//! group is located with `select_nth_unstable` (quickselect), not a
//! full sort.

use serde::{Deserialize, Serialize};

use crate::distributions::{kappa_cut_pareto_raw, kappa_pareto, Sample};
use crate::error::{Error, Result};

/// Which estimator produced a [`KappaEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Top floor(q*n) values over the total, threshold re-estimated.
    NaiveQ,
    /// Values strictly above a frozen threshold over the total.
    FrozenH,
    /// Closed form evaluated at fitted tail parameters.
    PlugIn,
    /// Weighted average of closed forms over a spread of tail indices.
    StochasticAlpha,
    /// Closed form at the smallest tail index of a collection.
    MinAlpha,
}

/// An estimated top-share, plus enough context to interpret it.
/// `threshold` and `q` are absent where the kind does not define them
/// (a frozen-h estimate has no q; index-only estimates have neither a
/// threshold drawn from data nor a sample size).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub value: f64,
    pub kind: EstimatorKind,
    pub threshold: Option<f64>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    /// True when a plug-in value fell outside [0, 1] and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailFitMethod {
    Hill,
    ParetoMle,
}

/// Fitted tail parameters: P(X > x) ~ (lambda / x)^alpha_hat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha_hat: f64,
    pub lambda_hat: f64,
    /// Order statistics consumed: k for Hill, n for the MLE.
    pub k_used: usize,
    pub method: TailFitMethod,
}

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 0.0 || q >= 1.0 {
        return Err(Error::Domain {
            name: "q",
            constraint: "in (0, 1)",
            value: q,
        });
    }
    Ok(())
}

/// Size of the top group: floor(q*n). The 1e-9 nudge keeps decimal q
/// values that denote an exact multiple (q=0.3, n=10) from landing one
/// below it through binary rounding. Errors when the group would be
/// empty; q < 1 caps it at n-1.
pub fn top_group_size(q: f64, n: usize) -> Result<usize> {
    check_q(q)?;
    let k = (q * n as f64 + 1e-9).floor();
    if k < 1.0 {
        return Err(Error::QuantileBelowResolution { q, n });
    }
    Ok((k as usize).min(n - 1))
}

/// Empirical exceedance threshold: the smallest h with at most q*n
/// sample values strictly above it, i.e. the (n - floor(q*n))-th
/// smallest value.
pub fn empirical_threshold(sample: &Sample, q: f64) -> Result<f64> {
    let n = sample.len();
    let k = top_group_size(q, n)?;
    let mut buf = sample.values().to_vec();
    let (_, v, _) = buf.select_nth_unstable_by(n - k - 1, f64::total_cmp);
    Ok(*v)
}

/// Sorts descending and sums; the fixed order makes ratio estimates
/// identical across selection and full-sort code paths.
fn sum_descending(mut values: Vec<f64>) -> f64 {
    values.sort_unstable_by(|a, b| f64::total_cmp(b, a));
    values.iter().sum()
}

/// Naive top-share estimator: sum of the k = floor(q*n) largest values
/// over the sum of all values. Exactly k values enter the top group;
/// boundary ties are broken arbitrarily among equal values, which
/// cannot change the sum. The recorded threshold is the k-th largest
/// value, the smallest member of the top group.
pub fn kappa_hat_q(sample: &Sample, q: f64) -> Result<KappaEstimate> {
    let n = sample.len();
    let k = top_group_size(q, n)?;
    let mut buf = sample.values().to_vec();
    // After selecting at sorted position n-k-1, everything to the right
    // is the top group of k values.
    let (_, _, upper) = buf.select_nth_unstable_by(n - k - 1, f64::total_cmp);
    let mut top = upper.to_vec();
    top.sort_unstable_by(|a, b| f64::total_cmp(b, a));
    let threshold = top[k - 1];
    let top_sum: f64 = top.iter().sum();
    let total: f64 = sample.values().iter().sum();
    Ok(KappaEstimate {
        value: top_sum / total,
        kind: EstimatorKind::NaiveQ,
        threshold: Some(threshold),
        q: Some(q),
        n: Some(n),
        clamped: false,
    })
}

/// Frozen-threshold share: sum of values strictly above h over the sum
/// of all values; 0 when nothing exceeds h, exactly 1 when everything
/// does (the two sums would be the same multiset, so the ratio is not
/// recomputed in floating point).
pub fn kappa_hat_h(sample: &Sample, h: f64) -> Result<KappaEstimate> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Domain {
            name: "h",
            constraint: "> 0",
            value: h,
        });
    }
    let tail: Vec<f64> = sample.values().iter().copied().filter(|&v| v > h).collect();
    let value = if tail.is_empty() {
        0.0
    } else if tail.len() == sample.len() {
        1.0
    } else {
        sum_descending(tail) / sample.values().iter().sum::<f64>()
    };
    Ok(KappaEstimate {
        value,
        kind: EstimatorKind::FrozenH,
        threshold: Some(h),
        q: None,
        n: Some(sample.len()),
        clamped: false,
    })
}

/// Default order-statistic count for the Hill fit: floor(n^(2/3)),
/// clamped into the admissible range [2, n-1].
pub fn default_hill_k(n: usize) -> usize {
    let k = (n as f64).powf(2.0 / 3.0).floor() as usize;
    k.clamp(2, n.saturating_sub(1).max(2))
}

/// Hill estimator over the k largest values:
///
/// ```text
/// alpha_hat  = k / sum_{i=1..k} ln(X_[i] / X_[k+1])
/// lambda_hat = X_[k+1] * (k/n)^(1/alpha_hat)
/// ```
///
/// where X_[i] is the i-th largest value. Requires 2 <= k < n and some
/// spread among the top k+1 values.
pub fn hill_estimator(sample: &Sample, k: usize) -> Result<TailFit> {
    let n = sample.len();
    if k < 2 || k >= n {
        return Err(Error::Count {
            name: "k",
            constraint: "in [2, n-1]",
            value: k,
        });
    }
    let mut buf = sample.values().to_vec();
    let split = n - (k + 1);
    buf.select_nth_unstable_by(split, f64::total_cmp);
    let mut top = buf.split_off(split);
    top.sort_unstable_by(|a, b| f64::total_cmp(b, a));
    let x_k1 = top[k];
    let sum_log: f64 = top[..k].iter().map(|&x| (x / x_k1).ln()).sum();
    if sum_log <= 0.0 {
        return Err(Error::Invalid(
            "cannot fit a tail index: no spread among the top k+1 values".into(),
        ));
    }
    let alpha_hat = k as f64 / sum_log;
    let lambda_hat = x_k1 * (k as f64 / n as f64).powf(1.0 / alpha_hat);
    Ok(TailFit {
        alpha_hat,
        lambda_hat,
        k_used: k,
        method: TailFitMethod::Hill,
    })
}

/// Maximum-likelihood tail index for a pure Pareto sample with known
/// floor: alpha_hat = n / sum ln(X_i / x_min). Uses the whole sample.
pub fn pareto_mle(sample: &Sample, x_min: f64) -> Result<TailFit> {
    if !x_min.is_finite() || x_min <= 0.0 {
        return Err(Error::Domain {
            name: "x_min",
            constraint: "> 0",
            value: x_min,
        });
    }
    let min = sample
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if x_min > min {
        return Err(Error::Domain {
            name: "x_min",
            constraint: "no larger than the sample minimum",
            value: x_min,
        });
    }
    let n = sample.len();
    let sum_log: f64 = sample.values().iter().map(|&v| (v / x_min).ln()).sum();
    if sum_log <= 0.0 {
        return Err(Error::Invalid(
            "cannot fit a tail index: all values sit at x_min".into(),
        ));
    }
    Ok(TailFit {
        alpha_hat: n as f64 / sum_log,
        lambda_hat: x_min,
        k_used: n,
        method: TailFitMethod::ParetoMle,
    })
}

/// Plug-in share: the closed form evaluated at fitted tail parameters
/// and an estimated mean. Values outside [0, 1] are clamped and
/// flagged rather than rejected; a fit with alpha_hat <= 1 has no
/// finite mean and is an error.
pub fn plugin_kappa(fit: &TailFit, mean_hat: f64, q: f64) -> Result<KappaEstimate> {
    if fit.alpha_hat <= 1.0 {
        return Err(Error::InfiniteMeanFit {
            alpha_hat: fit.alpha_hat,
        });
    }
    check_q(q)?;
    if !mean_hat.is_finite() || mean_hat <= 0.0 {
        return Err(Error::Domain {
            name: "mean_hat",
            constraint: "> 0",
            value: mean_hat,
        });
    }
    let raw = kappa_cut_pareto_raw(fit.alpha_hat, fit.lambda_hat, mean_hat, q);
    let value = raw.clamp(0.0, 1.0);
    let threshold = fit.lambda_hat * q.powf(-1.0 / fit.alpha_hat);
    Ok(KappaEstimate {
        value,
        kind: EstimatorKind::PlugIn,
        threshold: Some(threshold),
        q: Some(q),
        n: None,
        clamped: value != raw,
    })
}

/// Convenience plug-in path: Hill fit (default k unless given), sample
/// mean, closed form.
pub fn plugin_kappa_from_sample(sample: &Sample, q: f64, k: Option<usize>) -> Result<KappaEstimate> {
    let n = sample.len();
    let fit = hill_estimator(sample, k.unwrap_or_else(|| default_hill_k(n)))?;
    let mean = sample.values().iter().sum::<f64>() / n as f64;
    let mut est = plugin_kappa(&fit, mean, q)?;
    est.n = Some(n);
    Ok(est)
}

fn check_alpha_list(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Invalid("alpha list must not be empty".into()));
    }
    for &a in alphas {
        if !a.is_finite() || a <= 1.0 {
            return Err(Error::Domain {
                name: "alpha",
                constraint: "> 1 (finite mean)",
                value: a,
            });
        }
    }
    Ok(())
}

/// Expected share when the tail index is itself uncertain: the
/// weighted average of closed forms over the candidate indices. By
/// convexity this always weakly exceeds the share at the weighted mean
/// index, so ignoring index uncertainty understates the tail.
pub fn stochastic_alpha_kappa(alphas: &[f64], weights: &[f64], q: f64) -> Result<KappaEstimate> {
    check_alpha_list(alphas)?;
    if weights.len() != alphas.len() {
        return Err(Error::LengthMismatch {
            weights: weights.len(),
            alphas: alphas.len(),
        });
    }
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain {
                name: "weight",
                constraint: ">= 0",
                value: w,
            });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > crate::distributions::WEIGHT_SUM_TOL {
        return Err(Error::WeightSum { sum });
    }
    check_q(q)?;
    let mut value = 0.0;
    for (&a, &w) in alphas.iter().zip(weights) {
        value += w * kappa_pareto(a, q)?;
    }
    Ok(KappaEstimate {
        value,
        kind: EstimatorKind::StochasticAlpha,
        threshold: None,
        q: Some(q),
        n: None,
        clamped: false,
    })
}

/// Worst-case share over a collection of candidate tail indices: the
/// closed form at the smallest one (the share falls as the index
/// rises, so the fattest candidate dominates).
pub fn min_alpha_kappa(alphas: &[f64], q: f64) -> Result<KappaEstimate> {
    check_alpha_list(alphas)?;
    check_q(q)?;
    let min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(KappaEstimate {
        value: kappa_pareto(min, q)?,
        kind: EstimatorKind::MinAlpha,
        threshold: None,
        q: Some(q),
        n: None,
        clamped: false,
    })
}

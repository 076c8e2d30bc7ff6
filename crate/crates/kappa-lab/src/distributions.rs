//! Distribution specs, closed-form tail shares, and a reproducible sampler.
//!
//! The central quantity is the share of the total that the top q-fraction
//! of a population carries:
//!
//! ```text
//! kappa_q = q * E[X | X > h(q)] / E[X],   P(X > h(q)) = q
//! ```
//!
//! For a Pareto tail with index `alpha` this is `q^((alpha-1)/alpha)`,
//! independent of scale. This module holds the parameter types, the
//! closed forms (plain Pareto, Pareto tail grafted onto an arbitrary
//! body, finite mixtures of Pareto components), and the sampler the
//! Monte Carlo harness draws from.
//!
//! Randomness policy: every draw comes from one generator, ChaCha8
//! (`rand_chacha`), seeded per sample. ChaCha is counter-based, so
//! distinct seeds give independent streams and a `(spec, n, seed)`
//! triple always reproduces the same values on a given platform.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mixture weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Relative width at which the mixture threshold bisection stops.
const BISECT_REL_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::Domain {
            name: "alpha",
            constraint: "> 1 (finite mean)",
            value: alpha,
        });
    }
    Ok(())
}

fn check_q_open(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 0.0 || q >= 1.0 {
        return Err(Error::Domain {
            name: "q",
            constraint: "in (0, 1)",
            value: q,
        });
    }
    Ok(())
}

/// Pareto distribution: P(X > x) = (x_min / x)^alpha for x >= x_min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoParams {
    alpha: f64,
    x_min: f64,
}

impl ParetoParams {
    /// Requires alpha > 1 (finite mean) and x_min > 0.
    pub fn new(alpha: f64, x_min: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !x_min.is_finite() || x_min <= 0.0 {
            return Err(Error::Domain {
                name: "x_min",
                constraint: "> 0",
                value: x_min,
            });
        }
        Ok(Self { alpha, x_min })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn mean(&self) -> f64 {
        self.alpha * self.x_min / (self.alpha - 1.0)
    }

    /// Maps a survival probability u in (0, 1) to the value exceeded
    /// with probability u: x = x_min * u^(-1/alpha). This is the whole
    /// sampler for the Pareto case.
    pub fn inverse_survival(&self, u: f64) -> f64 {
        self.x_min * u.powf(-1.0 / self.alpha)
    }
}

/// Lognormal distribution: ln X ~ N(mu, sigma^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    mu: f64,
    sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain {
                name: "mu",
                constraint: "finite",
                value: mu,
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain {
                name: "sigma",
                constraint: "> 0",
                value: sigma,
            });
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Finite mixture of Pareto components, each normalized to unit mean by
/// fixing x_min_i = (alpha_i - 1) / alpha_i. The normalization keeps
/// tail-share comparisons across mixtures meaningful: every mixture has
/// mean exactly 1, so differences in kappa come from tail shape alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<ParetoParams>,
}

impl MixtureSpec {
    /// Builds a unit-mean mixture from weights and tail indices.
    /// Weights must be nonnegative and sum to 1 within 1e-12; every
    /// alpha must exceed 1.
    pub fn new(weights: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != alphas.len() {
            return Err(Error::LengthMismatch {
                weights: weights.len(),
                alphas: alphas.len(),
            });
        }
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain {
                    name: "weight",
                    constraint: ">= 0",
                    value: w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        let components = alphas
            .iter()
            .map(|&a| {
                check_alpha(a)?;
                ParetoParams::new(a, (a - 1.0) / a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ParetoParams] {
        &self.components
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.alpha()).collect()
    }

    fn min_x_min(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.x_min())
            .fold(f64::INFINITY, f64::min)
    }

    fn max_x_min(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.x_min())
            .fold(0.0, f64::max)
    }

    /// P(X > h). A component whose entire support lies above h
    /// contributes its full weight.
    pub fn survival(&self, h: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(&w, c)| {
                if h <= c.x_min() {
                    w
                } else {
                    w * (c.x_min() / h).powf(c.alpha())
                }
            })
            .sum()
    }

    /// E[X 1{X > h}]. With unit-mean components this reduces to
    /// sum_i w_i * min(1, (x_min_i / h)^(alpha_i - 1)); it also equals
    /// the tail share of the mixture because the mixture mean is 1.
    pub fn tail_mean(&self, h: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(&w, c)| {
                if h <= c.x_min() {
                    w
                } else {
                    w * (c.x_min() / h).powf(c.alpha() - 1.0)
                }
            })
            .sum()
    }

    /// Index of the component owning cumulative-weight position u in [0, 1).
    fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }
}

/// Tagged union of the supported population laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum DistributionSpec {
    Pareto(ParetoParams),
    Lognormal(LognormalParams),
    Mixture(MixtureSpec),
}

impl std::fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistributionSpec::Pareto(p) => {
                write!(f, "pareto(alpha={}, x_min={})", p.alpha(), p.x_min())
            }
            DistributionSpec::Lognormal(l) => {
                write!(f, "lognormal(mu={}, sigma={})", l.mu(), l.sigma())
            }
            DistributionSpec::Mixture(m) => {
                write!(f, "mixture(")?;
                for (i, (w, c)) in m.weights().iter().zip(m.components()).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}*alpha={}", w, c.alpha())?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A drawn sample together with the seed and spec that produced it, so
/// any downstream number can be traced back to its generator inputs.
/// Externally supplied data has no seed or spec.
#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    values: Vec<f64>,
    seed: Option<u64>,
    spec: Option<DistributionSpec>,
}

impl Sample {
    /// Wraps externally supplied values. Every value must be strictly
    /// positive and finite, and there must be at least one.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::BadSampleValue { index: i, value: v });
            }
        }
        Ok(Self {
            values,
            seed: None,
            spec: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn spec(&self) -> Option<&DistributionSpec> {
        self.spec.as_ref()
    }
}

/// Draws n values from the spec. Bit-reproducible: the same
/// (spec, n, seed) triple always yields the same values.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::Count {
            name: "n",
            constraint: ">= 1",
            value: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    match spec {
        DistributionSpec::Pareto(p) => {
            for _ in 0..n {
                let u: f64 = rng.sample(Open01);
                values.push(p.inverse_survival(u));
            }
        }
        DistributionSpec::Lognormal(l) => {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                values.push((l.mu() + l.sigma() * z).exp());
            }
        }
        DistributionSpec::Mixture(m) => {
            for _ in 0..n {
                let pick: f64 = rng.random();
                let c = &m.components()[m.pick(pick)];
                let u: f64 = rng.sample(Open01);
                values.push(c.inverse_survival(u));
            }
        }
    }
    Ok(Sample {
        values,
        seed: Some(seed),
        spec: Some(spec.clone()),
    })
}

/// Population exceedance threshold h(q) = x_min * q^(-1/alpha), the
/// value exceeded by exactly the top q-fraction.
pub fn theoretical_threshold(params: &ParetoParams, q: f64) -> Result<f64> {
    check_q_open(q)?;
    Ok(params.x_min() * q.powf(-1.0 / params.alpha()))
}

/// Share of the total carried by the top q-fraction of a Pareto
/// population: q^((alpha-1)/alpha). Scale-free. Defined for q in (0, 1]
/// with kappa_1 = 1.
pub fn kappa_pareto(alpha: f64, q: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !q.is_finite() || q <= 0.0 || q > 1.0 {
        return Err(Error::Domain {
            name: "q",
            constraint: "in (0, 1]",
            value: q,
        });
    }
    Ok(q.powf((alpha - 1.0) / alpha))
}

/// Unchecked core of [`kappa_cut_pareto`]: the plug-in path needs the
/// raw value so it can clamp instead of erroring.
pub(crate) fn kappa_cut_pareto_raw(alpha: f64, lambda: f64, mean: f64, q: f64) -> f64 {
    (alpha / (alpha - 1.0)) * (lambda / mean) * q.powf((alpha - 1.0) / alpha)
}

/// Tail share when only the tail is Pareto(alpha, lambda) and the
/// population mean is supplied separately (body law arbitrary):
///
/// ```text
/// kappa_q = (alpha / (alpha - 1)) * (lambda / mean) * q^((alpha-1)/alpha)
/// ```
///
/// Errors if the inputs imply a share above one, which means the
/// supplied mean is inconsistent with the tail.
pub fn kappa_cut_pareto(alpha: f64, lambda: f64, mean: f64, q: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_q_open(q)?;
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain {
            name: "lambda",
            constraint: "> 0",
            value: lambda,
        });
    }
    if !mean.is_finite() || mean <= 0.0 {
        return Err(Error::Domain {
            name: "mean",
            constraint: "> 0",
            value: mean,
        });
    }
    let value = kappa_cut_pareto_raw(alpha, lambda, mean, q);
    if value > 1.0 {
        return Err(Error::InconsistentMean { mean, q, value });
    }
    Ok(value)
}

/// Second derivative of alpha -> kappa_pareto(alpha, q):
///
/// ```text
/// d^2 kappa / d alpha^2 = q^((alpha-1)/alpha) * ln(q) * (ln(q) - 2*alpha) / alpha^4
/// ```
///
/// Both factors ln(q) and (ln(q) - 2*alpha) are negative for q in (0, 1)
/// and alpha > 1, so the value is strictly positive: the tail share is
/// convex in the tail index. That convexity is what makes uncertainty
/// about alpha push the expected share upward.
pub fn kappa_second_derivative(alpha: f64, q: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_q_open(q)?;
    let lnq = q.ln();
    Ok(q.powf((alpha - 1.0) / alpha) * lnq * (lnq - 2.0 * alpha) / alpha.powi(4))
}

/// Exceedance threshold of a unit-mean Pareto mixture: the h solving
/// survival(h) = q, found by geometric bracket growth plus bisection to
/// 1e-12 relative width. survival is continuous and strictly decreasing
/// above the smallest component lower bound, so the root is unique.
pub fn mixture_threshold(mix: &MixtureSpec, q: f64) -> Result<f64> {
    check_q_open(q)?;
    let lo0 = mix.min_x_min();
    let mut lo = lo0;
    let mut hi = mix.max_x_min().max(lo0) * 2.0;
    let mut grow = 0;
    while mix.survival(hi) >= q {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::RootFind(format!(
                "failed to bracket mixture threshold for q={q}"
            )));
        }
    }
    // Invariant: survival(lo) >= q > survival(hi).
    loop {
        let mid = 0.5 * (lo + hi);
        if mix.survival(mid) >= q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_REL_TOL * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
}

/// Tail share of the top q-fraction of a unit-mean Pareto mixture:
/// solves for the threshold, then evaluates the closed-form tail mean
/// there (the mixture mean is 1 by construction, so the tail mean is
/// already the share).
pub fn kappa_mixture(mix: &MixtureSpec, q: f64) -> Result<f64> {
    let h = mixture_threshold(mix, q)?;
    Ok(mix.tail_mean(h).min(1.0))
}

/// Population share of the total above a frozen threshold h,
/// E[X 1{X > h}] / E[X], where a closed form exists. Thresholds at or
/// below the support floor give 1.
pub fn population_kappa_h(spec: &DistributionSpec, h: f64) -> Option<f64> {
    match spec {
        DistributionSpec::Pareto(p) => {
            if h <= p.x_min() {
                Some(1.0)
            } else {
                Some((p.x_min() / h).powf(p.alpha() - 1.0))
            }
        }
        DistributionSpec::Mixture(m) => Some(m.tail_mean(h).min(1.0)),
        DistributionSpec::Lognormal(_) => None,
    }
}

/// Population share of the top q-fraction, where a closed form exists.
pub fn population_kappa_q(spec: &DistributionSpec, q: f64) -> Option<f64> {
    match spec {
        DistributionSpec::Pareto(p) => kappa_pareto(p.alpha(), q).ok(),
        DistributionSpec::Mixture(m) => kappa_mixture(m, q).ok(),
        DistributionSpec::Lognormal(_) => None,
    }
}

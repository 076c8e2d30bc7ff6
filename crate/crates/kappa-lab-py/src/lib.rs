//! Python bindings: thin wrappers over the kappa-lab library exposing
//! the closed forms, estimators, and Monte Carlo experiments. Scalars
//! and vectors cross the boundary as plain Python numbers, lists, and
//! tuples; estimator and experiment outputs come back as small frozen
//! result classes. Library errors surface as ValueError.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kappa_lab::distributions as dist;
use kappa_lab::estimators as est;
use kappa_lab::montecarlo as mc;

fn pyerr(e: kappa_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_name(kind: est::EstimatorKind) -> &'static str {
    match kind {
        est::EstimatorKind::NaiveQ => "naive_q",
        est::EstimatorKind::FrozenH => "frozen_h",
        est::EstimatorKind::PlugIn => "plug_in",
        est::EstimatorKind::StochasticAlpha => "stochastic_alpha",
        est::EstimatorKind::MinAlpha => "min_alpha",
    }
}

fn method_name(method: est::TailFitMethod) -> &'static str {
    match method {
        est::TailFitMethod::Hill => "hill",
        est::TailFitMethod::ParetoMle => "pareto_mle",
    }
}

fn to_sample(values: Vec<f64>) -> PyResult<dist::Sample> {
    dist::Sample::from_values(values).map_err(pyerr)
}

fn to_mixture(weights: Vec<f64>, alphas: Vec<f64>) -> PyResult<dist::MixtureSpec> {
    dist::MixtureSpec::new(weights, alphas).map_err(pyerr)
}

/// A sampling law: Pareto, lognormal, or a unit-mean Pareto mixture.
#[pyclass(name = "DistributionSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PyDistributionSpec {
    inner: dist::DistributionSpec,
}

#[pymethods]
impl PyDistributionSpec {
    #[staticmethod]
    #[pyo3(signature = (alpha, x_min = 1.0))]
    fn pareto(alpha: f64, x_min: f64) -> PyResult<Self> {
        let p = dist::ParetoParams::new(alpha, x_min).map_err(pyerr)?;
        Ok(Self {
            inner: dist::DistributionSpec::Pareto(p),
        })
    }

    #[staticmethod]
    fn lognormal(mu: f64, sigma: f64) -> PyResult<Self> {
        let l = dist::LognormalParams::new(mu, sigma).map_err(pyerr)?;
        Ok(Self {
            inner: dist::DistributionSpec::Lognormal(l),
        })
    }

    #[staticmethod]
    fn mixture(weights: Vec<f64>, alphas: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: dist::DistributionSpec::Mixture(to_mixture(weights, alphas)?),
        })
    }

    fn __repr__(&self) -> String {
        self.inner.to_string()
    }
}

/// One estimator output.
#[pyclass(name = "KappaEstimate", get_all, frozen)]
struct PyKappaEstimate {
    value: f64,
    kind: String,
    threshold: Option<f64>,
    q: Option<f64>,
    n: Option<usize>,
    clamped: bool,
}

impl From<est::KappaEstimate> for PyKappaEstimate {
    fn from(e: est::KappaEstimate) -> Self {
        Self {
            value: e.value,
            kind: kind_name(e.kind).to_string(),
            threshold: e.threshold,
            q: e.q,
            n: e.n,
            clamped: e.clamped,
        }
    }
}

#[pymethods]
impl PyKappaEstimate {
    fn __repr__(&self) -> String {
        format!("KappaEstimate(value={}, kind={})", self.value, self.kind)
    }
}

/// Fitted tail parameters.
#[pyclass(name = "TailFit", get_all, frozen)]
struct PyTailFit {
    alpha_hat: f64,
    lambda_hat: f64,
    k_used: usize,
    method: String,
}

impl From<est::TailFit> for PyTailFit {
    fn from(f: est::TailFit) -> Self {
        Self {
            alpha_hat: f.alpha_hat,
            lambda_hat: f.lambda_hat,
            k_used: f.k_used,
            method: method_name(f.method).to_string(),
        }
    }
}

#[pymethods]
impl PyTailFit {
    fn __repr__(&self) -> String {
        format!(
            "TailFit(alpha_hat={}, lambda_hat={}, k_used={}, method={})",
            self.alpha_hat, self.lambda_hat, self.k_used, self.method
        )
    }
}

/// Mean/median/std of an estimator across repeated draws.
#[pyclass(name = "McSummary", get_all, frozen)]
struct PyMcSummary {
    n: usize,
    q: f64,
    runs: usize,
    mean: f64,
    median: f64,
    std: f64,
}

impl From<mc::McSummary> for PyMcSummary {
    fn from(s: mc::McSummary) -> Self {
        Self {
            n: s.n,
            q: s.q,
            runs: s.runs,
            mean: s.mean,
            median: s.median,
            std: s.std,
        }
    }
}

#[pymethods]
impl PyMcSummary {
    fn __repr__(&self) -> String {
        format!(
            "McSummary(n={}, runs={}, mean={}, median={}, std={})",
            self.n, self.runs, self.mean, self.median, self.std
        )
    }
}

/// Merge-versus-parts outcome.
#[pyclass(name = "SuperAddRecord", get_all, frozen)]
struct PySuperAddRecord {
    sizes: Vec<usize>,
    q: f64,
    runs: usize,
    e_kappa_full: f64,
    weighted_avg_parts: f64,
    gap: f64,
    z_score: f64,
    identical_laws: bool,
}

/// Frozen-threshold means per sample size.
#[pyclass(name = "ConvergenceResult", get_all, frozen)]
struct PyConvergenceResult {
    h: f64,
    runs: usize,
    points: Vec<(usize, f64)>,
    population_kappa_h: Option<f64>,
}

/// Power-law fit of bias against sample size.
#[pyclass(name = "ScalingFit", get_all, frozen)]
struct PyScalingFit {
    c_hat: f64,
    exponent_hat: f64,
    r_squared: f64,
    points: Vec<(usize, f64)>,
}

/// Dependence between sample totals and estimated shares.
#[pyclass(name = "CorrRecord", get_all, frozen)]
struct PyCorrRecord {
    runs: usize,
    pearson: f64,
    spearman: f64,
    spearman_z: f64,
    bucket_means: Vec<(usize, f64)>,
    degenerate: bool,
}

/// Estimated versus exact shares for a Pareto mixture.
#[pyclass(name = "MixtureBiasRecord", get_all, frozen)]
struct PyMixtureBiasRecord {
    n: usize,
    q: f64,
    runs: usize,
    mc_mean: f64,
    population_mixture_kappa: f64,
    component_avg_kappa: f64,
    mean_alpha_kappa: f64,
}

/// Closed-form share of the total held by the top q-fraction under a
/// Pareto law with tail index alpha.
#[pyfunction]
fn kappa_pareto(alpha: f64, q: f64) -> PyResult<f64> {
    dist::kappa_pareto(alpha, q).map_err(pyerr)
}

/// Closed-form share for a Pareto tail grafted above an arbitrary body
/// with the given population mean.
#[pyfunction]
fn kappa_cut_pareto(alpha: f64, lambda: f64, mean: f64, q: f64) -> PyResult<f64> {
    dist::kappa_cut_pareto(alpha, lambda, mean, q).map_err(pyerr)
}

/// Second derivative of the Pareto share in its tail index.
#[pyfunction]
fn kappa_second_derivative(alpha: f64, q: f64) -> PyResult<f64> {
    dist::kappa_second_derivative(alpha, q).map_err(pyerr)
}

/// Exceedance threshold of a Pareto law at tail probability q.
#[pyfunction]
#[pyo3(signature = (alpha, q, x_min = 1.0))]
fn theoretical_threshold(alpha: f64, q: f64, x_min: f64) -> PyResult<f64> {
    let p = dist::ParetoParams::new(alpha, x_min).map_err(pyerr)?;
    dist::theoretical_threshold(&p, q).map_err(pyerr)
}

/// Closed-form share of a unit-mean Pareto mixture.
#[pyfunction]
fn kappa_mixture(weights: Vec<f64>, alphas: Vec<f64>, q: f64) -> PyResult<f64> {
    dist::kappa_mixture(&to_mixture(weights, alphas)?, q).map_err(pyerr)
}

/// Exceedance threshold of a unit-mean Pareto mixture.
#[pyfunction]
fn mixture_threshold(weights: Vec<f64>, alphas: Vec<f64>, q: f64) -> PyResult<f64> {
    dist::mixture_threshold(&to_mixture(weights, alphas)?, q).map_err(pyerr)
}

/// Draws n values from the spec under the given seed.
#[pyfunction]
fn sample(spec: &PyDistributionSpec, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    Ok(dist::sample(&spec.inner, n, seed)
        .map_err(pyerr)?
        .values()
        .to_vec())
}

/// Size of the top group selected by the naive estimator.
#[pyfunction]
fn top_group_size(q: f64, n: usize) -> PyResult<usize> {
    est::top_group_size(q, n).map_err(pyerr)
}

/// Smallest observed value whose strictly-greater count is at most q*n.
#[pyfunction]
fn empirical_threshold(values: Vec<f64>, q: f64) -> PyResult<f64> {
    est::empirical_threshold(&to_sample(values)?, q).map_err(pyerr)
}

/// Naive share estimator: top floor(q*n) values over the total.
#[pyfunction]
fn kappa_hat_q(values: Vec<f64>, q: f64) -> PyResult<PyKappaEstimate> {
    Ok(est::kappa_hat_q(&to_sample(values)?, q).map_err(pyerr)?.into())
}

/// Frozen-threshold share estimator: values strictly above h over the
/// total.
#[pyfunction]
fn kappa_hat_h(values: Vec<f64>, h: f64) -> PyResult<PyKappaEstimate> {
    Ok(est::kappa_hat_h(&to_sample(values)?, h).map_err(pyerr)?.into())
}

/// Hill tail-index fit on the top k order statistics; k defaults to
/// floor(n^(2/3)).
#[pyfunction]
#[pyo3(signature = (values, k = None))]
fn hill_estimator(values: Vec<f64>, k: Option<usize>) -> PyResult<PyTailFit> {
    let smp = to_sample(values)?;
    let k = k.unwrap_or_else(|| est::default_hill_k(smp.len()));
    Ok(est::hill_estimator(&smp, k).map_err(pyerr)?.into())
}

/// Maximum-likelihood Pareto fit for a known support floor.
#[pyfunction]
fn pareto_mle(values: Vec<f64>, x_min: f64) -> PyResult<PyTailFit> {
    Ok(est::pareto_mle(&to_sample(values)?, x_min).map_err(pyerr)?.into())
}

/// Plug-in share estimate from a tail fit on the sample itself.
#[pyfunction]
#[pyo3(signature = (values, q, k = None))]
fn plugin_kappa_from_sample(values: Vec<f64>, q: f64, k: Option<usize>) -> PyResult<PyKappaEstimate> {
    Ok(est::plugin_kappa_from_sample(&to_sample(values)?, q, k)
        .map_err(pyerr)?
        .into())
}

/// Expected share under a randomized tail index: the weighted average
/// of closed forms.
#[pyfunction]
fn stochastic_alpha_kappa(alphas: Vec<f64>, weights: Vec<f64>, q: f64) -> PyResult<PyKappaEstimate> {
    Ok(est::stochastic_alpha_kappa(&alphas, &weights, q)
        .map_err(pyerr)?
        .into())
}

/// Conservative share bound: the closed form at the smallest index.
#[pyfunction]
fn min_alpha_kappa(alphas: Vec<f64>, q: f64) -> PyResult<PyKappaEstimate> {
    Ok(est::min_alpha_kappa(&alphas, q).map_err(pyerr)?.into())
}

/// Seed for one run of an experiment, derived from the master seed.
#[pyfunction]
fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    mc::derive_run_seed(master_seed, run_index)
}

/// Distribution of the naive estimator across repeated draws.
#[pyfunction]
fn mc_kappa_bias(
    spec: &PyDistributionSpec,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> PyResult<PyMcSummary> {
    Ok(mc::mc_kappa_bias(&spec.inner, q, n, runs, master_seed)
        .map_err(pyerr)?
        .into())
}

/// Merged-sample share versus the weighted average over parts.
#[pyfunction]
fn mc_superadditivity(
    specs: Vec<PyDistributionSpec>,
    sizes: Vec<usize>,
    q: f64,
    runs: usize,
    master_seed: u64,
) -> PyResult<PySuperAddRecord> {
    let specs: Vec<_> = specs.into_iter().map(|s| s.inner).collect();
    let r = mc::mc_superadditivity(&specs, &sizes, q, runs, master_seed).map_err(pyerr)?;
    Ok(PySuperAddRecord {
        sizes: r.sizes,
        q: r.q,
        runs: r.runs,
        e_kappa_full: r.e_kappa_full,
        weighted_avg_parts: r.weighted_avg_parts,
        gap: r.gap,
        z_score: r.z_score,
        identical_laws: r.identical_laws,
    })
}

/// Mean frozen-threshold share over an increasing grid of sample
/// sizes.
#[pyfunction]
fn mc_monotone_convergence(
    spec: &PyDistributionSpec,
    h: f64,
    sizes: Vec<usize>,
    runs: usize,
    master_seed: u64,
) -> PyResult<PyConvergenceResult> {
    let r = mc::mc_monotone_convergence(&spec.inner, h, &sizes, runs, master_seed).map_err(pyerr)?;
    Ok(PyConvergenceResult {
        h: r.h,
        runs: r.runs,
        points: r.points.iter().map(|p| (p.n, p.mean_kappa_h)).collect(),
        population_kappa_h: r.population_kappa_h,
    })
}

/// Least-squares fit of ln(bias) against ln(n).
#[pyfunction]
fn fit_bias_scaling(points: Vec<(usize, f64)>) -> PyResult<PyScalingFit> {
    let f = mc::fit_bias_scaling(&points).map_err(pyerr)?;
    Ok(PyScalingFit {
        c_hat: f.c_hat,
        exponent_hat: f.exponent_hat,
        r_squared: f.r_squared,
        points: f.points,
    })
}

/// Correlation between the estimated share and the sample total.
#[pyfunction]
fn mc_kappa_sum_dependence(
    spec: &PyDistributionSpec,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> PyResult<PyCorrRecord> {
    let r = mc::mc_kappa_sum_dependence(&spec.inner, q, n, runs, master_seed).map_err(pyerr)?;
    Ok(PyCorrRecord {
        runs: r.runs,
        pearson: r.pearson,
        spearman: r.spearman,
        spearman_z: r.spearman_z,
        bucket_means: r.bucket_means,
        degenerate: r.degenerate,
    })
}

/// Estimated versus exact shares for a unit-mean Pareto mixture.
#[pyfunction]
fn mc_mixture_bias(
    weights: Vec<f64>,
    alphas: Vec<f64>,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> PyResult<PyMixtureBiasRecord> {
    let mix = to_mixture(weights, alphas)?;
    let r = mc::mc_mixture_bias(&mix, q, n, runs, master_seed).map_err(pyerr)?;
    Ok(PyMixtureBiasRecord {
        n: r.n,
        q: r.q,
        runs: r.runs,
        mc_mean: r.mc_mean,
        population_mixture_kappa: r.population_mixture_kappa,
        component_avg_kappa: r.component_avg_kappa,
        mean_alpha_kappa: r.mean_alpha_kappa,
    })
}

#[pymodule]
fn kappa_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistributionSpec>()?;
    m.add_class::<PyKappaEstimate>()?;
    m.add_class::<PyTailFit>()?;
    m.add_class::<PyMcSummary>()?;
    m.add_class::<PySuperAddRecord>()?;
    m.add_class::<PyConvergenceResult>()?;
    m.add_class::<PyScalingFit>()?;
    m.add_class::<PyCorrRecord>()?;
    m.add_class::<PyMixtureBiasRecord>()?;
    m.add_function(wrap_pyfunction!(kappa_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_cut_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_second_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(top_group_size, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_hat_q, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_hat_h, m)?)?;
    m.add_function(wrap_pyfunction!(hill_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_mle, m)?)?;
    m.add_function(wrap_pyfunction!(plugin_kappa_from_sample, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_alpha_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(min_alpha_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(derive_run_seed, m)?)?;
    m.add_function(wrap_pyfunction!(mc_kappa_bias, m)?)?;
    m.add_function(wrap_pyfunction!(mc_superadditivity, m)?)?;
    m.add_function(wrap_pyfunction!(mc_monotone_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(fit_bias_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(mc_kappa_sum_dependence, m)?)?;
    m.add_function(wrap_pyfunction!(mc_mixture_bias, m)?)?;
    Ok(())
}

//! Monte Carlo harness: run-seed derivation, repeated-draw experiments
//! over the estimators, and the summary records the report layer
//! serializes.
//!
//! Reproducibility contract: every run r of an experiment draws from a
//! seed derived purely from (master_seed, r), runs are mapped in index
//! order, and aggregation happens sequentially over the collected
//! per-run values. Results are therefore bit-identical for any worker
//! count; parallelism (rayon) only spreads runs across threads.
//! Callers pick the thread budget by installing a rayon pool around
//! these calls; nothing here reads global mutable state.
//!
//! Memory: each worker holds one sample at a time (a run's sample is
//! dropped before its value is stored), while the per-run values are
//! all kept so that medians are exact rather than streamed
//! approximations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    kappa_mixture, kappa_pareto, population_kappa_h, sample, DistributionSpec, MixtureSpec,
    Sample,
};
use crate::estimators::{kappa_hat_h, kappa_hat_q, top_group_size};
use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for run `run_index` of an experiment with the given master
/// seed: the (run_index + 1)-th output of a SplitMix64 stream started
/// at `master_seed`. The finalizer is a bijection on 64-bit words, so
/// runs of one experiment can never collide with each other, and
/// nearby master seeds still produce unrelated streams. Pure integer
/// arithmetic: identical on every platform and for every thread count.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(GOLDEN.wrapping_mul(run_index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Location and spread of one estimator across repeated draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n: usize,
    pub q: f64,
    pub runs: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

/// Outcome of a merge-versus-parts experiment. `gap` is the estimated
/// amount by which the merged sample's expected share exceeds the
/// weighted average of the parts' expected shares; `z_score` is that
/// gap over its paired-difference standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperAddRecord {
    pub sizes: Vec<usize>,
    pub q: f64,
    pub runs: usize,
    pub e_kappa_full: f64,
    pub weighted_avg_parts: f64,
    pub gap: f64,
    pub z_score: f64,
    /// True when every part draws from the same spec; the parts are
    /// then weighted by their sample-size fractions instead of their
    /// mean realized sum shares.
    pub identical_laws: bool,
}

/// Mean frozen-threshold share per sample size, with the population
/// value where a closed form exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mean_kappa_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub h: f64,
    pub runs: usize,
    pub points: Vec<ConvergencePoint>,
    pub population_kappa_h: Option<f64>,
}

/// Power-law fit of bias against sample size: bias ~ c * n^(-exponent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub c_hat: f64,
    pub exponent_hat: f64,
    pub r_squared: f64,
    pub points: Vec<(usize, f64)>,
}

/// Dependence between a sample's total and its estimated top share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRecord {
    pub runs: usize,
    pub pearson: f64,
    pub spearman: f64,
    /// Normal-approximation z for the Spearman coefficient,
    /// spearman * sqrt(runs - 1).
    pub spearman_z: f64,
    /// (decile of the sample total, mean estimated share), decile 1 the
    /// smallest totals.
    pub bucket_means: Vec<(usize, f64)>,
    /// Set when either series is constant and correlation is undefined;
    /// the coefficients are reported as 0.
    pub degenerate: bool,
}

/// Estimated versus exact shares for a unit-mean Pareto mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureBiasRecord {
    pub n: usize,
    pub q: f64,
    pub runs: usize,
    pub mc_mean: f64,
    pub population_mixture_kappa: f64,
    /// Weighted average of the components' own closed-form shares.
    pub component_avg_kappa: f64,
    /// Closed-form share at the weighted-average index.
    pub mean_alpha_kappa: f64,
}

fn check_runs(runs: usize, minimum: usize) -> Result<()> {
    if runs < minimum {
        return Err(Error::Count {
            name: "runs",
            constraint: if minimum == 2 { ">= 2" } else { ">= 100" },
            value: runs,
        });
    }
    Ok(())
}

fn mc_err(run: u64, n: usize, source: Error) -> Error {
    Error::McRun {
        run,
        n,
        source: Box::new(source),
    }
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    let ss: f64 = values.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Runs the closure once per run index, in parallel, preserving run
/// order in the output.
fn per_run<T, F>(runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..runs as u64).into_par_iter().map(f).collect()
}

fn summarize(values: Vec<f64>, n: usize, q: f64) -> McSummary {
    let mean = mean_of(&values);
    McSummary {
        n,
        q,
        runs: values.len(),
        mean,
        median: median_of(&values),
        std: sample_std(&values, mean),
    }
}

fn mc_kappa_bias_impl<F>(make: F, q: f64, n: usize, runs: usize, master_seed: u64) -> Result<McSummary>
where
    F: Fn(u64) -> Result<Sample> + Sync,
{
    check_runs(runs, 2)?;
    top_group_size(q, n)?;
    let values = per_run(runs, |r| {
        let seed = derive_run_seed(master_seed, r);
        let smp = make(seed).map_err(|e| mc_err(r, n, e))?;
        Ok(kappa_hat_q(&smp, q).map_err(|e| mc_err(r, n, e))?.value)
    })?;
    Ok(summarize(values, n, q))
}

/// Distribution of the naive share estimator across `runs` independent
/// samples of size n.
pub fn mc_kappa_bias(
    spec: &DistributionSpec,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> Result<McSummary> {
    mc_kappa_bias_impl(|seed| sample(spec, n, seed), q, n, runs, master_seed)
}

struct SuperAddRun {
    kappa_full: f64,
    kappa_parts: Vec<f64>,
    sum_shares: Vec<f64>,
}

fn mc_superadditivity_impl<F>(
    make: F,
    identical_laws: bool,
    sizes: &[usize],
    q: f64,
    runs: usize,
) -> Result<SuperAddRecord>
where
    F: Fn(u64, usize) -> Result<Sample> + Sync,
{
    check_runs(runs, 2)?;
    if sizes.is_empty() {
        return Err(Error::Invalid("superadditivity needs at least one part".into()));
    }
    for &sz in sizes {
        top_group_size(q, sz)?;
    }
    let n_total: usize = sizes.iter().sum();

    let outs: Vec<SuperAddRun> = per_run(runs, |r| {
        let mut merged = Vec::with_capacity(n_total);
        let mut kappa_parts = Vec::with_capacity(sizes.len());
        let mut sums = Vec::with_capacity(sizes.len());
        for (part, &sz) in sizes.iter().enumerate() {
            let smp = make(r, part).map_err(|e| mc_err(r, sz, e))?;
            kappa_parts.push(kappa_hat_q(&smp, q).map_err(|e| mc_err(r, sz, e))?.value);
            sums.push(smp.values().iter().sum::<f64>());
            merged.extend_from_slice(smp.values());
        }
        let merged = Sample::from_values(merged).map_err(|e| mc_err(r, n_total, e))?;
        let kappa_full = kappa_hat_q(&merged, q).map_err(|e| mc_err(r, n_total, e))?.value;
        let total: f64 = sums.iter().sum();
        Ok(SuperAddRun {
            kappa_full,
            kappa_parts,
            sum_shares: sums.iter().map(|&s| s / total).collect(),
        })
    })?;

    let m = sizes.len();
    let weights: Vec<f64> = if identical_laws {
        sizes.iter().map(|&sz| sz as f64 / n_total as f64).collect()
    } else {
        // Expected share of the total contributed by each part,
        // estimated from the same runs.
        (0..m)
            .map(|i| mean_of(&outs.iter().map(|o| o.sum_shares[i]).collect::<Vec<_>>()))
            .collect()
    };

    let e_kappa_full = mean_of(&outs.iter().map(|o| o.kappa_full).collect::<Vec<_>>());
    let weighted_avg_parts: f64 = (0..m)
        .map(|i| {
            weights[i] * mean_of(&outs.iter().map(|o| o.kappa_parts[i]).collect::<Vec<_>>())
        })
        .sum();
    let gap = e_kappa_full - weighted_avg_parts;

    // Paired differences share the run-to-run noise of both sides, so
    // their spread is the right scale for the gap.
    let diffs: Vec<f64> = outs
        .iter()
        .map(|o| {
            let part_avg: f64 = (0..m).map(|i| weights[i] * o.kappa_parts[i]).sum();
            o.kappa_full - part_avg
        })
        .collect();
    let diff_std = sample_std(&diffs, mean_of(&diffs));
    let z_score = if diff_std == 0.0 {
        0.0
    } else {
        gap / (diff_std / (runs as f64).sqrt())
    };

    Ok(SuperAddRecord {
        sizes: sizes.to_vec(),
        q,
        runs,
        e_kappa_full,
        weighted_avg_parts,
        gap,
        z_score,
        identical_laws,
    })
}

/// Merge-versus-parts experiment: draws each part from its spec,
/// estimates the share on every part and on the merged sample, and
/// reports how much the merged expectation exceeds the weighted
/// average of the parts. Parts drawn from one common spec are weighted
/// n_i/n; heterogeneous parts by their mean share of the merged total.
pub fn mc_superadditivity(
    specs: &[DistributionSpec],
    sizes: &[usize],
    q: f64,
    runs: usize,
    master_seed: u64,
) -> Result<SuperAddRecord> {
    if specs.is_empty() || specs.len() != sizes.len() {
        return Err(Error::Invalid(format!(
            "specs and sizes must have equal nonzero length, got {} and {}",
            specs.len(),
            sizes.len()
        )));
    }
    let identical = specs.windows(2).all(|w| w[0] == w[1]);
    mc_superadditivity_impl(
        |r, part| {
            let run_seed = derive_run_seed(master_seed, r);
            let part_seed = derive_run_seed(run_seed, part as u64);
            sample(&specs[part], sizes[part], part_seed)
        },
        identical,
        sizes,
        q,
        runs,
    )
}

/// Mean frozen-threshold share across a grid of sample sizes, for
/// watching the slow climb toward the population value. Sizes must be
/// strictly increasing and at least three.
pub fn mc_monotone_convergence(
    spec: &DistributionSpec,
    h: f64,
    sizes: &[usize],
    runs: usize,
    master_seed: u64,
) -> Result<ConvergenceResult> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Domain {
            name: "h",
            constraint: "> 0",
            value: h,
        });
    }
    if sizes.len() < 3 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "size grid must be strictly increasing with at least 3 sizes".into(),
        ));
    }
    check_runs(runs, 2)?;
    let mut points = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let base = derive_run_seed(master_seed, si as u64);
        let values = per_run(runs, |r| {
            let seed = derive_run_seed(base, r);
            let smp = sample(spec, n, seed).map_err(|e| mc_err(r, n, e))?;
            Ok(kappa_hat_h(&smp, h).map_err(|e| mc_err(r, n, e))?.value)
        })?;
        points.push(ConvergencePoint {
            n,
            mean_kappa_h: mean_of(&values),
        });
    }
    Ok(ConvergenceResult {
        h,
        runs,
        points,
        population_kappa_h: population_kappa_h(spec, h),
    })
}

/// Least-squares fit of ln(bias) against ln(n). Needs at least three
/// points with distinct sizes and strictly positive biases.
pub fn fit_bias_scaling(points: &[(usize, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let mut seen: Vec<usize> = points.iter().map(|&(n, _)| n).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invalid("scaling fit points must have distinct n".into()));
    }
    for &(n, bias) in points {
        if !bias.is_finite() || bias <= 0.0 {
            return Err(Error::NonPositiveBias { n, bias });
        }
        if n == 0 {
            return Err(Error::Count {
                name: "n",
                constraint: ">= 1",
                value: n,
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, b)| b.ln()).collect();
    let xbar = mean_of(&xs);
    let ybar = mean_of(&ys);
    let sxx: f64 = xs.iter().map(|&x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().map(|&y| (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ScalingFit {
        c_hat: intercept.exp(),
        exponent_hat: -slope,
        r_squared,
        points: points.to_vec(),
    })
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| f64::total_cmp(&values[a], &values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 * 0.5 + 1.0;
        for &id in &idx[i..=j] {
            ranks[id] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson_of(x: &[f64], y: &[f64]) -> Option<f64> {
    let xbar = mean_of(x);
    let ybar = mean_of(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - xbar) * (a - xbar);
        syy += (b - ybar) * (b - ybar);
        sxy += (a - xbar) * (b - ybar);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

fn mc_kappa_sum_dependence_impl<F>(
    make: F,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> Result<CorrRecord>
where
    F: Fn(u64) -> Result<Sample> + Sync,
{
    check_runs(runs, 100)?;
    top_group_size(q, n)?;
    let pairs: Vec<(f64, f64)> = per_run(runs, |r| {
        let seed = derive_run_seed(master_seed, r);
        let smp = make(seed).map_err(|e| mc_err(r, n, e))?;
        let kappa = kappa_hat_q(&smp, q).map_err(|e| mc_err(r, n, e))?.value;
        Ok((smp.values().iter().sum::<f64>(), kappa))
    })?;
    let sums: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let kappas: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    let pearson = pearson_of(&sums, &kappas);
    let spearman = pearson_of(&average_ranks(&sums), &average_ranks(&kappas));
    let degenerate = pearson.is_none() || spearman.is_none();
    let pearson = pearson.unwrap_or(0.0);
    let spearman = spearman.unwrap_or(0.0);

    // Decile buckets by total, smallest first; bucket i of b covers
    // sorted positions [i*runs/b, (i+1)*runs/b).
    let mut order: Vec<usize> = (0..runs).collect();
    order.sort_unstable_by(|&a, &b| f64::total_cmp(&sums[a], &sums[b]));
    let buckets = 10;
    let mut bucket_means = Vec::with_capacity(buckets);
    for b in 0..buckets {
        let lo = b * runs / buckets;
        let hi = (b + 1) * runs / buckets;
        let vals: Vec<f64> = order[lo..hi].iter().map(|&i| kappas[i]).collect();
        bucket_means.push((b + 1, mean_of(&vals)));
    }

    Ok(CorrRecord {
        runs,
        pearson,
        spearman,
        spearman_z: spearman * ((runs - 1) as f64).sqrt(),
        bucket_means,
        degenerate,
    })
}

/// Joint behavior of a sample's total and its estimated top share
/// across repeated draws. Needs at least 100 runs for the decile
/// buckets to mean anything.
pub fn mc_kappa_sum_dependence(
    spec: &DistributionSpec,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> Result<CorrRecord> {
    mc_kappa_sum_dependence_impl(|seed| sample(spec, n, seed), q, n, runs, master_seed)
}

/// Monte Carlo mean of the naive estimator on mixture draws, next to
/// the closed-form mixture share and its two common understatements:
/// the weighted average of component shares and the share at the
/// average index.
pub fn mc_mixture_bias(
    mix: &MixtureSpec,
    q: f64,
    n: usize,
    runs: usize,
    master_seed: u64,
) -> Result<MixtureBiasRecord> {
    let spec = DistributionSpec::Mixture(mix.clone());
    let summary = mc_kappa_bias(&spec, q, n, runs, master_seed)?;
    let population = kappa_mixture(mix, q)?;
    let mut component_avg = 0.0;
    let mut mean_alpha = 0.0;
    for (&w, a) in mix.weights().iter().zip(mix.alphas()) {
        component_avg += w * kappa_pareto(a, q)?;
        mean_alpha += w * a;
    }
    Ok(MixtureBiasRecord {
        n,
        q,
        runs,
        mc_mean: summary.mean,
        population_mixture_kappa: population,
        component_avg_kappa: component_avg,
        mean_alpha_kappa: kappa_pareto(mean_alpha, q)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{theoretical_threshold, ParetoParams};
    use rand::{Rng, SeedableRng};

    fn pareto_spec(alpha: f64) -> DistributionSpec {
        DistributionSpec::Pareto(ParetoParams::new(alpha, 1.0).unwrap())
    }

    #[test]
    fn run_seeds_are_deterministic_and_distinct() {
        assert_eq!(derive_run_seed(7, 0), derive_run_seed(7, 0));
        assert_ne!(derive_run_seed(7, 0), derive_run_seed(7, 1));
        assert_ne!(derive_run_seed(7, 0), derive_run_seed(8, 0));
    }

    #[test]
    fn run_seeds_never_collide_within_an_experiment() {
        for &master in &[0u64, 0xDEAD_BEEF, u64::MAX] {
            let mut seeds: Vec<u64> = (0..1_000_000).map(|r| derive_run_seed(master, r)).collect();
            seeds.sort_unstable();
            assert!(seeds.windows(2).all(|w| w[0] != w[1]), "collision under master {master}");
        }
    }

    #[test]
    fn run_seeds_differ_across_neighboring_masters() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000_000 {
            let s: u64 = rng.random();
            let i: u64 = rng.random_range(0..1_000_000);
            assert_ne!(derive_run_seed(s, i), derive_run_seed(s.wrapping_add(1), i));
        }
    }

    #[test]
    fn summary_statistics_hand_values() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean_of(&v), 2.5);
        assert_eq!(median_of(&v), 2.5);
        assert!((sample_std(&v, 2.5) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(median_of(&[5.0, 1.0, 3.0]), 3.0);
    }

    // Zero-variance samples: every run lands on exactly the count
    // fraction, spread collapses to zero. q*n is kept dyadic so the
    // equalities are exact rather than within-epsilon.
    #[test]
    fn bias_on_constant_samples_is_the_count_fraction() {
        let summary = mc_kappa_bias_impl(
            |_| Sample::from_values(vec![7.0; 100]),
            0.25,
            100,
            16,
            3,
        )
        .unwrap();
        assert_eq!(summary.mean, 0.25);
        assert_eq!(summary.median, 0.25);
        assert_eq!(summary.std, 0.0);
    }

    #[test]
    fn naive_estimator_underestimates_fat_tail_share() {
        let summary = mc_kappa_bias(&pareto_spec(1.1), 0.01, 1000, 400, 11).unwrap();
        assert!(summary.mean < 0.657933, "mean = {}", summary.mean);
        assert!(summary.mean > 0.3, "mean = {}", summary.mean);
        assert!(summary.std > 0.0);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| mc_kappa_bias(&pareto_spec(1.5), 0.05, 500, 64, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn single_part_merge_is_a_fixed_point() {
        let rec = mc_superadditivity(&[pareto_spec(1.3)], &[400], 0.05, 50, 7).unwrap();
        assert_eq!(rec.gap, 0.0);
        assert_eq!(rec.z_score, 0.0);
        assert!(rec.identical_laws);
    }

    #[test]
    fn merge_of_constant_parts_shows_no_gap() {
        let rec = mc_superadditivity_impl(
            |_, _| Sample::from_values(vec![2.0; 200]),
            true,
            &[200, 200],
            0.05,
            20,
        )
        .unwrap();
        assert!(rec.gap.abs() < 1e-15, "gap = {}", rec.gap);
    }

    #[test]
    fn merged_fat_tail_sample_beats_its_parts() {
        let spec = pareto_spec(1.1);
        let rec =
            mc_superadditivity(&[spec.clone(), spec], &[200, 200], 0.05, 500, 2024).unwrap();
        assert!(rec.identical_laws);
        assert!(rec.gap > 0.0, "gap = {}", rec.gap);
        assert!(rec.z_score > 2.0, "z = {}", rec.z_score);
    }

    #[test]
    fn mixed_law_merge_uses_sum_share_weights() {
        let rec = mc_superadditivity(
            &[pareto_spec(1.3), pareto_spec(2.0)],
            &[300, 300],
            0.05,
            300,
            5,
        )
        .unwrap();
        assert!(!rec.identical_laws);
        assert!(rec.gap > -0.02, "gap = {}", rec.gap);
        assert!(rec.e_kappa_full > 0.0 && rec.e_kappa_full < 1.0);
    }

    #[test]
    fn superadditivity_validates_inputs() {
        assert!(mc_superadditivity(&[], &[], 0.05, 10, 1).is_err());
        assert!(mc_superadditivity(&[pareto_spec(1.3)], &[100, 100], 0.05, 10, 1).is_err());
        // Part too small for the quantile.
        assert!(
            mc_superadditivity(&[pareto_spec(1.3)], &[10], 0.05, 10, 1).is_err()
        );
    }

    #[test]
    fn frozen_threshold_means_climb_with_sample_size() {
        let spec = pareto_spec(1.1);
        let p = ParetoParams::new(1.1, 1.0).unwrap();
        let h = theoretical_threshold(&p, 0.01).unwrap();
        let res = mc_monotone_convergence(&spec, h, &[500, 2000, 8000], 400, 31).unwrap();
        let pop = res.population_kappa_h.unwrap();
        assert!((pop - 0.657933).abs() < 1e-5);
        for w in res.points.windows(2) {
            assert!(
                w[1].mean_kappa_h > w[0].mean_kappa_h - 0.02,
                "means fell: {w:?}"
            );
        }
        for p in &res.points {
            assert!(p.mean_kappa_h < pop, "point {p:?} at or above population");
        }
    }

    #[test]
    fn threshold_below_support_floor_gives_full_share() {
        let res = mc_monotone_convergence(&pareto_spec(1.5), 0.5, &[10, 20, 30], 8, 3).unwrap();
        assert_eq!(res.population_kappa_h, Some(1.0));
        for p in &res.points {
            assert_eq!(p.mean_kappa_h, 1.0);
        }
    }

    #[test]
    fn convergence_validates_grid() {
        let spec = pareto_spec(1.5);
        assert!(mc_monotone_convergence(&spec, 2.0, &[10, 20], 8, 3).is_err());
        assert!(mc_monotone_convergence(&spec, 2.0, &[10, 20, 20], 8, 3).is_err());
        assert!(mc_monotone_convergence(&spec, 0.0, &[10, 20, 30], 8, 3).is_err());
    }

    #[test]
    fn scaling_fit_recovers_exact_power_law() {
        let points: Vec<(usize, f64)> = [1000usize, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| (n, 2.0 * (n as f64).powf(-0.1)))
            .collect();
        let fit = fit_bias_scaling(&points).unwrap();
        assert!((fit.c_hat - 2.0).abs() < 1e-10, "c = {}", fit.c_hat);
        assert!((fit.exponent_hat - 0.1).abs() < 1e-12, "b = {}", fit.exponent_hat);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert_eq!(fit.points, points);
    }

    #[test]
    fn scaling_fit_rejects_bad_inputs() {
        assert!(matches!(
            fit_bias_scaling(&[(10, 0.5), (100, 0.2)]),
            Err(Error::TooFewPoints(2))
        ));
        assert!(matches!(
            fit_bias_scaling(&[(10, 0.5), (100, -0.2), (1000, 0.1)]),
            Err(Error::NonPositiveBias { .. })
        ));
        assert!(fit_bias_scaling(&[(10, 0.5), (10, 0.2), (1000, 0.1)]).is_err());
    }

    #[test]
    fn rank_helper_averages_ties() {
        let r = average_ranks(&[10.0, 20.0, 20.0, 5.0]);
        assert_eq!(r, vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn constant_series_is_flagged_degenerate() {
        let rec = mc_kappa_sum_dependence_impl(
            |_| Sample::from_values(vec![3.0; 50]),
            0.1,
            50,
            100,
            1,
        )
        .unwrap();
        assert!(rec.degenerate);
        assert_eq!(rec.pearson, 0.0);
        assert_eq!(rec.spearman, 0.0);
        assert_eq!(rec.spearman_z, 0.0);
    }

    #[test]
    fn bigger_totals_come_with_bigger_shares() {
        let rec = mc_kappa_sum_dependence(&pareto_spec(1.1), 0.01, 2000, 200, 8).unwrap();
        assert!(!rec.degenerate);
        assert!(rec.spearman > 0.0, "spearman = {}", rec.spearman);
        assert_eq!(rec.bucket_means.len(), 10);
        let bottom = rec.bucket_means.first().unwrap().1;
        let top = rec.bucket_means.last().unwrap().1;
        assert!(top > bottom, "top {top} <= bottom {bottom}");
        assert!(mc_kappa_sum_dependence(&pareto_spec(1.1), 0.01, 2000, 99, 8).is_err());
    }

    #[test]
    fn mixture_bias_orders_the_three_views() {
        let mix = MixtureSpec::new(vec![0.5, 0.5], vec![1.2, 1.8]).unwrap();
        let rec = mc_mixture_bias(&mix, 0.01, 1000, 300, 17).unwrap();
        assert!(rec.mc_mean < rec.population_mixture_kappa);
        assert!(rec.population_mixture_kappa >= rec.component_avg_kappa - 1e-12);
        assert!(rec.component_avg_kappa >= rec.mean_alpha_kappa - 1e-12);
    }
}

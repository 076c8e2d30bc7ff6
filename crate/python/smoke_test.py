#!/usr/bin/env python3
"""Smoke test for the kappa_lab_py extension module.

Loads the shared library straight out of target/ (no install step),
then cross-checks a handful of results against closed forms and a
pure-Python reimplementation of the naive estimator.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libkappa_lab_py.so", "kappa_lab_py.so", "libkappa_lab_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("no built extension found; run `cargo build -p kappa-lab-py` first")
    stage = Path(tempfile.mkdtemp(prefix="kappa_lab_py_"))
    shutil.copy2(built, stage / "kappa_lab_py.so")
    sys.path.insert(0, str(stage))
    import kappa_lab_py

    return kappa_lab_py


def approx(a, b, tol):
    return abs(a - b) <= tol


def main():
    kl = load_module()

    # Closed form against the published population share.
    k = kl.kappa_pareto(1.1, 0.01)
    assert approx(k, 0.657933, 1e-6), k
    print(f"ok closed form: kappa_pareto(1.1, 0.01) = {k:.7f}")

    # Domain errors surface as ValueError.
    try:
        kl.kappa_pareto(0.9, 0.01)
    except ValueError as e:
        assert "alpha" in str(e), e
        print(f"ok domain error: {e}")
    else:
        sys.exit("alpha <= 1 should have raised")

    # Sampling is deterministic in the seed.
    spec = kl.DistributionSpec.pareto(1.5)
    xs = kl.sample(spec, 200, 42)
    ys = kl.sample(spec, 200, 42)
    zs = kl.sample(spec, 200, 43)
    assert xs == ys
    assert xs != zs
    assert min(xs) >= 1.0
    print(f"ok sampling: 200 draws, repr {spec!r}")

    # Naive estimator against a pure-Python brute force.
    q = 0.05
    est = kl.kappa_hat_q(xs, q)
    top = sorted(xs, reverse=True)[: int(q * len(xs))]
    brute = sum(top) / sum(xs)
    assert est.value == brute, (est.value, brute)
    assert est.kind == "naive_q"
    assert est.n == len(xs)
    print(f"ok naive estimator: kappa_hat_q = {est.value:.6f} (exact match)")

    # Frozen-threshold estimator agrees with a direct tally.
    h = kl.theoretical_threshold(1.5, 0.05)
    fro = kl.kappa_hat_h(xs, h)
    direct = sum(x for x in sorted(xs, reverse=True) if x > h) / sum(xs)
    assert approx(fro.value, direct, 1e-15), (fro.value, direct)
    print(f"ok frozen threshold: kappa_hat_h = {fro.value:.6f} at h = {h:.4f}")

    # Tail fit lands near the true index on a large sample.
    big = kl.sample(spec, 20_000, 7)
    fit = kl.hill_estimator(big)
    assert approx(fit.alpha_hat, 1.5, 0.15), fit.alpha_hat
    assert fit.method == "hill"
    print(f"ok tail fit: {fit!r}")

    # Run seeds are deterministic and spread out.
    seeds = {kl.derive_run_seed(99, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert kl.derive_run_seed(99, 0) == kl.derive_run_seed(99, 0)
    print("ok run seeds: 1000 distinct, reproducible")

    # A small bias experiment sits below the population share.
    pop = kl.kappa_pareto(1.5, 0.02)
    summary = kl.mc_kappa_bias(spec, 0.02, 500, 300, 11)
    assert summary.mean < pop, (summary.mean, pop)
    assert summary.std > 0.0
    again = kl.mc_kappa_bias(spec, 0.02, 500, 300, 11)
    assert summary.mean == again.mean
    print(f"ok bias run: mean {summary.mean:.4f} < population {pop:.4f}")

    # Mixture closed form beats the average of component shares.
    mix = kl.kappa_mixture([0.5, 0.5], [1.1, 2.0], 0.01)
    avg = 0.5 * kl.kappa_pareto(1.1, 0.01) + 0.5 * kl.kappa_pareto(2.0, 0.01)
    assert mix >= avg - 1e-12, (mix, avg)
    assert not math.isnan(mix)
    print(f"ok mixture: kappa {mix:.6f} >= component average {avg:.6f}")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()

"""Built-in verification suites, exposed through ``adaptive-mls selftest``.

Each suite is independent and prints one PASS/FAIL line.  The optional
``corrupt_indicators`` hook deliberately equalizes the smoothness
indicators before the suppression suite runs; it exists as a negative
control, proving the suite actually detects a broken adaptive blend.
"""

from __future__ import annotations

import time

import numpy as np

from .kernels import kernel_from_name
from .mls import (NodeSet, Samples, determinant_coefficients_oracle,
                  mls_coefficients)
from .partition import PUConfig, build_cover, weno_weights

__all__ = ["run_selftest"]


def _suite_kernels():
    grid = np.linspace(0.0, 1.2, 2001)
    for name in ("G", "IMQ", "M0", "M2", "M4", "W0", "W2", "W4"):
        kern = kernel_from_name(name)
        if abs(kern(0.0) - 1.0) > 1e-15:
            return False, f"{name}: w(0) != 1"
        vals = kern(grid * kern.effective_radius if kern.is_compact else grid * 25.0)
        if np.any(np.diff(vals) > 1e-15):
            return False, f"{name}: not nonincreasing"
        r = kern.effective_radius
        if kern(r) != 0.0 or kern(r * 1.5) != 0.0:
            return False, f"{name}: not zero beyond effective radius"
    return True, "8 kernels"


def _suite_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n = rng.integers(3, 7)
        degree = int(rng.integers(0, 3))
        nodes = np.sort(rng.uniform(-1.0, 1.0, n))
        while np.min(np.diff(nodes)) < 0.05:
            nodes = np.sort(rng.uniform(-1.0, 1.0, n))
        weights = rng.uniform(0.1, 2.0, n)
        x = rng.uniform(-1.0, 1.0)
        direct = mls_coefficients(x, nodes, weights, degree)
        oracle = determinant_coefficients_oracle(x, nodes, weights, degree)
        worst = max(worst, float(np.max(np.abs(direct - oracle))))
    ok = worst <= 1e-10
    return ok, f"100 random instances, max deviation {worst:.2e}"


def _suite_unity(cover_builder):
    cover = cover_builder("sin", 2)
    xs = np.linspace(-3.0, 3.0, 1001)
    r = cover.evaluate_detailed(xs)
    theta_sum = np.bincount(r.pair_point, weights=r.theta, minlength=xs.size)
    beta_sum = np.bincount(r.pair_point, weights=r.beta, minlength=xs.size)
    err = max(float(np.max(np.abs(theta_sum - 1.0))),
              float(np.max(np.abs(beta_sum - 1.0))))
    bounded = (r.theta.min() >= 0 and r.theta.max() <= 1 + 1e-12
               and r.beta.min() >= 0 and r.beta.max() <= 1 + 1e-12)
    ok = err <= 1e-12 and bounded
    return ok, f"max |sum - 1| = {err:.2e}"


def _suite_reproduction(cover_builder):
    rng = np.random.default_rng(7)
    xs = np.linspace(-3.0, 3.0, 501)
    worst = 0.0
    for degree in (1, 2, 3):
        coeffs = rng.uniform(-1.0, 1.0, degree + 1)
        poly = np.polynomial.Polynomial(coeffs)
        cover = cover_builder(poly, degree)
        vlin, vnl, _ = cover.evaluate_many(xs)
        exact = poly(xs)
        scale = 1.0 + np.abs(exact)
        worst = max(worst, float(np.max(np.abs(vlin - exact) / scale)),
                    float(np.max(np.abs(vnl - exact) / scale)))
    ok = worst <= 1e-9
    return ok, f"degrees 1-3, max relative error {worst:.2e}"


def _suite_suppression(cover_builder, corrupt):
    beta, fallback = weno_weights([0.5, 0.5], [0.0, 1.0], t=4.0, eps=1e-14)
    if fallback or beta[1] > 1e-13:
        return False, f"synthetic two-subdomain limit: beta = {beta[1]:.2e}"

    step = lambda x: np.where(x <= 0.2, 0.0, 1.0)
    cover = cover_builder(step, 2)
    if corrupt:
        cover._indicators[:] = 1.0  # negative-control hook
    vlin, vnl, _ = cover.evaluate_many(np.linspace(-1.0, 1.0, 1001))
    lin_over = max(float(vlin.max()) - 1.0, -float(vlin.min()))
    nl_over = max(float(vnl.max()) - 1.0, -float(vnl.min()))
    if lin_over <= 1e-3:
        return False, f"step data: expected visible linear overshoot, got {lin_over:.2e}"
    ok = nl_over <= 1e-8
    return ok, f"step overshoot {lin_over:.2e} linear -> {nl_over:.2e} adaptive"


def run_selftest(print_fn=print, corrupt_indicators: bool = False) -> bool:
    """Run all suites; returns True when everything passes."""

    def cover_builder(func, degree):
        nodes = -3.0 + 6.0 * np.arange(129) / 128.0
        values = np.sin(np.pi * nodes) if func == "sin" else func(nodes)
        samples = Samples(NodeSet.from_points(nodes), np.asarray(values, float))
        return build_cover(samples, PUConfig(degree=degree, kernel=kernel_from_name("W2"),
                                             gamma=0.15))

    suites = [
        ("kernel-sanity", lambda: _suite_kernels()),
        ("determinant-oracle", lambda: _suite_oracle()),
        ("partition-of-unity", lambda: _suite_unity(cover_builder)),
        ("polynomial-reproduction", lambda: _suite_reproduction(cover_builder)),
        ("adaptive-suppression", lambda: _suite_suppression(cover_builder, corrupt_indicators)),
    ]
    all_ok = True
    for name, fn in suites:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing suite is a failing suite
            ok, detail = False, f"error: {exc}"
        elapsed = time.perf_counter() - start
        all_ok &= ok
        print_fn(f"{'PASS' if ok else 'FAIL'}  {name:<26} {detail} [{elapsed:.2f}s]")
    return all_ok

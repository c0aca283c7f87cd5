"""Partition-of-unity blending of local moving least squares fits.

A cover is a family of overlapping subdomains, each an open interval around
a center whose radius is ``h * effective_radius / gamma``.  Every subdomain
carries an ordinary least squares fit of its member samples and a smoothness
indicator: the mean absolute residual of that fit.  Indicators are O(h^(d+1))
on smooth data and O(1) across a jump, which is what lets the nonlinear
blend demote jump-contaminated subdomains.

At an evaluation point x, each active subdomain contributes a locally
weighted polynomial fit p_k(x).  The linear operator blends them with the
partition-of-unity weights theta_k; the nonlinear operator reweights by
1/(I_k^t + eps) before normalizing, which drives the weight of any
subdomain whose data crosses a discontinuity to O((h^(d+1)/I)^t).

Cover construction is single-shot; afterwards the cover is immutable and
evaluation at distinct points is pure, so batches may be processed
concurrently (see ``ADAPTIVE_MLS_THREADS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._linalg import lstsq_batch
from .kernels import WeightKernel
from .mls import LocalPolynomial, RankDeficientError, Samples

__all__ = [
    "CoverageGapError",
    "TooFewMembersError",
    "UncoveredPointError",
    "PUConfig",
    "Subdomain",
    "EvalBreakdown",
    "BatchEvaluation",
    "GuardReport",
    "Cover",
    "build_cover",
    "weno_weights",
    "convergence_guard",
    "resolve_workers",
]

_PAIR_CHUNK = 8192
_POINT_CHUNK = 1024


class CoverageGapError(ValueError):
    """The union of subdomains misses part of the requested domain."""

    def __init__(self, interval):
        self.interval = interval
        super().__init__(f"cover leaves [{interval[0]!r}, {interval[1]!r}] uncovered")


class TooFewMembersError(ValueError):
    """A subdomain holds too few data sites for the requested degree."""

    def __init__(self, index, center, count, degree):
        self.index, self.center, self.count = index, center, count
        super().__init__(
            f"subdomain {index} centered at {center!r} has {count} members; "
            f"degree {degree} needs more than {degree + 1}")


class UncoveredPointError(ValueError):
    """No subdomain is active at the evaluation point."""

    def __init__(self, x):
        self.x = x
        super().__init__(f"no active subdomain at x={x!r}")


@dataclass(frozen=True)
class PUConfig:
    """Parameters of the partition-of-unity operator.

    ``gamma`` may be a scalar applied to every center or one value per
    center.  ``centers=None`` uses the data sites; ``domain=None`` spans the
    data.  ``t`` and ``eps_weno`` control the nonlinear reweighting.
    """

    degree: int
    kernel: WeightKernel
    gamma: float | np.ndarray = 0.15
    centers: np.ndarray | None = None
    domain: tuple[float, float] | None = None
    t: float = 4.0
    eps_weno: float = 1e-14

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.eps_weno <= 0:
            raise ValueError("eps_weno must be positive")
        if np.any(np.asarray(self.gamma, dtype=float) <= 0):
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class Subdomain:
    index: int
    center: float
    gamma: float
    member_indices: np.ndarray
    fit: LocalPolynomial
    indicator: float


@dataclass(frozen=True)
class EvalBreakdown:
    """Per-point diagnostic of both operators."""

    x: float
    subdomain_indices: np.ndarray
    delta: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    local_values: np.ndarray
    value_linear: float
    value_nonlinear: float
    weno_fallback: bool


@dataclass(frozen=True)
class BatchEvaluation:
    """Vectorized evaluation result with flat per-(point, subdomain) arrays."""

    points: np.ndarray
    values_linear: np.ndarray
    values_nonlinear: np.ndarray
    weno_fallback: np.ndarray
    pair_point: np.ndarray
    pair_subdomain: np.ndarray
    delta: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    local_values: np.ndarray

    def breakdown(self, i: int) -> EvalBreakdown:
        sel = self.pair_point == i
        return EvalBreakdown(
            x=float(self.points[i]),
            subdomain_indices=self.pair_subdomain[sel],
            delta=self.delta[sel],
            theta=self.theta[sel],
            alpha=self.alpha[sel],
            beta=self.beta[sel],
            local_values=self.local_values[sel],
            value_linear=float(self.values_linear[i]),
            value_nonlinear=float(self.values_nonlinear[i]),
            weno_fallback=bool(self.weno_fallback[i]),
        )


def weno_weights(theta, indicators, t: float, eps: float):
    """Normalized adaptive weights ``alpha_k / sum(alpha)`` with
    ``alpha_k = theta_k / (I_k^t + eps)``.

    Returns ``(beta, fallback)``; when every alpha underflows to zero the
    partition-of-unity weights are returned unchanged and ``fallback`` is
    True.
    """
    th = np.asarray(theta, dtype=float)
    ind = np.asarray(indicators, dtype=float)
    alpha = th / (ind**t + eps)
    total = alpha.sum()
    if total == 0.0:
        return th.copy(), True
    return alpha / total, False


def resolve_workers(workers: int | None = None) -> int:
    """Worker count for batch evaluation.

    ``None`` reads ``ADAPTIVE_MLS_THREADS`` (unset means serial); 0 means
    one worker per CPU, capped at 8.
    """
    if workers is None:
        raw = os.environ.get("ADAPTIVE_MLS_THREADS", "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            return 1
    if workers == 0:
        return min(os.cpu_count() or 1, 8)
    return max(1, int(workers))


class Cover:
    """Immutable partition-of-unity cover over a sample set."""

    def __init__(self, samples: Samples, config: PUConfig):
        self.samples = samples
        self.config = config
        nodes = samples.x
        self._nodes = nodes
        self._values = samples.f
        self.h = samples.node_set.h

        domain = config.domain if config.domain is not None else (nodes[0], nodes[-1])
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise ValueError("domain must be a nonempty interval")

        centers = nodes if config.centers is None else np.asarray(config.centers, dtype=float)
        if centers.ndim != 1 or centers.size == 0:
            raise ValueError("at least one center required")
        if np.any(centers < self.domain[0]) or np.any(centers > self.domain[1]):
            raise ValueError("centers must lie inside the domain")
        gammas = np.broadcast_to(np.asarray(config.gamma, dtype=float), centers.shape).copy()

        order = np.argsort(centers, kind="stable")
        self._centers = centers[order]
        self._gammas = gammas[order]
        self.kernel = config.kernel
        self.degree = int(config.degree)
        self.t = float(config.t)
        self.eps_weno = float(config.eps_weno)

        self._radii = self.h * self.kernel.effective_radius / self._gammas
        self._build_members()
        self._check_coverage()
        self._fit_subdomains()
        self.subdomains = [
            Subdomain(
                index=k,
                center=float(self._centers[k]),
                gamma=float(self._gammas[k]),
                member_indices=np.arange(self._member_lo[k], self._member_hi[k]),
                fit=LocalPolynomial(float(self._centers[k]), self.h, self._fit_coeffs[k]),
                indicator=float(self._indicators[k]),
            )
            for k in range(self._centers.size)
        ]

    # -- construction ---------------------------------------------------------

    def _build_members(self):
        nodes, centers = self._nodes, self._centers
        lo = np.searchsorted(nodes, centers - self._radii, side="right")
        hi = np.searchsorted(nodes, centers + self._radii, side="left")
        # the window edges can disagree with kernel positivity by one ulp
        sel = lo < hi
        w_edge = np.zeros(centers.size)
        w_edge[sel] = self.kernel(
            self._gammas[sel] * np.abs(nodes[np.minimum(lo[sel], nodes.size - 1)] - centers[sel]) / self.h)
        lo = lo + (sel & (w_edge <= 0))
        sel = lo < hi
        w_edge[:] = 0.0
        w_edge[sel] = self.kernel(
            self._gammas[sel] * np.abs(nodes[hi[sel] - 1] - centers[sel]) / self.h)
        hi = hi - (sel & (w_edge <= 0))
        counts = hi - lo
        short = np.nonzero(counts <= self.degree + 1)[0]
        if short.size:
            k = int(short[0])
            raise TooFewMembersError(k, float(self._centers[k]), int(counts[k]), self.degree)
        self._member_lo, self._member_hi = lo, hi

    def _check_coverage(self):
        lefts = self._centers - self._radii
        rights = self._centers + self._radii
        a, b = self.domain
        covered_to = a
        for left, right in zip(lefts, rights):
            if left > covered_to:
                raise CoverageGapError((covered_to, float(left)))
            covered_to = max(covered_to, right)
            if covered_to >= b:
                return
        if covered_to < b:
            raise CoverageGapError((float(covered_to), b))

    def _fit_subdomains(self):
        nodes, values = self._nodes, self._values
        m = self._centers.size
        J = self.degree + 1
        counts = self._member_hi - self._member_lo
        coeffs = np.empty((m, J))
        indicators = np.empty(m)
        order = np.argsort(counts, kind="stable")
        for start in range(0, m, _PAIR_CHUNK):
            ks = order[start:start + _PAIR_CHUNK]
            cnt = counts[ks]
            M = int(cnt.max())
            rel = np.arange(M)
            idx = np.minimum(self._member_lo[ks][:, None] + rel[None, :], nodes.size - 1)
            mask = rel[None, :] < cnt[:, None]
            u = ((nodes[idx] - self._centers[ks][:, None]) / self.h) * mask
            E = np.empty(u.shape + (J,))
            E[:, :, 0] = mask
            for j in range(1, J):
                E[:, :, j] = E[:, :, j - 1] * u
            b = values[idx] * mask
            c, bad = lstsq_batch(E, b)
            if bad.any():
                k = int(ks[np.nonzero(bad)[0][0]])
                raise RankDeficientError(float(self._centers[k]), "degenerate subdomain members")
            resid = (b - np.einsum("kmj,kj->km", E, c)) * mask
            coeffs[ks] = c
            indicators[ks] = np.abs(resid).sum(axis=1) / cnt
        self._fit_coeffs = coeffs
        self._indicators = indicators

    # -- evaluation -----------------------------------------------------------

    @property
    def indicators(self) -> np.ndarray:
        return self._indicators.copy()

    @property
    def n_subdomains(self) -> int:
        return self._centers.size

    def subdomain_radius(self, k: int = 0) -> float:
        return float(self._radii[k])

    def _active_pairs(self, xs: np.ndarray):
        """Flat (point, subdomain) pairs with positive blending weight."""
        P = xs.size
        rmax = self._radii.max()
        klo = np.searchsorted(self._centers, xs - rmax, side="left")
        khi = np.searchsorted(self._centers, xs + rmax, side="right")
        counts = khi - klo
        total = int(counts.sum())
        ppt = np.repeat(np.arange(P), counts)
        offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
        pk = np.arange(total) - np.repeat(offsets, counts) + np.repeat(klo, counts)
        delta = self.kernel(self._gammas[pk] * np.abs(xs[ppt] - self._centers[pk]) / self.h)
        keep = delta > 0
        ppt, pk, delta = ppt[keep], pk[keep], delta[keep]
        dsum = np.bincount(ppt, weights=delta, minlength=P)
        uncovered = np.nonzero(dsum == 0)[0]
        if uncovered.size:
            raise UncoveredPointError(float(xs[uncovered[0]]))
        return ppt, pk, delta, dsum

    def _local_values(self, xs, ppt, pk):
        """p_k(x) for every active pair, via batched SVD least squares."""
        nodes, values = self._nodes, self._values
        J = self.degree + 1
        xp = xs[ppt]
        rad = self._radii[pk]
        gam = self._gammas[pk]
        # members with nonzero weight at x lie in the window intersection
        plo = np.maximum(self._member_lo[pk], np.searchsorted(nodes, xp - rad, side="right"))
        phi = np.minimum(self._member_hi[pk], np.searchsorted(nodes, xp + rad, side="left"))
        cnt = phi - plo
        thin = np.nonzero(cnt < J)[0]
        if thin.size:
            raise RankDeficientError(
                float(xp[thin[0]]), f"{int(cnt[thin[0]])} weighted members for degree {self.degree}")
        c0 = np.empty(ppt.size)
        order = np.argsort(cnt, kind="stable")
        for start in range(0, order.size, _PAIR_CHUNK):
            sel = order[start:start + _PAIR_CHUNK]
            n_sel = cnt[sel]
            M = int(n_sel.max())
            rel = np.arange(M)
            idx = np.minimum(plo[sel][:, None] + rel[None, :], nodes.size - 1)
            mask = rel[None, :] < n_sel[:, None]
            xm = nodes[idx]
            xc = xp[sel]
            w = self.kernel(gam[sel][:, None] * np.abs(xc[:, None] - xm) / self.h) * mask
            sw = np.sqrt(w)
            u = (xm - xc[:, None]) / self.h
            A = np.empty(u.shape + (J,))
            A[:, :, 0] = sw
            for j in range(1, J):
                A[:, :, j] = A[:, :, j - 1] * u
            b = sw * values[idx]
            c, bad = lstsq_batch(A, b)
            if bad.any():
                raise RankDeficientError(float(xc[np.nonzero(bad)[0][0]]))
            c0[sel] = c[:, 0]
        return c0

    def evaluate_detailed(self, xs) -> BatchEvaluation:
        """Evaluate both operators at every point, keeping pair diagnostics."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        P = xs.size
        ppt, pk, delta, dsum = self._active_pairs(xs)
        theta = delta / dsum[ppt]
        c0 = self._local_values(xs, ppt, pk)
        alpha = theta / (self._indicators[pk] ** self.t + self.eps_weno)
        asum = np.bincount(ppt, weights=alpha, minlength=P)
        fallback = asum == 0.0
        beta = np.where(fallback[ppt], theta, alpha / np.where(fallback, 1.0, asum)[ppt])
        vlin = np.bincount(ppt, weights=theta * c0, minlength=P)
        vnl = np.bincount(ppt, weights=beta * c0, minlength=P)
        return BatchEvaluation(
            points=xs, values_linear=vlin, values_nonlinear=vnl,
            weno_fallback=fallback, pair_point=ppt, pair_subdomain=pk,
            delta=delta, theta=theta, alpha=alpha, beta=beta, local_values=c0)

    def evaluate_many(self, xs, workers: int | None = None):
        """Values of both operators at many points.

        Returns ``(linear, nonlinear, fallback)`` arrays.  Points are
        processed in fixed-size chunks so results do not depend on the
        worker count.
        """
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        chunks = [xs[i:i + _POINT_CHUNK] for i in range(0, xs.size, _POINT_CHUNK)]
        if not chunks:
            empty = np.empty(0)
            return empty, empty.copy(), np.empty(0, dtype=bool)
        n_workers = resolve_workers(workers)

        def run(chunk):
            r = self.evaluate_detailed(chunk)
            return r.values_linear, r.values_nonlinear, r.weno_fallback

        if n_workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(run, chunks))
        else:
            results = [run(c) for c in chunks]
        vlin = np.concatenate([r[0] for r in results])
        vnl = np.concatenate([r[1] for r in results])
        fb = np.concatenate([r[2] for r in results])
        return vlin, vnl, fb

    def breakdown(self, x: float) -> EvalBreakdown:
        return self.evaluate_detailed([x]).breakdown(0)

    def evaluate_linear(self, x: float):
        """Linear partition-of-unity value at x, with its breakdown."""
        b = self.breakdown(x)
        return b.value_linear, b

    def evaluate_nonlinear(self, x: float):
        """Adaptively reweighted value at x, with its breakdown."""
        b = self.breakdown(x)
        return b.value_nonlinear, b


def build_cover(samples: Samples, config: PUConfig) -> Cover:
    """Construct and validate the partition-of-unity cover."""
    return Cover(samples, config)


@dataclass(frozen=True)
class GuardReport:
    """Where the cover offers at least one smooth active subdomain."""

    points: np.ndarray
    smooth_active: np.ndarray
    threshold: float
    indicator_median: float = field(default=float("nan"))

    @property
    def all_smooth(self) -> bool:
        return bool(self.smooth_active.all())

    @property
    def fraction(self) -> float:
        return float(self.smooth_active.mean())


def convergence_guard(cover: Cover, points=None, threshold: float | None = None) -> GuardReport:
    """Check the accuracy precondition: some active subdomain is smooth.

    A subdomain counts as smooth when its indicator is below ``threshold``
    (default: ten times the median indicator).  Full order of accuracy at a
    point requires at least one smooth active subdomain there; points where
    every active subdomain crosses a discontinuity fail the check.
    """
    if points is None:
        points = np.linspace(cover.domain[0], cover.domain[1], 1001)
    xs = np.atleast_1d(np.asarray(points, dtype=float))
    med = float(np.median(cover._indicators))
    if threshold is None:
        threshold = 10.0 * med
    ppt, pk, _, _ = cover._active_pairs(xs)
    smooth_pair = cover._indicators[pk] <= threshold
    smooth = np.zeros(xs.size, dtype=bool)
    np.logical_or.at(smooth, ppt, smooth_pair)
    return GuardReport(points=xs, smooth_active=smooth, threshold=float(threshold),
                       indicator_median=med)

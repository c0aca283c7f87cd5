"""Weighted and unweighted moving least squares in one dimension.

The central object is the coefficient vector ``C(x)`` with
``Q(f)(x) = sum_i C_i(x) f(x_i)``, obtained from the weighted least squares
fit of a degree-d polynomial in the centered basis ``((t - x)/scale)^j``.
Fits are solved through an orthogonal (SVD) factorization of the
square-root-weighted design matrix rather than normal equations, and the
basis is scaled by the fill distance, so degree-3 problems on fine grids
stay well conditioned.

A brute-force evaluation of the closed-form determinant expansion of the
same coefficients is provided for small problems; it serves as an
independent cross-check of the linear algebra path.

All functions are pure; the data holders are frozen dataclasses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .kernels import WeightKernel

__all__ = [
    "RankDeficientError",
    "NodeSet",
    "Samples",
    "LocalPolynomial",
    "fill_distance",
    "mls_coefficients",
    "determinant_coefficients_oracle",
    "weighted_mls_fit",
    "unweighted_ls_fit",
]

#: relative singular-value cutoff below which a design matrix is declared singular
RANK_RCOND = 1e-12


class RankDeficientError(ValueError):
    """The (weighted) design matrix does not have full column rank."""

    def __init__(self, x, detail=""):
        self.x = x
        msg = f"rank-deficient least squares system at x={x!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def fill_distance(nodes) -> tuple[float, float]:
    """Return ``(h, h_m)``: the largest and smallest consecutive gap.

    Requires at least two strictly increasing nodes.
    """
    arr = np.asarray(nodes, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least two nodes")
    gaps = np.diff(arr)
    if np.any(gaps <= 0):
        raise ValueError("nodes must be strictly increasing")
    return float(gaps.max()), float(gaps.min())


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing data sites with their gap statistics."""

    nodes: np.ndarray
    h: float
    h_m: float

    @classmethod
    def from_points(cls, points) -> "NodeSet":
        arr = np.ascontiguousarray(points, dtype=float)
        h, h_m = fill_distance(arr)
        return cls(nodes=arr, h=h, h_m=h_m)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def quasi_uniformity(self) -> float:
        """Ratio of largest to smallest gap."""
        return self.h / self.h_m

    def __len__(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class Samples:
    """Node set plus one sampled value per node."""

    node_set: NodeSet
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.node_set.nodes.shape:
            raise ValueError("values must align with nodes")

    @classmethod
    def from_data(cls, x, f) -> "Samples":
        """Build samples from possibly unsorted data, rejecting duplicates."""
        xa = np.asarray(x, dtype=float).ravel()
        fa = np.asarray(f, dtype=float).ravel()
        if xa.shape != fa.shape:
            raise ValueError("x and f must have the same length")
        order = np.argsort(xa, kind="stable")
        xa, fa = xa[order], fa[order]
        if xa.size >= 2 and np.any(np.diff(xa) == 0):
            dup = float(xa[np.nonzero(np.diff(xa) == 0)[0][0]])
            raise ValueError(f"duplicate node at x={dup}")
        return cls(node_set=NodeSet.from_points(xa), values=np.ascontiguousarray(fa))

    @property
    def x(self) -> np.ndarray:
        return self.node_set.nodes

    @property
    def f(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True)
class LocalPolynomial:
    """Polynomial in the centered, scaled basis ``u^j`` with ``u = (t - center)/scale``."""

    center: float
    scale: float
    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, t):
        u = (np.asarray(t, dtype=float) - self.center) / self.scale
        val = np.full_like(u, self.coefficients[-1])
        for c in self.coefficients[-2::-1]:
            val = val * u + c
        if val.ndim == 0:
            return float(val)
        return val

    def with_scale(self, scale: float) -> "LocalPolynomial":
        """Re-express the same polynomial with a different basis scale."""
        j = np.arange(self.coefficients.size)
        coeffs = self.coefficients * (scale / self.scale) ** j
        return LocalPolynomial(self.center, scale, coeffs)


def _design_matrix(xs, center, scale, degree):
    u = (np.asarray(xs, dtype=float) - center) / scale
    return u[:, None] ** np.arange(degree + 1)[None, :]


def _svd_solve(A, b, x, detail=""):
    """Least squares via SVD with a hard rank check; returns coefficients."""
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0 or s[-1] <= RANK_RCOND * s[0]:
        raise RankDeficientError(x, detail)
    return Vt.T @ ((U.T @ b) / s)


def _as_node_array(nodes):
    if isinstance(nodes, NodeSet):
        return nodes.nodes, nodes.h
    arr = np.asarray(nodes, dtype=float)
    h, _ = fill_distance(arr)
    return arr, h


def mls_coefficients(x: float, nodes, weights, degree: int) -> np.ndarray:
    """Coefficient functions C_i(x) of the weighted MLS quasi-interpolant.

    ``nodes`` may be a NodeSet or a sorted array; ``weights`` is one
    nonnegative weight per node.  The result satisfies ``sum(C) == 1`` and
    the vanishing-moment conditions ``sum(C_i (x_i - x)^j) == 0`` for
    ``j = 1..degree``, and is independent of the internal basis scale.
    Entries for zero-weight nodes are exactly zero.
    """
    arr, h = _as_node_array(nodes)
    w = np.asarray(weights, dtype=float)
    if w.shape != arr.shape:
        raise ValueError("one weight per node required")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    active = np.nonzero(w > 0)[0]
    if active.size < degree + 1:
        raise RankDeficientError(x, f"{active.size} active nodes for degree {degree}")
    sw = np.sqrt(w[active])
    A = sw[:, None] * _design_matrix(arr[active], x, h, degree)
    # C restricted to active nodes: sqrt(D) times the first row of pinv(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0 or s[-1] <= RANK_RCOND * s[0]:
        raise RankDeficientError(x)
    coeffs = np.zeros_like(w)
    coeffs[active] = sw * (U @ (Vt[:, 0] / s))
    return coeffs


def determinant_coefficients_oracle(x: float, nodes, weights, degree: int) -> np.ndarray:
    """C_i(x) by direct expansion of the closed-form determinant identity.

    Exact but exponentially expensive brute force, restricted to
    ``len(nodes) <= 8`` and ``degree <= 3``; intended as a cross-check of
    :func:`mls_coefficients`, not for production use.
    """
    arr, _ = _as_node_array(nodes)
    w = np.asarray(weights, dtype=float)
    n = arr.size
    if n > 8 or degree > 3:
        raise ValueError("oracle limited to at most 8 nodes and degree 3")
    if w.shape != arr.shape:
        raise ValueError("one weight per node required")
    d = arr - x
    numer = np.zeros(n)
    denom = 0.0
    for idx in itertools.product(range(n), repeat=degree):
        base = 1.0
        for t, it in enumerate(idx, start=1):
            base *= w[it] * d[it] ** t
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                base *= arr[idx[b]] - arr[idx[a]]
        if base == 0.0:
            continue
        # remaining Vandermonde factors pair every i1..id against i0
        factors = w.copy()
        for it in idx:
            factors *= arr[it] - arr
        numer += base * factors
        denom += base * factors.sum()
    if denom == 0.0:
        raise RankDeficientError(x, "determinant expansion vanished")
    return numer / denom


def weighted_mls_fit(x: float, samples: Samples, kernel: WeightKernel,
                     gamma: float, degree: int) -> LocalPolynomial:
    """Fit the local polynomial minimizing the kernel-weighted squared error.

    Weights are ``w(gamma |x - x_i| / h)`` over all samples; the constant
    term of the returned polynomial (centered at x, scaled by h) is the
    quasi-interpolant value at x.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    nodes = samples.x
    h = samples.node_set.h
    w = kernel(gamma * np.abs(x - nodes) / h)
    active = np.nonzero(w > 0)[0]
    if active.size < degree + 1:
        raise RankDeficientError(x, f"{active.size} nodes inside the weight support")
    sw = np.sqrt(w[active])
    A = sw[:, None] * _design_matrix(nodes[active], x, h, degree)
    coeffs = _svd_solve(A, sw * samples.f[active], x)
    return LocalPolynomial(center=float(x), scale=h, coefficients=coeffs)


def unweighted_ls_fit(member_nodes, member_values, center: float, scale: float,
                      degree: int) -> tuple[LocalPolynomial, np.ndarray]:
    """Ordinary least squares polynomial fit over a member set.

    Requires strictly more than ``degree + 1`` members.  Returns the fitted
    polynomial and the residuals ``values - fit(nodes)``.
    """
    xs = np.asarray(member_nodes, dtype=float)
    fs = np.asarray(member_values, dtype=float)
    if xs.size <= degree + 1:
        raise RankDeficientError(center, f"{xs.size} members for degree {degree}")
    E = _design_matrix(xs, center, scale, degree)
    coeffs = _svd_solve(E, fs, center, "degenerate member nodes")
    poly = LocalPolynomial(center=float(center), scale=float(scale), coefficients=coeffs)
    return poly, fs - E @ coeffs

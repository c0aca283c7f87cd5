"""Radial weight functions for distance-weighted least squares.

Every kernel is a nonincreasing function ``w : [0, inf) -> [0, 1]`` with
``w(0) = 1``.  The built-in families:

=========  ================================  ==========  ========
name       w(r)                              smoothness  support
=========  ================================  ==========  ========
G          exp(-r^2)                         C^inf       global
IMQ        (1 + r^2)^(-1/2)                  C^inf       global
M0         exp(-r)                           C^0         global
M2         exp(-r) (1 + r)                   C^2         global
M4         exp(-r) (3 + 3r + r^2) / 3        C^4         global
W0         (1 - r)_+^2                       C^0         [0, 1]
W2         (1 - r)_+^4 (4r + 1)              C^2         [0, 1]
W4         (1 - r)_+^6 (35r^2 + 18r + 3)/3   C^4         [0, 1]
POLY(p,q)  (1 - r^q)^p on [0, 1], else 0     C^(p-1)     [0, 1]
=========  ================================  ==========  ========

Globally supported kernels are truncated to exact zero once the raw value
drops to ``truncation_threshold`` (default 1e-9), which gives every kernel a
finite *effective* support radius.  That radius is what subdomain membership
and neighbour searches use.

Kernels are immutable and their evaluation is pure, so instances can be
shared freely across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["WeightKernel", "kernel_from_name", "KERNEL_NAMES"]

_COMPACT = ("W0", "W2", "W4", "POLY")
_GLOBAL = ("G", "IMQ", "M0", "M2", "M4")
KERNEL_NAMES = _GLOBAL + _COMPACT

#: smoothness class of each family; None means C-infinity
_CONTINUITY = {
    "G": None,
    "IMQ": None,
    "M0": 0,
    "M2": 2,
    "M4": 4,
    "W0": 0,
    "W2": 2,
    "W4": 4,
}

_POLY_RE = re.compile(r"^POLY\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


@dataclass(frozen=True)
class WeightKernel:
    """A radial weight function, identified by family name.

    Parameters
    ----------
    kind : str
        One of ``G, IMQ, M0, M2, M4, W0, W2, W4, POLY``.
    p, q : int, optional
        Exponents for the ``POLY`` family; ignored otherwise.
    truncation_threshold : float
        Raw values at or below this are mapped to exact zero for globally
        supported kernels.  Must be nonnegative.
    """

    kind: str
    p: int | None = None
    q: int | None = None
    truncation_threshold: float = 1e-9

    def __post_init__(self):
        if self.kind not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "POLY":
            if not (isinstance(self.p, int) and isinstance(self.q, int)):
                raise ValueError("POLY kernel needs integer exponents p and q")
            if self.p < 1 or self.q < 1:
                raise ValueError(f"POLY exponents must be positive, got p={self.p}, q={self.q}")
        if self.truncation_threshold < 0:
            raise ValueError("truncation_threshold must be nonnegative")

    # -- basic properties ---------------------------------------------------

    @property
    def is_compact(self) -> bool:
        return self.kind in _COMPACT

    @property
    def continuity(self) -> int | None:
        """Smoothness class as an integer k for C^k, or None for C-infinity."""
        if self.kind == "POLY":
            return self.p - 1
        return _CONTINUITY[self.kind]

    @property
    def name(self) -> str:
        if self.kind == "POLY":
            return f"POLY({self.p},{self.q})"
        return self.kind

    # -- evaluation ----------------------------------------------------------

    def _raw(self, r: np.ndarray) -> np.ndarray:
        """Table formula without truncation; r must already be nonnegative."""
        kind = self.kind
        if kind == "G":
            return np.exp(-(r**2))
        if kind == "IMQ":
            return 1.0 / np.sqrt(1.0 + r**2)
        if kind == "M0":
            return np.exp(-r)
        if kind == "M2":
            return np.exp(-r) * (1.0 + r)
        if kind == "M4":
            return np.exp(-r) * (3.0 + 3.0 * r + r**2) / 3.0
        if kind == "W0":
            t = np.maximum(1.0 - r, 0.0)
            return t * t
        if kind == "W2":
            t = np.maximum(1.0 - r, 0.0)
            t2 = t * t
            return t2 * t2 * (4.0 * r + 1.0)
        if kind == "W4":
            t = np.maximum(1.0 - r, 0.0)
            t2 = t * t
            return t2 * t2 * t2 * (35.0 * r * r + 18.0 * r + 3.0) / 3.0
        # POLY
        return np.where(r <= 1.0, np.maximum(1.0 - r**self.q, 0.0) ** self.p, 0.0)

    def __call__(self, r):
        """Evaluate at radial distance r >= 0 (scalar or array).

        Callers are responsible for passing absolute distances; negative
        input is a contract violation.
        """
        arr = np.asarray(r, dtype=float)
        v = self._raw(arr)
        if not self.is_compact:
            v = np.where(v <= self.truncation_threshold, 0.0, v)
        if arr.ndim == 0:
            return float(v)
        return v

    # alias kept for readability at call sites that hold a kernel variable
    eval = __call__

    # -- support -------------------------------------------------------------

    def support_radius(self) -> tuple[float, float]:
        """Return ``(radius, effective_radius)``.

        ``radius`` is the exact support radius (1.0 for compact kernels,
        ``inf`` otherwise).  ``effective_radius`` is the smallest r at which
        the truncated kernel vanishes; beyond it ``self(r) == 0`` exactly.
        """
        if self.is_compact:
            return 1.0, 1.0
        thr = self.truncation_threshold
        if thr <= 0.0:
            return math.inf, math.inf
        if self.kind == "G":
            r = math.sqrt(-math.log(thr))
        else:
            r = self._bisect_effective_radius(thr)
        # guarantee self(r') == 0 for every r' >= r despite rounding
        for _ in range(64):
            if float(self._raw(np.asarray(r))) <= thr:
                break
            r = math.nextafter(r, math.inf)
        return math.inf, r

    @property
    def effective_radius(self) -> float:
        return self.support_radius()[1]

    def _bisect_effective_radius(self, thr: float) -> float:
        lo, hi = 0.0, 1.0
        for _ in range(4096):
            if float(self._raw(np.asarray(hi))) <= thr:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise ArithmeticError(f"no effective radius found for {self.name}")
        while hi - lo > 1e-12 * max(1.0, lo):
            mid = 0.5 * (lo + hi)
            if float(self._raw(np.asarray(mid))) <= thr:
                hi = mid
            else:
                lo = mid
        return hi


def kernel_from_name(name: str, truncation_threshold: float = 1e-9) -> WeightKernel:
    """Parse a kernel name such as ``"W2"`` or ``"POLY(2,3)"``."""
    text = name.strip().upper()
    m = _POLY_RE.match(text)
    if m:
        return WeightKernel("POLY", p=int(m.group(1)), q=int(m.group(2)),
                            truncation_threshold=truncation_threshold)
    if text in _CONTINUITY:
        return WeightKernel(text, truncation_threshold=truncation_threshold)
    raise ValueError(f"unknown kernel name {name!r}; expected one of "
                     f"{', '.join(_CONTINUITY)} or POLY(p,q)")

"""Benchmark harness: reference grids, test functions, error tables.

Everything here works on the fixed interval [-3, 3] with the 1001-point
evaluation grid z_j = j/1000, matching the convergence study this package
ships as its acceptance battery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .kernels import WeightKernel, kernel_from_name
from .mls import Samples
from .partition import Cover, PUConfig, build_cover

__all__ = [
    "DOMAIN",
    "EVAL_POINTS",
    "GridSpec",
    "uniform_level_grid",
    "random_uniform_grid",
    "test_function",
    "default_gamma",
    "ErrorReport",
    "OvershootReport",
    "run_convergence",
    "run_convergence_both",
    "run_discontinuity",
    "run_discontinuity_both",
    "build_experiment_cover",
    "write_error_report",
    "write_overshoot_reports",
    "write_curve",
]

DOMAIN = (-3.0, 3.0)
JUMP_LOCATION = 2.0 / 3.0
#: z_j = j / 1000, j = 0..1000
EVAL_POINTS = np.arange(1001) / 1000.0

METHODS = ("linear", "nonlinear")


def uniform_level_grid(level: int) -> np.ndarray:
    """Nodes -3 + (3 / 2^(level-1)) * i for i = 0..2^level."""
    if level < 1:
        raise ValueError("level must be at least 1")
    return -3.0 + (3.0 / 2 ** (level - 1)) * np.arange(2**level + 1)


def random_uniform_grid(level: int, seed: int) -> np.ndarray:
    """2^level + 1 nodes: both endpoints plus sorted uniform interior draws.

    The draw is redone per level with a stream keyed by (seed, level), so a
    fixed master seed reproduces every level exactly.
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    rng = np.random.default_rng((seed, level))
    interior = np.sort(rng.uniform(DOMAIN[0], DOMAIN[1], 2**level - 1))
    return np.concatenate(([DOMAIN[0]], interior, [DOMAIN[1]]))


@dataclass(frozen=True)
class GridSpec:
    kind: str  # "uniform" | "random"
    level: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "random"):
            raise ValueError(f"unknown grid kind {self.kind!r}")

    @property
    def n(self) -> int:
        return 2**self.level + 1

    def build(self) -> np.ndarray:
        if self.kind == "uniform":
            return uniform_level_grid(self.level)
        return random_uniform_grid(self.level, self.seed)


def test_function(name: str, x):
    """Benchmark functions: smooth ``sin``, and ``g``/``z`` with a jump at 2/3."""
    xa = np.asarray(x, dtype=float)
    key = name.strip().lower()
    if key == "sin":
        out = np.sin(np.pi * xa)
    elif key == "g":
        out = np.where(xa <= JUMP_LOCATION, np.sin(np.pi * xa), -np.sin(np.pi * xa))
    elif key == "z":
        cubic = (xa - 0.25) ** 3 * np.exp(xa**2)
        out = np.where(xa <= JUMP_LOCATION, 5.0 * cubic, 1.5 - cubic)
    else:
        raise ValueError(f"unknown test function {name!r}")
    if out.ndim == 0:
        return float(out)
    return out


def default_gamma(kernel: WeightKernel) -> float:
    """Reference shape parameter: 0.15 for compact kernels, 0.7 otherwise."""
    return 0.15 if kernel.is_compact else 0.7


def _as_kernel(kernel) -> WeightKernel:
    if isinstance(kernel, WeightKernel):
        return kernel
    return kernel_from_name(kernel)


def build_experiment_cover(nodes, func_name, kernel, degree, gamma=None) -> Cover:
    """Cover with centers at the data sites and the reference parameters."""
    kern = _as_kernel(kernel)
    if gamma is None:
        gamma = default_gamma(kern)
    samples = Samples.from_data(nodes, test_function(func_name, nodes))
    config = PUConfig(degree=degree, kernel=kern, gamma=gamma, domain=DOMAIN)
    return build_cover(samples, config)


@dataclass(frozen=True)
class ErrorReport:
    """Max-error table over refinement levels, with observed rates."""

    method: str
    kernel: str
    degree: int
    levels: tuple[int, ...]
    node_counts: tuple[int, ...]
    fill_distances: tuple[float, ...]
    maes: tuple[float, ...]
    rates: tuple[float | None, ...]

    @classmethod
    def from_maes(cls, method, kernel, degree, levels, node_counts, hs, maes):
        rates: list[float | None] = [None]
        for i in range(1, len(maes)):
            rates.append(float(np.log(maes[i - 1] / maes[i]) / np.log(hs[i - 1] / hs[i])))
        return cls(method=method, kernel=kernel, degree=degree,
                   levels=tuple(levels), node_counts=tuple(node_counts),
                   fill_distances=tuple(float(h) for h in hs),
                   maes=tuple(float(m) for m in maes), rates=tuple(rates))

    def mae_at(self, level: int) -> float:
        return self.maes[self.levels.index(level)]

    def rate_at(self, level: int) -> float | None:
        return self.rates[self.levels.index(level)]


def _validate_levels(levels):
    levels = [int(l) for l in levels]
    if not levels:
        raise ValueError("at least one level required")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    return levels


def run_convergence_both(kernel, degree, levels, grid="uniform", seed=0,
                         gamma=None, workers=None):
    """Convergence study of both operators on the smooth sine benchmark.

    Returns ``(linear_report, nonlinear_report)`` sharing one pass of local
    fits per level.
    """
    levels = _validate_levels(levels)
    kern = _as_kernel(kernel)
    hs, ns, mae_lin, mae_nl = [], [], [], []
    exact = test_function("sin", EVAL_POINTS)
    for level in levels:
        nodes = GridSpec(grid, level, seed).build()
        cover = build_experiment_cover(nodes, "sin", kern, degree, gamma)
        vlin, vnl, _ = cover.evaluate_many(EVAL_POINTS, workers=workers)
        hs.append(cover.h)
        ns.append(nodes.size)
        mae_lin.append(np.max(np.abs(exact - vlin)))
        mae_nl.append(np.max(np.abs(exact - vnl)))
    lin = ErrorReport.from_maes("linear", kern.name, degree, levels, ns, hs, mae_lin)
    nl = ErrorReport.from_maes("nonlinear", kern.name, degree, levels, ns, hs, mae_nl)
    return lin, nl


def run_convergence(method, kernel, degree, levels, grid="uniform", seed=0,
                    gamma=None, workers=None) -> ErrorReport:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    lin, nl = run_convergence_both(kernel, degree, levels, grid=grid, seed=seed,
                                   gamma=gamma, workers=workers)
    return lin if method == "linear" else nl


@dataclass(frozen=True)
class OvershootReport:
    """How far an approximant escapes the sampled data envelope near a jump."""

    method: str
    kernel: str
    degree: int
    max_overshoot: float
    smooth_region_mae: float
    exclusion_radius: float


def _overshoot_stats(values, exact, envelope, exclusion_mask):
    lo, hi = envelope
    over = max(0.0, float(np.max(values - hi)), float(np.max(lo - values)))
    smooth_mae = float(np.max(np.abs(exact - values)[exclusion_mask]))
    return over, smooth_mae


def run_discontinuity_both(func, kernel, degree, grid="uniform", level=9, seed=0,
                           gamma=None, curve_points=2001, workers=None):
    """Overshoot/accuracy study of both operators on a jump benchmark.

    Evaluates on the z-grid (which brackets the jump at 2/3) and on a dense
    curve grid spanning the full domain.  Returns
    ``((linear_report, linear_curve), (nonlinear_report, nonlinear_curve))``
    where each curve is an (n, 2) array of x and value.
    """
    key = func.strip().lower()
    if key not in ("g", "z"):
        raise ValueError("discontinuity study expects function 'g' or 'z'")
    nodes = GridSpec(grid, level, seed).build()
    kern = _as_kernel(kernel)
    cover = build_experiment_cover(nodes, key, kern, degree, gamma)
    data = test_function(key, nodes)
    envelope = (float(data.min()), float(data.max()))
    exclusion = cover.subdomain_radius()
    exact = test_function(key, EVAL_POINTS)
    mask = np.abs(EVAL_POINTS - JUMP_LOCATION) > exclusion

    vlin, vnl, _ = cover.evaluate_many(EVAL_POINTS, workers=workers)
    xs_curve = np.linspace(DOMAIN[0], DOMAIN[1], curve_points)
    clin, cnl, _ = cover.evaluate_many(xs_curve, workers=workers)

    reports = []
    for method, vals, curve in (("linear", vlin, clin), ("nonlinear", vnl, cnl)):
        over, smooth_mae = _overshoot_stats(vals, exact, envelope, mask)
        reports.append((
            OvershootReport(method=method, kernel=kern.name, degree=degree,
                            max_overshoot=over, smooth_region_mae=smooth_mae,
                            exclusion_radius=float(exclusion)),
            np.column_stack([xs_curve, curve]),
        ))
    return tuple(reports)


def run_discontinuity(func, method, kernel, degree, grid="uniform", level=9,
                      seed=0, gamma=None, curve_points=2001, workers=None):
    """Single-method variant of :func:`run_discontinuity_both`."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    both = run_discontinuity_both(func, kernel, degree, grid=grid, level=level,
                                  seed=seed, gamma=gamma, curve_points=curve_points,
                                  workers=workers)
    return both[0] if method == "linear" else both[1]


# -- CSV output ----------------------------------------------------------------

def _table(value: float) -> str:
    return f"{value:.4e}"


def write_error_report(report: ErrorReport, path) -> None:
    """Columns ``level,N,h,mae,rate``; the first level has no rate."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "N", "h", "mae", "rate"])
        for level, n, h, mae, rate in zip(report.levels, report.node_counts,
                                          report.fill_distances, report.maes,
                                          report.rates):
            writer.writerow([level, n, _table(h), _table(mae),
                             "" if rate is None else f"{rate:.4f}"])


def write_overshoot_reports(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "kernel", "degree", "max_overshoot",
                         "smooth_region_mae", "exclusion_radius"])
        for r in reports:
            writer.writerow([r.method, r.kernel, r.degree, _table(r.max_overshoot),
                             _table(r.smooth_region_mae), _table(r.exclusion_radius)])


def write_curve(curve: np.ndarray, path, header=("x", "value")) -> None:
    """Round-trip-exact dump: 17 significant digits per number."""
    arr = np.asarray(curve)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

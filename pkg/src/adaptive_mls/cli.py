"""Command line front end.

Subcommands
-----------
approx
    Fit user data from a CSV of ``x,f`` rows and dump both blends on an
    evaluation grid.
convergence
    Error/rate tables for the smooth benchmark over refinement levels.
discontinuity
    Overshoot metrics and curve dumps for the jump benchmarks.
selftest
    Built-in verification suites; exit status 0 only when all pass.

Flags override values from an optional ``key=value`` config file
(``--config``).  ``ADAPTIVE_MLS_THREADS`` caps evaluation parallelism
(0 = one worker per CPU).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .experiments import (GridSpec, run_convergence_both, run_discontinuity_both,
                          write_curve, write_error_report, write_overshoot_reports)
from .kernels import kernel_from_name
from .mls import RankDeficientError, Samples
from .partition import (CoverageGapError, PUConfig, TooFewMembersError,
                        UncoveredPointError, build_cover)
from .selftest import run_selftest

__all__ = ["main", "entry"]

_USER_ERRORS = (CoverageGapError, TooFewMembersError, UncoveredPointError,
                RankDeficientError, ValueError, OSError)

_DEFAULTS = {
    "kernel": "W2",
    "degree": "2",
    "gamma": "auto",
    "t": "4",
    "eps": "1e-14",
    "trunc": "1e-9",
    "levels": None,
    "grid": "uniform",
    "seed": "42",
    "func": None,
    "method": "both",
    "eval_n": "1001",
    "out": ".",
}


def _parse_levels(text: str) -> list[int]:
    levels = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            levels.extend(range(int(a), int(b) + 1))
        else:
            levels.append(int(part))
    return levels


def _split_kernel_list(text: str) -> list[str]:
    names, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            names.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    names.append("".join(cur))
    return [n.strip() for n in names if n.strip()]


def _load_config(path: str) -> dict[str, str]:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {raw!r} is not key=value")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _effective(args, key: str):
    """Flag if given, else config value, else baked-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in args.config_values:
        return args.config_values[key]
    return _DEFAULTS.get(key)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--kernel", help="kernel name(s): G,IMQ,M0,M2,M4,W0,W2,W4,POLY(p,q)")
    parser.add_argument("--degree", help="polynomial degree(s), comma separated")
    parser.add_argument("--gamma", help="shape parameter, or 'auto'")
    parser.add_argument("--t", help="indicator exponent of the adaptive weights")
    parser.add_argument("--eps", help="adaptive-weight regularizer")
    parser.add_argument("--trunc", help="truncation threshold for global kernels")
    parser.add_argument("--levels", help="refinement levels, e.g. 7-10 or 7,9")
    parser.add_argument("--grid", choices=["uniform", "random"], help="node layout")
    parser.add_argument("--seed", help="master seed for random grids")
    parser.add_argument("--func", help="test function: sin, g or z")
    parser.add_argument("--in", dest="input", metavar="PATH", help="input CSV of x,f rows")
    parser.add_argument("--out", metavar="PATH", help="output file or directory")
    parser.add_argument("--config", metavar="PATH", help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptive-mls",
        description="1D scattered-data approximation with a discontinuity-adaptive blend")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="approximate user data from a CSV file")
    _add_common(p)
    p.add_argument("--eval-n", dest="eval_n", help="number of evaluation points (default 1001)")

    p = sub.add_parser("convergence", help="error/rate tables on the smooth benchmark")
    _add_common(p)
    p.add_argument("--method", choices=["linear", "nonlinear", "both"])

    p = sub.add_parser("discontinuity", help="overshoot study on a jump benchmark")
    _add_common(p)
    p.add_argument("--method", choices=["linear", "nonlinear", "both"])
    p.add_argument("--curve-n", dest="curve_n", default="2001",
                   help="points in the dumped curve (default 2001)")

    p = sub.add_parser("selftest", help="run built-in verification suites")
    p.add_argument("--corrupt-indicators", action="store_true",
                   help="negative control: corrupt indicators so the suppression suite must fail")
    return parser


def _read_xy_csv(path: str):
    xs, fs = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                x, f = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}:{lineno}: expected numeric 'x,f' row, got {row!r}")
            xs.append(x)
            fs.append(f)
    if not xs:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(xs), np.asarray(fs)


def _sanitize(name: str) -> str:
    return name.replace("(", "_").replace(")", "").replace(",", "_")


def _cmd_approx(args) -> int:
    if args.input is None:
        raise ValueError("approx requires --in PATH")
    x, f = _read_xy_csv(args.input)
    kernel = kernel_from_name(_effective(args, "kernel"), float(_effective(args, "trunc")))
    degree = int(_effective(args, "degree"))
    gamma_text = _effective(args, "gamma")
    gamma = (0.15 if kernel.is_compact else 0.7) if gamma_text == "auto" else float(gamma_text)
    samples = Samples.from_data(x, f)
    config = PUConfig(degree=degree, kernel=kernel, gamma=gamma,
                      t=float(_effective(args, "t")), eps_weno=float(_effective(args, "eps")))
    cover = build_cover(samples, config)
    n_eval = int(_effective(args, "eval_n"))
    xs = np.linspace(samples.x[0], samples.x[-1], n_eval)
    vlin, vnl, _ = cover.evaluate_many(xs)
    out = _effective(args, "out")
    out_path = Path(out)
    if out_path.is_dir():
        out_path = out_path / "approx.csv"
    write_curve(np.column_stack([xs, vlin, vnl]), out_path,
                header=("x", "value_linear", "value_nonlinear"))
    print(f"wrote {out_path} ({n_eval} points, {samples.x.size} samples)")
    return 0


def _parse_combo(args):
    kernels = _split_kernel_list(_effective(args, "kernel"))
    degrees = [int(d) for d in str(_effective(args, "degree")).split(",") if d.strip()]
    gamma_text = _effective(args, "gamma")
    gamma = None if gamma_text == "auto" else float(gamma_text)
    return kernels, degrees, gamma


def _cmd_convergence(args) -> int:
    levels_text = _effective(args, "levels")
    if not levels_text:
        raise ValueError("convergence requires --levels (e.g. --levels 7-10)")
    levels = _parse_levels(levels_text)
    if not levels:
        raise ValueError("empty level list")
    kernels, degrees, gamma = _parse_combo(args)
    method = _effective(args, "method")
    grid = _effective(args, "grid")
    seed = int(_effective(args, "seed"))
    out_dir = Path(_effective(args, "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    summary_rows = []
    for kname in kernels:
        kernel = kernel_from_name(kname, float(_effective(args, "trunc")))
        for degree in degrees:
            lin, nl = run_convergence_both(kernel, degree, levels, grid=grid,
                                           seed=seed, gamma=gamma)
            wanted = {"linear": [lin], "nonlinear": [nl], "both": [lin, nl]}[method]
            for report in wanted:
                name = f"convergence_{report.method}_{_sanitize(report.kernel)}_p{degree}.csv"
                write_error_report(report, out_dir / name)
                print(f"wrote {out_dir / name}")
                for lev, n, h, mae, rate in zip(report.levels, report.node_counts,
                                                report.fill_distances, report.maes,
                                                report.rates):
                    summary_rows.append([report.method, report.kernel, degree, lev, n,
                                         f"{h:.4e}", f"{mae:.4e}",
                                         "" if rate is None else f"{rate:.4f}"])
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "kernel", "degree", "level", "N", "h", "mae", "rate"])
        writer.writerows(summary_rows)
    print(f"wrote {out_dir / 'summary.csv'}")
    return 0


def _cmd_discontinuity(args) -> int:
    func = _effective(args, "func")
    if func is None or func.lower() not in ("g", "z"):
        raise ValueError("discontinuity requires --func g or --func z")
    levels = _parse_levels(_effective(args, "levels") or "9")
    kernels, degrees, gamma = _parse_combo(args)
    method = _effective(args, "method")
    grid = _effective(args, "grid")
    seed = int(_effective(args, "seed"))
    curve_n = int(args.curve_n)
    out_dir = Path(_effective(args, "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    for kname in kernels:
        kernel = kernel_from_name(kname, float(_effective(args, "trunc")))
        for degree in degrees:
            for level in levels:
                both = run_discontinuity_both(func, kernel, degree, grid=grid,
                                              level=level, seed=seed, gamma=gamma,
                                              curve_points=curve_n)
                wanted = {"linear": both[:1], "nonlinear": both[1:], "both": both}[method]
                for report, curve in wanted:
                    reports.append(report)
                    name = (f"curve_{func.lower()}_{report.method}_"
                            f"{_sanitize(report.kernel)}_p{degree}_l{level}.csv")
                    write_curve(curve, out_dir / name)
                    print(f"wrote {out_dir / name}")
    write_overshoot_reports(reports, out_dir / "overshoot.csv")
    print(f"wrote {out_dir / 'overshoot.csv'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return 0 if run_selftest(corrupt_indicators=args.corrupt_indicators) else 1
    args.config_values = _load_config(args.config) if args.config else {}
    try:
        if args.command == "approx":
            return _cmd_approx(args)
        if args.command == "convergence":
            return _cmd_convergence(args)
        return _cmd_discontinuity(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

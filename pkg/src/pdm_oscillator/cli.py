"""Command-line front end emitting reproducible CSV/JSON artifacts.

Every command takes the shared model flags (--lambda --omega --hbar --dim)
plus command-specific options, writes one artifact (CSV by default), and
prints a one-line summary. Exit codes: 0 success, 1 parse/domain error,
2 verification failure (verify-all only). Outputs contain no timestamps
and all randomness is seed-fixed, so identical invocations produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .classical import PhaseState, conserved_series, integrate_orbit
from .errors import BracketingError, ConvergenceError, DomainError
from .geometry import (
    EffectivePotentialSpec,
    ModelParams,
    effective_minimum,
    effective_potential,
    metric_factor,
    potential,
    scalar_curvature,
)
from .oracle import RadialGrid, default_radial_grid, oracle_report
from .spectrum import energy_closed_form, harmonic_base, solve_deformed_spectrum, spectrum_table
from .verify import run_all
from .wavefunctions import RadialEigenfunction, normalize

__all__ = ["run", "main"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class _ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ParseError(message)


def _add_model_flags(p: _Parser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.02,
                   help="deformation strength (default 0.02)")
    p.add_argument("--omega", type=float, default=1.0, help="frequency (default 1)")
    p.add_argument("--hbar", type=float, default=1.0, help="action quantum (default 1)")
    p.add_argument("--dim", type=int, default=3, help="spatial dimension (default 3)")
    p.add_argument("--out", type=str, default=None,
                   help="output path (default: artifact to stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="artifact format (default csv)")
    p.add_argument("--tol", type=float, default=None,
                   help="solver tolerance override")


def build_parser() -> _Parser:
    parser = _Parser(prog="pdm-oscillator", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed-form bound-state table")
    _add_model_flags(p)
    p.add_argument("--n-max", type=int, default=10)

    p = sub.add_parser("oracle", help="finite-difference eigenvalues vs closed form")
    _add_model_flags(p)
    p.add_argument("--l", type=int, default=2, help="largest angular number")
    p.add_argument("--k", type=int, default=2, help="largest radial number")
    p.add_argument("--grid-points", type=int, default=4000)
    p.add_argument("--r-max", type=float, default=None)

    p = sub.add_parser("wavefunction", help="sample a normalized radial eigenfunction")
    _add_model_flags(p)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--grid-points", type=int, default=1001)
    p.add_argument("--r-max", type=float, default=None)

    p = sub.add_parser("classical", help="integrate an orbit and track conservation")
    _add_model_flags(p)
    p.add_argument("--q0", type=str, default=None, help="comma-separated positions")
    p.add_argument("--p0", type=str, default=None, help="comma-separated momenta")
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=2001)

    p = sub.add_parser("effective-potential", help="sample the radial effective potential")
    _add_model_flags(p)
    p.add_argument("--cn", type=float, default=100.0, help="total squared angular momentum")
    p.add_argument("--r-max", type=float, default=20.0)
    p.add_argument("--grid-points", type=int, default=2001)

    p = sub.add_parser("geometry", help="sample metric factor, curvature, or potential")
    _add_model_flags(p)
    p.add_argument("--quantity", choices=("metric", "curvature", "potential"),
                   default="potential")
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--grid-points", type=int, default=1001)

    p = sub.add_parser("deform", help="generic fixed-point solver vs closed form")
    _add_model_flags(p)
    p.add_argument("--n-max", type=int, default=10)

    p = sub.add_parser("verify-all", help="run the full acceptance battery")
    _add_model_flags(p)
    return parser


def _config_dict(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())}
    return cfg


def _curve_csv(columns: list[str], arrays: list[np.ndarray]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in zip(*arrays):
        buf.write(",".join(_fmt(float(v)) for v in row) + "\n")
    return buf.getvalue()


def _curve_json(columns, arrays, config) -> str:
    rows = [
        {c: (float(v) if math.isfinite(float(v)) else None) for c, v in zip(columns, row)}
        for row in zip(*arrays)
    ]
    return json.dumps({"config": config, "rows": rows}, indent=2)


def _table_artifact(table, args) -> str:
    if args.format == "csv":
        buf = io.StringIO()
        table.to_csv(buf)
        return buf.getvalue()
    return json.dumps(
        {"config": _config_dict(args), "rows": table.to_json_rows()}, indent=2
    )


def _cmd_spectrum(args, params) -> tuple[str, str, int]:
    table = spectrum_table(args.n_max, params)
    last = float(table.energy[-1])
    summary = (
        f"spectrum: {len(table)} levels, E_0={_fmt(float(table.energy[0]))}, "
        f"E_{args.n_max}={_fmt(last)}"
    )
    return _table_artifact(table, args), summary, 0


def _cmd_oracle(args, params) -> tuple[str, str, int]:
    grid = None
    if args.r_max is not None:
        base = default_radial_grid(params, args.l, args.k)
        grid = RadialGrid(base.r_min, args.r_max, args.grid_points)
    elif args.grid_points != 4000:
        base = default_radial_grid(params, args.l, args.k)
        grid = RadialGrid(base.r_min, base.r_max, args.grid_points)
    table = oracle_report(params, l_max=args.l, k_max=args.k, grid=grid)
    worst = float(table.extra_columns["rel_error"].max())
    summary = f"oracle: {len(table)} states, worst relative error {worst:.3e}"
    return _table_artifact(table, args), summary, 0


def _cmd_wavefunction(args, params) -> tuple[str, str, int]:
    f = normalize(RadialEigenfunction.from_quantum_numbers(args.k, args.l, params))
    r_max = args.r_max if args.r_max is not None else 10.0 / f.beta
    r = np.linspace(0.0, r_max, args.grid_points)
    values = f(r)
    weight = (1.0 + params.lam * r**2) * r ** (params.dim - 1)
    cols = ["r", "value", "weight_factor"]
    arrays = [r, np.atleast_1d(values), weight]
    artifact = (
        _curve_csv(cols, arrays)
        if args.format == "csv"
        else _curve_json(cols, arrays, _config_dict(args))
    )
    summary = (
        f"wavefunction: k={args.k} l={args.l}, E={_fmt(f.energy)}, "
        f"beta={_fmt(f.beta)}, {args.grid_points} samples"
    )
    return artifact, summary, 0


def _parse_vector(text: str, dim: int, name: str) -> np.ndarray:
    try:
        vec = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise DomainError(f"cannot parse {name} vector: {text!r}") from exc
    if len(vec) != dim:
        raise DomainError(f"{name} needs {dim} components, got {len(vec)}")
    return vec


def _cmd_classical(args, params) -> tuple[str, str, int]:
    dim = params.dim
    if args.q0 is not None:
        q0 = _parse_vector(args.q0, dim, "--q0")
    else:
        q0 = np.zeros(dim)
        q0[0] = 1.0
    if args.p0 is not None:
        p0 = _parse_vector(args.p0, dim, "--p0")
    else:
        p0 = np.zeros(dim)
        p0[min(1, dim - 1)] = 1.0
    tol = args.tol if args.tol is not None else 1e-10
    traj = integrate_orbit(
        PhaseState(q=q0, p=p0), params, t_end=args.t_end, tol=tol, samples=args.samples
    )
    series = conserved_series(traj, params)
    cols = (
        ["t"]
        + [f"q_{i}" for i in range(1, dim + 1)]
        + [f"p_{i}" for i in range(1, dim + 1)]
        + ["H"]
        + [f"drift_{label}" for label in series]
    )
    arrays = (
        [traj.t]
        + [traj.q[:, i] for i in range(dim)]
        + [traj.p[:, i] for i in range(dim)]
        + [series["energy"]]
        + [series[label] - series[label][0] for label in series]
    )
    artifact = (
        _curve_csv(cols, arrays)
        if args.format == "csv"
        else _curve_json(cols, arrays, _config_dict(args))
    )
    drift = max(float(np.max(np.abs(series[label] - series[label][0]))) for label in series)
    summary = (
        f"classical: {args.samples} samples to t={args.t_end}, "
        f"H={_fmt(float(series['energy'][0]))}, max conserved drift {drift:.3e}"
    )
    return artifact, summary, 0


def _cmd_effective_potential(args, params) -> tuple[str, str, int]:
    spec = EffectivePotentialSpec(params, args.cn)
    start = 0.0 if args.cn == 0 else args.r_max / (10.0 * args.grid_points)
    r = np.linspace(start, args.r_max, args.grid_points)
    values = effective_potential(r, spec)
    cols = ["r", "value"]
    arrays = [r, np.atleast_1d(values)]
    artifact = (
        _curve_csv(cols, arrays)
        if args.format == "csv"
        else _curve_json(cols, arrays, _config_dict(args))
    )
    if args.cn > 0 and params.omega > 0:
        r_min, u_min = effective_minimum(spec)
        summary = f"effective-potential: minimum {_fmt(u_min)} at r={_fmt(r_min)}"
    else:
        summary = f"effective-potential: {args.grid_points} samples"
    return artifact, summary, 0


def _cmd_geometry(args, params) -> tuple[str, str, int]:
    fns = {
        "metric": metric_factor,
        "curvature": scalar_curvature,
        "potential": potential,
    }
    r = np.linspace(0.0, args.r_max, args.grid_points)
    values = fns[args.quantity](r, params)
    cols = ["r", "value"]
    arrays = [r, np.atleast_1d(values)]
    artifact = (
        _curve_csv(cols, arrays)
        if args.format == "csv"
        else _curve_json(cols, arrays, _config_dict(args))
    )
    summary = (
        f"geometry: {args.quantity} sampled at {args.grid_points} points, "
        f"value({_fmt(args.r_max)})={_fmt(float(np.atleast_1d(values)[-1]))}"
    )
    return artifact, summary, 0


def _cmd_deform(args, params) -> tuple[str, str, int]:
    base = harmonic_base(params)
    levels = np.arange(args.n_max + 1)
    fixed = np.array(
        [solve_deformed_spectrum(base, int(n), params, tol=args.tol) for n in levels]
    )
    closed = np.atleast_1d(energy_closed_form(levels, params))
    diff = np.abs(fixed - closed)
    cols = ["n", "energy_fixed_point", "energy_closed_form", "abs_diff"]
    arrays = [levels.astype(float), fixed, closed, diff]
    artifact = (
        _curve_csv(cols, arrays)
        if args.format == "csv"
        else _curve_json(cols, arrays, _config_dict(args))
    )
    summary = f"deform: {len(levels)} levels, max |fixed-point - closed| = {diff.max():.3e}"
    return artifact, summary, 0


def _cmd_verify_all(args, params) -> tuple[str, str, int]:
    results = run_all()
    all_passed = all(r.passed for r in results)
    payload = {
        "config": _config_dict(args),
        "all_passed": all_passed,
        "results": [r.as_dict() for r in results],
    }
    failed = [r.name for r in results if not r.passed]
    summary = (
        f"verify-all: {len(results) - len(failed)}/{len(results)} checks passed"
        + (f", FAILED: {', '.join(failed)}" if failed else "")
    )
    return json.dumps(payload, indent=2), summary, 0 if all_passed else 2


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "oracle": _cmd_oracle,
    "wavefunction": _cmd_wavefunction,
    "classical": _cmd_classical,
    "effective-potential": _cmd_effective_potential,
    "geometry": _cmd_geometry,
    "deform": _cmd_deform,
    "verify-all": _cmd_verify_all,
}


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-artifact-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv: list[str]) -> int:
    """Parse argv, execute one command, write the artifact; return exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        params = ModelParams(
            lam=args.lam, omega=args.omega, hbar=args.hbar, dim=args.dim
        )
        # verify-all is JSON-only
        if args.command == "verify-all":
            args.format = "json"
        artifact, summary, code = _COMMANDS[args.command](args, params)
        if args.out is not None:
            _write_atomic(args.out, artifact)
            print(summary)
        else:
            sys.stdout.write(artifact)
            print(summary, file=sys.stderr)
        return code
    except (DomainError, ConvergenceError, BracketingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write artifact: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

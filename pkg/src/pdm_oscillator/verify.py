"""Acceptance checks wiring every module against its quantitative targets.

Each check returns a CheckResult with the measured value, the expected
value, and the tolerance it was held to; `run_all` executes the full
battery. The same battery backs both the test suite and the CLI
`verify-all` command, with fixed seeds so runs are reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classical import (
    PhaseState,
    closure_check,
    conserved_series,
    estimate_radial_period,
    integrate_orbit,
)
from .geometry import EffectivePotentialSpec, ModelParams, effective_minimum, potential
from .oracle import grid_eigen_residual, oracle_report
from .spectrum import (
    angular_multiplicity,
    continuum_threshold,
    degeneracy,
    energy_closed_form,
    energy_implicit,
    harmonic_base,
    solve_deformed_spectrum,
    threshold_gap,
)
from .wavefunctions import CartesianEigenfunction, normalize, weighted_inner_product

__all__ = ["CheckResult", "run_all", "ALL_CHECKS"]

_CONSERVATION_SEED = 12345
_CLOSURE_SEED = 2718


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    expected: str
    tolerance: float
    runtime_s: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        safe = lambda v: v if (not isinstance(v, float) or math.isfinite(v)) else None
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": safe(float(self.measured)),
            "expected": self.expected,
            "tolerance": float(self.tolerance),
            "runtime_s": round(self.runtime_s, 3),
            "details": {k: safe(v) for k, v in self.details.items()},
        }


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.runtime_s = time.perf_counter() - start
        return result

    return wrapper


@_timed
def check_effective_minimum() -> CheckResult:
    """Deformed and flat effective-potential minima against reference values."""
    spec = EffectivePotentialSpec(ModelParams(lam=0.02, omega=1.0, dim=3), 100.0)
    r_min, u_min = effective_minimum(spec)
    spec0 = EffectivePotentialSpec(ModelParams(lam=0.0, omega=1.0, dim=3), 100.0)
    r_min0, u_min0 = effective_minimum(spec0)
    deviations = {
        "r_min": abs(r_min - 3.49),
        "u_min": abs(u_min - 8.2),
        "r_min_flat": abs(r_min0 - 3.16),
        "u_min_flat": abs(u_min0 - 10.0),
    }
    measured = max(deviations.values())
    return CheckResult(
        name="effective-minimum",
        passed=measured < 0.01,
        measured=measured,
        expected="(3.49, 8.2) deformed and (3.16, 10.0) flat",
        tolerance=0.01,
        details=deviations,
    )


@_timed
def check_potential_limits() -> CheckResult:
    """Large-r potential limits omega^2/(2*lam) for the reference lam grid."""
    targets = {0.02: 25.0, 0.04: 12.5, 0.06: 8.33, 0.1: 5.0}
    worst = 0.0
    details = {}
    for lam, target in targets.items():
        p = ModelParams(lam=lam, omega=1.0, dim=3)
        at_far = potential(1e4, p)
        thresh = continuum_threshold(p)
        details[f"lam={lam}"] = max(abs(at_far - target), abs(thresh - target))
        worst = max(worst, details[f"lam={lam}"])
    return CheckResult(
        name="potential-limits",
        passed=worst < 0.01,
        measured=worst,
        expected="{25, 12.5, 8.33, 5} at lam {0.02, 0.04, 0.06, 0.1}",
        tolerance=0.01,
        details=details,
    )


@_timed
def check_spectrum_self_consistency() -> CheckResult:
    """Closed form satisfies the implicit equation and matches its bisection root."""
    levels = np.arange(401)
    worst_residual = 0.0
    worst_diff = 0.0
    for dim in (1, 2, 3):
        for lam in (0.005, 0.02, 0.1):
            for omega in (0.5, 1.0, 2.0):
                p = ModelParams(lam=lam, omega=omega, hbar=1.0, dim=dim)
                energy = energy_closed_form(levels, p)
                nu = levels + dim / 2.0
                omega_eff = np.sqrt(omega**2 - 2.0 * lam * energy)
                residual = np.abs(energy - p.hbar * omega_eff * nu) / omega**2
                worst_residual = max(worst_residual, float(residual.max()))
                implicit = energy_implicit(levels, p)
                worst_diff = max(worst_diff, float(np.abs(implicit - energy).max()))
    measured = max(worst_residual, worst_diff)
    return CheckResult(
        name="spectrum-self-consistency",
        passed=measured < 1e-10,
        measured=measured,
        expected="implicit-equation residual and solver agreement",
        tolerance=1e-10,
        details={"worst_residual": worst_residual, "worst_solver_diff": worst_diff},
    )


def check_oracle_equivalence() -> list[CheckResult]:
    """Finite-difference eigenvalues against the closed form, per lam."""
    out = []
    for lam in (0.0, 0.02, 0.1):
        start = time.perf_counter()
        worst_rel = 0.0
        worst_order_dev = 0.0
        for dim in (1, 2, 3):
            p = ModelParams(lam=lam, omega=1.0, hbar=1.0, dim=dim)
            report = oracle_report(p, l_max=2, k_max=2)
            worst_rel = max(worst_rel, float(report.extra_columns["rel_error"].max()))
            orders = report.extra_columns["convergence_order"]
            orders = orders[np.isfinite(orders)]
            worst_order_dev = max(worst_order_dev, float(np.abs(orders - 2.0).max()))
        out.append(
            CheckResult(
                name=f"oracle-equivalence[lam={lam}]",
                passed=worst_rel < 1e-5 and worst_order_dev <= 0.2,
                measured=worst_rel,
                expected="relative error after one Richardson step; order 2.0 +- 0.2",
                tolerance=1e-5,
                runtime_s=time.perf_counter() - start,
                details={
                    "worst_rel_error": worst_rel,
                    "worst_order_deviation": worst_order_dev,
                },
            )
        )
    return out


@_timed
def check_degeneracy() -> CheckResult:
    """Multiplet coincidence in the oracle and the angular counting identity."""
    p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)
    report = oracle_report(p, l_max=2, k_max=1)
    cols = report.extra_columns
    by_kl = {
        (int(k), int(l)): e for k, l, e in zip(cols["k"], cols["l"], report.energy)
    }
    e_rad, e_ang = by_kl[(1, 0)], by_kl[(0, 2)]
    multiplet_rel = abs(e_rad - e_ang) / abs(e_ang)

    mismatches = 0
    for dim in (2, 3, 4):
        for n in range(13):
            total = sum(
                angular_multiplicity(n - 2 * k, dim) for k in range(n // 2 + 1)
            )
            if total != degeneracy(n, dim):
                mismatches += 1
    return CheckResult(
        name="degeneracy",
        passed=multiplet_rel < 1e-5 and mismatches == 0,
        measured=multiplet_rel,
        expected="(k=1,l=0) and (k=0,l=2) coincide; counting identity exact",
        tolerance=1e-5,
        details={"multiplet_rel_diff": multiplet_rel, "identity_mismatches": mismatches},
    )


@_timed
def check_accumulation() -> CheckResult:
    """Gaps to the threshold are positive, strictly decreasing, and small by n=300."""
    p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)
    levels = np.arange(401)
    gaps = threshold_gap(levels, p)
    threshold = continuum_threshold(p)
    positive = bool(np.all(gaps > 0))
    decreasing = bool(np.all(np.diff(gaps) < 0))
    tail_fraction = float(gaps[300:].max() / threshold)
    return CheckResult(
        name="threshold-accumulation",
        passed=positive and decreasing and tail_fraction < 0.01,
        measured=tail_fraction,
        expected="gap/threshold below 1% for all n >= 300",
        tolerance=0.01,
        details={
            "positive": positive,
            "strictly_decreasing": decreasing,
            "gap_at_300": float(gaps[300]),
        },
    )


@_timed
def check_orthonormality() -> CheckResult:
    """Gram matrix of the first six weighted-normalized 1D states."""
    p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=1)
    states = [
        normalize(CartesianEigenfunction.from_occupations((n,), p)) for n in range(6)
    ]
    gram = np.array(
        [[weighted_inner_product(a, b, p) for b in states] for a in states]
    )
    measured = float(np.abs(gram - np.eye(6)).max())
    return CheckResult(
        name="orthonormality",
        passed=measured < 1e-6,
        measured=measured,
        expected="identity Gram matrix",
        tolerance=1e-6,
    )


@_timed
def check_eigenfunction_residual() -> CheckResult:
    """Grid-applied Hamiltonian residual on low states for N in {1, 2}."""
    worst = 0.0
    details = {}
    cases = {
        1: [(0,), (1,), (2,), (3,)],
        2: [(0, 0), (1, 0), (1, 1), (2, 1)],
    }
    points = {1: 1501, 2: 501}
    for dim, tuples in cases.items():
        p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=dim)
        for tup in tuples:
            f = CartesianEigenfunction.from_occupations(tup, p)
            res = grid_eigen_residual(
                f,
                f.state.energy,
                p,
                half_width=9.5 / f.state.beta,
                num_points=points[dim],
            )
            details[f"N={dim},n={tup}"] = res
            worst = max(worst, res)
    return CheckResult(
        name="eigenfunction-residual",
        passed=worst < 1e-6,
        measured=worst,
        expected="relative |H psi - E psi| on converged grids",
        tolerance=1e-6,
        details=details,
    )


@_timed
def check_classical_conservation() -> CheckResult:
    """Drift of all five constants plus the pointwise sum identity, N=3."""
    p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)
    rng = np.random.default_rng(_CONSERVATION_SEED)
    worst_drift = 0.0
    worst_identity = 0.0
    for _ in range(20):
        state = PhaseState(q=rng.uniform(-2.5, 2.5, 3), p=rng.uniform(-2.0, 2.0, 3))
        period = estimate_radial_period(state, p)
        traj = integrate_orbit(state, p, t_end=10.0 * period, tol=1e-10, samples=2001)
        series = conserved_series(traj, p)
        qp_scale = float(
            np.max(np.linalg.norm(traj.q, axis=1))
            * np.max(np.linalg.norm(traj.p, axis=1))
        )
        for values in series.values():
            initial = abs(float(values[0]))
            denom = initial if initial > 1e-10 * qp_scale else qp_scale
            worst_drift = max(
                worst_drift, float(np.max(np.abs(values - values[0]))) / denom
            )
        identity = np.abs(
            sum(series[f"i_{i}"] for i in (1, 2, 3)) - 2.0 * series["energy"]
        )
        scale = max(1.0, 2.0 * abs(float(series["energy"][0])))
        worst_identity = max(worst_identity, float(identity.max()) / scale)
    return CheckResult(
        name="classical-conservation",
        passed=worst_drift < 1e-8 and worst_identity < 1e-12,
        measured=worst_drift,
        expected="relative drift of 2N-1 constants and H over 10 radial periods",
        tolerance=1e-8,
        details={"worst_identity": worst_identity, "identity_tolerance": 1e-12},
    )


@_timed
def check_orbit_closure() -> CheckResult:
    """Random bounded N=2 orbits close in phase space; flat control at 2*pi."""
    rng = np.random.default_rng(_CLOSURE_SEED)
    failures = 0
    worst_period_count = 0.0
    for lam in (0.01, 0.1):
        p = ModelParams(lam=lam, omega=1.0, hbar=1.0, dim=2)
        for _ in range(20):
            state = PhaseState(q=rng.uniform(-2.0, 2.0, 2), p=rng.uniform(-1.5, 1.5, 2))
            period = estimate_radial_period(state, p)
            traj = integrate_orbit(state, p, t_end=9.0 * period, tol=1e-11, samples=4001)
            closed, detected = closure_check(traj, tol=1e-6)
            if not closed:
                failures += 1
            else:
                worst_period_count = max(worst_period_count, detected / period)

    p0 = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=2)
    control = PhaseState(q=np.array([1.2, 0.1]), p=np.array([-0.2, 0.8]))
    traj0 = integrate_orbit(control, p0, t_end=5.0 * math.pi, tol=1e-11, samples=4001)
    closed0, detected0 = closure_check(traj0, tol=1e-6)
    control_err = abs(detected0 - 2.0 * math.pi) if closed0 else math.inf
    return CheckResult(
        name="orbit-closure",
        passed=failures == 0 and control_err < 1e-5,
        measured=float(failures),
        expected="all 40 random bounded orbits close within 1e-6",
        tolerance=0.0,
        details={
            "flat_control_period_error": control_err,
            "max_radial_periods_to_close": worst_period_count,
        },
    )


@_timed
def check_generic_deformation() -> CheckResult:
    """Fixed-point solver on the harmonic base reproduces the closed form."""
    p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)
    base = harmonic_base(p)
    worst = 0.0
    for n in range(51):
        fixed_point = solve_deformed_spectrum(base, n, p)
        worst = max(worst, abs(fixed_point - energy_closed_form(n, p)))

    p_tiny = ModelParams(lam=1e-12, omega=1.0, hbar=1.0, dim=3)
    base_tiny = harmonic_base(p_tiny)
    limit_err = max(
        abs(solve_deformed_spectrum(base_tiny, n, p_tiny) - base_tiny.eval(1.0, n))
        for n in (0, 3, 10)
    )
    return CheckResult(
        name="generic-deformation",
        passed=worst < 1e-10 and limit_err < 1e-6,
        measured=worst,
        expected="fixed point equals closed form for n <= 50",
        tolerance=1e-10,
        details={"tiny_lam_limit_error": limit_err, "limit_tolerance": 1e-6},
    )


ALL_CHECKS = (
    check_effective_minimum,
    check_potential_limits,
    check_spectrum_self_consistency,
    check_oracle_equivalence,
    check_degeneracy,
    check_accumulation,
    check_orthonormality,
    check_eigenfunction_residual,
    check_classical_conservation,
    check_orbit_closure,
    check_generic_deformation,
)


def run_all() -> list[CheckResult]:
    """Execute the whole battery; results carry pass/fail and runtimes."""
    results: list[CheckResult] = []
    for check in ALL_CHECKS:
        outcome = check()
        if isinstance(outcome, list):
            results.extend(outcome)
        else:
            results.append(outcome)
    return results

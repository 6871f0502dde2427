"""Classical dynamics: Hamiltonian, constants of motion, orbits, closure.

The system carries the maximal set of 2N-1 functionally independent
constants of motion, so every bounded orbit is closed; the integrator is
a plain adaptive embedded Runge-Kutta pair (not symplectic), which makes
conservation along trajectories a genuine numerical test rather than an
artifact of the scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, DomainError
from .geometry import ModelParams
from .spectrum import continuum_threshold

__all__ = [
    "PhaseState",
    "ConservedSet",
    "Trajectory",
    "hamiltonian",
    "conserved_set",
    "conserved_series",
    "hamilton_rhs",
    "integrate_orbit",
    "estimate_radial_period",
    "closure_check",
]


@dataclass(frozen=True)
class PhaseState:
    """Point (q, p) of phase space at time t."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape or q.ndim != 1:
            raise DomainError("q and p must be 1D arrays of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise DomainError("phase-space components must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


def _ham(q, p, params: ModelParams):
    q_sq = np.sum(q * q, axis=-1)
    p_sq = np.sum(p * p, axis=-1)
    return (p_sq + params.omega**2 * q_sq) / (2.0 * (1.0 + params.lam * q_sq))


def hamiltonian(state: PhaseState, params: ModelParams) -> float:
    """Energy (p^2 + omega^2 q^2) / (2 (1 + lam q^2))."""
    if len(state.q) != params.dim:
        raise DomainError(f"state has {len(state.q)} components, expected {params.dim}")
    return float(_ham(state.q, state.p, params))


def _angular_squares(q, p):
    """Squared pairwise angular momenta (q_i p_j - q_j p_i)^2, shape (..., N, N)."""
    l = q[..., :, None] * p[..., None, :] - q[..., None, :] * p[..., :, None]
    return l * l


@dataclass(frozen=True)
class ConservedSet:
    """All 2N-1 constants of motion evaluated at one phase point.

    c_upper[m-2] sums the squared angular momenta over index pairs within
    1..m, c_lower[m-2] within (N-m, N]; both end at the total L^2 for
    m = N. The i_vals satisfy 2H = sum(i_vals) identically.
    """

    energy: float
    c_upper: np.ndarray
    c_lower: np.ndarray
    i_vals: np.ndarray

    def labels(self) -> list[str]:
        n = len(self.i_vals)
        out = ["energy"]
        out += [f"c_upper_{m}" for m in range(2, n + 1)]
        out += [f"c_lower_{m}" for m in range(2, n + 1)]
        out += [f"i_{i}" for i in range(1, n + 1)]
        return out

    def values(self) -> np.ndarray:
        return np.concatenate(
            [[self.energy], self.c_upper, self.c_lower, self.i_vals]
        )


def conserved_set(state: PhaseState, params: ModelParams) -> ConservedSet:
    """Evaluate the energy and all constants of motion at one phase point."""
    series = conserved_series(
        Trajectory(
            t=np.array([state.t]),
            q=state.q[None, :],
            p=state.p[None, :],
            params=params,
        ),
        params,
    )
    return ConservedSet(
        energy=float(series["energy"][0]),
        c_upper=np.array(
            [series[f"c_upper_{m}"][0] for m in range(2, params.dim + 1)]
        ),
        c_lower=np.array(
            [series[f"c_lower_{m}"][0] for m in range(2, params.dim + 1)]
        ),
        i_vals=np.array([series[f"i_{i}"][0] for i in range(1, params.dim + 1)]),
    )


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit with optional dense interpolant for refinement."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    params: ModelParams
    dense: object = None

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> PhaseState:
        return PhaseState(q=self.q[i], p=self.p[i], t=float(self.t[i]))

    def phase_point(self, time: float) -> np.ndarray:
        """Dense-output phase vector [q, p] at an arbitrary time."""
        if self.dense is None:
            raise DomainError("trajectory carries no dense interpolant")
        return self.dense(time)


def conserved_series(traj: Trajectory, params: ModelParams) -> dict[str, np.ndarray]:
    """Every conserved quantity evaluated along the whole trajectory."""
    q, p = traj.q, traj.p
    n = params.dim
    out: dict[str, np.ndarray] = {}
    energy = _ham(q, p, params)
    out["energy"] = energy
    l_sq = _angular_squares(q, p)
    for m in range(2, n + 1):
        iu = np.triu_indices(m, k=1)
        out[f"c_upper_{m}"] = l_sq[:, : m, : m][:, iu[0], iu[1]].sum(axis=-1)
        sub = l_sq[:, n - m :, n - m :]
        out[f"c_lower_{m}"] = sub[:, iu[0], iu[1]].sum(axis=-1)
    coeff = 2.0 * params.lam * energy - params.omega**2
    for i in range(1, n + 1):
        out[f"i_{i}"] = p[:, i - 1] ** 2 - coeff * q[:, i - 1] ** 2
    return out


def hamilton_rhs(params: ModelParams):
    """Right-hand side of Hamilton's equations as a solve_ivp-compatible callable.

    qdot = p / (1 + lam q^2)
    pdot = lam q (p^2 + omega^2 q^2)/(1 + lam q^2)^2 - omega^2 q/(1 + lam q^2)
    """
    n = params.dim
    lam, omega_sq = params.lam, params.omega**2

    def rhs(_t, y):
        q, p = y[:n], y[n:]
        q_sq = q @ q
        m = 1.0 + lam * q_sq
        qdot = p / m
        pdot = lam * q * (p @ p + omega_sq * q_sq) / m**2 - omega_sq * q / m
        return np.concatenate([qdot, pdot])

    return rhs


def integrate_orbit(
    initial: PhaseState,
    params: ModelParams,
    t_end: float,
    tol: float = 1e-10,
    samples: int = 2001,
) -> Trajectory:
    """Integrate Hamilton's equations with an adaptive embedded RK 5(4) pair.

    Returns the orbit sampled at `samples` equispaced times plus a dense
    interpolant. Steps are accepted a safety decade below tol so the local
    error per step genuinely stays under tol even after accumulation of
    the controller's slack.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if t_end <= initial.t:
        raise DomainError("t_end must exceed the initial time")
    if len(initial.q) != params.dim:
        raise DomainError(
            f"state has {len(initial.q)} components, expected {params.dim}"
        )
    y0 = np.concatenate([initial.q, initial.p])
    t_eval = np.linspace(initial.t, t_end, samples)
    control = max(0.1 * tol, 2.5e-14)
    sol = solve_ivp(
        hamilton_rhs(params),
        (initial.t, t_end),
        y0,
        method="RK45",
        rtol=control,
        atol=control,
        dense_output=True,
        t_eval=t_eval,
    )
    if not sol.success:
        raise ConvergenceError(f"integration failed: {sol.message}")
    n = params.dim
    return Trajectory(
        t=sol.t,
        q=sol.y[:n].T.copy(),
        p=sol.y[n:].T.copy(),
        params=params,
        dense=sol.sol,
    )


def _radial_minima(traj: Trajectory) -> list[float]:
    """Times of local minima of |q(t)|, refined by quadratic interpolation."""
    r = np.linalg.norm(traj.q, axis=1)
    t = traj.t
    minima = []
    for i in range(1, len(r) - 1):
        if r[i] <= r[i - 1] and r[i] < r[i + 1]:
            denom = r[i - 1] - 2.0 * r[i] + r[i + 1]
            shift = 0.0 if denom <= 0 else 0.5 * (r[i - 1] - r[i + 1]) / denom
            minima.append(t[i] + shift * (t[i + 1] - t[i]))
    return minima


def estimate_radial_period(initial: PhaseState, params: ModelParams) -> float:
    """Radial oscillation period from a short probe integration.

    For circular orbits (no radial oscillation) the angular period
    2 pi (1 + lam r^2) r^2 / L is returned instead.
    """
    energy = hamiltonian(initial, params)
    omega_eff_sq = params.omega**2 - 2.0 * params.lam * energy
    if omega_eff_sq <= 0:
        raise DomainError("energy at or above the escape threshold")
    omega_eff = math.sqrt(omega_eff_sq)
    r_turn_sq = 2.0 * energy / omega_eff_sq
    horizon = 4.0 * math.pi / omega_eff * (1.0 + params.lam * r_turn_sq)
    probe = integrate_orbit(initial, params, initial.t + horizon, tol=1e-10, samples=4001)

    r = np.linalg.norm(probe.q, axis=1)
    if r.mean() == 0:
        raise DomainError("degenerate orbit at the origin")
    if (r.max() - r.min()) < 1e-8 * r.mean():
        l_total = math.sqrt(
            float(np.sum(_angular_squares(initial.q, initial.p))) / 2.0
        )
        if l_total == 0:
            raise DomainError("degenerate orbit: constant radius with zero L")
        r0 = float(r.mean())
        return 2.0 * math.pi * (1.0 + params.lam * r0 * r0) * r0 * r0 / l_total
    minima = _radial_minima(probe)
    if len(minima) < 2:
        raise ConvergenceError("probe orbit shows fewer than two radial minima")
    return float(np.mean(np.diff(minima)))


def closure_check(
    traj: Trajectory, tol: float = 1e-6, max_multiples: int = 8
) -> tuple[bool, float | None]:
    """Detect orbit closure: smallest T with |z(t0+T) - z(t0)| < tol.

    Scans multiples (up to max_multiples) of the radial period, refining
    each candidate against the dense interpolant. Unbounded trajectories
    report (False, None).
    """
    params = traj.params
    z0 = np.concatenate([traj.q[0], traj.p[0]])
    t0 = float(traj.t[0])
    energy = _ham(traj.q[0], traj.p[0], params)
    if params.lam > 0 and energy >= continuum_threshold(params):
        return False, None

    r = np.linalg.norm(traj.q, axis=1)
    circular = (r.max() - r.min()) < 1e-8 * r.mean()
    if circular:
        l_total = math.sqrt(float(np.sum(_angular_squares(traj.q[0], traj.p[0]))) / 2.0)
        if l_total == 0:
            return False, None
        r0 = float(r.mean())
        radial_period = 2.0 * math.pi * (1.0 + params.lam * r0 * r0) * r0 * r0 / l_total
    else:
        minima = _radial_minima(traj)
        if len(minima) < 2:
            raise DomainError("trajectory too short: fewer than two radial minima")
        radial_period = float(np.mean(np.diff(minima)))

    def miss(t_return):
        return float(np.linalg.norm(traj.phase_point(t_return) - z0))

    t_last = float(traj.t[-1])
    for mult in range(1, max_multiples + 1):
        candidate = t0 + mult * radial_period
        window = 0.2 * radial_period
        hi = min(candidate + window, t_last)
        lo = candidate - window
        if lo >= hi:
            break
        res = minimize_scalar(miss, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, radial_period)})
        if res.fun < tol:
            return True, float(res.x - t0)
    return False, None

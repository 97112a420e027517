"""Quantum probability current, classical lower bound, and backflow detection.

Backflow happens at level a and time t when

    j_t(a) < (1/m) int_{-inf}^0 p f_t(a, p) dp,

i.e. the probability above the level x = a grows faster than any classical
ensemble with joint density f_t could make it grow.  The right-hand side is
always <= 0; for states without smoothed negative-momentum mass the test
reduces to j_t(a) < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _gaussians as ga
from .phasespace import (JointDensity, PrecisionSpec, negative_momentum_moment,
                         negative_strip_mass, position_marginal)
from .states import WavefunctionState

VIOLATION_FLOOR = 1e-12   # minimum bound - j (internal current units) to count
SCAN_POINTS_DEFAULT = 500
BISECTION_FRACTION = 1e-3  # endpoint refinement: 0.1% of the scan step


@dataclass(frozen=True)
class DetectionQuery:
    """Detection level, scan window, and short-time horizon (internal units)."""

    a: float
    t_start: float
    t_end: float
    n_times: int = SCAN_POINTS_DEFAULT
    delta_t: float = 1.0

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"need t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if self.t_start < 0:
            raise ValueError(f"t_start must be nonnegative, got {self.t_start}")
        if self.n_times < 2:
            raise ValueError(f"n_times must be >= 2, got {self.n_times}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_times)


@dataclass(frozen=True)
class BackflowReport:
    """Scan of current vs classical bound with detected backflow intervals."""

    times: np.ndarray
    j_quantum: np.ndarray
    j_classical_bound: np.ndarray
    violation: np.ndarray
    neg_momentum_prob: np.ndarray
    qb_intervals: list[tuple[float, float]] = field(default_factory=list)


def quantum_current(state: WavefunctionState, a: float, t: float) -> float:
    """j_t(a) = (hbar/m) Im(psi* dpsi/dx) at x = a; equals -d/dt P_t(x <= a)."""
    ph = state.physical
    return float(ph.hbar / ph.mass
                 * np.imag(np.conj(state.psi(a, t)) * state.dpsi_dx(a, t)))


def classical_bound(state: WavefunctionState, precision: PrecisionSpec,
                    a: float, t: float) -> float:
    """(1/m) int_{-inf}^0 p f_t(a, p) dp: the most negative current any
    classical ensemble with density f_t can produce at x = a."""
    return negative_momentum_moment(state, precision, a, t) / state.physical.mass


def cumulative_probability(state: WavefunctionState, a: float, t: float) -> float:
    """P_t(x <= a) = int_{-inf}^a |psi_t|^2 dx, in closed form."""
    return ga.half_line_mass(state.position_branches(t), a)


def detect(state: WavefunctionState, precision: PrecisionSpec,
           query: DetectionQuery,
           violation_floor: float = VIOLATION_FLOOR) -> BackflowReport:
    """Scan the window for intervals where the current violates the bound.

    Intervals are maximal runs with bound - j > violation_floor; endpoints
    interior to the window are refined by bisection to 0.1% of the scan step.
    """
    times = query.times()
    j = np.array([quantum_current(state, query.a, t) for t in times])
    bound = np.array([classical_bound(state, precision, query.a, t) for t in times])
    neg_prob = np.array([state.negative_momentum_probability(t) for t in times])
    violation = np.maximum(bound - j, 0.0)

    def excess(t: float) -> float:
        return (classical_bound(state, precision, query.a, t)
                - quantum_current(state, query.a, t) - violation_floor)

    step = times[1] - times[0]
    tol = BISECTION_FRACTION * step
    flags = (bound - j) > violation_floor
    intervals: list[tuple[float, float]] = []
    i = 0
    while i < len(times):
        if not flags[i]:
            i += 1
            continue
        k = i
        while k + 1 < len(times) and flags[k + 1]:
            k += 1
        t_lo = times[i] if i == 0 else _bisect(excess, times[i - 1], times[i], tol)
        t_hi = times[k] if k == len(times) - 1 else _bisect(excess, times[k], times[k + 1], tol)
        intervals.append((t_lo, t_hi))
        i = k + 1

    return BackflowReport(times=times, j_quantum=j, j_classical_bound=bound,
                          violation=violation, neg_momentum_prob=neg_prob,
                          qb_intervals=intervals)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    """Root of a sign change of f on [lo, hi] to absolute tolerance tol."""
    f_lo = f(lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def probability_upper_bound(jd: JointDensity, a: float, delta_t: float,
                            mass: float) -> float:
    """Classical short-time ceiling on the probability above the level:

        P(x(t + delta_t) <= a) <= P(x <= a)
            + int over {p < 0, a <= x <= a + |p| delta_t / mass} of f dx dp.

    Both terms are evaluated from the sampled joint density.
    """
    if not delta_t > 0:
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    xs = jd.grid.x_grid.nodes()
    marg = position_marginal(jd)
    below = _cumulative_to(xs, marg, a)
    return below + negative_strip_mass(jd, a, delta_t, mass)


def _cumulative_to(xs: np.ndarray, density: np.ndarray, a: float) -> float:
    """Trapezoid integral of density over [xs[0], a], linearly interpolated at a."""
    if a <= xs[0]:
        return 0.0
    if a >= xs[-1]:
        return float(np.trapezoid(density, xs))
    k = int(np.searchsorted(xs, a))  # xs[k-1] < a <= xs[k]
    total = float(np.trapezoid(density[:k], xs[:k]))
    frac = (a - xs[k - 1]) / (xs[k] - xs[k - 1])
    value_at_a = density[k - 1] + frac * (density[k] - density[k - 1])
    total += 0.5 * (density[k - 1] + value_at_a) * (a - xs[k - 1])
    return total


def finite_difference_dpdt(state: WavefunctionState, a: float, t: float,
                           dt: float = 1e-3) -> float:
    """Symmetric finite difference of P_t(x <= a); continuity-equation check
    target for -j.  Default dt is 1 ns in internal units."""
    t_lo = max(t - dt, 0.0)
    return ((cumulative_probability(state, a, t + dt)
             - cumulative_probability(state, a, t_lo)) / (t + dt - t_lo))

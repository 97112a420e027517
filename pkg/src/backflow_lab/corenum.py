"""Units, grids, quadrature and finite-difference utilities shared by all modules.

Internal unit system: length in micrometers, time in microseconds, mass in
units of the particle mass.  This keeps every quantity of interest within a
few orders of magnitude of unity (hbar ~ 7.5e-4 for a Rb atom) and avoids
the catastrophic underflow that raw SI values (hbar ~ 1e-34) would cause.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

HBAR_SI = 1.054571817e-34  # J*s


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class GridTooNarrowError(ValueError):
    """A sampling grid does not cover the support of the integrand."""


@dataclass(frozen=True)
class UnitSystem:
    """Conversion factors between SI and internal units.

    length_unit: meters per internal length unit
    time_unit:   seconds per internal time unit
    mass_unit:   kilograms per internal mass unit
    """

    length_unit: float
    time_unit: float
    mass_unit: float

    def __post_init__(self):
        for name in ("length_unit", "time_unit", "mass_unit"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @classmethod
    def micron_microsecond(cls, mass_kg: float) -> "UnitSystem":
        """Standard internal system: 1 um, 1 us, particle mass."""
        return cls(length_unit=1e-6, time_unit=1e-6, mass_unit=mass_kg)

    @property
    def hbar(self) -> float:
        """Reduced Planck constant in internal units."""
        return HBAR_SI * self.time_unit / (self.mass_unit * self.length_unit**2)

    @property
    def momentum_unit(self) -> float:
        """kg*m/s per internal momentum unit."""
        return self.mass_unit * self.length_unit / self.time_unit

    # SI -> internal
    def length_in(self, meters: float) -> float:
        return meters / self.length_unit

    def time_in(self, seconds: float) -> float:
        return seconds / self.time_unit

    def mass_in(self, kg: float) -> float:
        return kg / self.mass_unit

    def momentum_in(self, kg_m_per_s: float) -> float:
        return kg_m_per_s / self.momentum_unit

    def acceleration_in(self, m_per_s2: float) -> float:
        return m_per_s2 * self.time_unit**2 / self.length_unit

    def angular_frequency_in(self, rad_per_s: float) -> float:
        return rad_per_s * self.time_unit

    # internal -> SI
    def length_out(self, x: float) -> float:
        return x * self.length_unit

    def time_out(self, t: float) -> float:
        return t * self.time_unit

    def momentum_out(self, p: float) -> float:
        return p * self.momentum_unit


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of n samples on [lo, hi]."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if self.lo >= self.hi:
            raise ValueError(f"grid requires lo < hi, got [{self.lo}, {self.hi}]")
        if self.n < 2:
            raise ValueError(f"grid requires n >= 2, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Cartesian product of a position grid and a momentum grid."""

    x_grid: Grid1D
    p_grid: Grid1D


def integrate_1d(samples: Sequence, grid: Grid1D) -> float:
    """Composite-trapezoid integral of samples on the grid.

    Exact for affine integrands up to rounding.
    """
    values = np.asarray(samples)
    if values.shape != (grid.n,):
        raise ValueError(
            f"sample length {values.shape} does not match grid.n = {grid.n}")
    if not np.all(np.isfinite(values)):
        raise ValueError("samples contain non-finite values")
    return float(np.trapezoid(values, dx=grid.spacing))


def central_derivative(f: Callable[[float], complex], x: float, h: float) -> complex:
    """Symmetric difference (f(x+h) - f(x-h)) / (2h); O(h^2) on smooth f."""
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    upper = complex(f(x + h))
    lower = complex(f(x - h))
    if not (math.isfinite(upper.real) and math.isfinite(upper.imag)
            and math.isfinite(lower.real) and math.isfinite(lower.imag)):
        raise ValueError("function evaluated to a non-finite value")
    return (upper - lower) / (2.0 * h)


# Gauss-Kronrod 15-point rule on [-1, 1]; the 7-point Gauss rule sits on the
# odd-index abscissae.
_KRONROD_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GAUSS_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _gk15(f, lo, hi):
    """One Gauss-Kronrod panel: returns (kronrod value, error estimate)."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    ys = center + half * _KRONROD_NODES
    vals = np.array([complex(f(y)) for y in ys])
    if not np.all(np.isfinite(vals.view(float))):
        raise IntegrationError(f"integrand non-finite on [{lo}, {hi}]")
    kronrod = half * np.sum(_KRONROD_WEIGHTS * vals)
    gauss = half * np.sum(_GAUSS_WEIGHTS * vals[1::2])
    return kronrod, abs(kronrod - gauss)


def adaptive_integrate(
    f: Callable[[float], complex],
    lo: float,
    hi: float,
    rel_tol: float = 1e-9,
    max_panels: int = 2048,
) -> complex:
    """Adaptive Gauss-Kronrod integration of a complex-valued integrand.

    The estimated relative error of the result is at most rel_tol.  Raises
    IntegrationError if the panel budget is exhausted before convergence;
    never returns a silently unconverged value.   Deterministic: the
    subdivision order depends only on the panel error estimates.
    """
    if not lo < hi:
        raise ValueError(f"integration requires lo < hi, got [{lo}, {hi}]")
    if not (0.0 < rel_tol <= 1e-2):
        raise ValueError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")

    value, err = _gk15(f, lo, hi)
    # heap of (-error, lo, hi, value, error); ties broken by interval bounds
    panels = [(-err, lo, hi, value, err)]
    n_panels = 1
    while True:
        total = sum(p[3] for p in panels)
        total_err = sum(p[4] for p in panels)
        scale = max(abs(total), 1e-300)
        if total_err <= rel_tol * scale or total_err < 1e-300:
            return complex(total)
        if n_panels >= max_panels:
            raise IntegrationError(
                f"no convergence after {n_panels} panels: "
                f"estimated error {total_err:.3e} vs target {rel_tol * scale:.3e}")
        _, a, b, _, _ = heapq.heappop(panels)
        mid = 0.5 * (a + b)
        for sub_lo, sub_hi in ((a, mid), (mid, b)):
            v, e = _gk15(f, sub_lo, sub_hi)
            heapq.heappush(panels, (-e, sub_lo, sub_hi, v, e))
        n_panels += 1

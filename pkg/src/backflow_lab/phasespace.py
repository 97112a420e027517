"""Finite-precision joint position-momentum measurement.

The measured joint density is

    f_t(x, p) = |O(x, p)|^2 / (2 pi hbar),
    O(x, p)   = int exp(-i p y / hbar) phi*(y - x/2) psi_t(y + x/2) dy,

where phi is the (Gaussian, centred) precision function of the apparatus.
With this normalization f_t is a probability density on phase space: it is
nonnegative, integrates to 1, its position marginal is the convolution
|psi|^2 * |phi|^2 and its momentum marginal is |psi_tilde|^2 * |phi_tilde|^2.
For a precision function whose |phi|^2 has standard deviation sigma_phi, the
momentum-side smoothing kernel |phi_tilde|^2 has standard deviation
hbar / (2 sigma_phi).
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from . import _gaussians as ga
from .corenum import Grid1D, GridTooNarrowError, PhaseSpaceGrid, adaptive_integrate
from .states import WavefunctionState

DEFAULT_GRID_N = 512
DEFAULT_GRID_HALF_WIDTH = 8.0  # smoothed standard deviations per side
BOUNDARY_THRESHOLD = 1e-10     # max boundary value relative to the peak


@dataclass(frozen=True)
class PrecisionSpec:
    """Measurement precision function phi: a centred Gaussian whose
    probability density |phi|^2 has standard deviation sigma_phi."""

    sigma_phi: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported precision kind {self.kind!r}")
        if not self.sigma_phi > 0:
            raise ValueError(f"sigma_phi must be positive, got {self.sigma_phi}")

    def amplitude_coefficients(self) -> ga.Branch:
        """phi(u) = exp(b2 u^2 + b1 u + b0), unit L2 norm."""
        b2 = -1.0 / (4.0 * self.sigma_phi**2)
        b0 = -0.25 * math.log(2.0 * math.pi * self.sigma_phi**2)
        return (b2, 0.0, b0)

    def momentum_kernel_width(self, hbar: float) -> float:
        """Standard deviation of the momentum smoothing kernel |phi_tilde|^2."""
        return hbar / (2.0 * self.sigma_phi)


@dataclass(frozen=True)
class JointDensity:
    """Grid-sampled joint density f_t(x, p); values[i, j] = f(x_i, p_j)."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    t: float
    precision: PrecisionSpec


def _slice_branches(state: WavefunctionState, precision: PrecisionSpec,
                    x: float, t: float) -> list[ga.Branch]:
    """Coefficients of p -> O(x, p) at fixed x: O = sum exp(g2 p^2 + g1 p + g0)."""
    hbar = state.physical.hbar
    b2, _, b0 = precision.amplitude_coefficients()
    out = []
    for a2, a1, a0 in state.position_branches(t):
        big_a = b2 + a2
        u = (a2 - b2) * x + a1
        c = big_a * x**2 / 4.0 + a1 * x / 2.0 + a0 + b0
        g2 = 1.0 / (4.0 * big_a * hbar**2)
        g1 = 1j * u / (2.0 * big_a * hbar)
        g0 = c - u**2 / (4.0 * big_a) + 0.5 * np.log(np.pi / -big_a)
        out.append((g2, g1, g0))
    return out


def wigner_moyal_overlap(state: WavefunctionState, precision: PrecisionSpec,
                         x, p, t: float, method: str = "analytic",
                         rel_tol: float = 1e-10):
    """Overlap <phi| W(x, p) |psi_t> = (1 / 2 pi hbar) O(x, p).

    method "analytic" evaluates the closed-form Gaussian algebra (x and p may
    be arrays); "quadrature" integrates the defining integral adaptively and
    serves as the independent cross-check path.
    """
    hbar = state.physical.hbar
    if method == "analytic":
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        bare = _bare_overlap_analytic(state, precision, x, p, t)
        result = bare / (2.0 * np.pi * hbar)
        return result if result.shape else complex(result)
    if method == "quadrature":
        return _bare_overlap_quadrature(state, precision, float(x), float(p), t,
                                        rel_tol) / (2.0 * np.pi * hbar)
    raise ValueError(f"unknown method {method!r}")


def _bare_overlap_analytic(state, precision, x, p, t):
    hbar = state.physical.hbar
    b2, _, b0 = precision.amplitude_coefficients()
    total = np.zeros(np.broadcast(x, p).shape, dtype=complex)
    for a2, a1, a0 in state.position_branches(t):
        big_a = b2 + a2
        big_b = -1j * p / hbar + (a2 - b2) * x + a1
        big_c = big_a * x**2 / 4.0 + a1 * x / 2.0 + a0 + b0
        total = total + np.sqrt(np.pi / -big_a) * np.exp(big_c - big_b**2 / (4.0 * big_a))
    return total


def _bare_overlap_quadrature(state, precision, x, p, t, rel_tol):
    hbar = state.physical.hbar
    b2, _, b0 = precision.amplitude_coefficients()
    s_lo, s_hi = state.position_support(t)
    lo = max(s_lo - x / 2.0, x / 2.0 - 8.5 * precision.sigma_phi)
    hi = min(s_hi - x / 2.0, x / 2.0 + 8.5 * precision.sigma_phi)
    if lo >= hi:
        return 0.0 + 0.0j

    def integrand(y):
        u = y - x / 2.0
        phi_conj = np.exp(b2 * u**2 + b0)  # phi is real
        return np.exp(-1j * p * y / hbar) * phi_conj * state.psi(y + x / 2.0, t)

    return adaptive_integrate(integrand, lo, hi, rel_tol=rel_tol)


def joint_density(state: WavefunctionState, precision: PrecisionSpec,
                  grid: PhaseSpaceGrid, t: float,
                  boundary_threshold: float = BOUNDARY_THRESHOLD,
                  threads: int = 1) -> JointDensity:
    """Sample f_t(x, p) on the grid.

    Raises GridTooNarrowError when the boundary carries more than
    boundary_threshold of the peak value, i.e. the grid misses support.
    Grid rows are computed independently, so the result is bitwise
    independent of the evaluation order (threads only split rows).
    """
    hbar = state.physical.hbar
    xs = grid.x_grid.nodes()
    ps = grid.p_grid.nodes()
    values = np.empty((grid.x_grid.n, grid.p_grid.n), dtype=float)

    def fill_rows(i_lo: int, i_hi: int):
        bare = _bare_overlap_analytic(
            state, precision, xs[i_lo:i_hi, None], ps[None, :], t)
        values[i_lo:i_hi, :] = np.abs(bare) ** 2 / (2.0 * np.pi * hbar)

    if threads <= 1:
        fill_rows(0, len(xs))
    else:
        block = max(1, math.ceil(len(xs) / threads))
        spans = [(i, min(i + block, len(xs))) for i in range(0, len(xs), block)]
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: fill_rows(*span), spans))

    peak = values.max()
    boundary = max(values[0, :].max(), values[-1, :].max(),
                   values[:, 0].max(), values[:, -1].max())
    if peak > 0 and boundary > boundary_threshold * peak:
        raise GridTooNarrowError(
            f"grid boundary carries {boundary / peak:.2e} of the peak density "
            f"(threshold {boundary_threshold:.1e}); widen the grid")
    return JointDensity(grid=grid, values=values, t=t, precision=precision)


def position_marginal(jd: JointDensity) -> np.ndarray:
    """Momentum integral of f; equals (|psi|^2 * |phi|^2)(x) on the x grid."""
    return np.trapezoid(jd.values, dx=jd.grid.p_grid.spacing, axis=1)


def momentum_marginal(jd: JointDensity) -> np.ndarray:
    """Position integral of f; equals (|psi_tilde|^2 * |phi_tilde|^2)(p) on the p grid."""
    return np.trapezoid(jd.values, dx=jd.grid.x_grid.spacing, axis=0)


def negative_momentum_moment(state: WavefunctionState, precision: PrecisionSpec,
                             x: float, t: float, method: str = "analytic",
                             rel_tol: float = 1e-10) -> float:
    """int_{-inf}^0 p f_t(x, p) dp; always <= 0.

    The analytic path sums pairwise half-line Gaussian moments; the
    quadrature path integrates the closed-form slice numerically.
    """
    hbar = state.physical.hbar
    slices = _slice_branches(state, precision, x, t)
    if method == "analytic":
        return ga.half_line_first_moment(slices, 0.0) / (2.0 * np.pi * hbar)
    if method == "quadrature":
        lo, _ = ga.support_interval(slices)
        if lo >= 0.0:
            return 0.0

        def integrand(p):
            val = ga.eval_branches(slices, p)
            return p * abs(val) ** 2 / (2.0 * np.pi * hbar)

        return adaptive_integrate(integrand, lo, 0.0, rel_tol=rel_tol).real
    raise ValueError(f"unknown method {method!r}")


def negative_momentum_mass(state: WavefunctionState, precision: PrecisionSpec,
                           x: float, t: float) -> float:
    """int_{-inf}^0 f_t(x, p) dp: smoothed negative-momentum density at x."""
    hbar = state.physical.hbar
    slices = _slice_branches(state, precision, x, t)
    return ga.half_line_mass(slices, 0.0) / (2.0 * np.pi * hbar)


def integrated_negative_momentum_moment(state: WavefunctionState,
                                        precision: PrecisionSpec | None,
                                        t: float) -> float:
    """int dx int_{-inf}^0 dp p f_t(x, p) = int_{-inf}^0 p (|psi_tilde|^2 * |phi_tilde|^2)(p) dp.

    With precision None the smoothing kernel is dropped, giving the
    delta-precision target int_{-inf}^0 p |psi_tilde(p)|^2 dp.
    """
    branches = state.momentum_branches(t)
    total = 0.0 + 0.0j
    if precision is None:
        for bn in branches:
            for bm in branches:
                total += ga.gauss_half_line_moment(*ga.pair_quadratic(bn, bm), 0.0)
        return float(total.real)
    width = precision.momentum_kernel_width(state.physical.hbar)
    for bn in branches:
        for bm in branches:
            q2, q1, q0 = ga.pair_quadratic(bn, bm)
            total += ga.gauss_half_line_moment(
                *ga.convolve_quadratic_with_gaussian(q2, q1, q0, width), 0.0)
    return float(total.real)


def negative_strip_mass(jd: JointDensity, a: float, delta_t: float,
                        mass: float) -> float:
    """Mass of f on the strip {p < 0, a <= x <= a + |p| delta_t / mass}.

    Trapezoid integration with a node-indicator; raises GridTooNarrowError if
    the strip extends past the sampled x range.
    """
    xs = jd.grid.x_grid.nodes()
    ps = jd.grid.p_grid.nodes()
    p_lo = ps[0]
    if p_lo < 0:
        required = a + abs(p_lo) * delta_t / mass
        if required > xs[-1] + 0.5 * jd.grid.x_grid.spacing:
            raise GridTooNarrowError(
                f"strip reaches x = {required:.4g} beyond the grid edge {xs[-1]:.4g}; "
                "widen the position grid or reduce delta_t")
    strip = (ps[None, :] < 0.0) & (xs[:, None] >= a) & (
        xs[:, None] <= a + np.abs(ps[None, :]) * delta_t / mass)
    masked = np.where(strip, jd.values, 0.0)
    inner = np.trapezoid(masked, dx=jd.grid.p_grid.spacing, axis=1)
    return float(np.trapezoid(inner, dx=jd.grid.x_grid.spacing))


def default_phase_space_grid(state: WavefunctionState, precision: PrecisionSpec,
                             t: float, n: int = DEFAULT_GRID_N,
                             half_width: float = DEFAULT_GRID_HALF_WIDTH) -> PhaseSpaceGrid:
    """Grid covering <x> +- 8 s_x and <p> +- 8 s_p of the smoothed density."""
    hbar = state.physical.hbar
    mean_x, var_x = state.mean_var_position(t)
    mean_p, var_p = state.mean_var_momentum(t)
    s_x = math.sqrt(var_x + precision.sigma_phi**2)
    s_p = math.sqrt(var_p + precision.momentum_kernel_width(hbar) ** 2)
    return PhaseSpaceGrid(
        x_grid=Grid1D(mean_x - half_width * s_x, mean_x + half_width * s_x, n),
        p_grid=Grid1D(mean_p - half_width * s_p, mean_p + half_width * s_p, n),
    )

"""Complex Gaussian-exponential algebra.

Every wavefunction in scope is a finite sum of branches
exp(a2*y**2 + a1*y + a0) with complex coefficients and Re(a2) < 0.  All
integrals the library needs (norms, moments, Fourier transforms, Wigner-Moyal
overlaps, half-line momentum moments) reduce to the closed forms below, so
no grid is involved in the primary evaluation paths.
"""

from __future__ import annotations

import numpy as np
from scipy.special import wofz

# branch triple: (a2, a1, a0), psi_branch(y) = exp(a2 y^2 + a1 y + a0)
Branch = tuple[complex, complex, complex]


def erfcx(z):
    """Scaled complementary error function exp(z^2) erfc(z) for complex z."""
    return wofz(1j * np.asarray(z, dtype=complex))


def gauss_integral(q2, q1, q0):
    """Integral over the real line of exp(q2 y^2 + q1 y + q0), Re(q2) < 0."""
    return np.sqrt(np.pi / -q2) * np.exp(q0 - q1**2 / (4.0 * q2))


def gauss_half_line(q2, q1, q0, upper=0.0):
    """Integral of exp(q2 y^2 + q1 y + q0) over (-inf, upper], Re(q2) < 0.

    Written in terms of erfcx so the exp(q1^2/4q2) factor never overflows.
    """
    s = np.sqrt(-q2)
    z = q1 / (2.0 * s) - s * upper
    return 0.5 * np.sqrt(np.pi) / s * np.exp(q0 + q1 * upper + q2 * upper**2) * erfcx(z)


def gauss_half_line_moment(q2, q1, q0, upper=0.0):
    """Integral of y * exp(q2 y^2 + q1 y + q0) over (-inf, upper].

    Uses d/dy exp(q2 y^2 + q1 y) = (2 q2 y + q1) exp(...), so
    int y exp = (boundary - q1 * int exp) / (2 q2).
    """
    boundary = np.exp(q0 + q1 * upper + q2 * upper**2)
    i0 = gauss_half_line(q2, q1, q0, upper)
    return (boundary - q1 * i0) / (2.0 * q2)


def pair_quadratic(bn: Branch, bm: Branch) -> Branch:
    """Coefficients of branch_n * conj(branch_m)."""
    a2n, a1n, a0n = bn
    a2m, a1m, a0m = bm
    return (a2n + np.conj(a2m), a1n + np.conj(a1m), a0n + np.conj(a0m))


def eval_branches(branches: list[Branch], y):
    """Sum of exp(a2 y^2 + a1 y + a0) over branches; y may be an array."""
    y = np.asarray(y, dtype=float)
    total = np.zeros(y.shape, dtype=complex)
    for a2, a1, a0 in branches:
        total += np.exp(a2 * y**2 + a1 * y + a0)
    return total if total.shape else complex(total)


def eval_branches_derivative(branches: list[Branch], y):
    """Derivative of eval_branches with respect to y."""
    y = np.asarray(y, dtype=float)
    total = np.zeros(y.shape, dtype=complex)
    for a2, a1, a0 in branches:
        total += (2.0 * a2 * y + a1) * np.exp(a2 * y**2 + a1 * y + a0)
    return total if total.shape else complex(total)


def norm_sq(branches: list[Branch]) -> float:
    """Integral of |sum of branches|^2 over the real line."""
    total = 0.0 + 0.0j
    for bn in branches:
        for bm in branches:
            q2, q1, q0 = pair_quadratic(bn, bm)
            total += gauss_integral(q2, q1, q0)
    return float(total.real)


def density_moments(branches: list[Branch]) -> tuple[float, float]:
    """Mean and variance of the density |sum of branches|^2 (assumed unit mass)."""
    mass = 0.0 + 0.0j
    first = 0.0 + 0.0j
    second = 0.0 + 0.0j
    for bn in branches:
        for bm in branches:
            q2, q1, q0 = pair_quadratic(bn, bm)
            g = gauss_integral(q2, q1, q0)
            center = -q1 / (2.0 * q2)
            mass += g
            first += g * center
            second += g * (center**2 - 1.0 / (2.0 * q2))
    mean = (first / mass).real
    var = (second / mass).real - mean**2
    return mean, var


def half_line_mass(branches: list[Branch], upper=0.0) -> float:
    """Integral of |sum of branches|^2 over (-inf, upper]."""
    total = 0.0 + 0.0j
    for bn in branches:
        for bm in branches:
            q2, q1, q0 = pair_quadratic(bn, bm)
            total += gauss_half_line(q2, q1, q0, upper)
    return float(total.real)


def half_line_first_moment(branches: list[Branch], upper=0.0) -> float:
    """Integral of y |sum of branches|^2 over (-inf, upper]."""
    total = 0.0 + 0.0j
    for bn in branches:
        for bm in branches:
            q2, q1, q0 = pair_quadratic(bn, bm)
            total += gauss_half_line_moment(q2, q1, q0, upper)
    return float(total.real)


def fourier_branch(branch: Branch, hbar: float) -> Branch:
    """Momentum representation of one branch.

    Convention: psi_tilde(p) = (2 pi hbar)^(-1/2) int exp(-i p y / hbar) psi(y) dy,
    which preserves the L2 norm (Parseval).
    """
    a2, a1, a0 = branch
    b2 = 1.0 / (4.0 * a2 * hbar**2)
    b1 = 1j * a1 / (2.0 * a2 * hbar)
    b0 = (a0 - a1**2 / (4.0 * a2)
          + 0.5 * np.log(np.pi / -a2) - 0.5 * np.log(2.0 * np.pi * hbar))
    return (b2, b1, b0)


def convolve_quadratic_with_gaussian(q2, q1, q0, width):
    """Coefficients of exp(q2 y^2 + q1 y + q0) convolved with a unit-mass
    Gaussian density of standard deviation width."""
    d = q2 - 1.0 / (2.0 * width**2)
    r2 = -1.0 / (4.0 * d * width**4) - 1.0 / (2.0 * width**2)
    r1 = -q1 / (2.0 * d * width**2)
    r0 = (q0 - q1**2 / (4.0 * d)
          + 0.5 * np.log(np.pi / -d) - 0.5 * np.log(2.0 * np.pi * width**2))
    return (r2, r1, r0)


def support_interval(branches: list[Branch], n_sigmas: float = 8.5) -> tuple[float, float]:
    """Interval outside which |sum of branches|^2 is negligible.

    n_sigmas = 8.5 puts the Gaussian envelope below 1e-16 of its peak.
    """
    los, his = [], []
    for a2, a1, _ in branches:
        re2 = a2.real
        center = -(a1.real) / (2.0 * re2)
        std = 1.0 / (2.0 * np.sqrt(-re2))
        los.append(center - n_sigmas * std)
        his.append(center + n_sigmas * std)
    return min(los), max(his)

"""Analytic wavefunction families: free Gaussian superpositions, the same in a
linear (gravity) potential, and coherent-state superpositions in a harmonic trap.

Conventions (internal units throughout; x axis points downward, so gravity
acts along +x):

* free branch with mean momentum p and width sigma:
    psi(x, t) = B / sqrt(4 sigma^2 + 2 i (hbar/m) t)
                * exp( (i/hbar) p (x - p t / 2m)
                       - (x - p t / m)^2 / (4 sigma^2 + 2 i (hbar/m) t) )
* linear potential V(x) = -m g x:
    psi(x, t) = exp(-(i/hbar)(-m g t x + m g^2 t^3 / 6)) psi_free(x - g t^2/2, t)
* harmonic trap, coherent branch alpha(t) = alpha0 exp(-i omega t) with a
  common global phase exp(-i omega t / 2):
    <x|alpha> = (m omega / pi hbar)^(1/4)
                * exp(-(m omega / 2 hbar)(x - x_a)^2 + (i/hbar) p_a (x - x_a/2)),
    x_a = sqrt(2 hbar / m omega) Re(alpha),  p_a = sqrt(2 hbar m omega) Im(alpha).

Branch weights are treated as relative amplitudes: the state is renormalized
numerically at t = 0 so that int |psi|^2 dx = 1 (unitary evolution keeps it so).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _gaussians as ga
from .corenum import UnitSystem

MODEL_FREE = "free-gaussian-superposition"
MODEL_LINEAR = "linear-potential"
MODEL_HARMONIC = "harmonic-coherent"

_KNOWN_MODELS = (MODEL_FREE, MODEL_LINEAR, MODEL_HARMONIC)


@dataclass(frozen=True)
class PhysicalParams:
    """Particle and potential constants, in internal units.

    mass is the particle mass (1.0 in the standard internal system), g the
    gravitational acceleration along +x, omega the trap angular frequency.
    """

    mass: float
    g: float
    omega: float
    hbar: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.g < 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if self.g > 0 and self.omega > 0:
            raise ValueError("at most one of g, omega may be nonzero")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def from_si(cls, units: UnitSystem, mass_kg: float,
                g_si: float = 0.0, omega_si: float = 0.0) -> "PhysicalParams":
        return cls(
            mass=units.mass_in(mass_kg),
            g=units.acceleration_in(g_si),
            omega=units.angular_frequency_in(omega_si),
            hbar=units.hbar,
        )


@dataclass(frozen=True)
class GaussianSuperpositionSpec:
    """Superposition of equal-width Gaussian packets centred at x = 0 at t = 0.

    branches: (weight, mean momentum) pairs; weights are relative amplitudes.
    """

    sigma: float
    branches: tuple[tuple[complex, float], ...]

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if len(self.branches) == 0:
            raise ValueError("at least one branch is required")
        if all(abs(w) == 0 for w, _ in self.branches):
            raise ValueError("branch weights must not all vanish")


@dataclass(frozen=True)
class CoherentSuperpositionSpec:
    """Superposition of coherent states of a trap with angular frequency omega.

    branches: (weight, alpha0) pairs with alpha0 the coherent amplitude at t=0.
    """

    branches: tuple[tuple[complex, complex], ...]
    omega: float

    def __post_init__(self):
        if len(self.branches) == 0:
            raise ValueError("at least one branch is required")
        if all(abs(w) == 0 for w, _ in self.branches):
            raise ValueError("branch weights must not all vanish")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


class WavefunctionState:
    """Evaluatable wavefunction psi_t(x) with derivative and momentum form.

    Construct via the free_gaussian_superposition / linear_potential_state /
    harmonic_coherent_state factories.  Immutable after construction; all
    evaluations are pure functions.
    """

    def __init__(self, model: str, params, physical: PhysicalParams):
        if model not in _KNOWN_MODELS:
            raise ValueError(f"unknown model tag {model!r}; expected one of {_KNOWN_MODELS}")
        if model == MODEL_HARMONIC:
            if not isinstance(params, CoherentSuperpositionSpec):
                raise TypeError("harmonic model requires a CoherentSuperpositionSpec")
            if not math.isclose(params.omega, physical.omega, rel_tol=1e-12):
                raise ValueError(
                    f"spec omega {params.omega} differs from physical omega {physical.omega}")
        else:
            if not isinstance(params, GaussianSuperpositionSpec):
                raise TypeError(f"{model} requires a GaussianSuperpositionSpec")
            if model == MODEL_FREE and physical.g != 0:
                raise ValueError("free model requires g = 0")
        self.model = model
        self.physical = physical
        self._weights = tuple(w for w, _ in _nonzero(params.branches))
        self._labels = tuple(b for _, b in _nonzero(params.branches))
        self.params = params
        # renormalize once at t = 0; evolution is unitary
        scale = math.sqrt(ga.norm_sq(self._raw_position_branches(0.0)))
        self._weights = tuple(w / scale for w in self._weights)

    # -- branch coefficient construction ------------------------------------

    def _raw_position_branches(self, t: float) -> list[ga.Branch]:
        ph = self.physical
        hbar, m = ph.hbar, ph.mass
        if self.model == MODEL_HARMONIC:
            omega = ph.omega
            width_factor = 0.25 * np.log(m * omega / (np.pi * hbar))
            branches = []
            for w, alpha0 in zip(self._weights, self._labels):
                alpha = alpha0 * np.exp(-1j * omega * t)
                xc = math.sqrt(2.0 * hbar / (m * omega)) * alpha.real
                pc = math.sqrt(2.0 * hbar * m * omega) * alpha.imag
                a2 = -m * omega / (2.0 * hbar)
                a1 = m * omega * xc / hbar + 1j * pc / hbar
                a0 = (np.log(complex(w)) + width_factor
                      - m * omega * xc**2 / (2.0 * hbar)
                      - 1j * pc * xc / (2.0 * hbar)
                      - 1j * omega * t / 2.0)
                branches.append((a2, a1, a0))
            return branches

        sigma = self.params.sigma
        d = 4.0 * sigma**2 + 2j * hbar * t / m
        branches = []
        for w, p in zip(self._weights, self._labels):
            v = p / m
            a2 = -1.0 / d
            a1 = 1j * p / hbar + 2.0 * v * t / d
            a0 = (np.log(complex(w)) - 0.5 * np.log(d)
                  - 1j * p**2 * t / (2.0 * m * hbar) - (v * t) ** 2 / d)
            branches.append((a2, a1, a0))
        if self.model == MODEL_LINEAR and self.physical.g != 0.0:
            branches = [_apply_gravity(b, t, self.physical) for b in branches]
        return branches

    def position_branches(self, t: float) -> list[ga.Branch]:
        """Coefficients (a2, a1, a0) with psi_t(x) = sum exp(a2 x^2 + a1 x + a0)."""
        if t < 0:
            raise ValueError(f"t must be nonnegative, got {t}")
        return self._raw_position_branches(t)

    def momentum_branches(self, t: float) -> list[ga.Branch]:
        """Same decomposition for psi_tilde_t(p)."""
        hbar = self.physical.hbar
        return [ga.fourier_branch(b, hbar) for b in self.position_branches(t)]

    # -- evaluations ---------------------------------------------------------

    def psi(self, x, t: float):
        """Complex amplitude psi_t(x); x may be an array."""
        return ga.eval_branches(self.position_branches(t), x)

    def dpsi_dx(self, x, t: float):
        """Analytic spatial derivative of psi_t at x."""
        return ga.eval_branches_derivative(self.position_branches(t), x)

    def psi_momentum(self, p, t: float):
        """Momentum representation psi_tilde_t(p) (norm-preserving convention)."""
        return ga.eval_branches(self.momentum_branches(t), p)

    def norm(self, t: float) -> float:
        """int |psi_t|^2 dx, evaluated in closed form; ~1 for all t."""
        return ga.norm_sq(self.position_branches(t))

    def negative_momentum_probability(self, t: float) -> float:
        """int_{-inf}^0 |psi_tilde_t(p)|^2 dp."""
        return ga.half_line_mass(self.momentum_branches(t), 0.0)

    def mean_var_position(self, t: float) -> tuple[float, float]:
        return ga.density_moments(self.position_branches(t))

    def mean_var_momentum(self, t: float) -> tuple[float, float]:
        return ga.density_moments(self.momentum_branches(t))

    def position_support(self, t: float, n_sigmas: float = 8.5) -> tuple[float, float]:
        return ga.support_interval(self.position_branches(t), n_sigmas)

    def momentum_support(self, t: float, n_sigmas: float = 8.5) -> tuple[float, float]:
        return ga.support_interval(self.momentum_branches(t), n_sigmas)


def _nonzero(branches):
    kept = [(complex(w), b) for w, b in branches if abs(complex(w)) > 0]
    return kept


def _apply_gravity(branch: ga.Branch, t: float, ph: PhysicalParams) -> ga.Branch:
    """Shift x -> x - g t^2/2 and attach the linear-potential phase factor."""
    a2, a1, a0 = branch
    hbar, m, g = ph.hbar, ph.mass, ph.g
    s = 0.5 * g * t**2
    a1_s = a1 - 2.0 * a2 * s
    a0_s = a0 + a2 * s**2 - a1 * s
    a1_s = a1_s + 1j * m * g * t / hbar
    a0_s = a0_s - 1j * m * g**2 * t**3 / (6.0 * hbar)
    return (a2, a1_s, a0_s)


def free_gaussian_superposition(spec: GaussianSuperpositionSpec,
                                physical: PhysicalParams) -> WavefunctionState:
    return WavefunctionState(MODEL_FREE, spec, physical)


def linear_potential_state(spec: GaussianSuperpositionSpec,
                           physical: PhysicalParams) -> WavefunctionState:
    return WavefunctionState(MODEL_LINEAR, spec, physical)


def harmonic_coherent_state(spec: CoherentSuperpositionSpec,
                            physical: PhysicalParams) -> WavefunctionState:
    return WavefunctionState(MODEL_HARMONIC, spec, physical)

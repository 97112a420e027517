"""Worst-case classical bound from independently measured marginals.

When only the position density rho(x) and momentum density mu(p) are known,
the strip term of the short-time probability bound must be maximized over
every joint distribution with those marginals.  On a grid this is a
transportation-polytope linear program with 0/1 costs

    maximize   sum c(i, j) f(i, j)
    subject to row sums = x cell masses, column sums = p cell masses, f >= 0,
    c(i, j) = 1  iff  p_j < 0 and a <= x_i <= a + |p_j| delta_t / mass,

which is solved exactly as a maximum-flow problem; the minimum cut is the
optimality certificate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .corenum import Grid1D
from .phasespace import JointDensity, negative_strip_mass, position_marginal, momentum_marginal

MASS_TOL = 1e-6


class MarginalMismatchError(ValueError):
    """Supplied marginals are inconsistent (mass, grid, or joint mismatch)."""


@dataclass(frozen=True)
class MarginalPair:
    """Independently measured position and momentum densities on their grids."""

    x_grid: Grid1D
    x_density: np.ndarray
    p_grid: Grid1D
    p_density: np.ndarray

    def __post_init__(self):
        for name, grid, dens in (("x", self.x_grid, self.x_density),
                                 ("p", self.p_grid, self.p_density)):
            dens = np.asarray(dens, dtype=float)
            if dens.shape != (grid.n,):
                raise MarginalMismatchError(
                    f"{name} density length {dens.shape} does not match grid.n={grid.n}")
            if np.any(dens < -1e-12):
                raise MarginalMismatchError(f"{name} density has negative entries")
            mass = np.trapezoid(np.clip(dens, 0.0, None), dx=grid.spacing)
            if abs(mass - 1.0) > MASS_TOL:
                raise MarginalMismatchError(
                    f"{name} density integrates to {mass:.8f}, expected 1 +- {MASS_TOL}")

    @classmethod
    def from_joint(cls, jd: JointDensity) -> "MarginalPair":
        return cls(x_grid=jd.grid.x_grid, x_density=position_marginal(jd),
                   p_grid=jd.grid.p_grid, p_density=momentum_marginal(jd))


@dataclass(frozen=True)
class CutCertificate:
    """Minimum cut proving optimality: indices whose supply arc (x side) or
    demand arc (p side) is severed, and the resulting cut capacity."""

    cut_x_cells: tuple[int, ...]
    cut_p_cells: tuple[int, ...]
    capacity: float


@dataclass(frozen=True)
class CouplingBound:
    max_strip_mass: float
    bound_value: float
    certificate: CutCertificate


def cell_masses(grid: Grid1D, density: np.ndarray) -> np.ndarray:
    """Trapezoid cell masses: h/2 at the two end nodes, h inside."""
    w = np.full(grid.n, grid.spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.clip(np.asarray(density, dtype=float), 0.0, None) * w


def worst_case_bound(marginals: MarginalPair, a: float, delta_t: float,
                     mass: float, refine_boundary: bool = False) -> CouplingBound:
    """Maximum strip mass over all couplings of the marginals, plus P(x <= a).

    refine_boundary splits x cells at the per-column strip edges (density
    taken piecewise-constant within a cell), reducing the O(spacing)
    discretization error of the default center rule.
    """
    if not delta_t > 0:
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    x_masses = cell_masses(marginals.x_grid, marginals.x_density)
    p_masses = cell_masses(marginals.p_grid, marginals.p_density)
    if abs(x_masses.sum() - p_masses.sum()) > MASS_TOL:
        raise MarginalMismatchError(
            f"marginal masses differ: {x_masses.sum():.8f} vs {p_masses.sum():.8f}")

    ps = marginals.p_grid.nodes()
    strip_hi = {j: a + abs(ps[j]) * delta_t / mass for j in range(len(ps)) if ps[j] < 0}

    if refine_boundary:
        centers, x_masses = _refined_x_cells(marginals, a, strip_hi)
    else:
        centers = marginals.x_grid.nodes()

    flow_value, cert = _max_flow(centers, x_masses, p_masses, a, strip_hi)
    below = float(x_masses[centers < a].sum())
    return CouplingBound(max_strip_mass=flow_value,
                         bound_value=below + flow_value,
                         certificate=cert)


def _refined_x_cells(marginals: MarginalPair, a: float, strip_hi: dict):
    """Split trapezoid cells at the strip breakpoints; returns centers, masses."""
    grid = marginals.x_grid
    nodes = grid.nodes()
    h = grid.spacing
    density = np.clip(np.asarray(marginals.x_density, dtype=float), 0.0, None)
    breakpoints = np.array(sorted({a, *strip_hi.values()}))
    centers, masses = [], []
    for i, x in enumerate(nodes):
        lo = x - 0.5 * h if i > 0 else x
        hi = x + 0.5 * h if i < grid.n - 1 else x
        if hi <= lo:
            continue
        cuts = breakpoints[(breakpoints > lo) & (breakpoints < hi)]
        edges = np.concatenate(([lo], cuts, [hi]))
        for e_lo, e_hi in zip(edges[:-1], edges[1:]):
            centers.append(0.5 * (e_lo + e_hi))
            masses.append(density[i] * (e_hi - e_lo))
    return np.array(centers), np.array(masses)


def _max_flow(centers, x_masses, p_masses, a, strip_hi):
    graph = nx.DiGraph()
    source, sink = "s", "t"
    admissible_p = []
    for j, hi in strip_hi.items():
        rows = np.where((centers >= a) & (centers <= hi) & (x_masses > 0))[0]
        if rows.size and p_masses[j] > 0:
            admissible_p.append((j, rows))
    if not admissible_p:
        return 0.0, CutCertificate((), (), 0.0)

    used_rows = sorted({int(i) for _, rows in admissible_p for i in rows})
    for i in used_rows:
        graph.add_edge(source, ("x", i), capacity=float(x_masses[i]))
    for j, rows in admissible_p:
        graph.add_edge(("p", j), sink, capacity=float(p_masses[j]))
        for i in rows:
            graph.add_edge(("x", int(i)), ("p", j), capacity=float("inf"))

    flow_value, _ = nx.maximum_flow(graph, source, sink)
    cut_value, (s_side, _) = nx.minimum_cut(graph, source, sink)
    cut_x = tuple(sorted(i for i in used_rows if ("x", i) not in s_side))
    cut_p = tuple(sorted(j for j, _ in admissible_p if ("p", j) in s_side))
    capacity = float(sum(x_masses[i] for i in cut_x) + sum(p_masses[j] for j in cut_p))
    return float(flow_value), CutCertificate(cut_x, cut_p, capacity)


def coupling_consistency_check(jd: JointDensity, marginals: MarginalPair,
                               a: float, delta_t: float, mass: float,
                               marginal_tol: float = 1e-5) -> bool:
    """The smoothed quantum joint density is one admissible coupling, so its
    strip mass can never exceed the worst case over all couplings.

    Raises MarginalMismatchError unless the supplied marginals are the
    marginals of jd (same grids, max abs deviation <= marginal_tol).
    """
    if (marginals.x_grid != jd.grid.x_grid) or (marginals.p_grid != jd.grid.p_grid):
        raise MarginalMismatchError("marginal grids differ from the joint density grids")
    own = MarginalPair.from_joint(jd)
    dx = np.max(np.abs(own.x_density - marginals.x_density))
    dp = np.max(np.abs(own.p_density - marginals.p_density))
    if dx > marginal_tol or dp > marginal_tol:
        raise MarginalMismatchError(
            f"marginals deviate from the joint density (x: {dx:.2e}, p: {dp:.2e}, "
            f"tolerance {marginal_tol:.1e})")
    strip = negative_strip_mass(jd, a, delta_t, mass)
    worst = worst_case_bound(marginals, a, delta_t, mass)
    return strip <= worst.max_strip_mass + 1e-6


def write_marginal_csv(path: str | Path, grid: Grid1D, density: np.ndarray,
                       coordinate_name: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([coordinate_name, "density"])
        for x, d in zip(grid.nodes(), density):
            writer.writerow([f"{x:.17g}", f"{d:.17g}"])


def read_marginal_csv(path: str | Path) -> tuple[Grid1D, np.ndarray]:
    """Read a two-column (coordinate, density) CSV with a header row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ValueError(f"{path}: expected a header row and at least 2 data rows")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
    coords, density = data[:, 0], data[:, 1]
    spacings = np.diff(coords)
    if spacings.min() <= 0:
        raise ValueError(f"{path}: coordinates must be strictly increasing")
    if (spacings.max() - spacings.min()) > 1e-9 * spacings.max():
        raise ValueError(f"{path}: coordinates must be uniformly spaced")
    grid = Grid1D(float(coords[0]), float(coords[-1]), len(coords))
    return grid, density

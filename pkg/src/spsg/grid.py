"""Uniform velocity grids and the quadrature rules used for the drift integrals.

Two layouts are supported:

``"cell"``
    ``n`` cells of width ``dv = (v_max - v_min) / n`` with centers
    ``v_min + (i + 1/2) dv``. Every center and every interior interface lies
    strictly inside the domain, so a diffusion coefficient vanishing at the
    endpoints is never evaluated there.

``"node"``
    ``n`` grid points ``v_min + i dv`` with ``dv = (v_max - v_min) / (n - 1)``,
    endpoints included. Each point owns a control volume of width ``dv``.
    Points of a grid with ``n`` nodes are a subset of the points of the grid
    with ``2n - 1`` nodes, which is what convergence studies by injection need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

LAYOUTS = ("cell", "node")


@dataclass(frozen=True)
class UniformGrid1D:
    v_min: float
    v_max: float
    n: int
    layout: str = "cell"

    def __post_init__(self) -> None:
        if self.layout not in LAYOUTS:
            raise ValueError(f"unknown grid layout {self.layout!r}")
        if not self.v_max > self.v_min:
            raise ValueError("v_max must exceed v_min")
        if self.n < 2:
            raise ValueError(f"a grid needs at least 2 cells, got n={self.n}")

    @property
    def dv(self) -> float:
        if self.layout == "cell":
            return (self.v_max - self.v_min) / self.n
        return (self.v_max - self.v_min) / (self.n - 1)

    @property
    def centers(self) -> np.ndarray:
        i = np.arange(self.n)
        if self.layout == "cell":
            return self.v_min + (i + 0.5) * self.dv
        return self.v_min + i * self.dv

    @property
    def interfaces(self) -> np.ndarray:
        """All ``n + 1`` control-volume faces, boundary faces included."""
        c = self.centers
        return np.concatenate(([c[0] - 0.5 * self.dv], c + 0.5 * self.dv))

    @property
    def inner_interfaces(self) -> np.ndarray:
        return self.centers[:-1] + 0.5 * self.dv

    @property
    def length(self) -> float:
        return self.v_max - self.v_min


def build_grid(v_min: float, v_max: float, n: int) -> UniformGrid1D:
    """Cell-centered grid with ``n`` cells on ``[v_min, v_max]``."""
    return UniformGrid1D(float(v_min), float(v_max), int(n), "cell")


def node_grid(v_min: float, v_max: float, n_points: int) -> UniformGrid1D:
    """Vertex grid with ``n_points`` points, endpoints included."""
    return UniformGrid1D(float(v_min), float(v_max), int(n_points), "node")


def make_grid(v_min: float, v_max: float, n: int, layout: str = "cell") -> UniformGrid1D:
    return UniformGrid1D(float(v_min), float(v_max), int(n), layout)


# ---------------------------------------------------------------------------
# quadrature rules on a single interval
# ---------------------------------------------------------------------------

# Open Newton-Cotes rules on [0, 1]: nodes k/(m+1), k = 1..m.
_OPEN_NC = {
    "NC2": (np.array([1.0, 2.0]) / 3.0, np.array([0.5, 0.5])),
    "NC4": (np.array([1.0, 2.0, 3.0]) / 4.0, np.array([2.0, -1.0, 2.0]) / 3.0),
    "NC6": (
        np.arange(1, 6) / 6.0,
        np.array([11.0, -14.0, 26.0, -14.0, 11.0]) / 20.0,
    ),
}

# polynomial degree integrated exactly
_NC_DEGREE = {"NC2": 1, "NC4": 3, "NC6": 5}

# SP_k labels used throughout the CLI and the experiments
SP_RULES = {"2": "NC2", "4": "NC4", "6": "NC6", "G": "GL"}


@dataclass(frozen=True)
class QuadRule:
    """Quadrature on the reference interval [0, 1]; weights sum to 1.

    All rules are open: no node sits on an interval endpoint.
    """

    kind: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int

    @property
    def size(self) -> int:
        return self.nodes.size


def quad_rule(kind: str, n: int = 8) -> QuadRule:
    """Build ``NC2``, ``NC4``, ``NC6`` or ``GL`` (Gauss-Legendre, ``n`` nodes).

    The SP labels ``"2"``, ``"4"``, ``"6"``, ``"G"`` are accepted as aliases.
    """
    kind = SP_RULES.get(str(kind), str(kind))
    if kind in _OPEN_NC:
        x, w = _OPEN_NC[kind]
        return QuadRule(kind, x.copy(), w.copy(), _NC_DEGREE[kind])
    if kind == "GL":
        if n < 1:
            raise ValueError("Gauss-Legendre needs at least one node")
        x, w = np.polynomial.legendre.leggauss(n)
        return QuadRule(f"GL{n}", 0.5 * (x + 1.0), 0.5 * w, 2 * n - 1)
    raise ValueError(f"unknown quadrature rule {kind!r}")


def rule_points(rule: QuadRule, a: np.ndarray | float, b: np.ndarray | float) -> np.ndarray:
    """Quadrature nodes mapped to every interval ``[a_k, b_k]``; shape (..., size)."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return a + (b - a) * rule.nodes


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rule: QuadRule,
) -> float:
    """Apply ``rule`` once on ``[a, b]``. ``f`` must accept an array of nodes."""
    if not b > a:
        raise ValueError("integration interval must satisfy a < b")
    x = a + (b - a) * rule.nodes
    return float((b - a) * np.dot(rule.weights, np.asarray(f(x), dtype=float)))


def trapezoid_weights(grid: UniformGrid1D) -> np.ndarray:
    w = np.full(grid.n, grid.dv)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def trapezoid_on_grid(samples: np.ndarray, grid: UniformGrid1D) -> float:
    """Composite trapezoid through the grid centers (first to last center)."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != grid.n:
        raise ValueError(f"expected {grid.n} samples, got {samples.shape[-1]}")
    return samples @ trapezoid_weights(grid)

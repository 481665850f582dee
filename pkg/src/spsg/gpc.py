"""Orthonormal Legendre chaos in a uniform random parameter on [-1, 1].

The basis is normalized so that ``E[phi_h phi_k] = delta_hk`` under the
uniform density 1/2. With that normalization the variance of the expansion is
simply the sum of the squared higher coefficients.

A gPC field is a plain array whose leading axis runs over the projections
``h = 0..M``; the remaining axes are the velocity grid (1D or 2D).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class GPCBasis:
    order: int
    theta_nodes: np.ndarray = field(repr=False)
    theta_weights: np.ndarray = field(repr=False)
    # values[h, q] = phi_h(theta_q)
    values: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def n_theta(self) -> int:
        return self.theta_nodes.size

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix ``E[phi_h phi_k]``."""
        return (self.values * self.theta_weights) @ self.values.T

    def evaluate(self, theta: np.ndarray | float) -> np.ndarray:
        """All basis polynomials at ``theta``; shape (M+1, *theta.shape)."""
        return legendre_table(self.order, np.asarray(theta, dtype=float))


def legendre_table(order: int, theta: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre values by the three-term recurrence."""
    theta = np.asarray(theta, dtype=float)
    p = np.empty((order + 1,) + theta.shape)
    p[0] = 1.0
    if order >= 1:
        p[1] = theta
    for n in range(1, order):
        p[n + 1] = ((2 * n + 1) * theta * p[n] - n * p[n - 1]) / (n + 1)
    scale = np.sqrt(2.0 * np.arange(order + 1) + 1.0)
    return p * scale.reshape((-1,) + (1,) * theta.ndim)


def build_basis(order: int, n_theta: int | None = None) -> GPCBasis:
    """Orthonormal Legendre basis of degree ``order`` with a Gauss rule in theta.

    ``n_theta`` defaults to ``2 * (order + 1)`` nodes, enough to integrate
    products of two degree-``order`` expansions with a degree-``order`` datum.
    """
    if order < 0:
        raise ValueError("gPC order must be nonnegative")
    if n_theta is None:
        n_theta = 2 * (order + 1)
    if n_theta < order + 1:
        raise ValueError(f"n_theta={n_theta} cannot resolve order {order} (need >= {order + 1})")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    return GPCBasis(order, x, 0.5 * w, legendre_table(order, x))


def eval_poly(basis: GPCBasis, h: int, theta: float) -> float:
    if not 0 <= h <= basis.order:
        raise IndexError(f"polynomial index {h} outside 0..{basis.order}")
    return float(legendre_table(h, np.asarray(theta, dtype=float))[h])


def project_function(
    basis: GPCBasis,
    f0: Callable[[float, np.ndarray], np.ndarray],
    points: np.ndarray,
) -> np.ndarray:
    """Galerkin projections ``E[f0(theta, v) phi_h(theta)]`` at the given points.

    ``f0(theta, points)`` is called once per theta node and must return an
    array shaped like ``points`` (which may be 1D centers or a 2D mesh).
    """
    samples = np.stack([np.asarray(f0(t, points), dtype=float) for t in basis.theta_nodes])
    weighted = basis.values * basis.theta_weights
    return np.tensordot(weighted, samples, axes=(1, 0))


def reconstruct(field: np.ndarray, basis: GPCBasis, theta: np.ndarray | float) -> np.ndarray:
    """Evaluate the truncated expansion at ``theta``."""
    phi = basis.evaluate(theta)
    return np.tensordot(phi, field, axes=(0, 0))


def reconstruct_mean(field: np.ndarray) -> np.ndarray:
    return np.asarray(field)[0]


def reconstruct_variance(field: np.ndarray, basis: GPCBasis | None = None) -> np.ndarray:
    """Pointwise variance of the expansion, ``sum_{k>=1} fhat_k**2``.

    Only orthonormal bases are produced by :func:`build_basis`, so ``basis``
    is accepted for interface symmetry and checked for size.
    """
    field = np.asarray(field)
    if basis is not None and field.shape[0] != basis.size:
        raise ValueError("field and basis disagree on the number of projections")
    return np.sum(field[1:] ** 2, axis=0)


def confidence_band(field: np.ndarray, basis: GPCBasis | None = None) -> np.ndarray:
    """Upper band ``E[f] + sqrt(Var f)``."""
    return reconstruct_mean(field) + np.sqrt(reconstruct_variance(field, basis))

"""Structure-preserving (Chang-Cooper type) flux discretization.

For every interior interface ``i+1/2`` between centers ``v_i`` and ``v_{i+1}``

    lambda  = int_{v_i}^{v_{i+1}} C(v) / D(v) dv,   C = B[g] + D'
    delta   = 1/lambda + 1/(1 - exp(lambda))
    Ctilde  = D_{i+1/2} lambda / dv
    F       = Ctilde [(1-delta) f_{i+1} + delta f_i] + D_{i+1/2} (f_{i+1} - f_i) / dv

and ``d f_i / dt = (F_{i+1/2} - F_{i-1/2}) / dv`` with zero flux through the
two boundary faces. The weights depend only on the drift, so one workspace
serves every gPC projection.

Expanding the weights, the flux is ``(D/dv) [B(-lambda) f_{i+1} - B(lambda) f_i]``
with the Bernoulli function ``B(x) = x / (exp(x) - 1)``. Both coefficients are
positive for every finite lambda and need no cancellation, so the
implementation evaluates the flux in that form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import QuadRule, UniformGrid1D, rule_points, trapezoid_weights

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]

# below this |lambda| the weight is taken from its Taylor series
_SERIES_CUTOFF = 0.1


@dataclass(frozen=True)
class ProblemSpec:
    """Interaction kernel and diffusion of a background Fokker-Planck model.

    ``kernel`` is ``P(v, v_*)``, vectorized by broadcasting; ``None`` means
    ``P == 1``.
    """

    diffusion: Callable[[np.ndarray], np.ndarray]
    diffusion_prime: Callable[[np.ndarray], np.ndarray]
    kernel: Optional[Kernel] = None


@dataclass
class Background:
    """Background density sampled at the grid centers.

    ``evolution`` is ``"frozen"``, ``"advected"`` (speed ``alpha``) or
    ``"none"``. ``mass`` is recorded at construction with the trapezoid used
    by the interaction integral; ``periodic_mass`` is the quantity a periodic
    transport step conserves.
    """

    samples: np.ndarray
    grid: UniformGrid1D
    evolution: str = "frozen"
    alpha: float = 0.0
    mass: float = field(init=False)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.grid.n,):
            raise ValueError("background samples must live on the grid centers")
        if self.evolution not in ("frozen", "advected", "none"):
            raise ValueError(f"unknown background evolution {self.evolution!r}")
        # Lax-Wendroff transport leaves small dispersive undershoots; only
        # prescribed backgrounds must be nonnegative
        if self.evolution != "advected" and np.any(self.samples < 0):
            raise ValueError("background density must be nonnegative")
        self.mass = float(self.samples @ trapezoid_weights(self.grid))

    def with_samples(self, samples: np.ndarray) -> "Background":
        out = Background(samples, self.grid, self.evolution, self.alpha)
        return out

    @property
    def periodic_mass(self) -> float:
        g = self.samples[:-1] if self.grid.layout == "node" else self.samples
        return float(self.grid.dv * g.sum())

    def moments(self) -> tuple[float, float]:
        """Discrete mass and first moment."""
        w = trapezoid_weights(self.grid) * self.samples
        return float(w.sum()), float(w @ self.grid.centers)


@dataclass(frozen=True)
class FluxWorkspace:
    """Interface weights for one drift state, shared by all projections.

    Arrays have shape ``(..., n - 1)``: one entry per interior interface, with
    optional leading axes for batches of grid lines (2D sweeps).
    """

    dv: float
    lam: np.ndarray
    d_half: np.ndarray
    delta: np.ndarray = field(repr=False)
    c_tilde: np.ndarray = field(repr=False)
    # flux = upper * f_{i+1} - lower * f_i
    upper: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.c_tilde), initial=0.0))

    @property
    def max_diffusion(self) -> float:
        return float(np.max(self.d_half, initial=0.0))


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def bernoulli(x: np.ndarray | float) -> np.ndarray:
    """``x / (exp(x) - 1)`` with the removable singularity at 0 filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = x / np.expm1(x)
    xs = np.where(small, x, 0.0)
    x2 = xs * xs
    series = 1.0 - xs / 2.0 + x2 / 12.0 * (1.0 - x2 / 60.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 40.0)))
    out = np.where(small, series, out)
    # exp overflow: x / inf -> 0
    return np.where(np.isnan(out), 0.0, out)


def compute_delta(lam: np.ndarray | float) -> np.ndarray | float:
    """Interpolation weight ``1/lam + 1/(1 - exp(lam))``, in (0, 1).

    Evaluated as ``1/lam - 1/expm1(lam)``; near zero the odd Taylor series
    ``1/2 - lam/12 + lam^3/720 - lam^5/30240 + lam^7/1209600`` is used instead
    because the two terms cancel there.
    """
    lam_arr = np.asarray(lam, dtype=float)
    small = np.abs(lam_arr) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, lam_arr)
    with np.errstate(over="ignore"):
        direct = 1.0 / safe - 1.0 / np.expm1(safe)
    x = np.where(small, lam_arr, 0.0)
    x2 = x * x
    series = 0.5 - x / 12.0 * (1.0 - x2 / 60.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 40.0)))
    out = np.where(small, series, direct)
    return float(out) if np.ndim(lam) == 0 else out


def delta_from_steady_state(f_i: np.ndarray | float, f_ip1: np.ndarray | float):
    """Weight reproducing a known positive steady state exactly."""
    f_i = np.asarray(f_i, dtype=float)
    f_ip1 = np.asarray(f_ip1, dtype=float)
    if np.any(f_i <= 0) or np.any(f_ip1 <= 0):
        raise ValueError("steady-state weights need strictly positive values")
    return compute_delta(np.log(f_i) - np.log(f_ip1))


def workspace_from_lambda(lam: np.ndarray, d_half: np.ndarray, dv: float) -> FluxWorkspace:
    lam = np.asarray(lam, dtype=float)
    d_half = np.broadcast_to(np.asarray(d_half, dtype=float), lam.shape)
    if np.any(~np.isfinite(lam)):
        raise ValueError("non-finite lambda; the drift integral diverged")
    scale = d_half / dv
    return FluxWorkspace(
        dv=dv,
        lam=lam,
        d_half=d_half,
        delta=compute_delta(lam) if lam.ndim else np.asarray(compute_delta(lam)),
        c_tilde=scale * lam,
        upper=scale * bernoulli(-lam),
        lower=scale * bernoulli(lam),
    )


def workspace_from_steady_state(
    f_inf: np.ndarray,
    d_half: np.ndarray,
    dv: float,
) -> FluxWorkspace:
    """Workspace whose numerical flux vanishes exactly on ``f_inf``."""
    f_inf = np.asarray(f_inf, dtype=float)
    if np.any(f_inf <= 0):
        raise ValueError("steady-state weights need strictly positive values")
    logf = np.log(f_inf)
    return workspace_from_lambda(logf[..., :-1] - logf[..., 1:], d_half, dv)


# ---------------------------------------------------------------------------
# drift
# ---------------------------------------------------------------------------


def interaction_drift(
    background: Background,
    kernel: Optional[Kernel],
    v: np.ndarray | float,
) -> np.ndarray:
    """``B[g](v) = int P(v, v*) (v - v*) g(v*) dv*`` by the trapezoid over the centers."""
    v_arr = np.asarray(v, dtype=float)
    vs = background.grid.centers
    wg = trapezoid_weights(background.grid) * background.samples
    if kernel is None:
        mass = wg.sum()
        first = wg @ vs
        return v_arr * mass - first
    flat = v_arr.reshape(-1, 1)
    p = np.asarray(kernel(flat, vs[None, :]), dtype=float)
    out = (p * (flat - vs[None, :])) @ wg
    return out.reshape(v_arr.shape)


def total_drift(
    spec: ProblemSpec,
    background: Optional[Background],
    v: np.ndarray | float,
) -> np.ndarray:
    """``C[g](v) = B[g](v) + D'(v)``."""
    v_arr = np.asarray(v, dtype=float)
    out = np.asarray(spec.diffusion_prime(v_arr), dtype=float)
    if background is not None:
        out = out + interaction_drift(background, spec.kernel, v_arr)
    return out


def lambda_integrals(
    drift: Callable[[np.ndarray], np.ndarray],
    diffusion: Callable[[np.ndarray], np.ndarray],
    grid: UniformGrid1D,
    rule: QuadRule,
) -> np.ndarray:
    """``int C/D`` over every ``[v_i, v_{i+1}]`` with one application of ``rule``."""
    c = grid.centers
    x = rule_points(rule, c[:-1], c[1:])
    integrand = np.asarray(drift(x), dtype=float) / np.asarray(diffusion(x), dtype=float)
    return grid.dv * (integrand @ rule.weights)


def compute_lambda(
    spec: ProblemSpec,
    background: Optional[Background],
    grid: UniformGrid1D,
    rule: QuadRule,
    i: int,
) -> float:
    """lambda at the interior interface between centers ``i`` and ``i+1`` (0-based)."""
    if not 0 <= i < grid.n - 1:
        raise IndexError(f"interface {i} is not interior")
    c = grid.centers
    x = rule_points(rule, c[i], c[i + 1])
    integrand = total_drift(spec, background, x) / spec.diffusion(x)
    return float(grid.dv * (integrand @ rule.weights))


def build_workspace(
    spec: ProblemSpec,
    background: Optional[Background],
    grid: UniformGrid1D,
    rule: QuadRule,
) -> FluxWorkspace:
    lam = lambda_integrals(
        lambda x: total_drift(spec, background, x), spec.diffusion, grid, rule
    )
    d_half = np.asarray(spec.diffusion(grid.inner_interfaces), dtype=float)
    return workspace_from_lambda(lam, d_half, grid.dv)


# ---------------------------------------------------------------------------
# fluxes and their divergence
# ---------------------------------------------------------------------------


def assemble_fluxes(field: np.ndarray, ws: FluxWorkspace) -> np.ndarray:
    """Numerical fluxes at all ``n + 1`` faces; the two boundary faces are 0."""
    field = np.asarray(field, dtype=float)
    inner = ws.upper * field[..., 1:] - ws.lower * field[..., :-1]
    pad = [(0, 0)] * (inner.ndim - 1) + [(1, 1)]
    return np.pad(inner, pad)


def fluxes_weighted_form(field: np.ndarray, ws: FluxWorkspace) -> np.ndarray:
    """Same fluxes written as ``Ctilde * ftilde + D (f_{i+1} - f_i) / dv``."""
    field = np.asarray(field, dtype=float)
    f_tilde = (1.0 - ws.delta) * field[..., 1:] + ws.delta * field[..., :-1]
    inner = ws.c_tilde * f_tilde + ws.d_half * (field[..., 1:] - field[..., :-1]) / ws.dv
    pad = [(0, 0)] * (inner.ndim - 1) + [(1, 1)]
    return np.pad(inner, pad)


def divergence(fluxes: np.ndarray, dv: float) -> np.ndarray:
    return (fluxes[..., 1:] - fluxes[..., :-1]) / dv


def rhs(field: np.ndarray, ws: FluxWorkspace) -> np.ndarray:
    return divergence(assemble_fluxes(field, ws), ws.dv)


def tridiagonal(ws: FluxWorkspace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(sub, diag, sup)`` of the semi-discrete operator, each shaped ``(..., n)``.

    Row ``i`` reads ``sub[i] f[i-1] + diag[i] f[i] + sup[i] f[i+1]``;
    ``sub[0]`` and ``sup[-1]`` are zero.
    """
    pad_lo = [(0, 0)] * (ws.lam.ndim - 1) + [(1, 0)]
    pad_hi = [(0, 0)] * (ws.lam.ndim - 1) + [(0, 1)]
    up = ws.upper / ws.dv
    lo = ws.lower / ws.dv
    sup = np.pad(up, pad_hi)
    sub = np.pad(lo, pad_lo)
    diag = -(np.pad(lo, pad_hi) + np.pad(up, pad_lo))
    return sub, diag, sup


def discrete_steady_state(ws: FluxWorkspace, mass: float | np.ndarray) -> np.ndarray:
    """Zero-flux state of the scheme, ``f_{i+1} = f_i exp(-lambda)``, with given mass."""
    lam = ws.lam
    logf = np.concatenate(
        [np.zeros(lam.shape[:-1] + (1,)), -np.cumsum(lam, axis=-1)], axis=-1
    )
    logf -= logf.max(axis=-1, keepdims=True)
    shape = np.exp(logf)
    total = ws.dv * shape.sum(axis=-1, keepdims=True)
    return np.asarray(mass, dtype=float)[..., None] * shape / total

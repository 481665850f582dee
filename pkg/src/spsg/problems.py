"""Ready-made model problems.

* opinion dynamics on [-1, 1] with diffusion ``sigma2/2 (1 - v^2)^2`` and a
  bounded-confidence interaction with a Gaussian background (frozen, or
  advected by a periodic Lax-Wendroff scheme);
* a 2D swarming model with self-propulsion, constant noise and alignment to
  the mean velocity of a fixed Gaussian background, solved by dimensional
  splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gpc import GPCBasis, project_function
from .grid import QuadRule, UniformGrid1D, rule_points, trapezoid_weights
from .sp import Background, FluxWorkspace, ProblemSpec, workspace_from_lambda


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------


@dataclass
class OpinionConfig:
    """Parameters of the opinion model.

    The initial datum is ``C(theta) [exp(-(v-u1)^2 / 2 sigma0_2) +
    exp(-(v-u2)^2 / 2 sigma0_2)]`` with ``u1 = u_bar + kappa theta``,
    ``u2 = -u_bar + kappa theta`` and discrete mass ``rho0 + rho1 theta``.
    """

    sigma2: float = 0.2
    confidence: float = 2.0
    u_g: float = 0.25
    sigma_g2: float = 0.01
    bimodal: bool = False
    u_bar: float = 0.25
    kappa: float = 0.25
    sigma0_2: float = 0.05
    rho0: float = 1.0
    rho1: float = 0.5
    v_min: float = -1.0
    v_max: float = 1.0

    def validate(self) -> None:
        if not self.sigma2 > 0:
            raise ValueError("sigma2: must be positive")
        if not self.sigma_g2 > 0:
            raise ValueError("sigma_g2: must be positive")
        if not self.sigma0_2 > 0:
            raise ValueError("sigma0_2: must be positive")
        if not self.confidence > 0:
            raise ValueError("confidence: must be positive")
        if not -1.0 < self.u_g < 1.0:
            raise ValueError("u_g: must lie in (-1, 1)")
        if not self.rho0 - abs(self.rho1) > 0:
            raise ValueError("rho1: mass law rho0 + rho1*theta must stay positive on [-1, 1]")

    def rho(self, theta):
        return self.rho0 + self.rho1 * np.asarray(theta, dtype=float)

    @property
    def deterministic_mass(self) -> bool:
        return self.rho1 == 0.0


@dataclass
class AdvectedBackgroundConfig:
    alpha: float = 0.05
    cfl: float = 0.5

    def validate(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha: must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl: must lie in (0, 1]")


@dataclass
class SwarmingConfig:
    """Swarming model ``div[alpha v(|v|^2-1) f + (v - u_g) f + D grad f]``."""

    alpha: float = 1.0
    noise: float = 0.2
    mu: tuple[float, float] = (0.0, 0.0)
    spread: tuple[float, float] = (0.5, 0.5)
    v_min: float = -4.0
    v_max: float = 4.0
    kappa: float = 0.5
    sigma0_2: float = 0.5
    rho0: float = 1.0
    rho1: float = 0.5

    def validate(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha: must be positive")
        if not self.noise > 0:
            raise ValueError("noise: must be positive")
        if min(self.spread) <= 0:
            raise ValueError("spread: must be positive")
        if not self.rho0 - abs(self.rho1) > 0:
            raise ValueError("rho1: mass law rho0 + rho1*theta must stay positive on [-1, 1]")

    def rho(self, theta):
        return self.rho0 + self.rho1 * np.asarray(theta, dtype=float)


# ---------------------------------------------------------------------------
# opinion model
# ---------------------------------------------------------------------------


def bounded_confidence_kernel(radius: float):
    """Indicator ``P(v, v*) = 1{|v - v*| <= radius}``."""
    if not radius > 0:
        raise ValueError("confidence radius must be positive")

    def kernel(v, v_star):
        return (np.abs(np.asarray(v) - np.asarray(v_star)) <= radius).astype(float)

    kernel.radius = radius
    return kernel


def opinion_diffusion(sigma2: float):
    def d(v):
        v = np.asarray(v, dtype=float)
        return 0.5 * sigma2 * (1.0 - v * v) ** 2

    def d_prime(v):
        v = np.asarray(v, dtype=float)
        return -2.0 * sigma2 * v * (1.0 - v * v)

    return d, d_prime


def opinion_spec(config: OpinionConfig) -> ProblemSpec:
    d, dp = opinion_diffusion(config.sigma2)
    width = config.v_max - config.v_min
    # the indicator saturates on the whole domain: use the P == 1 fast path
    kernel = None if config.confidence >= width else bounded_confidence_kernel(config.confidence)
    return ProblemSpec(diffusion=d, diffusion_prime=dp, kernel=kernel)


def gaussian_background(
    u_g: float,
    sigma_g2: float,
    grid: UniformGrid1D,
    bimodal: bool = False,
    evolution: str = "frozen",
    alpha: float = 0.0,
) -> Background:
    """Gaussian (or symmetric bimodal) background with unit discrete mass."""
    v = grid.centers
    g = np.exp(-((v - u_g) ** 2) / (2.0 * sigma_g2))
    if bimodal:
        g = g + np.exp(-((v + u_g) ** 2) / (2.0 * sigma_g2))
    g = g / (g @ trapezoid_weights(grid))
    return Background(g, grid, evolution, alpha)


def opinion_background(config: OpinionConfig, grid: UniformGrid1D, **kw) -> Background:
    return gaussian_background(config.u_g, config.sigma_g2, grid, config.bimodal, **kw)


def _bumps(config: OpinionConfig, theta: float, v: np.ndarray) -> np.ndarray:
    u1 = config.u_bar + config.kappa * theta
    u2 = -config.u_bar + config.kappa * theta
    s = 2.0 * config.sigma0_2
    return np.exp(-((v - u1) ** 2) / s) + np.exp(-((v - u2) ** 2) / s)


def opinion_initial(config: OpinionConfig, theta: float, v: np.ndarray, grid: UniformGrid1D) -> np.ndarray:
    """Two-bump initial density at ``theta`` with discrete mass ``rho(theta)``."""
    shape = _bumps(config, theta, grid.centers)
    c = config.rho(theta) / (grid.dv * shape.sum())
    return c * _bumps(config, theta, np.asarray(v, dtype=float))


def opinion_initial_field(config: OpinionConfig, grid: UniformGrid1D, basis: GPCBasis) -> np.ndarray:
    v = grid.centers
    return project_function(basis, lambda t, x: opinion_initial(config, t, x, grid), v)


def opinion_steady_shape(v: np.ndarray, sigma2: float, u_g: float) -> np.ndarray:
    """Unnormalized stationary profile for ``P == 1``; zero at and beyond +-1."""
    v = np.asarray(v, dtype=float)
    inside = np.abs(v) < 1.0
    w = np.where(inside, v, 0.0)
    one = 1.0 - w * w
    log_s = (
        -2.0 * np.log(one)
        + u_g / (2.0 * sigma2) * (np.log1p(w) - np.log1p(-w))
        - (1.0 - u_g * w) / (sigma2 * one)
    )
    log_s = np.where(inside, log_s, -np.inf)
    return np.exp(log_s - np.max(log_s))


def projected_masses(config: OpinionConfig, basis: GPCBasis) -> np.ndarray:
    """``E[rho(theta) phi_h(theta)]`` for every h."""
    return basis.values @ (basis.theta_weights * config.rho(basis.theta_nodes))


def opinion_steady_state(
    config: OpinionConfig,
    grid: UniformGrid1D,
    h: int | None,
    basis: GPCBasis,
    background: Background | None = None,
) -> np.ndarray:
    """Projected stationary states for ``P == 1`` (confidence radius >= 2).

    Each row is the closed-form profile scaled to the discrete mass
    ``E[rho phi_h]``. When ``background`` is given its discrete mass and mean
    replace ``(1, u_g)``, matching the drift the scheme actually sees.
    ``h=None`` returns all rows.
    """
    if config.confidence < (config.v_max - config.v_min):
        raise ValueError("closed-form steady state requires P == 1 (confidence radius >= domain width)")
    sigma2, u_g = config.sigma2, config.u_g
    if background is not None:
        # B = m v - first is m (v - first/m): same profile with sigma2/m
        mass, first = background.moments()
        sigma2, u_g = sigma2 / mass, first / mass
    shape = opinion_steady_shape(grid.centers, sigma2, u_g)
    shape = shape / (grid.dv * shape.sum())
    masses = projected_masses(config, basis)
    if h is None:
        return masses[:, None] * shape[None, :]
    return masses[h] * shape


# ---------------------------------------------------------------------------
# evolving background
# ---------------------------------------------------------------------------


def lax_wendroff_periodic(g: np.ndarray, courant: float) -> np.ndarray:
    gp = np.roll(g, -1)
    gm = np.roll(g, 1)
    return g - 0.5 * courant * (gp - gm) + 0.5 * courant * courant * (gp - 2.0 * g + gm)


def lax_wendroff_step(background: Background, alpha: float, dt: float) -> Background:
    """One periodic Lax-Wendroff step of ``g_t + alpha g_v = 0``.

    On a node grid the two endpoint samples are the same periodic point; the
    update runs on the ``n - 1`` distinct samples and copies the first to the
    last. The scheme is linear and conservative, so ``periodic_mass`` is kept
    to rounding; it is not positivity preserving and undershoots are kept.
    """
    grid = background.grid
    courant = alpha * dt / grid.dv
    if abs(courant) > 1.0 + 1e-12:
        raise ValueError(f"Lax-Wendroff Courant number {courant:.4g} exceeds 1")
    g = background.samples
    if grid.layout == "node":
        inner = lax_wendroff_periodic(g[:-1], courant)
        new = np.append(inner, inner[0])
    else:
        new = lax_wendroff_periodic(g, courant)
    return background.with_samples(new)


# ---------------------------------------------------------------------------
# 2D swarming
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid2D:
    x: UniformGrid1D
    y: UniformGrid1D

    @property
    def cell_area(self) -> float:
        return self.x.dv * self.y.dv

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x.centers, self.y.centers, indexing="ij")


def swarming_background(config: SwarmingConfig, grid2d: Grid2D) -> np.ndarray:
    vx, vy = grid2d.mesh()
    (mx, my), (sx, sy) = config.mu, config.spread
    g = np.exp(-0.5 * (((vx - mx) / sx) ** 2 + ((vy - my) / sy) ** 2)) / (2.0 * np.pi * sx * sy)
    return g


def background_mean_2d(g: np.ndarray, grid2d: Grid2D) -> np.ndarray:
    """``int v g dv`` by the tensor trapezoid (the background has unit mass)."""
    w = np.outer(trapezoid_weights(grid2d.x), trapezoid_weights(grid2d.y))
    vx, vy = grid2d.mesh()
    return np.array([np.sum(w * vx * g), np.sum(w * vy * g)])


def swarming_drift(config: SwarmingConfig, v: np.ndarray, u_g: np.ndarray) -> np.ndarray:
    """``alpha v (|v|^2 - 1) + (v - u_g)`` for ``v`` of shape ``(2, ...)``."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u_g, dtype=float).reshape((2,) + (1,) * (v.ndim - 1))
    r2 = v[0] ** 2 + v[1] ** 2
    return config.alpha * v * (r2 - 1.0) + (v - u)


def swarming_potential(config: SwarmingConfig, vx, vy, u_g) -> np.ndarray:
    r2 = vx * vx + vy * vy
    a = config.alpha
    return a * r2 * r2 / 4.0 + (1.0 - a) * r2 / 2.0 - (u_g[0] * vx + u_g[1] * vy)


def swarming_steady_state(
    config: SwarmingConfig,
    grid2d: Grid2D,
    masses: np.ndarray,
    u_g: np.ndarray,
) -> np.ndarray:
    """``C_h exp(-potential / D)`` scaled to the discrete masses ``masses[h]``."""
    vx, vy = grid2d.mesh()
    log_s = -swarming_potential(config, vx, vy, u_g) / config.noise
    s = np.exp(log_s - log_s.max())
    s = s / (grid2d.cell_area * s.sum())
    return np.asarray(masses, dtype=float)[:, None, None] * s[None]


def swarming_maximizer(config: SwarmingConfig, u_g: np.ndarray) -> np.ndarray:
    """Critical point of the stationary profile: root of the drift.

    Along the direction of ``u_g`` the drift root solves
    ``alpha r^3 + (1 - alpha) r = |u_g|``; for ``u_g = 0`` and ``alpha <= 1``
    it is the origin.
    """
    u = np.asarray(u_g, dtype=float)
    norm = np.hypot(*u)
    a = config.alpha
    if norm == 0.0:
        if a <= 1.0:
            return np.zeros(2)
        raise ValueError("stationary profile is a ring for alpha > 1 and u_g = 0")
    roots = np.roots([a, 0.0, 1.0 - a, -norm])
    r = max(z.real for z in roots if abs(z.imag) < 1e-10 and z.real > 0)
    return r * u / norm


def swarming_initial(config: SwarmingConfig, theta: float, grid2d: Grid2D) -> np.ndarray:
    vx, vy = grid2d.mesh()
    c = config.kappa * theta
    bump = np.exp(-((vx - c) ** 2 + (vy - c) ** 2) / (2.0 * config.sigma0_2))
    return config.rho(theta) * bump / (grid2d.cell_area * bump.sum())


def swarming_initial_field(config: SwarmingConfig, grid2d: Grid2D, basis: GPCBasis) -> np.ndarray:
    vx, _ = grid2d.mesh()
    return project_function(basis, lambda t, _v: swarming_initial(config, t, grid2d), vx)


def line_workspaces(
    config: SwarmingConfig,
    grid2d: Grid2D,
    u_g: np.ndarray,
    rule: QuadRule,
    axis: int,
) -> FluxWorkspace:
    """Batched 1D workspaces for sweeps along ``axis`` (0: x, 1: y).

    Each line keeps the other coordinate fixed at its center value; the
    drift component along the sweep is integrated with ``rule``.
    """
    along = grid2d.x if axis == 0 else grid2d.y
    across = grid2d.y if axis == 0 else grid2d.x
    c = along.centers
    s = rule_points(rule, c[:-1], c[1:])[None, :, :]
    t = across.centers[:, None, None]
    pts = (s, t) if axis == 0 else (t, s)
    comp = swarming_drift(config, np.broadcast_arrays(*pts), u_g)[axis]
    lam = along.dv * (comp @ rule.weights) / config.noise
    return workspace_from_lambda(lam, np.full(lam.shape, config.noise), along.dv)

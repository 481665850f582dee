"""Time loops tying workspaces, steppers and background evolution together."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd
from typing import Callable, Iterable, Optional

import numpy as np

from .grid import QuadRule, UniformGrid1D
from .problems import lax_wendroff_step
from .sp import Background, FluxWorkspace, ProblemSpec, build_workspace
from .stepping import SCHEMES, advance, dt_bound


def time_unit(times: Iterable[float]) -> float:
    """Largest step that divides every observation time (rational gcd)."""
    fr = [Fraction(float(t)).limit_denominator(10**6) for t in times if t > 0]
    if not fr:
        raise ValueError("need at least one positive observation time")
    den = 1
    for f in fr:
        den = den * f.denominator // gcd(den, f.denominator)
    num = 0
    for f in fr:
        num = gcd(num, f.numerator * (den // f.denominator))
    return num / den


def fit_dt(dt_max: float, times: Iterable[float]) -> float:
    """Largest ``dt <= dt_max`` landing exactly on every observation time."""
    if not dt_max > 0:
        raise ValueError("dt must be positive")
    unit = time_unit(times)
    return unit / ceil(unit / dt_max * (1.0 - 1e-12))


@dataclass
class Simulation1D:
    """gPC field on a 1D grid driven by a frozen or advected background.

    With an advected background every step first produces the background at
    ``t + dt/2`` and ``t + dt`` by Lax-Wendroff from its state at ``t``; the
    stepper then requests whichever stage times it needs.
    """

    spec: ProblemSpec
    grid: UniformGrid1D
    rule: QuadRule
    background: Optional[Background]
    field: np.ndarray
    scheme: str = "rk4"
    bound: Optional[str] = None
    t: float = 0.0
    steps: int = 0
    _frozen_ws: Optional[FluxWorkspace] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        self.field = np.array(self.field, dtype=float)

    @property
    def advected(self) -> bool:
        return self.background is not None and self.background.evolution == "advected"

    def workspace(self, background: Optional[Background] = None) -> FluxWorkspace:
        if background is None and not self.advected:
            if self._frozen_ws is None:
                self._frozen_ws = build_workspace(self.spec, self.background, self.grid, self.rule)
            return self._frozen_ws
        bg = self.background if background is None else background
        return build_workspace(self.spec, bg, self.grid, self.rule)

    def step(self, dt: float) -> None:
        t0 = self.t
        if self.advected:
            bg0 = self.background
            alpha = bg0.alpha
            states = {t0: bg0}

            def source(t: float) -> FluxWorkspace:
                if t not in states:
                    states[t] = lax_wendroff_step(bg0, alpha, t - t0)
                return build_workspace(self.spec, states[t], self.grid, self.rule)

            self.field = advance(self.field, source, t0, dt, self.scheme, self.bound)
            self.background = lax_wendroff_step(bg0, alpha, dt)
        else:
            ws = self.workspace()
            self.field = advance(self.field, ws, t0, dt, self.scheme, self.bound)
        self.steps += 1
        self.t = t0 + dt

    def run_to(
        self,
        t_end: float,
        dt: float,
        callback: Optional[Callable[["Simulation1D"], None]] = None,
        every: int = 1,
    ) -> None:
        """Advance with steps of ``dt`` until ``t_end`` (the last step is shortened)."""
        n = int(round((t_end - self.t) / dt))
        if abs(self.t + n * dt - t_end) > 1e-9 * max(1.0, t_end):
            n = ceil((t_end - self.t) / dt)
        start = self.t
        for k in range(1, n + 1):
            target = start + k * dt if k < n else t_end
            self.step(target - self.t)
            if callback is not None and (k % every == 0 or k == n):
                callback(self)


# ---------------------------------------------------------------------------
# 2D dimensional splitting
# ---------------------------------------------------------------------------


def split_step_2d(
    field2d: np.ndarray,
    ws_x: FluxWorkspace,
    ws_y: FluxWorkspace,
    dt: float,
    scheme: str,
    bound: Optional[str] = None,
) -> np.ndarray:
    """Strang splitting: half step in x, full step in y, half step in x.

    ``field2d`` is ``(M+1, Nx, Ny)``. ``ws_x`` holds one workspace per row
    (arrays ``(Ny, Nx-1)``), ``ws_y`` one per column (``(Nx, Ny-1)``).
    """
    f = np.asarray(field2d, dtype=float)

    def sweep_x(g: np.ndarray, h: float) -> np.ndarray:
        g = np.swapaxes(g, -1, -2)
        g = advance(np.ascontiguousarray(g), ws_x, 0.0, h, scheme, bound)
        return np.swapaxes(g, -1, -2)

    f = sweep_x(f, 0.5 * dt)
    f = advance(f, ws_y, 0.0, dt, scheme, bound)
    return np.ascontiguousarray(sweep_x(f, 0.5 * dt))


def split_dt_bound(ws_x: FluxWorkspace, ws_y: FluxWorkspace, mode: str) -> float:
    """Largest Strang step whose sweeps all respect the 1D bound ``mode``."""
    return min(2.0 * dt_bound(ws_x, mode), dt_bound(ws_y, mode))


@dataclass
class Simulation2D:
    """gPC field on a tensor grid with fixed per-line workspaces."""

    ws_x: FluxWorkspace
    ws_y: FluxWorkspace
    field: np.ndarray
    scheme: str = "si1"
    bound: Optional[str] = None
    t: float = 0.0
    steps: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        self.field = np.array(self.field, dtype=float)

    def step(self, dt: float) -> None:
        self.field = split_step_2d(self.field, self.ws_x, self.ws_y, dt, self.scheme, self.bound)
        self.steps += 1
        self.t += dt

    run_to = Simulation1D.run_to

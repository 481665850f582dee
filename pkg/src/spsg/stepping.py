"""Time steppers for the semi-discrete SP system and their positivity bounds.

All steppers act on arrays shaped ``(M+1, ..., n)``: the gPC projections
first, grid lines (optional) next, the velocity index last. The weights are
supplied either as a :class:`~spsg.sp.FluxWorkspace` (frozen drift) or as a
callable ``t -> FluxWorkspace`` for an evolving background.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .sp import FluxWorkspace, rhs, tridiagonal

WorkspaceSource = Union[FluxWorkspace, Callable[[float], FluxWorkspace]]

SCHEMES = ("euler", "rk4", "si1", "si2")


class PositivityBoundError(ValueError):
    """Raised when a step would exceed the positivity time-step bound."""


class SolverError(RuntimeError):
    pass


def _at(source: WorkspaceSource, t: float) -> FluxWorkspace:
    return source if isinstance(source, FluxWorkspace) else source(t)


def explicit_dt_bound(ws: FluxWorkspace) -> float:
    """``dv^2 / (2 (M dv + D))`` with ``M = max|Ctilde|`` and ``D = max D_{i+1/2}``."""
    dv = ws.dv
    return dv * dv / (2.0 * (ws.max_drift * dv + ws.max_diffusion))


def semiimplicit_dt_bound(ws: FluxWorkspace) -> float:
    """``dv / (2 M)``; infinite when there is no drift."""
    m = ws.max_drift
    return np.inf if m == 0.0 else ws.dv / (2.0 * m)


def crank_nicolson_dt_bound(ws: FluxWorkspace) -> float:
    """Step keeping the explicit half of the trapezoidal update nonnegative.

    The implicit half is an M-matrix for any step, so nonnegativity of
    ``I + dt/2 L`` (twice the explicit-Euler bound) is sufficient.
    """
    return 2.0 * explicit_dt_bound(ws)


_BOUNDS = {
    "explicit": explicit_dt_bound,
    "semiimplicit": semiimplicit_dt_bound,
    "cn": crank_nicolson_dt_bound,
}


def dt_bound(ws: FluxWorkspace, mode: str) -> float:
    """Bound named by ``mode``: ``explicit``, ``semiimplicit`` or ``cn``."""
    try:
        return _BOUNDS[mode](ws)
    except KeyError:
        raise ValueError(f"unknown bound mode {mode!r}") from None


def check_bound(ws: FluxWorkspace, dt: float, mode: str | None, strict: bool = False) -> None:
    if mode is None or mode == "manual":
        return
    bound = dt_bound(ws, mode)
    ok = dt < bound if strict else dt <= bound * (1.0 + 1e-12)
    if not ok:
        raise PositivityBoundError(f"dt={dt:.6g} violates the {mode} positivity bound {bound:.6g}")


# ---------------------------------------------------------------------------
# explicit schemes
# ---------------------------------------------------------------------------


def step_euler(
    field: np.ndarray,
    source: WorkspaceSource,
    dt: float,
    t: float = 0.0,
    bound: str | None = None,
) -> np.ndarray:
    """Forward Euler.

    Written as ``(1 + dt L_ii) f_i + dt (L_i,i-1 f_{i-1} + L_i,i+1 f_{i+1})``
    so that under the explicit bound every term is nonnegative for
    nonnegative input, and the result is too, without rounding exceptions.
    """
    ws = _at(source, t)
    check_bound(ws, dt, bound)
    sub, diag, sup = tridiagonal(ws)
    keep = 1.0 + dt * diag
    # at exactly the bound the coefficient is 0 up to rounding
    keep = np.where((keep < 0) & (keep > -64 * np.finfo(float).eps), 0.0, keep)
    out = keep * field
    out[..., 1:] += dt * sub[..., 1:] * field[..., :-1]
    out[..., :-1] += dt * sup[..., :-1] * field[..., 1:]
    return out


def step_rk4(
    field: np.ndarray,
    source: WorkspaceSource,
    t: float,
    dt: float,
    bound: str | None = None,
) -> np.ndarray:
    """Classical four-stage Runge-Kutta; the stage weights follow ``source``."""
    w0 = _at(source, t)
    wh = _at(source, t + 0.5 * dt)
    w1 = _at(source, t + dt)
    if bound is not None:
        for ws in (w0, wh, w1):
            check_bound(ws, dt, bound)
    k1 = rhs(field, w0)
    k2 = rhs(field + 0.5 * dt * k1, wh)
    k3 = rhs(field + 0.5 * dt * k2, wh)
    k4 = rhs(field + dt * k3, w1)
    return field + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# tridiagonal solver
# ---------------------------------------------------------------------------


def thomas_factor(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray):
    """LU factors of tridiagonal matrices stored along the last axis.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i`` (``lower[0]``, ``upper[-1]`` are ignored). Leading axes index
    independent systems.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    shape = np.broadcast_shapes(lower.shape, diag.shape, upper.shape)
    lower, diag, upper = (np.broadcast_to(a, shape) for a in (lower, diag, upper))
    n = shape[-1]
    piv = np.empty(shape)
    mult = np.empty(shape)
    piv[..., 0] = diag[..., 0]
    for i in range(1, n):
        if np.any(piv[..., i - 1] == 0.0):
            raise SolverError(f"zero pivot in row {i - 1}")
        mult[..., i] = lower[..., i] / piv[..., i - 1]
        piv[..., i] = diag[..., i] - mult[..., i] * upper[..., i - 1]
    if np.any(piv[..., n - 1] == 0.0):
        raise SolverError(f"zero pivot in row {n - 1}")
    return mult, piv, upper


def thomas_apply(factors, rhs_: np.ndarray) -> np.ndarray:
    mult, piv, upper = factors
    y = np.array(rhs_, dtype=float, copy=True)
    n = y.shape[-1]
    for i in range(1, n):
        y[..., i] -= mult[..., i] * y[..., i - 1]
    y[..., n - 1] /= piv[..., n - 1]
    for i in range(n - 2, -1, -1):
        y[..., i] = (y[..., i] - upper[..., i] * y[..., i + 1]) / piv[..., i]
    return y


def thomas_solve(lower, diag, upper, rhs_):
    """Solve tridiagonal systems (no pivoting; diagonally dominant input expected)."""
    return thomas_apply(thomas_factor(lower, diag, upper), rhs_)


# ---------------------------------------------------------------------------
# semi-implicit schemes
# ---------------------------------------------------------------------------


def _tri_apply(sub, diag, sup, f, scale):
    out = f + scale * diag * f
    out[..., 1:] += scale * sub[..., 1:] * f[..., :-1]
    out[..., :-1] += scale * sup[..., :-1] * f[..., 1:]
    return out


def step_semi_implicit(
    field: np.ndarray,
    source: WorkspaceSource,
    dt: float,
    order: int = 1,
    t: float = 0.0,
    bound: str | None = None,
) -> np.ndarray:
    """Semi-implicit step: fluxes implicit in ``f``, weights frozen in time.

    ``order=1`` takes the weights at ``t`` and solves ``(I - dt L) f' = f``.
    ``order=2`` takes them at ``t + dt/2`` and solves the trapezoidal update
    ``(I - dt/2 L) f' = (I + dt/2 L) f``. One factorization serves all rows.
    """
    if order not in (1, 2):
        raise ValueError("semi-implicit order must be 1 or 2")
    ws = _at(source, t if order == 1 else t + 0.5 * dt)
    check_bound(ws, dt, bound, strict=(bound == "semiimplicit"))
    sub, diag, sup = tridiagonal(ws)
    theta = dt if order == 1 else 0.5 * dt
    factors = thomas_factor(-theta * sub, 1.0 - theta * diag, -theta * sup)
    rhs_ = field if order == 1 else _tri_apply(sub, diag, sup, field, theta)
    return thomas_apply(factors, rhs_)


def advance(
    field: np.ndarray,
    source: WorkspaceSource,
    t: float,
    dt: float,
    scheme: str,
    bound: str | None = None,
) -> np.ndarray:
    """One step of ``scheme`` (``euler``, ``rk4``, ``si1``, ``si2``)."""
    if scheme == "euler":
        return step_euler(field, source, dt, t=t, bound=bound)
    if scheme == "rk4":
        return step_rk4(field, source, t, dt, bound=bound)
    if scheme == "si1":
        return step_semi_implicit(field, source, dt, 1, t=t, bound=bound)
    if scheme == "si2":
        return step_semi_implicit(field, source, dt, 2, t=t, bound=bound)
    raise ValueError(f"unknown scheme {scheme!r}")

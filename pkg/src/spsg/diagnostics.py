"""Masses, norms, errors, discrete relative entropy and convergence orders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import UniformGrid1D
from .sp import FluxWorkspace

# floor below which a value no longer counts as strictly positive
POSITIVITY_FLOOR = 1e-300


def discrete_mass(field: np.ndarray, grid: UniformGrid1D, h: int | None = None):
    """``dv * sum_i fhat_{h,i}``; all rows when ``h`` is None."""
    field = np.asarray(field, dtype=float)
    rows = field if h is None else field[h]
    return grid.dv * rows.sum(axis=-1)


def l2_coeff_norm(field: np.ndarray, grid: UniformGrid1D) -> float:
    """``sqrt(dv * sum_i sum_h fhat_{h,i}^2)`` (cell area weighting in 2D is up to the caller)."""
    field = np.asarray(field, dtype=float)
    return float(np.sqrt(grid.dv * np.sum(field * field)))


def l1_relative_error(row: np.ndarray, reference: np.ndarray, grid: UniformGrid1D | None = None) -> float:
    """``sum|row - ref| / sum|ref|``; the grid spacing cancels."""
    row = np.asarray(row, dtype=float)
    reference = np.asarray(reference, dtype=float)
    denom = np.abs(reference).sum()
    if not denom > 0:
        raise ValueError("reference has zero L1 norm")
    return float(np.abs(row - reference).sum() / denom)


def mass_drift(masses: np.ndarray, initial: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Per-row mass change relative to ``scale`` (e.g. the initial L1 norm).

    Rows whose mass is zero by symmetry would make a purely relative measure
    meaningless, hence the explicit scale.
    """
    return np.abs(np.asarray(masses) - np.asarray(initial)) / np.asarray(scale)


def _valid(row: np.ndarray, reference: np.ndarray) -> bool:
    return bool(np.all(row > POSITIVITY_FLOOR) and np.all(reference > POSITIVITY_FLOOR))


def relative_entropy(row: np.ndarray, reference: np.ndarray, grid: UniformGrid1D) -> tuple[float, bool]:
    """``dv * sum f log(f / f_inf)`` and a validity flag (NaN when invalid)."""
    row = np.asarray(row, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if not _valid(row, reference):
        return float("nan"), False
    return float(grid.dv * np.sum(row * np.log(row / reference))), True


def log_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a b log(b/a) / (b - a)``, equal to ``a`` when ``a == b``.

    The reciprocal of the logarithmic mean of ``1/a`` and ``1/b``; it lies
    between the harmonic and geometric means. As the interface average of the
    reference state it makes the discrete entropy identity exact.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = b / a
    close = np.abs(r - 1.0) <= 1e-12
    rs = np.where(close, 2.0, r)
    out = a * b * np.log(rs) / np.where(close, 1.0, b - a)
    return np.where(close, 0.5 * (a + b), out)


def entropy_production(
    row: np.ndarray,
    reference: np.ndarray,
    workspace: FluxWorkspace,
    grid: UniformGrid1D | None = None,
) -> tuple[float, bool]:
    """Discrete dissipation ``I`` with ``dH/dt = -I`` for the semi-discrete scheme.

    Each interface contributes
    ``(log x_{i+1} - log x_i)(x_{i+1} - x_i) fbar_{i+1/2} D_{i+1/2} / dv`` with
    ``x = f / f_inf`` and ``fbar`` the :func:`log_mean` of ``f_inf``; every
    term is nonnegative. ``reference`` must be the zero-flux state of
    ``workspace`` for the identity to hold.
    """
    row = np.asarray(row, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if not _valid(row, reference):
        return float("nan"), False
    x = row / reference
    lx = np.log(x)
    fbar = log_mean(reference[..., :-1], reference[..., 1:])
    terms = (lx[..., 1:] - lx[..., :-1]) * (x[..., 1:] - x[..., :-1]) * fbar * workspace.d_half / workspace.dv
    return float(np.sum(terms)), True


@dataclass(frozen=True)
class EntropyReport:
    h: np.ndarray
    entropy: np.ndarray
    production: np.ndarray
    valid: np.ndarray


def entropy_report(field: np.ndarray, reference: np.ndarray, workspace: FluxWorkspace, grid: UniformGrid1D) -> EntropyReport:
    hs, hv, iv, ok = [], [], [], []
    for h in range(field.shape[0]):
        hval, v1 = relative_entropy(field[h], reference[h], grid)
        ival, v2 = entropy_production(field[h], reference[h], workspace, grid)
        hs.append(h)
        hv.append(hval)
        iv.append(ival)
        ok.append(v1 and v2)
    return EntropyReport(np.array(hs), np.array(hv), np.array(iv), np.array(ok))


def convergence_order(e_coarse: float, e_fine: float) -> float:
    """``log2(e_coarse / e_fine)``."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("convergence order needs positive errors")
    return float(np.log2(e_coarse / e_fine))

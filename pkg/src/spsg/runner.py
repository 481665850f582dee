"""Assemble problems from a :class:`RunConfig` and drive runs and studies."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig
from .diagnostics import (
    convergence_order,
    discrete_mass,
    entropy_production,
    l1_relative_error,
    relative_entropy,
)
from .gpc import GPCBasis, build_basis, confidence_band, reconstruct_variance
from .grid import make_grid, quad_rule
from .output import write_csv, write_json
from .problems import (
    Grid2D,
    background_mean_2d,
    line_workspaces,
    opinion_background,
    opinion_initial_field,
    opinion_spec,
    opinion_steady_state,
    swarming_background,
    swarming_initial_field,
    swarming_steady_state,
)
from .solver import Simulation1D, Simulation2D, fit_dt, split_dt_bound
from .sp import discrete_steady_state
from .stepping import PositivityBoundError, SolverError, dt_bound

_BOUND_OF_POLICY = {
    "explicit-bound": "explicit",
    "semiimplicit-bound": "semiimplicit",
    "cn-bound": "cn",
}
# the semi-implicit bound is strict; stay just inside it
_STRICT_MARGIN = {"semiimplicit": 0.99}


class RunError(RuntimeError):
    """A run aborted; the message names the offending step."""


@dataclass
class Problem:
    cfg: RunConfig
    basis: GPCBasis
    sim: object
    grid: object
    reference: Optional[np.ndarray]
    entropy_ref: Optional[np.ndarray]
    bounds: dict

    @property
    def is_2d(self) -> bool:
        return isinstance(self.grid, Grid2D)

    @property
    def cell_size(self) -> float:
        return self.grid.cell_area if self.is_2d else self.grid.dv


def _rule(cfg: RunConfig, rule: Optional[str] = None):
    return quad_rule(rule or cfg.quadrature.rule, cfg.quadrature.gauss_nodes)


def _bound_mode(cfg: RunConfig) -> Optional[str]:
    return _BOUND_OF_POLICY.get(cfg.time.dt_policy)


def build_problem(cfg: RunConfig, n: Optional[int] = None, layout: Optional[str] = None, rule: Optional[str] = None) -> Problem:
    """Grid, basis, initial field, simulation object and references."""
    basis = build_basis(cfg.gpc.order, cfg.gpc.n_theta)
    n = cfg.grid.n if n is None else n
    layout = cfg.grid.layout if layout is None else layout
    qr = _rule(cfg, rule)
    bound_mode = _bound_mode(cfg)
    if cfg.problem == "swarming2d":
        sw = cfg.swarming
        g1 = make_grid(sw.v_min, sw.v_max, n, layout)
        grid = Grid2D(g1, g1)
        g = swarming_background(sw, grid)
        u_g = background_mean_2d(g, grid)
        ws_x = line_workspaces(sw, grid, u_g, qr, 0)
        ws_y = line_workspaces(sw, grid, u_g, qr, 1)
        field = swarming_initial_field(sw, grid, basis)
        masses = grid.cell_area * field.sum(axis=(1, 2))
        reference = swarming_steady_state(sw, grid, masses, u_g)
        sim = Simulation2D(ws_x, ws_y, field, cfg.time.scheme, bound_mode)
        bounds = {m: split_dt_bound(ws_x, ws_y, m) for m in ("explicit", "semiimplicit", "cn")}
        bounds["u_g"] = u_g.tolist()
        return Problem(cfg, basis, sim, grid, reference, None, bounds)

    op = cfg.opinion
    grid = make_grid(op.v_min, op.v_max, n, layout)
    spec = opinion_spec(op)
    advected = cfg.problem == "advected"
    bg = opinion_background(
        op, grid, evolution="advected" if advected else "frozen", alpha=cfg.advection.alpha if advected else 0.0
    )
    field = opinion_initial_field(op, grid, basis)
    sim = Simulation1D(spec, grid, qr, bg, field, cfg.time.scheme, bound_mode)
    ws = sim.workspace()
    bounds = {m: dt_bound(ws, m) for m in ("explicit", "semiimplicit", "cn")}
    reference = entropy_ref = None
    if not advected:
        masses = discrete_mass(field, grid)
        entropy_ref = discrete_steady_state(ws, masses)
        if op.confidence >= op.v_max - op.v_min:
            reference = opinion_steady_state(op, grid, None, basis, bg)
    return Problem(cfg, basis, sim, grid, reference, entropy_ref, bounds)


def choose_dt(problem: Problem, times: list[float]) -> float:
    cfg = problem.cfg
    policy = cfg.time.dt_policy
    if policy == "fixed":
        dt = cfg.time.dt
    elif policy == "cfl":
        dv = problem.grid.x.dv if problem.is_2d else problem.grid.dv
        dt = cfg.time.cfl * dv
    else:
        mode = _BOUND_OF_POLICY[policy]
        dt = cfg.time.safety * _STRICT_MARGIN.get(mode, 1.0) * problem.bounds[mode]
    return fit_dt(dt, times)


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------


def _row_stats(problem: Problem) -> dict:
    sim = problem.sim
    f = sim.field
    out = {"t": sim.t}
    masses = problem.cell_size * f.reshape(f.shape[0], -1).sum(axis=1)
    for h, m in enumerate(masses):
        out[f"mass_{h}"] = float(m)
    out["l2_norm"] = float(np.sqrt(problem.cell_size * np.sum(f * f)))
    if problem.reference is not None:
        for h in range(min(2, f.shape[0])):
            out[f"l1_error_{h}"] = l1_relative_error(f[h], problem.reference[h])
    if problem.entropy_ref is not None:
        ws = sim.workspace()
        for h in problem.cfg.entropy.rows:
            hv, ok1 = relative_entropy(f[h], problem.entropy_ref[h], problem.grid)
            iv, ok2 = entropy_production(f[h], problem.entropy_ref[h], ws, problem.grid)
            out[f"H_{h}"] = hv
            out[f"I_{h}"] = iv
            out[f"valid_{h}"] = int(ok1 and ok2)
    return out


def snapshot_table(problem: Problem) -> tuple[list[str], np.ndarray]:
    f = problem.sim.field
    m = f.shape[0] - 1
    mean, var, band = f[0], reconstruct_variance(f), confidence_band(f)
    if problem.is_2d:
        vx, vy = problem.grid.mesh()
        coords, names = [vx.ravel(), vy.ravel()], ["v_x", "v_y"]
    else:
        coords, names = [problem.grid.centers], ["v"]
    cols = coords + [f[h].ravel() for h in range(m + 1)] + [mean.ravel(), var.ravel(), band.ravel()]
    header = names + [f"f{h}" for h in range(m + 1)] + ["mean", "variance", "band"]
    return header, np.column_stack(cols)


def run(cfg: RunConfig, out_dir: Optional[str | Path] = None) -> dict:
    """Run ``cfg`` and write snapshots, a time series and metadata to ``out_dir``."""
    out = Path(out_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    times = cfg.snapshot_times
    dt = choose_dt(problem, times)
    n_total = int(round(cfg.time.t_end / dt))
    every = cfg.output.series_every or max(1, n_total // 200)
    series = [_row_stats(problem)]
    sim = problem.sim
    wall = time.perf_counter()

    def record(s) -> None:
        series.append(_row_stats(problem))

    written = []
    try:
        if 0.0 in times:
            written.append(_write_snapshot(problem, out))
        for t_obs in [t for t in times if t > 0]:
            sim.run_to(t_obs, dt, callback=record, every=every)
            written.append(_write_snapshot(problem, out))
    except (PositivityBoundError, SolverError, ValueError) as exc:
        raise RunError(f"step {sim.steps + 1} (t={sim.t:.6g}): {exc}") from exc
    wall = time.perf_counter() - wall

    # drop duplicates produced at snapshot boundaries
    seen, rows = set(), []
    for r in series:
        if r["t"] not in seen:
            seen.add(r["t"])
            rows.append(r)
    keys = list(rows[-1].keys())
    write_csv(out / "series.csv", keys, [[r.get(k, float("nan")) for k in keys] for r in rows])
    meta = {
        "version": __version__,
        "config": cfg.to_dict(),
        "dt": dt,
        "steps": sim.steps,
        "positivity_bounds": problem.bounds,
        "bound_mode": _bound_mode(cfg),
        "reference": "closed-form steady state" if problem.reference is not None else None,
        "snapshots": written,
        "wall_time_s": wall,
    }
    write_json(out / "metadata.json", meta)
    return {"problem": problem, "series": rows, "metadata": meta}


def _write_snapshot(problem: Problem, out: Path) -> str:
    header, table = snapshot_table(problem)
    name = f"snapshot_t{problem.sim.t:.6g}.csv"
    write_csv(out / name, header, table)
    return name


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------


def _restrict(fine: np.ndarray, layout: str) -> np.ndarray:
    """Map a fine-grid array onto the next coarser grid of the study."""
    if layout == "node":
        return fine[..., ::2]
    return 0.5 * (fine[..., 0::2] + fine[..., 1::2])


def check_doubling(grids: list[int], layout: str) -> None:
    if len(grids) < 3:
        raise ValueError("a convergence study needs at least 3 grids")
    for a, b in zip(grids, grids[1:]):
        want = 2 * a - 1 if layout == "node" else 2 * a
        if b != want:
            hint = "2N-1 (node layout)" if layout == "node" else "2N (cell layout)"
            raise ValueError(f"grid sequence {grids} does not refine by {hint}: {a} -> {b}")


def convergence_study(
    cfg: RunConfig,
    grids: Optional[list[int]] = None,
    times: Optional[list[float]] = None,
    rules: Optional[list[str]] = None,
    layout: Optional[str] = None,
) -> list[dict]:
    """Observed orders of the mean and the variance for every rule and time.

    ``e1`` compares the two coarsest grids, ``e2`` the next pair, each as a
    relative L1 difference on the coarser grid of the pair; the order is
    ``log2(e1/e2)``. Node grids nest and are compared by injection, cell grids
    by averaging pairs of fine cells.
    """
    if cfg.problem == "swarming2d":
        raise ValueError("convergence studies are implemented for the 1D problems")
    grids = list(grids or cfg.converge.grids)
    times = sorted(float(t) for t in (times or cfg.converge.times))
    rules = [str(r) for r in (rules or cfg.converge.rules)]
    layout = layout or cfg.converge.layout
    check_doubling(grids, layout)
    rows = []
    for rule in rules:
        snaps: dict[int, dict[float, np.ndarray]] = {}
        dts = {}
        for n in grids:
            problem = build_problem(cfg, n=n, layout=layout, rule=rule)
            dt = choose_dt(problem, times)
            dts[n] = dt
            snaps[n] = {}
            for t in times:
                problem.sim.run_to(t, dt)
                snaps[n][t] = problem.sim.field.copy()
        for t in times:
            for qty, fn in (("mean", lambda f: f[0]), ("variance", reconstruct_variance)):
                errs = []
                for a, b in zip(grids, grids[1:]):
                    fine = _restrict(fn(snaps[b][t]), layout)
                    errs.append(l1_relative_error(fn(snaps[a][t]), fine))
                for k in range(len(errs) - 1):
                    rows.append(
                        {
                            "rule": rule,
                            "time": t,
                            "quantity": qty,
                            "grids": f"{grids[k]}/{grids[k + 1]}/{grids[k + 2]}",
                            "e1": errs[k],
                            "e2": errs[k + 1],
                            "order": convergence_order(errs[k], errs[k + 1]),
                        }
                    )
    return rows


def write_rates(rows: list[dict], path: str | Path) -> None:
    keys = ["rule", "time", "quantity", "grids", "e1", "e2", "order"]
    write_csv(Path(path), keys, [[r[k] for k in keys] for r in rows])


# ---------------------------------------------------------------------------
# entropy traces
# ---------------------------------------------------------------------------


def entropy_trace(cfg: RunConfig, n: int, record_every: int = 1) -> dict:
    """H and I for the configured rows at every recorded step of a frozen run.

    The reference is the zero-flux state of the scheme with each row's mass,
    against which ``dH/dt = -I`` holds for the semi-discrete system.
    """
    if cfg.problem != "opinion":
        raise ValueError("entropy traces need a frozen background (problem 'opinion')")
    problem = build_problem(cfg, n=n)
    dt = choose_dt(problem, [cfg.time.t_end])
    sim = problem.sim
    ws = sim.workspace()
    ref = problem.entropy_ref
    rows = list(cfg.entropy.rows)
    trace = {"t": [], **{f"H_{h}": [] for h in rows}, **{f"I_{h}": [] for h in rows}, **{f"valid_{h}": [] for h in rows}}

    def rec(s) -> None:
        trace["t"].append(s.t)
        for h in rows:
            hv, ok1 = relative_entropy(s.field[h], ref[h], problem.grid)
            iv, ok2 = entropy_production(s.field[h], ref[h], ws, problem.grid)
            trace[f"H_{h}"].append(hv)
            trace[f"I_{h}"].append(iv)
            trace[f"valid_{h}"].append(bool(ok1 and ok2))

    rec(sim)
    sim.run_to(cfg.time.t_end, dt, callback=rec, every=record_every)
    trace["dt"] = dt
    trace["n"] = n
    return trace


def monotone_report(trace: dict, h: int, slack: float = 1e-12) -> dict:
    hv = np.asarray(trace[f"H_{h}"], dtype=float)
    iv = np.asarray(trace[f"I_{h}"], dtype=float)
    ok = np.asarray(trace[f"valid_{h}"], dtype=bool)
    valid = hv[ok]
    rises = np.diff(valid)
    return {
        "row": h,
        "all_valid": bool(ok.all()),
        "nonincreasing": bool(valid.size == 0 or np.all(rises <= slack)),
        "max_increase": float(rises.max()) if rises.size else 0.0,
        "production_nonnegative": bool(np.all(iv[ok] >= 0)),
    }

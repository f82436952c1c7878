"""Simulation driver behind the ``run``, ``convergence`` and ``audit`` commands.

All files are written with ``%.17g`` formatting and a fixed column order, so
the same scenario always produces byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FlowState, LayerPartition, free_surface, velocities
from .diagnostics import EnergyBudget, energy_budget, lake_at_rest, total_energy, total_mass, total_momentum, well_balance_residual
from .euler import CFLViolation, assemble_vertical_system, compute_dt, euler_step_detailed, exchange_bound_holds
from .scenario import ScenarioConfig
from .viscous import ParabolicViolation, parabolic_dt, viscous_step

ENERGY_TOL = 1e-11
VISCOUS_ENERGY_TOL = 1e-10
MASS_TOL = 1e-13
_HALVINGS = 8


def _fmt(v) -> str:
    return "%.17g" % v


@dataclass
class StepRecord:
    step: int
    dt: float
    budget: EnergyBudget
    min_h: float
    min_star: float
    exchange_ok: bool


@dataclass
class Trajectory:
    config: ScenarioConfig
    initial: EnergyBudget
    final: FlowState
    steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def step_count(self) -> int:
        return len(self.steps)


def _initial_budget(cfg: ScenarioConfig) -> EnergyBudget:
    s = cfg.initial
    return EnergyBudget(
        time=s.time,
        total_mass=total_mass(s, cfg.grid),
        total_momentum=total_momentum(s, cfg.grid),
        total_energy=total_energy(s, cfg.grid, cfg.topography, cfg.layers, cfg.params),
        step_energy_delta=0.0,
        topo_error_bound=0.0,
    )


def _one_step(cfg: ScenarioConfig, state: FlowState, remaining: float):
    # returns (euler result, new state); viscous steps halve dt until the parabolic bound holds
    grid, topo, layers, params = cfg.grid, cfg.topography, cfg.layers, cfg.params
    if cfg.forced_dt is not None:
        dt = cfg.forced_dt
    else:
        dt = compute_dt(state, grid, topo, layers, params)
        if params.has_viscous_terms:
            dt = min(dt, parabolic_dt(state, grid, layers, params, cfg.viscous))
    dt = min(dt, remaining)
    for attempt in range(_HALVINGS + 1):
        res = euler_step_detailed(state, grid, topo, layers, params, dt)
        if not params.has_viscous_terms:
            return res, res.state
        try:
            return res, viscous_step(res.state, state, grid, layers, params, dt, cfg.viscous)
        except ParabolicViolation:
            if cfg.forced_dt is not None or attempt == _HALVINGS:
                raise
            dt *= 0.5


def simulate(cfg: ScenarioConfig, keep_snapshots: bool = True) -> Trajectory:
    """Advance the scenario to ``end_time`` (or ``max_steps``) and audit every step.

    Violations stop the run and are listed in ``Trajectory.violations``.
    """
    grid, topo, layers, params = cfg.grid, cfg.topography, cfg.layers, cfg.params
    state = cfg.initial
    traj = Trajectory(cfg, _initial_budget(cfg), state)
    if keep_snapshots:
        traj.snapshots.append((0, state, traj.initial))
    flat = topo.is_flat
    tol = VISCOUS_ENERGY_TOL if params.has_viscous_terms else ENERGY_TOL
    step = 0
    while state.time < cfg.end_time and (cfg.max_steps is None or step < cfg.max_steps):
        remaining = cfg.end_time - state.time
        try:
            res, new = _one_step(cfg, state, remaining)
        except CFLViolation as exc:
            traj.violations.append(f"cfl: step {step + 1}: {exc}")
            break
        except ParabolicViolation as exc:
            traj.violations.append(f"parabolic: step {step + 1}: {exc}")
            break
        step += 1
        budget = energy_budget(state, new, grid, topo, layers, params, cfg.energy_constant)
        min_h = float(new.h.min())
        min_star = float(res.explicit.h_star.min())
        rec = StepRecord(step, res.dt, budget, min_h, min_star, exchange_bound_holds(res, layers, params.dry_tol))
        traj.steps.append(rec)
        if min_h < 0 or min_star < 0:
            traj.violations.append(f"positivity: step {step}: min depth {min_h!r}, min layer depth {min_star!r}")
        if flat and budget.step_energy_delta > tol * abs(budget.total_energy - budget.step_energy_delta):
            traj.violations.append(f"energy: step {step}: energy increased by {budget.step_energy_delta!r}")
        state = new
        if keep_snapshots and (step % cfg.output_every == 0):
            traj.snapshots.append((step, state, budget))
        if traj.violations:
            break
        if remaining - res.dt <= 0:
            break
    if keep_snapshots and traj.snapshots[-1][0] != step:
        traj.snapshots.append((step, state, traj.steps[-1].budget if traj.steps else traj.initial))
    traj.final = state
    return traj


def _config_comment(cfg: ScenarioConfig) -> str:
    lines = [f"# scenario: {cfg.source}"]
    for section, keys in cfg.resolved.items():
        lines.append(f"# [{section}]")
        lines.extend(f"# {k} = {v}" for k, v in keys.items())
    return "\n".join(lines) + "\n"


def timeseries_columns(n_layers: int) -> list:
    return ["time", "cell", "x", "h", "eta", *[f"u_{a + 1}" for a in range(n_layers)],
            "mass", "momentum", "energy", "energy_delta", "topo_error_bound"]


BUDGET_COLUMNS = ["step", "time", "dt", "mass", "momentum", "energy", "energy_delta", "topo_error_bound", "min_h", "exchange_bound_ok"]


def write_timeseries(traj: Trajectory, stream) -> None:
    cfg = traj.config
    stream.write(_config_comment(cfg))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(timeseries_columns(cfg.layers.count))
    x = cfg.grid.centers
    for _, state, b in traj.snapshots:
        eta = free_surface(state, cfg.topography)
        u = velocities(state, cfg.layers, cfg.params.dry_tol)
        totals = [b.total_mass, b.total_momentum, b.total_energy, b.step_energy_delta, b.topo_error_bound]
        for i in range(state.cell_count):
            w.writerow([_fmt(state.time), i, _fmt(x[i]), _fmt(state.h[i]), _fmt(eta[i]), *map(_fmt, u[:, i]), *map(_fmt, totals)])


def write_budget(traj: Trajectory, stream) -> None:
    stream.write(_config_comment(traj.config))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(BUDGET_COLUMNS)
    b0 = traj.initial
    w.writerow([0, _fmt(b0.time), _fmt(0.0), _fmt(b0.total_mass), _fmt(b0.total_momentum), _fmt(b0.total_energy),
                _fmt(0.0), _fmt(0.0), _fmt(float(traj.config.initial.h.min())), 1])
    for r in traj.steps:
        b = r.budget
        w.writerow([r.step, _fmt(b.time), _fmt(r.dt), _fmt(b.total_mass), _fmt(b.total_momentum), _fmt(b.total_energy),
                    _fmt(b.step_energy_delta), _fmt(b.topo_error_bound), _fmt(r.min_h), int(r.exchange_ok)])


def summary(traj: Trajectory) -> dict:
    b0 = traj.initial
    last = traj.steps[-1].budget if traj.steps else b0
    mass_scale = abs(b0.total_mass) or 1.0
    return {
        "scenario": traj.config.source,
        "config": traj.config.resolved,
        "steps": traj.step_count,
        "final_time": traj.final.time,
        "initial": b0.as_dict(),
        "final": last.as_dict(),
        "relative_mass_drift": (last.total_mass - b0.total_mass) / mass_scale,
        "momentum_drift": last.total_momentum - b0.total_momentum,
        "max_step_energy_delta": max((r.budget.step_energy_delta for r in traj.steps), default=0.0),
        "energy_overshoot": max([0.0] + [r.budget.total_energy - b0.total_energy for r in traj.steps]),
        "cumulative_topo_error_bound": math.fsum(r.budget.topo_error_bound for r in traj.steps),
        "min_depth": min([float(traj.config.initial.h.min())] + [r.min_h for r in traj.steps]),
        "exchange_bound_ok": all(r.exchange_ok for r in traj.steps),
        "violations": list(traj.violations),
    }


def run(cfg: ScenarioConfig, output_dir=None) -> tuple:
    """Simulate and write ``timeseries.csv``, ``budget.csv`` and ``summary.json``.

    Returns ``(exit_status, summary_dict)``; the status is 1 when any invariant
    was violated.
    """
    out = Path(output_dir if output_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    traj = simulate(cfg)
    with open(out / "timeseries.csv", "w", newline="") as fh:
        write_timeseries(traj, fh)
    with open(out / "budget.csv", "w", newline="") as fh:
        write_budget(traj, fh)
    info = summary(traj)
    (out / "summary.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return (1 if traj.violations else 0), info


def _restrict(fine: np.ndarray, widths: np.ndarray) -> np.ndarray:
    # average pairs of fine cells onto the coarse grid
    w = widths.reshape(-1, 2)
    return (fine.reshape(-1, 2) * w).sum(axis=1) / w.sum(axis=1)


@dataclass(frozen=True)
class ConvergenceLevel:
    cells: int
    steps: int
    l1_difference: float
    rate: float
    cumulative_topo_bound: float
    mean_topo_bound: float
    topo_bound_ratio: float
    mean_topo_bound_ratio: float
    energy_overshoot: float

    def row(self) -> list:
        return [self.cells, self.steps, self.l1_difference, self.rate, self.cumulative_topo_bound,
                self.mean_topo_bound, self.topo_bound_ratio, self.mean_topo_bound_ratio, self.energy_overshoot]


CONVERGENCE_COLUMNS = ["cells", "steps", "l1_difference", "rate", "cumulative_topo_bound", "mean_topo_bound",
                       "topo_bound_ratio", "mean_topo_bound_ratio", "energy_overshoot"]


def convergence(cfg: ScenarioConfig, levels: int) -> list:
    """Rerun the scenario on grids refined by 2, 4, ... and compare consecutive levels.

    ``l1_difference`` of level ``k`` is the L1 distance between its final depth
    and the restriction of level ``k + 1`` (``nan`` on the finest level);
    ``rate`` is ``log2`` of consecutive differences. Bound ratios compare the
    level with the next coarser one (``nan`` on the coarsest).
    """
    if levels < 2:
        raise ValueError("convergence needs at least two levels")
    if not cfg.end_time > 0:
        raise ValueError("convergence needs end_time > 0")
    if cfg.max_steps is not None:
        raise ValueError("convergence compares runs at a fixed end_time; remove max_steps")
    runs = []
    for k in range(levels):
        c = cfg if k == 0 else cfg.refined(2**k)
        traj = simulate(c, keep_snapshots=False)
        if traj.violations:
            raise RuntimeError(f"level {k} ({c.grid.cell_count} cells) failed: {traj.violations[0]}")
        runs.append((c, traj, summary(traj)))

    diffs = []
    for (c, t, _), (cf, tf, _) in zip(runs, runs[1:]):
        diffs.append(float(np.sum(c.grid.widths * np.abs(t.final.h - _restrict(tf.final.h, cf.grid.widths)))))
    diffs.append(math.nan)

    table = []
    for k, (c, t, s) in enumerate(runs):
        rate = math.log2(diffs[k - 1] / diffs[k]) if 0 < k < levels - 1 and diffs[k] > 0 else math.nan
        cum = s["cumulative_topo_error_bound"]
        mean = cum / max(t.step_count, 1)
        if k == 0:
            ratio = mean_ratio = math.nan
        else:
            prev_cum = runs[k - 1][2]["cumulative_topo_error_bound"]
            prev_mean = prev_cum / max(runs[k - 1][1].step_count, 1)
            ratio = prev_cum / cum if cum > 0 else math.nan
            mean_ratio = prev_mean / mean if mean > 0 else math.nan
        table.append(ConvergenceLevel(c.grid.cell_count, t.step_count, diffs[k], rate, cum, mean, ratio, mean_ratio,
                                      s["energy_overshoot"]))
    return table


def write_convergence(table: list, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CONVERGENCE_COLUMNS)
    for lvl in table:
        w.writerow([v if isinstance(v, int) else _fmt(v) for v in lvl.row()])


@dataclass(frozen=True)
class AuditItem:
    name: str
    status: str
    detail: str

    def line(self) -> str:
        return f"{self.status:4s}  {self.name}: {self.detail}"


def _linear_system_audit(rng: np.random.Generator, samples: int) -> AuditItem:
    worst = 0.0
    for _ in range(samples):
        n_layers = int(rng.integers(2, 7))
        raw = rng.uniform(0.05, 1.0, n_layers)
        layers = LayerPartition(raw / raw.sum())
        h = float(rng.uniform(1e-3, 5.0))
        rates = rng.normal(scale=rng.uniform(0.01, 10.0), size=(n_layers - 1, 1))
        dt = float(rng.uniform(1e-4, 1.0))
        sysm = assemble_vertical_system(rates, np.array([h]), layers, dt)
        a = sysm.dense(0)
        col = (np.abs(a.sum(axis=0) - 1.0) / np.abs(a).sum(axis=0)).max()
        rhs = rng.uniform(0.0, 1.0, n_layers)
        x = np.linalg.solve(a, rhs)
        t = rng.uniform(-1.0, 1.0, n_layers)
        y = np.linalg.solve(a.T, t)
        excess = max(col, -x.min() if x.min() < 0 else 0.0, np.abs(y).max() - np.abs(t).max())
        worst = max(worst, excess)
        if excess > 1e-12:
            return AuditItem("linear_system", "FAIL", f"violation {excess:.3e} for N={n_layers}")
    return AuditItem("linear_system", "PASS", f"{samples} random assemblies, worst excess {worst:.3e}")


def audit(cfg: ScenarioConfig, seed: int = 0, samples: int = 2000) -> list:
    """Run the invariant battery on a scenario; returns one :class:`AuditItem` per property."""
    rng = np.random.default_rng(seed)
    traj = simulate(cfg, keep_snapshots=False)
    s = summary(traj)
    items = []

    cfl = [v for v in traj.violations if v.startswith("cfl")]
    items.append(AuditItem("cfl", "FAIL" if cfl else "PASS", cfl[0] if cfl else f"{traj.step_count} steps accepted"))

    pos = [v for v in traj.violations if v.startswith("positivity")]
    items.append(AuditItem("positivity", "FAIL" if pos else "PASS", f"min depth {s['min_depth']:.6g}"))

    drift = abs(s["relative_mass_drift"])
    mass_tol = MASS_TOL * max(1.0, traj.step_count / 1000.0)
    items.append(AuditItem("mass", "PASS" if drift <= mass_tol else "FAIL", f"relative drift {drift:.3e} (tol {mass_tol:.1e})"))

    if cfg.grid.boundary == "periodic" and cfg.topography.is_flat and cfg.params.k_l == 0 and cfg.params.k_t == 0:
        scale = float(np.dot(cfg.grid.widths, np.abs(cfg.initial.q).sum(axis=0) + cfg.initial.h * np.sqrt(cfg.params.g * cfg.initial.h)))
        mom = abs(s["momentum_drift"]) / (scale or 1.0)
        tol = 1e-12 * max(1, traj.step_count)
        items.append(AuditItem("momentum", "PASS" if mom <= tol else "FAIL", f"relative drift {mom:.3e}"))
    else:
        items.append(AuditItem("momentum", "SKIP", "not conserved with walls, topography or friction"))

    surface = float(np.max(cfg.initial.h + cfg.topography.z_b))
    rest = lake_at_rest(surface, cfg.topography, cfg.layers)
    wb = well_balance_residual(rest, cfg.grid, cfg.topography, cfg.layers, cfg.params)
    wb_tol = 1e-12 * max(1.0, surface - float(cfg.topography.z_b.min()))
    items.append(AuditItem("well_balance", "PASS" if wb <= wb_tol else "FAIL", f"lake-at-rest residual {wb:.3e}"))

    if cfg.topography.is_flat:
        en = [v for v in traj.violations if v.startswith("energy")]
        items.append(AuditItem("energy", "FAIL" if en else "PASS", en[0] if en else f"max step change {s['max_step_energy_delta']:.3e}"))
    else:
        items.append(AuditItem("energy", "INFO", f"overshoot {s['energy_overshoot']:.3e}, cumulative topography bound {s['cumulative_topo_error_bound']:.3e}"))

    items.append(AuditItem("exchange_bound", "PASS" if s["exchange_bound_ok"] else "FAIL", "bottom-interface exchange rate within bounds"))
    items.append(_linear_system_audit(rng, samples))
    par = [v for v in traj.violations if v.startswith("parabolic")]
    if par:
        items.append(AuditItem("parabolic", "FAIL", par[0]))
    return items


def audit_report(items: list) -> str:
    buf = io.StringIO()
    for it in items:
        buf.write(it.line() + "\n")
    failed = sum(it.status == "FAIL" for it in items)
    buf.write(f"{len(items) - failed}/{len(items)} properties without failure\n")
    return buf.getvalue()

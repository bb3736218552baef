"""Replicated-group sweeps over density/cost grids, with the three
named experiment presets and deterministic seed derivation.

Seed contract: the group at (cell_index, group_index) uses
``numpy.random.SeedSequence(master_seed, spawn_key=(cell_index, group_index))``,
so any subset of a sweep can be reproduced independently on any machine.
Cells are enumerated row-major over density_grid x cost_grid.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .model import AgentType, ModelParams
from .engine import Trajectory, periods_per_timestep, run_group
from .policy import MyopicPolicy, solve

PRESET_NAMES = ("baseline", "robustness", "adaptability")

DEFAULT_GAMMA = 0.98
DEFAULT_LOW_COST = 0.002
DEFAULT_COST_RANGE = (0.001, 0.1)


@dataclass(frozen=True)
class SweepSpec:
    base_params: ModelParams
    density_grid: tuple[float, ...]
    cost_grid: tuple[float, ...]
    replications: int
    max_timesteps: int
    master_seed: int
    preset_name: str | None = None
    policy_kind: str = "optimal"     # or "myopic"
    dp_tol: float = 1e-6
    horizon_cap: int = 200_000

    def __post_init__(self):
        if not self.density_grid or not self.cost_grid:
            raise ValueError("grids must be non-empty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.max_timesteps < 1:
            raise ValueError("max_timesteps must be >= 1")
        if self.policy_kind not in ("optimal", "myopic"):
            raise ValueError(f"unknown policy_kind {self.policy_kind!r}")
        for d in self.density_grid:
            if not 0.0 <= d < 1.0:
                raise ValueError(f"density {d} out of range")
        for c in self.cost_grid:
            if c < 0.0:
                raise ValueError(f"cost {c} out of range")

    def cells(self) -> list[tuple[int, float, float]]:
        out = []
        i = 0
        for d in self.density_grid:
            for c in self.cost_grid:
                out.append((i, d, c))
                i += 1
        return out


@dataclass(frozen=True)
class AggregateRow:
    d: float
    c: float
    timestep: int
    surviving_fraction: float
    mean_active_size: float
    n_groups: int


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[AggregateRow, ...]
    # first collapse timestep per group, NaN if never collapsed; keyed (d, c)
    collapse_timesteps: dict


def linear_density_grid(n: int = 20, high: float = 0.95) -> tuple[float, ...]:
    return tuple(np.linspace(0.0, high, n).tolist())


def geometric_cost_grid(n: int = 20, low: float = DEFAULT_COST_RANGE[0],
                        high: float = DEFAULT_COST_RANGE[1]) -> tuple[float, ...]:
    return tuple(np.geomspace(low, high, n).tolist())


def preset(name: str) -> SweepSpec:
    """The three shipped experiment presets.

    baseline:     confident correct beliefs (prior 30:20, theta=0.6), full
                  density x cost factorial.
    robustness:   confidence shock (prior 1.2:0.8, theta=0.6), low fixed cost.
    adaptability: confidence shock plus a true drop in the punisher share
                  (prior 1.2:0.8, theta=0.4), low fixed cost.
    """
    common = dict(reward=1.0, discount=DEFAULT_GAMMA, group_size=100)
    if name == "baseline":
        params = ModelParams(density=0.0, signaling_cost=0.0,
                             punisher_share=0.6, prior_alpha=30.0,
                             prior_beta=20.0, **common)
        return SweepSpec(base_params=params,
                         density_grid=linear_density_grid(),
                         cost_grid=geometric_cost_grid(),
                         replications=1000, max_timesteps=100,
                         master_seed=20240601, preset_name="baseline")
    if name == "robustness":
        params = ModelParams(density=0.0, signaling_cost=DEFAULT_LOW_COST,
                             punisher_share=0.6, prior_alpha=1.2,
                             prior_beta=0.8, **common)
        return SweepSpec(base_params=params,
                         density_grid=(0.0, 0.5, 0.9),
                         cost_grid=(DEFAULT_LOW_COST,),
                         replications=1000, max_timesteps=250,
                         master_seed=20240602, preset_name="robustness")
    if name == "adaptability":
        params = ModelParams(density=0.0, signaling_cost=DEFAULT_LOW_COST,
                             punisher_share=0.4, prior_alpha=1.2,
                             prior_beta=0.8, **common)
        return SweepSpec(base_params=params,
                         density_grid=(0.0, 0.5, 0.9),
                         cost_grid=(DEFAULT_LOW_COST,),
                         replications=1000, max_timesteps=250,
                         master_seed=20240603, preset_name="adaptability")
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def group_seed(master_seed: int, cell_index: int, group_index: int) -> np.random.SeedSequence:
    """Documented seed derivation; part of the reproducibility contract."""
    return np.random.SeedSequence(master_seed, spawn_key=(cell_index, group_index))


def cell_policies(params: ModelParams, spec: SweepSpec) -> dict:
    """Solve (or build) the per-type decision policies for one sweep cell."""
    if spec.policy_kind == "myopic":
        return {t: MyopicPolicy(params, t) for t in AgentType}
    depth = spec.max_timesteps * periods_per_timestep(params.density)
    return {
        t: solve(params, t, tol=spec.dp_tol, horizon_cap=spec.horizon_cap,
                 store_depth=depth)
        for t in AgentType
    }


def _aggregate_cell(trajectories: list[Trajectory], d: float, c: float,
                    max_timesteps: int) -> tuple[list[AggregateRow], np.ndarray]:
    n = len(trajectories)
    active = np.empty((n, max_timesteps + 1), dtype=np.int64)
    collapsed = np.empty((n, max_timesteps + 1), dtype=bool)
    collapse_t = np.full(n, np.nan)
    for i, traj in enumerate(trajectories):
        last = len(traj.samples) - 1
        for s in traj.samples:
            active[i, s.timestep] = s.active_count
            collapsed[i, s.timestep] = s.collapsed
        # collapsed groups keep their terminal size from then on
        active[i, last + 1:] = traj.samples[last].active_count
        collapsed[i, last + 1:] = traj.samples[last].collapsed
        ct = traj.collapse_timestep()
        if ct is not None:
            collapse_t[i] = ct
    rows = [
        AggregateRow(d=d, c=c, timestep=t,
                     surviving_fraction=float(1.0 - collapsed[:, t].mean()),
                     mean_active_size=float(active[:, t].mean()),
                     n_groups=n)
        for t in range(max_timesteps + 1)
    ]
    return rows, collapse_t


def _run_cell(args) -> tuple[int, list[AggregateRow], np.ndarray]:
    spec, cell_index, d, c = args
    params = spec.base_params.with_(density=d, signaling_cost=c)
    policies = cell_policies(params, spec)
    trajectories = [
        run_group(params, policies, group_seed(spec.master_seed, cell_index, gi),
                  spec.max_timesteps)
        for gi in range(spec.replications)
    ]
    rows, collapse_t = _aggregate_cell(trajectories, d, c, spec.max_timesteps)
    return cell_index, rows, collapse_t


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every (density, cost) cell; output is independent of ``workers``."""
    tasks = [(spec, i, d, c) for i, d, c in spec.cells()]
    if workers <= 1 or len(tasks) == 1:
        results = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, tasks))
    results.sort(key=lambda r: r[0])
    rows: list[AggregateRow] = []
    collapse: dict = {}
    for (cell_index, cell_rows, collapse_t), (_, d, c) in zip(
            results, [(i, d, c) for i, d, c in spec.cells()]):
        rows.extend(cell_rows)
        collapse[(d, c)] = collapse_t
    return SweepResult(spec=spec, rows=tuple(rows), collapse_timesteps=collapse)


@dataclass(frozen=True)
class CollapseStats:
    d: float
    c: float
    n_groups: int
    fraction_collapsed: float
    median: float | None          # None = "not reached" (fewer than half collapsed)
    q1: float | None
    q3: float | None


def collapse_time_stats(result: SweepResult) -> list[CollapseStats]:
    """Censored collapse-time summaries per cell.

    Never-collapsed groups count as +inf for the order statistics; a
    quantile that lands in the censored tail is reported as None.
    """
    out = []
    for (d, c), times in result.collapse_timesteps.items():
        n = times.size
        censored = np.where(np.isnan(times), np.inf, times)
        frac = float(np.isfinite(censored).mean())
        qs = []
        for q in (0.25, 0.5, 0.75):
            v = float(np.quantile(censored, q, method="inverted_cdf"))
            qs.append(None if math.isinf(v) else v)
        out.append(CollapseStats(d=d, c=c, n_groups=n, fraction_collapsed=frac,
                                 median=qs[1], q1=qs[0], q3=qs[2]))
    return out


AGGREGATE_COLUMNS = ("preset", "d", "c", "timestep", "surviving_fraction",
                     "mean_active_size", "n_groups")


def write_aggregate_csv(result: SweepResult, path) -> None:
    """aggregate.csv: headers mandatory, UTF-8, '.' decimal, no locale variation."""
    label = result.spec.preset_name or ""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for row in result.rows:
            writer.writerow([
                label, repr(row.d), repr(row.c), row.timestep,
                repr(row.surviving_fraction), repr(row.mean_active_size),
                row.n_groups,
            ])


def spec_to_config(spec: SweepSpec) -> dict:
    doc = asdict(spec)
    doc["base_params"] = asdict(spec.base_params)
    doc["density_grid"] = list(spec.density_grid)
    doc["cost_grid"] = list(spec.cost_grid)
    return doc


def write_manifest(result: SweepResult, path, wall_clock_s: float,
                   version: str) -> None:
    doc = {
        "software_version": version,
        "python": platform.python_version(),
        "created_unix": int(time.time()),
        "wall_clock_seconds": wall_clock_s,
        "seed_derivation": "SeedSequence(master_seed, spawn_key=(cell_index, group_index))",
        "config": spec_to_config(result.spec),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

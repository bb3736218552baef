"""Command-line entry point.

Subcommands: verify-props, solve-policy, simulate, sweep, vpi-scan, presets.
Exit codes: 0 success, 1 validation/usage, 2 numerical-check failure, 3 I/O.
Configuration precedence: CLI flag > config file > preset default.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .model import (AgentType, BeliefState, ModelParams, adjusted_discount,
                    discount_identity_residual)
from .engine import run_group
from .infovalue import expected_clipped_value, vpi
from .policy import solve
from .sweep import (PRESET_NAMES, SweepSpec, cell_policies, collapse_time_stats,
                    preset, run_sweep, spec_to_config, write_aggregate_csv,
                    write_manifest)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

OUTDIR_ENV = "NORMLAB_OUTDIR"

_CONFIG_KEYS = {
    "preset_name", "base_params", "density_grid", "cost_grid", "replications",
    "max_timesteps", "master_seed", "policy_kind", "dp_tol", "horizon_cap",
    "workers", "out_dir",
}
_PARAM_KEYS = {
    "density", "signaling_cost", "discount", "reward", "punisher_share",
    "prior_alpha", "prior_beta", "group_size", "payoff_convention",
    "iid_type_assignment", "global_observation",
}


class ConfigError(Exception):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _prior(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"prior must look like 30:20, got {text!r}") from exc


def _agent_type(text: str) -> AgentType:
    label = text.strip().lower().replace("-", "").replace("_", "")
    if label in ("punisher", "p"):
        return AgentType.PUNISHER
    if label in ("nonpunisher", "n"):
        return AgentType.NON_PUNISHER
    raise argparse.ArgumentTypeError(f"unknown agent type {text!r}")


def _default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def load_config(path) -> dict:
    """Read a JSON run config; a manifest.json is accepted and unwrapped."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "config" in doc and "seed_derivation" in doc:
        doc = doc["config"]
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    params_doc = doc.get("base_params")
    if params_doc is not None:
        bad = set(params_doc) - _PARAM_KEYS
        if bad:
            raise ConfigError(f"unknown base_params keys: {sorted(bad)}")
    return doc


def build_spec(args) -> SweepSpec:
    """Merge preset defaults, config file, and CLI overrides into a SweepSpec."""
    doc = load_config(args.config) if getattr(args, "config", None) else {}
    preset_name = getattr(args, "preset", None) or doc.get("preset_name")
    if preset_name:
        spec = preset(preset_name)
    elif doc.get("base_params"):
        spec = SweepSpec(
            base_params=ModelParams(**doc["base_params"]),
            density_grid=tuple(doc.get("density_grid", (0.0,))),
            cost_grid=tuple(doc.get("cost_grid", (0.0,))),
            replications=doc.get("replications", 1),
            max_timesteps=doc.get("max_timesteps", 100),
            master_seed=doc.get("master_seed", 0),
        )
    else:
        raise ConfigError("either --preset or a config file with base_params is required")

    if doc:
        params = spec.base_params
        if doc.get("base_params"):
            params = ModelParams(**{**spec_to_config(spec)["base_params"],
                                    **doc["base_params"]})
        spec = replace(
            spec,
            base_params=params,
            density_grid=tuple(doc.get("density_grid", spec.density_grid)),
            cost_grid=tuple(doc.get("cost_grid", spec.cost_grid)),
            replications=doc.get("replications", spec.replications),
            max_timesteps=doc.get("max_timesteps", spec.max_timesteps),
            master_seed=doc.get("master_seed", spec.master_seed),
            policy_kind=doc.get("policy_kind", spec.policy_kind),
            dp_tol=doc.get("dp_tol", spec.dp_tol),
            horizon_cap=doc.get("horizon_cap", spec.horizon_cap),
        )

    overrides = {}
    if getattr(args, "densities", None) is not None:
        overrides["density_grid"] = args.densities
    if getattr(args, "costs", None) is not None:
        overrides["cost_grid"] = args.costs
    if getattr(args, "groups", None) is not None:
        overrides["replications"] = args.groups
    if getattr(args, "timesteps", None) is not None:
        overrides["max_timesteps"] = args.timesteps
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "policy", None) is not None:
        overrides["policy_kind"] = args.policy
    if overrides:
        spec = replace(spec, **overrides)
    return spec


def cmd_presets(args) -> int:
    for name in PRESET_NAMES:
        s = preset(name)
        p = s.base_params
        print(f"{name}: theta={p.punisher_share} prior={p.prior_alpha}:{p.prior_beta} "
              f"gamma={p.discount} N={p.group_size} "
              f"densities={len(s.density_grid)} costs={len(s.cost_grid)} "
              f"groups={s.replications} timesteps={s.max_timesteps}")
    return EXIT_OK


def cmd_verify_props(args) -> int:
    failures = 0

    worst = 0.0
    for gamma in args.gammas:
        for d in args.densities:
            for eu in args.eus:
                worst = max(worst, abs(discount_identity_residual(gamma, d, eu)))
    ok = worst <= 1e-12
    print(f"[{'PASS' if ok else 'FAIL'}] density-adjusted discount identity: "
          f"max |residual| = {worst:.3e} (limit 1e-12)")
    failures += 0 if ok else 1

    if not args.skip_vpi:
        belief = BeliefState(args.prior[0], args.prior[1])
        values = []
        for d in args.vpi_densities:
            params = ModelParams(density=d, signaling_cost=0.0,
                                 discount=args.gamma, reward=args.reward,
                                 punisher_share=0.5, prior_alpha=args.prior[0],
                                 prior_beta=args.prior[1], group_size=2)
            report = vpi(belief, params, AgentType.NON_PUNISHER, dp_tol=args.dp_tol)
            values.append(report.vpi)
            print(f"  vpi(d={d}) = {report.vpi:.6f}")
        slack = 2.0 * args.dp_tol
        monotone = all(b <= a + slack for a, b in zip(values, values[1:]))
        nonneg = all(v >= -slack - 1e-6 for v in values)
        ok = monotone and nonneg
        print(f"[{'PASS' if ok else 'FAIL'}] perfect-information value gap "
              f"non-increasing in density and non-negative")
        failures += 0 if ok else 1

    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def cmd_solve_policy(args) -> int:
    params = ModelParams(density=args.density, signaling_cost=args.cost,
                         discount=args.gamma, reward=args.reward,
                         punisher_share=0.5, prior_alpha=args.prior[0],
                         prior_beta=args.prior[1], group_size=2)
    table = solve(params, args.type, tol=args.tol, store_depth=args.depth)
    out = Path(args.out) if args.out else _default_outdir() / "policy.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "m", "posterior_mean", "value",
                         "participation_value", "decision"])
        for n in range(args.depth + 1):
            for k in range(n + 1):
                m = n - k
                w = float(table.participation_value(k, m))
                p = (params.prior_alpha + k) / (params.prior_alpha + params.prior_beta + n)
                writer.writerow([k, m, repr(p), repr(max(w, 0.0)), repr(w),
                                 "retire" if w < 0 else "continue"])
    print(f"wrote {out} (horizon T={table.horizon}, gamma_d={table.gamma_d})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = build_spec(args)
    d = spec.density_grid[0]
    c = spec.cost_grid[0]
    params = spec.base_params.with_(density=d, signaling_cost=c)
    policies = cell_policies(params, spec)
    traj = run_group(params, policies, np.random.SeedSequence(spec.master_seed),
                     spec.max_timesteps)
    if args.trace:
        out = Path(args.out) if args.out else _default_outdir() / "trajectory.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["group_id", "timestep", "active_count", "collapsed"])
            for s in traj.samples:
                writer.writerow([0, s.timestep, s.active_count,
                                 str(s.collapsed).lower()])
        print(f"wrote {out}")
    last = traj.terminal
    print(f"d={d} c={c}: {last.active_count} active at timestep {last.timestep}"
          f"{' (collapsed)' if last.collapsed else ''}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = build_spec(args)
    out_dir = Path(args.out_dir) if args.out_dir else _default_outdir()
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    result = run_sweep(spec, workers=args.workers)
    wall = time.monotonic() - t0
    write_aggregate_csv(result, out_dir / "aggregate.csv")
    write_manifest(result, out_dir / "manifest.json", wall, __version__)
    if args.collapse_stats:
        for s in collapse_time_stats(result):
            med = "not reached" if s.median is None else s.median
            print(f"d={s.d} c={s.c}: collapsed {s.fraction_collapsed:.1%}, "
                  f"median collapse timestep {med}")
    print(f"wrote {out_dir / 'aggregate.csv'} and {out_dir / 'manifest.json'} "
          f"({wall:.1f} s)")
    return EXIT_OK


def cmd_vpi_scan(args) -> int:
    belief = BeliefState(args.prior[0], args.prior[1], k=args.k, m=args.m)
    out = Path(args.out) if args.out else _default_outdir() / "vpi.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    for d in args.densities:
        params = ModelParams(density=d, signaling_cost=args.cost,
                             discount=args.gamma, reward=args.reward,
                             punisher_share=0.5, prior_alpha=args.prior[0],
                             prior_beta=args.prior[1], group_size=2)
        report = vpi(belief, params, args.type, quad_tol=args.quad_tol,
                     dp_tol=args.dp_tol)
        rows.append(report)
        print(f"d={d}: e_clipped={report.full_info_component:.6f} "
              f"v_partial={report.partial_info_value:.6f} vpi={report.vpi:.6f}")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha0", "beta0", "k", "m", "d", "gamma", "c", "R",
                         "self_type", "e_clipped", "v_partial", "vpi"])
        for r in rows:
            writer.writerow([
                repr(args.prior[0]), repr(args.prior[1]), args.k, args.m,
                repr(r.density), repr(args.gamma), repr(args.cost),
                repr(args.reward), args.type.name.lower(),
                repr(r.full_info_component), repr(r.partial_info_value),
                repr(r.vpi),
            ])
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normlab",
        description="Monte Carlo laboratory for rule-density group dynamics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("presets", help="list the shipped experiment presets")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("verify-props", help="run the numerical identity checks")
    p.add_argument("--gammas", type=_float_list, default=(0.9, 0.95, 0.98, 0.99))
    p.add_argument("--densities", type=_float_list,
                   default=tuple(np.arange(0.0, 0.951, 0.05).round(6).tolist()))
    p.add_argument("--eus", type=_float_list, default=(0.2, 1.0, 5.0))
    p.add_argument("--vpi-densities", type=_float_list,
                   default=(0.0, 0.5, 0.9, 0.99))
    p.add_argument("--gamma", type=float, default=0.98)
    p.add_argument("--reward", type=float, default=1.0)
    p.add_argument("--prior", type=_prior, default=(1.0, 1.0))
    p.add_argument("--dp-tol", type=float, default=1e-6)
    p.add_argument("--skip-vpi", action="store_true",
                   help="only run the fast discount-identity grid")
    p.set_defaults(func=cmd_verify_props)

    p = sub.add_parser("solve-policy", help="solve one policy table to CSV")
    p.add_argument("--density", "--d", type=float, required=True)
    p.add_argument("--cost", "--c", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.98)
    p.add_argument("--reward", type=float, default=1.0)
    p.add_argument("--prior", type=_prior, default=(1.0, 1.0))
    p.add_argument("--type", type=_agent_type, default=AgentType.PUNISHER)
    p.add_argument("--depth", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve_policy)

    p = sub.add_parser("simulate", help="run one group and report/trace it")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--config")
    p.add_argument("--densities", type=_float_list)
    p.add_argument("--costs", type=_float_list)
    p.add_argument("--timesteps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=("optimal", "myopic"))
    p.add_argument("--trace", action="store_true",
                   help="write the trajectory CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a factorial sweep; writes aggregate.csv + manifest.json")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--config", help="JSON run config (a manifest.json also works)")
    p.add_argument("--densities", type=_float_list)
    p.add_argument("--costs", type=_float_list)
    p.add_argument("--groups", type=int, help="replications per cell")
    p.add_argument("--timesteps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=("optimal", "myopic"))
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out-dir")
    p.add_argument("--collapse-stats", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("vpi-scan", help="perfect-information value scan to CSV")
    p.add_argument("--densities", "--d", type=_float_list,
                   default=(0.0, 0.5, 0.9, 0.99))
    p.add_argument("--prior", type=_prior, default=(1.0, 1.0))
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--gamma", type=float, default=0.98)
    p.add_argument("--cost", type=float, default=0.0)
    p.add_argument("--reward", type=float, default=1.0)
    p.add_argument("--type", type=_agent_type, default=AgentType.NON_PUNISHER)
    p.add_argument("--quad-tol", type=float, default=1e-8)
    p.add_argument("--dp-tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vpi_scan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the validation code
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

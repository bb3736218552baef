"""Acceptance suite: one test per acceptance criterion.

Each test prints a single ``[PASS]``/``[FAIL] criterion N`` line (visible
with ``pytest -s`` or in the failure report) and then asserts.  Tolerances
and scales are stated inline; nothing here is tuned to pass -- criteria that
the model cannot meet under the shipped conventions fail red.

This module depends only on the normlab package (no figure frontend).
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from normlab import (
    AgentType,
    BeliefState,
    ModelParams,
    MyopicPolicy,
    SweepSpec,
    adjusted_discount,
    brute_force_value,
    collapse_time_stats,
    discount_identity_residual,
    init_group,
    observe,
    observe_then_commit_value,
    posterior_mean,
    preset,
    run_group,
    run_sweep,
    solve,
    step_period,
    vpi,
    write_aggregate_csv,
)
from normlab.engine import is_collapsed


def _check(n, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, f"criterion {n}: {detail}"


def _scan_params(density):
    return ModelParams(density=density, signaling_cost=0.0, discount=0.98,
                       reward=1.0, punisher_share=0.6, prior_alpha=1.0,
                       prior_beta=1.0, group_size=100)


VPI_SCAN_DENSITIES = (0.0, 0.5, 0.9, 0.99)


@pytest.fixture(scope="module")
def scan_tables():
    """Optimal-stopping tables for the uniform-prior, zero-cost VPI scan.

    With c=0 both agent types share one table.  The d=0.99 solve is the
    expensive one (truncation depth ~85k diagonals).
    """
    return {d: solve(_scan_params(d), AgentType.NON_PUNISHER, store_depth=64)
            for d in VPI_SCAN_DENSITIES}


def _row_at(result, d, c, timestep):
    for row in result.rows:
        if row.d == d and row.c == c and row.timestep == timestep:
            return row
    raise LookupError((d, c, timestep))


@pytest.fixture(scope="module")
def norm_collapse_result():
    """Baseline-prior cost contrast at reduced replication count."""
    spec = preset("baseline")
    spec = replace(spec, cost_grid=(0.005, 0.08), replications=200,
                   max_timesteps=100, preset_name=None)
    return run_sweep(spec)


@pytest.fixture(scope="module")
def robustness_result():
    return run_sweep(replace(preset("robustness"), replications=200))


@pytest.fixture(scope="module")
def adaptability_result():
    return run_sweep(replace(preset("adaptability"), replications=200))


def test_criterion_1_discount_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for gamma in (0.9, 0.95, 0.98, 0.99):
        for d in np.arange(0.0, 0.951, 0.05):
            for eu in (0.2, 1.0, 5.0):
                worst = max(worst, abs(discount_identity_residual(gamma, float(d), eu)))
    elapsed = time.perf_counter() - t0
    _check(1, worst <= 1e-12 and elapsed < 1.0,
           f"max |residual| {worst:.3e} (limit 1e-12), {elapsed:.3f}s (limit 1s)")


def test_criterion_2_info_value_vanishes(scan_tables):
    values = []
    for d in VPI_SCAN_DENSITIES:
        rep = vpi(BeliefState(1.0, 1.0), _scan_params(d), AgentType.NON_PUNISHER,
                  table=scan_tables[d])
        values.append(float(rep.vpi))
    monotone = all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
    vanishes = values[-1] <= 0.1 * values[0]
    _check(2, monotone and vanishes,
           "VPI over d=" + str(list(VPI_SCAN_DENSITIES)) + " = "
           + str([round(v, 4) for v in values])
           + f"; non-increasing={monotone}, VPI(0.99)<=0.1*VPI(0)={vanishes}")


def test_criterion_3_commit_policy_lower_bound(scan_tables):
    rng = np.random.default_rng(20240610)
    worst_excess = -math.inf
    n_points = 0
    # c=0 points against the shared scan tables, at all three densities.
    for d in (0.0, 0.9, 0.99):
        params = _scan_params(d)
        table = scan_tables[d]
        for _ in range(12):
            k = int(rng.integers(0, 20))
            m = int(rng.integers(0, 20))
            b = BeliefState(1.0, 1.0, k, m)
            otc = observe_then_commit_value(b, params, AgentType.NON_PUNISHER)
            worst_excess = max(worst_excess, otc - table.value(k, m))
            n_points += 1
    # Costly-punisher points (separate cheap solves; d=0.99 excluded to keep
    # the extra solve budget small -- the zero-cost points already span it).
    for d in (0.0, 0.9):
        params = _scan_params(d).with_(signaling_cost=0.01)
        table = solve(params, AgentType.PUNISHER, store_depth=32)
        for _ in range(7):
            k = int(rng.integers(0, 16))
            m = int(rng.integers(0, 16))
            b = BeliefState(1.0, 1.0, k, m)
            otc = observe_then_commit_value(b, params, AgentType.PUNISHER)
            worst_excess = max(worst_excess, otc - table.value(k, m))
            n_points += 1
    assert n_points == 50
    b0 = BeliefState(1.0, 1.0)
    gaps = {}
    for d in (0.9, 0.99):
        otc = observe_then_commit_value(b0, _scan_params(d), AgentType.NON_PUNISHER)
        gaps[d] = scan_tables[d].value(0, 0) - otc
    shrinks = gaps[0.99] <= gaps[0.9] + 1e-12
    _check(3, worst_excess <= 1e-6 and shrinks,
           f"max (commit - optimum) over {n_points} points = {worst_excess:.3e}"
           f" (limit 1e-6); gap d=0.9 {gaps[0.9]:.4f} -> d=0.99 {gaps[0.99]:.4f}"
           f" shrinks={shrinks}")


def test_criterion_4_oracle_equivalence():
    t0 = time.perf_counter()
    h = 4
    worst = 0.0
    decision_mismatches = 0
    for d in (0.0, 0.5, 0.9):
        for c in (0.0, 0.01, 0.05):
            params = ModelParams(density=d, signaling_cost=c, discount=0.9,
                                 reward=1.0, punisher_share=0.6,
                                 prior_alpha=2.0, prior_beta=1.5, group_size=10)
            gd = adjusted_discount(params.discount, params.density)
            for self_type in AgentType:
                for n in range(4):
                    table = solve(params, self_type, horizon=n + h,
                                  boundary="zero", store_depth=n)
                    for k in range(n + 1):
                        m = n - k
                        b = BeliefState(params.prior_alpha, params.prior_beta, k, m)
                        bf = brute_force_value(params, self_type, b, h)
                        worst = max(worst, abs(bf - table.value(k, m)))
                        # Oracle decision: sign of the participation branch,
                        # expanded one level from child oracle values.
                        p = posterior_mean(b)
                        is_pun = self_type is AgentType.PUNISHER
                        cc = c if is_pun else 0.0
                        half = 0.5 * (1.0 - d) * params.reward
                        branch = (p * (half - cc + gd * brute_force_value(
                                     params, self_type,
                                     BeliefState(b.prior_alpha, b.prior_beta, k + 1, m),
                                     h - 1))
                                  + (1.0 - p) * (-half - cc + gd * brute_force_value(
                                     params, self_type,
                                     BeliefState(b.prior_alpha, b.prior_beta, k, m + 1),
                                     h - 1)))
                        if (branch < 0.0) != bool(table.retire_batch([k], [m])[0]):
                            decision_mismatches += 1
    elapsed = time.perf_counter() - t0
    _check(4, worst <= 1e-9 and decision_mismatches == 0 and elapsed < 60.0,
           f"max |bf - dp| {worst:.3e} (limit 1e-9), decision mismatches "
           f"{decision_mismatches}, {elapsed:.1f}s (limit 60s)")


def test_criterion_5_cost_contrast_ordering(norm_collapse_result):
    res = norm_collapse_result
    densities = (0.0, 0.5, 0.9)
    high = [_row_at(res, d, 0.08, 100).surviving_fraction for d in densities]
    low = [_row_at(res, d, 0.005, 100).surviving_fraction for d in densities]
    strictly_decreasing = all(a > b for a, b in zip(high, high[1:]))
    all_survive = all(f >= 0.95 for f in low)
    _check(5, strictly_decreasing and all_survive,
           f"c=0.08 fractions {high} strictly decreasing={strictly_decreasing}; "
           f"c=0.005 fractions {low} all >= 0.95: {all_survive}")


def test_criterion_6_dilution_aids_persistence(robustness_result):
    res = robustness_result
    c = preset("robustness").cost_grid[0]
    lo = _row_at(res, 0.0, c, 250)
    hi = _row_at(res, 0.9, c, 250)
    frac_ok = hi.surviving_fraction > lo.surviving_fraction
    size_ok = hi.mean_active_size > lo.mean_active_size
    # Soft targets (reported, not gating): fraction 0.75 +- 0.15, size 50 +- 15.
    soft = (abs(hi.surviving_fraction - 0.75) <= 0.15,
            abs(hi.mean_active_size - 50.0) <= 15.0)
    print(f"criterion 6 soft targets at d=0.9: fraction "
          f"{hi.surviving_fraction:.3f} in 0.75+-0.15: {soft[0]}; "
          f"size {hi.mean_active_size:.1f} in 50+-15: {soft[1]}")
    _check(6, frac_ok and size_ok,
           f"t=250 d=0.9 vs d=0.0: fraction {hi.surviving_fraction:.3f} > "
           f"{lo.surviving_fraction:.3f}: {frac_ok}; size "
           f"{hi.mean_active_size:.1f} > {lo.mean_active_size:.1f}: {size_ok}")


def test_criterion_7_dilution_speeds_collapse(adaptability_result):
    res = adaptability_result
    stats = {s.d: s for s in collapse_time_stats(res)}
    lo, hi = stats[0.0], stats[0.9]
    # None medians mean "not reached"; treat as +inf for the comparison.
    med_lo = math.inf if lo.median is None else lo.median
    med_hi = math.inf if hi.median is None else hi.median
    ordered = med_hi < med_lo
    c = preset("adaptability").cost_grid[0]
    times = res.collapse_timesteps[(0.9, c)]
    within_50 = float(np.mean(np.nan_to_num(times, nan=np.inf) <= 50.0))
    print(f"criterion 7 reported clause: {within_50:.2%} of d=0.9 groups "
          f"collapse within 50 timesteps (target >= 90%)")
    _check(7, ordered,
           f"median collapse timestep d=0.9 {med_hi} < d=0.0 {med_lo}: {ordered}")


def test_criterion_8_sweep_determinism(tmp_path):
    spec = SweepSpec(
        base_params=preset("robustness").base_params,
        density_grid=(0.0, 0.9),
        cost_grid=(0.002,),
        replications=16,
        max_timesteps=40,
        master_seed=7,
        preset_name="determinism-check",
    )
    blobs = {}
    for workers in (1, 4, 16):
        path = tmp_path / f"aggregate-w{workers}.csv"
        write_aggregate_csv(run_sweep(spec, workers=workers), path)
        blobs[workers] = path.read_bytes()
    identical = blobs[1] == blobs[4] == blobs[16]
    _check(8, identical,
           f"aggregate.csv byte-identical across workers (1, 4, 16): {identical}"
           f" ({len(blobs[1])} bytes)")


# ---- criterion 9: property suites at 1e4 randomized cases each ----------


def _prop_belief_conservation(n_cases):
    rng = np.random.default_rng(1)
    failures = 0
    for _ in range(n_cases):
        a0 = float(rng.uniform(0.1, 40.0))
        b0 = float(rng.uniform(0.1, 40.0))
        b = BeliefState(a0, b0)
        total = int(rng.integers(0, 30))
        for _ in range(total):
            b = observe(b, AgentType(int(rng.integers(0, 2))))
        ok = (math.isclose(b.alpha + b.beta, a0 + b0 + total)
              and b.k + b.m == total and 0.0 < posterior_mean(b) < 1.0)
        failures += not ok
    return failures


def _sim_params(rng):
    return ModelParams(
        density=float(rng.choice([0.0, 0.3, 0.7])),
        signaling_cost=float(rng.choice([0.0, 0.01, 0.08])),
        discount=0.9, reward=1.0,
        punisher_share=float(rng.uniform(0.2, 0.8)),
        prior_alpha=float(rng.uniform(0.5, 5.0)),
        prior_beta=float(rng.uniform(0.5, 5.0)),
        group_size=int(rng.integers(5, 14)),
    )


def _prop_engine_periods(n_cases):
    """Retirement absorption + pairing validity, checked once per period."""
    rng = np.random.default_rng(2)
    absorption_failures = 0
    pairing_failures = 0
    checks = 0
    while checks < n_cases:
        params = _sim_params(rng)
        policies = {t: MyopicPolicy(params, t) for t in AgentType}
        g = init_group(params, rng.integers(2**32))
        for _ in range(60):
            prev_active = g.active.copy()
            prev_obs = int(g.obs_k.sum() + g.obs_m.sum())
            step_period(g, policies)
            checks += 1
            if np.any(g.active & ~prev_active):
                absorption_failures += 1
            expected = 2 * (int(g.active.sum()) // 2)
            if int(g.obs_k.sum() + g.obs_m.sum()) - prev_obs != expected:
                pairing_failures += 1
            if is_collapsed(g):
                break
    return absorption_failures, pairing_failures, checks


def _prop_survival_monotone(n_cases):
    rng = np.random.default_rng(3)
    failures = 0
    checks = 0
    while checks < n_cases:
        params = _sim_params(rng)
        policies = {t: MyopicPolicy(params, t) for t in AgentType}
        traj = run_group(params, policies, rng.integers(2**32), max_timesteps=40)
        counts = [s.active_count for s in traj.samples]
        for a, b in zip(counts, counts[1:]):
            checks += 1
            if b > a:
                failures += 1
    return failures, checks


def _prop_vpi_nonnegative(n_cases):
    rng = np.random.default_rng(4)
    failures = 0
    checks = 0
    configs = [(d, c, a0, b0, t)
               for d in (0.0, 0.6) for c in (0.0, 0.02)
               for (a0, b0) in ((1.0, 1.0), (1.2, 0.8), (4.0, 3.0))
               for t in AgentType]          # 24 solved tables
    per = -(-n_cases // len(configs))
    for d, c, a0, b0, self_type in configs:
        params = ModelParams(density=d, signaling_cost=c, discount=0.95,
                             reward=1.0, punisher_share=0.6, prior_alpha=a0,
                             prior_beta=b0, group_size=100)
        table = solve(params, self_type, store_depth=80)
        for _ in range(per):
            k = int(rng.integers(0, 40))
            m = int(rng.integers(0, 40))
            rep = vpi(BeliefState(a0, b0, k, m), params, self_type, table=table)
            checks += 1
            if rep.vpi < -1e-8:
                failures += 1
    return failures, checks


def test_criterion_9_property_suites():
    n = 10_000
    belief_fail = _prop_belief_conservation(n)
    absorb_fail, pairing_fail, engine_checks = _prop_engine_periods(n)
    surv_fail, surv_checks = _prop_survival_monotone(n)
    vpi_fail, vpi_checks = _prop_vpi_nonnegative(n)
    ok = belief_fail == absorb_fail == pairing_fail == surv_fail == vpi_fail == 0
    _check(9, ok,
           f"failures -- belief conservation {belief_fail}/{n}, retirement "
           f"absorption {absorb_fail}/{engine_checks}, pairing validity "
           f"{pairing_fail}/{engine_checks}, non-increasing survival "
           f"{surv_fail}/{surv_checks}, VPI non-negativity {vpi_fail}/{vpi_checks}")

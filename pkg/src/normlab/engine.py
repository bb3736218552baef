"""Group simulator: retirement decisions, pairing, games, signals, payoffs.

A GroupState is confined to one worker at a time; policy tables are shared
read-only.  All randomness flows through one named generator so trajectories
are a pure function of (params, seed, max_timesteps).  Per period the stream
is consumed in a fixed order: one permutation for pairing, one uniform draw
per pair for the game kind, one per pair for role assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import AgentType, BeliefState, ModelParams
from .policy import PolicyHorizonError


@dataclass(frozen=True)
class AgentState:
    """Read-only snapshot of one agent (diagnostic view over the arrays)."""

    id: int
    type: AgentType
    belief: BeliefState
    active: bool
    cumulative_payoff: float


@dataclass
class GroupState:
    params: ModelParams
    is_punisher: np.ndarray       # bool, shape (N,)
    obs_k: np.ndarray             # int64 punisher observations
    obs_m: np.ndarray             # int64 non-punisher observations
    active: np.ndarray            # bool
    cum_payoff: np.ndarray        # float64, diagnostic
    period: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    @property
    def active_count(self) -> int:
        return int(self.active.sum())

    def agent(self, i: int) -> AgentState:
        return AgentState(
            id=i,
            type=AgentType.PUNISHER if self.is_punisher[i] else AgentType.NON_PUNISHER,
            belief=BeliefState(self.params.prior_alpha, self.params.prior_beta,
                               k=int(self.obs_k[i]), m=int(self.obs_m[i])),
            active=bool(self.active[i]),
            cumulative_payoff=float(self.cum_payoff[i]),
        )

    def agents(self) -> list[AgentState]:
        return [self.agent(i) for i in range(self.is_punisher.size)]


@dataclass(frozen=True)
class TrajectorySample:
    timestep: int
    active_count: int
    collapsed: bool


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[TrajectorySample, ...]

    def collapse_timestep(self) -> int | None:
        for s in self.samples:
            if s.collapsed:
                return s.timestep
        return None

    @property
    def terminal(self) -> TrajectorySample:
        return self.samples[-1]


def periods_per_timestep(density: float) -> int:
    """One timestep = round(1/(1-d)) group interactions, at least 1."""
    return max(1, round(1.0 / (1.0 - density)))


def init_group(params: ModelParams, seed) -> GroupState:
    """Fresh group: round(theta*N) punishers placed by a seeded shuffle,
    all beliefs at the prior, everyone active."""
    n = params.group_size
    rng = np.random.default_rng(seed)
    is_pun = np.zeros(n, dtype=bool)
    if params.iid_type_assignment:
        is_pun[:] = rng.random(n) < params.punisher_share
    else:
        n_pun = round(params.punisher_share * n)
        is_pun[:n_pun] = True
        rng.shuffle(is_pun)
    return GroupState(
        params=params,
        is_punisher=is_pun,
        obs_k=np.zeros(n, dtype=np.int64),
        obs_m=np.zeros(n, dtype=np.int64),
        active=np.ones(n, dtype=bool),
        cum_payoff=np.zeros(n, dtype=np.float64),
        period=0,
        rng=rng,
    )


def is_collapsed(g: GroupState) -> bool:
    """True once fewer than 2 members remain active."""
    return g.active_count < 2


def step_period(g: GroupState, policies: dict) -> GroupState:
    """Advance the group by one interaction period, in place.

    Order: simultaneous retirement decisions, pairing by seeded shuffle
    (odd agent idles), game-kind draws, partner signal observations, role
    assignment, payoffs.
    """
    p = g.params
    act = np.flatnonzero(g.active)
    if act.size:
        pun_mask = g.is_punisher[act]
        retire = np.zeros(act.size, dtype=bool)
        for type_, mask in ((AgentType.PUNISHER, pun_mask),
                            (AgentType.NON_PUNISHER, ~pun_mask)):
            if mask.any():
                idx = act[mask]
                try:
                    retire[mask] = policies[type_].retire_batch(g.obs_k[idx], g.obs_m[idx])
                except PolicyHorizonError as exc:
                    raise PolicyHorizonError(
                        f"period {g.period}: {exc}") from exc
        g.active[act[retire]] = False

    alive = np.flatnonzero(g.active)
    if alive.size >= 2:
        perm = alive[g.rng.permutation(alive.size)]
        if perm.size % 2:
            perm = perm[:-1]          # uniformly chosen idler: inert this period
        left, right = perm[0::2], perm[1::2]
        silly = g.rng.random(left.size) < p.density

        if p.global_observation:
            pun_total = int(g.is_punisher[perm].sum())
            own = g.is_punisher[perm].astype(np.int64)
            g.obs_k[perm] += pun_total - own
            g.obs_m[perm] += (perm.size - 1) - (pun_total - own)
        else:
            g.obs_k[left] += g.is_punisher[right]
            g.obs_m[left] += ~g.is_punisher[right]
            g.obs_k[right] += g.is_punisher[left]
            g.obs_m[right] += ~g.is_punisher[left]

        left_is_victim = g.rng.random(left.size) < 0.5
        victim = np.where(left_is_victim, left, right)
        bystander = np.where(left_is_victim, right, left)

        r, c = p.reward, p.signaling_cost
        base = np.where(silly, 0.0, np.where(g.is_punisher[bystander], r, -r))
        if p.payoff_convention == "prose":
            victim_pay = base - c * g.is_punisher[victim]
            byst_pay = -c * g.is_punisher[bystander].astype(np.float64)
        else:
            victim_pay = base - c * (2.0 * g.is_punisher[victim] - 1.0)
            byst_pay = c * (2.0 * g.is_punisher[bystander] - 1.0)
        np.add.at(g.cum_payoff, victim, victim_pay)
        np.add.at(g.cum_payoff, bystander, byst_pay)

    g.period += 1
    return g


def run_group(params: ModelParams, policies: dict, seed,
              max_timesteps: int) -> Trajectory:
    """Run one group, sampling once per timestep; stops at collapse."""
    if max_timesteps < 1:
        raise ValueError("max_timesteps must be >= 1")
    g = init_group(params, seed)
    ppt = periods_per_timestep(params.density)
    samples = [TrajectorySample(0, g.active_count, is_collapsed(g))]
    for t in range(1, max_timesteps + 1):
        if samples[-1].collapsed:
            break
        for _ in range(ppt):
            step_period(g, policies)
        samples.append(TrajectorySample(t, g.active_count, is_collapsed(g)))
    return Trajectory(samples=tuple(samples))

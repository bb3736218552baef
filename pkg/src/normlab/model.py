"""Parameters, payoff arithmetic, and Beta-Bernoulli belief machinery.

Everything in this module is an immutable value or a pure function, so it is
safe to share across simulation workers without locking.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class AgentType(Enum):
    PUNISHER = 1
    NON_PUNISHER = 0


class GameKind(Enum):
    SILLY = "silly"
    IMPORTANT = "important"


# How per-interaction signaling costs are charged.  "prose": every punisher
# pays c per interaction, in either role.  "equation": the literal
# (2t-1)c terms, under which some agents are *credited* c; kept only for
# side-by-side comparison.
PAYOFF_CONVENTIONS = ("prose", "equation")


@dataclass(frozen=True)
class ModelParams:
    """All scalar parameters of one group environment."""

    density: float            # probability a drawn game is silly, in [0, 1)
    signaling_cost: float     # c >= 0, paid per interaction by a punisher
    discount: float           # base per-important-interaction discount, in (0, 1)
    reward: float             # R > 0, victim gain/loss magnitude in important games
    punisher_share: float     # true punisher fraction theta, in [0, 1]
    prior_alpha: float        # Beta prior pseudo-counts, > 0
    prior_beta: float
    group_size: int           # N >= 2
    payoff_convention: str = "prose"
    iid_type_assignment: bool = False   # default: exactly round(theta*N) punishers
    global_observation: bool = False    # sensitivity flag: observe all signals, not just partner's

    def __post_init__(self):
        if not 0.0 <= self.density < 1.0:
            raise ValueError(f"density must be in [0, 1), got {self.density}")
        if self.signaling_cost < 0.0:
            raise ValueError(f"signaling_cost must be >= 0, got {self.signaling_cost}")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must be in (0, 1), got {self.discount}")
        if self.reward <= 0.0:
            raise ValueError(f"reward must be > 0, got {self.reward}")
        if not 0.0 <= self.punisher_share <= 1.0:
            raise ValueError(f"punisher_share must be in [0, 1], got {self.punisher_share}")
        if self.prior_alpha <= 0.0 or self.prior_beta <= 0.0:
            raise ValueError("prior pseudo-counts must be positive")
        if self.group_size < 2:
            raise ValueError(f"group_size must be >= 2, got {self.group_size}")
        if self.payoff_convention not in PAYOFF_CONVENTIONS:
            raise ValueError(f"unknown payoff_convention {self.payoff_convention!r}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class BeliefState:
    """Beta posterior over the punisher share: prior pseudo-counts plus
    integer observation counts.

    Counts are kept separate from the prior so the belief space is an exact
    integer lattice even for non-integer priors such as 1.2:0.8.
    """

    prior_alpha: float
    prior_beta: float
    k: int = 0   # punisher observations
    m: int = 0   # non-punisher observations

    def __post_init__(self):
        if self.prior_alpha <= 0.0 or self.prior_beta <= 0.0:
            raise ValueError("prior pseudo-counts must be positive")
        if self.k < 0 or self.m < 0:
            raise ValueError("observation counts must be non-negative")

    @property
    def alpha(self) -> float:
        return self.prior_alpha + self.k

    @property
    def beta(self) -> float:
        return self.prior_beta + self.m

    @property
    def n_observations(self) -> int:
        return self.k + self.m


def adjusted_discount(gamma: float, density: float) -> float:
    """Density-adjusted discount gamma_d = 1 - (1-d)(1-gamma).

    Chosen so that the expected discounted stream of important-game rewards
    is independent of how many silly interactions are interleaved.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not 0.0 <= density < 1.0:
        raise ValueError(f"density must be in [0, 1), got {density}")
    return 1.0 - (1.0 - density) * (1.0 - gamma)


def discount_identity_residual(gamma: float, density: float, eu: float) -> float:
    """Residual of eu/(1-gamma) - (1-d)*eu/(1-gamma_d).

    Zero (to rounding) for all valid inputs; exposed so the identity can be
    checked numerically over a grid.
    """
    adjusted_discount(gamma, density)  # input validation
    # 1 - gamma_d = (1-d)(1-gamma), evaluated directly to avoid the
    # cancellation in 1 - (1 - x) that would swamp the 1e-12 contract
    one_minus_gd = (1.0 - density) * (1.0 - gamma)
    return eu / (1.0 - gamma) - (1.0 - density) * eu / one_minus_gd


def posterior_mean(b: BeliefState) -> float:
    """Mean of the Beta posterior, alpha / (alpha + beta)."""
    return b.alpha / (b.alpha + b.beta)


def observe(b: BeliefState, t: AgentType) -> BeliefState:
    """Fold one partner-type observation into the belief."""
    if t is AgentType.PUNISHER:
        return replace(b, k=b.k + 1)
    return replace(b, m=b.m + 1)


def expected_period_reward(p: float, params: ModelParams, self_type: AgentType) -> float:
    """Expected one-interaction payoff when the partner is a punisher w.p. p.

    Victim role w.p. 1/2, important game w.p. (1-d), victim payoff +/-R by
    partner type; punishers pay the signaling cost every interaction.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be a probability, got {p}")
    cost = params.signaling_cost if self_type is AgentType.PUNISHER else 0.0
    return 0.5 * (1.0 - params.density) * (2.0 * p - 1.0) * params.reward - cost


def realize_interaction(
    victim_type: AgentType,
    bystander_type: AgentType,
    kind: GameKind,
    params: ModelParams,
) -> tuple[float, float]:
    """Payoffs (victim, bystander) of one realized pairing.

    The external rule-breaker complies exactly when the bystander is a
    punisher, so in important games the victim gains +R against a punisher
    bystander and loses R otherwise; silly games pay the victim 0.
    """
    r, c = params.reward, params.signaling_cost
    t_v = 1.0 if victim_type is AgentType.PUNISHER else 0.0
    t_b = 1.0 if bystander_type is AgentType.PUNISHER else 0.0
    if kind is GameKind.IMPORTANT:
        base_victim = r if bystander_type is AgentType.PUNISHER else -r
    else:
        base_victim = 0.0
    if params.payoff_convention == "prose":
        return base_victim - t_v * c, -t_b * c
    # literal equation form: cost terms signed (2t-1)c
    return base_victim - (2.0 * t_v - 1.0) * c, (2.0 * t_b - 1.0) * c

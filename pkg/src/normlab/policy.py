"""Optimal participate/retire policies over the Beta-Bernoulli belief lattice.

The retirement problem is solved exactly by backward induction over lattice
diagonals n = k + m, from a truncation depth T (chosen from an explicit
error bound) down to the root.  A small-horizon brute-force expectimax is
provided as an independent verification oracle.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import AgentType, BeliefState, ModelParams, adjusted_discount, \
    expected_period_reward, posterior_mean

BOUNDARY_PERPETUITY = "perpetuity"
BOUNDARY_ZERO = "zero"

CACHE_FORMAT_VERSION = "normlab-policy-cache-v1"


class PolicyHorizonError(Exception):
    """A belief was queried or required beyond the solved/stored lattice depth."""


def _tri(n: int, k) -> int:
    # flat index of lattice point (k, m) with n = k + m
    return n * (n + 1) // 2 + k


def _fingerprint(params: ModelParams, self_type: AgentType, tol: float,
                 horizon: int, boundary: str) -> str:
    doc = {
        "density": params.density,
        "signaling_cost": params.signaling_cost,
        "discount": params.discount,
        "reward": params.reward,
        "prior_alpha": params.prior_alpha,
        "prior_beta": params.prior_beta,
        "self_type": self_type.name,
        "tol": tol,
        "horizon": horizon,
        "boundary": boundary,
    }
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class PolicyTable:
    """Participation values over the belief lattice for one (params, type) pair.

    ``part`` holds the participation branch of the Bellman equation for each
    lattice point (k, m) with k + m <= store_depth, in diagonal-major order.
    The value function is V = max(part, 0) and the decision is
    Retire iff part < 0.  Immutable after construction; safe for concurrent
    reads.
    """

    params_fingerprint: str
    self_type: AgentType
    prior_alpha: float
    prior_beta: float
    gamma_d: float
    horizon: int          # truncation depth T of the induction
    store_depth: int      # deepest stored diagonal
    part: np.ndarray = field(repr=False)
    capped: bool = False

    def _index(self, k, m):
        k = np.asarray(k, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        if np.any(k < 0) or np.any(m < 0):
            raise ValueError("lattice coordinates must be non-negative")
        n = k + m
        if np.any(n > self.store_depth):
            raise PolicyHorizonError(
                f"belief depth {int(n.max())} exceeds stored depth {self.store_depth}"
            )
        return _tri(n, k)

    def participation_value(self, k, m):
        """Participation branch of the Bellman equation at (k, m)."""
        return self.part[self._index(k, m)]

    def value(self, k, m):
        """Optimal value V(k, m) >= 0."""
        return np.maximum(self.part[self._index(k, m)], 0.0)

    def retire_batch(self, k, m) -> np.ndarray:
        """Vector of booleans: True where the optimal action is Retire."""
        return self.part[self._index(k, m)] < 0.0

    def decide(self, b: BeliefState) -> str:
        """'retire' or 'continue' for one belief; fails loudly out of range."""
        if b.prior_alpha != self.prior_alpha or b.prior_beta != self.prior_beta:
            raise ValueError("belief prior does not match this table")
        return "retire" if bool(self.retire_batch(b.k, b.m)) else "continue"

    def save(self, path) -> None:
        """Persist to an .npz cache; format version and fingerprint included."""
        meta = {
            "format": CACHE_FORMAT_VERSION,
            "params_fingerprint": self.params_fingerprint,
            "self_type": self.self_type.name,
            "prior_alpha": self.prior_alpha,
            "prior_beta": self.prior_beta,
            "gamma_d": self.gamma_d,
            "horizon": self.horizon,
            "store_depth": self.store_depth,
            "capped": self.capped,
        }
        np.savez_compressed(path, part=self.part, meta=json.dumps(meta))

    @staticmethod
    def load(path, expected_fingerprint: str | None = None) -> "PolicyTable":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("format") != CACHE_FORMAT_VERSION:
                raise ValueError(f"unsupported cache format {meta.get('format')!r}")
            if expected_fingerprint is not None and \
                    meta["params_fingerprint"] != expected_fingerprint:
                raise ValueError("cache fingerprint mismatch")
            return PolicyTable(
                params_fingerprint=meta["params_fingerprint"],
                self_type=AgentType[meta["self_type"]],
                prior_alpha=meta["prior_alpha"],
                prior_beta=meta["prior_beta"],
                gamma_d=meta["gamma_d"],
                horizon=meta["horizon"],
                store_depth=meta["store_depth"],
                part=data["part"].copy(),
                capped=meta["capped"],
            )


def truncation_depth(params: ModelParams, tol: float) -> int:
    """Smallest depth T with tail bound gamma_d^T * (0.5(1-d)R + c)/(1-gamma_d) <= tol."""
    gd = adjusted_discount(params.discount, params.density)
    scale = 0.5 * (1.0 - params.density) * params.reward + params.signaling_cost
    bound0 = scale / (1.0 - gd)
    if bound0 <= tol:
        return 0
    return int(math.ceil(math.log(tol / bound0) / math.log(gd)))


def solve(
    params: ModelParams,
    self_type: AgentType,
    tol: float = 1e-6,
    horizon_cap: int = 200_000,
    store_depth: int | None = None,
    horizon: int | None = None,
    boundary: str = BOUNDARY_PERPETUITY,
    strict: bool = True,
) -> PolicyTable:
    """Backward induction over diagonals of the belief lattice.

    ``horizon`` forces an explicit truncation depth (used with
    boundary='zero' to match the finite-horizon oracle); otherwise the depth
    is the smallest T whose tail bound falls below ``tol``, capped at
    ``horizon_cap``.  Only diagonals n <= store_depth are retained; the
    induction always starts from the full depth.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if boundary not in (BOUNDARY_PERPETUITY, BOUNDARY_ZERO):
        raise ValueError(f"unknown boundary {boundary!r}")

    gd = adjusted_discount(params.discount, params.density)
    is_pun = self_type is AgentType.PUNISHER
    c = params.signaling_cost if is_pun else 0.0
    half = 0.5 * (1.0 - params.density) * params.reward
    r_pun_partner = half - c     # reward when the partner turns out a punisher
    r_non_partner = -half - c

    capped = False
    if horizon is not None:
        depth = int(horizon)
        if depth < 0:
            raise ValueError("horizon must be non-negative")
    else:
        depth = truncation_depth(params, tol)
        if depth > horizon_cap:
            if strict:
                raise PolicyHorizonError(
                    f"required depth {depth} exceeds horizon_cap {horizon_cap}"
                )
            depth = horizon_cap
            capped = True

    if store_depth is None:
        store_depth = min(depth, 512)
    store_depth = min(store_depth, depth)
    if boundary == BOUNDARY_ZERO:
        # no participation branch is defined on the terminal diagonal
        store_depth = min(store_depth, max(depth - 1, 0))

    a0, b0 = params.prior_alpha, params.prior_beta
    part = np.full(_tri(store_depth + 1, 0), np.nan, dtype=np.float64)

    kk = np.arange(depth + 1, dtype=np.float64)
    # terminal diagonal
    if boundary == BOUNDARY_ZERO:
        v_next = np.zeros(depth + 1)
    else:
        p = (a0 + kk) / (a0 + b0 + depth)
        w = ((2.0 * p - 1.0) * half - c) / (1.0 - gd)   # never-retire perpetuity
        if depth <= store_depth:
            part[_tri(depth, 0):_tri(depth + 1, 0)] = w
        v_next = np.maximum(w, 0.0)

    dr = r_pun_partner - r_non_partner
    for n in range(depth - 1, -1, -1):
        p = (a0 + kk[: n + 1]) / (a0 + b0 + n)
        w = r_non_partner + p * dr + gd * (v_next[: n + 1] + p * (v_next[1: n + 2] - v_next[: n + 1]))
        if n <= store_depth:
            part[_tri(n, 0):_tri(n + 1, 0)] = w
        v_next = np.maximum(w, 0.0)

    return PolicyTable(
        params_fingerprint=_fingerprint(params, self_type, tol, depth, boundary),
        self_type=self_type,
        prior_alpha=a0,
        prior_beta=b0,
        gamma_d=gd,
        horizon=depth,
        store_depth=store_depth,
        part=part,
        capped=capped,
    )


def brute_force_value(
    params: ModelParams,
    self_type: AgentType,
    b: BeliefState,
    h: int,
) -> float:
    """Exact expectimax value of the h-period game with outside option 0.

    Enumerates every partner-type sequence (the full 2^h tree, no
    memoization), weighting branches by posterior predictive probabilities.
    Verification oracle only; h is capped at 8.
    """
    if h < 0:
        raise ValueError("horizon must be non-negative")
    if h > 8:
        raise ValueError(f"brute-force horizon capped at 8, got {h}")
    gd = adjusted_discount(params.discount, params.density)
    is_pun = self_type is AgentType.PUNISHER
    c = params.signaling_cost if is_pun else 0.0
    half = 0.5 * (1.0 - params.density) * params.reward
    a0, b0 = b.prior_alpha, b.prior_beta

    def recurse(k: int, m: int, remaining: int) -> float:
        if remaining == 0:
            return 0.0
        p = (a0 + k) / (a0 + b0 + k + m)
        cont = (
            p * ((half - c) + gd * recurse(k + 1, m, remaining - 1))
            + (1.0 - p) * ((-half - c) + gd * recurse(k, m + 1, remaining - 1))
        )
        return max(0.0, cont)

    return recurse(b.k, b.m, h)


def myopic_decide(b: BeliefState, params: ModelParams, self_type: AgentType) -> str:
    """Baseline policy: retire iff the one-period expected reward is negative."""
    r = expected_period_reward(posterior_mean(b), params, self_type)
    return "retire" if r < 0.0 else "continue"


class MyopicPolicy:
    """Adapter exposing the myopic threshold rule with the PolicyTable query API."""

    def __init__(self, params: ModelParams, self_type: AgentType):
        self.params = params
        self.self_type = self_type
        self.prior_alpha = params.prior_alpha
        self.prior_beta = params.prior_beta
        gd = adjusted_discount(params.discount, params.density)
        self.gamma_d = gd
        c = params.signaling_cost if self_type is AgentType.PUNISHER else 0.0
        self._half = 0.5 * (1.0 - params.density) * params.reward
        self._cost = c

    def retire_batch(self, k, m) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        m = np.asarray(m, dtype=np.float64)
        p = (self.prior_alpha + k) / (self.prior_alpha + self.prior_beta + k + m)
        return (2.0 * p - 1.0) * self._half - self._cost < 0.0

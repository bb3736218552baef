"""Value of perfect information over the punisher share.

Compares the expected full-information value E[max(V(theta), 0)] with the
optimal partial-information value from the lattice solver, and provides an
exact observe-then-commit policy value that lower-bounds the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats

from .model import AgentType, BeliefState, ModelParams, adjusted_discount, \
    expected_period_reward, posterior_mean
from . import policy as policy_mod

OTC_ENUMERATION_CAP = 10_000


@dataclass(frozen=True)
class VpiReport:
    belief: BeliefState
    density: float
    full_info_component: float    # E[max(V(theta), 0)] under the belief
    partial_info_value: float     # lattice-solver value at the same belief
    vpi: float
    quadrature_error_estimate: float


def full_info_value(theta: float, params: ModelParams, self_type: AgentType) -> float:
    """Expected value of participating forever when theta is known."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be a probability, got {theta}")
    gd = adjusted_discount(params.discount, params.density)
    return expected_period_reward(theta, params, self_type) / (1.0 - gd)


def _clipped_value_closed_form(b: BeliefState, params: ModelParams,
                               self_type: AgentType) -> float:
    # V(theta) = a*theta + off is affine, so the clipped Beta expectation
    # reduces to incomplete-beta terms.
    gd = adjusted_discount(params.discount, params.density)
    c = params.signaling_cost if self_type is AgentType.PUNISHER else 0.0
    a = (1.0 - params.density) * params.reward / (1.0 - gd)
    off = (-0.5 * (1.0 - params.density) * params.reward - c) / (1.0 - gd)
    alpha, beta = b.alpha, b.beta
    mean = alpha / (alpha + beta)
    theta_star = -off / a
    if theta_star <= 0.0:
        return a * mean + off
    if theta_star >= 1.0:
        return 0.0
    # E[(a*theta+off) ; theta > theta*]
    tail_all = stats.beta.sf(theta_star, alpha, beta)
    tail_mean = stats.beta.sf(theta_star, alpha + 1.0, beta)
    return a * mean * tail_mean + off * tail_all


def _clipped_value_quadrature(b: BeliefState, params: ModelParams,
                              self_type: AgentType, quad_tol: float) -> tuple[float, float]:
    gd = adjusted_discount(params.discount, params.density)
    c = params.signaling_cost if self_type is AgentType.PUNISHER else 0.0
    a = (1.0 - params.density) * params.reward / (1.0 - gd)
    off = (-0.5 * (1.0 - params.density) * params.reward - c) / (1.0 - gd)
    alpha, beta = b.alpha, b.beta

    def integrand(theta):
        return max(a * theta + off, 0.0) * stats.beta.pdf(theta, alpha, beta)

    # break the interval at the kink and near the bulk of the density
    mean = alpha / (alpha + beta)
    sd = math.sqrt(alpha * beta / ((alpha + beta) ** 2 * (alpha + beta + 1.0)))
    pts = sorted({p for p in (-off / a, mean - 3 * sd, mean, mean + 3 * sd)
                  if 0.0 < p < 1.0})
    value, err = integrate.quad(integrand, 0.0, 1.0, points=pts or None,
                                epsabs=quad_tol, limit=200)
    if err > quad_tol * 100:
        raise RuntimeError(f"quadrature did not converge: error estimate {err}")
    return value, err


def _expected_clipped(b: BeliefState, params: ModelParams,
                      self_type: AgentType, quad_tol: float) -> tuple[float, float]:
    if quad_tol <= 0.0:
        raise ValueError("quad_tol must be positive")
    closed = _clipped_value_closed_form(b, params, self_type)
    quad, err = _clipped_value_quadrature(b, params, self_type, quad_tol)
    if abs(closed - quad) > 10.0 * quad_tol * max(1.0, abs(closed)):
        raise RuntimeError(
            f"closed form {closed} and quadrature {quad} disagree beyond tolerance"
        )
    return closed, err


def expected_clipped_value(b: BeliefState, params: ModelParams,
                           self_type: AgentType, quad_tol: float = 1e-8) -> float:
    """E[max(V(theta), 0)] under the Beta belief.

    Computed both in closed form and by adaptive quadrature; the two must
    agree within 10 * quad_tol.
    """
    return _expected_clipped(b, params, self_type, quad_tol)[0]


def vpi(b: BeliefState, params: ModelParams, self_type: AgentType,
        quad_tol: float = 1e-8, dp_tol: float = 1e-6,
        horizon_cap: int = 200_000,
        table: "policy_mod.PolicyTable | None" = None) -> VpiReport:
    """Full report: clipped full-information value minus the lattice optimum.

    A precomputed ``table`` (matching the belief's prior) may be supplied to
    amortize solves across scans; otherwise one is solved here with the
    observation counts folded into the prior.
    """
    full, quad_err = _expected_clipped(b, params, self_type, quad_tol)
    if table is not None:
        partial = float(table.value(b.k, b.m))
    else:
        folded = params.with_(prior_alpha=b.alpha, prior_beta=b.beta)
        tab = policy_mod.solve(folded, self_type, tol=dp_tol,
                               horizon_cap=horizon_cap, store_depth=0)
        partial = float(tab.value(0, 0))
    return VpiReport(
        belief=b,
        density=params.density,
        full_info_component=full,
        partial_info_value=partial,
        vpi=full - partial,
        quadrature_error_estimate=quad_err,
    )


def commit_rounds(density: float) -> int:
    """Observation-phase length ceil(1/sqrt(1-d)) of the commit policy."""
    if not 0.0 <= density < 1.0:
        raise ValueError(f"density must be in [0, 1), got {density}")
    return int(math.ceil(1.0 / math.sqrt(1.0 - density)))


def observe_then_commit_value(b: BeliefState, params: ModelParams,
                              self_type: AgentType,
                              enumeration_cap: int = OTC_ENUMERATION_CAP) -> float:
    """Exact value of: participate tau rounds, then retire permanently iff
    the posterior-mean participation value is negative, else stay forever.

    Rewards accrue normally during the observation phase (their expectation
    per round equals the prior-mean period reward, by the martingale property
    of the posterior mean).  The terminal decision is enumerated exactly over
    the tau+1 reachable observation counts with Beta-binomial weights.
    Any fixed policy lower-bounds the lattice optimum; that inequality is the
    cross-module check.
    """
    tau = commit_rounds(params.density)
    if tau > enumeration_cap:
        raise ValueError(f"commit phase of {tau} rounds exceeds cap {enumeration_cap}")
    gd = adjusted_discount(params.discount, params.density)
    r0 = expected_period_reward(posterior_mean(b), params, self_type)
    phase = r0 * (1.0 - gd ** tau) / (1.0 - gd)

    j = np.arange(tau + 1)
    weights = stats.betabinom.pmf(j, tau, b.alpha, b.beta)
    post_mean = (b.alpha + j) / (b.alpha + b.beta + tau)
    c = params.signaling_cost if self_type is AgentType.PUNISHER else 0.0
    ev = (0.5 * (1.0 - params.density) * (2.0 * post_mean - 1.0) * params.reward
          - c) / (1.0 - gd)
    tail = gd ** tau * float(np.sum(weights * np.maximum(ev, 0.0)))
    return phase + tail

"""normlab: Monte Carlo laboratory for rule-density group dynamics.

Bayesian agents with Beta beliefs over the punisher share decide, via an
exactly solved optimal-stopping policy, whether to keep participating in a
rule-governed group; a sweep harness reproduces the cost-sensitivity,
robustness, and adaptability experiments over density/cost grids.
"""

__version__ = "0.1.0"

from .model import (AgentType, BeliefState, GameKind, ModelParams,
                    adjusted_discount, discount_identity_residual, observe,
                    posterior_mean, expected_period_reward, realize_interaction)
from .policy import (MyopicPolicy, PolicyHorizonError, PolicyTable,
                     brute_force_value, myopic_decide, solve, truncation_depth)
from .infovalue import (VpiReport, expected_clipped_value, full_info_value,
                        observe_then_commit_value, vpi, commit_rounds)
from .engine import (AgentState, GroupState, Trajectory, init_group,
                     is_collapsed, periods_per_timestep, run_group, step_period)
from .sweep import (AggregateRow, SweepSpec, SweepResult, collapse_time_stats,
                    preset, run_sweep, write_aggregate_csv, write_manifest)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Watch three groups live or die.

Runs one 100-agent group at each game density under identical seeds and
prints the active-member trajectory.  With a weak prior and a true punisher
share below what agents expect, high-density groups discover the bad news
quickly and collapse; low-density groups take far longer.

Run:  python3 demos/group_dynamics.py
"""

from normlab import AgentType, ModelParams, run_group, solve
from normlab.engine import periods_per_timestep

MAX_TIMESTEPS = 60

for d in (0.0, 0.5, 0.9):
    params = ModelParams(density=d, signaling_cost=0.002, discount=0.98,
                         reward=1.0, punisher_share=0.4, prior_alpha=1.2,
                         prior_beta=0.8, group_size=100)
    depth = MAX_TIMESTEPS * periods_per_timestep(d)
    policies = {t: solve(params, t, store_depth=depth) for t in AgentType}
    traj = run_group(params, policies, seed=7, max_timesteps=MAX_TIMESTEPS)
    counts = [s.active_count for s in traj.samples]
    bar = " ".join(f"{c:3d}" for c in counts[:16])
    collapse = traj.collapse_timestep()
    tail = f"collapsed at timestep {collapse}" if collapse is not None \
        else f"still {counts[-1]} strong at timestep {len(counts) - 1}"
    print(f"d={d:.1f}  first timesteps: {bar} ...  {tail}")

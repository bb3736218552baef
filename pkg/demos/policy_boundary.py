"""Where does an agent give up on its group?

Solves the optimal-stopping problem for both agent types and prints the
retire/stay boundary over the belief lattice: after k punisher and m
non-punisher observations, an agent stays iff its participation value is
still non-negative.  The punisher boundary sits strictly higher because
punishers pay the signaling cost every interaction.

Run:  python3 demos/policy_boundary.py
"""

import numpy as np

from normlab import AgentType, ModelParams, solve

params = ModelParams(density=0.5, signaling_cost=0.02, discount=0.95,
                     reward=1.0, punisher_share=0.6, prior_alpha=1.2,
                     prior_beta=0.8, group_size=100)

DEPTH = 24
tables = {t: solve(params, t, store_depth=DEPTH) for t in AgentType}

print(f"density={params.density}  cost={params.signaling_cost}  "
      f"prior=({params.prior_alpha}, {params.prior_beta})")
print("Rows: punisher observations k; columns: non-punisher observations m.")
for t, table in tables.items():
    print(f"\n{t.name}: '.' = stay, 'x' = retire")
    for k in range(DEPTH + 1):
        ms = np.arange(DEPTH + 1 - k)
        retire = table.retire_batch(np.full_like(ms, k), ms)
        print(f"  k={k:2d}  " + "".join("x" if r else "." for r in retire))

# The boundary in words: the smallest m (for k=0) that tips each type out.
for t, table in tables.items():
    retire = table.retire_batch(np.zeros(DEPTH + 1, dtype=int),
                                np.arange(DEPTH + 1))
    tip = int(np.argmax(retire)) if retire.any() else None
    print(f"{t.name}: first retiring m at k=0 -> {tip}")

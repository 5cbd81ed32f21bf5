# %% [markdown]
# # Shunting activity landscape
#
# One neuron per cell. The target gets a large positive input, obstacles a
# large negative one, and activity spreads through positive lateral links.
# The settled field has a single peak at the target, so climbing it is a
# planner.

# %%
import numpy as np

from gridplan.bench import render_map
from gridplan.gridworld import GridMap
from gridplan.shunting import ActivityField, ShuntingParams, plan, step

m = GridMap.from_strings([
    "S.........",
    "..........",
    "#######...",
    "..........",
    "...#######",
    "..........",
    ".........T",
])

# %%
p = ShuntingParams()
path, reached, field = plan(m, p)
print("converged after", field.iteration, "steps; reached:", reached)
print(render_map(m, path=path))

# %% [markdown]
# Activity decays roughly geometrically with distance from the target.

# %%
np.set_printoptions(precision=2, linewidth=120)
print(np.log10(np.maximum(field.x, 1e-300)))

# %% [markdown]
# An isolated neuron under constant input I settles at B*I/(A+I)
# (or -D*|I|/(A+|I|) for negative input).

# %%
for I in (5.0, -5.0):
    f = ActivityField(np.zeros((1, 1)))
    for _ in range(5000):
        f = step(f, np.full((1, 1), I), p)
    print(I, f.x[0, 0], p.B * I / (p.A + I) if I > 0 else -p.D * -I / (p.A - I))

# %% [markdown]
# # Distance fields by min-consensus
#
# Every free cell repeatedly takes the minimum over its neighbours of
# (neighbour value + step cost); the target is pinned at 0. Starting from
# infinity, the sweeps settle on the exact shortest-path distances.

# %%
from importlib import resources

from gridplan.bench import render_map
from gridplan.consensus import init_net, plan, solve, sweep
from gridplan.gridworld import Neighborhood, read_scenario, shortest_path_oracle

data = resources.files("gridplan") / "data"
cfg = read_scenario(data / "reference.map")
m = cfg.map
print(m.shape, "obstacles:", int(m.blocked.sum()))

# %% [markdown]
# A few synchronous sweeps: the front moves one cell per sweep.

# %%
net = init_net(m, Neighborhood.FOUR)
for _ in range(3):
    net, change = sweep(net)
print(net.state[:4, :4])

# %%
field = solve(init_net(m, Neighborhood.FOUR))
print("sweeps:", field.sweeps)
print(render_map(m, field))

# %% [markdown]
# The tabulation above matches the bundled reference field cell for cell, and
# the brute-force oracle agrees.

# %%
assert render_map(m, field) == (data / "reference_distance.txt").read_text()
ref, _ = shortest_path_oracle(m, Neighborhood.FOUR)
assert (ref[~m.blocked] == field.d[~m.blocked]).all()

path, _ = plan(m, Neighborhood.FOUR)
print(len(path) - 1, "steps")
print(render_map(m, path=path))

# %% [markdown]
# With diagonal moves (cost sqrt 2) the same protocol gives the 8-connected
# field.

# %%
path8, f8 = plan(m, Neighborhood.EIGHT)
print(round(f8[m.start], 3), "vs", field[m.start])

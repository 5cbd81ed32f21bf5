# %% [markdown]
# # GA, ACO and beetle swarm on one map
#
# GA and BSO search over waypoint sequences (any-angle segments between cell
# centres); ACO walks the 8-connected grid graph.

# %%
from importlib import resources

from gridplan.bench import render_map
from gridplan.gridworld import Neighborhood, read_scenario, shortest_path_oracle
from gridplan.metaheuristics import ACOParams, BSOParams, GAParams, run_aco, run_bso, run_ga

cfg = read_scenario(resources.files("gridplan") / "data" / "suite" / "wall_gap.map")
d, _ = shortest_path_oracle(cfg.map, Neighborhood.EIGHT)
print("8-connected optimum:", round(d[cfg.map.start], 3))

# %%
results = {
    "ga": run_ga(cfg, GAParams(), seed=1),
    "aco": run_aco(cfg, ACOParams(), seed=1),
    "bso": run_bso(cfg, BSOParams(), seed=1),
}
for name, r in results.items():
    print(f"{name}: len {r.path_len:.3f}, best at iteration {r.iterations_to_best}, {r.wall_ms:.0f} ms")

# %% [markdown]
# Convergence traces.

# %%
for name, r in results.items():
    print(name, [round(c, 2) for c in r.trace.best_cost[:10]])

# %%
print(render_map(cfg.map, path=results["aco"].path))

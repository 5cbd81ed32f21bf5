# %% [markdown]
# # Seeded head-to-head benchmark
#
# Trial i of every (algo, map) pair uses seed base + i, so any row can be
# re-run alone. The same table comes from
# `gridplan bench --algos aco,bso --trials 3 --out trials.csv`.

# %%
from gridplan import bench

scenarios = bench.load_suite(bench.suite_files(bench.default_suite_dir()))
cfg = bench.BenchConfig(tuple(scenarios), ("aco", "bso"), trials=3, base_seed=0)
table = bench.run_suite(cfg)
print(bench.summary_csv(table))

# %%
ratio = table.wall_time_ratio("bso", "aco")
print(f"BSO takes {100 * ratio:.1f}% of ACO's wall time on this machine")

# %%
text = bench.emit_csv(table, walltime=False)
print(text.splitlines()[:4])
assert bench.emit_csv(bench.parse_csv(text), walltime=False) == text

# %% [markdown]
# # From a noisy frame to a grid
#
# Threshold, downsample into blocks, and score the frame by spatial frequency
# and by the residual of a short linear predictor over the pixel scan.

# %%
import numpy as np

from gridplan.bench import render_map
from gridplan.consensus import plan
from gridplan.gridworld import Neighborhood
from gridplan.perception import fit_predictor, frame_to_grid, quality_report, spatial_frequency

rng = np.random.default_rng(0)
frame = np.zeros((40, 40))
frame[8:32, 18:22] = 255
frame[8:12, 4:18] = 255
noisy = np.clip(frame + rng.normal(0, 30, frame.shape), 0, 255)

# %%
for name, f in (("clean", frame), ("noisy", noisy)):
    print(name, quality_report(f, k=2))

# %% [markdown]
# Predictor coefficients keep the negated sign convention: for
# y(n) = 0.7 y(n-1) the fitted a_1 is -0.7.

# %%
y = 0.7 ** np.arange(40)
print(fit_predictor(y, 1).coefficients)
print(spatial_frequency([[0, 255, 0, 255]]))

# %%
m = frame_to_grid(noisy, threshold=128, cell=4, start=(9, 0), target=(0, 9))
path, _ = plan(m, Neighborhood.EIGHT)
print(render_map(m, path=path))

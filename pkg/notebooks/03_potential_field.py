# %% [markdown]
# # Potential-field tracking
#
# The attractive force pulls on relative position, velocity and acceleration.
# Without the velocity term the robot orbits a moving target; with it the
# error dies out.

# %%
import numpy as np

from gridplan.potential_field import (
    APFParams,
    ConstantVelocityTarget,
    ObstacleSet,
    RobotState,
    StaticTarget,
    simulate,
    tracking_error,
)

target = ConstantVelocityTarget([4.0, -2.0], [0.6, 0.3])
for beta in (0.0, 2.0):
    p = APFParams(beta=beta, max_steps=1500)
    traj, _ = simulate(RobotState([0, 0]), target, None, p, stop_on_arrival=False)
    print(f"beta={beta}: tail error {tracking_error(traj, target, p.dt):.3g}")

# %% [markdown]
# Obstacles repel inside `rho0`. Repulsion is scaled by the distance to the
# goal, so a goal next to an obstacle is still reachable.

# %%
obs = ObstacleSet([[5.0, 0.4], [8.0, -0.6]], [0.5, 0.5])
traj, res = simulate(RobotState([0, 0]), StaticTarget([10, 0]), obs, APFParams())
print(res.success, round(res.path_len, 3), "steps:", res.iterations_to_best)
print("closest approach:", round(min(r[7] for r in traj.rows), 3))
print(traj.to_csv().splitlines()[:3])

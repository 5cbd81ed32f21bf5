from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TrialResult:
    """Metrics of one planner run. Failed runs carry ``path_len = inf``."""

    algo: str
    map: str
    seed: int
    success: bool
    path_len: float
    iterations_to_best: int
    wall_ms: float
    collisions: int = 0
    trace: object = field(default=None, compare=False, repr=False)
    path: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.success and math.isfinite(self.path_len):
            object.__setattr__(self, "path_len", math.inf)

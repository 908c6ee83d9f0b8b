"""Time-stamped sequences of density matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """States recorded at strictly ascending times.

    ``blowup`` marks runs aborted by the divergence guard; the recorded
    states then form a partial trajectory.
    """

    times: np.ndarray
    states: list[np.ndarray] = field(default_factory=list)
    blowup: bool = False
    wall_time: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.states) != self.times.size:
            raise ValueError(
                f"{len(self.states)} states for {self.times.size} time stamps"
            )
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly ascending")

    def state_at(self, t: float, rtol: float = 1e-9) -> np.ndarray:
        """State recorded at time t (within rtol of the time span)."""
        tol = rtol * max(1.0, float(self.times[-1]) if self.times.size else 1.0)
        idx = int(np.searchsorted(self.times, t))
        for j in (idx - 1, idx):
            if 0 <= j < self.times.size and abs(self.times[j] - t) <= tol:
                return self.states[j]
        raise KeyError(f"no state recorded at t={t!r}")

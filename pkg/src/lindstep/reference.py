"""High-accuracy adaptive reference solver for rho' = L(rho).

Embedded Dormand-Prince 5(4) pair with elementwise mixed error control.
Sample times are hit exactly by truncating steps; no dense-output
interpolation is used, which keeps runs bit-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, MaxStepsExceeded, StepUnderflow
from .lindblad import LindbladModel, apply_lindbladian
from .matcore import hermitianize
from .trajectory import Trajectory

# Dormand-Prince 5(4) tableau. The seventh stage reuses the fifth-order b
# row, so its derivative is the first stage of the next step (FSAL).
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# b5 - b4: weights of the embedded error estimate
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class AdaptiveConfig:
    rtol: float = 1e-12
    atol: float = 1e-12
    dt_init: float = 1e-6
    dt_min: float = 1e-13
    safety: float = 0.9
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.dt_min <= 0:
            raise ValueError("dt_min must be positive")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")


def solve_reference(
    model: LindbladModel,
    rho0: np.ndarray,
    sample_times,
    cfg: AdaptiveConfig | None = None,
) -> Trajectory:
    """Integrate the Lindblad equation, emitting states at sample_times.

    A step is accepted when the elementwise error ratio
    max |delta| / (atol + rtol max(|y0|, |y1|)) is at most 1; the natural
    step is then rescaled by safety * err^(-1/5), clamped to [0.2, 5].
    Steps are shortened (without touching the natural step) to land on
    each sample time exactly. Emitted states are symmetrized and
    trace-checked at 1e-10.
    """
    cfg = cfg or AdaptiveConfig()
    samples = np.asarray(sample_times, dtype=float)
    if samples.size == 0:
        raise ValueError("sample_times is empty")
    if samples[0] < 0 or (samples.size > 1 and not np.all(np.diff(samples) > 0)):
        raise ValueError("sample_times must be nonnegative and strictly ascending")
    if rho0.shape != (model.dim, model.dim):
        raise ValueError(f"state shape {rho0.shape} vs model dim {model.dim}")

    start = time.perf_counter()
    t = 0.0
    y = np.array(rho0, dtype=np.complex128)
    tr0 = float(np.trace(y).real)

    out_states: list[np.ndarray] = []
    idx = 0
    while idx < samples.size and samples[idx] <= 0.0:
        out_states.append(_emit(y, tr0))
        idx += 1

    k = [np.empty(0)] * 7
    k[0] = apply_lindbladian(model, y)
    dt_nat = cfg.dt_init
    n_attempts = 0
    while idx < samples.size:
        target = float(samples[idx])
        if n_attempts >= cfg.max_steps:
            raise MaxStepsExceeded(f"exceeded {cfg.max_steps} step attempts at t={t:.6g}")
        n_attempts += 1

        truncated = t + dt_nat >= target
        h = target - t if truncated else dt_nat

        y1 = y
        for i in range(1, 7):
            y1 = y + h * sum(aij * k[j] for j, aij in enumerate(_A[i]) if aij != 0.0)
            k[i] = apply_lindbladian(model, y1)
        # the seventh stage argument is the fifth-order solution itself
        err_mat = h * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y1))
        err = float(np.max(np.abs(err_mat) / scale))
        if not np.isfinite(err):
            err = np.inf

        factor = MAX_FACTOR if err == 0.0 else cfg.safety * float(err) ** -0.2
        factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
        if err <= 1.0:
            t = target if truncated else t + h
            y = y1
            k[0] = k[6]
            if truncated:
                out_states.append(_emit(y, tr0))
                idx += 1
            else:
                dt_nat = h * factor
        else:
            # k[0] still holds f(y); only the natural step shrinks
            dt_nat = h * factor
            if dt_nat < cfg.dt_min:
                raise StepUnderflow(f"step size {dt_nat:.3e} below dt_min at t={t:.6g}")

    return Trajectory(samples, out_states, False, time.perf_counter() - start)


def _emit(y: np.ndarray, tr0: float) -> np.ndarray:
    out = hermitianize(y)
    drift = abs(np.trace(out).real - tr0)
    if drift > 1e-10 * max(1.0, abs(tr0)):
        raise ConvergenceFailure(f"reference trace drifted by {drift:.3e}")
    return out


def default_tolerance_pair(rtol: float, atol: float) -> AdaptiveConfig:
    """Config with the given tolerances and library-default controls."""
    return AdaptiveConfig(rtol=rtol, atol=atol)

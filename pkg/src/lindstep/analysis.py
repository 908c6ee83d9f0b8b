"""Stability thresholds, error sweeps, convergence-order fits, and the
per-step operation-count model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, InsufficientPoints
from .lindblad import LindbladModel
from .matcore import trace_norm
from .schemes import Scheme, integrate, make_stepper
from .trajectory import Trajectory

MAX_EVAL_SAMPLES = 200
ORDER_WINDOW = (1e-8, 1e-2)


def coefficient_c(l: int, k: int) -> float:
    """Falling factorial c_k = k (k-1) ... (k-l+1); zero when k < l."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    out = 1.0
    for j in range(l):
        out *= k - j
    return out


def cfl_threshold(l: int, n: int) -> float:
    """Largest stable explicit-Euler step 2 / c_n for l-photon loss
    truncated at Fock index n."""
    if n < l:
        raise ValueError(f"truncation index n={n} must be >= l={l}")
    return 2.0 / coefficient_c(l, n)


@dataclass(frozen=True)
class OpCount:
    matrix_mults: int
    matrix_adds: int

    def __post_init__(self):
        if self.matrix_mults < 0 or self.matrix_adds < 0:
            raise ValueError("operation counts must be nonnegative")


def opcount(scheme_tag: Scheme | str, n_dissipators: int) -> OpCount:
    """Matrix multiplications and additions per time step."""
    nd = int(n_dissipators)
    if nd < 1:
        raise ValueError(f"n_dissipators must be >= 1, got {nd}")
    tag = Scheme(scheme_tag)
    if tag is Scheme.EULER1:
        return OpCount(2 * nd + 2, nd + 3)
    if tag is Scheme.EULER2:
        return OpCount(4 * nd + 4, 2 * nd + 6)
    if tag in (Scheme.LUCAO1, Scheme.QC1):
        return OpCount(2 * nd + 2, nd)
    if tag in (Scheme.LUCAO2, Scheme.QC2):
        return OpCount(2 * nd**2 + 2 * nd + 2, 2 * nd**2 + 2 * nd)
    return OpCount(8 * nd + 8, 4 * nd + 14)  # rk4


@dataclass(frozen=True)
class CurvePoint:
    dt: float
    n_steps: int
    sup_error: float
    wall_time: float
    blowup: bool


@dataclass
class ErrorCurve:
    """Per-dt sup-in-time errors for one (scheme, model, dim) triple."""

    scheme_tag: Scheme
    dim: int
    model_id: str
    points: list[CurvePoint] = field(default_factory=list)

    def sorted_points(self) -> list[CurvePoint]:
        return sorted(self.points, key=lambda p: -p.dt)


def snap_steps(T: float, dt: float) -> tuple[int, float]:
    """Round dt to an exact divider of T: n = round(T/dt), dt = T/n."""
    n = max(1, int(round(T / dt)))
    return n, T / n


def record_stride(n_steps: int, max_samples: int = MAX_EVAL_SAMPLES) -> int:
    """Recording stride: every step up to max_samples steps, then thinned."""
    return max(1, math.ceil(n_steps / max_samples))


def eval_times(T: float, dt: float, max_samples: int = MAX_EVAL_SAMPLES) -> np.ndarray:
    """Times at which a run with step dt is compared against the reference.

    These are the recorded step multiples k * (T / n): every step while
    n <= max_samples, otherwise roughly max_samples evenly strided steps
    plus the final one.
    """
    n, dt_s = snap_steps(T, dt)
    stride = record_stride(n, max_samples)
    steps = list(range(0, n + 1, stride))
    if steps[-1] != n:
        steps.append(n)
    return np.array(steps, dtype=float) * dt_s


def plan_sample_grid(T: float, dt_list, max_samples: int = MAX_EVAL_SAMPLES) -> np.ndarray:
    """Union of the evaluation grids of a dt sweep, for the reference run."""
    times = np.concatenate([eval_times(T, dt, max_samples) for dt in dt_list])
    return np.unique(times)


def error_curve(
    model: LindbladModel,
    scheme_tag: Scheme | str,
    rho0: np.ndarray,
    T: float,
    dt_list,
    reference: Trajectory,
    model_id: str = "",
    max_samples: int = MAX_EVAL_SAMPLES,
) -> ErrorCurve:
    """Sup-in-time trace-norm error against the reference, per dt.

    Each dt is snapped to T / n_steps. Runs that trip the divergence
    guard are recorded with an infinite error and the blowup flag; all
    other runs are compared at their recorded times, which must all be
    present in the reference trajectory.
    """
    tag = Scheme(scheme_tag)
    curve = ErrorCurve(tag, model.dim, model_id)
    for dt in dt_list:
        n, dt_s = snap_steps(T, dt)
        stepper = make_stepper(model, tag, dt_s)
        traj = integrate(stepper, rho0, n, record_every=record_stride(n, max_samples))
        if traj.blowup:
            curve.points.append(CurvePoint(dt_s, n, math.inf, traj.wall_time, True))
            continue
        sup = 0.0
        for t, state in zip(traj.times, traj.states):
            try:
                ref_state = reference.state_at(float(t))
            except KeyError as exc:
                raise GridMismatch(
                    f"reference has no sample at t={t!r} (dt={dt_s!r})"
                ) from exc
            sup = max(sup, trace_norm(state - ref_state))
        curve.points.append(CurvePoint(dt_s, n, sup, traj.wall_time, False))
    curve.points = curve.sorted_points()
    return curve


def estimate_order(
    curve: ErrorCurve,
    err_lo: float = ORDER_WINDOW[0],
    err_hi: float = ORDER_WINDOW[1],
) -> float:
    """Least-squares slope of log(sup_error) against log(dt).

    Only points with sup_error inside [err_lo, err_hi] enter the fit,
    which excludes the saturation and pre-asymptotic regions; at least
    four such points are required.
    """
    pts = [
        p
        for p in curve.points
        if not p.blowup and math.isfinite(p.sup_error) and err_lo <= p.sup_error <= err_hi
    ]
    if len(pts) < 4:
        raise InsufficientPoints(
            f"{len(pts)} points with error in [{err_lo:g}, {err_hi:g}], need 4"
        )
    x = np.log([p.dt for p in pts])
    y = np.log([p.sup_error for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def log_spaced_dts(dt_max: float, dt_min: float, count: int) -> np.ndarray:
    """count log-uniform step sizes from dt_max down to dt_min."""
    if not dt_max > dt_min > 0:
        raise ValueError("need dt_max > dt_min > 0")
    if count < 2:
        raise ValueError("need at least 2 sweep points")
    return np.geomspace(dt_max, dt_min, int(count))

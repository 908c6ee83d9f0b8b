"""Fixed-step time discretization schemes for Lindblad equations.

Seven steppers: explicit Euler of order 1 and 2, the non-linear
trace-renormalized schemes of order 1 and 2 ("lucao1"/"lucao2"), their
linear completely-positive trace-preserving counterparts ("qc1"/"qc2"),
and classical Runge-Kutta 4.

The qc schemes right-multiply every completely positive operator M_j by
S^{-1/2}, S = sum_j M_j^dag M_j, which makes the Kraus sum an exact
channel. Numerically the normalized family is obtained as the unitary
polar factor of the stacked block column [M_0; ...; M_k]: this is the
same matrix family as M_j S^{-1/2} in exact arithmetic, but its
completeness defect stays at machine precision even when S is badly
conditioned (condition number of the stack is the square root of S's).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateTrace, DimMismatch, NotPositiveDefinite
from .lindblad import LindbladModel, apply_lindbladian
from .matcore import frobenius, solve_linear
from .trajectory import Trajectory

BLOWUP_FROBENIUS = 1e6
COMPLETENESS_RTOL = 1e-11
KRAUS_NORM_SLACK = 1e-10
QC2_S_FLOOR = 0.1


class Scheme(str, Enum):
    EULER1 = "euler1"
    EULER2 = "euler2"
    LUCAO1 = "lucao1"
    LUCAO2 = "lucao2"
    QC1 = "qc1"
    QC2 = "qc2"
    RK4 = "rk4"


SECOND_ORDER_TAGS = frozenset({Scheme.LUCAO2, Scheme.QC2})


@dataclass
class OpCounter:
    """Per-step matrix-operation counters (products and accumulations)."""

    matrix_mults: int = 0
    matrix_adds: int = 0


def _mm(counter, a, b):
    if counter is not None:
        counter.matrix_mults += 1
    return a @ b


def _add(counter, a, b):
    if counter is not None:
        counter.matrix_adds += 1
    return a + b


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Normalized Kraus family: sum_j M_j^dag M_j = Id to machine precision."""

    kraus_ops: tuple[np.ndarray, ...]
    dt: float
    scheme_tag: Scheme

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """Completely positive but not trace-preserving operator family."""

    kraus_ops: tuple[np.ndarray, ...]
    dt: float
    scheme_tag: Scheme

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


def _cayley(h: np.ndarray, dt: float) -> np.ndarray:
    """Unitary (Id - i dt/2 H)(Id + i dt/2 H)^-1; the factors commute."""
    eye = np.eye(h.shape[0], dtype=np.complex128)
    return solve_linear(eye + 0.5j * dt * h, eye - 0.5j * dt * h)


def _normalize_kraus(ops, floor: float) -> list[np.ndarray]:
    """Right-multiply each op by S^{-1/2} via the polar factor of the stack."""
    d = ops[0].shape[0]
    stack = np.vstack(ops)
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    if s[-1] ** 2 <= floor:
        raise NotPositiveDefinite(
            f"normalizer min eigenvalue {s[-1]**2:.6g} <= floor {floor:.6g}"
        )
    w = u @ vh
    return [np.ascontiguousarray(w[i * d : (i + 1) * d]) for i in range(len(ops))]


def _check_channel(ops, dim: int) -> None:
    s = np.zeros((dim, dim), dtype=np.complex128)
    for m in ops:
        s += m.conj().T @ m
    defect = frobenius(s - np.eye(dim))
    if defect > COMPLETENESS_RTOL * dim:
        raise AssertionError(f"Kraus completeness defect {defect:.3e} > 1e-11 * dim")
    for m in ops:
        top = np.sqrt(np.linalg.eigvalsh(m.conj().T @ m)[-1])
        if top > 1.0 + KRAUS_NORM_SLACK:
            raise AssertionError(f"Kraus operator norm {top} exceeds 1")


def build_qc1(model: LindbladModel, dt: float) -> KrausChannel:
    """First-order quantum-channel scheme.

    M_0 = Cayley(H, dt) (Id - dt/2 Q), M_j = sqrt(dt) L_j, then the family
    is normalized by S^{-1/2}. Since the Cayley factor is unitary,
    S = Id + dt^2/4 Q^2 exactly; this identity is asserted.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    d = model.dim
    eye = np.eye(d, dtype=np.complex128)
    q = model.q_total
    m0 = _cayley(model.hamiltonian, dt) @ (eye - 0.5 * dt * q)
    ops = [m0] + [np.sqrt(dt) * L for L in model.jumps]

    s = np.zeros((d, d), dtype=np.complex128)
    for m in ops:
        s += m.conj().T @ m
    s_closed = eye + 0.25 * dt**2 * (q @ q)
    assert frobenius(s - s_closed) <= 1e-10 * max(1.0, frobenius(s_closed))

    tilde = _normalize_kraus(ops, floor=0.5)
    _check_channel(tilde, d)
    return KrausChannel(tuple(tilde), float(dt), Scheme.QC1)


def _second_order_ops(model: LindbladModel, dt: float) -> list[np.ndarray]:
    """Operator list shared by the order-2 non-linear and channel schemes.

    M_0 = Id + dt G + dt^2/2 G^2 (second-order Taylor of exp(dt G)),
    M_j = sqrt(dt) (Id + dt/2 G) L_j (Id + dt/2 G) for each dissipator
    (midpoint rule on the single-jump Duhamel integral), and one op
    sqrt(dt^2/2) L_i L_j per ordered dissipator pair (i, j). The family
    reproduces exp(dt L) to O(dt^3).
    """
    eye = np.eye(model.dim, dtype=np.complex128)
    g = model.g_eff
    half = eye + 0.5 * dt * g
    ops = [eye + dt * g + 0.5 * dt**2 * (g @ g)]
    ops += [np.sqrt(dt) * (half @ L @ half) for L in model.jumps]
    ops += [
        np.sqrt(0.5) * dt * (Li @ Lj) for Li in model.jumps for Lj in model.jumps
    ]
    return ops


def build_qc2(model: LindbladModel, dt: float) -> KrausChannel:
    """Second-order quantum-channel scheme (normalized order-2 family).

    S is not of the form Id + (positive) here; its smallest eigenvalue
    dips toward ~0.4 at large dt * ||Q||, so the positivity floor is 0.1.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ops = _second_order_ops(model, dt)
    tilde = _normalize_kraus(ops, floor=QC2_S_FLOOR)
    _check_channel(tilde, model.dim)
    return KrausChannel(tuple(tilde), float(dt), Scheme.QC2)


def build_lucao(model: LindbladModel, dt: float, order: int) -> KrausFamily:
    """Completely positive family for the non-linear schemes.

    Order 1: M_0 = Id + dt G, M_j = sqrt(dt) L_j. Order 2: the same list
    as the order-2 channel scheme before normalization.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if order == 1:
        eye = np.eye(model.dim, dtype=np.complex128)
        ops = [eye + dt * model.g_eff] + [np.sqrt(dt) * L for L in model.jumps]
        tag = Scheme.LUCAO1
    elif order == 2:
        ops = _second_order_ops(model, dt)
        tag = Scheme.LUCAO2
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    return KrausFamily(tuple(ops), float(dt), tag)


def _kraus_sum(ops, rho, second_order: bool, counter) -> np.ndarray:
    """sum_j M_j rho M_j^dag, seeded with the j=0 term.

    The order-2 families accumulate the Hermitian part of each term
    (their G^2 and L_i L_j products carry the largest roundoff skew);
    the order-1 families accumulate terms directly.
    """
    m0 = ops[0]
    out = _mm(counter, _mm(counter, m0, rho), m0.conj().T)
    for m in ops[1:]:
        term = _mm(counter, _mm(counter, m, rho), m.conj().T)
        if second_order:
            term = _add(counter, term, term.conj().T)
            out = _add(counter, out, 0.5 * term)
        else:
            out = _add(counter, out, term)
    return out


def apply_kraus(channel: KrausChannel, rho: np.ndarray, counter=None) -> np.ndarray:
    """One CPTP step: sum_j M_j rho M_j^dag with a normalized family."""
    if rho.shape != (channel.dim, channel.dim):
        raise DimMismatch(f"state shape {rho.shape} vs channel dim {channel.dim}")
    return _kraus_sum(
        channel.kraus_ops, rho, channel.scheme_tag in SECOND_ORDER_TAGS, counter
    )


def apply_lucao(family: KrausFamily, rho: np.ndarray, counter=None) -> np.ndarray:
    """One non-linear step: the Kraus sum renormalized to unit trace."""
    if rho.shape != (family.dim, family.dim):
        raise DimMismatch(f"state shape {rho.shape} vs family dim {family.dim}")
    out = _kraus_sum(
        family.kraus_ops, rho, family.scheme_tag in SECOND_ORDER_TAGS, counter
    )
    tr = float(np.trace(out).real)
    if tr <= 1e-14:
        raise DegenerateTrace(f"pre-normalization trace {tr:.3e}; dt is far too large")
    return out / tr


def step_euler(
    model: LindbladModel, dt: float, order: int, rho: np.ndarray, counter=None
) -> np.ndarray:
    """Explicit Euler step, first or second order Taylor of exp(dt L)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u = apply_lindbladian(model, rho, counter)
    if order == 1:
        return _add(counter, rho, dt * u)
    if order == 2:
        v = apply_lindbladian(model, u, counter)
        out = _add(counter, rho, dt * u)
        return _add(counter, out, 0.5 * dt**2 * v)
    raise ValueError(f"order must be 1 or 2, got {order}")


def step_rk4(model: LindbladModel, dt: float, rho: np.ndarray, counter=None) -> np.ndarray:
    """Classical four-stage Runge-Kutta step for rho' = L(rho).

    L is linear, so each stage derivative folds to k_i = k_1 + c L(k_{i-1})
    and the standard combination rho + dt/6 (k1 + 2k2 + 2k3 + k4)
    collapses to rho + dt k1 + dt^2/6 (L(k1) + L(k2) + L(k3)); the stage
    values are identical to the textbook form in exact arithmetic.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = apply_lindbladian(model, rho, counter)
    v2 = apply_lindbladian(model, k1, counter)
    k2 = _add(counter, k1, 0.5 * dt * v2)
    v3 = apply_lindbladian(model, k2, counter)
    k3 = _add(counter, k1, 0.5 * dt * v3)
    v4 = apply_lindbladian(model, k3, counter)
    vsum = _add(counter, v2, v3)
    out = _add(counter, rho, dt * k1)
    out = _add(counter, out, dt**2 / 6.0 * vsum)
    return _add(counter, out, dt**2 / 6.0 * v4)


@dataclass
class Stepper:
    """A scheme bound to a model and a fixed time step.

    The Kraus-based schemes carry their precomputed operator family; the
    Euler and Runge-Kutta schemes evaluate the generator directly.
    """

    scheme_tag: Scheme
    model: LindbladModel
    dt: float
    precomputed: KrausChannel | KrausFamily | None = None

    def step(self, rho: np.ndarray, counter=None) -> np.ndarray:
        tag = self.scheme_tag
        if tag is Scheme.EULER1:
            return step_euler(self.model, self.dt, 1, rho, counter)
        if tag is Scheme.EULER2:
            return step_euler(self.model, self.dt, 2, rho, counter)
        if tag is Scheme.RK4:
            return step_rk4(self.model, self.dt, rho, counter)
        if tag in (Scheme.QC1, Scheme.QC2):
            return apply_kraus(self.precomputed, rho, counter)
        return apply_lucao(self.precomputed, rho, counter)


def make_stepper(model: LindbladModel, scheme: Scheme | str, dt: float) -> Stepper:
    """Build a stepper, precomputing the Kraus family where the scheme has one."""
    tag = Scheme(scheme)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    pre = None
    if tag is Scheme.QC1:
        pre = build_qc1(model, dt)
    elif tag is Scheme.QC2:
        pre = build_qc2(model, dt)
    elif tag is Scheme.LUCAO1:
        pre = build_lucao(model, dt, 1)
    elif tag is Scheme.LUCAO2:
        pre = build_lucao(model, dt, 2)
    return Stepper(tag, model, float(dt), pre)


def integrate(
    stepper: Stepper,
    rho0: np.ndarray,
    n_steps: int,
    record_every: int = 1,
    counter=None,
) -> Trajectory:
    """Apply the stepper n_steps times from rho0.

    Records the state every ``record_every`` steps plus the final state,
    stamped at k * dt. A Frobenius norm above 1e6 (or any non-finite
    entry) aborts the run and flags the partial trajectory as blown up.
    """
    if rho0.shape != (stepper.model.dim, stepper.model.dim):
        raise DimMismatch(
            f"state shape {rho0.shape} does not match model dim {stepper.model.dim}"
        )
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")

    start = time.perf_counter()
    rho = np.array(rho0, dtype=np.complex128)
    rec_steps = [0]
    states = [rho.copy()]
    blowup = False
    for k in range(1, n_steps + 1):
        rho = stepper.step(rho, counter)
        fro = np.linalg.norm(rho)
        if not np.isfinite(fro) or fro > BLOWUP_FROBENIUS:
            blowup = True
            break
        if k % record_every == 0 or k == n_steps:
            rec_steps.append(k)
            states.append(rho.copy())
    times = np.array(rec_steps, dtype=float) * stepper.dt
    return Trajectory(times, states, blowup, time.perf_counter() - start)

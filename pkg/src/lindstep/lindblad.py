"""Lindblad model container, generator application, and a small-dimension
exact-channel oracle through superoperator vectorization.

Vectorization uses column stacking, vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConvergenceFailure, DimMismatch, DimTooLarge, NonHermitianHamiltonian
from .matcore import as_operator, expm, frobenius, hermitianize

HAMILTONIAN_RTOL = 1e-10
ORACLE_DIM_CAP = 16


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus jump operators, all dim x dim.

    Immutable after construction; the effective drift G = -iH - Q/2 and
    Q = sum L_j^dag L_j are cached on first use.
    """

    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def n_dissipators(self) -> int:
        return len(self.jumps)

    @cached_property
    def jumps_dag(self) -> tuple[np.ndarray, ...]:
        return tuple(L.conj().T for L in self.jumps)

    @cached_property
    def q_total(self) -> np.ndarray:
        """Q = sum_j L_j^dag L_j (Hermitian positive semidefinite)."""
        q = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for L, Ld in zip(self.jumps, self.jumps_dag):
            q += Ld @ L
        return hermitianize(q)

    @cached_property
    def g_eff(self) -> np.ndarray:
        """Effective non-Hermitian drift G = -iH - Q/2."""
        return -1j * self.hamiltonian - 0.5 * self.q_total

    @cached_property
    def g_eff_dag(self) -> np.ndarray:
        return self.g_eff.conj().T


def build_model(hamiltonian, jumps=()) -> LindbladModel:
    """Validate operators and assemble a model.

    The Hamiltonian must be Hermitian within 1e-10 relative (it is
    symmetrized after the check); all matrices must share one dimension.
    """
    h = as_operator(hamiltonian)
    res = frobenius(h - h.conj().T)
    if res > HAMILTONIAN_RTOL * max(1.0, frobenius(h)):
        raise NonHermitianHamiltonian(f"Hamiltonian Hermiticity residual {res:.3e}")
    h = hermitianize(h)
    ops = tuple(as_operator(L) for L in jumps)
    for k, L in enumerate(ops):
        if L.shape != h.shape:
            raise DimMismatch(f"jump operator {k} has shape {L.shape}, expected {h.shape}")
    return LindbladModel(h, ops)


def _count_mm(counter, a, b):
    if counter is not None:
        counter.matrix_mults += 1
    return a @ b


def apply_lindbladian(model: LindbladModel, rho: np.ndarray, counter=None) -> np.ndarray:
    """L(rho) = G rho + rho G^dag + sum_j L_j rho L_j^dag.

    Accumulates term by term into a zero buffer; when a counter is passed,
    each product and each accumulation is counted.
    """
    if rho.shape != (model.dim, model.dim):
        raise DimMismatch(f"state shape {rho.shape} does not match model dim {model.dim}")
    out = np.zeros_like(rho)
    for term in (
        _count_mm(counter, model.g_eff, rho),
        _count_mm(counter, rho, model.g_eff_dag),
    ):
        out += term
        if counter is not None:
            counter.matrix_adds += 1
    for L, Ld in zip(model.jumps, model.jumps_dag):
        out += _count_mm(counter, _count_mm(counter, L, rho), Ld)
        if counter is not None:
            counter.matrix_adds += 1
    return out


def effective_G(model: LindbladModel) -> np.ndarray:
    """The drift G = -iH - 1/2 sum_j L_j^dag L_j."""
    return model.g_eff.copy()


def vectorize_superop(model: LindbladModel) -> np.ndarray:
    """dim^2 x dim^2 matrix K with K vec(rho) = vec(L(rho)).

    Guarded to dim <= 16; the dense superoperator is an oracle, not a
    production path.
    """
    d = model.dim
    if d > ORACLE_DIM_CAP:
        raise DimTooLarge(f"superoperator oracle capped at dim {ORACLE_DIM_CAP}, got {d}")
    eye = np.eye(d, dtype=np.complex128)
    g = model.g_eff
    k = np.kron(eye, g) + np.kron(g.conj(), eye)
    for L in model.jumps:
        k += np.kron(L.conj(), L)
    return k


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return rho.flatten(order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def exact_channel(model: LindbladModel, t: float, rho: np.ndarray) -> np.ndarray:
    """Exact propagated state exp(t L)(rho) via the vectorized superoperator.

    Output is symmetrized (the exponential breaks Hermiticity at roundoff
    level) and its trace is checked against the input's.
    """
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    if rho.shape != (model.dim, model.dim):
        raise DimMismatch(f"state shape {rho.shape} does not match model dim {model.dim}")
    k = vectorize_superop(model)
    out = hermitianize(unvec(expm(t * k) @ vec(rho)))
    drift = abs(np.trace(out) - np.trace(rho))
    if drift > 1e-11 * max(1.0, abs(np.trace(rho))):
        raise ConvergenceFailure(f"exact channel trace drifted by {drift:.3e}")
    return out


def density_from_vector(v: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |v><v| from a unit vector."""
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def fock_projector_population(rho: np.ndarray, indices) -> float:
    """Total population sum_k <k|rho|k> over the given Fock indices."""
    return float(np.real(np.sum(np.diag(rho)[list(indices)])))


def validate_density(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10, eig_floor=-1e-10) -> None:
    """Raise ValueError when rho is not a density matrix within tolerances."""
    rho = np.asarray(rho)
    scale = max(1.0, frobenius(rho))
    herm = frobenius(rho - rho.conj().T)
    if herm > herm_tol * scale:
        raise ValueError(f"Hermiticity residual {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr} is not 1 within {trace_tol}")
    w = np.linalg.eigvalsh(hermitianize(rho))
    if w[0] < eig_floor:
        raise ValueError(f"min eigenvalue {w[0]:.3e} below {eig_floor}")

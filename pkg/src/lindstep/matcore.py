"""Dense complex linear-algebra kernel.

Everything operates on square ``numpy.complex128`` arrays. Routines that
require Hermitian input check a relative Hermiticity residual and then work
on the symmetrized matrix, so roundoff-level skew never trips them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NonHermitian, NotPositiveDefinite, Overflow, Singular

HERMITICITY_RTOL = 1e-8


class EigDecomposition(NamedTuple):
    """Eigenvalues (real, ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_operator(a) -> np.ndarray:
    """Validate and return a square, finite complex128 matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^dag) / 2."""
    return 0.5 * (a + a.conj().T)


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def herm_eig(a: np.ndarray) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Raises NonHermitian if ||A - A^dag||_F > 1e-8 ||A||_F; otherwise the
    matrix is symmetrized before factoring, so the eigenvalues are real.
    """
    a = np.asarray(a, dtype=np.complex128)
    res = frobenius(a - a.conj().T)
    if res > HERMITICITY_RTOL * frobenius(a):
        raise NonHermitian(
            f"Hermiticity residual {res:.3e} exceeds {HERMITICITY_RTOL:.0e} * ||A||_F"
        )
    try:
        w, v = np.linalg.eigh(hermitianize(a))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigh did not converge: {exc}") from exc
    return EigDecomposition(w, v)


def inv_sqrt_pd(a: np.ndarray, floor: float = 0.5) -> np.ndarray:
    """Inverse square root of a positive-definite Hermitian matrix.

    Computed as V diag(w^-1/2) V^dag. Raises NotPositiveDefinite when the
    smallest eigenvalue is at or below ``floor``; the default floor of 0.5
    is meant for normalizer matrices of the form Id + (positive), where
    anything below 1 signals a construction bug rather than a borderline
    input.
    """
    w, v = herm_eig(a)
    if w[0] <= floor:
        raise NotPositiveDefinite(f"min eigenvalue {w[0]:.6g} <= floor {floor:.6g}")
    return hermitianize((v * w**-0.5) @ v.conj().T)


def trace_norm(a: np.ndarray) -> float:
    """Trace norm ||A||_1 = sum of singular values.

    Hermitian input (within the usual residual) takes the cheap path
    sum |eig(A)|; general matrices go through eig(A^dag A).
    """
    a = np.asarray(a, dtype=np.complex128)
    if frobenius(a - a.conj().T) <= HERMITICITY_RTOL * frobenius(a):
        w, _ = herm_eig(a)
        return float(np.sum(np.abs(w)))
    w, _ = herm_eig(a.conj().T @ a)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring with Pade approximant)."""
    out = scipy.linalg.expm(np.asarray(a, dtype=np.complex128))
    if not np.all(np.isfinite(out)):
        raise Overflow("matrix exponential overflowed the floating-point range")
    return out


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A X = B by LU factorization with partial pivoting.

    Raises Singular when a pivot falls below 1e-14 ||A||_F.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    try:
        lu, piv = scipy.linalg.lu_factor(a)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise Singular(f"LU factorization failed: {exc}") from exc
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) <= 1e-14 * frobenius(a):
        raise Singular(f"pivot {np.min(pivots):.3e} below threshold, matrix is singular")
    return scipy.linalg.lu_solve((lu, piv), b)

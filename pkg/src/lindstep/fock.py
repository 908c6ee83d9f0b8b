"""Builders for truncated bosonic operators and states on span{|0>,...,|N-1>}.

N is the number of retained Fock states. Because the annihilation operator
only lowers the Fock index, truncated powers built at size N coincide with
the projected powers of the full operator, so no explicit projector is
needed.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import LeakageTooLarge

MIN_RETAINED_MASS = 0.99


class TruncatedState(NamedTuple):
    """Unit-norm amplitudes plus the mass lost to truncation."""

    amplitudes: np.ndarray
    leakage: float


def _check_dim(n_fock: int) -> int:
    n = int(n_fock)
    if n < 2:
        raise ValueError(f"need at least 2 Fock states, got {n}")
    return n


def annihilation(n_fock: int) -> np.ndarray:
    """Annihilation operator a with a[k, k+1] = sqrt(k+1)."""
    n = _check_dim(n_fock)
    a = np.zeros((n, n), dtype=np.complex128)
    ks = np.arange(n - 1)
    a[ks, ks + 1] = np.sqrt(ks + 1.0)
    return a


def number_op(n_fock: int) -> np.ndarray:
    """Number operator a^dag a = diag(0, 1, ..., N-1)."""
    n = _check_dim(n_fock)
    return np.diag(np.arange(n, dtype=np.complex128))


def coherent_state(n_fock: int, alpha: complex) -> TruncatedState:
    """Truncated coherent state |alpha>, renormalized to unit norm.

    Amplitudes follow the recurrence v[n+1] = v[n] * alpha / sqrt(n+1)
    starting from v[0] = exp(-|alpha|^2 / 2), which avoids factorial
    overflow. Raises LeakageTooLarge when the truncation retains less
    than 99% of the mass.
    """
    n = _check_dim(n_fock)
    alpha = complex(alpha)
    v = np.zeros(n, dtype=np.complex128)
    v[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(n - 1):
        v[k + 1] = v[k] * alpha / np.sqrt(k + 1.0)
    retained = float(np.sum(np.abs(v) ** 2))
    if retained < MIN_RETAINED_MASS:
        raise LeakageTooLarge(
            f"coherent state |alpha|={abs(alpha):.3g} keeps {retained:.3g} of its mass "
            f"in {n} Fock states; increase the truncation"
        )
    return TruncatedState(v / np.sqrt(retained), 1.0 - retained)


def cat_state_plus(n_fock: int, alpha: complex) -> TruncatedState:
    """Even cat state, the normalized sum of |alpha> and |-alpha>.

    Built from the pre-normalization amplitudes of both branches; leakage
    is measured against the exact norm 2 (1 + exp(-2|alpha|^2)) of the
    untruncated sum.
    """
    n = _check_dim(n_fock)
    alpha = complex(alpha)
    plus = coherent_state(n, alpha)
    minus = coherent_state(n, -alpha)
    # undo the branch renormalizations to recover raw series amplitudes
    raw = plus.amplitudes * np.sqrt(1.0 - plus.leakage) + minus.amplitudes * np.sqrt(
        1.0 - minus.leakage
    )
    exact_sq = 2.0 * (1.0 + np.exp(-2.0 * abs(alpha) ** 2))
    retained = float(np.sum(np.abs(raw) ** 2)) / exact_sq
    return TruncatedState(raw / np.linalg.norm(raw), 1.0 - retained)


def truncated_power_loss(n_fock: int, l: int, alpha_sq: complex = 0.0) -> np.ndarray:
    """Jump operator a^l - alpha_sq * Id on the truncated space.

    alpha_sq = 0 gives the plain l-photon loss operator.
    """
    n = _check_dim(n_fock)
    l = int(l)
    if l < 1 or l >= n:
        raise ValueError(f"power l={l} must satisfy 1 <= l < {n}")
    op = np.linalg.matrix_power(annihilation(n), l)
    if alpha_sq != 0.0:
        op = op - complex(alpha_sq) * np.eye(n, dtype=np.complex128)
    return op

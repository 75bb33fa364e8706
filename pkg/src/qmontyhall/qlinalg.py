"""Small dense complex linear algebra for kets and operators of dimension <= 9.

Kets are 1-D ``complex128`` arrays and operators are 2-D square arrays.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
CHECK_TOL = 1e-10
_RESIDUAL_SKIP = 1e-6


class DimensionError(ValueError):
    """Raised when operands have incompatible dimensions."""


class NotOrthonormalError(ValueError):
    """Raised by :func:`complete_isometry` for columns that are not orthonormal."""

    def __init__(self, deviation: float):
        super().__init__(f"input columns are not orthonormal (max Gram deviation {deviation:.3e})")
        self.deviation = deviation


def as_ket(amps: Sequence[complex] | np.ndarray) -> np.ndarray:
    return np.asarray(amps, dtype=np.complex128).reshape(-1)


def as_operator(entries: Sequence[Sequence[complex]] | np.ndarray) -> np.ndarray:
    op = np.asarray(entries, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"operator must be square, got shape {op.shape}")
    return op


def basis_ket(index: int, dim: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def normalize(v: np.ndarray) -> np.ndarray:
    """Return ``v / ||v||``; raises on a (numerically) zero vector."""
    v = as_ket(v)
    norm = np.linalg.norm(v)
    if norm < 1e-15:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def is_normalized(v: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(float(np.vdot(v, v).real) - 1.0) <= tol


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugating the first argument."""
    a, b = as_ket(a), as_ket(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return complex(np.vdot(a, b))


def apply(op: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product; the result is not renormalized."""
    op, v = as_operator(op), as_ket(v)
    if op.shape[1] != v.shape[0]:
        raise DimensionError(f"operator dim {op.shape[0]} does not match ket dim {v.shape[0]}")
    return op @ v


def outer(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """|a><b| (``b`` defaults to ``a``)."""
    a = as_ket(a)
    b = a if b is None else as_ket(b)
    return np.outer(a, b.conj())


def dagger(op: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(op))


def is_hermitian(op: np.ndarray, tol: float = CHECK_TOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return bool(np.max(np.abs(op - dagger(op)), initial=0.0) <= tol)


def is_positive_semidefinite(op: np.ndarray, tol: float = CHECK_TOL) -> bool:
    """Hermitian within ``tol`` and every eigenvalue >= ``-tol``."""
    if not is_hermitian(op, tol):
        return False
    op = np.asarray(op, dtype=np.complex128)
    herm = 0.5 * (op + dagger(op))
    return bool(np.min(np.linalg.eigvalsh(herm)) >= -tol)


def is_unitary(op: np.ndarray, tol: float = CHECK_TOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    dev = dagger(op) @ op - np.eye(op.shape[0])
    return bool(np.max(np.abs(dev)) <= tol)


def gram_deviation(columns: np.ndarray) -> float:
    """Max entry of |C^dagger C - I| for a matrix whose columns are ``C``."""
    k = columns.shape[1]
    if k == 0:
        return 0.0
    return float(np.max(np.abs(dagger(columns) @ columns - np.eye(k))))


def complete_isometry(columns: Sequence[np.ndarray], target_dim: int, tol: float = CHECK_TOL) -> np.ndarray:
    """Extend orthonormal ``columns`` to a ``target_dim`` x ``target_dim`` unitary.

    The first ``len(columns)`` columns of the result are the inputs. The
    remaining ones come from canonical basis vectors e_0, e_1, ... in order,
    each orthogonalized twice (classical Gram-Schmidt) against everything
    accepted so far; candidates whose residual norm drops below 1e-6 are
    skipped. The output is therefore a deterministic function of the input.
    """
    cols = [as_ket(c) for c in columns]
    if any(c.shape[0] != target_dim for c in cols):
        raise DimensionError(f"all columns must have dimension {target_dim}")
    if len(cols) > target_dim:
        raise DimensionError(f"{len(cols)} columns cannot fit in dimension {target_dim}")
    given = np.stack(cols, axis=1) if cols else np.zeros((target_dim, 0), dtype=np.complex128)
    deviation = gram_deviation(given)
    if deviation > tol:
        raise NotOrthonormalError(deviation)

    basis = list(cols)
    for j in range(target_dim):
        if len(basis) == target_dim:
            break
        cand = basis_ket(j, target_dim)
        for _ in range(2):
            for q in basis:
                cand = cand - np.vdot(q, cand) * q
        norm = np.linalg.norm(cand)
        if norm < _RESIDUAL_SKIP:
            continue
        basis.append(cand / norm)
    return np.stack(basis, axis=1)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = CHECK_TOL) -> bool:
    """True when ``a == exp(i*phi) * b`` for some global phase, within ``tol``."""
    return bool(np.max(np.abs(fix_global_phase(a) - fix_global_phase(b)), initial=0.0) <= tol)


def fix_global_phase(x: np.ndarray) -> np.ndarray:
    """Rotate ``x`` so its largest-magnitude entry is real and positive.

    Ties between near-equal magnitudes are broken by the first index, after
    rounding the magnitudes so that rounding noise cannot flip the choice.
    """
    x = np.asarray(x, dtype=np.complex128)
    flat = x.reshape(-1)
    mags = np.round(np.abs(flat), 9)
    k = int(np.argmax(mags))
    if abs(flat[k]) < 1e-15:
        return x.copy()
    return x * (abs(flat[k]) / flat[k])

"""Dense linear algebra over F_p on int64 matrices."""

from __future__ import annotations

import numpy as np

from . import _kernels


def rref(M: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form and pivot columns."""
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return M.copy() % p, np.zeros(0, dtype=np.int64)
    R, piv = _kernels.rref(M, p)
    return R, np.asarray(piv, dtype=np.int64)


def rank(M: np.ndarray, p: int) -> int:
    return int(rref(M, p)[1].shape[0])


def nullspace(M: np.ndarray, p: int) -> np.ndarray:
    """Basis of {v : M v = 0} as the rows of the returned array."""
    M = np.asarray(M, dtype=np.int64)
    rows, cols = M.shape
    R, piv = rref(M, p)
    pivset = set(int(c) for c in piv)
    free = [c for c in range(cols) if c not in pivset]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for t, c in enumerate(free):
        basis[t, c] = 1
        for r, pc in enumerate(piv):
            basis[t, pc] = (-R[r, c]) % p
    return basis


def in_span(basis_rref: np.ndarray, pivots: np.ndarray, v: np.ndarray, p: int) -> bool:
    """Is v in the row space of a matrix already in reduced row echelon form?"""
    v = np.asarray(v, dtype=np.int64) % p
    for r, c in enumerate(pivots):
        if v[c]:
            v = (v - v[c] * basis_rref[r]) % p
    return not v.any()


def solve(M: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution of M x = b over F_p, or None."""
    M = np.asarray(M, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    aug = np.concatenate([M, b], axis=1)
    R, piv = rref(aug, p)
    cols = M.shape[1]
    if piv.shape[0] and piv[-1] == cols:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(piv):
        x[c] = R[r, cols]
    return x

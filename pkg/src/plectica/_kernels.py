"""Hot loops: truncated-series products, sparse box products, F_p elimination.

Each kernel has a numba implementation and a pure-numpy one.  Numba is used
unless it is missing or the environment variable ``PLECTICA_NO_NUMBA`` is set
to a true value; both paths return identical integers.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("PLECTICA_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = _HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# dense truncated series product


def dense_mul_numpy(a, b, pi, pj, pk, kstarts, kvals, C, P, nout):
    """out[k] = sum over pairs (i, j) -> k of a[i] * b[j] with structure constants C, mod P."""
    n = a.shape[1]
    out = np.zeros((nout, n), dtype=np.int64)
    if pi.shape[0] == 0:
        return out
    A = a[pi]
    B = b[pj]
    contrib = np.zeros((pi.shape[0], n), dtype=np.int64)
    for u in range(n):
        for v in range(n):
            prod = (A[:, u] * B[:, v]) % P
            if not prod.any():
                continue
            for w in range(n):
                c = C[u, v, w]
                if c:
                    contrib[:, w] = (contrib[:, w] + prod * c) % P
    out[kvals] = np.add.reduceat(contrib, kstarts, axis=0) % P
    return out


def _dense_mul_loop(a, b, pi, pj, pk, kstarts, kvals, C, P, nout):
    n = a.shape[1]
    out = np.zeros((nout, n), dtype=np.int64)
    for t in range(pi.shape[0]):
        i = pi[t]
        j = pj[t]
        k = pk[t]
        for u in range(n):
            au = a[i, u]
            if au == 0:
                continue
            for v in range(n):
                bv = b[j, v]
                if bv == 0:
                    continue
                x = (au * bv) % P
                for w in range(n):
                    c = C[u, v, w]
                    if c != 0:
                        out[k, w] = (out[k, w] + x * c) % P
    return out


# ---------------------------------------------------------------------------
# sparse product accumulated in a dense exponent box


def box_mul_numpy(e1, c1, e2, c2, lo, strides, size, wtop, C, P):
    """Accumulate all products of terms whose total degree is below ``wtop``.

    Returns a dense (size, n) array indexed by the box offset of the exponent.
    """
    n = c1.shape[1]
    out = np.zeros((size, n), dtype=np.int64)
    if e1.shape[0] == 0 or e2.shape[0] == 0:
        return out
    if e1.shape[0] > e2.shape[0]:
        e1, c1, e2, c2 = e2, c2, e1, c1
    deg2 = e2.sum(axis=1)
    base2 = (e2 - lo) @ strides
    for s in range(e1.shape[0]):
        keep = deg2 + e1[s].sum() < wtop
        if not keep.any():
            continue
        idx = base2[keep] + e1[s] @ strides
        cb = c2[keep]
        acc = np.zeros((idx.shape[0], n), dtype=np.int64)
        for u in range(n):
            au = c1[s, u]
            if au == 0:
                continue
            for v in range(n):
                prod = (au * cb[:, v]) % P
                for w in range(n):
                    c = C[u, v, w]
                    if c:
                        acc[:, w] = (acc[:, w] + prod * c) % P
        np.add.at(out, idx, acc)
        out[idx] %= P
    return out % P


def _box_mul_loop(e1, c1, e2, c2, lo, strides, size, wtop, C, P):
    n = c1.shape[1]
    k = e1.shape[1]
    out = np.zeros((size, n), dtype=np.int64)
    for s in range(e1.shape[0]):
        for t in range(e2.shape[0]):
            deg = 0
            idx = 0
            for a in range(k):
                x = e1[s, a] + e2[t, a]
                deg += x
                idx += (x - lo[a]) * strides[a]
            if deg >= wtop:
                continue
            for u in range(n):
                au = c1[s, u]
                if au == 0:
                    continue
                for v in range(n):
                    bv = c2[t, v]
                    if bv == 0:
                        continue
                    y = (au * bv) % P
                    for w in range(n):
                        c = C[u, v, w]
                        if c != 0:
                            out[idx, w] = (out[idx, w] + y * c) % P
    return out


# ---------------------------------------------------------------------------
# reduced row echelon form over F_p


def rref_numpy(M, p):
    """Reduced row echelon form of an integer matrix over F_p; returns (R, pivot columns)."""
    M = np.array(M, dtype=np.int64) % p
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.shape[0] == 0:
            continue
        i = r + nz[0]
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), p - 2, p)) % p
        col = M[:, c].copy()
        col[r] = 0
        rows_nz = np.nonzero(col)[0]
        if rows_nz.shape[0]:
            M[rows_nz] = (M[rows_nz] - np.outer(col[rows_nz], M[r])) % p
        pivots.append(c)
        r += 1
    return M, np.array(pivots, dtype=np.int64)


def _rref_loop(M, p):
    rows, cols = M.shape
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    npiv = 0
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        i = -1
        for t in range(r, rows):
            if M[t, c] != 0:
                i = t
                break
        if i < 0:
            continue
        if i != r:
            for t in range(cols):
                tmp = M[r, t]
                M[r, t] = M[i, t]
                M[i, t] = tmp
        x = M[r, c]
        inv = 1
        e = p - 2
        base = x % p
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for t in range(cols):
            M[r, t] = (M[r, t] * inv) % p
        for t in range(rows):
            if t != r:
                fct = M[t, c]
                if fct != 0:
                    for s in range(c, cols):
                        M[t, s] = (M[t, s] - fct * M[r, s]) % p
        pivots[npiv] = c
        npiv += 1
        r += 1
    return M, pivots[:npiv]


def rref_numba(M, p):
    M = np.array(M, dtype=np.int64) % p
    return _rref_jit(M, p)


if USE_NUMBA:
    _dense_jit = numba.njit(cache=True)(_dense_mul_loop)
    _box_jit = numba.njit(cache=True)(_box_mul_loop)
    _rref_jit = numba.njit(cache=True)(_rref_loop)

    def dense_mul_numba(a, b, pi, pj, pk, kstarts, kvals, C, P, nout):
        return _dense_jit(a, b, pi, pj, pk, kstarts, kvals, C, np.int64(P), np.int64(nout))

    def box_mul_numba(e1, c1, e2, c2, lo, strides, size, wtop, C, P):
        return _box_jit(e1, c1, e2, c2, lo, strides, np.int64(size), np.int64(wtop), C, np.int64(P))

    dense_mul = dense_mul_numba
    box_mul = box_mul_numba
    rref = rref_numba
else:  # pragma: no cover - depends on environment
    _rref_jit = _rref_loop
    dense_mul_numba = None
    box_mul_numba = None
    dense_mul = dense_mul_numpy
    box_mul = box_mul_numpy
    rref = rref_numpy

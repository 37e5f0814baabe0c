"""Finite fields GF(p^k) with integer encoding and table lookups.

An element of GF(p^k) = F_p[x]/(g) is encoded as the integer sum(c_i * p**i)
where c_0..c_{k-1} are its coordinates in the basis 1, x, ..., x^{k-1}.  The
defining polynomial g is the one returned by :func:`conway_like_poly`, which is
also the polynomial used for the unramified layer of :mod:`plectica.padic`, so
residues of p-adic elements and field elements share one encoding.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ORDER = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_divmod_p(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    """Quotient and remainder of little-endian polynomials over F_p."""
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        coef = a[-1] * inv_lead % p
        quot[shift] = coef
        for i, c in enumerate(b):
            a[i + shift] = (a[i + shift] - coef * c) % p
        _trim(a)
    return _trim(quot), a


def _monic_polys(p: int, degree: int):
    for k in range(p**degree):
        coeffs = []
        for _ in range(degree):
            coeffs.append(k % p)
            k //= p
        yield coeffs + [1]


def is_irreducible_p(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree at most deg/2."""
    deg = len(_trim(list(poly))) - 1
    if deg <= 0:
        return False
    for d in range(1, deg // 2 + 1):
        for cand in _monic_polys(p, d):
            if not poly_divmod_p(poly, cand, p)[1]:
                return False
    return True


@lru_cache(maxsize=None)
def conway_like_poly(p: int, k: int) -> tuple[int, ...]:
    """The fixed defining polynomial of degree k over F_p.

    Monic polynomials T^k + sum c_i T^i are enumerated by the integer
    sum c_i p^i in increasing order and the first irreducible one is
    returned as the tuple (c_0, ..., c_{k-1}) (leading 1 omitted).
    """
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if k < 1:
        raise ValueError("degree must be at least 1")
    for cand in _monic_polys(p, k):
        if k == 1 or is_irreducible_p(cand, p):
            return tuple(cand[:-1])
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


class FiniteField:
    """GF(p^k) with log/antilog multiplication tables.

    Scalar methods take and return Python ints; the ``v``-prefixed methods
    operate elementwise on integer numpy arrays.
    """

    def __init__(self, p: int, k: int = 1):
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        self.p = p
        self.k = k
        self.order = p**k
        if self.order > MAX_ORDER:
            raise ValueError(f"field of order {self.order} exceeds the table limit {MAX_ORDER}")
        self.modulus = conway_like_poly(p, k)
        q = self.order
        digits = np.zeros((q, k), dtype=np.int64)
        vals = np.arange(q, dtype=np.int64)
        for i in range(k):
            digits[:, i] = vals % p
            vals //= p
        self.digits = digits
        self._weights = p ** np.arange(k, dtype=np.int64)
        self.neg_table = self._from_digits((-digits) % p)
        self._build_mul_tables()

    def _from_digits(self, digits: np.ndarray) -> np.ndarray:
        return (digits % self.p) @ self._weights

    def _mul_by_x(self, a: int) -> int:
        d = [int(c) for c in self.digits[a]]
        top = d[-1]
        d = [0] + d[:-1]
        for i, c in enumerate(self.modulus):
            d[i] = (d[i] - top * c) % self.p
        return int(sum(c * self.p**i for i, c in enumerate(d)))

    def _slow_mul(self, a: int, b: int) -> int:
        acc = 0
        cur = a
        for c in self.digits[b]:
            for _ in range(int(c)):
                acc = self.add(acc, cur)
            cur = self._mul_by_x(cur)
        return acc

    def add(self, a: int, b: int) -> int:
        return int(self._from_digits(self.digits[a] + self.digits[b]))

    def _build_mul_tables(self) -> None:
        q = self.order
        self.exp_table = np.zeros(2 * q, dtype=np.int64)
        self.log_table = np.full(q, -1, dtype=np.int64)
        if q == 2:
            self.generator = 1
            self.exp_table[:] = 1
            self.log_table[1] = 0
            return
        for g in range(2, q):
            seen = set()
            cur = 1
            powers = []
            for _ in range(q - 1):
                powers.append(cur)
                seen.add(cur)
                cur = self._slow_mul(cur, g)
            if len(seen) == q - 1:
                self.generator = g
                break
        else:  # pragma: no cover - every finite field has a generator
            raise AssertionError("no primitive element found")
        for i, v in enumerate(powers):
            self.exp_table[i] = v
            self.log_table[v] = i
        self.exp_table[q - 1 : 2 * (q - 1)] = self.exp_table[: q - 1]

    # scalar API -------------------------------------------------------
    def sub(self, a: int, b: int) -> int:
        return self.add(a, int(self.neg_table[b]))

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return int(self.exp_table[(self.order - 1 - self.log_table[a]) % (self.order - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return int(self.exp_table[(self.log_table[a] * e) % (self.order - 1)])

    def frob(self, a: int, times: int = 1) -> int:
        """The p-power Frobenius iterated ``times`` times (negative allowed)."""
        return self.pow(a, pow(self.p, times % self.k))

    def from_int(self, n: int) -> int:
        return n % self.p

    def elements(self) -> range:
        return range(self.order)

    def subfield(self, s: int) -> list[int]:
        """Elements of the subfield of order p^s (requires s | k)."""
        if self.k % s:
            raise ValueError(f"GF({self.p}^{s}) is not a subfield of GF({self.p}^{self.k})")
        return [a for a in range(self.order) if self.pow(a, self.p**s) == a]

    # vectorised API ---------------------------------------------------
    def vadd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._from_digits(self.digits[a] + self.digits[b])

    def vsub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._from_digits(self.digits[a] - self.digits[b])

    def vneg(self, a: np.ndarray) -> np.ndarray:
        return self.neg_table[a]

    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vpow(self, a: np.ndarray, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        out = self.exp_table[(self.log_table[a] * e) % (self.order - 1)]
        return np.where(a == 0, 0, out)

    def __repr__(self) -> str:
        return f"FiniteField({self.p}, {self.k})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteField) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self) -> int:
        return hash((self.p, self.k))


@lru_cache(maxsize=None)
def gf(p: int, k: int = 1) -> FiniteField:
    """Cached field constructor."""
    return FiniteField(p, k)


def gf_of_order(q: int) -> FiniteField:
    for p in range(2, q + 1):
        if q % p == 0:
            k = 0
            n = q
            while n % p == 0:
                n //= p
                k += 1
            if n != 1 or not is_prime(p):
                raise ValueError(f"{q} is not a prime power")
            return gf(p, k)
    raise ValueError(f"{q} is not a prime power")

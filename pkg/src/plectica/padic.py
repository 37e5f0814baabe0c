"""Arithmetic in O_K at finite pi-adic precision.

O_K is modelled as Z_p[zeta][pi]: an unramified layer Z_p[zeta] of degree
``f_res`` (zeta a root of the lift of :func:`plectica.gf.conway_like_poly`)
followed by an optional Eisenstein layer of degree ``e``.  Elements are
coordinate vectors in the power basis zeta^i pi^j, stored at index
``j * f_res + i``.  Without an Eisenstein layer the uniformiser is p itself.

An element known modulo pi^m has canonical coordinates: the coordinate
attached to pi^j is reduced modulo p^ceil((m - j) / e).  This is exactly
reduction modulo the ideal pi^m O_K, so equal classes have equal coordinates.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import NotAUnit, PrecisionOverflow, SpecMismatch
from .gf import FiniteField, conway_like_poly, gf, is_prime

INT_LIMIT = 1 << 31


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _vp(n: int, p: int) -> int:
    if n == 0:
        return math.inf  # type: ignore[return-value]
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PadicRingSpec:
    """A finite extension K of Q_p: unramified degree ``f_res``, then Eisenstein.

    ``eis`` lists the non-leading coefficients a_0, ..., a_{e-1} of a monic
    Eisenstein polynomial over the unramified layer; each coefficient is a
    tuple of ``f_res`` integers (its zeta-coordinates).  Plain integers are
    accepted and embedded.  ``prec`` is the default working precision.
    """

    p: int
    f_res: int = 1
    eis: tuple[tuple[int, ...], ...] | None = None
    prec: int = 8

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.f_res < 1:
            raise ValueError("f_res must be at least 1")
        if self.prec < 1:
            raise ValueError("precision must be at least 1")
        if self.eis is not None:
            coeffs = []
            for c in self.eis:
                if isinstance(c, (int, np.integer)):
                    coeffs.append((int(c),) + (0,) * (self.f_res - 1))
                else:
                    c = tuple(int(x) for x in c)
                    if len(c) != self.f_res:
                        raise ValueError("each Eisenstein coefficient needs f_res coordinates")
                    coeffs.append(c)
            if not coeffs:
                raise ValueError("an Eisenstein polynomial has degree at least 1")
            object.__setattr__(self, "eis", tuple(coeffs))
            self._check_eisenstein()

    def _check_eisenstein(self) -> None:
        p = self.p
        for t, c in enumerate(self.eis):
            if any(x % p for x in c):
                raise ValueError(f"Eisenstein coefficient a_{t} is not divisible by p")
        a0 = self.eis[0]
        if all((x // p) % p == 0 for x in a0):
            raise ValueError("Eisenstein constant term is divisible by p^2")

    # basic invariants ---------------------------------------------------
    @property
    def e(self) -> int:
        return 1 if self.eis is None else len(self.eis)

    @property
    def n(self) -> int:
        """Degree [K:Q_p], the number of coordinates."""
        return self.f_res * self.e

    @property
    def q(self) -> int:
        return self.p**self.f_res

    @property
    def unram_poly(self) -> tuple[int, ...]:
        return conway_like_poly(self.p, self.f_res)

    @property
    def residue_field(self) -> FiniteField:
        return gf(self.p, self.f_res)

    def with_prec(self, prec: int) -> "PadicRingSpec":
        return PadicRingSpec(self.p, self.f_res, self.eis, prec)

    def key(self) -> tuple:
        """Identity of the ring, ignoring the default precision."""
        return (self.p, self.f_res, self.eis)

    def same_ring(self, other: "PadicRingSpec") -> bool:
        return self.key() == other.key()

    # structure constants ------------------------------------------------
    @cached_property
    def _eis_full(self) -> tuple[tuple[int, ...], ...]:
        if self.eis is None:
            return ((-self.p,) + (0,) * (self.f_res - 1),)
        return self.eis

    def _reduce_dict(self, poly: dict[tuple[int, int], int]) -> list[int]:
        """Reduce a polynomial in (zeta, pi) with integer coefficients to coordinates."""
        f, e = self.f_res, self.e
        eis = self._eis_full
        poly = {k: v for k, v in poly.items() if v}
        while True:
            top = max((j for (_, j) in poly), default=-1)
            if top < e:
                break
            for (i, j), c in [(k, v) for k, v in poly.items() if k[1] == top]:
                del poly[(i, j)]
                for t in range(e):
                    for s, a in enumerate(eis[t]):
                        if a:
                            key = (i + s, j - e + t)
                            poly[key] = poly.get(key, 0) - c * a
            poly = {k: v for k, v in poly.items() if v}
        g = list(self.unram_poly) + [1]
        out = [0] * self.n
        for j in range(e):
            col = {i: c for (i, jj), c in poly.items() if jj == j}
            deg = max(col, default=-1)
            while deg >= f:
                c = col.pop(deg)
                for s in range(f):
                    if g[s]:
                        col[deg - f + s] = col.get(deg - f + s, 0) - c * g[s]
                deg = max((d for d, v in col.items() if v), default=-1)
            for i, c in col.items():
                if c:
                    out[j * f + i] += c
        return out

    @cached_property
    def structure(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """Integer structure constants C[u][v][w] with b_u b_v = sum_w C[u][v][w] b_w."""
        f, n = self.f_res, self.n
        table = []
        for u in range(n):
            row = []
            for v in range(n):
                iu, ju = u % f, u // f
                iv, jv = v % f, v // f
                row.append(tuple(self._reduce_dict({(iu + iv, ju + jv): 1})))
            table.append(tuple(row))
        return tuple(table)

    @cached_property
    def pi_coords(self) -> tuple[int, ...]:
        if self.eis is None:
            return (self.p,) + (0,) * (self.n - 1)
        out = [0] * self.n
        out[self.f_res] = 1
        return tuple(out)

    @cached_property
    def v_coords(self) -> tuple[int, ...]:
        """The unit v with pi^e = p * v (integral coordinates)."""
        if self.eis is None:
            return (1,) + (0,) * (self.n - 1)
        f = self.f_res
        out = [0] * self.n
        for t, c in enumerate(self.eis):
            for s, a in enumerate(c):
                out[t * f + s] = -(a // self.p)
        return tuple(out)

    def moduli(self, prec: int) -> tuple[int, ...]:
        """Per-coordinate moduli describing the ideal pi^prec O_K."""
        f, e, p = self.f_res, self.e, self.p
        return tuple(p ** max(_ceil_div(prec - (c // f), e), 0) for c in range(self.n))

    # element constructors -----------------------------------------------
    def element(self, coords: Sequence[int], prec: int | None = None) -> "PadicElement":
        prec = self.prec if prec is None else prec
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(coords)}")
        return PadicElement(self, _canon(coords, self.moduli(prec)), prec)

    def from_int(self, k: int, prec: int | None = None) -> "PadicElement":
        return self.element((k,) + (0,) * (self.n - 1), prec)

    def zero(self, prec: int | None = None) -> "PadicElement":
        return self.from_int(0, prec)

    def one(self, prec: int | None = None) -> "PadicElement":
        return self.from_int(1, prec)

    def pi(self, prec: int | None = None) -> "PadicElement":
        return self.element(self.pi_coords, prec)

    def zeta(self, prec: int | None = None) -> "PadicElement":
        """The generator of the unramified layer (equal to 1 when f_res = 1)."""
        out = [0] * self.n
        out[1 if self.f_res > 1 else 0] = 1
        return self.element(out, prec)

    def from_residue(self, c: int, prec: int | None = None) -> "PadicElement":
        """Coordinate lift of a residue field element (digits in [0, p))."""
        digits = [int(d) for d in self.residue_field.digits[c]]
        return self.element(digits + [0] * (self.n - self.f_res), prec)

    def random(self, rng: random.Random, prec: int | None = None, unit: bool = False) -> "PadicElement":
        prec = self.prec if prec is None else prec
        mods = self.moduli(prec)
        while True:
            x = self.element([rng.randrange(m) for m in mods], prec)
            if not unit or x.is_unit():
                return x

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "f_res": self.f_res,
            "eis": None if self.eis is None else [list(c) for c in self.eis],
            "prec": self.prec,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PadicRingSpec":
        eis = data.get("eis")
        return cls(
            int(data["p"]),
            int(data.get("f_res", 1)),
            None if eis is None else tuple(c if isinstance(c, int) else tuple(c) for c in eis),
            int(data.get("prec", 8)),
        )


def _canon(coords: Iterable[int], mods: Sequence[int]) -> tuple[int, ...]:
    return tuple(c % m for c, m in zip(coords, mods))


@dataclass(frozen=True)
class PadicElement:
    """An element of O_K known modulo pi^prec, in canonical coordinates."""

    spec: PadicRingSpec = field(repr=False)
    coords: tuple[int, ...]
    prec: int

    def _check(self, other: "PadicElement") -> None:
        if not self.spec.same_ring(other.spec):
            raise SpecMismatch("operands belong to different rings")

    def _coerce(self, other) -> "PadicElement":
        if isinstance(other, PadicElement):
            self._check(other)
            return other
        if isinstance(other, (int, np.integer)):
            return self.spec.from_int(int(other), self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        return PadicElement(
            self.spec, _canon((a + b for a, b in zip(self.coords, other.coords)), self.spec.moduli(prec)), prec
        )

    __radd__ = __add__

    def __neg__(self) -> "PadicElement":
        return PadicElement(self.spec, _canon((-a for a in self.coords), self.spec.moduli(self.prec)), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        C = self.spec.structure
        n = self.spec.n
        acc = [0] * n
        for u, a in enumerate(self.coords):
            if not a:
                continue
            for v, b in enumerate(other.coords):
                if not b:
                    continue
                ab = a * b
                for w, c in enumerate(C[u][v]):
                    if c:
                        acc[w] += ab * c
        return PadicElement(self.spec, _canon(acc, self.spec.moduli(prec)), prec)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PadicElement":
        if k < 0:
            return padic_inv(self) ** (-k)
        result = self.spec.one(self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_unit(self) -> bool:
        return self.residue() != 0

    def residue(self) -> int:
        """Image in the residue field, in the shared integer encoding."""
        if self.prec < 1:
            return 0
        p = self.spec.p
        return sum((self.coords[i] % p) * p**i for i in range(self.spec.f_res))

    def valuation(self) -> float | int:
        return padic_valuation(self)

    def with_prec(self, prec: int) -> "PadicElement":
        """Reduce to a lower precision (raising precision is refused)."""
        if prec > self.prec:
            raise ValueError("cannot raise the precision of an inexact element")
        return PadicElement(self.spec, _canon(self.coords, self.spec.moduli(prec)), prec)

    def lift(self, prec: int) -> "PadicElement":
        """Reinterpret the canonical representative at another precision."""
        return PadicElement(self.spec, _canon(self.coords, self.spec.moduli(prec)), prec)

    def congruent(self, other: "PadicElement") -> bool:
        self._check(other)
        prec = min(self.prec, other.prec)
        return self.with_prec(prec).coords == other.with_prec(prec).coords

    def to_int(self) -> int:
        """The integer representative of an element of Z_p (other coordinates must vanish)."""
        if any(self.coords[1:]):
            raise ValueError("element is not in Z_p")
        return self.coords[0]

    def to_json(self) -> dict:
        data = self.spec.to_json()
        data["prec"] = self.prec
        data["coords"] = list(self.coords)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PadicElement":
        spec = PadicRingSpec.from_json(data)
        return spec.element(data["coords"], int(data.get("prec", spec.prec)))

    def __repr__(self) -> str:
        return f"PadicElement({list(self.coords)} mod pi^{self.prec})"


def padic_arith(x: PadicElement, y: PadicElement, op: str) -> PadicElement:
    """Apply ``op`` in {'add', 'sub', 'mul'}; result precision is the minimum."""
    x._check(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown operation {op!r}")


def padic_valuation(x: PadicElement) -> float | int:
    """pi-adic valuation; ``math.inf`` means the element is zero modulo pi^prec."""
    spec = x.spec
    best = math.inf
    for c, a in enumerate(x.coords):
        if a:
            best = min(best, spec.e * _vp(a, spec.p) + c // spec.f_res)
    return best


def padic_inv(x: PadicElement) -> PadicElement:
    """Inverse of a unit by Newton lifting from the residue field inverse."""
    if not x.is_unit():
        raise NotAUnit(f"{x!r} has positive valuation")
    spec = x.spec
    F = spec.residue_field
    y = spec.from_residue(F.inv(x.residue()), x.prec)
    two = spec.from_int(2, x.prec)
    known = 1
    while known < x.prec:
        y = y * (two - x * y)
        known *= 2
    return y


def padic_div_pi(x: PadicElement) -> PadicElement:
    """x / pi for x divisible by pi; the result loses one digit of precision."""
    if x.prec < 1 or (not x.is_zero() and padic_valuation(x) < 1):
        raise NotAUnit("element is not divisible by pi")
    spec = x.spec
    e, p = spec.e, spec.p
    if spec.eis is None:
        return PadicElement(spec, _canon((c // p for c in x.coords), spec.moduli(x.prec - 1)), x.prec - 1)
    wide = x.lift(x.prec + e - 1)
    v_inv = padic_inv(spec.element(spec.v_coords, x.prec + e - 1))
    y = wide * spec.pi(x.prec + e - 1) ** (e - 1) * v_inv
    if any(c % p for c in y.coords):
        raise AssertionError("division by pi produced a non-integral coordinate")
    return PadicElement(spec, _canon((c // p for c in y.coords), spec.moduli(x.prec - 1)), x.prec - 1)


def teichmuller_lift(spec: PadicRingSpec, c: int, prec: int | None = None) -> PadicElement:
    """The root of X^q = X reducing to ``c``, by Newton iteration on X^q - X."""
    prec = spec.prec if prec is None else prec
    x = spec.from_residue(c, prec)
    if c == 0:
        return x
    q = spec.q
    qk = spec.from_int(q, prec)
    for _ in range(prec.bit_length() + 2):
        num = x**q - x
        if num.is_zero():
            break
        den = qk * x ** (q - 1) - 1
        x = x - num * padic_inv(den)
    return x


# vectorised coefficient arithmetic -------------------------------------


class OKContext:
    """Modular coefficient arithmetic for arrays of O_K coordinates.

    Arrays have shape (..., n) and hold canonical coordinates modulo pi^prec.
    Intermediate products live modulo ``P = p^ceil((prec + e - 1) / e)``,
    which leaves room for an exact division by pi.
    """

    def __init__(self, spec: PadicRingSpec, prec: int):
        self.spec = spec
        self.prec = prec
        self.n = spec.n
        self.mod_exp = max(_ceil_div(prec + spec.e - 1, spec.e), 1)
        self.P = spec.p**self.mod_exp
        if self.P >= INT_LIMIT:
            raise PrecisionOverflow(
                f"modulus {spec.p}^{self.mod_exp} exceeds the int64 kernel limit; lower the precision"
            )
        self.mods = np.array(spec.moduli(prec), dtype=np.int64)
        self.C = np.array([[[int(c) % self.P for c in row] for row in plane] for plane in spec.structure], dtype=np.int64)

    def canon(self, arr: np.ndarray) -> np.ndarray:
        return np.mod(arr, self.mods)

    def coords(self, x: PadicElement) -> np.ndarray:
        return np.array(x.lift(self.prec).coords, dtype=np.int64)

    def element(self, row: np.ndarray) -> PadicElement:
        return self.spec.element([int(c) for c in row], self.prec)

    def mul_elementwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise product of two coordinate arrays of broadcastable shapes."""
        return self.canon(self.mul_elementwise_raw(a, b))

    def scale(self, arr: np.ndarray, s: PadicElement) -> np.ndarray:
        return self.mul_elementwise(arr, self.coords(s)[None, :] if arr.ndim > 1 else self.coords(s))

    def div_pi(self, arr: np.ndarray) -> np.ndarray:
        """Divide coordinates by pi; values must be divisible by pi modulo pi^prec.

        The result is returned at the same nominal precision; its top digit is
        not meaningful and callers account for the loss.
        """
        spec = self.spec
        p, e = spec.p, spec.e
        arr = self.canon(arr)
        if spec.eis is None:
            if np.any(arr % p):
                raise ArithmeticError("array is not divisible by pi")
            return arr // p
        wide_mods = np.array(spec.moduli(self.prec + e - 1), dtype=np.int64)
        factor = spec.pi(self.prec + e - 1) ** (e - 1) * padic_inv(spec.element(spec.v_coords, self.prec + e - 1))
        y = self.mul_elementwise_raw(arr, np.array(factor.coords, dtype=np.int64))
        y = np.mod(y, wide_mods)
        if np.any(y % p):
            raise ArithmeticError("array is not divisible by pi")
        return self.canon(y // p)

    def mul_elementwise_raw(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        P = self.P
        for u in range(self.n):
            for v in range(self.n):
                prod = (a[..., u] * b[..., v]) % P
                cw = self.C[u, v]
                for w in range(self.n):
                    if cw[w]:
                        out[..., w] = (out[..., w] + prod * cw[w]) % P
        return out


@lru_cache(maxsize=256)
def ok_context(spec: PadicRingSpec, prec: int) -> OKContext:
    return OKContext(spec.with_prec(spec.prec), prec)

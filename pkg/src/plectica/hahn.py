"""Finite-support multivariable Hahn series, weighted norms and the two completions.

Exponents are exact rationals whose denominators divide a power of q.
Coefficients live in a :class:`~plectica.coinduction.TensorAlgebra`
(a finite field when it has a single factor or q = q').
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coinduction import TensorAlgebra
from .errors import NotIntegral, SpecMismatch, Unsupported
from .gf import gf
from .laurent import MultivarLaurent

Exp = tuple[Fraction, ...]


def _is_q_power(n: int, q: int) -> bool:
    """Does n divide some power of q?"""
    while n > 1:
        g = math.gcd(n, q)
        if g == 1:
            return False
        n //= g
    return True


def _exp(v, q: int) -> Fraction:
    """A rational exponent, from an int, a Fraction, or a [numerator, k] pair meaning num / q^k."""
    if isinstance(v, (list, tuple)):
        num, k = v
        x = Fraction(int(num), q ** int(k))
    else:
        x = Fraction(v)
    if not _is_q_power(x.denominator, q):
        raise ValueError(f"exponent {x} does not have a power-of-{q} denominator")
    return x


def _exp_json(x: Fraction, q: int) -> list[int]:
    k = 0
    while (q**k) % x.denominator:
        k += 1
    return [int(x.numerator * (q**k // x.denominator)), k]


class HahnSeries:
    """A finite sum of c_gamma t^gamma with gamma in (Z[1/q])^nvars."""

    __slots__ = ("algebra", "nvars", "terms")

    def __init__(self, algebra: TensorAlgebra, nvars: int, terms: Mapping | Iterable | None = None):
        self.algebra = algebra
        self.nvars = nvars
        clean: dict[Exp, np.ndarray] = {}
        q = algebra.q
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for e, c in items:
            e = tuple(_exp(v, q) for v in e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} needs {nvars} entries")
            c = self._coef(c)
            if e in clean:
                c = algebra.add(clean[e], c)
            clean[e] = c
        self.terms = {e: c for e, c in clean.items() if c.any()}

    def _coef(self, c) -> np.ndarray:
        A = self.algebra
        if isinstance(c, (int, np.integer)):
            c = int(c)
            if c not in A.base_field:
                raise ValueError(f"scalar {c} is not in F_{A.q}")
            return A.scale(c, A.one())
        arr = np.asarray(c, dtype=np.int64)
        if arr.shape != (A.m,) * A.k:
            raise ValueError("coefficient has the wrong shape for the coefficient algebra")
        return arr

    @classmethod
    def monomial(cls, algebra: TensorAlgebra, exp: Sequence, c=1) -> "HahnSeries":
        return cls(algebra, len(exp), {tuple(exp): c})

    @classmethod
    def zero(cls, algebra: TensorAlgebra, nvars: int) -> "HahnSeries":
        return cls(algebra, nvars, {})

    def support(self) -> list[Exp]:
        return sorted(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "HahnSeries") -> None:
        if self.algebra != other.algebra or self.nvars != other.nvars:
            raise SpecMismatch("Hahn series over different coefficient rings or variable sets")

    def __add__(self, other: "HahnSeries") -> "HahnSeries":
        return hahn_arith(self, other, "add")

    def __mul__(self, other: "HahnSeries") -> "HahnSeries":
        return hahn_arith(self, other, "mul")

    def __pow__(self, e: int) -> "HahnSeries":
        out = HahnSeries.monomial(self.algebra, (0,) * self.nvars)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HahnSeries):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.nvars == other.nvars
            and self.terms.keys() == other.terms.keys()
            and all(np.array_equal(self.terms[e], other.terms[e]) for e in self.terms)
        )

    def __repr__(self) -> str:
        parts = [f"{c.reshape(-1).tolist()}*t^{tuple(str(v) for v in e)}" for e, c in sorted(self.terms.items())[:6]]
        return f"HahnSeries({' + '.join(parts) or '0'}{' + ...' if len(self.terms) > 6 else ''})"

    def to_json(self) -> dict:
        q = self.algebra.q
        return {
            "q": q,
            "q_prime": self.algebra.q_prime,
            "factors": self.algebra.k,
            "terms": [[[_exp_json(v, q) for v in e], c.reshape(-1).tolist()] for e, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HahnSeries":
        A = TensorAlgebra(int(data["q"]), int(data.get("q_prime", data["q"])), int(data.get("factors", 1)))
        pairs = [
            (tuple(e), c if isinstance(c, int) else np.array(c, dtype=np.int64).reshape((A.m,) * A.k))
            for e, c in data["terms"]
        ]
        nvars = int(data.get("nvars", len(pairs[0][0]) if pairs else 1))
        return cls(A, nvars, pairs)


def hahn_arith(x: HahnSeries, y: HahnSeries, op: str) -> HahnSeries:
    """Exact sum or convolution product on finite supports."""
    x._check(y)
    A = x.algebra
    if op == "add":
        out = dict(x.terms)
        for e, c in y.terms.items():
            out[e] = A.add(out[e], c) if e in out else c
        return HahnSeries(A, x.nvars, out)
    if op == "mul":
        out: dict[Exp, np.ndarray] = {}
        for e1, c1 in x.terms.items():
            for e2, c2 in y.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = A.mul(c1, c2)
                out[e] = A.add(out[e], c) if e in out else c
        return HahnSeries(A, x.nvars, out)
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# weighted norms and ideals


def _weights(c: Sequence[int] | Mapping[int, int], nvars: int) -> tuple[int, ...]:
    c = tuple(int(v) for v in (c.values() if isinstance(c, Mapping) else c))
    if len(c) != nvars:
        raise ValueError(f"weight vector needs {nvars} entries")
    if any(v < 1 for v in c):
        raise ValueError("weights must be at least 1")
    return c


def hahn_valuation(x: HahnSeries, c: Sequence[int]) -> Fraction | float:
    """min over the support of sum c_alpha gamma_alpha (inf for zero)."""
    c = _weights(c, x.nvars)
    if x.is_zero():
        return math.inf
    return min(sum((w * g for w, g in zip(c, e)), Fraction(0)) for e in x.terms)


def hahn_norm(x: HahnSeries, c: Sequence[int]) -> float:
    """exp(-valuation); 0 for the zero series."""
    v = hahn_valuation(x, c)
    return 0.0 if v == math.inf else math.exp(-float(v))


def ideal_member(x: HahnSeries, gamma, c: Sequence[int]) -> bool:
    """Is every support point of weighted degree at least gamma?"""
    c = _weights(c, x.nvars)
    gamma = Fraction(gamma)
    return all(sum((w * g for w, g in zip(c, e)), Fraction(0)) >= gamma for e in x.terms)


def ideal_member_strict(x: HahnSeries, gamma, c: Sequence[int]) -> bool:
    """Membership in the union over gamma' > gamma (the boundary excluded); differs from
    :func:`ideal_member` only when a support point sits exactly at gamma."""
    c = _weights(c, x.nvars)
    gamma = Fraction(gamma)
    return all(sum((w * g for w, g in zip(c, e)), Fraction(0)) > gamma for e in x.terms)


def t_adic_valuation(x: HahnSeries, beta: int) -> Fraction | float:
    """Smallest t_beta exponent on the support."""
    if x.is_zero():
        return math.inf
    return min(e[beta] for e in x.terms)


def is_field(A: TensorAlgebra) -> bool:
    return A.k == 1 or A.m == 1


# ---------------------------------------------------------------------------
# the two completions


@dataclass(frozen=True)
class ExponentLaw:
    """e(n) = a + b n + c q^n + d q^-n for n >= 0."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    d: Fraction = Fraction(0)

    def at(self, n: int, q: int) -> Fraction:
        return self.a + self.b * n + self.c * Fraction(q) ** n + self.d * Fraction(q) ** (-n)

    def __add__(self, other: "ExponentLaw") -> "ExponentLaw":
        return ExponentLaw(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def tends_to_infinity(self) -> bool:
        if self.c != 0:
            return self.c > 0
        return self.b > 0

    def bounded_below_by_zero(self, q: int) -> bool:
        """Is e(n) >= 0 for every n >= 0?"""
        if self.c < 0 or (self.c == 0 and self.b < 0):
            return False
        # beyond this point the dominant term keeps e(n) increasing or constant
        horizon = 64
        return all(self.at(n, q) >= 0 for n in range(horizon))


def _law(data) -> ExponentLaw:
    if isinstance(data, ExponentLaw):
        return data
    if isinstance(data, Mapping):
        return ExponentLaw(*(Fraction(data.get(key, 0)) for key in "abcd"))
    return ExponentLaw(*(Fraction(v) for v in data))


def completion_classify(family: Mapping, q: int | None = None) -> dict[str, bool]:
    """Decide membership of sum_n X^{e(n)} in the (X_alpha)_alpha-adic and X_Delta-adic completions.

    ``family`` is ``{"q": q, "laws": [e_alpha for alpha]}`` with each law
    given as ``{"a":..,"b":..,"c":..,"d":..}``, or ``{"support": [...]}`` for a
    finite sum.  The first completion needs the total degree to tend to
    infinity; the second needs every exponent, i.e. the minimum, to do so.
    """
    if "support" in family:
        return {"in_X_underline_adic": True, "in_X_Delta_adic": True}
    q = int(family.get("q", q or 2))
    try:
        laws = [_law(v) for v in family["laws"]]
    except (TypeError, ValueError, KeyError) as exc:
        raise Unsupported(f"family descriptor not understood: {exc}") from None
    if not laws:
        raise Unsupported("family has no variables")
    if not all(law.bounded_below_by_zero(q) for law in laws):
        raise Unsupported("exponents must stay nonnegative for the series to lie in the integral ring")
    total = laws[0]
    for law in laws[1:]:
        total = total + law
    return {
        "in_X_underline_adic": total.tends_to_infinity(),
        "in_X_Delta_adic": all(law.tends_to_infinity() for law in laws),
    }


def zone_predicates(points: Iterable[Sequence[Fraction]], radius: Fraction) -> tuple[int, int]:
    """Counts of points in the triangle {sum <= radius} and in the L-shape {min <= radius}."""
    tri = lsh = 0
    for e in points:
        if sum(e) <= radius:
            tri += 1
        if min(e) <= radius:
            lsh += 1
    return tri, lsh


# ---------------------------------------------------------------------------
# embedding of E_Delta^+


def embed_E_delta(x: MultivarLaurent) -> HahnSeries:
    """X_alpha -> t_alpha on an element of the residue ring without negative exponents."""
    ring = x.ring
    if not ring.residue:
        raise SpecMismatch("embedding takes an element reduced modulo pi")
    if x.exps.shape[0] and x.exps.min() < 0:
        raise NotIntegral("element has negative exponents")
    q = ring.q
    A = TensorAlgebra(q, q, 1)
    F = gf(ring.base.p, ring.base.f_res)
    vals = F._from_digits(x.coefs)
    terms = {tuple(int(v) for v in e): int(c) for e, c in zip(x.exps, vals)}
    return HahnSeries(A, ring.k, terms)


def monomial_ideal_contains(support: Iterable[Sequence], gens: Sequence[Sequence]) -> bool:
    """Every support point dominates some generator."""
    return all(any(all(a >= b for a, b in zip(e, g)) for g in gens) for e in support)


def preimage_ideal_check(gens: Sequence[Sequence[int]], tests: Sequence[MultivarLaurent]) -> list[bool]:
    """For each test element: does membership in (X^g) agree with membership of its image in (t^g)?"""
    out = []
    for x in tests:
        ring_side = all(any(all(int(a) >= int(b) for a, b in zip(e, g)) for g in gens) for e in x.exps)
        h = embed_E_delta(x)
        hahn_side = monomial_ideal_contains(h.terms.keys(), [tuple(Fraction(v) for v in g) for g in gens])
        out.append(ring_side == hahn_side)
    return out


def random_hahn(rng: random.Random, algebra: TensorAlgebra, nvars: int, nterms: int = 4, max_exp: int = 3,
                depth: int = 2) -> HahnSeries:
    q = algebra.q
    terms = {}
    for _ in range(nterms):
        e = tuple(Fraction(rng.randrange(0, max_exp * q**depth + 1), q**depth) for _ in range(nvars))
        c = np.array([rng.choice(algebra.base_field) for _ in range(algebra.dim)], dtype=np.int64)
        terms[e] = c.reshape((algebra.m,) * algebra.k)
    return HahnSeries(algebra, nvars, terms)

"""Truncated elements of O_K[[X_a | a in Delta]][1/X_Delta]^ (pi-adically completed).

An element is a finite sparse sum of monomials with exponents bounded below
by ``-neg_bound`` in every coordinate.  Two kinds of truncation are tracked:

* coefficients are known modulo pi^prec (uniform over the ring);
* the element is known below a total degree ``D``.  Terms of total degree at
  least ``D`` are unknown; ``D is None`` means the stored sum is exact.  Every
  element is additionally cut at the ring's degree window ``wtop``.

Each element also carries ``nu``: every term, known or not, has exponent at
least ``-nu[t]`` in coordinate t.  It only matters for inexact elements, where
it bounds how far the unknown tail can move under substitutions.

Operations lower ``D`` whenever information is lost and raise
:class:`TruncationLoss` when a *known* term would need an exponent below
``-neg_bound``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import InsufficientPrecision, NotAUnit, SpecMismatch, TruncationLoss
from .lubin_tate import LubinTatePoly, lt_iterate, lt_scalar
from .padic import PadicElement, PadicRingSpec, ok_context, padic_inv, padic_valuation

Exp = tuple[int, ...]


def _min_opt(*vals: int | None) -> int | None:
    known = [v for v in vals if v is not None]
    return min(known) if known else None


# ---------------------------------------------------------------------------
# ring specification


@dataclass(frozen=True)
class RingSpecDelta:
    """The truncated ring O_{E_Delta} (or its residue ring E_Delta when ``residue``).

    ``lt_polys`` are Lubin-Tate polynomials over the characteristic-zero base,
    one per variable; the residue ring acts through their reductions.
    ``window`` caps the total degree after shifting every exponent by
    ``neg_bound``, so stored terms have total degree below
    ``wtop = window - |Delta| * neg_bound + 1``.
    """

    base: PadicRingSpec
    delta: tuple[str, ...]
    lt_polys: tuple[LubinTatePoly, ...]
    neg_bound: int
    window: int
    prec: int
    residue: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", tuple(str(a) for a in self.delta))
        object.__setattr__(self, "lt_polys", tuple(self.lt_polys))
        if not self.delta:
            raise ValueError("Delta must be nonempty")
        if len(set(self.delta)) != len(self.delta):
            raise ValueError("variable names in Delta must be distinct")
        if len(self.lt_polys) != len(self.delta):
            raise ValueError("one Lubin-Tate polynomial is needed per variable")
        for f in self.lt_polys:
            if not f.spec.same_ring(self.base):
                raise SpecMismatch("Lubin-Tate polynomial over a different ring")
        if self.neg_bound < 0:
            raise ValueError("neg_bound must be nonnegative")
        if self.wtop < 1:
            raise ValueError("window must be at least |Delta| * neg_bound")
        if self.prec < 1:
            raise ValueError("precision must be at least 1")
        if self.residue and self.prec != 1:
            raise ValueError("the residue ring has precision 1")

    @classmethod
    def standard(
        cls,
        base: PadicRingSpec,
        delta: Sequence[str] | int = 2,
        neg_bound: int = 2,
        window: int | None = None,
        prec: int | None = None,
        lt_polys: Sequence[LubinTatePoly] | LubinTatePoly | None = None,
    ) -> "RingSpecDelta":
        """Convenience constructor; ``window`` defaults to 12 + |Delta| * neg_bound."""
        if isinstance(delta, int):
            delta = tuple(f"x{i}" for i in range(delta))
        delta = tuple(delta)
        if lt_polys is None:
            lt_polys = LubinTatePoly.default(base)
        if isinstance(lt_polys, LubinTatePoly):
            lt_polys = (lt_polys,) * len(delta)
        window = 12 + len(delta) * neg_bound if window is None else window
        return cls(base, delta, tuple(lt_polys), neg_bound, window, base.prec if prec is None else prec)

    @classmethod
    def residue_ring(
        cls, p: int, f_res: int = 1, delta: Sequence[str] | int = 1, neg_bound: int = 4, window: int | None = None
    ) -> "RingSpecDelta":
        """E_Delta over F_q with q = p^f_res, lifted through the unramified ring and f = T^q + pT."""
        base = PadicRingSpec(p, f_res, None, 1)
        ring = cls.standard(base, delta, neg_bound, window, 1)
        return replace(ring, residue=True)

    # geometry ---------------------------------------------------------------
    @property
    def k(self) -> int:
        return len(self.delta)

    @property
    def wtop(self) -> int:
        return self.window - self.k * self.neg_bound + 1

    @property
    def q(self) -> int:
        return self.base.q

    @cached_property
    def coef_spec(self) -> PadicRingSpec:
        if self.residue:
            return PadicRingSpec(self.base.p, self.base.f_res, None, 1)
        return self.base

    @property
    def n(self) -> int:
        return self.coef_spec.n

    @property
    def ctx(self):
        return ok_context(self.coef_spec, self.prec)

    def index(self, alpha: str | int) -> int:
        if isinstance(alpha, (int, np.integer)):
            if not 0 <= alpha < self.k:
                raise KeyError(f"variable index {alpha} out of range")
            return int(alpha)
        try:
            return self.delta.index(alpha)
        except ValueError:
            raise KeyError(f"unknown variable {alpha!r}; Delta is {list(self.delta)}") from None

    def widened(self, neg_bound: int, wtop: int) -> "RingSpecDelta":
        """Same ring with a larger exponent window, for intermediate computations."""
        neg_bound = max(neg_bound, self.neg_bound)
        wtop = max(wtop, self.wtop)
        return replace(self, neg_bound=neg_bound, window=wtop - 1 + self.k * neg_bound)

    def residue_of(self) -> "RingSpecDelta":
        """The ring E_Delta obtained by reducing coefficients modulo pi."""
        if self.residue:
            return self
        return replace(self, prec=1, residue=True)

    def key(self) -> tuple:
        return (self.base.key(), self.delta, self.lt_polys, self.neg_bound, self.window, self.prec, self.residue)

    def same(self, other: "RingSpecDelta") -> bool:
        return self.key() == other.key()

    def to_json(self) -> dict:
        return {
            "ring": self.base.to_json(),
            "delta": list(self.delta),
            "neg_bound": self.neg_bound,
            "window": self.window,
            "prec": self.prec,
            "residue": self.residue,
            "lt_polys": [f.to_json()["coeffs"] for f in self.lt_polys],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RingSpecDelta":
        base = PadicRingSpec.from_json(data["ring"])
        delta = tuple(data["delta"])
        polys = data.get("lt_polys")
        if polys is None:
            lt = (LubinTatePoly.default(base),) * len(delta)
        else:
            lt = tuple(
                LubinTatePoly(base, tuple((c,) + (0,) * (base.n - 1) if isinstance(c, int) else tuple(c) for c in cs))
                for cs in polys
            )
        residue = bool(data.get("residue", False))
        return cls(base, delta, lt, int(data["neg_bound"]), int(data["window"]), int(data.get("prec", base.prec)), residue)


# ---------------------------------------------------------------------------
# elements


def _lex_order(exps: np.ndarray) -> np.ndarray:
    if exps.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(exps.T[::-1])


class MultivarLaurent:
    """An element of a :class:`RingSpecDelta`, stored as sorted exponent and coefficient arrays."""

    __slots__ = ("ring", "exps", "coefs", "D", "nu")

    def __init__(
        self,
        ring: RingSpecDelta,
        exps: np.ndarray,
        coefs: np.ndarray,
        D: int | None = None,
        *,
        nu: Sequence[int] | np.ndarray | None = None,
        check: bool = True,
    ):
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, ring.k)
        coefs = ring.ctx.canon(np.asarray(coefs, dtype=np.int64).reshape(-1, ring.n))
        keep = coefs.any(axis=1)
        exps, coefs = exps[keep], coefs[keep]
        degs = exps.sum(axis=1)
        wtop = ring.wtop
        if degs.shape[0] and degs.max() >= wtop:
            D = wtop if D is None else min(D, wtop)
        if D is not None:
            keep = degs < D
            exps, coefs, degs = exps[keep], coefs[keep], degs[keep]
        low = exps < -ring.neg_bound
        if low.any():
            bad = np.nonzero(low.any(axis=1))[0]
            raise TruncationLoss(
                f"term with exponent {tuple(int(v) for v in exps[bad[0]])} lies below -neg_bound={-ring.neg_bound}",
                tuple(int(v) for v in exps[bad[0]]),
            )
        order = _lex_order(exps)
        exps, coefs = exps[order], coefs[order]
        if check and exps.shape[0] > 1:
            same = np.all(exps[1:] == exps[:-1], axis=1)
            if same.any():
                raise ValueError("duplicate exponents in MultivarLaurent")
        N = ring.neg_bound
        if nu is None:
            nu = np.full(ring.k, N if D is not None else -(1 << 40), dtype=np.int64)
        nu = np.minimum(np.asarray(nu, dtype=np.int64), N)
        if exps.shape[0]:
            nu = np.maximum(nu, -exps.min(axis=0))
        elif D is None:
            nu = np.zeros(ring.k, dtype=np.int64)
        exps.setflags(write=False)
        coefs.setflags(write=False)
        nu.setflags(write=False)
        self.ring = ring
        self.exps = exps
        self.coefs = coefs
        self.D = D
        self.nu = nu

    # construction -----------------------------------------------------------
    @classmethod
    def from_terms(
        cls, ring: RingSpecDelta, terms: Mapping | Iterable, D: int | None = None, nu: Sequence[int] | None = None
    ) -> "MultivarLaurent":
        """Build from {exponent: coefficient}; coefficients may be ints, coordinate lists or PadicElements.

        Known terms below the exponent bound raise :class:`TruncationLoss`.
        """
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exp, np.ndarray] = {}
        ctx = ring.ctx
        for exp, c in items:
            exp = (int(exp),) if isinstance(exp, (int, np.integer)) else tuple(int(e) for e in exp)
            if len(exp) != ring.k:
                raise ValueError(f"exponent {exp} does not have {ring.k} entries")
            row = _coef_row(ring, c)
            acc[exp] = acc.get(exp, 0) + row
        if not acc:
            return cls(ring, np.zeros((0, ring.k)), np.zeros((0, ring.n)), D, nu=nu)
        exps = np.array(list(acc.keys()), dtype=np.int64)
        coefs = ctx.canon(np.array(list(acc.values()), dtype=np.int64))
        return cls(ring, exps, coefs, D, nu=nu)

    @classmethod
    def zero(cls, ring: RingSpecDelta, D: int | None = None) -> "MultivarLaurent":
        return cls(ring, np.zeros((0, ring.k), dtype=np.int64), np.zeros((0, ring.n), dtype=np.int64), D)

    @classmethod
    def constant(cls, ring: RingSpecDelta, c=1) -> "MultivarLaurent":
        return cls.from_terms(ring, {(0,) * ring.k: c})

    @classmethod
    def one(cls, ring: RingSpecDelta) -> "MultivarLaurent":
        return cls.constant(ring, 1)

    @classmethod
    def monomial(cls, ring: RingSpecDelta, exp: Sequence[int] | Mapping[str, int], c=1) -> "MultivarLaurent":
        if isinstance(exp, Mapping):
            vec = [0] * ring.k
            for a, e in exp.items():
                vec[ring.index(a)] += int(e)
            exp = vec
        return cls.from_terms(ring, {tuple(exp): c})

    @classmethod
    def variable(cls, ring: RingSpecDelta, alpha: str | int, power: int = 1) -> "MultivarLaurent":
        vec = [0] * ring.k
        vec[ring.index(alpha)] = power
        return cls.monomial(ring, vec)

    @classmethod
    def x_delta(cls, ring: RingSpecDelta, power: int = 1) -> "MultivarLaurent":
        return cls.monomial(ring, [power] * ring.k)

    # views ------------------------------------------------------------------
    @property
    def spec(self) -> RingSpecDelta:
        return self.ring

    @property
    def known_below(self) -> int:
        """All coefficients of total degree below this value are known."""
        return self.ring.wtop if self.D is None else min(self.D, self.ring.wtop)

    @property
    def is_exact(self) -> bool:
        return self.D is None

    def terms(self) -> dict[Exp, PadicElement]:
        spec, prec = self.ring.coef_spec, self.ring.prec
        return {tuple(int(v) for v in e): spec.element(c, prec) for e, c in zip(self.exps, self.coefs)}

    def coefficient(self, exp: Sequence[int]) -> PadicElement:
        exp = np.asarray(exp, dtype=np.int64)
        hit = np.nonzero(np.all(self.exps == exp, axis=1))[0]
        spec = self.ring.coef_spec
        if hit.shape[0] == 0:
            return spec.zero(self.ring.prec)
        return spec.element(self.coefs[hit[0]], self.ring.prec)

    def degrees(self) -> np.ndarray:
        return self.exps.sum(axis=1)

    def mindeg(self) -> float | int:
        """Lowest total degree that may carry a nonzero coefficient (inf for exact zero)."""
        lo = int(self.degrees().min()) if self.exps.shape[0] else math.inf
        return min(lo, self.D) if self.D is not None else lo

    def min_exponents(self) -> np.ndarray:
        if self.exps.shape[0] == 0:
            return np.zeros(self.ring.k, dtype=np.int64)
        return self.exps.min(axis=0)

    def is_zero(self) -> bool:
        """True when no known term survives (the element is 0 at its truncation)."""
        return self.exps.shape[0] == 0

    def __len__(self) -> int:
        return self.exps.shape[0]

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "MultivarLaurent") -> None:
        if not self.ring.same(other.ring):
            raise SpecMismatch("elements of different rings")

    def _coerce(self, other) -> "MultivarLaurent":
        if isinstance(other, MultivarLaurent):
            self._check(other)
            return other
        if isinstance(other, (int, np.integer, PadicElement)):
            return MultivarLaurent.constant(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _combine(self, other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _combine(self, other, -1)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _combine(other, self, -1)

    def __neg__(self) -> "MultivarLaurent":
        return MultivarLaurent(self.ring, self.exps, -self.coefs, self.D, nu=self.nu, check=False)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, PadicElement)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _multiply(self, other)

    __rmul__ = __mul__

    def scale(self, c) -> "MultivarLaurent":
        row = _coef_row(self.ring, c)
        out = self.ring.ctx.mul_elementwise(self.coefs, row[None, :])
        return MultivarLaurent(self.ring, self.exps, out, self.D, nu=self.nu, check=False)

    def shift(self, exp: Sequence[int]) -> "MultivarLaurent":
        """Multiply by the monomial X^exp (exact)."""
        exp = np.asarray(exp, dtype=np.int64)
        D = None if self.D is None else self.D + int(exp.sum())
        return MultivarLaurent(self.ring, self.exps + exp[None, :], self.coefs, D, nu=self.nu - exp, check=False)

    def __pow__(self, k: int) -> "MultivarLaurent":
        if k < 0:
            return oe_inv(self) ** (-k)
        result = MultivarLaurent.one(self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def with_ring(self, ring: RingSpecDelta, D: int | None = None) -> "MultivarLaurent":
        """Move to a ring of the same coefficients with another window, keeping the tail bound."""
        if ring.coef_spec.key() != self.ring.coef_spec.key() or ring.prec != self.ring.prec or ring.k != self.ring.k:
            raise SpecMismatch("rings differ in more than their exponent window")
        return MultivarLaurent(ring, self.exps, self.coefs, _min_opt(self.D, D), nu=self.nu, check=False)

    def truncate(self, D: int) -> "MultivarLaurent":
        return MultivarLaurent(self.ring, self.exps, self.coefs, _min_opt(self.D, D), nu=self.nu, check=False)

    # comparison -------------------------------------------------------------
    def congruent(self, other: "MultivarLaurent", below: int | None = None) -> bool:
        """Equality of all coefficients of total degree below the common known bound."""
        self._check(other)
        bound = min(self.known_below, other.known_below)
        if below is not None:
            bound = min(bound, below)
        a = self.truncate(bound)
        b = other.truncate(bound)
        return bool(np.array_equal(a.exps, b.exps) and np.array_equal(a.coefs, b.coefs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultivarLaurent):
            return NotImplemented
        return (
            self.ring.same(other.ring)
            and self.D == other.D
            and np.array_equal(self.exps, other.exps)
            and np.array_equal(self.coefs, other.coefs)
        )

    def __hash__(self) -> int:
        return hash((self.ring.key(), self.D, self.exps.tobytes(), self.coefs.tobytes()))

    def __repr__(self) -> str:
        names = self.ring.delta
        parts = []
        for e, c in list(self.terms().items())[:8]:
            mono = "*".join(f"{a}^{v}" for a, v in zip(names, e) if v) or "1"
            parts.append(f"{list(c.coords)}*{mono}")
        more = " + ..." if len(self) > 8 else ""
        tail = "exact" if self.D is None else f"O(deg {self.D})"
        return f"MultivarLaurent({' + '.join(parts) or '0'}{more}; {tail})"

    # serialisation ----------------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for e, c in zip(self.exps, self.coefs):
            coeff = int(c[0]) if self.ring.n == 1 else [int(v) for v in c]
            terms.append([[int(v) for v in e], coeff])
        return {
            "delta": list(self.ring.delta),
            "neg_bound": self.ring.neg_bound,
            "window": self.ring.window,
            "prec": self.ring.prec,
            "known_below": None if self.D is None else int(self.D),
            "terms": terms,
        }

    @classmethod
    def from_json(cls, ring: RingSpecDelta, data: Mapping) -> "MultivarLaurent":
        D = data.get("known_below")
        return cls.from_terms(ring, [(tuple(e), c) for e, c in data["terms"]], None if D is None else int(D))


def _coef_row(ring: RingSpecDelta, c) -> np.ndarray:
    spec = ring.coef_spec
    if isinstance(c, PadicElement):
        if c.spec.p != spec.p or (not ring.residue and not c.spec.same_ring(spec)):
            raise SpecMismatch("coefficient from a different ring")
        coords = c.coords[: spec.n] if ring.residue else c.coords
        return np.array(spec.element(coords, ring.prec).coords, dtype=np.int64)
    if isinstance(c, (int, np.integer)):
        return np.array(spec.from_int(int(c), ring.prec).coords, dtype=np.int64)
    coords = [int(v) for v in c]
    return np.array(spec.element(coords, ring.prec).coords, dtype=np.int64)


def _combine(x: MultivarLaurent, y: MultivarLaurent, sign: int) -> MultivarLaurent:
    ring = x.ring
    D = _min_opt(x.D, y.D)
    exps = np.concatenate([x.exps, y.exps])
    coefs = np.concatenate([x.coefs, sign * y.coefs])
    if exps.shape[0] == 0:
        return MultivarLaurent(ring, exps, coefs, D, nu=np.maximum(x.nu, y.nu), check=False)
    uniq, inv = np.unique(exps, axis=0, return_inverse=True)
    acc = np.zeros((uniq.shape[0], ring.n), dtype=np.int64)
    np.add.at(acc, inv.reshape(-1), coefs)
    return MultivarLaurent(ring, uniq, acc, D, nu=np.maximum(x.nu, y.nu), check=False)


def _multiply(x: MultivarLaurent, y: MultivarLaurent) -> MultivarLaurent:
    ring = x.ring
    D = None
    if x.D is not None:
        D = _min_opt(D, x.D + y.mindeg()) if y.mindeg() != math.inf else D
    if y.D is not None:
        D = _min_opt(D, y.D + x.mindeg()) if x.mindeg() != math.inf else D
    nu = x.nu + y.nu
    if x.is_zero() or y.is_zero():
        return MultivarLaurent(ring, np.zeros((0, ring.k)), np.zeros((0, ring.n)), D, nu=nu)
    k, N, wtop = ring.k, ring.neg_bound, ring.wtop
    lo = np.full(k, -2 * N, dtype=np.int64)
    span = wtop + 2 * k * N
    strides = np.array([span**(k - 1 - i) for i in range(k)], dtype=np.int64)
    size = span**k
    cut = wtop if D is None else min(D, wtop)
    ctx = ring.ctx
    dense = _kernels.box_mul(x.exps, x.coefs, y.exps, y.coefs, lo, strides, size, cut, ctx.C, ctx.P)
    idx = np.nonzero(dense.any(axis=1))[0]
    exps = np.empty((idx.shape[0], k), dtype=np.int64)
    rem = idx.copy()
    for i in range(k):
        exps[:, i] = rem // strides[i] + lo[i]
        rem = rem % strides[i]
    if int(x.degrees().max()) + int(y.degrees().max()) >= wtop:
        D = _min_opt(D, wtop)
    return MultivarLaurent(ring, exps, dense[idx], D, nu=nu, check=False)


# ---------------------------------------------------------------------------
# public operations


def oe_arith(x: MultivarLaurent, y: MultivarLaurent, op: str) -> MultivarLaurent:
    """Apply ``op`` in {'add', 'sub', 'mul'} at the ring's truncation."""
    x._check(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown operation {op!r}")


def _unit_split(x: MultivarLaurent) -> tuple[np.ndarray, np.ndarray]:
    """Exponent d and coefficient c of the componentwise-minimal unit term."""
    ring = x.ring
    spec = ring.coef_spec
    if ring.residue:
        unit = x.coefs.any(axis=1)
    else:
        unit = np.array([spec.element(c, ring.prec).is_unit() for c in x.coefs], dtype=bool)
    if not unit.any():
        raise NotAUnit("no term has a unit coefficient, so the element is not a unit")
    cand = x.exps[unit]
    coefs = x.coefs[unit]
    mins = cand.min(axis=0)
    hit = np.nonzero(np.all(cand == mins, axis=1))[0]
    if hit.shape[0] == 0:
        raise NotAUnit(
            "the unit terms have no componentwise-minimal exponent, so the reduction is not a unit at this truncation"
        )
    return cand[hit[0]], coefs[hit[0]]


def oe_inv(x: MultivarLaurent) -> MultivarLaurent:
    """Inverse of a unit: x = c X^d (1 + y) and (1+y)^-1 = sum (-y)^j.

    The sum is formed in a widened window and cut back; ``D`` of the result
    records what the truncation of x and of the window allows to know.
    """
    ring = x.ring
    d, c = _unit_split(x)
    ctx = ring.ctx
    spec = ring.coef_spec
    c_inv = np.array(padic_inv(spec.element(c, ring.prec)).coords, dtype=np.int64)
    m = ring.prec
    dpos = np.maximum(d, 0)
    shifted_min = x.min_exponents() - d
    neg_y = int(np.maximum(-shifted_min, 0).max()) if len(x) else 0
    deg_y = x.degrees() - int(d.sum())
    mu = min(0, int(deg_y[deg_y != 0].min())) if np.any(deg_y != 0) else 0
    unit_tail = any(
        ring.residue or spec.element(cc, ring.prec).is_unit()
        for e, cc in zip(x.exps, x.coefs)
        if not np.array_equal(e, d)
    )
    N_w = ring.neg_bound + int(dpos.max()) + (m - 1) * neg_y + int(np.abs(d).max())
    if x.D is None and not unit_tail:
        # y is nilpotent modulo pi^m and nothing is ever cut off
        iters = m + 1
        top_y = int(max(0, deg_y.max())) if deg_y.shape[0] else 0
        W_w = ring.wtop + int(abs(d.sum())) + m * top_y + 1
    else:
        iters = ring.wtop + int(d.sum()) - (m - 1) * mu + m + 2
        W_w = ring.wtop + int(abs(d.sum())) + (iters + 1) * (-mu) + 1
    work = ring.widened(N_w, W_w)
    xw = x.with_ring(work)
    u = xw.shift(-d).scale(spec.element(c_inv, ring.prec))
    one = MultivarLaurent.one(work)
    y = u - one
    neg_y_el = -y
    acc = one
    power = one
    for _ in range(iters):
        power = power * neg_y_el
        if power.is_zero():
            acc = acc.truncate(power.D) if power.D is not None else acc
            break
        acc = acc + power
    else:
        raise InsufficientPrecision("geometric series for the inverse did not terminate at this truncation")
    result = acc.shift(-d).scale(spec.element(c_inv, ring.prec))
    return _restrict(result, ring, result.D)


def _restrict(x: MultivarLaurent, ring: RingSpecDelta, D: int | None) -> MultivarLaurent:
    """Move an element of a widened ring back to ``ring`` with tail bound ``D``."""
    D = _min_opt(x.D, D)
    exps, coefs = x.exps, x.coefs
    degs = exps.sum(axis=1)
    cut = ring.wtop if D is None else min(D, ring.wtop)
    keep = degs < cut
    if not keep.all():
        D = _min_opt(D, ring.wtop)
    exps, coefs = exps[keep], coefs[keep]
    return MultivarLaurent(ring, exps, coefs, D, nu=x.nu, check=False)


# ---------------------------------------------------------------------------
# univariate helper for substitutions


class _Uni:
    """Univariate Laurent series: coefficients for degrees lo, lo+1, ...; unknown from degree D on."""

    __slots__ = ("spec", "prec", "exps", "coefs", "D")

    def __init__(self, spec: PadicRingSpec, prec: int, exps: np.ndarray, coefs: np.ndarray, D: int | None):
        ctx = ok_context(spec, prec)
        exps = np.asarray(exps, dtype=np.int64).reshape(-1)
        coefs = ctx.canon(np.asarray(coefs, dtype=np.int64).reshape(-1, spec.n))
        keep = coefs.any(axis=1)
        if D is not None:
            keep &= exps < D
        order = np.argsort(exps[keep], kind="stable")
        self.spec = spec
        self.prec = prec
        self.exps = exps[keep][order]
        self.coefs = coefs[keep][order]
        self.D = D

    @classmethod
    def from_series(cls, s, spec: PadicRingSpec, residue: bool, exact: bool) -> "_Uni":
        coefs = s.coefs[:, : spec.n] if residue else s.coefs
        exps = np.arange(s.coefs.shape[0], dtype=np.int64)
        return cls(spec, 1 if residue else s.prec, exps, coefs, None if exact else s.cap + 1)

    @classmethod
    def one(cls, spec, prec) -> "_Uni":
        return cls(spec, prec, np.zeros(1, dtype=np.int64), np.array([spec.one(prec).coords], dtype=np.int64), None)

    def mindeg(self) -> float | int:
        lo = int(self.exps[0]) if self.exps.shape[0] else math.inf
        return lo if self.D is None else min(lo, self.D)

    def is_zero(self) -> bool:
        return self.exps.shape[0] == 0

    def mul(self, other: "_Uni", cap: int) -> "_Uni":
        D = None
        if self.D is not None and other.mindeg() != math.inf:
            D = _min_opt(D, self.D + other.mindeg())
        if other.D is not None and self.mindeg() != math.inf:
            D = _min_opt(D, other.D + self.mindeg())
        if self.is_zero() or other.is_zero():
            return _Uni(self.spec, self.prec, np.zeros(0), np.zeros((0, self.spec.n)), D)
        lo = int(self.exps[0] + other.exps[0])
        hi = int(self.exps[-1] + other.exps[-1])
        cut = cap if D is None else min(D, cap)
        if hi >= cut:
            D = _min_opt(D, cap)
        size = max(hi - lo + 1, 1)
        ctx = ok_context(self.spec, self.prec)
        dense = _kernels.box_mul(
            self.exps[:, None], self.coefs, other.exps[:, None], other.coefs,
            np.array([lo], dtype=np.int64), np.ones(1, dtype=np.int64), size, cut, ctx.C, ctx.P,
        )
        exps = np.arange(lo, lo + size, dtype=np.int64)
        return _Uni(self.spec, self.prec, exps, dense, D)

    def add(self, other: "_Uni", sign: int = 1) -> "_Uni":
        exps = np.concatenate([self.exps, other.exps])
        coefs = np.concatenate([self.coefs, sign * other.coefs])
        uniq, inv = np.unique(exps, return_inverse=True)
        acc = np.zeros((uniq.shape[0], self.spec.n), dtype=np.int64)
        np.add.at(acc, inv.reshape(-1), coefs)
        return _Uni(self.spec, self.prec, uniq, acc, _min_opt(self.D, other.D))

    def scale(self, row: np.ndarray) -> "_Uni":
        ctx = ok_context(self.spec, self.prec)
        return _Uni(self.spec, self.prec, self.exps, ctx.mul_elementwise(self.coefs, row[None, :]), self.D)

    def shift(self, s: int) -> "_Uni":
        return _Uni(self.spec, self.prec, self.exps + s, self.coefs, None if self.D is None else self.D + s)

    def split(self) -> tuple[int, np.ndarray, int]:
        """(d, c, c_neg): lowest unit term c X^d and the depth of non-unit terms below it."""
        unit = np.array([self.spec.element(c, self.prec).is_unit() for c in self.coefs], dtype=bool)
        if not unit.any():
            raise NotAUnit("series has no unit coefficient")
        i = int(np.nonzero(unit)[0][0])
        d = int(self.exps[i])
        c_neg = max(0, d - int(self.exps[0])) if self.exps.shape[0] else 0
        return d, self.coefs[i], c_neg

    def inv(self, cap: int) -> "_Uni":
        d, c, _ = self.split()
        c_inv = np.array(padic_inv(self.spec.element(c, self.prec)).coords, dtype=np.int64)
        u = self.shift(-d).scale(c_inv)
        one = _Uni.one(self.spec, self.prec)
        neg_y = one.add(u, -1)
        m = self.prec
        mu = min(0, int(neg_y.exps[0])) if neg_y.exps.shape[0] else 0
        inner_cap = cap + d
        iters = inner_cap - (m - 1) * mu + m + 2
        acc = one
        power = one
        for _ in range(iters):
            power = power.mul(neg_y, inner_cap)
            if power.is_zero():
                if power.D is not None:
                    acc = _Uni(acc.spec, acc.prec, acc.exps, acc.coefs, _min_opt(acc.D, power.D))
                break
            acc = acc.add(power)
        else:
            raise InsufficientPrecision("inverse series did not terminate at this truncation")
        return acc.shift(-d).scale(c_inv)

    def pow(self, e: int, cap: int) -> "_Uni":
        if e < 0:
            return self.inv(cap + (-e) * max(0, -int(self.mindeg()))).pow(-e, cap)
        result = _Uni.one(self.spec, self.prec)
        base = self
        work = cap + e * max(0, -int(self.mindeg()) if self.mindeg() != math.inf else 0)
        while e:
            if e & 1:
                result = result.mul(base, work)
            e >>= 1
            if e:
                base = base.mul(base, work)
        if result.D is None and result.exps.shape[0] and result.exps[-1] >= cap:
            result = _Uni(result.spec, result.prec, result.exps, result.coefs, cap)
        elif result.D is not None and result.D > cap:
            result = _Uni(result.spec, result.prec, result.exps, result.coefs, cap)
        return result

    def embed(self, ring: RingSpecDelta, target: int) -> MultivarLaurent:
        exps = np.zeros((self.exps.shape[0], ring.k), dtype=np.int64)
        exps[:, target] = self.exps
        nu = np.zeros(ring.k, dtype=np.int64)
        low = self.mindeg()
        nu[target] = 0 if low == math.inf else -int(low)
        return MultivarLaurent(ring, exps, self.coefs, self.D, nu=nu, check=False)


# ---------------------------------------------------------------------------
# substitutions X_tau -> S_tau(X_target(tau))


SeriesMaker = "Callable[[int], _Uni]"


def _tail_bound(D: int, nu: Sequence[int], m: int, lead: Sequence[int], depth: Sequence[int]) -> int:
    """Lowest total degree (mod pi^m) reachable from unknown monomials of degree >= D.

    The unknown monomials are X^e with sum(e) >= D and e_t >= -nu_t.  The
    image of X^e has degree at least sum(lead_t * e_t) - (m - 1) * sum(depth_t),
    a linear function minimised at a vertex of that region.
    """
    k = len(lead)
    best = None
    for t in range(k):
        top = D + sum(int(nu[s]) for s in range(k) if s != t)
        val = lead[t] * top - sum(lead[s] * int(nu[s]) for s in range(k) if s != t)
        best = val if best is None else min(best, val)
    return best - (m - 1) * sum(depth)


def _low_exponent(e: int, lead: int, depth: int, m: int, first: int) -> int:
    """Lower bound for the exponents of S^e modulo pi^m."""
    if e >= 0:
        return e * first
    return lead * e - (m - 1) * depth


def substitute(x: MultivarLaurent, makers: Sequence, targets: Sequence[int]) -> MultivarLaurent:
    """The ring endomorphism sending X_tau to S_tau(X_{targets[tau]}).

    ``makers[tau](cap)`` must return S_tau as a :class:`_Uni` correct below
    degree ``cap`` (or exact).  ``targets`` must be a permutation.
    """
    ring = x.ring
    k = ring.k
    if sorted(targets) != list(range(k)):
        raise ValueError("targets must be a permutation of the variables")
    if x.is_zero() and x.D is None:
        return x
    # first pass: leading data and lowest exponents of the needed powers
    probe_cap = ring.wtop + 1
    S0 = [makers[t](probe_cap) for t in range(k)]
    lead, depth, first = [], [], []
    for S in S0:
        d, _, c_neg = S.split()
        lead.append(d)
        depth.append(c_neg)
        first.append(int(S.mindeg()))
    need = [np.unique(x.exps[:, t]) if len(x) else np.zeros(0, dtype=np.int64) for t in range(k)]
    N_work = ring.neg_bound
    inv_cache = {}
    for t in range(k):
        if need[t].shape[0] and need[t][0] < 0:
            inv_cache[t] = S0[t].inv(probe_cap)
            lo = -int(need[t][0]) * max(0, -int(inv_cache[t].mindeg()))
            N_work = max(N_work, lo)
    W_work = ring.wtop + (k - 1) * N_work
    work = ring.widened(N_work, W_work)
    cap = work.wtop + (k - 1) * N_work
    S = [makers[t](cap) for t in range(k)]
    powers: list[dict[int, _Uni]] = []
    for t in range(k):
        table: dict[int, _Uni] = {}
        vals = [int(v) for v in need[t]]
        pos = sorted(v for v in vals if v >= 0)
        negs = sorted((-v for v in vals if v < 0))
        if pos:
            cur = _Uni.one(S[t].spec, S[t].prec)
            e = 0
            for v in pos:
                while e < v:
                    cur = cur.mul(S[t], cap + N_work * k)
                    e += 1
                table[v] = cur
        if negs:
            base = S[t].inv(cap + N_work * k)
            cur = _Uni.one(S[t].spec, S[t].prec)
            e = 0
            for v in negs:
                while e < v:
                    cur = cur.mul(base, cap + N_work * k)
                    e += 1
                table[-v] = cur
        powers.append(table)
    image = _assemble(x.exps, x.coefs, 0, powers, targets, work)
    D = image.D
    m = ring.prec
    nu = np.zeros(k, dtype=np.int64)
    for t in range(k):
        lows = [int(need[t][0])] if need[t].shape[0] else []
        if x.D is not None:
            lows.append(-int(x.nu[t]))
        if lows:
            nu[targets[t]] = max(0, -_low_exponent(min(lows), lead[t], depth[t], m, first[t]))
    if x.D is not None:
        D = _min_opt(D, _tail_bound(x.D, x.nu, m, lead, depth))
    out = _restrict(image, ring, D)
    return MultivarLaurent(ring, out.exps, out.coefs, out.D, nu=nu, check=False)


def _assemble(exps, coefs, level, powers, targets, work) -> MultivarLaurent:
    k = work.k
    ctx = work.ctx
    if exps.shape[0] == 0:
        return MultivarLaurent.zero(work)
    col = exps[:, level]
    if level == k - 1:
        acc = MultivarLaurent.zero(work)
        for v in np.unique(col):
            sel = col == v
            row = coefs[sel][0]
            P = powers[level][int(v)].embed(work, targets[level])
            acc = acc + MultivarLaurent(work, P.exps, ctx.mul_elementwise(P.coefs, row[None, :]), P.D, nu=P.nu, check=False)
        return acc
    acc = MultivarLaurent.zero(work)
    for v in np.unique(col):
        sel = col == v
        inner = _assemble(exps[sel], coefs[sel], level + 1, powers, targets, work)
        P = powers[level][int(v)].embed(work, targets[level])
        acc = acc + P * inner
    return acc


def _identity_maker(ring: RingSpecDelta):
    spec = ring.coef_spec

    def make(cap: int) -> _Uni:
        return _Uni(spec, ring.prec, np.array([1]), np.array([spec.one(ring.prec).coords]), None)

    return make


def _iterate_maker(ring: RingSpecDelta, f: LubinTatePoly, times: int):
    if times == 0:
        return _identity_maker(ring)
    spec = ring.coef_spec

    def make(cap: int) -> _Uni:
        degree = f.spec.q**times
        s = lt_iterate(f, times, max(cap, degree), 1 if ring.residue else ring.prec)
        return _Uni.from_series(s, spec, ring.residue, exact=True)

    return make


def _scalar_maker(ring: RingSpecDelta, f: LubinTatePoly, a: PadicElement):
    spec = ring.coef_spec

    def make(cap: int) -> _Uni:
        s = lt_scalar(f, a, max(cap, 1), 1 if ring.residue else ring.prec)
        return _Uni.from_series(s, spec, ring.residue, exact=False)

    return make


def _as_vector(ring: RingSpecDelta, data, default) -> list:
    if isinstance(data, Mapping):
        out = [default] * ring.k
        for a, v in data.items():
            out[ring.index(a)] = v
        return out
    data = list(data)
    if len(data) != ring.k:
        raise ValueError(f"expected {ring.k} entries, got {len(data)}")
    return data


def act_phi(x: MultivarLaurent, n: Mapping[str, int] | Sequence[int]) -> MultivarLaurent:
    """Apply prod_a phi_{a,q}^{n_a}: X_b -> f_b^{o n_b}(X_b)."""
    ring = x.ring
    ns = [int(v) for v in _as_vector(ring, n, 0)]
    if any(v < 0 for v in ns):
        raise ValueError("Frobenius exponents must be nonnegative")
    if not any(ns):
        return x
    makers = [_iterate_maker(ring, ring.lt_polys[t], ns[t]) for t in range(ring.k)]
    return substitute(x, makers, list(range(ring.k)))


def act_gamma(x: MultivarLaurent, gamma: Mapping[str, PadicElement | int] | Sequence) -> MultivarLaurent:
    """Apply (gamma_a)_a: X_b -> [gamma_b](X_b) for units gamma_b of O_K.

    Python ints are exact scalars; a PadicElement stands for its canonical
    representative, so pass ``-1`` rather than ``from_int(-1)`` for [-1].
    """
    ring = x.ring
    gs = _as_vector(ring, gamma, 1)
    units = []
    for g in gs:
        if isinstance(g, PadicElement):
            if not g.spec.same_ring(ring.base):
                raise SpecMismatch("gamma entry from a different ring")
            if not g.is_unit():
                raise NotAUnit(f"gamma entry {g!r} is not a unit")
        else:
            g = int(g)
            if not ring.base.from_int(g, 1).is_unit():
                raise NotAUnit(f"gamma entry {g} is not a unit")
        units.append(g)
    if all(g == 1 if isinstance(g, int) else g.coords == ring.base.one(g.prec).coords for g in units):
        return x
    makers = [_scalar_maker(ring, ring.lt_polys[t], units[t]) for t in range(ring.k)]
    return substitute(x, makers, list(range(ring.k)))


def act_permutation(x: MultivarLaurent, perm: Sequence[int]) -> MultivarLaurent:
    """X_tau -> X_{perm[tau]} (exact)."""
    ring = x.ring
    perm = [int(v) for v in perm]
    if sorted(perm) != list(range(ring.k)):
        raise ValueError("perm must be a permutation of the variables")
    exps = np.zeros_like(x.exps)
    nu = np.zeros_like(x.nu)
    for t in range(ring.k):
        exps[:, perm[t]] = x.exps[:, t]
        nu[perm[t]] = x.nu[t]
    return MultivarLaurent(ring, exps, x.coefs, x.D, nu=nu, check=False)


def act_glectic_substitution(x: MultivarLaurent, perm: Sequence[int], degrees: Sequence[int]) -> MultivarLaurent:
    """X_tau -> f^{o degrees[tau]}(X_{perm[tau]})."""
    ring = x.ring
    makers = [_iterate_maker(ring, ring.lt_polys[int(perm[t])], int(degrees[t])) for t in range(ring.k)]
    return substitute(x, makers, [int(v) for v in perm])


def weak_membership(x: MultivarLaurent, n: int, k: int) -> bool:
    """Is x in pi^n O_{E_Delta} + X_Delta^k O^+_{E_Delta} (judged on the stored terms)?

    A stored term escapes the pi^n condition only when all its exponents are
    nonnegative and at least k.
    """
    ring = x.ring
    if len(x) == 0:
        return True
    free = np.all(x.exps >= max(k, 0), axis=1)
    spec = ring.coef_spec
    for exp_ok, c in zip(free, x.coefs):
        if exp_ok:
            continue
        v = padic_valuation(spec.element(c, ring.prec))
        if ring.residue:
            v = math.inf if v == math.inf else 0
        if v < n:
            return False
    return True


def reduce_mod_pi(x: MultivarLaurent) -> MultivarLaurent:
    """Coefficientwise reduction to E_Delta (exact)."""
    ring = x.ring
    if ring.residue:
        return x
    target = ring.residue_of()
    f = ring.base.f_res
    p = ring.base.p
    return MultivarLaurent(target, x.exps, x.coefs[:, :f] % p, x.D, nu=x.nu, check=False)

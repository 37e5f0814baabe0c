"""Truncated power series over O_K in one to three variables.

A series is a dense array of coordinates indexed by the monomials of total
degree at most ``cap`` (ordered by total degree, then lexicographically).
Coefficients are known modulo pi^prec and every term of degree above the cap
is unknown.  Composition requires inner series without constant term.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import NotComposable, SpecMismatch
from .padic import OKContext, PadicElement, PadicRingSpec, ok_context


@lru_cache(maxsize=None)
def monomials(nvars: int, cap: int) -> tuple[np.ndarray, dict[tuple[int, ...], int]]:
    """Exponent table of shape (count, nvars) and the reverse index."""
    rows = []
    for d in range(cap + 1):
        level = [e for e in iproduct(range(d + 1), repeat=nvars) if sum(e) == d]
        rows.extend(sorted(level))
    table = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
    table.setflags(write=False)
    return table, {tuple(int(x) for x in r): i for i, r in enumerate(rows)}


@lru_cache(maxsize=None)
def pair_table(nvars: int, cap: int):
    """Index triples (i, j, k) with mono_i * mono_j = mono_k and degree <= cap, sorted by k."""
    table, index = monomials(nvars, cap)
    degs = table.sum(axis=1)
    pi, pj, pk = [], [], []
    for i, ei in enumerate(table):
        for j, ej in enumerate(table):
            if degs[i] + degs[j] <= cap:
                pi.append(i)
                pj.append(j)
                pk.append(index[tuple(int(x) for x in ei + ej)])
    pi = np.array(pi, dtype=np.int64)
    pj = np.array(pj, dtype=np.int64)
    pk = np.array(pk, dtype=np.int64)
    order = np.argsort(pk, kind="stable")
    pi, pj, pk = pi[order], pj[order], pk[order]
    kvals, kstarts = np.unique(pk, return_index=True)
    return pi, pj, pk, kstarts.astype(np.int64), kvals.astype(np.int64)


class TruncatedSeries:
    """Power series in ``nvars`` variables modulo (pi^prec, total degree > cap)."""

    __slots__ = ("spec", "nvars", "cap", "prec", "coefs")

    def __init__(self, spec: PadicRingSpec, nvars: int, cap: int, prec: int, coefs: np.ndarray):
        self.spec = spec
        self.nvars = nvars
        self.cap = cap
        self.prec = prec
        ctx = ok_context(spec, prec)
        count = monomials(nvars, cap)[0].shape[0]
        coefs = np.asarray(coefs, dtype=np.int64)
        if coefs.shape != (count, spec.n):
            raise ValueError(f"coefficient array must have shape {(count, spec.n)}, got {coefs.shape}")
        coefs = ctx.canon(coefs)
        coefs.setflags(write=False)
        self.coefs = coefs

    # construction ----------------------------------------------------------
    @classmethod
    def zero(cls, spec, nvars, cap, prec) -> "TruncatedSeries":
        count = monomials(nvars, cap)[0].shape[0]
        return cls(spec, nvars, cap, prec, np.zeros((count, spec.n), dtype=np.int64))

    @classmethod
    def from_terms(cls, spec, nvars, cap, prec, terms) -> "TruncatedSeries":
        """Build from a mapping exponent -> coefficient (PadicElement or int).

        Terms above the cap are dropped.
        """
        _, index = monomials(nvars, cap)
        arr = np.zeros((len(index), spec.n), dtype=np.int64)
        for exp, c in dict(terms).items():
            exp = (exp,) if isinstance(exp, (int, np.integer)) else tuple(exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not have {nvars} entries")
            if sum(exp) > cap:
                continue
            if isinstance(c, PadicElement):
                coords = c.lift(prec).coords
            else:
                coords = spec.from_int(int(c), prec).coords
            arr[index[exp]] = (arr[index[exp]] + np.array(coords, dtype=np.int64))
        return cls(spec, nvars, cap, prec, arr)

    @classmethod
    def variable(cls, spec, nvars, cap, prec, which: int = 0) -> "TruncatedSeries":
        exp = [0] * nvars
        exp[which] = 1
        return cls.from_terms(spec, nvars, cap, prec, {tuple(exp): 1})

    @classmethod
    def constant(cls, spec, nvars, cap, prec, c) -> "TruncatedSeries":
        return cls.from_terms(spec, nvars, cap, prec, {(0,) * nvars: c})

    # views -----------------------------------------------------------------
    @property
    def ctx(self) -> OKContext:
        return ok_context(self.spec, self.prec)

    @property
    def exponents(self) -> np.ndarray:
        return monomials(self.nvars, self.cap)[0]

    def coefficient(self, exp) -> PadicElement:
        exp = (exp,) if isinstance(exp, (int, np.integer)) else tuple(exp)
        idx = monomials(self.nvars, self.cap)[1][exp]
        return self.spec.element(self.coefs[idx], self.prec)

    def terms(self) -> dict[tuple[int, ...], PadicElement]:
        out = {}
        for row, exp in zip(self.coefs, self.exponents):
            if row.any():
                out[tuple(int(x) for x in exp)] = self.spec.element(row, self.prec)
        return out

    def constant_term(self) -> PadicElement:
        return self.spec.element(self.coefs[0], self.prec)

    def degree_part(self, d: int) -> "TruncatedSeries":
        mask = self.exponents.sum(axis=1) == d
        return TruncatedSeries(self.spec, self.nvars, self.cap, self.prec, np.where(mask[:, None], self.coefs, 0))

    # precision management ---------------------------------------------------
    def truncate(self, cap: int | None = None, prec: int | None = None) -> "TruncatedSeries":
        """Lower the degree cap and/or the precision."""
        cap = self.cap if cap is None else cap
        prec = self.prec if prec is None else prec
        if cap > self.cap or prec > self.prec:
            raise ValueError("truncate can only lower the cap and precision")
        return self._recast(cap, prec)

    def lift(self, cap: int | None = None, prec: int | None = None) -> "TruncatedSeries":
        """Reinterpret the stored representatives at another cap and precision.

        Terms above the old cap are filled with zeros, so this treats the
        stored polynomial as exact; only use it on data that is exact.
        """
        return self._recast(self.cap if cap is None else cap, self.prec if prec is None else prec)

    def _recast(self, cap: int, prec: int) -> "TruncatedSeries":
        _, index = monomials(self.nvars, cap)
        arr = np.zeros((len(index), self.spec.n), dtype=np.int64)
        m = min(cap, self.cap)
        count = monomials(self.nvars, m)[0].shape[0]
        arr[:count] = self.coefs[:count]
        return TruncatedSeries(self.spec, self.nvars, cap, prec, arr)

    def _align(self, other: "TruncatedSeries") -> tuple["TruncatedSeries", "TruncatedSeries"]:
        if not self.spec.same_ring(other.spec):
            raise SpecMismatch("series over different rings")
        if self.nvars != other.nvars:
            raise ValueError("series in different numbers of variables")
        cap = min(self.cap, other.cap)
        prec = min(self.prec, other.prec)
        return self.truncate(cap, prec), other.truncate(cap, prec)

    # ring operations ---------------------------------------------------------
    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b = self._align(other)
        return TruncatedSeries(a.spec, a.nvars, a.cap, a.prec, a.coefs + b.coefs)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b = self._align(other)
        return TruncatedSeries(a.spec, a.nvars, a.cap, a.prec, a.coefs - b.coefs)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.spec, self.nvars, self.cap, self.prec, -self.coefs)

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, (PadicElement, int, np.integer)):
            return self.scale(other)
        a, b = self._align(other)
        ctx = a.ctx
        pi, pj, pk, kstarts, kvals = pair_table(a.nvars, a.cap)
        out = _kernels.dense_mul(
            a.coefs, b.coefs, pi, pj, pk, kstarts, kvals, ctx.C, ctx.P, a.coefs.shape[0]
        )
        return TruncatedSeries(a.spec, a.nvars, a.cap, a.prec, out)

    __rmul__ = __mul__

    def scale(self, s) -> "TruncatedSeries":
        if not isinstance(s, PadicElement):
            s = self.spec.from_int(int(s), self.prec)
        prec = min(self.prec, s.prec)
        base = self if prec == self.prec else self.truncate(prec=prec)
        ctx = base.ctx
        return TruncatedSeries(self.spec, self.nvars, self.cap, prec, ctx.mul_elementwise(base.coefs, ctx.coords(s)))

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            raise ValueError("negative powers of truncated series are not defined here")
        result = TruncatedSeries.constant(self.spec, self.nvars, self.cap, self.prec, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def powers(self, kmax: int) -> list["TruncatedSeries"]:
        out = [TruncatedSeries.constant(self.spec, self.nvars, self.cap, self.prec, 1)]
        for _ in range(kmax):
            out.append(out[-1] * self)
        return out

    def swap(self, perm: Sequence[int]) -> "TruncatedSeries":
        """Permute variables: new variable i receives the exponent of old variable perm[i]."""
        _, index = monomials(self.nvars, self.cap)
        arr = np.zeros_like(self.coefs)
        for row, exp in zip(self.coefs, self.exponents):
            new = tuple(int(exp[perm[i]]) for i in range(self.nvars))
            arr[index[new]] = row
        return TruncatedSeries(self.spec, self.nvars, self.cap, self.prec, arr)

    def embed(self, nvars: int, positions: Sequence[int]) -> "TruncatedSeries":
        """View as a series in ``nvars`` variables, variable i going to positions[i]."""
        _, index = monomials(nvars, self.cap)
        arr = np.zeros((len(index), self.spec.n), dtype=np.int64)
        for row, exp in zip(self.coefs, self.exponents):
            if not row.any():
                continue
            new = [0] * nvars
            for i, pos in enumerate(positions):
                new[pos] += int(exp[i])
            arr[index[tuple(new)]] = row
        return TruncatedSeries(self.spec, nvars, self.cap, self.prec, arr)

    # comparison --------------------------------------------------------------
    def congruent(self, other: "TruncatedSeries") -> bool:
        """Equality at the common (cap, precision)."""
        a, b = self._align(other)
        return bool(np.array_equal(a.coefs, b.coefs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.spec.same_ring(other.spec)
            and (self.nvars, self.cap, self.prec) == (other.nvars, other.cap, other.prec)
            and bool(np.array_equal(self.coefs, other.coefs))
        )

    def __hash__(self) -> int:
        return hash((self.spec.key(), self.nvars, self.cap, self.prec, self.coefs.tobytes()))

    def is_zero(self) -> bool:
        return not self.coefs.any()

    def __repr__(self) -> str:
        shown = ", ".join(f"{e}: {list(c.coords)}" for e, c in list(self.terms().items())[:6])
        return f"TruncatedSeries(vars={self.nvars}, cap={self.cap}, prec={self.prec}, {{{shown}}})"

    # serialisation -----------------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for exp, c in self.terms().items():
            coeff = c.coords[0] if self.spec.n == 1 else list(c.coords)
            terms.append([list(exp), coeff])
        return {"vars": self.nvars, "cap": self.cap, "prec": self.prec, "terms": terms}

    @classmethod
    def from_json(cls, spec: PadicRingSpec, data: dict) -> "TruncatedSeries":
        nvars = int(data["vars"])
        terms = {}
        for exp, coeff in data["terms"]:
            c = coeff if isinstance(coeff, int) else spec.element(coeff, int(data["prec"]))
            terms[tuple(exp)] = c
        return cls.from_terms(spec, nvars, int(data["cap"]), int(data["prec"]), terms)


def series_compose(outer: TruncatedSeries, inners: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """outer(inner_1, ..., inner_k) modulo (pi^prec, degree > cap).

    All inners must share their number of variables and have zero constant
    term; the result cap and precision are the minima over all operands.
    """
    if len(inners) != outer.nvars:
        raise ValueError(f"outer series has {outer.nvars} variables but {len(inners)} inner series were given")
    if not inners:
        raise ValueError("at least one inner series is required")
    nv = inners[0].nvars
    for s in inners:
        if s.nvars != nv:
            raise ValueError("inner series must share their number of variables")
        if not s.spec.same_ring(outer.spec):
            raise SpecMismatch("series over different rings")
        if s.constant_term().coords != (0,) * s.spec.n or s.coefs[0].any():
            raise NotComposable("inner series has a nonzero constant term")
    cap = min([outer.cap] + [s.cap for s in inners])
    prec = min([outer.prec] + [s.prec for s in inners])
    inners = [s.truncate(cap, prec) for s in inners]
    outer_t = outer.truncate(min(outer.cap, cap), prec) if outer.cap >= cap else outer.truncate(prec=prec)
    ctx = ok_context(outer.spec, prec)
    pows = [s.powers(cap) for s in inners]
    acc = np.zeros_like(inners[0].coefs)
    exps = outer_t.exponents
    if outer.nvars == 1:
        for row, exp in zip(outer_t.coefs, exps):
            if row.any():
                acc += ctx.mul_elementwise(pows[0][int(exp[0])].coefs, row)
    else:
        cache: dict[tuple[int, ...], TruncatedSeries] = {}
        for row, exp in zip(outer_t.coefs, exps):
            if not row.any():
                continue
            key = tuple(int(x) for x in exp)
            term = cache.get(key)
            if term is None:
                term = pows[0][key[0]]
                for v in range(1, outer.nvars):
                    if key[v]:
                        term = term * pows[v][key[v]]
                cache[key] = term
            acc += ctx.mul_elementwise(term.coefs, row)
        acc %= ctx.P
    return TruncatedSeries(outer.spec, nv, cap, prec, acc % ctx.P)

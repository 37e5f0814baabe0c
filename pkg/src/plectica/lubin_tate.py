"""Lubin-Tate formal group laws at finite truncation.

Given a Lubin-Tate polynomial f over O_K, the group law F(T1, T2), the
endomorphisms [a](T) and the inverse series i(T) = [-1](T) are built degree by
degree.  If S is correct below degree d, the defect E = f(S) - S(f, ...) starts
in degree d and the correction G_d = E_d / (pi^d - pi) repairs it.  The
division by pi loses one digit along each chain of degrees k -> kq, so the
computation runs with ``1 + floor(log_q N)`` digits of headroom and is cut back
to the requested precision at the end.

The stored representatives of f and of the scalar a are treated as exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientPrecision, SpecMismatch
from .padic import PadicElement, PadicRingSpec, padic_inv, padic_valuation
from .series import TruncatedSeries, series_compose

DEFAULT_CAP = 16
DEFAULT_PREC = 8


@dataclass(frozen=True)
class LubinTatePoly:
    """A monic polynomial of degree q with f(T) = pi*T mod T^2 and f = T^q mod pi.

    ``coeffs[i]`` is the coefficient of T^i; the representatives are treated
    as exact integers in the power basis of O_K.
    """

    spec: PadicRingSpec = field(repr=False)
    coeffs: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        coeffs = tuple(tuple(int(x) for x in c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        spec = self.spec
        q = spec.q
        if len(coeffs) != q + 1:
            raise ValueError(f"a Lubin-Tate polynomial has degree q={q}, got degree {len(coeffs) - 1}")
        if any(len(c) != spec.n for c in coeffs):
            raise ValueError(f"each coefficient needs {spec.n} coordinates")
        prec = spec.prec
        top = spec.element(coeffs[q], prec)
        if top.coords != spec.one(prec).coords:
            raise ValueError("a Lubin-Tate polynomial is monic")
        if not spec.element(coeffs[0], prec).is_zero():
            raise ValueError("a Lubin-Tate polynomial has zero constant term")
        if spec.element(coeffs[1], prec).coords != spec.pi(prec).coords:
            raise ValueError("the linear coefficient of a Lubin-Tate polynomial must be the uniformizer pi")
        for i in range(2, q):
            if padic_valuation(spec.element(coeffs[i], prec)) < 1:
                raise ValueError(f"coefficient of T^{i} is not divisible by pi")

    @classmethod
    def from_elements(cls, spec: PadicRingSpec, coeffs: Sequence[PadicElement | int]) -> "LubinTatePoly":
        rows = []
        for c in coeffs:
            if isinstance(c, PadicElement):
                rows.append(c.coords)
            else:
                rows.append(spec.from_int(int(c), spec.prec).coords)
        return cls(spec, tuple(rows))

    @classmethod
    def default(cls, spec: PadicRingSpec) -> "LubinTatePoly":
        """f(T) = T^q + pi*T."""
        q = spec.q
        zero = (0,) * spec.n
        rows = [zero] * (q + 1)
        rows[1] = spec.pi_coords
        rows[q] = spec.one().coords
        return cls(spec, tuple(rows))

    @classmethod
    def cyclotomic(cls, p: int, prec: int = DEFAULT_PREC) -> "LubinTatePoly":
        """f(T) = (1+T)^p - 1 over Z_p."""
        spec = PadicRingSpec(p, 1, None, prec)
        return cls(spec, tuple((math.comb(p, i) if i else 0,) for i in range(p + 1)))

    @property
    def degree(self) -> int:
        return self.spec.q

    def series(self, cap: int, prec: int) -> TruncatedSeries:
        return TruncatedSeries.from_terms(
            self.spec, 1, cap, prec, {(i,): self.spec.element(c, prec) for i, c in enumerate(self.coeffs) if any(c)}
        )

    def to_json(self) -> dict:
        coeffs = [c[0] if self.spec.n == 1 else list(c) for c in self.coeffs]
        return {"ring": self.spec.to_json(), "coeffs": coeffs}


def headroom(q: int, cap: int) -> int:
    """Extra pi-digits needed so that degrees up to ``cap`` come out correct."""
    h = 0
    d = 1
    while d * q <= cap:
        d *= q
        h += 1
    return 1 + h


def _div_pi_then(E: np.ndarray, ctx, unit: PadicElement) -> np.ndarray:
    try:
        G = ctx.div_pi(E)
    except ArithmeticError as exc:
        raise InsufficientPrecision("defect is not divisible by pi; the polynomial is not Lubin-Tate") from exc
    return ctx.mul_elementwise(G, ctx.coords(unit))


def _lift(seed: TruncatedSeries, f: LubinTatePoly, inner: Sequence[TruncatedSeries], cap: int, prec: int) -> TruncatedSeries:
    """Extend ``seed`` (correct in degree 1) to the unique series S with f(S) = S(f(T_1), ...)."""
    spec = f.spec
    nv = seed.nvars
    S = seed
    fser = f.series(cap, prec)
    for d in range(2, cap + 1):
        Sd = S.truncate(cap=d)
        lhs = series_compose(fser.truncate(cap=d), [Sd])
        rhs = series_compose(Sd, [s.truncate(cap=d) for s in inner])
        E = (lhs - rhs).degree_part(d)
        if E.is_zero():
            continue
        ctx = E.ctx
        unit = padic_inv(spec.pi(prec) ** (d - 1) - 1)
        G = _div_pi_then(E.coefs, ctx, unit)
        S = S + TruncatedSeries(spec, nv, d, prec, G).lift(cap=cap)
    return S


def _working(f: LubinTatePoly, cap: int, prec: int) -> int:
    return prec + headroom(f.spec.q, cap)


@lru_cache(maxsize=128)
def lt_add_law(f: LubinTatePoly, deg_cap: int = DEFAULT_CAP, prec: int = DEFAULT_PREC) -> TruncatedSeries:
    """The formal group law F(T1, T2) attached to f, modulo (pi^prec, degree > deg_cap)."""
    _check_args(deg_cap, prec)
    spec = f.spec
    M = _working(f, deg_cap, prec)
    T1 = TruncatedSeries.variable(spec, 2, deg_cap, M, 0)
    T2 = TruncatedSeries.variable(spec, 2, deg_cap, M, 1)
    fser = f.series(deg_cap, M)
    inner = [series_compose(fser, [T1]), series_compose(fser, [T2])]
    F = _lift(T1 + T2, f, inner, deg_cap, M)
    return F.truncate(prec=prec)


def _as_exact(spec: PadicRingSpec, a: PadicElement | int, prec: int | None = None) -> PadicElement:
    """Python ints are exact; they are represented at ``prec`` digits so that [-1] really is [-1]."""
    if isinstance(a, PadicElement):
        if not a.spec.same_ring(spec):
            raise SpecMismatch("scalar and polynomial live over different rings")
        return a
    return spec.from_int(int(a), spec.prec if prec is None else prec)


@lru_cache(maxsize=512)
def _scalar_cached(f: LubinTatePoly, coords: tuple[int, ...], deg_cap: int, prec: int) -> TruncatedSeries:
    spec = f.spec
    M = _working(f, deg_cap, prec)
    a = spec.element(coords, M)
    T = TruncatedSeries.variable(spec, 1, deg_cap, M, 0)
    fT = f.series(deg_cap, M)
    S = _lift(T * a, f, [fT], deg_cap, M)
    return S.truncate(prec=prec)


def lt_scalar(
    f: LubinTatePoly, a: PadicElement | int, deg_cap: int = DEFAULT_CAP, prec: int = DEFAULT_PREC
) -> TruncatedSeries:
    """The endomorphism [a](T) = aT + ... commuting with f."""
    _check_args(deg_cap, prec)
    a = _as_exact(f.spec, a, _working(f, deg_cap, prec))
    return _scalar_cached(f, a.coords, deg_cap, prec)


def lt_inverse(f: LubinTatePoly, deg_cap: int = DEFAULT_CAP, prec: int = DEFAULT_PREC) -> TruncatedSeries:
    """The inverse series i(T) = [-1](T); the representative of -1 is p^M - 1 at working precision."""
    _check_args(deg_cap, prec)
    spec = f.spec
    M = _working(f, deg_cap, prec)
    return _scalar_cached(f, spec.from_int(-1, M).coords, deg_cap, prec)


def lt_iterate(f: LubinTatePoly, times: int, deg_cap: int = DEFAULT_CAP, prec: int = DEFAULT_PREC) -> TruncatedSeries:
    """f composed with itself ``times`` times (the identity for times = 0)."""
    T = TruncatedSeries.variable(f.spec, 1, deg_cap, prec, 0)
    fser = f.series(deg_cap, prec)
    out = T
    for _ in range(times):
        out = series_compose(fser, [out])
    return out


def _check_args(deg_cap: int, prec: int) -> None:
    if deg_cap < 1:
        raise ValueError("degree cap must be at least 1")
    if prec < 1:
        raise ValueError("precision must be at least 1")


@dataclass
class AxiomReport:
    """Outcome of :func:`lt_check_axioms`; each entry maps a check name to a boolean."""

    checks: dict[str, bool]
    deg_cap: int
    prec: int

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_json(self) -> dict:
        return {"cap": self.deg_cap, "prec": self.prec, "ok": self.ok, "checks": dict(sorted(self.checks.items()))}


def lt_check_axioms(
    f: LubinTatePoly,
    deg_cap: int = DEFAULT_CAP,
    prec: int = DEFAULT_PREC,
    samples: Iterable[tuple[PadicElement | int, PadicElement | int]] = (),
    pi_powers: int = 2,
) -> AxiomReport:
    """Verify the formal O_K-module identities at truncation.

    Both sides of every identity are recomputed independently: the left from
    a fresh lift, the right by composing previously built series.
    """
    spec = f.spec
    checks: dict[str, bool] = {}
    F = lt_add_law(f, deg_cap, prec)
    T = TruncatedSeries.variable(spec, 1, deg_cap, prec, 0)
    checks["F_linear_part"] = F.truncate(cap=1).congruent(
        TruncatedSeries.variable(spec, 2, 1, prec, 0) + TruncatedSeries.variable(spec, 2, 1, prec, 1)
    )
    checks["commutativity"] = F.congruent(F.swap([1, 0]))
    X = [TruncatedSeries.variable(spec, 3, deg_cap, prec, i) for i in range(3)]
    F12 = series_compose(F, [X[0], X[1]])
    F23 = series_compose(F, [X[1], X[2]])
    checks["associativity"] = series_compose(F, [F12, X[2]]).congruent(series_compose(F, [X[0], F23]))
    fser = f.series(deg_cap, prec)
    checks["f(F)=F(f,f)"] = series_compose(fser, [F]).congruent(
        series_compose(F, [fser.embed(2, [0]), fser.embed(2, [1])])
    )
    zero = lt_scalar(f, 0, deg_cap, prec)
    checks["[0]=0"] = zero.is_zero()
    checks["[1]=T"] = lt_scalar(f, 1, deg_cap, prec).congruent(T)
    inv = lt_inverse(f, deg_cap, prec)
    checks["F(T,i(T))=0"] = series_compose(F, [T, inv]).is_zero()
    pi_M = spec.pi(prec + headroom(spec.q, deg_cap))
    for m in range(1, pi_powers + 1):
        lhs = lt_scalar(f, pi_M**m, deg_cap, prec)
        checks[f"[pi^{m}]=f^{m}"] = lhs.congruent(lt_iterate(f, m, deg_cap, prec))
    for idx, (a, b) in enumerate(samples):
        M = prec + headroom(spec.q, deg_cap)
        a = _as_exact(spec, a, M)
        b = _as_exact(spec, b, M)
        a_M, b_M = a.lift(M), b.lift(M)
        A = lt_scalar(f, a_M, deg_cap, prec)
        B = lt_scalar(f, b_M, deg_cap, prec)
        checks[f"sample{idx}:[a+b]=F([a],[b])"] = lt_scalar(f, a_M + b_M, deg_cap, prec).congruent(
            series_compose(F, [A, B])
        )
        AB = lt_scalar(f, a_M * b_M, deg_cap, prec)
        checks[f"sample{idx}:[ab]=[a]o[b]"] = AB.congruent(series_compose(A, [B]))
        checks[f"sample{idx}:[a]o[b]=[b]o[a]"] = series_compose(A, [B]).congruent(series_compose(B, [A]))
        checks[f"sample{idx}:[a]of=fo[a]"] = series_compose(A, [fser]).congruent(series_compose(fser, [A]))
    return AxiomReport(checks, deg_cap, prec)

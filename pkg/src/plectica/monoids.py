"""Submonoids of N^Delta, semidirect products with quotients, plectic and glectic monoids."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import Inconclusive, PreconditionFailed
from .laurent import MultivarLaurent, act_gamma, act_glectic_substitution, act_permutation, act_phi
from .padic import PadicElement

Vec = tuple[int, ...]


# ---------------------------------------------------------------------------
# submonoids of N^Delta


@dataclass(frozen=True)
class NSubmonoid:
    """The submonoid of N^k generated by ``generators``.

    ``canonical_f`` records that S = (fN)^k + (1,...,1)N, which enables
    closed-form membership and certified bounds.
    """

    ambient_dim: int
    generators: tuple[Vec, ...]
    canonical_f: int | None = None

    def __post_init__(self) -> None:
        gens = tuple(tuple(int(v) for v in g) for g in self.generators)
        if any(len(g) != self.ambient_dim for g in gens):
            raise ValueError("generator of the wrong length")
        if any(min(g) < 0 or not any(g) for g in gens):
            raise ValueError("generators must be nonzero vectors of N^k")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def canonical(cls, f: int, k: int) -> "NSubmonoid":
        """(fN)^k + (1,...,1)N, the image of Phi_{Delta,q,p} in Phi_{Delta,p} for q = p^f."""
        if f < 1 or k < 1:
            raise ValueError("need f >= 1 and |Delta| >= 1")
        gens = [tuple(f if i == j else 0 for j in range(k)) for i in range(k)]
        gens.append((1,) * k)
        return cls(k, tuple(dict.fromkeys(gens)), f)

    def contains(self, v: Sequence[int]) -> bool:
        v = tuple(int(x) for x in v)
        if len(v) != self.ambient_dim:
            raise ValueError("vector of the wrong length")
        if min(v) < 0:
            return False
        if self.canonical_f is not None:
            f = self.canonical_f
            res = v[0] % f
            return all(x % f == res for x in v) and min(v) >= res
        return _member(self.generators, v)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "generators": [list(g) for g in self.generators], "f": self.canonical_f}


@lru_cache(maxsize=200_000)
def _member(gens: tuple[Vec, ...], v: Vec) -> bool:
    if not any(v):
        return True
    for g in gens:
        w = tuple(a - b for a, b in zip(v, g))
        if min(w) >= 0 and _member(gens, w):
            return True
    return False


def _dickson_minimal(points: Iterable[Vec]) -> list[Vec]:
    pts = sorted(set(points), key=lambda v: (sum(v), v))
    out: list[Vec] = []
    for v in pts:
        if not any(all(a <= b for a, b in zip(m, v)) for m in out):
            out.append(v)
    return sorted(out)


def minimal_cosets(S: NSubmonoid, bound: int | None = None) -> list[Vec]:
    """Representatives t of the maximal classes t + S (those with no generator below t).

    For the canonical family this is {0 <= k_i < f, some k_i = 0}.  For general
    generators the set is finite exactly when every axis carries a generator;
    otherwise :class:`Inconclusive` is raised.
    """
    k = S.ambient_dim
    if S.canonical_f is not None:
        f = S.canonical_f
        return sorted(t for t in itertools.product(range(f), repeat=k) if min(t) == 0)
    axis = [None] * k
    for g in S.generators:
        support = [i for i, x in enumerate(g) if x]
        if len(support) == 1:
            i = support[0]
            axis[i] = g[i] if axis[i] is None else min(axis[i], g[i])
    if any(a is None for a in axis):
        bound = bound or 4 * k * max(max(g) for g in S.generators)
        raise Inconclusive(
            f"some axis has no pure generator, so the maximal classes are not finite within the search bound {bound}"
        )
    box = [range(a) for a in axis]
    return sorted(t for t in itertools.product(*box) if not any(all(g[i] <= t[i] for i in range(k)) for g in S.generators))


def relation_bound(S: NSubmonoid, t1: Sequence[int], t2: Sequence[int]) -> int | None:
    """A coordinate bound containing every minimal relation (canonical family only)."""
    if S.canonical_f is None:
        return None
    f = S.canonical_f
    dmax = max(abs(a - b) for a, b in zip(t1, t2))
    return max(2 + math.ceil(dmax / f), f + dmax)


def minimal_relations(S: NSubmonoid, t1: Sequence[int], t2: Sequence[int], bound: int | None = None) -> list[Vec]:
    """Dickson-minimal (r_1..r_k, r) with t1 + sum r_i g_i + r (1,...,1) in t2 + S.

    The g_i are the axis generators f e_i of the canonical family.  Minimal
    elements are certified inside :func:`relation_bound`; for other
    generators the search at ``bound`` and ``2 * bound`` must agree.
    """
    if S.canonical_f is None:
        raise PreconditionFailed("relations are parametrised by the canonical generators (fN)^k + (1..1)N")
    k = S.ambient_dim
    f = S.canonical_f
    t1 = tuple(int(x) for x in t1)
    t2 = tuple(int(x) for x in t2)
    if len(t1) != k or len(t2) != k:
        raise ValueError("representatives of the wrong length")
    certified = relation_bound(S, t1, t2)
    B = certified if bound is None else bound

    def search(B: int) -> list[Vec]:
        hits = []
        for rv in itertools.product(range(B + 1), repeat=k + 1):
            v = tuple(t1[i] + f * rv[i] + rv[k] - t2[i] for i in range(k))
            if S.contains(v):
                hits.append(rv)
        return _dickson_minimal(hits)

    found = search(B)
    if B >= certified:
        return found
    if search(2 * B) != found:
        raise Inconclusive(f"minimal relations not stable between bounds {B} and {2 * B}")
    return found


# ---------------------------------------------------------------------------
# semidirect products M x| N with M = N^k, N = <g> and the quotient by I = <g^f>


@dataclass(frozen=True)
class SemidirectPresentation:
    """M = N^k (additive), N = {g^n}, lambda(g) an integer matrix acting on column vectors of M.

    Optional quotient data: I = <g^f> and kappa(g^f) = ``kappa``.  Products
    follow (m, n)(m', n') = (m + lambda(n)(m'), n + n').
    """

    k: int
    action: tuple[tuple[int, ...], ...]
    f: int | None = None
    kappa: Vec | None = None

    def __post_init__(self) -> None:
        L = np.array(self.action, dtype=np.int64)
        if L.shape != (self.k, self.k) or (L < 0).any():
            raise ValueError("lambda(g) must be a k x k matrix with entries in N")
        object.__setattr__(self, "action", tuple(tuple(int(x) for x in row) for row in L))
        if (self.f is None) != (self.kappa is None):
            raise ValueError("quotient data needs both f and kappa")
        if self.kappa is not None:
            object.__setattr__(self, "kappa", tuple(int(x) for x in self.kappa))
            if len(self.kappa) != self.k or min(self.kappa) < 0:
                raise ValueError("kappa must lie in N^k")
            if self.f < 1:
                raise ValueError("f must be positive")

    @classmethod
    def glectic_unramified(cls, f: int) -> "SemidirectPresentation":
        """Frobenius exponents on P = Z/f, Frob shifting tau -> tau + 1, and Frob^f = (1,...,1)."""
        L = [[1 if i == (j + 1) % f else 0 for j in range(f)] for i in range(f)]
        return cls(f, tuple(map(tuple, L)), f, (1,) * f)

    def lam(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(np.array(self.action, dtype=np.int64), n)

    def apply(self, n: int, m: Sequence[int]) -> Vec:
        return tuple(int(x) for x in self.lam(n) @ np.asarray(m, dtype=np.int64))

    def mul(self, a: tuple[Vec, int], b: tuple[Vec, int]) -> tuple[Vec, int]:
        (m, n), (m2, n2) = a, b
        moved = self.apply(n, m2)
        return tuple(x + y for x, y in zip(m, moved)), n + n2

    def evaluate(self, word: Sequence) -> tuple[Vec, int]:
        """Product of a word of letters ``("m", i)`` (basis vector e_i) and ``"n"`` (the generator g)."""
        acc: tuple[Vec, int] = ((0,) * self.k, 0)
        for letter in word:
            if letter == "n" or letter == ("n",):
                acc = self.mul(acc, ((0,) * self.k, 1))
            elif isinstance(letter, (tuple, list)) and letter[0] == "m":
                e = [0] * self.k
                e[int(letter[1])] = 1
                acc = self.mul(acc, (tuple(e), 0))
            else:
                raise ValueError(f"unknown letter {letter!r}")
        return acc

    def check_quotient(self) -> None:
        """The conditions on (I, kappa), checked on generators; needs lambda(I) automorphisms."""
        if self.f is None:
            return
        Lf = self.lam(self.f)
        is_perm = (Lf.sum(axis=0) == 1).all() and (Lf.sum(axis=1) == 1).all() and set(np.unique(Lf)) <= {0, 1}
        if not is_perm:
            raise PreconditionFailed("lambda(g^f) is not an automorphism of N^k")
        # kappa(i) m = lambda(i)(m) kappa(i) with M commutative forces lambda(g^f) = id
        if not (Lf == np.eye(self.k, dtype=np.int64)).all():
            raise PreconditionFailed("kappa(i) m = lambda(i)(m) kappa(i) fails: lambda(g^f) is not the identity")
        # n i = i n for all n, so lambda(g)(kappa) = kappa
        if self.apply(1, self.kappa) != self.kappa:
            raise PreconditionFailed("lambda(g)(kappa(g^f)) differs from kappa(g^f)")


def sd_rewrite_step(P: SemidirectPresentation, elem: tuple[Vec, int]) -> tuple[Vec, int] | None:
    """One step (lambda(i)(m), i n) -> (kappa(i) m, n) with i = g^f, or None when no step applies."""
    m, n = elem
    if P.f is None or n < P.f:
        return None
    inv = P.lam(P.f).T  # permutation matrix, so the transpose is the inverse
    m0 = inv @ np.asarray(m, dtype=np.int64)
    return tuple(int(a + b) for a, b in zip(P.kappa, m0)), n - P.f


def sd_normal_form(P: SemidirectPresentation, word: Sequence | tuple[Vec, int], max_steps: int = 10_000) -> tuple[Vec, int]:
    """Canonical representative in (M x| N)/~I~: rewrite until the N-part lies below f."""
    P.check_quotient()
    elem = word if (isinstance(word, tuple) and len(word) == 2 and isinstance(word[1], int) and isinstance(word[0], tuple)) else P.evaluate(word)
    elem = (tuple(int(x) for x in elem[0]), int(elem[1]))
    for _ in range(max_steps):
        nxt = sd_rewrite_step(P, elem)
        if nxt is None:
            return elem
        elem = nxt
    raise Inconclusive(f"no normal form within {max_steps} rewrite steps")


def sd_closure(P: SemidirectPresentation, elem: tuple[Vec, int], radius: int) -> set[tuple[Vec, int]]:
    """All elements reachable by at most ``radius`` rewrites in either direction."""
    P.check_quotient()
    seen = {elem}
    frontier = [elem]
    Lf = P.lam(P.f)
    for _ in range(radius):
        nxt = []
        for m, n in frontier:
            cands = []
            fwd = sd_rewrite_step(P, (m, n))
            if fwd is not None:
                cands.append(fwd)
            # (kappa m', n) -> (lambda(i)(m'), i n) whenever m >= kappa
            rest = tuple(a - b for a, b in zip(m, P.kappa))
            if min(rest) >= 0:
                cands.append((tuple(int(x) for x in Lf @ np.array(rest, dtype=np.int64)), n + P.f))
            for c in cands:
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# plectic and glectic elements


def _compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """(a o b)(t) = a[b[t]]."""
    return tuple(int(a[int(t)]) for t in b)


def _inverse(a: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[int(v)] = i
    return tuple(out)


@dataclass(frozen=True)
class PlecticElement:
    """((phi^n, gamma), omega) in (Phi_{P,q} x Gamma_P) x| S_P; perm[t] = omega(t)."""

    phi: tuple[int, ...]
    units: tuple[PadicElement, ...]
    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.perm)
        if len(self.phi) != n or len(self.units) != n:
            raise ValueError("index set mismatch between Frobenius, units and permutation")
        if sorted(self.perm) != list(range(n)):
            raise ValueError("perm must be a permutation")
        if any(v < 0 for v in self.phi):
            raise ValueError("Frobenius exponents must be nonnegative")

    @classmethod
    def identity(cls, spec, n: int) -> "PlecticElement":
        one = spec.one()
        return cls((0,) * n, (one,) * n, tuple(range(n)))

    def to_json(self) -> dict:
        return {"phi": list(self.phi), "units": [list(u.coords) for u in self.units], "perm": list(self.perm)}


def _twist(perm: Sequence[int], values: Sequence) -> tuple:
    """plec(omega): (x_t)_t -> (x_{omega^-1 t})_t."""
    inv = _inverse(perm)
    return tuple(values[inv[t]] for t in range(len(perm)))


def plectic_mul(g: PlecticElement, h: PlecticElement) -> PlecticElement:
    if len(g.perm) != len(h.perm):
        raise ValueError("index set mismatch")
    phi = tuple(a + b for a, b in zip(g.phi, _twist(g.perm, h.phi)))
    units = tuple(a * b for a, b in zip(g.units, _twist(g.perm, h.units)))
    return PlecticElement(phi, units, _compose(g.perm, h.perm))


def plectic_act(g: PlecticElement, x: MultivarLaurent) -> MultivarLaurent:
    """Apply omega first (X_t -> X_omega(t)), then the Frobenius and Gamma part."""
    if len(g.perm) != x.ring.k:
        raise ValueError("index set mismatch between element and ring")
    y = act_permutation(x, g.perm)
    y = act_gamma(y, list(g.units))
    return act_phi(y, list(g.phi))


@dataclass(frozen=True)
class GlecticSigma:
    """sigma acting by X_t -> f^{d[t]}(X_{perm[t]}); ``factors`` records how a composite was formed."""

    perm: tuple[int, ...]
    d: tuple[int, ...]
    factors: tuple["GlecticSigma", ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)) or len(self.d) != n:
            raise ValueError("sigma needs a permutation and one degree per index")
        if any(v < 0 for v in self.d):
            raise ValueError("degrees must be nonnegative")

    @classmethod
    def identity(cls, n: int) -> "GlecticSigma":
        return cls(tuple(range(n)), (0,) * n)

    @classmethod
    def frobenius(cls, f: int, power: int = 1) -> "GlecticSigma":
        """Unramified case: Frob^n sends X_i to f^{floor((i + n)/f)}(X_{i+n mod f})."""
        return cls(tuple((i + power) % f for i in range(f)), tuple((i + power) // f for i in range(f)))

    def then(self, other: "GlecticSigma") -> "GlecticSigma":
        """other o self, with d_{other self, t} = d_{other, self t} + d_{self, t}."""
        perm = _compose(other.perm, self.perm)
        d = tuple(other.d[self.perm[t]] + self.d[t] for t in range(len(self.perm)))
        return GlecticSigma(perm, d, (self, other))

    def cocycle_ok(self) -> bool:
        if not self.factors:
            return True
        first, second = self.factors
        expect = first.then(second)
        return expect.perm == self.perm and expect.d == self.d and first.cocycle_ok() and second.cocycle_ok()

    def to_json(self) -> dict:
        return {"perm": list(self.perm), "d": list(self.d)}


def glectic_act(sigma: GlecticSigma, x: MultivarLaurent) -> MultivarLaurent:
    if not sigma.cocycle_ok():
        raise PreconditionFailed("stored composite violates d_{s2 s1, t} = d_{s2, s1 t} + d_{s1, t}")
    if len(sigma.perm) != x.ring.k:
        raise ValueError("index set mismatch between sigma and ring")
    if not any(sigma.d) and list(sigma.perm) == list(range(x.ring.k)):
        return x
    return act_glectic_substitution(x, sigma.perm, sigma.d)


@dataclass(frozen=True)
class GlecticElement:
    """((phi^n, gamma), sigma) with the same twisting rule as the plectic case."""

    phi: tuple[int, ...]
    units: tuple[PadicElement, ...]
    sigma: GlecticSigma

    def to_json(self) -> dict:
        return {"phi": list(self.phi), "units": [list(u.coords) for u in self.units], **self.sigma.to_json()}


def glectic_mul(g: GlecticElement, h: GlecticElement) -> GlecticElement:
    perm = g.sigma.perm
    phi = tuple(a + b for a, b in zip(g.phi, _twist(perm, h.phi)))
    units = tuple(a * b for a, b in zip(g.units, _twist(perm, h.units)))
    return GlecticElement(phi, units, h.sigma.then(g.sigma))


def glectic_element_act(g: GlecticElement, x: MultivarLaurent) -> MultivarLaurent:
    y = glectic_act(g.sigma, x)
    y = act_gamma(y, list(g.units))
    return act_phi(y, list(g.phi))

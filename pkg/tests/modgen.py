"""Random etale rank-d modules over F_q((X)) whose matrices are exact Laurent polynomials.

A = (P^(r))^-1 D P with P unipotent and D = diag(X^k_i), k_i multiples of r - 1.
Row vectors v with v^(r) A = v are then u P with u_i^r X^k_i = u_i, so fixed
points exist whenever some k_i is small.  Arithmetic here is an independent
dict-based implementation over F_q, used as a brute-force oracle.
"""

from __future__ import annotations

import itertools
import random

from plectica.gf import gf
from plectica.laurent import MultivarLaurent, RingSpecDelta
from plectica.phigamma import PhiGammaModule

Poly = dict  # exponent -> nonzero F_q element (integer encoding)


def padd(F, a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        v = F.add(out.get(e, 0), c)
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def pneg(F, a: Poly) -> Poly:
    return {e: F.neg(c) for e, c in a.items()}


def pmul(F, a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            out = padd(F, out, {ea + eb: F.mul(ca, cb)})
    return out


def pfrob(F, a: Poly, r: int) -> Poly:
    return {e * r: F.pow(c, r) for e, c in a.items()}


def mmul(F, A, B):
    n, m, k = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc: Poly = {}
            for t in range(m):
                acc = padd(F, acc, pmul(F, A[i][t], B[t][j]))
            row.append(acc)
        out.append(row)
    return out


def unipotent_inverse(F, P):
    """(I + N)^-1 = sum (-N)^k for strictly upper triangular N."""
    d = len(P)
    I = [[{0: 1} if i == j else {} for j in range(d)] for i in range(d)]
    N = [[P[i][j] if i != j else {} for j in range(d)] for i in range(d)]
    negN = [[pneg(F, x) for x in row] for row in N]
    out, term = I, I
    for _ in range(d):
        term = mmul(F, term, negN)
        out = [[padd(F, a, b) for a, b in zip(ra, rb)] for ra, rb in zip(out, term)]
    return out


def random_matrix(rng: random.Random, q: int, r: int, d: int):
    p = {2: 2, 3: 3, 4: 2}[q]
    F = gf(p, {2: 1, 3: 1, 4: 2}[q])
    P = [[{0: 1} if i == j else ({} if i > j else rng.choice([{}, {0: 1}, {1: 1}, {0: 1, 1: 1}])) for j in range(d)] for i in range(d)]
    ks = [rng.choice([0, -(r - 1), r - 1, 2 * (r - 1), 1]) for _ in range(d)]
    D = [[{ks[i]: 1} if i == j else {} for j in range(d)] for i in range(d)]
    Pr = [[pfrob(F, x, r) for x in row] for row in P]
    A = mmul(F, mmul(F, unipotent_inverse(F, Pr), D), P)
    return F, A, ks, P


def to_laurent(ring: RingSpecDelta, x: Poly) -> MultivarLaurent:
    f = ring.base.f_res
    p = ring.base.p
    terms = [((e,), [(c // p**i) % p for i in range(f)]) for e, c in x.items()]
    return MultivarLaurent.from_terms(ring, terms)


def residue_ring(q: int) -> RingSpecDelta:
    p, f = {2: (2, 1), 3: (3, 1), 4: (2, 2)}[q]
    return RingSpecDelta.residue_ring(p, f, ["x"], 10, 40)


def to_module(ring: RingSpecDelta, A, r: int) -> PhiGammaModule:
    M = tuple(tuple(to_laurent(ring, x) for x in row) for row in A)
    return PhiGammaModule(ring, len(A), {}, M, r)


def brute_force_fixed(F, A, r: int, box: tuple[int, int]) -> list[list[Poly]]:
    """Every row vector with F_q coefficients supported in the box and v^(r) A = v."""
    d = len(A)
    exps = list(range(box[0], box[1] + 1))
    slots = [(i, e) for i in range(d) for e in exps]
    out = []
    for values in itertools.product(range(F.order), repeat=len(slots)):
        v: list[Poly] = [{} for _ in range(d)]
        for (i, e), c in zip(slots, values):
            if c:
                v[i][e] = c
        vr = [pfrob(F, x, r) for x in v]
        image = mmul(F, [vr], A)[0]
        if image == v:
            out.append(v)
    return out

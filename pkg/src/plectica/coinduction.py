"""Tensor powers of finite fields and their description as coinduced rings.

Frobenius data is written additively in exponents of the r-power Frobenius:
with q = r^a and q' = r^b, the group generated by phi_{alpha,q} and
phi_{Delta,r} is a Z^Delta + Z (1,...,1), and the subgroup coming from q' is
b Z^Delta + Z (1,...,1).  An element v acts on the alpha-th factor as the
r^{v_alpha}-power map.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import linalg_fp
from .gf import FiniteField, gf
from .monoids import NSubmonoid, minimal_cosets, minimal_relations


def _log(base: int, n: int) -> int:
    k, m = 0, 1
    while m < n:
        m *= base
        k += 1
    if m != n:
        raise ValueError(f"{n} is not a power of {base}")
    return k


def _prime_of(q: int) -> int:
    for p in range(2, q + 1):
        if q % p == 0:
            return p
    raise ValueError("q must be at least 2")


@dataclass(frozen=True)
class TensorAlgebra:
    """The F_q-algebra F_{q'} (x) ... (x) F_{q'} with k factors.

    Elements are arrays of shape (m,) * k with entries in F_q (encoded as
    elements of F_{q'}), coordinates in the basis theta^{i_1} (x) ... (x) theta^{i_k}.
    """

    q: int
    q_prime: int
    k: int

    def __post_init__(self) -> None:
        p = _prime_of(self.q)
        a, b = _log(p, self.q), _log(p, self.q_prime)
        if b % a:
            raise ValueError(f"F_{self.q} is not a subfield of F_{self.q_prime}")

    @cached_property
    def p(self) -> int:
        return _prime_of(self.q)

    @cached_property
    def field(self) -> FiniteField:
        return gf(self.p, _log(self.p, self.q_prime))

    @cached_property
    def m(self) -> int:
        return _log(self.p, self.q_prime) // _log(self.p, self.q)

    @cached_property
    def base_field(self) -> list[int]:
        return self.field.subfield(_log(self.p, self.q))

    @cached_property
    def theta(self) -> int:
        return self.field.generator

    @cached_property
    def _coords_table(self) -> dict[int, tuple[int, ...]]:
        F = self.field
        table = {}
        powers = [F.pow(self.theta, i) for i in range(self.m)]
        for cs in itertools.product(self.base_field, repeat=self.m):
            x = 0
            for c, t in zip(cs, powers):
                x = F.add(x, F.mul(c, t))
            table[x] = cs
        if len(table) != self.q_prime:
            raise AssertionError("powers of theta are not an F_q-basis")
        return table

    def coords(self, x: int) -> tuple[int, ...]:
        """F_q-coordinates of an element of F_{q'} in the basis 1, theta, ..., theta^{m-1}."""
        return self._coords_table[x]

    @property
    def dim(self) -> int:
        return self.m**self.k

    def zero(self) -> np.ndarray:
        return np.zeros((self.m,) * self.k, dtype=np.int64)

    def one(self) -> np.ndarray:
        z = self.zero()
        z[(0,) * self.k] = 1
        return z

    def pure(self, xs: Sequence[int]) -> np.ndarray:
        """x_1 (x) ... (x) x_k."""
        F = self.field
        out = self.zero()
        cs = [self.coords(x) for x in xs]
        for idx in itertools.product(range(self.m), repeat=self.k):
            c = 1
            for a, i in enumerate(idx):
                c = F.mul(c, cs[a][i])
            out[idx] = c
        return out

    def add(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.field.vadd(x, y)

    def scale(self, c: int, x: np.ndarray) -> np.ndarray:
        return self.field.vmul(np.full_like(x, c), x)

    @cached_property
    def _structure(self) -> np.ndarray:
        """theta^i theta^j = sum_l c[i, j, l] theta^l with c in F_q."""
        F = self.field
        C = np.zeros((self.m, self.m, self.m), dtype=np.int64)
        for i in range(self.m):
            for j in range(self.m):
                C[i, j] = self.coords(F.pow(self.theta, i + j))
        return C

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        F = self.field
        C = self._structure
        out = self.zero()
        nz_x = [idx for idx in itertools.product(range(self.m), repeat=self.k) if x[idx]]
        nz_y = [idx for idx in itertools.product(range(self.m), repeat=self.k) if y[idx]]
        for I in nz_x:
            for J in nz_y:
                c = F.mul(int(x[I]), int(y[J]))
                # product of basis tensors: one structure vector per factor
                vecs = [C[I[a], J[a]] for a in range(self.k)]
                for L in itertools.product(range(self.m), repeat=self.k):
                    t = c
                    for a in range(self.k):
                        t = F.mul(t, int(vecs[a][L[a]]))
                        if not t:
                            break
                    if t:
                        out[L] = F.add(int(out[L]), t)
        return out

    def act(self, x: np.ndarray, r: int, v: Sequence[int]) -> np.ndarray:
        """Semilinear action: x_1 (x) ... -> x_1^{r^{v_1}} (x) ...; F_q scalars see r^{v_0} with v_0 = v[0]."""
        F = self.field
        out = self.zero()
        basis_img = [[F.pow(F.pow(self.theta, i), r ** (vv % self._order_exp(r))) for i in range(self.m)] for vv in v]
        for I in itertools.product(range(self.m), repeat=self.k):
            c = int(x[I])
            if not c:
                continue
            term = self.pure([basis_img[a][I[a]] for a in range(self.k)])
            # an F_q scalar is moved through the first factor
            cc = F.pow(c, r ** (v[0] % self._order_exp(r)))
            out = self.add(out, self.scale(cc, term))
        return out

    def _order_exp(self, r: int) -> int:
        return _log(r, self.q_prime) if self.q_prime > 1 else 1

    def elements(self):
        for vals in itertools.product(self.base_field, repeat=self.dim):
            yield np.array(vals, dtype=np.int64).reshape((self.m,) * self.k)

    def fp_basis(self) -> list[np.ndarray]:
        """A basis over F_p: c theta^I for c in an F_p-basis of F_q."""
        F = self.field
        a = _log(self.p, self.q)
        gen = next(c for c in sorted(self.base_field) if c and len({F.pow(c, j) for j in range(self.q - 1)}) == self.q - 1) if self.q > 2 else 1
        scalars = [F.pow(gen, j) for j in range(a)]
        out = []
        for I in itertools.product(range(self.m), repeat=self.k):
            for c in scalars:
                z = self.zero()
                z[I] = c
                out.append(z)
        return out

    def to_fp(self, x: np.ndarray) -> np.ndarray:
        """F_p-coordinates (digits of the F_{q'} encoding of each coefficient)."""
        return self.field.digits[x.reshape(-1)].reshape(-1)


def idempotent_count(A: TensorAlgebra) -> int:
    """Number of field factors of A: dim over F_p of {x : x^p = x}."""
    basis = A.fp_basis()
    cols = []
    for b in basis:
        xp = _power(A, b, A.p)
        cols.append(A.to_fp(A.add(xp, A.field.vneg(b))))
    # the absolute Frobenius is F_p-linear, so (Frob - id) has this matrix
    M = np.array(cols, dtype=np.int64).T
    ker = linalg_fp.nullspace(M, A.p)
    return int(ker.shape[0])


def _power(A: TensorAlgebra, x: np.ndarray, e: int) -> np.ndarray:
    out = A.one()
    for _ in range(e):
        out = A.mul(out, x)
    return out


# ---------------------------------------------------------------------------
# the comparison map


@dataclass(frozen=True)
class CoinductionReport:
    q: int
    q_prime: int
    r: int
    k: int
    representatives: tuple[tuple[int, ...], ...]
    dim_over_Fq: int
    factors: int
    idempotents: int
    bijective: bool
    equivariant: bool
    monoid_cosets: tuple[tuple[int, ...], ...] | None
    monoid_limit_dim_over_Fp: int | None
    monoid_map_ok: bool | None

    @property
    def ok(self) -> bool:
        checks = [self.bijective, self.equivariant, self.idempotents == self.factors]
        if self.monoid_map_ok is not None:
            checks.append(self.monoid_map_ok)
        return all(checks)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "q_prime": self.q_prime,
            "r": self.r,
            "delta": self.k,
            "representatives": [list(t) for t in self.representatives],
            "dim_over_Fq": self.dim_over_Fq,
            "factors": self.factors,
            "idempotents": self.idempotents,
            "bijective": self.bijective,
            "equivariant": self.equivariant,
            "monoid_cosets": None if self.monoid_cosets is None else [list(t) for t in self.monoid_cosets],
            "monoid_limit_dim_over_Fp": self.monoid_limit_dim_over_Fp,
            "monoid_map_ok": self.monoid_map_ok,
            "ok": self.ok,
        }


def psi_spe(A: TensorAlgebra, x: np.ndarray, r: int, v: Sequence[int]) -> int:
    """psi_spe(x) = prod_alpha x_alpha^{r^{v_alpha}}, extended additively; F_q scalars see r^{v_0}."""
    F = A.field
    e = A._order_exp(r)
    acc = 0
    theta_pows = [[F.pow(F.pow(A.theta, i), r ** (vv % e)) for i in range(A.m)] for vv in v]
    for I in itertools.product(range(A.m), repeat=A.k):
        c = int(x[I])
        if not c:
            continue
        t = F.pow(c, r ** (v[0] % e))
        for a in range(A.k):
            t = F.mul(t, theta_pows[a][I[a]])
        acc = F.add(acc, t)
    return acc


def _coset(rep_exps: Sequence[int], a: int, m: int) -> tuple[tuple[int, ...], int]:
    """Split v (in r-exponents, v in a Z^k + Z 1) as subgroup element + representative.

    Returns the representative (0, n_2, ..., n_k) with n in [0, m) and the
    exponent t such that the subgroup part acts on F_{q'} as r^t.
    """
    v0 = rep_exps[0]
    rep = tuple(((v - v0) // a) % m for v in rep_exps)
    return rep, v0


def coind_finite_field(q: int, q_prime: int, r: int, k: int, samples: int | None = None) -> CoinductionReport:
    """Compare the tensor power of F_{q'} over F_q with the coinduced ring.

    ``x -> (psi_spe(x))_psi`` over representatives psi of the quotient of
    Frobenius groups is checked for bijectivity (F_p-linear rank) and for
    equivariance under phi_{alpha,q} and phi_{Delta,r}.  When r = q the same
    map is also compared with the monoid-level finite limit over minimal
    cosets and minimal relations.
    """
    A = TensorAlgebra(q, q_prime, k)
    p = A.p
    if _prime_of(r) != p or (_log(p, q) % _log(p, r)):
        raise ValueError("r must be a power of p dividing q")
    a = _log(r, q)
    b = _log(r, q_prime)
    m = A.m
    F = A.field
    reps = [(0,) + rest for rest in itertools.product(range(m), repeat=k - 1)]

    def image(x: np.ndarray) -> list[int]:
        return [psi_spe(A, x, r, [a * n for n in rho]) for rho in reps]

    basis = A.fp_basis()
    images = [image(x) for x in basis]
    digits = np.array([[d for y in img for d in F.digits[y]] for img in images], dtype=np.int64)
    rank = linalg_fp.rank(digits, p)
    dim_fp = len(basis)
    target_fp = len(reps) * _log(p, q_prime)
    bijective = rank == dim_fp == target_fp

    # equivariance on the F_p-basis (the map and the actions are additive)
    gens = [tuple(a if i == j else 0 for j in range(k)) for i in range(k)] + [(1,) * k]
    equivariant = True
    for g in gens:
        for x, img in zip(basis, images):
            lhs = image(A.act(x, r, g))
            rhs = []
            for rho in reps:
                total = [a * n + gv for n, gv in zip(rho, g)]
                rep, t = _coset(total, a, m)
                y = img[reps.index(rep)]
                rhs.append(F.pow(y, r ** (t % b)))
            if lhs != rhs:
                equivariant = False
                break
        if not equivariant:
            break

    idem = idempotent_count(A)
    monoid_cosets = limit_dim = monoid_ok = None
    if r == q:
        S = NSubmonoid.canonical(b, k)
        monoid_cosets = tuple(minimal_cosets(S))
        limit_dim, monoid_ok = _monoid_limit(A, S, monoid_cosets, r, b, basis)
    return CoinductionReport(q, q_prime, r, k, tuple(reps), A.dim, len(reps), idem, bijective, equivariant,
                             monoid_cosets, limit_dim, monoid_ok)


def _monoid_limit(A: TensorAlgebra, S: NSubmonoid, cosets, r: int, b: int, basis) -> tuple[int, bool]:
    """Dimension over F_p of {(x_t) : s1(x_t1) = s2(x_t2) on minimal relations}, and whether x -> (t_spe(x)) lands there bijectively."""
    F = A.field
    p = A.p
    k = A.k
    nf = _log(p, A.q_prime)
    f = S.canonical_f
    # an element s = f*w + c*(1..1) of S acts on F_{q'} as the r^c-power map
    rels = []
    for i, t1 in enumerate(cosets):
        for j, t2 in enumerate(cosets):
            for rel in minimal_relations(S, t1, t2):
                s1 = tuple(f * rel[u] + rel[k] for u in range(k))
                s2 = tuple(t1[u] + s1[u] - t2[u] for u in range(k))
                c1 = rel[k]
                c2 = s2[0] % f
                rels.append((i, j, c1 % b, c2 % b))
    n = len(cosets)
    # F_p-linear equations on the digits of (x_t), one column per digit of each slot
    cols = []
    for t in range(n):
        for d in range(nf):
            x = p**d
            col = []
            for i, j, c1, c2 in rels:
                lhs = F.pow(x, r**c1) if i == t else 0
                rhs = F.pow(x, r**c2) if j == t else 0
                col.extend(int(v) for v in F.digits[F.sub(lhs, rhs)])
            cols.append(col)
    M = np.array(cols, dtype=np.int64).T if rels else np.zeros((0, n * nf), dtype=np.int64)
    limit_dim = n * nf - linalg_fp.rank(M, p) if M.size else n * nf
    ok = True
    imgs = []
    for x in basis:
        vec = [psi_spe(A, x, r, list(t)) for t in cosets]
        for i, j, c1, c2 in rels:
            if F.pow(vec[i], r**c1) != F.pow(vec[j], r**c2):
                ok = False
        imgs.append([d for y in vec for d in F.digits[y]])
    rank = linalg_fp.rank(np.array(imgs, dtype=np.int64), p)
    ok = ok and rank == len(basis) == limit_dim
    return int(limit_dim), ok

"""Finite free étale phi- and (phi, Gamma)-modules over truncated rings.

Convention: an operator with ring map s and matrix A acts on coordinate row
vectors by ``t -> s(t) . A``, i.e. ``phi(sum x_i e_i) = sum_j (sum_i s(x_i) a_ij) e_j``.
Composition then reads ``(s then t)`` has matrix ``t(A_s) . A_t``, so two
operators commute exactly when ``t(A_s) A_t = s(A_t) A_s``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import linalg_fp
from .errors import NotAUnit, NotEtale, PreconditionFailed, SpecMismatch
from .gf import gf
from .laurent import (
    MultivarLaurent,
    RingSpecDelta,
    _unit_split,
    act_gamma,
    act_phi,
    oe_inv,
    reduce_mod_pi,
)
from .padic import PadicElement, padic_valuation

Matrix = tuple[tuple[MultivarLaurent, ...], ...]
RingMap = Callable[[MultivarLaurent], MultivarLaurent]


# ---------------------------------------------------------------------------
# matrices over a RingSpecDelta


def mat_identity(ring: RingSpecDelta, d: int) -> Matrix:
    one, zero = MultivarLaurent.one(ring), MultivarLaurent.zero(ring)
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n, m = len(A), len(B[0])
    inner = len(B)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for k in range(1, inner):
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_map(A: Matrix, fn: RingMap) -> Matrix:
    return tuple(tuple(fn(x) for x in row) for row in A)


def mat_transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def mat_det(A: Matrix) -> MultivarLaurent:
    """Leibniz expansion; fine for the small ranks handled here."""
    d = len(A)
    total = None
    for perm in itertools.permutations(range(d)):
        term = A[0][perm[0]]
        for i in range(1, d):
            term = term * A[i][perm[i]]
        if _perm_sign(perm) < 0:
            term = -term
        total = term if total is None else total + term
    return total


def _minor(A: Matrix, i: int, j: int) -> Matrix:
    return tuple(tuple(x for c, x in enumerate(row) if c != j) for r, row in enumerate(A) if r != i)


def mat_inv(A: Matrix) -> Matrix:
    """Inverse through the adjugate; raises NotEtale when det is not a unit."""
    d = len(A)
    det = mat_det(A)
    try:
        det_inv = oe_inv(det)
    except NotAUnit as exc:
        raise NotEtale(f"determinant is not a unit: {exc}") from None
    if d == 1:
        return ((det_inv,),)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            cof = mat_det(_minor(A, j, i))
            if (i + j) % 2:
                cof = -cof
            row.append(cof * det_inv)
        out.append(tuple(row))
    return tuple(out)


def mat_kron(A: Matrix, B: Matrix) -> Matrix:
    rows = []
    for i in range(len(A)):
        for k in range(len(B)):
            rows.append(tuple(A[i][j] * B[k][l] for j in range(len(A[0])) for l in range(len(B[0]))))
    return tuple(rows)


def mat_congruent(A: Matrix, B: Matrix) -> bool:
    return all(x.congruent(y) for ra, rb in zip(A, B) for x, y in zip(ra, rb))


def is_unit(x: MultivarLaurent) -> bool:
    """Unit test at the stored truncation: a componentwise-minimal unit term exists."""
    try:
        _unit_split(x)
    except NotAUnit:
        return False
    return True


def _defect_valuation(x: MultivarLaurent) -> float:
    """Smallest coefficient valuation among the known terms of x (inf when none)."""
    if x.is_zero():
        return math.inf
    spec = x.ring.coef_spec
    vals = [padic_valuation(spec.element(c, x.ring.prec)) for c in x.coefs]
    return float(min(vals))


# ---------------------------------------------------------------------------
# the r-power Frobenius of E_Delta


def frobenius_power(x: MultivarLaurent, r: int) -> MultivarLaurent:
    """x -> x^r on the residue ring: exponents times r and coefficients raised to r."""
    ring = x.ring
    if not ring.residue:
        raise PreconditionFailed("the r-power Frobenius is only defined on the residue ring")
    F = gf(ring.base.p, ring.base.f_res)
    _check_r(ring, r)
    vals = F._from_digits(x.coefs)
    powered = F.vpow(vals, r)
    coefs = F.digits[powered]
    D = None if x.D is None else x.D * r
    return MultivarLaurent(ring, x.exps * r, coefs, D, nu=x.nu * r, check=False)


def _check_r(ring: RingSpecDelta, r: int) -> int:
    p, f = ring.base.p, ring.base.f_res
    s, n = 0, r
    while n % p == 0 and n > 1:
        n //= p
        s += 1
    if n != 1 or s == 0 or f % s:
        raise PreconditionFailed(f"r={r} must be a power of p={p} whose field F_r lies in F_q, q={p**f}")
    return s


# ---------------------------------------------------------------------------
# the module type


@dataclass(frozen=True)
class GammaOperator:
    """A generator of Gamma: one unit of O_K per variable, and its matrix."""

    gamma: tuple[PadicElement, ...]
    matrix: Matrix


@dataclass(frozen=True)
class PhiGammaModule:
    ring: RingSpecDelta
    rank: int
    phi_mats: Mapping[str, Matrix] = field(default_factory=dict)
    phi_global_mat: Matrix | None = None
    r: int | None = None
    gamma_mats: Mapping[str, GammaOperator] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        object.__setattr__(self, "phi_mats", {str(a): _as_matrix(m) for a, m in dict(self.phi_mats).items()})
        for a in self.phi_mats:
            self.ring.index(a)
        if self.phi_global_mat is not None:
            object.__setattr__(self, "phi_global_mat", _as_matrix(self.phi_global_mat))
            if self.r is None:
                raise ValueError("phi_global_mat needs r")
            _check_r(self.ring, self.r)
            if not self.ring.residue:
                raise PreconditionFailed("the r-Frobenius layer lives over the residue ring")
        for name, op in self.gamma_mats.items():
            if len(op.gamma) != self.ring.k:
                raise ValueError(f"gamma {name!r} needs one unit per variable")
            object.__setattr__(op, "matrix", _as_matrix(op.matrix))
        for name, A in self.operators().items():
            if len(A) != self.rank or any(len(row) != self.rank for row in A):
                raise ValueError(f"matrix of {name} is not {self.rank}x{self.rank}")
            for row in A:
                for x in row:
                    if not x.ring.same(self.ring):
                        raise SpecMismatch(f"entry of {name} lives in another ring")

    # constructors -----------------------------------------------------------
    @classmethod
    def trivial(cls, ring: RingSpecDelta, rank: int = 1, r: int | None = None, gammas: Mapping | None = None):
        I = mat_identity(ring, rank)
        gm = {n: GammaOperator(tuple(g), I) for n, g in (gammas or {}).items()}
        return cls(ring, rank, {a: I for a in ring.delta}, I if r is not None else None, r, gm)

    @classmethod
    def rank_one(cls, ring: RingSpecDelta, u: MultivarLaurent, r: int | None = None, alphas: Iterable[str] = ()):
        """Rank 1 with global matrix (u) (when r is given) and phi_alpha matrices (u) for ``alphas``."""
        A = ((u,),)
        return cls(ring, 1, {a: A for a in alphas}, A if r is not None else None, r)

    # views --------------------------------------------------------------------
    def operators(self) -> dict[str, Matrix]:
        ops = {f"phi:{a}": A for a, A in self.phi_mats.items()}
        if self.phi_global_mat is not None:
            ops["phi_global"] = self.phi_global_mat
        for name, op in self.gamma_mats.items():
            ops[f"gamma:{name}"] = op.matrix
        return ops

    def ring_map(self, name: str) -> RingMap:
        kind, _, arg = name.partition(":")
        if kind == "phi":
            return lambda x: act_phi(x, {arg: 1})
        if kind == "phi_global":
            r = self.r
            return lambda x: frobenius_power(x, r)
        if kind == "gamma":
            g = self.gamma_mats[arg].gamma
            return lambda x: act_gamma(x, list(g))
        raise KeyError(name)

    def global_matrix(self, r: int | None = None) -> Matrix:
        """Matrix of phi_{Delta,r}; with r = q it is the composite of all phi_alpha."""
        r = self.r if r is None else r
        if self.phi_global_mat is not None and r == self.r:
            return self.phi_global_mat
        if r == self.ring.q and self.ring.residue and set(self.phi_mats) == set(self.ring.delta):
            A = None
            for a in self.ring.delta:
                if A is None:
                    A = self.phi_mats[a]
                else:
                    A = mat_mul(mat_map(A, lambda x, a=a: act_phi(x, {a: 1})), self.phi_mats[a])
            return A
        raise PreconditionFailed(f"no matrix for the {r}-power Frobenius layer")

    def apply(self, name: str, v: Sequence[MultivarLaurent]) -> tuple[MultivarLaurent, ...]:
        """The semilinear operator ``name`` on a coordinate vector."""
        A = self.operators()[name]
        s = self.ring_map(name)
        row = (tuple(s(x) for x in v),)
        return mat_mul(row, A)[0]

    def to_json(self) -> dict:
        def mj(A):
            return [[x.to_json()["terms"] for x in row] for row in A]

        out = {"ring": self.ring.to_json(), "rank": self.rank, "phi": {a: mj(A) for a, A in sorted(self.phi_mats.items())}}
        if self.phi_global_mat is not None:
            out["phi_global"] = mj(self.phi_global_mat)
            out["r"] = self.r
        if self.gamma_mats:
            out["gamma"] = {
                n: {"gamma": [list(g.coords) for g in op.gamma], "matrix": mj(op.matrix)}
                for n, op in sorted(self.gamma_mats.items())
            }
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "PhiGammaModule":
        """Entries are term lists ``[[exp, coeff], ...]`` or expression strings."""
        from .expr import parse_element

        ring = RingSpecDelta.from_json(data["ring"])
        rank = int(data["rank"])

        def entry(x, where):
            if isinstance(x, str):
                return parse_element(ring, x)
            if isinstance(x, Mapping):
                return MultivarLaurent.from_json(ring, x)
            return MultivarLaurent.from_terms(ring, [(tuple(e) if isinstance(e, list) else e, c) for e, c in x])

        def mat(rows, where):
            if len(rows) != rank:
                raise ValueError(f"{where}: expected {rank} rows")
            return tuple(tuple(entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)) for i, row in enumerate(rows))

        phi = {a: mat(A, f"phi.{a}") for a, A in data.get("phi", {}).items()}
        glob = mat(data["phi_global"], "phi_global") if "phi_global" in data else None
        gammas = {}
        for name, g in data.get("gamma", {}).items():
            units = tuple(ring.base.element(c if isinstance(c, list) else [c]) for c in g["gamma"])
            gammas[name] = GammaOperator(units, mat(g["matrix"], f"gamma.{name}.matrix"))
        return cls(ring, rank, phi, glob, data.get("r"), gammas)


def _as_matrix(A) -> Matrix:
    return tuple(tuple(row) for row in A)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    etale: dict[str, bool]
    residuals: dict[str, float]

    @property
    def ok(self) -> bool:
        return all(self.etale.values()) and all(v == math.inf for v in self.residuals.values())

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "etale": dict(sorted(self.etale.items())),
            "residuals": {k: (None if v == math.inf else v) for k, v in sorted(self.residuals.items())},
        }


def module_validate(M: PhiGammaModule) -> ValidationReport:
    """Étaleness of each operator and the valuation of every pairwise commutation defect.

    A residual of inf means the defect vanishes at the stored truncation.
    """
    ops = M.operators()
    etale = {name: is_unit(mat_det(A)) for name, A in ops.items()}
    residuals = {}
    names = sorted(ops)
    for s, t in itertools.combinations(names, 2):
        lhs = mat_mul(mat_map(ops[s], M.ring_map(t)), ops[t])
        rhs = mat_mul(mat_map(ops[t], M.ring_map(s)), ops[s])
        val = math.inf
        for ra, rb in zip(lhs, rhs):
            for x, y in zip(ra, rb):
                bound = min(x.known_below, y.known_below)
                val = min(val, _defect_valuation((x - y).truncate(bound)))
        residuals[f"{s}|{t}"] = val
    return ValidationReport(etale, residuals)


def _require_etale(M: PhiGammaModule) -> None:
    for name, A in M.operators().items():
        if not is_unit(mat_det(A)):
            raise NotEtale(f"operator {name} has a non-unit determinant")


# ---------------------------------------------------------------------------
# monoidal structure


def _same_shape(M: PhiGammaModule, N: PhiGammaModule) -> None:
    if not M.ring.same(N.ring):
        raise SpecMismatch("modules over different rings")
    if set(M.phi_mats) != set(N.phi_mats) or (M.phi_global_mat is None) != (N.phi_global_mat is None) or M.r != N.r:
        raise SpecMismatch("modules carry different Frobenius operators")
    if set(M.gamma_mats) != set(N.gamma_mats):
        raise SpecMismatch("modules carry different Gamma generators")
    for n in M.gamma_mats:
        if [g.coords for g in M.gamma_mats[n].gamma] != [g.coords for g in N.gamma_mats[n].gamma]:
            raise SpecMismatch(f"Gamma generator {n!r} differs")


def module_tensor(M: PhiGammaModule, N: PhiGammaModule) -> PhiGammaModule:
    """Tensor product; structure matrices are Kronecker products."""
    _same_shape(M, N)
    _require_etale(M)
    _require_etale(N)
    phi = {a: mat_kron(M.phi_mats[a], N.phi_mats[a]) for a in M.phi_mats}
    glob = None if M.phi_global_mat is None else mat_kron(M.phi_global_mat, N.phi_global_mat)
    gm = {n: GammaOperator(op.gamma, mat_kron(op.matrix, N.gamma_mats[n].matrix)) for n, op in M.gamma_mats.items()}
    return PhiGammaModule(M.ring, M.rank * N.rank, phi, glob, M.r, gm)


def module_dual(M: PhiGammaModule) -> PhiGammaModule:
    """Dual module in the dual basis: every matrix becomes (A^-1)^T."""
    _require_etale(M)

    def dual(A: Matrix) -> Matrix:
        return mat_transpose(mat_inv(A))

    phi = {a: dual(A) for a, A in M.phi_mats.items()}
    glob = None if M.phi_global_mat is None else dual(M.phi_global_mat)
    gm = {n: GammaOperator(op.gamma, dual(op.matrix)) for n, op in M.gamma_mats.items()}
    return PhiGammaModule(M.ring, M.rank, phi, glob, M.r, gm)


def module_direct_sum(M: PhiGammaModule, N: PhiGammaModule) -> PhiGammaModule:
    _same_shape(M, N)
    zero = MultivarLaurent.zero(M.ring)

    def block(A: Matrix, B: Matrix) -> Matrix:
        top = [tuple(row) + (zero,) * N.rank for row in A]
        bottom = [(zero,) * M.rank + tuple(row) for row in B]
        return tuple(top + bottom)

    phi = {a: block(M.phi_mats[a], N.phi_mats[a]) for a in M.phi_mats}
    glob = None if M.phi_global_mat is None else block(M.phi_global_mat, N.phi_global_mat)
    gm = {n: GammaOperator(op.gamma, block(op.matrix, N.gamma_mats[n].matrix)) for n, op in M.gamma_mats.items()}
    return PhiGammaModule(M.ring, M.rank + N.rank, phi, glob, M.r, gm)


# ---------------------------------------------------------------------------
# the algebra S_D


Monomial = tuple[int, ...]
Polynomial = dict[Monomial, MultivarLaurent]


@dataclass(frozen=True)
class SDPresentation:
    """R[T_1..T_d] modulo R_j = sum_i b_ij T_i - T_j^r, j = 1..d."""

    rank: int
    r: int
    B: Matrix
    relations: tuple[Polynomial, ...]
    jacobian: tuple[tuple[Polynomial, ...], ...]

    @property
    def jacobian_is_B(self) -> bool:
        """Each dR_j/dT_i is the constant b_ij."""
        zero_mono = (0,) * self.rank
        for i in range(self.rank):
            for j in range(self.rank):
                poly = self.jacobian[i][j]
                if any(m != zero_mono for m, c in poly.items() if not c.is_zero()):
                    return False
                c = poly.get(zero_mono, MultivarLaurent.zero(self.B[i][j].ring))
                if not c.congruent(self.B[i][j]):
                    return False
        return True

    def evaluate(self, point: Sequence[MultivarLaurent]) -> tuple[MultivarLaurent, ...]:
        return tuple(poly_eval(R, point) for R in self.relations)

    def vanishes_at(self, point: Sequence[MultivarLaurent]) -> bool:
        return all(v.is_zero() for v in self.evaluate(point))

    def to_json(self) -> dict:
        rels = []
        for j in range(self.rank):
            rels.append([j, [[i, self.B[i][j].to_json()["terms"]] for i in range(self.rank)]])
        return {"rank": self.rank, "r": self.r, "relations": rels, "jacobian_equals_B": self.jacobian_is_B}


def poly_eval(poly: Polynomial, point: Sequence[MultivarLaurent]) -> MultivarLaurent:
    acc = None
    for mono, c in sorted(poly.items()):
        term = c
        for x, e in zip(point, mono):
            if e:
                term = term * (x**e)
        acc = term if acc is None else acc + term
    return acc if acc is not None else MultivarLaurent.zero(point[0].ring)


def poly_derivative(poly: Polynomial, i: int, p: int) -> Polynomial:
    """Formal partial derivative in T_i (integer multiples reduced in characteristic p)."""
    out: Polynomial = {}
    for mono, c in poly.items():
        e = mono[i]
        if e == 0 or e % p == 0:
            continue
        new = list(mono)
        new[i] -= 1
        key = tuple(new)
        term = c.scale(e)
        out[key] = out[key] + term if key in out else term
    return out


def build_SD(M: PhiGammaModule, r: int | None = None) -> SDPresentation:
    """Presentation of the finite étale algebra representing fixed points of phi_{Delta,r}."""
    ring = M.ring
    if not ring.residue:
        raise PreconditionFailed("build_SD works over the residue ring")
    r = M.r if r is None else r
    if r is None:
        raise PreconditionFailed("no Frobenius layer r given")
    _check_r(ring, r)
    A = M.global_matrix(r)
    if not is_unit(mat_det(A)):
        raise NotEtale("the r-Frobenius matrix is not invertible")
    B = mat_inv(A)
    d = M.rank
    relations = []
    for j in range(d):
        R: Polynomial = {}
        for i in range(d):
            mono = tuple(1 if t == i else 0 for t in range(d))
            R[mono] = B[i][j]
        mono = tuple(r if t == j else 0 for t in range(d))
        R[mono] = R.get(mono, MultivarLaurent.zero(ring)) - MultivarLaurent.one(ring)
        relations.append(R)
    p = ring.base.p
    jac = tuple(tuple(poly_derivative(relations[j], i, p) for j in range(d)) for i in range(d))
    return SDPresentation(d, r, B, tuple(relations), jac)


# ---------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True)
class FixedPointResult:
    basis: tuple[tuple[MultivarLaurent, ...], ...]
    r: int
    box: tuple[tuple[int, int], ...]
    dim_over_Fp: int
    exact: bool
    note: str

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "box": [list(b) for b in self.box],
            "dim": self.dim,
            "basis": [[x.to_json()["terms"] for x in v] for v in self.basis],
            "exact": self.exact,
            "note": self.note,
        }


def _entry_terms(x: MultivarLaurent, F) -> list[tuple[np.ndarray, int]]:
    vals = F._from_digits(x.coefs)
    return [(e, int(c)) for e, c in zip(x.exps, vals)]


def fixed_points(
    M: PhiGammaModule,
    r: int | None = None,
    search_bounds: Sequence[tuple[int, int]] | tuple[int, int] = (-4, 4),
    operators: str = "global",
) -> FixedPointResult:
    """F_r-basis of the vectors with support in the box fixed by phi_{Delta,r}.

    ``operators="all"`` additionally imposes phi_alpha(v) = v for every stored
    phi_alpha.  Both conditions are F_p-linear in the coefficients, so the
    answer is the null space of one F_p-linear system.  Completeness holds only
    inside the box.
    """
    ring = M.ring
    if not ring.residue:
        raise PreconditionFailed("fixed points are computed over the residue ring")
    r = M.r if r is None else r
    if r is None:
        r = ring.q
    s = _check_r(ring, r)
    p, f = ring.base.p, ring.base.f_res
    F = gf(p, f)
    k, d = ring.k, M.rank
    if isinstance(search_bounds[0], (int, np.integer)):
        box = ((int(search_bounds[0]), int(search_bounds[1])),) * k
    else:
        box = tuple((int(a), int(b)) for a, b in search_bounds)
    if len(box) != k:
        raise ValueError(f"box needs {k} ranges")
    points = [np.array(pt, dtype=np.int64) for pt in itertools.product(*[range(a, b + 1) for a, b in box])]

    # each operator: exponent map on the box and the entry terms of its matrix
    ops = [(np.full(k, r, dtype=np.int64), r, M.global_matrix(r))]
    if operators == "all":
        for a, A in M.phi_mats.items():
            scale = np.ones(k, dtype=np.int64)
            scale[ring.index(a)] = ring.q
            ops.append((scale, 1, A))
    elif operators != "global":
        raise ValueError("operators must be 'global' or 'all'")

    exact = all(x.is_exact for _, _, A in ops for row in A for x in row)
    nunk = d * len(points) * f
    rows: dict[tuple, int] = {}
    entries: list[tuple[int, int, int]] = []  # (row, column, value)

    def row_of(key) -> int:
        idx = rows.get(key)
        if idx is None:
            idx = rows[key] = len(rows)
        return idx

    for o, (scale, cpow, A) in enumerate(ops):
        terms = [[_entry_terms(x, F) for x in row] for row in A]
        known = min(x.known_below for row in A for x in row)
        limit = known + int((scale * np.array([a for a, _ in box])).sum())
        for i in range(d):
            for b_idx, b in enumerate(points):
                for t in range(f):
                    col = ((i * len(points)) + b_idx) * f + t
                    c = p**t
                    cimg = F.pow(c, cpow)
                    contrib: dict[tuple, int] = {}
                    for j in range(d):
                        for e, a in terms[i][j]:
                            out = tuple(int(v) for v in e + scale * b)
                            key = (o, j, out)
                            contrib[key] = F.add(contrib.get(key, 0), F.mul(cimg, a))
                    key = (o, i, tuple(int(v) for v in b))
                    contrib[key] = F.sub(contrib.get(key, 0), c)
                    for key, val in contrib.items():
                        if not exact and sum(key[2]) >= limit:
                            continue
                        digits = F.digits[val]
                        for u in range(f):
                            if digits[u]:
                                entries.append((row_of(key + (u,)), col, int(digits[u])))
    Mx = np.zeros((max(len(rows), 1), nunk), dtype=np.int64)
    for rr, cc, v in entries:
        Mx[rr, cc] = (Mx[rr, cc] + v) % p
    null = linalg_fp.nullspace(Mx, p)

    # F_r-basis: greedily add vectors not in the F_r-span of earlier picks
    sub = F.subfield(s)
    gen = next(a for a in sorted(sub) if a and len({F.pow(a, j) for j in range(r - 1)}) == r - 1)
    fr_basis = [F.pow(gen, j) for j in range(s)]
    span = np.zeros((0, nunk), dtype=np.int64)
    R, piv = linalg_fp.rref(span, p) if span.size else (span, np.zeros(0, dtype=np.int64))
    chosen = []
    for w in null:
        if span.shape[0] and linalg_fp.in_span(R, piv, w, p):
            continue
        chosen.append(w)
        scaled = [_scale_vector(w, c, F, f) for c in fr_basis]
        span = np.concatenate([span, np.array(scaled, dtype=np.int64)]) if span.size else np.array(scaled)
        R, piv = linalg_fp.rref(span, p)
    work = ring.widened(max(ring.neg_bound, -min(a for a, _ in box)), ring.wtop + r * sum(max(0, b) for _, b in box) + 1)
    basis = tuple(_vector_from_digits(w, work, points, d, f) for w in chosen)
    note = f"complete for supports in the box {list(map(list, box))}"
    if not exact:
        note += "; equations imposed only below the known degree of the matrices"
    return FixedPointResult(basis, r, box, int(null.shape[0]), exact, note)


def _scale_vector(w: np.ndarray, c: int, F, f: int) -> np.ndarray:
    groups = w.reshape(-1, f)
    vals = F._from_digits(groups)
    return F.digits[F.vmul(vals, np.full_like(vals, c))].reshape(-1)


def _vector_from_digits(w, ring, points, d, f) -> tuple[MultivarLaurent, ...]:
    groups = w.reshape(d, len(points), f)
    out = []
    for i in range(d):
        terms = {tuple(int(v) for v in points[b]): [int(x) for x in groups[i, b]] for b in range(len(points)) if groups[i, b].any()}
        out.append(MultivarLaurent.from_terms(ring, terms))
    return tuple(out)


# ---------------------------------------------------------------------------
# base change


def base_change(M: PhiGammaModule, descriptor: Mapping) -> PhiGammaModule:
    """Extension of scalars along identity, reduction mod pi, or a variable inclusion.

    ``{"kind": "include", "target": RingSpecDelta, "map": {source var: target var}}``
    sends X_a to X_map[a]; target variables outside the image get identity
    Frobenius matrices and trivial Gamma entries.
    """
    kind = descriptor.get("kind")
    if kind == "identity":
        out = M
    elif kind == "reduce":
        target = M.ring.residue_of()
        out = PhiGammaModule(
            target,
            M.rank,
            {a: mat_map(A, reduce_mod_pi) for a, A in M.phi_mats.items()},
            None,
            None,
            {n: GammaOperator(op.gamma, mat_map(op.matrix, reduce_mod_pi)) for n, op in M.gamma_mats.items()},
        )
    elif kind == "include":
        out = _include(M, descriptor["target"], descriptor["map"])
    else:
        raise ValueError(f"unknown base change kind {kind!r}")
    _require_etale(out)
    return out


def _include(M: PhiGammaModule, target: RingSpecDelta, mapping: Mapping[str, str]) -> PhiGammaModule:
    src = M.ring
    if target.coef_spec.key() != src.coef_spec.key() or target.prec != src.prec or target.residue != src.residue:
        raise SpecMismatch("inclusion must keep the coefficient ring")
    if sorted(mapping) != sorted(src.delta):
        raise ValueError("every source variable must be mapped")
    pos = [target.index(mapping[a]) for a in src.delta]
    if len(set(pos)) != len(pos):
        raise ValueError("the variable map must be injective")
    for t, a in enumerate(src.delta):
        if src.lt_polys[t] != target.lt_polys[pos[t]]:
            raise SpecMismatch(f"Lubin-Tate polynomials of {a} and {mapping[a]} differ, so Frobenius is not compatible")

    def move(x: MultivarLaurent) -> MultivarLaurent:
        exps = np.zeros((x.exps.shape[0], target.k), dtype=np.int64)
        nu = np.zeros(target.k, dtype=np.int64)
        for t in range(src.k):
            exps[:, pos[t]] = x.exps[:, t]
            nu[pos[t]] = x.nu[t]
        return MultivarLaurent(target, exps, x.coefs, x.D, nu=nu, check=False)

    I = mat_identity(target, M.rank)
    phi = {b: I for b in target.delta if b not in {mapping[a] for a in M.phi_mats}}
    for a, A in M.phi_mats.items():
        phi[mapping[a]] = mat_map(A, move)
    glob = None if M.phi_global_mat is None else mat_map(M.phi_global_mat, move)
    one = target.base.one()
    gm = {}
    for n, op in M.gamma_mats.items():
        g = [one] * target.k
        for t in range(src.k):
            g[pos[t]] = op.gamma[t]
        gm[n] = GammaOperator(tuple(g), mat_map(op.matrix, move))
    return PhiGammaModule(target, M.rank, phi, glob, M.r, gm)

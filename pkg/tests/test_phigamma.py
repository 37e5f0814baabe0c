import random

import pytest
from hypothesis import given, strategies as st

from modgen import brute_force_fixed, random_matrix, residue_ring, to_laurent, to_module
from plectica.errors import NotEtale, PreconditionFailed, SpecMismatch
from plectica.expr import parse_element
from plectica.laurent import MultivarLaurent, RingSpecDelta, act_phi
from plectica.padic import PadicRingSpec
from plectica.phigamma import (
    PhiGammaModule,
    base_change,
    build_SD,
    fixed_points,
    frobenius_power,
    mat_congruent,
    mat_identity,
    mat_inv,
    mat_mul,
    module_direct_sum,
    module_dual,
    module_tensor,
    module_validate,
)


def E(p=2, f=1, delta=("x",), neg=4, window=None):
    return RingSpecDelta.residue_ring(p, f, list(delta), neg, window)


def mat(ring, rows):
    return tuple(tuple(parse_element(ring, x) for x in row) for row in rows)


def test_validate_examples():
    R = E()
    assert module_validate(PhiGammaModule.trivial(R, 2, 2)).ok
    X = MultivarLaurent.variable(R, "x")
    assert module_validate(PhiGammaModule.rank_one(R, X, 2, ["x"])).ok
    OE = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 3), ["x"], 2)
    pi = MultivarLaurent.constant(OE, OE.base.pi(3))
    report = module_validate(PhiGammaModule.rank_one(OE, pi, None, ["x"]))
    assert not report.ok and report.etale == {"phi:x": False}


def test_validate_detects_broken_commutation():
    R = E(delta=("a", "b"), neg=2)
    Xa = MultivarLaurent.variable(R, "a")
    one = MultivarLaurent.one(R)
    M = PhiGammaModule(R, 1, {"a": ((one,),), "b": ((Xa,),)})
    report = module_validate(M)
    assert report.etale == {"phi:a": True, "phi:b": True}
    assert not report.ok


def test_tensor_with_trivial_and_dual():
    R = E()
    A = mat(R, [["0", "1"], ["X", "0"]])
    M = PhiGammaModule(R, 2, {"x": A}, A, 2)
    T = module_tensor(M, PhiGammaModule.trivial(R, 1, 2))
    assert mat_congruent(T.phi_mats["x"], A)
    D = module_dual(M)
    assert mat_congruent(D.phi_mats["x"], mat(R, [["0", "1"], ["X^-1", "0"]]))
    assert mat_congruent(module_dual(D).phi_mats["x"], A)
    u = module_dual(PhiGammaModule.rank_one(R, MultivarLaurent.variable(R, "x"), 2, ["x"]))
    assert u.phi_mats["x"][0][0] == MultivarLaurent.variable(R, "x", -1)
    assert module_validate(module_tensor(M, D)).ok


def test_dual_of_non_etale_rejected():
    OE = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 3), ["x"], 2)
    pi = MultivarLaurent.constant(OE, OE.base.pi(3))
    with pytest.raises(NotEtale):
        module_dual(PhiGammaModule.rank_one(OE, pi, None, ["x"]))


def test_sd_examples():
    R = E()
    sd = build_SD(PhiGammaModule.trivial(R, 2, 2))
    assert sd.jacobian_is_B and mat_congruent(sd.B, mat_identity(R, 2))
    u = parse_element(R, "1 + X")
    sd1 = build_SD(PhiGammaModule.rank_one(R, u, 2))
    assert sd1.B[0][0].congruent(parse_element(R, "1/(1+X)"))
    A = mat(R, [["0", "1"], ["X", "0"]])
    sd2 = build_SD(PhiGammaModule(R, 2, {}, A, 2))
    assert mat_congruent(sd2.B, mat(R, [["0", "X^-1"], ["1", "0"]]))
    assert sd2.jacobian_is_B
    rels = sd2.to_json()["relations"]
    assert rels[0] == [0, [[0, []], [1, [[[0], 1]]]]]
    assert rels[1] == [1, [[0, [[[-1], 1]]], [1, []]]]


def test_sd_needs_residue_ring():
    OE = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 3), ["x"], 2)
    with pytest.raises(PreconditionFailed):
        build_SD(PhiGammaModule.trivial(OE, 1))


def test_fixed_point_examples():
    R = E(neg=6, window=20)
    res = fixed_points(PhiGammaModule.trivial(R, 1, 2), 2, (-4, 4))
    assert res.dim == 1 and res.basis[0][0] == MultivarLaurent.one(R).with_ring(res.basis[0][0].ring)
    X = MultivarLaurent.variable(R, "x")
    res = fixed_points(PhiGammaModule.rank_one(R, X ** -1, 2), 2, (-4, 4))
    assert [v[0].terms().keys() for v in res.basis] == [{(1,): None}.keys()]
    assert fixed_points(PhiGammaModule.rank_one(R, X, 2), 2, (-4, 4)).basis[0][0].terms().keys() == {(-1,)}
    R3 = E(p=3, neg=6, window=20)
    assert fixed_points(PhiGammaModule.rank_one(R3, MultivarLaurent.variable(R3, "x"), 3), 3, (-4, 4)).dim == 0
    # x^3 X^-2 = x forces x in F_3 X
    res = fixed_points(PhiGammaModule.rank_one(R3, MultivarLaurent.variable(R3, "x", -2), 3), 3, (-4, 4))
    assert res.dim == 1 and set(res.basis[0][0].terms()) == {(1,)}


@pytest.mark.parametrize("r", [2, 4])
def test_fixed_points_over_f4_are_f_r(r):
    R = E(p=2, f=2, neg=4, window=16)
    res = fixed_points(PhiGammaModule.trivial(R, 1, r), r, (-2, 2))
    assert res.dim == 1 and res.dim_over_Fp == {2: 1, 4: 2}[r]


def test_two_variable_invariants():
    R = E(delta=("a", "b"), neg=4, window=16)
    res = fixed_points(PhiGammaModule.trivial(R, 1, 2), 2, (-4, 4), operators="all")
    assert res.dim == 1 and set(res.basis[0][0].terms()) == {(0, 0)}


@pytest.mark.parametrize("seed", range(10))
def test_sd_relations_vanish_on_brute_force_fixed_points(seed):
    rng = random.Random(seed)
    q = rng.choice([2, 3])
    d = rng.randint(1, 3 if q == 2 else 2)
    F, A, _, _ = random_matrix(rng, q, q, d)
    R = residue_ring(q)
    M = to_module(R, A, q)
    box = (-2, 2) if d * q < 6 else (-1, 2)
    found = brute_force_fixed(F, A, q, box)
    sd = build_SD(M)
    assert sd.jacobian_is_B
    assert mat_congruent(sd.B, mat_inv(M.global_matrix()))
    for v in found:
        assert sd.vanishes_at(tuple(to_laurent(R, x) for x in v))
    res = fixed_points(M, q, box)
    assert F.p ** res.dim_over_Fp == len(found)
    assert res.dim <= d


def test_direct_sum_fixed_points_add():
    R = E(neg=6, window=20)
    X = MultivarLaurent.variable(R, "x")
    M = PhiGammaModule.rank_one(R, X ** -1, 2)
    N = PhiGammaModule.rank_one(R, X, 2)
    S = module_direct_sum(M, N)
    dims = [fixed_points(T, 2, (-3, 3)).dim for T in (M, N, S)]
    assert dims[2] == dims[0] + dims[1] == 2


@given(st.integers(0, 10**6))
def test_fixed_points_are_fixed_and_closed_under_f_r(seed):
    rng = random.Random(seed)
    F, A, _, _ = random_matrix(rng, 2, 2, rng.randint(1, 2))
    R = residue_ring(2)
    M = to_module(R, A, 2)
    res = fixed_points(M, 2, (-2, 2))
    assert res.dim <= M.rank
    vectors = [tuple(x.with_ring(R) for x in v) for v in res.basis]
    if len(vectors) == 2:
        vectors.append(tuple(x + y for x, y in zip(*vectors)))
    for v in vectors:
        image = M.apply("phi_global", v)
        assert all(a.congruent(b) for a, b in zip(image, v))


def test_frobenius_power_on_coefficients():
    R = E(p=2, f=2)
    zeta = parse_element(R, "zeta")
    assert frobenius_power(zeta, 4) == zeta
    assert frobenius_power(zeta, 2) == zeta * zeta


def test_base_change_kinds():
    R = E()
    X = MultivarLaurent.variable(R, "x")
    M = PhiGammaModule.rank_one(R, X, None, ["x"])
    assert base_change(M, {"kind": "identity"}) is M
    T = E(delta=("a", "b"))
    N = base_change(M, {"kind": "include", "target": T, "map": {"x": "b"}})
    assert N.phi_mats["b"][0][0] == MultivarLaurent.variable(T, "b")
    assert N.phi_mats["a"][0][0] == MultivarLaurent.one(T)
    assert module_validate(N).ok
    OE = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 3), ["x"], 2)
    Y = MultivarLaurent.variable(OE, "x")
    two = MultivarLaurent.constant(OE, 2)
    red = base_change(PhiGammaModule.rank_one(OE, Y + two, None, ["x"]), {"kind": "reduce"})
    assert red.ring.residue and red.phi_mats["x"][0][0] == MultivarLaurent.variable(red.ring, "x")
    with pytest.raises(SpecMismatch):
        base_change(M, {"kind": "include", "target": E(p=3, delta=("a",)), "map": {"x": "a"}})


def test_json_roundtrip():
    R = E()
    A = mat(R, [["0", "1"], ["X", "0"]])
    M = PhiGammaModule(R, 2, {"x": A}, A, 2)
    back = PhiGammaModule.from_json(M.to_json())
    assert mat_congruent(back.phi_mats["x"], A) and back.r == 2


def test_gamma_operators_commute_with_phi_over_oe():
    OE = RingSpecDelta.standard(PadicRingSpec(3, 1, None, 2), ["x"], 5, 14)
    M = PhiGammaModule.trivial(OE, 1, None, {"g": [OE.base.from_int(2)]})
    assert module_validate(M).ok
    X = MultivarLaurent.variable(OE, "x")
    assert M.apply("phi:x", (X,))[0].congruent(act_phi(X, {"x": 1}))

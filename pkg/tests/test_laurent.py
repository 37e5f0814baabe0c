import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plectica.errors import SpecMismatch
from plectica.laurent import (
    MultivarLaurent,
    RingSpecDelta,
    act_gamma,
    act_permutation,
    act_phi,
    oe_arith,
    oe_inv,
    reduce_mod_pi,
    weak_membership,
)
from plectica.lubin_tate import LubinTatePoly, lt_inverse, lt_scalar
from plectica.padic import PadicRingSpec

Z2 = PadicRingSpec(2, 1, None, 4)
Q9 = PadicRingSpec(3, 2, None, 3)


def ring(spec=Z2, k=2, neg=2, window=None, f=None):
    return RingSpecDelta.standard(spec, ["a", "b"][:k] if k <= 2 else k, neg, window, spec.prec, f)


def sparse(R, rng, nterms=4, lo=-1, hi=3):
    terms = {}
    for _ in range(nterms):
        terms[tuple(rng.randrange(lo, hi) for _ in range(R.k))] = R.coef_spec.random(rng, R.prec)
    return MultivarLaurent.from_terms(R, list(terms.items()))


def naive_product(x, y):
    """Double-loop convolution over stored terms, then truncated like the ring does."""
    R = x.ring
    acc: dict = {}
    for ex, cx in x.terms().items():
        for ey, cy in y.terms().items():
            e = tuple(a + b for a, b in zip(ex, ey))
            acc[e] = acc[e] + cx * cy if e in acc else cx * cy
    return MultivarLaurent.from_terms(R, [(e, c) for e, c in acc.items() if sum(e) < R.wtop])


def test_basic_products():
    R = ring()
    Xa, Xb = MultivarLaurent.variable(R, "a"), MultivarLaurent.variable(R, "b")
    assert oe_arith(Xa, Xb, "mul") == MultivarLaurent.monomial(R, (1, 1))
    assert (MultivarLaurent.x_delta(R) * MultivarLaurent.x_delta(R, -1)) == MultivarLaurent.one(R)


@pytest.mark.parametrize("seed", range(8))
def test_product_matches_naive_convolution(seed):
    rng = random.Random(seed)
    R = ring()
    x, y = sparse(R, rng), sparse(R, rng)
    assert (x * y).congruent(naive_product(x, y))


def test_inverse_examples():
    R = ring()
    Xa = MultivarLaurent.variable(R, "a")
    assert oe_inv(Xa) == MultivarLaurent.variable(R, "a", -1)
    pi = MultivarLaurent.constant(R, Z2.pi(R.prec))
    u = MultivarLaurent.one(R) + pi * Xa
    expected = sum(
        (MultivarLaurent.monomial(R, (n, 0), Z2.from_int((-2) ** n, R.prec)) for n in range(1, 8)),
        MultivarLaurent.one(R),
    )
    assert oe_inv(u).congruent(expected)
    assert (u * oe_inv(u)).congruent(MultivarLaurent.one(R))


def test_inverse_of_gamma_image():
    R = ring(PadicRingSpec(3, 1, None, 4), k=1, neg=3, f=LubinTatePoly.cyclotomic(3, 4))
    X = MultivarLaurent.variable(R, 0)
    g = act_gamma(X, [R.base.from_int(4)])
    assert (g * oe_inv(g)).congruent(MultivarLaurent.one(R))


def test_phi_examples():
    R = ring(neg=5, window=16)
    Xb = MultivarLaurent.variable(R, "b")
    f = R.lt_polys[1]
    fXb = sum((MultivarLaurent.monomial(R, (0, i), R.coef_spec.element(c)) for i, c in enumerate(f.coeffs) if any(c)), MultivarLaurent.zero(R))
    assert act_phi(Xb, {"b": 1}).congruent(fXb)
    x = sparse(R, random.Random(3))
    assert act_phi(x, {"a": 0, "b": 0}) == x
    inv_img = act_phi(MultivarLaurent.x_delta(R, -1), {"a": 1})
    assert (inv_img * act_phi(MultivarLaurent.x_delta(R), {"a": 1})).congruent(MultivarLaurent.one(R))


def test_gamma_cyclotomic_closed_form():
    spec = PadicRingSpec(3, 1, None, 4)
    f = LubinTatePoly.cyclotomic(3, 4)
    R = ring(spec, k=2, f=f)
    Xb = MultivarLaurent.variable(R, "b")
    a = 7
    img = act_gamma(Xb, {"b": a})
    S = lt_scalar(f, a, R.wtop, 4)
    expected = MultivarLaurent.from_terms(R, [((0, e[0]), c) for e, c in S.terms().items() if e[0] < R.wtop])
    assert img.congruent(expected)
    x = sparse(R, random.Random(0), lo=0)
    assert act_gamma(x, {"a": 1, "b": 1}) == x


def test_gamma_minus_one_is_involution():
    spec = PadicRingSpec(2, 1, None, 4)
    R = ring(spec, k=1, f=LubinTatePoly.cyclotomic(2, 4))
    X = MultivarLaurent.variable(R, 0)
    minus = [-1]
    once = act_gamma(X, minus)
    inv = lt_inverse(R.lt_polys[0], R.wtop, 4)
    assert once.congruent(MultivarLaurent.from_terms(R, [(e, c) for e, c in inv.terms().items() if e[0] < R.wtop]))
    assert act_gamma(once, minus).congruent(X)


def test_permutation_is_exact_involution():
    R = ring()
    x = sparse(R, random.Random(5))
    assert act_permutation(act_permutation(x, [1, 0]), [1, 0]) == x


def test_weak_membership_examples():
    R = ring(neg=3)
    pi = MultivarLaurent.constant(R, Z2.pi(R.prec))
    assert weak_membership(pi**2, 2, 5)
    assert weak_membership(MultivarLaurent.x_delta(R, 3), 4, 3)
    x = pi**2 * MultivarLaurent.variable(R, "a", -1) + MultivarLaurent.x_delta(R, 3)
    assert weak_membership(x, 2, 3)
    assert not weak_membership(x, 3, 3)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_weak_membership_of_constants(n, k):
    spec = PadicRingSpec(2, 1, None, 5)
    R = RingSpecDelta.standard(spec, k, 1)
    for c in range(50):
        x = MultivarLaurent.constant(R, c)
        assert weak_membership(x, n, k) == (c % 2**n == 0 or c % 2**5 == 0 and n <= 5)


def test_reduce_mod_pi_examples():
    R = ring()
    pi = MultivarLaurent.constant(R, Z2.pi(R.prec))
    assert reduce_mod_pi(pi).is_zero()
    Xa, Xb = MultivarLaurent.variable(R, "a"), MultivarLaurent.variable(R, "b")
    assert reduce_mod_pi(Xa + pi * Xb) == MultivarLaurent.variable(R.residue_of(), "a")
    assert reduce_mod_pi(act_phi(Xa, {"a": 1})).congruent(MultivarLaurent.variable(R.residue_of(), "a", 2))


def test_ring_mismatch_rejected():
    with pytest.raises(SpecMismatch):
        MultivarLaurent.one(ring()) + MultivarLaurent.one(ring(Q9))


@pytest.mark.parametrize("spec", [PadicRingSpec(3, 1, None, 3), PadicRingSpec(3, 2, None, 2)], ids=["Q3", "Q9"])
def test_phi_gamma_commute(spec):
    # phi(X^-1) = X^-q (1 + pi X^(1-q))^-1 reaches down to X^(-q - (q-1)(prec-1))
    neg = spec.q + (spec.q - 1) * (spec.prec - 1)
    R = RingSpecDelta.standard(spec, ["a", "b"], neg, 2 * neg + 6, spec.prec)

    @given(st.integers(0, 10**6), st.sampled_from(["a", "b"]))
    def check(seed, alpha):
        rng = random.Random(seed)
        gamma = {a: spec.random(rng, unit=True) for a in R.delta}
        for x in (MultivarLaurent.variable(R, alpha), MultivarLaurent.x_delta(R, -1), sparse(R, rng, 3, 0, 3)):
            one = act_phi(act_gamma(x, gamma), {alpha: 1})
            two = act_gamma(act_phi(x, {alpha: 1}), gamma)
            assert one.congruent(two)

    check()


@given(st.integers(0, 10**6))
def test_ring_laws_property(seed):
    rng = random.Random(seed)
    R = ring()
    x, y, z = (sparse(R, rng, 3, 0, 3) for _ in range(3))
    assert ((x * y) * z).congruent(x * (y * z))
    assert (x * (y + z)).congruent(x * y + x * z)


def test_json_roundtrip():
    R = ring(Q9)
    x = sparse(R, random.Random(2))
    assert RingSpecDelta.from_json(R.to_json()).same(R)
    assert MultivarLaurent.from_json(R, x.to_json()) == x

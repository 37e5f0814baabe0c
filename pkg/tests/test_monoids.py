import itertools
import random

import pytest
from hypothesis import given, strategies as st

from plectica.errors import Inconclusive, PreconditionFailed
from plectica.laurent import MultivarLaurent, RingSpecDelta, act_phi
from plectica.lubin_tate import headroom
from plectica.monoids import (
    GlecticElement,
    GlecticSigma,
    NSubmonoid,
    PlecticElement,
    SemidirectPresentation,
    glectic_act,
    glectic_element_act,
    glectic_mul,
    minimal_cosets,
    minimal_relations,
    plectic_act,
    plectic_mul,
    sd_closure,
    sd_normal_form,
)
from plectica.padic import PadicRingSpec


def generic_member(gens, v):
    """Breadth-first membership from the generators alone."""
    reach = {(0,) * len(v)}
    frontier = list(reach)
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                w = tuple(a + b for a, b in zip(u, g))
                if all(a <= b for a, b in zip(w, v)) and w not in reach:
                    reach.add(w)
                    nxt.append(w)
        frontier = nxt
    return tuple(v) in reach


def enumerate_cosets(gens, k, box):
    """t in N^k with no nonzero element of S below it, found by listing S inside the box."""
    elems = [s for s in itertools.product(range(box), repeat=k) if any(s) and generic_member(gens, s)]
    return sorted(t for t in itertools.product(range(box), repeat=k) if not any(all(a <= b for a, b in zip(s, t)) for s in elems))


@pytest.mark.parametrize("f", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_minimal_coset_counts(f, k):
    S = NSubmonoid.canonical(f, k)
    reps = minimal_cosets(S)
    assert len(reps) == f**k - (f - 1) ** k
    assert reps == enumerate_cosets(S.generators, k, f + 1)


def test_minimal_coset_examples():
    assert minimal_cosets(NSubmonoid.canonical(2, 2)) == [(0, 0), (0, 1), (1, 0)]
    assert minimal_cosets(NSubmonoid.canonical(1, 3)) == [(0, 0, 0)]


def test_general_generators():
    S = NSubmonoid(2, ((3, 0), (0, 2), (1, 1)))
    assert minimal_cosets(S) == enumerate_cosets(S.generators, 2, 5)
    with pytest.raises(Inconclusive):
        minimal_cosets(NSubmonoid(2, ((1, 1), (2, 0))))


@pytest.mark.parametrize("f,k", [(2, 2), (3, 2), (2, 3)])
def test_canonical_membership_matches_generators(f, k):
    S = NSubmonoid.canonical(f, k)
    for v in itertools.product(range(2 * f + 2), repeat=k):
        assert S.contains(v) == generic_member(S.generators, v)


def brute_relations(f, k, t1, t2, bound):
    gens = NSubmonoid.canonical(f, k).generators
    hits = []
    for rv in itertools.product(range(bound + 1), repeat=k + 1):
        v = tuple(t1[i] + f * rv[i] + rv[k] - t2[i] for i in range(k))
        if min(v) >= 0 and generic_member(gens, v):
            hits.append(rv)
    return sorted(h for h in hits if not any(o != h and all(a <= b for a, b in zip(o, h)) for o in hits))


@pytest.mark.parametrize(
    "f,k,t1,t2",
    [(2, 2, (0, 1), (1, 0)), (2, 2, (0, 0), (0, 0)), (2, 1, (0,), (1,)), (3, 2, (0, 2), (1, 0)), (2, 3, (0, 1, 1), (1, 0, 0))],
)
def test_minimal_relations_against_search(f, k, t1, t2):
    assert minimal_relations(NSubmonoid.canonical(f, k), t1, t2) == brute_relations(f, k, t1, t2, 6)


def test_relation_examples():
    S = NSubmonoid.canonical(2, 2)
    assert minimal_relations(S, (0, 0), (0, 0)) == [(0, 0, 0)]
    assert minimal_relations(S, (0, 1), (1, 0)) == [(0, 0, 1), (1, 0, 0)]
    with pytest.raises(PreconditionFailed):
        minimal_relations(NSubmonoid(2, ((1, 0), (0, 1))), (0, 0), (0, 0))


def test_semidirect_without_quotient():
    P = SemidirectPresentation(2, ((0, 1), (1, 0)))
    assert sd_normal_form(P, [("m", 0), "n", ("m", 0)]) == ((1, 1), 1)


def test_glectic_desk_case():
    P = SemidirectPresentation.glectic_unramified(2)
    assert sd_normal_form(P, ((1, 1), 0)) == sd_normal_form(P, ((0, 0), 2))


def test_quotient_conditions():
    with pytest.raises(PreconditionFailed):
        sd_normal_form(SemidirectPresentation(2, ((1, 1), (0, 1)), 1, (1, 1)), ((0, 0), 1))
    with pytest.raises(PreconditionFailed):
        sd_normal_form(SemidirectPresentation(2, ((0, 1), (1, 0)), 2, (1, 0)), ((0, 0), 2))


@given(st.integers(2, 3), st.lists(st.integers(0, 3), min_size=3, max_size=3), st.integers(0, 7))
def test_normal_form_constant_on_rewrite_closure(f, m, n):
    P = SemidirectPresentation.glectic_unramified(f)
    elem = (tuple(m[:f]), n)
    nf = sd_normal_form(P, elem)
    assert nf[1] < f
    assert sd_normal_form(P, nf) == nf
    ball = sd_closure(P, elem, 3)
    assert {sd_normal_form(P, e) for e in ball} == {nf}


@given(st.integers(0, 10**6))
def test_normal_form_respects_products(seed):
    rng = random.Random(seed)
    P = SemidirectPresentation.glectic_unramified(3)
    a = (tuple(rng.randrange(3) for _ in range(3)), rng.randrange(6))
    b = (tuple(rng.randrange(3) for _ in range(3)), rng.randrange(6))
    assert sd_normal_form(P, P.mul(a, b)) == sd_normal_form(P, P.mul(sd_normal_form(P, a), sd_normal_form(P, b)))


# plectic and glectic -----------------------------------------------------------

SPEC = PadicRingSpec(3, 1, None, 2)
RING = RingSpecDelta.standard(SPEC, 3, 2, 20, 2)


def test_plectic_identity_and_transposition():
    R = RingSpecDelta.standard(SPEC, 2, 2, 16, 2)
    x = MultivarLaurent.variable(R, 0) * MultivarLaurent.variable(R, 1, 2)
    assert plectic_act(PlecticElement.identity(SPEC, 2), x) == x
    w = PlecticElement((0, 0), (SPEC.one(),) * 2, (1, 0))
    assert plectic_act(w, MultivarLaurent.variable(R, 0)) == MultivarLaurent.variable(R, 1)
    assert plectic_act(w, plectic_act(w, x)) == x


def test_mixed_plectic_ordering():
    one = (SPEC.one(),) * 3
    g = PlecticElement((1, 0, 0), one, (1, 2, 0))
    X0 = MultivarLaurent.variable(RING, 0)
    # permutation first, then phi on the target variable
    expected = act_phi(MultivarLaurent.variable(RING, 1), [0, 1, 0])
    g_tw = plectic_mul(PlecticElement((0, 0, 0), one, (1, 2, 0)), PlecticElement((1, 0, 0), one, (0, 1, 2)))
    assert plectic_act(g_tw, X0).congruent(expected)
    assert g_tw.phi == (0, 1, 0)
    assert not plectic_act(g, X0).congruent(expected)


@given(st.integers(0, 10**6))
def test_plectic_action_is_multiplicative(seed):
    rng = random.Random(seed)
    M = SPEC.prec + headroom(3, RING.wtop + 10)

    def element():
        perm = list(range(3))
        rng.shuffle(perm)
        units = tuple(SPEC.random(rng, M, unit=True) for _ in range(3))
        return PlecticElement(tuple(rng.randrange(2) for _ in range(3)), units, tuple(perm))

    g, h = element(), element()
    x = MultivarLaurent.variable(RING, 0) * MultivarLaurent.variable(RING, 1, 2) + MultivarLaurent.variable(RING, 2)
    assert plectic_act(plectic_mul(g, h), x).congruent(plectic_act(g, plectic_act(h, x)))


@pytest.mark.parametrize("f", [2, 3])
def test_glectic_frobenius_power_f_is_phi(f):
    spec = PadicRingSpec(2, f, None, 3)
    R = RingSpecDelta.standard(spec, f, 0, 12, 3)
    frob = GlecticSigma.frobenius(f, 1)
    sigma = GlecticSigma.identity(f)
    for _ in range(f):
        sigma = sigma.then(frob)
    assert sigma.cocycle_ok()
    assert sigma == GlecticSigma.frobenius(f, f)
    for i in range(f):
        X = MultivarLaurent.variable(R, i)
        assert glectic_act(sigma, X).congruent(act_phi(X, [1] * f))
        step = X
        for _ in range(f):
            step = glectic_act(frob, step)
        assert step.congruent(act_phi(X, [1] * f))


def test_glectic_unramified_f2_shifts():
    spec = PadicRingSpec(2, 2, None, 3)
    R = RingSpecDelta.standard(spec, 2, 0, 12, 3)
    frob = GlecticSigma.frobenius(2)
    assert glectic_act(frob, MultivarLaurent.variable(R, 0)) == MultivarLaurent.variable(R, 1)
    assert glectic_act(frob, MultivarLaurent.variable(R, 1)).congruent(act_phi(MultivarLaurent.variable(R, 0), [1, 0]))
    assert glectic_act(GlecticSigma.identity(2), MultivarLaurent.variable(R, 1)) == MultivarLaurent.variable(R, 1)


def test_broken_cocycle_rejected():
    a = GlecticSigma.frobenius(2)
    bad = GlecticSigma(a.perm, (0, 0), (a, a))
    R = RingSpecDelta.standard(PadicRingSpec(2, 2, None, 2), 2, 0, 8, 2)
    with pytest.raises(PreconditionFailed):
        glectic_act(bad, MultivarLaurent.variable(R, 0))


def test_glectic_element_product_acts_as_composite():
    spec = PadicRingSpec(2, 2, None, 2)
    R = RingSpecDelta.standard(spec, 2, 0, 10, 2)
    one = (spec.one(),) * 2
    g = GlecticElement((1, 0), one, GlecticSigma.frobenius(2))
    h = GlecticElement((0, 1), one, GlecticSigma.frobenius(2))
    x = MultivarLaurent.variable(R, 0) + MultivarLaurent.variable(R, 1, 2)
    gh = glectic_mul(g, h)
    assert gh.sigma.cocycle_ok()
    assert glectic_element_act(gh, x).congruent(glectic_element_act(g, glectic_element_act(h, x)))

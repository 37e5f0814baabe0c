import pytest

from plectica.expr import ExprError, parse_element, parse_padic, parse_polynomial
from plectica.laurent import MultivarLaurent, RingSpecDelta
from plectica.padic import PadicRingSpec


def test_polynomials():
    spec = PadicRingSpec(2, 1, None, 6)
    assert [c.to_int() for c in parse_polynomial(spec, "(1+T)^2-1")] == [0, 2, 1]
    assert [c.to_int() for c in parse_polynomial(spec, "T^4 + pi*T")] == [0, 2, 0, 0, 1]


def test_padic_values():
    spec = PadicRingSpec(3, 1, None, 4)
    assert parse_padic(spec, "1/2").to_int() == pow(2, -1, 81)
    assert parse_padic(spec, "-pi^2").to_int() == 81 - 9


def test_elements():
    R = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 4), ["a", "b"], 2, 12)
    x = parse_element(R, "a*b^-1 + X_Delta")
    assert x == MultivarLaurent.monomial(R, (1, -1)) + MultivarLaurent.monomial(R, (1, 1))


@pytest.mark.parametrize("text", ["a +", "__import__('os')", "a.b", "a ** b", "lambda: 1"])
def test_rejects_bad_syntax(text):
    R = RingSpecDelta.standard(PadicRingSpec(2, 1, None, 4), ["a", "b"], 2, 12)
    with pytest.raises(ExprError):
        parse_element(R, text)

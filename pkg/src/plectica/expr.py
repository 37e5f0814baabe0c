"""A small, safe arithmetic-expression reader built on :mod:`ast`.

Expressions use ``+ - * / ^`` (``**`` also works), integers, parentheses and
names from an environment.  Nothing is executed beyond these node types.
"""

from __future__ import annotations

import ast
from typing import Any, Callable, Mapping

from .laurent import MultivarLaurent, RingSpecDelta, oe_inv
from .padic import PadicElement, PadicRingSpec, padic_inv


class ExprError(ValueError):
    pass


def _parse(text: str) -> ast.AST:
    try:
        return ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {text!r}: {exc.msg}") from None


def evaluate(
    text: str,
    env: Mapping[str, Any],
    lift: Callable[[int], Any],
    invert: Callable[[Any], Any] | None = None,
) -> Any:
    """Evaluate ``text``; integers are passed through ``lift`` before mixing with values."""

    def int_value(node) -> int:
        val = walk(node, as_int=True)
        if not isinstance(val, int):
            raise ExprError("exponents must be integers")
        return val

    def walk(node, as_int=False):
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return node.value if as_int else lift(node.value)
        if isinstance(node, ast.Name):
            if as_int:
                raise ExprError(f"name {node.id!r} used where an integer is required")
            if node.id not in env:
                raise ExprError(f"unknown name {node.id!r}; known: {sorted(env)}")
            return env[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = walk(node.operand, as_int)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = walk(node.left, as_int)
                e = int_value(node.right)
                if e < 0:
                    if as_int:
                        raise ExprError("negative integer exponent")
                    if invert is None:
                        raise ExprError("negative exponents are not supported here")
                    return invert(base) ** (-e) if (-e) != 1 else invert(base)
                return base**e
            left = walk(node.left, as_int)
            right = walk(node.right, as_int)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if as_int:
                    raise ExprError("integer division is not supported")
                if invert is None:
                    raise ExprError("division is not supported here")
                return left * invert(right)
        raise ExprError(f"unsupported syntax: {ast.dump(node)[:60]}")

    return walk(_parse(text))


def parse_element(ring: RingSpecDelta, text: str) -> MultivarLaurent:
    """Element of a :class:`RingSpecDelta`; names are the variables, ``X_Delta``, ``pi`` and ``zeta``."""
    env: dict[str, Any] = {a: MultivarLaurent.variable(ring, a) for a in ring.delta}
    env.setdefault("X_Delta", MultivarLaurent.x_delta(ring))
    if ring.k == 1:
        env.setdefault("X", env[ring.delta[0]])
    spec = ring.coef_spec
    env.setdefault("pi", MultivarLaurent.constant(ring, spec.pi(ring.prec)))
    env.setdefault("zeta", MultivarLaurent.constant(ring, spec.zeta(ring.prec)))
    return evaluate(text, env, lambda n: MultivarLaurent.constant(ring, n), oe_inv)


def parse_padic(spec: PadicRingSpec, text: str, prec: int | None = None) -> PadicElement:
    """Element of O_K; names ``pi`` and ``zeta``."""
    env = {"pi": spec.pi(prec), "zeta": spec.zeta(prec)}
    return evaluate(text, env, lambda n: spec.from_int(n, prec), padic_inv)


class _Poly:
    """Dense univariate polynomial with PadicElement coefficients."""

    def __init__(self, coeffs: list[PadicElement]):
        self.c = coeffs

    def _lift(self, other):
        if isinstance(other, _Poly):
            return other
        return _Poly([other])

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.c), len(o.c))
        zero = (self.c or o.c)[0] * 0
        a = self.c + [zero] * (n - len(self.c))
        b = o.c + [zero] * (n - len(o.c))
        return _Poly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return _Poly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        zero = self.c[0] * 0
        out = [zero] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            for j, y in enumerate(o.c):
                out[i + j] = out[i + j] + x * y
        return _Poly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = _Poly([self.c[0] * 0 + 1])
        for _ in range(e):
            out = out * self
        return out


def parse_polynomial(spec: PadicRingSpec, text: str, var: str = "T", prec: int | None = None) -> list[PadicElement]:
    """Coefficient list (constant term first) of a polynomial in ``var`` over O_K."""
    one = spec.one(prec)
    zero = spec.zero(prec)
    env = {var: _Poly([zero, one]), "pi": _Poly([spec.pi(prec)]), "zeta": _Poly([spec.zeta(prec)])}
    poly = evaluate(text, env, lambda n: _Poly([spec.from_int(n, prec)]))
    coeffs = list(poly.c)
    while len(coeffs) > 1 and all(v == 0 for v in coeffs[-1].coords):
        coeffs.pop()
    return coeffs

"""Batch command-line front end.

Every subcommand reads one JSON document (``--input`` takes a path, ``-`` for
stdin, or the JSON text itself), runs a construction or a check and prints a
report.  Exit status: 0 on success, 1 when a check fails, 2 on bad input.
"""

from __future__ import annotations

import json
import math
import random
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping

import click

from . import errors
from .coinduction import TensorAlgebra, coind_finite_field
from .expr import ExprError, parse_element, parse_padic, parse_polynomial
from .hahn import HahnSeries, completion_classify, hahn_norm, hahn_valuation, is_field, random_hahn
from .laurent import (
    MultivarLaurent,
    RingSpecDelta,
    act_gamma,
    act_permutation,
    act_phi,
    weak_membership,
)
from .lubin_tate import DEFAULT_CAP, DEFAULT_PREC, LubinTatePoly, lt_add_law, lt_check_axioms, lt_scalar
from .monoids import (
    GlecticSigma,
    NSubmonoid,
    PlecticElement,
    SemidirectPresentation,
    glectic_act,
    minimal_cosets,
    minimal_relations,
    plectic_act,
    sd_normal_form,
)
from .padic import PadicRingSpec
from .phigamma import PhiGammaModule, build_SD, fixed_points, module_validate

DEFAULT_SEED = 0
_MISSING = object()


class InputError(Exception):
    """Bad input; ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(message)
        self.pointer = pointer or "/"
        self.message = message


class CheckFailed(Exception):
    """A check ran to completion and reported failure; carries the report."""

    def __init__(self, report: dict):
        super().__init__("check failed")
        self.report = report


@contextmanager
def _at(pointer: str) -> Iterator[None]:
    """Turn value errors raised while building an object into an input error at ``pointer``."""
    try:
        yield
    except InputError:
        raise
    except (ValueError, TypeError, KeyError, IndexError, ExprError, errors.SpecMismatch) as exc:
        raise InputError(pointer, str(exc) or type(exc).__name__) from None


def _get(data: Mapping, key: str, kind: type | tuple, path: str, default: Any = _MISSING) -> Any:
    pointer = f"{path}/{key}"
    if not isinstance(data, Mapping):
        raise InputError(path, "expected a JSON object")
    if key not in data or data[key] is None:
        if default is _MISSING:
            raise InputError(pointer, "required field is missing")
        return default
    value = data[key]
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool) and bool not in kinds:
        raise InputError(pointer, f"expected {'/'.join(k.__name__ for k in kinds)}, got a boolean")
    if not isinstance(value, kinds):
        raise InputError(pointer, f"expected {'/'.join(k.__name__ for k in kinds)}, got {type(value).__name__}")
    return value


def _int_list(data: Mapping, key: str, path: str, default: Any = _MISSING) -> list[int]:
    value = _get(data, key, list, path, default)
    if value is default and default is not _MISSING:
        return value
    for i, v in enumerate(value):
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputError(f"{path}/{key}/{i}", "expected an integer")
    return value


# ---------------------------------------------------------------------------
# object builders


def _padic_spec(data: Mapping, path: str, prec: int | None) -> PadicRingSpec:
    p = _get(data, "p", int, path)
    f_res = _get(data, "f_res", int, path, 1)
    eis = _get(data, "eis", list, path, None)
    prec = prec if prec is not None else _get(data, "prec", int, path, DEFAULT_PREC)
    with _at(path):
        return PadicRingSpec(p, f_res, None if eis is None else tuple(c if isinstance(c, int) else tuple(c) for c in eis), prec)


def _lt_poly(spec: PadicRingSpec, data: Mapping, path: str) -> LubinTatePoly:
    text = _get(data, "f", str, path, None)
    if text is None:
        return LubinTatePoly.default(spec)
    with _at(f"{path}/f"):
        return LubinTatePoly.from_elements(spec, parse_polynomial(spec, text, "T", spec.prec))


def _ring(data: Mapping, path: str, prec: int | None) -> RingSpecDelta:
    """Either the full serialized form or a short description (p, f_res, delta, ...)."""
    if isinstance(data.get("ring"), Mapping):
        with _at(path):
            ring = RingSpecDelta.from_json(data)
        return ring
    delta = _get(data, "delta", (int, list), path, 1)
    neg_bound = _get(data, "neg_bound", int, path, 2)
    window = _get(data, "window", int, path, None)
    if _get(data, "residue", bool, path, False):
        with _at(path):
            return RingSpecDelta.residue_ring(_get(data, "p", int, path), _get(data, "f_res", int, path, 1), delta, neg_bound, window)
    spec = _padic_spec(data, path, prec)
    f = _lt_poly(spec, data, path)
    with _at(path):
        return RingSpecDelta.standard(spec, delta, neg_bound, window, spec.prec, f)


def _element(ring: RingSpecDelta, data: Mapping, key: str, path: str, rng: random.Random) -> MultivarLaurent:
    value = _get(data, key, (str, dict, list), path)
    pointer = f"{path}/{key}"
    if value == "random":
        return _random_element(ring, rng)
    with _at(pointer):
        if isinstance(value, str):
            return parse_element(ring, value)
        if isinstance(value, dict):
            return MultivarLaurent.from_json(ring, value)
        return MultivarLaurent.from_terms(ring, [(tuple(e), c) for e, c in value])


def _random_element(ring: RingSpecDelta, rng: random.Random, nterms: int = 4) -> MultivarLaurent:
    spec = ring.coef_spec
    terms = {}
    for _ in range(nterms):
        e = tuple(rng.randrange(0, 3) for _ in range(ring.k))
        terms[e] = spec.random(rng, ring.prec)
    return MultivarLaurent.from_terms(ring, list(terms.items()))


def _module(data: Mapping, path: str) -> PhiGammaModule:
    body = data.get("module", data)
    where = f"{path}/module" if "module" in data else path
    if not isinstance(body, Mapping):
        raise InputError(where, "expected a module object")
    _get(body, "ring", dict, where)
    _get(body, "rank", int, where)
    with _at(where):
        return PhiGammaModule.from_json(body)


def _presentation(data: Mapping, path: str) -> SemidirectPresentation:
    if "glectic_f" in data:
        f = _get(data, "glectic_f", int, path)
        with _at(f"{path}/glectic_f"):
            return SemidirectPresentation.glectic_unramified(f)
    k = _get(data, "k", int, path)
    action = _get(data, "action", list, path)
    f = _get(data, "f", int, path, None)
    kappa = _get(data, "kappa", list, path, None)
    with _at(path):
        return SemidirectPresentation(k, tuple(tuple(r) for r in action), f, None if kappa is None else tuple(kappa))


def _submonoid(data: Mapping, path: str) -> NSubmonoid:
    if "generators" in data:
        gens = _get(data, "generators", list, path)
        dim = _get(data, "delta", int, path, len(gens[0]) if gens else 1)
        with _at(f"{path}/generators"):
            return NSubmonoid(dim, tuple(tuple(int(x) for x in g) for g in gens))
    f = _get(data, "f", int, path)
    k = _get(data, "delta", int, path)
    with _at(path):
        return NSubmonoid.canonical(f, k)


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


# ---------------------------------------------------------------------------
# subcommands; each takes (data, options) and returns a report


class Options:
    def __init__(self, seed: int, prec: int | None, cap: int | None):
        self.seed = seed
        self.prec = prec
        self.cap = cap
        self.rng = random.Random(seed)


def _lt_common(data: Mapping, opts: Options) -> tuple[LubinTatePoly, int, int]:
    spec = _padic_spec(data, "", opts.prec)
    f = _lt_poly(spec, data, "")
    cap = opts.cap if opts.cap is not None else _get(data, "cap", int, "", DEFAULT_CAP)
    if cap < 1:
        raise InputError("/cap", "cap must be positive")
    return f, cap, spec.prec


def cmd_lt_build(data: Mapping, opts: Options) -> dict:
    f, cap, prec = _lt_common(data, opts)
    out = {"ring": f.spec.to_json(), "f": f.to_json()["coeffs"], "cap": cap, "prec": prec}
    out["add_law"] = lt_add_law(f, cap, prec).to_json()["terms"]
    scalars = []
    for i, a in enumerate(_get(data, "scalars", list, "", [])):
        with _at(f"/scalars/{i}"):
            elem = parse_padic(f.spec, a, prec) if isinstance(a, str) else f.spec.from_int(int(a), prec)
        scalars.append({"a": list(elem.coords), "series": lt_scalar(f, elem, cap, prec).to_json()["terms"]})
    if scalars:
        out["scalars"] = scalars
    return out


def cmd_lt_check(data: Mapping, opts: Options) -> dict:
    f, cap, prec = _lt_common(data, opts)
    n = _get(data, "samples", int, "", 3)
    bound = f.spec.p ** prec
    pairs = [(opts.rng.randrange(bound), opts.rng.randrange(bound)) for _ in range(n)]
    report = lt_check_axioms(f, cap, prec, pairs, _get(data, "pi_powers", int, "", 2)).to_json()
    report["samples"] = [list(p) for p in pairs]
    if not report["ok"]:
        raise CheckFailed(report)
    return report


def _word_step(ring: RingSpecDelta, x: MultivarLaurent, step: Any, path: str) -> MultivarLaurent:
    if not isinstance(step, Mapping) or len(step) != 1:
        raise InputError(path, "each word letter is an object with one key: phi, gamma, perm, plectic or glectic")
    (kind, arg), = step.items()
    where = f"{path}/{kind}"
    with _at(where):
        if kind == "phi":
            return act_phi(x, arg)
        if kind == "gamma":
            spec = ring.base
            if isinstance(arg, Mapping):
                arg = {a: parse_padic(spec, v) if isinstance(v, str) else v for a, v in arg.items()}
            else:
                arg = [parse_padic(spec, v) if isinstance(v, str) else v for v in arg]
            return act_gamma(x, arg)
        if kind == "perm":
            return act_permutation(x, arg)
        if kind == "plectic":
            spec = ring.base
            units = tuple(parse_padic(spec, v) if isinstance(v, str) else spec.from_int(int(v)) for v in arg.get("units", [1] * ring.k))
            g = PlecticElement(tuple(arg.get("phi", [0] * ring.k)), units, tuple(arg.get("perm", range(ring.k))))
            return plectic_act(g, x)
        if kind == "glectic":
            if "frobenius" in arg:
                sigma = GlecticSigma.frobenius(ring.k, int(arg["frobenius"]))
            else:
                sigma = GlecticSigma(tuple(arg["perm"]), tuple(arg["d"]))
            return glectic_act(sigma, x)
    raise InputError(path, f"unknown letter {kind!r}")


def cmd_ring_act(data: Mapping, opts: Options) -> dict:
    ring = _ring(_get(data, "ring", dict, ""), "/ring", opts.prec)
    x = _element(ring, data, "element", "", opts.rng)
    start = x
    for i, step in enumerate(_get(data, "word", list, "")):
        x = _word_step(ring, x, step, f"/word/{i}")
    return {"element": start.to_json(), "result": x.to_json()}


def cmd_ring_member(data: Mapping, opts: Options) -> dict:
    ring = _ring(_get(data, "ring", dict, "", {"p": 2}), "/ring", opts.prec)
    x = _element(ring, data, "element", "", opts.rng)
    n = _get(data, "n", int, "")
    k = _get(data, "k", int, "")
    return {"n": n, "k": k, "member": weak_membership(x, n, k)}


def cmd_mod_validate(data: Mapping, opts: Options) -> dict:
    report = module_validate(_module(data, "")).to_json()
    if not report.get("ok", False):
        raise CheckFailed(report)
    return report


def cmd_mod_sd(data: Mapping, opts: Options) -> dict:
    M = _module(data, "")
    return build_SD(M, _get(data, "r", int, "", None)).to_json()


def cmd_mod_fixed(data: Mapping, opts: Options) -> dict:
    M = _module(data, "")
    box = _int_list(data, "box", "", [-4, 4])
    if len(box) != 2 or box[0] > box[1]:
        raise InputError("/box", "box is [low, high] with low <= high")
    operators = _get(data, "operators", str, "", "global")
    if operators not in ("global", "all"):
        raise InputError("/operators", "operators is 'global' or 'all'")
    return fixed_points(M, _get(data, "r", int, "", None), tuple(box), operators).to_json()


def cmd_monoid_cosets(data: Mapping, opts: Options) -> dict:
    S = _submonoid(data, "")
    reps = minimal_cosets(S, _get(data, "bound", int, "", None))
    return {"monoid": S.to_json(), "count": len(reps), "representatives": [list(t) for t in reps]}


def cmd_monoid_relations(data: Mapping, opts: Options) -> dict:
    S = _submonoid(data, "")
    t1 = _int_list(data, "t1", "")
    t2 = _int_list(data, "t2", "")
    if len(t1) != S.ambient_dim or len(t2) != S.ambient_dim:
        raise InputError("/t1", f"t1 and t2 need {S.ambient_dim} coordinates")
    rels = minimal_relations(S, t1, t2, _get(data, "bound", int, "", None))
    return {"t1": t1, "t2": t2, "count": len(rels), "relations": [list(t) for t in rels]}


def cmd_coind_check(data: Mapping, opts: Options) -> dict:
    q = _get(data, "q", int, "")
    q_prime = _get(data, "q_prime", int, "")
    r = _get(data, "r", int, "", q)
    k = _get(data, "delta", int, "", 2)
    with _at(""):
        report = coind_finite_field(q, q_prime, r, k).to_json()
    if not report["ok"]:
        raise CheckFailed(report)
    return report


def cmd_sd_normal_form(data: Mapping, opts: Options) -> dict:
    P = _presentation(data, "")
    out = []
    for i, w in enumerate(_get(data, "words", list, "", [])):
        with _at(f"/words/{i}"):
            word = [("m", int(c[1:])) if isinstance(c, str) and c.startswith("m") else c for c in w]
            m, n = sd_normal_form(P, word)
        out.append({"word": w, "normal_form": [list(m), n]})
    for i, e in enumerate(_get(data, "elements", list, "", [])):
        with _at(f"/elements/{i}"):
            m, n = sd_normal_form(P, (tuple(int(v) for v in e[0]), int(e[1])))
        out.append({"element": e, "normal_form": [list(m), n]})
    return {"k": P.k, "f": P.f, "kappa": None if P.kappa is None else list(P.kappa), "results": out}


def cmd_hahn_norm(data: Mapping, opts: Options) -> dict:
    c = _int_list(data, "c", "", None)
    if "series" in data:
        body = _get(data, "series", dict, "")
        with _at("/series"):
            x = HahnSeries.from_json(body)
        weights = c or [1] * x.nvars
        return {"valuation": hahn_valuation(x, weights), "norm": hahn_norm(x, weights)}
    # random submultiplicativity suite
    q = _get(data, "q", int, "")
    with _at(""):
        A = TensorAlgebra(q, _get(data, "q_prime", int, "", q), _get(data, "factors", int, "", 1))
    nvars = _get(data, "nvars", int, "", 2)
    weights = c or [1] * nvars
    count = _get(data, "pairs", int, "", 20)
    violations = strict = 0
    field = is_field(A)
    for _ in range(count):
        x = random_hahn(opts.rng, A, nvars)
        y = random_hahn(opts.rng, A, nvars)
        vx, vy, vxy = hahn_valuation(x, weights), hahn_valuation(y, weights), hahn_valuation(x * y, weights)
        lower = vx + vy
        if vxy < lower:
            violations += 1
        elif vxy != lower:
            strict += 1
    report = {
        "pairs": count,
        "field": field,
        "submultiplicative_violations": violations,
        "strict_inequalities": strict,
        "ok": violations == 0 and (strict == 0 or not field),
    }
    if not report["ok"]:
        raise CheckFailed(report)
    return report


def cmd_hahn_classify(data: Mapping, opts: Options) -> dict:
    family = data.get("family", data)
    if not isinstance(family, Mapping) or not ("laws" in family or "support" in family):
        raise InputError("/family", "a family needs 'laws' or 'support'")
    return completion_classify(family)


COMMANDS: dict[str, Callable[[Mapping, Options], dict]] = {
    "lt-build": cmd_lt_build,
    "lt-check": cmd_lt_check,
    "ring-act": cmd_ring_act,
    "ring-member": cmd_ring_member,
    "mod-validate": cmd_mod_validate,
    "mod-sd": cmd_mod_sd,
    "mod-fixed": cmd_mod_fixed,
    "monoid-cosets": cmd_monoid_cosets,
    "monoid-relations": cmd_monoid_relations,
    "coind-check": cmd_coind_check,
    "sd-normal-form": cmd_sd_normal_form,
    "hahn-norm": cmd_hahn_norm,
    "hahn-classify": cmd_hahn_classify,
}


# ---------------------------------------------------------------------------
# dispatch


def load_input(source: str | None) -> Any:
    if source is None:
        return {}
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        path = Path(source)
        if not path.exists():
            raise InputError("/", f"input file {source!r} does not exist")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("/", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def run(command: str, data: Any, seed: int = DEFAULT_SEED, prec: int | None = None, cap: int | None = None) -> tuple[int, dict]:
    """Run one subcommand on parsed input; returns (exit status, report)."""
    if command not in COMMANDS:
        return 2, {"error": "InputError", "field": "/", "message": f"unknown command {command!r}"}
    if not isinstance(data, Mapping):
        return 2, {"error": "InputError", "field": "/", "message": "input must be a JSON object"}
    opts = Options(seed, prec, cap)
    try:
        report = COMMANDS[command](data, opts)
        return 0, {"command": command, "status": "ok", "report": _jsonable(report)}
    except InputError as exc:
        return 2, {"command": command, "error": "InputError", "field": exc.pointer, "message": exc.message}
    except CheckFailed as exc:
        return 1, {"command": command, "status": "failed", "report": _jsonable(exc.report)}
    except errors.PlecticaError as exc:
        return 1, {"command": command, "status": "failed", "error": type(exc).__name__, "message": str(exc)}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2)
    lines: list[str] = []

    def walk(prefix: str, v: Any) -> None:
        if isinstance(v, Mapping) and v:
            for key in sorted(v):
                walk(f"{prefix}.{key}" if prefix else str(key), v[key])
        else:
            lines.append(f"{prefix}: {json.dumps(v, sort_keys=True)}")

    walk("", report)
    return "\n".join(lines)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("command", type=click.Choice(sorted(COMMANDS)))
@click.option("--input", "source", help="JSON file, '-' for stdin, or inline JSON.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Seed for randomized suites.")
@click.option("--prec", type=int, default=None, help="Override the p-adic precision.")
@click.option("--cap", type=int, default=None, help="Override the degree cap for series.")
def main(command: str, source: str | None, fmt: str, seed: int, prec: int | None, cap: int | None) -> None:
    """Run COMMAND on the given input and print a report."""
    try:
        data = load_input(source)
    except InputError as exc:
        status, report = 2, {"command": command, "error": "InputError", "field": exc.pointer, "message": exc.message}
    else:
        status, report = run(command, data, seed, prec, cap)
    click.echo(render(report, fmt))
    sys.exit(status)


if __name__ == "__main__":
    main()

"""Partial recursive functions as data processing specifications.

A function spec is written as text::

    zero | succ | proj(m, n) | compose(g, h1, ..., hk) | primrec(g, h) | minimize(g)

plus names from ``LIBRARY`` (add, mul, pred, monus, absdiff, sq, sqdiff),
which are themselves built only from the basic functions and operators.

The representation of an n-ary function reads start sets ``A1..An`` holding
one argument each and leaves its value in ``Z``.  Argument order follows
the usual recursion scheme: ``primrec(g, h)`` computes ``f(0, x) = g(x)``
and ``f(y+1, x) = h(y, f(y, x), x)``; ``minimize(g)`` computes the least y
with ``g(y, x) = 0``.

Specs built only from zero, succ, proj and compose become one image term.
Everything else runs nested specifications through ``Call`` definitions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..setdef.syntax import App, Formula, Sym, parse_formula
from .engine import DPS, Call, Definition, DpsError, DpsResult, OpenSystem, const, image, run_dps

LIBRARY: dict[str, str] = {
    "add": "primrec(proj(1,1), compose(succ, proj(2,3)))",
    "mul": "primrec(zero, compose(add, proj(2,3), proj(3,3)))",
    "pred": "primrec(zero, proj(1,2))",
    # monus(x, y) = x - y cut at 0, via the recursion on y of x - y
    "monus": "compose(primrec(proj(1,1), compose(pred, proj(2,3))), proj(2,2), proj(1,2))",
    "absdiff": "compose(add, monus, compose(monus, proj(2,2), proj(1,2)))",
    "sq": "compose(mul, proj(1,1), proj(1,1))",
    # sqdiff(y, x) = |x - y*y|
    "sqdiff": "compose(absdiff, proj(2,2), compose(sq, proj(1,2)))",
}


@dataclass(frozen=True)
class PrSpec:
    op: str                      # zero succ proj compose primrec minimize
    args: tuple = ()

    def __str__(self) -> str:
        if self.op in ("zero", "succ"):
            return self.op
        return f"{self.op}({', '.join(map(str, self.args))})"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(.))")


def parse_pr(text: str) -> PrSpec:
    toks = [(m.group(1), m.group(2), m.group(3)) for m in _TOKEN.finditer(text) if m.group(0).strip()]
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None, None)

    def expect(ch: str) -> None:
        nonlocal pos
        if peek()[2] != ch:
            raise DpsError(f"malformed spec {text!r}: expected {ch!r}")
        pos += 1

    def node() -> PrSpec:
        nonlocal pos
        _, word, _ = peek()
        if word is None:
            raise DpsError(f"malformed spec {text!r}: expected a function")
        pos += 1
        if word in ("zero", "succ"):
            return PrSpec(word)
        if word in LIBRARY:
            return parse_pr(LIBRARY[word])
        if word == "proj":
            expect("(")
            m = number()
            expect(",")
            n = number()
            expect(")")
            if not 1 <= m <= n:
                raise DpsError(f"proj({m},{n}) needs 1 <= m <= n")
            return PrSpec("proj", (m, n))
        if word in ("compose", "primrec", "minimize"):
            expect("(")
            parts = [node()]
            while peek()[2] == ",":
                pos += 1
                parts.append(node())
            expect(")")
            need = {"primrec": 2, "minimize": 1}.get(word)
            if (need and len(parts) != need) or (word == "compose" and len(parts) < 2):
                raise DpsError(f"{word} given {len(parts)} components")
            return PrSpec(word, tuple(parts))
        raise DpsError(f"unknown function {word!r}")

    def number() -> int:
        nonlocal pos
        num = peek()[0]
        if num is None:
            raise DpsError(f"malformed spec {text!r}: expected a number")
        pos += 1
        return int(num)

    spec = node()
    if pos != len(toks):
        raise DpsError(f"malformed spec {text!r}: trailing input")
    return spec


def arity(spec: PrSpec) -> int | None:
    """Number of arguments; None for zero, which takes any number."""
    if spec.op == "zero":
        return None
    if spec.op == "succ":
        return 1
    if spec.op == "proj":
        return spec.args[1]
    if spec.op == "compose":
        g, hs = spec.args[0], spec.args[1:]
        ga = arity(g)
        if ga is not None and ga != len(hs):
            raise DpsError(f"{spec}: outer function takes {ga} arguments, given {len(hs)}")
        known = {arity(h) for h in hs} - {None}
        if len(known) > 1:
            raise DpsError(f"{spec}: inner functions disagree on arity")
        return known.pop() if known else None
    if spec.op == "primrec":
        ga, ha = arity(spec.args[0]), arity(spec.args[1])
        if ha is not None and ga is not None and ha != ga + 2:
            raise DpsError(f"{spec}: step function must take two more arguments than the base")
        if ga is not None:
            return ga + 1
        return ha - 1 if ha is not None else None
    if spec.op == "minimize":
        ga = arity(spec.args[0])
        if ga is not None and ga < 1:
            raise DpsError(f"{spec}: needs a function of at least one argument")
        return ga - 1 if ga is not None else None
    raise DpsError(f"unknown operator {spec.op}")


def as_term(spec: PrSpec, args: list):
    """Image term of a spec built from basic functions and composition, else None."""
    if spec.op == "zero":
        return App("o", tuple(args))
    if spec.op == "succ":
        return App("s", tuple(args)) if len(args) == 1 else None
    if spec.op == "proj":
        return args[spec.args[0] - 1] if len(args) == spec.args[1] else None
    if spec.op == "compose":
        inner = [as_term(h, args) for h in spec.args[1:]]
        if any(t is None for t in inner):
            return None
        return as_term(spec.args[0], inner)
    return None


def _inputs(n: int) -> tuple[str, ...]:
    return tuple(f"A{i}" for i in range(1, n + 1))


def _apply(spec: PrSpec, target: str, sources: list[str], when: Formula | None = None,
           extra: list[tuple[str, str]] | None = None) -> Definition:
    """``target = spec(sources)`` as an image term when possible, else a nested call."""
    names = [f"x{i}" for i in range(1, len(sources) + 1)]
    term = as_term(spec, [Sym(v) for v in names])
    if term is not None:
        sel = list(zip(names, sources))
        if not sel:
            # a constant still needs something to range over
            sel = extra or []
        return image(target, term, sel, when=when)
    return Definition(target, call=Call(build_pr(spec, len(sources)), tuple(sources)), when=when)


def build_pr(spec: PrSpec | str, n: int | None = None, name: str | None = None) -> DPS:
    """Representation of ``spec`` reading ``A1..An`` and writing ``Z``."""
    if isinstance(spec, str):
        name = name or spec.strip()
        spec = parse_pr(spec)
    a = arity(spec)
    if n is None:
        n = a
    if n is None or (a is not None and a != n):
        raise DpsError(f"{spec}: cannot take {n} arguments" if n is not None else f"{spec}: arity is not determined")
    if n < 1:
        raise DpsError(f"{spec}: a representation needs at least one argument")
    xs = _inputs(n)
    name = name or str(spec)

    if as_term(spec, [Sym(f"x{i}") for i in range(1, n + 1)]) is not None:
        return DPS([OpenSystem("F1", xs, [_apply(spec, "Z", list(xs))])], xs, name=name)

    if spec.op == "compose":
        g, hs = spec.args[0], spec.args[1:]
        hnames = [f"H{j}" for j in range(1, len(hs) + 1)]
        f1 = OpenSystem("F1", xs, [_apply(h, hn, list(xs)) for h, hn in zip(hs, hnames)])
        f2 = OpenSystem("F2", tuple(hnames), [_apply(g, "Z", hnames)])
        return DPS([f1, f2], xs, name=name)

    if spec.op == "primrec":
        g, h = spec.args
        params = list(xs[1:])
        guard = parse_formula("all v in A1: all w in I: w < v")
        f1 = OpenSystem("F1", xs, [_apply(g, "Z", params, extra=[("y", "A1")]), const("I", (0,))])
        step = image("I", App("s", (Sym("u"),)), [("u", "I")], condition=guard)
        f2 = OpenSystem("F2", ("I",), [step, _apply(h, "Z", ["I", "Z"] + params, when=guard)])
        return DPS([f1, f2], xs, name=name)

    if spec.op == "minimize":
        (g,) = spec.args
        guard = parse_formula("all y in U: y != 0")
        found = parse_formula("ex y in U: y = 0")
        f1 = OpenSystem("F1", xs, [const("I", (0,))])
        f2 = OpenSystem("F2", ("I",), [
            image("I", App("s", (Sym("u"),)), [("u", "I")], condition=guard),
            _apply(g, "U", ["I"] + list(xs)),
            # K lags I by one step, so it names the argument U was computed for
            image("K", Sym("u"), [("u", "I")]),
            image("Z", Sym("u"), [("u", "K")], condition=found),
        ])
        return DPS([f1, f2], xs, name=name)

    raise DpsError(f"{spec}: unsupported operator")


def run_pr(spec: PrSpec | str, args: tuple[int, ...], fuel: int = 20_000, seed: int = 0) -> tuple[int | None, DpsResult]:
    """Run the representation; the value is None when no answer was produced."""
    dps = build_pr(spec, len(args))
    start = {f"A{i}": frozenset({v}) for i, v in enumerate(args, 1)}
    res = run_dps(dps, start, fuel=fuel, seed=seed)
    z = res.family.get("Z", frozenset())
    if res.status != "quiescent" or len(z) != 1:
        return None, res
    return next(iter(z)), res


__all__ = ["LIBRARY", "PrSpec", "arity", "as_term", "build_pr", "parse_pr", "run_pr"]

"""Perfect loop nests with polynomial index expressions.

Text format::

    param N = 8
    for k = 1 .. N
    for i = 1 .. k
    a[k, i] = f(a[k - 1, i], b[i*i], x)

Each ``for`` line opens one more nesting level; bounds may use parameters and
outer counters.  Statement lines assign one array element (or scalar) from an
uninterpreted function of array references.  Index expressions are parsed by
sympy; calls inside an index (``b[g(i)]``) stay opaque.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

import sympy as sp

from ..schema.model import Assign, Call, Cond, IndexExpr, Loop, Proc, Schema, SchemaError, Var

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class NestError(ValueError):
    pass


def sympify_expr(text: str) -> sp.Expr:
    """Parse an index/bound expression; every identifier becomes a Symbol or Function."""
    local: dict[str, Any] = {}
    for m in _IDENT.finditer(text):
        name = m.group(0)
        rest = text[m.end():].lstrip()
        local[name] = sp.Function(name) if rest.startswith("(") else sp.Symbol(name, integer=True)
    try:
        return sp.sympify(text, locals=local)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise NestError(f"cannot parse expression {text!r}: {exc}") from None


def split_top(text: str, sep: str = ",") -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur.strip())
    return parts


@dataclass(frozen=True)
class Ref:
    """Array reference ``name[e1, ..., ek]`` (k = 0 for scalars)."""

    array: str
    index: tuple[sp.Expr, ...] = ()

    def __str__(self) -> str:
        if not self.index:
            return self.array
        return f"{self.array}[{', '.join(str(e) for e in self.index)}]"

    def at(self, env: dict[sp.Symbol, int]) -> tuple:
        return tuple(int(e.subs(env)) for e in self.index)


@dataclass(frozen=True)
class Statement:
    label: str
    target: Ref
    func: str
    reads: tuple[Ref, ...]

    def __str__(self) -> str:
        return f"{self.target} = {self.func}({', '.join(str(r) for r in self.reads)})"


@dataclass
class Domain:
    """Iteration domain: nested bounds, each affine in outer counters and params."""

    counters: tuple[str, ...]
    bounds: tuple[tuple[sp.Expr, sp.Expr], ...]
    params: dict[str, int] = field(default_factory=dict)

    @property
    def symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(c, integer=True) for c in self.counters)

    def _env(self) -> dict:
        return {sp.Symbol(k, integer=True): v for k, v in self.params.items()}

    def bound_values(self, prefix: tuple[int, ...]) -> tuple[int, int]:
        env = self._env()
        env.update(zip(self.symbols, prefix))
        lo, hi = self.bounds[len(prefix)]
        try:
            return int(lo.subs(env)), int(hi.subs(env))
        except TypeError:
            raise NestError(f"unbound symbol in bounds {lo} .. {hi}") from None

    def points(self) -> Iterator[tuple[int, ...]]:
        """All points in lexicographic order."""
        def rec(prefix):
            if len(prefix) == len(self.counters):
                yield prefix
                return
            lo, hi = self.bound_values(prefix)
            for v in range(lo, hi + 1):
                yield from rec(prefix + (v,))
        yield from rec(())

    def contains(self, point: tuple[int, ...]) -> bool:
        if len(point) != len(self.counters):
            return False
        for d in range(len(point)):
            lo, hi = self.bound_values(point[:d])
            if not lo <= point[d] <= hi:
                return False
        return True

    def box(self) -> list[tuple[int, int]]:
        pts = list(self.points())
        if not pts:
            return [(0, -1)] * len(self.counters)
        return [(min(p[d] for p in pts), max(p[d] for p in pts)) for d in range(len(self.counters))]


@dataclass
class LoopNest:
    domain: Domain
    body: list[Statement]
    param_defaults: dict[str, int] = field(default_factory=dict)

    @property
    def counters(self) -> tuple[str, ...]:
        return self.domain.counters

    def with_params(self, **params: int) -> "LoopNest":
        merged = {**self.param_defaults, **self.domain.params, **params}
        return LoopNest(Domain(self.domain.counters, self.domain.bounds, merged), self.body,
                        self.param_defaults)


def _parse_ref(text: str) -> Ref:
    text = text.strip()
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[(.*)\])?", text, re.S)
    if not m:
        raise NestError(f"bad array reference {text!r}")
    name, inner = m.group(1), m.group(2)
    if inner is None:
        return Ref(name)
    if "[" in inner:
        raise NestError(f"nested indexing in {text!r}")
    return Ref(name, tuple(sympify_expr(e) for e in split_top(inner)))


def parse_nest(text: str, **params: int) -> LoopNest:
    counters: list[str] = []
    bounds: list[tuple[sp.Expr, sp.Expr]] = []
    body: list[Statement] = []
    defaults: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if m := re.fullmatch(r"param\s+([A-Za-z_]\w*)\s*(?:=\s*(-?\d+))?", line):
            if m.group(2) is not None:
                defaults[m.group(1)] = int(m.group(2))
            continue
        if m := re.fullmatch(r"for\s+([A-Za-z_]\w*)\s*=\s*(.+?)\s*\.\.\s*(.+)", line):
            if body:
                raise NestError(f"line {lineno}: only perfect nests are supported")
            counters.append(m.group(1))
            bounds.append((sympify_expr(m.group(2)), sympify_expr(m.group(3))))
            continue
        if "=" in line:
            lhs, rhs = line.split("=", 1)
            m = re.fullmatch(r"([A-Za-z_]\w*)\s*\((.*)\)", rhs.strip(), re.S)
            if not m:
                raise NestError(f"line {lineno}: right side must be f(args)")
            reads = tuple(_parse_ref(a) for a in split_top(m.group(2)))
            body.append(Statement(f"S{len(body) + 1}", _parse_ref(lhs), m.group(1), reads))
            continue
        raise NestError(f"line {lineno}: cannot parse {line!r}")
    if not counters:
        raise NestError("nest has no loops")
    merged = {**defaults, **params}
    return LoopNest(Domain(tuple(counters), tuple(bounds), merged), body, defaults)


def format_nest(nest: LoopNest) -> str:
    lines = [f"param {k} = {v}" for k, v in sorted(nest.domain.params.items())]
    for c, (lo, hi) in zip(nest.counters, nest.domain.bounds):
        lines.append(f"for {c} = {lo} .. {hi}")
    lines.extend(str(s) for s in nest.body)
    return "\n".join(lines) + "\n"


# --- direct evaluation ---------------------------------------------------------

def term_function(name: str) -> Callable:
    return lambda *args: f"{name}({', '.join(str(a) for a in args)})"


def run_nest(nest: LoopNest, memory: dict, functions: dict[str, Callable] | None = None) -> dict:
    """Execute the nest directly in lexicographic order; memory maps (array, idx) to values.

    Unknown functions build terms.  A read of a cell missing from memory is
    an error (no implicit zero).
    """
    functions = functions or {}
    mem = dict(memory)
    syms = nest.domain.symbols
    for point in nest.domain.points():
        env = dict(zip(syms, point))
        for st in nest.body:
            args = []
            for r in st.reads:
                key = (r.array, r.at(env))
                if key not in mem:
                    raise NestError(f"read of undefined cell {r.array}{list(key[1])} at {point}")
                args.append(mem[key])
            fn = functions.get(st.func) or term_function(st.func)
            mem[(st.target.array, st.target.at(env))] = fn(*args)
    return mem


# --- lowering to a schema ------------------------------------------------------

def lower_to_schema(nest: LoopNest) -> tuple[Schema, dict[str, Callable], dict[str, Callable]]:
    """Translate the nest into an L-schema with explicit counters.

    Returns the schema plus the function and predicate tables (bounds, index
    maps, bound tests) needed to run it under a concrete interpretation.
    The kernel functions themselves are left to the caller.
    """
    syms = nest.domain.symbols
    params = {sp.Symbol(k, integer=True): v for k, v in nest.domain.params.items()}
    funcs: dict[str, Callable] = {"inc": lambda v: v + 1}
    preds: dict[str, Callable] = {}
    procs: dict[str, Proc] = {}
    depth = len(syms)

    def lam(expr, nvars, name):
        f = sp.lambdify(syms[:nvars], expr.subs(params), "math")
        funcs[name] = lambda *a: int(f(*a))
        return name

    def index_var(ref: Ref, tag: str) -> Var:
        idx = []
        for d, e in enumerate(ref.index):
            if e.atoms(sp.core.function.AppliedUndef):
                raise SchemaError(f"opaque index {e} cannot be lowered")
            fname = lam(e, depth, f"ix_{tag}_{d}")
            idx.append(IndexExpr(fname, tuple(nest.counters)))
        return Var(ref.array, tuple(idx))

    def level_proc(d: int) -> str:
        name = f"L{d}"
        c = nest.counters[d]
        outer = tuple(Var(o) for o in nest.counters[:d])
        lo, hi = nest.domain.bounds[d]
        lam(lo, d, f"lo{d}")
        hif = sp.lambdify(syms[: d + 1], (syms[d] <= hi).subs(params), "math")
        preds[f"le{d}"] = lambda *a, _f=hif: bool(_f(*a))
        p = Proc(name, f"l{d}_0")
        p.add(Assign(f"l{d}_0", Var(c), f"lo{d}", outer, f"l{d}_1"))
        p.add(Cond(f"l{d}_1", f"le{d}", (*outer, Var(c)), f"l{d}_2", f"l{d}_3"))
        p.add(Loop(f"l{d}_2", f"B{d}", f"le{d}", (*outer, Var(c)), f"l{d}_3"))
        body = Proc(f"B{d}", f"b{d}_0")
        if d + 1 < depth:
            body.add(Call(f"b{d}_0", level_proc(d + 1), f"b{d}_1"))
            body.add(Assign(f"b{d}_1", Var(c), "inc", (Var(c),), f"b{d}_2"))
        else:
            labels = [f"s{k}" for k in range(len(nest.body))] + [f"b{d}_1", f"b{d}_2"]
            body.start = labels[0]
            for k, st in enumerate(nest.body):
                args = tuple(index_var(r, f"{st.label}r{j}") if r.index else Var(r.array)
                             for j, r in enumerate(st.reads))
                tgt = index_var(st.target, f"{st.label}w") if st.target.index else Var(st.target.array)
                body.add(Assign(labels[k], tgt, st.func, args, labels[k + 1]))
            body.add(Assign(labels[len(nest.body)], Var(c), "inc", (Var(c),), labels[-1]))
        procs[name] = p
        procs[body.name] = body
        return name

    top = level_proc(0)
    main = Proc("main", "m0", {"m0": Call("m0", top, "m1")})
    ordered = dict(sorted(procs.items()))
    return Schema(main, ordered), funcs, preds


def cells_of(memory: dict) -> dict:
    """Normalize schema memory (``(array, idx)`` cells) to nest memory keys."""
    return {k: v for k, v in memory.items() if isinstance(k, tuple)}


def product_box(box: list[tuple[int, int]]):
    return itertools.product(*(range(lo, hi + 1) for lo, hi in box))

"""Predecessor programs, wavefront layers, dependence cones and affine schedules.

A predecessor program computes one value per point of an iteration domain
from values at constant, lexicographically negative offsets.  Because the
dependences are known without solving equations, independent iteration sets
(wavefronts) follow directly from a fixpoint over the domain.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

import sympy as sp

from .nest import Domain, LoopNest, NestError, parse_nest

Point = tuple[int, ...]


def _lex_negative(d: Point) -> bool:
    for v in d:
        if v:
            return v < 0
    return False


def add(p: Point, d: Point) -> Point:
    return tuple(a + b for a, b in zip(p, d))


@dataclass
class PredecessorProgram:
    """``value(x) = kernel(value(x + d1), ..., value(x + dr))`` over a domain.

    Reads that leave the domain are looked up in ``boundary``; a missing
    boundary entry is an error, never an implicit default.
    """

    domain: Domain
    offsets: tuple[Point, ...]
    kernel: Callable[..., Any]
    boundary: dict[Point, Any] = field(default_factory=dict)
    name: str = "f"

    def __post_init__(self) -> None:
        k = len(self.domain.counters)
        for d in self.offsets:
            if len(d) != k:
                raise NestError(f"offset {d} has wrong dimension")
            if not _lex_negative(d):
                raise NestError(f"offset {d} is not lexicographically negative")

    def points(self) -> list[Point]:
        return list(self.domain.points())

    def predecessors(self, x: Point, domain_set: set[Point] | None = None) -> list[Point]:
        dom = domain_set if domain_set is not None else set(self.points())
        return [add(x, d) for d in self.offsets if add(x, d) in dom]

    def boundary_points(self) -> list[Point]:
        dom = set(self.points())
        out = {add(x, d) for x in dom for d in self.offsets} - dom
        return sorted(out)

    def value_at(self, values: dict[Point, Any], x: Point) -> Any:
        args = []
        for d in self.offsets:
            y = add(x, d)
            if y in values:
                args.append(values[y])
            elif y in self.boundary:
                args.append(self.boundary[y])
            else:
                raise NestError(f"no value for {y} (read by {x}) and no boundary entry")
        return self.kernel(*args)


def average(*args):
    return sum(args, Fraction(0)) / len(args)


KERNELS: dict[str, Callable] = {
    "avg": average,
    "sum": lambda *a: sum(a, Fraction(0)),
    "max": lambda *a: max(a),
    "min": lambda *a: min(a),
}


def from_nest(nest: LoopNest, kernels: dict[str, Callable] | None = None,
              boundary: dict[Point, Any] | None = None) -> PredecessorProgram:
    """Read a single-statement nest ``f[x] = k(f[x + d1], ...)`` as a predecessor program."""
    if len(nest.body) != 1:
        raise NestError("a predecessor program has exactly one statement")
    st = nest.body[0]
    syms = nest.domain.symbols
    if tuple(st.target.index) != syms:
        raise NestError("target must be indexed by the loop counters in order")
    offsets = []
    for r in st.reads:
        if r.array != st.target.array or len(r.index) != len(syms):
            raise NestError(f"read {r} is not a value of {st.target.array}")
        d = []
        for e, s in zip(r.index, syms):
            off = sp.simplify(e - s)
            if not off.is_Integer:
                raise NestError(f"read {r} is not at a constant offset")
            d.append(int(off))
        offsets.append(tuple(d))
    table = {**KERNELS, **(kernels or {})}
    kern = table.get(st.func) or (lambda *a, _n=st.func: f"{_n}({', '.join(map(str, a))})")
    return PredecessorProgram(nest.domain, tuple(offsets), kern, dict(boundary or {}),
                              st.target.array)


def seeded_boundary(pp: PredecessorProgram, seed: int) -> dict[Point, Fraction]:
    rng = random.Random(seed)
    return {p: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for p in pp.boundary_points()}


# --- layers ---------------------------------------------------------------------

def wavefront_layers(pp: PredecessorProgram) -> list[list[Point]]:
    """Layer k holds the points whose longest in-domain dependence chain has length k.

    Computed Kahn-style: a point enters a layer once all its in-domain
    predecessors have been placed.
    """
    pts = pp.points()
    dom = set(pts)
    succs: dict[Point, list[Point]] = {x: [] for x in pts}
    missing: dict[Point, int] = {}
    for x in pts:
        preds = pp.predecessors(x, dom)
        missing[x] = len(preds)
        for y in preds:
            succs[y].append(x)
    layer = [x for x in pts if missing[x] == 0]
    layers: list[list[Point]] = []
    while layer:
        layers.append(sorted(layer))
        nxt = []
        for y in layer:
            for x in succs[y]:
                missing[x] -= 1
                if missing[x] == 0:
                    nxt.append(x)
        layer = nxt
    return layers


def is_parallel(pp: PredecessorProgram, points: Iterable[Point]) -> bool:
    """True if no point of the set reads another point of the set (directly or transitively)."""
    pts = set(points)
    for x in pts:
        if dependence_cone(pp, x) & pts:
            return False
    return True


def dependence_cone(pp: PredecessorProgram, x: Point) -> set[Point]:
    """All in-domain points that ``x`` depends on, transitively (excluding x)."""
    dom = set(pp.points())
    seen: set[Point] = set()
    queue = deque([x])
    while queue:
        y = queue.popleft()
        for z in pp.predecessors(y, dom):
            if z not in seen:
                seen.add(z)
                queue.append(z)
    return seen


def affine_normal(pp: PredecessorProgram, radius: int = 4) -> tuple[int, ...] | None:
    """Smallest integer vector n (L1 norm, then lexicographic) with n.d > 0 for all flows.

    Flow vectors are the negated read offsets (producer to consumer).  Every
    hyperplane ``n . x = c`` is then a set of independent iterations.
    """
    flows = [tuple(-v for v in d) for d in pp.offsets]
    k = len(pp.domain.counters)
    cands = sorted(itertools.product(range(-radius, radius + 1), repeat=k),
                   key=lambda n: (sum(map(abs, n)), tuple(-v for v in n)))
    for n in cands:
        if any(n) and all(sum(a * b for a, b in zip(n, f)) > 0 for f in flows):
            return n
    return None


def certify_normal(pp: PredecessorProgram, n: tuple[int, ...]) -> bool:
    return all(sum(a * -b for a, b in zip(n, d)) > 0 for d in pp.offsets)


def hyperplane_layers(pp: PredecessorProgram, n: tuple[int, ...]) -> list[list[Point]]:
    groups: dict[int, list[Point]] = {}
    for x in pp.points():
        groups.setdefault(sum(a * b for a, b in zip(n, x)), []).append(x)
    return [groups[c] for c in sorted(groups)]


# --- execution ---------------------------------------------------------------

def execute_sequential(pp: PredecessorProgram) -> dict[Point, Any]:
    values: dict[Point, Any] = {}
    for x in pp.points():
        values[x] = pp.value_at(values, x)
    return values


def execute_wavefront(pp: PredecessorProgram, layers: list[list[Point]] | None = None,
                      shuffle_seed: int | None = None) -> dict[Point, Any]:
    """Evaluate layer by layer; within a layer, points are taken in shuffled order.

    Every read inside a layer must come from an earlier layer or the
    boundary, so the order inside a layer cannot matter.
    """
    layers = layers if layers is not None else wavefront_layers(pp)
    rng = random.Random(shuffle_seed)
    values: dict[Point, Any] = {}
    for layer in layers:
        order = list(layer)
        if shuffle_seed is not None:
            rng.shuffle(order)
        fresh = {}
        for x in order:
            fresh[x] = pp.value_at(values, x)
        values.update(fresh)
    return values


# --- worked examples --------------------------------------------------------------

FOUR_POINT = """\
// four-point relaxation: sweep k reads sweep k-1 ahead and sweep k behind
param N = 8
for k = 1 .. N
for i = 1 .. N
for j = 1 .. N
f[k, i, j] = avg(f[k, i - 1, j], f[k, i, j - 1], f[k - 1, i + 1, j], f[k - 1, i, j + 1])
"""

DIAGONAL = """\
// u[x, y] from u[x-1, y-1] and the scalar v carried along y
param N = 8
for x = 1 .. N - 1
for y = 1 .. N - 1
u[x, y] = g(u[x - 1, y - 1], u[x, y - 1])
"""


def four_point(N: int = 8, seed: int = 0) -> PredecessorProgram:
    pp = from_nest(parse_nest(FOUR_POINT, N=N))
    pp.boundary = seeded_boundary(pp, seed)
    return pp


def diagonal(N: int = 8, seed: int = 0) -> PredecessorProgram:
    pp = from_nest(parse_nest(DIAGONAL, N=N), kernels={"g": lambda a, b: a + 2 * b})
    pp.boundary = seeded_boundary(pp, seed)
    return pp

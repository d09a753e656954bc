"""Connection equations between writers and readers of the same array.

For a writer ``A[K0(x)]`` and a reader ``A[K1(y)]`` in one nest, the
iterations x, y touch the same cell exactly when ``K0(x) = K1(y)``.  Linear
systems are solved exactly over the integers; polynomial ones by bounded
enumeration; index expressions with opaque calls are reported unsolvable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .lattice import IntegerLattice, solve_integer_system
from .nest import LoopNest, product_box, sympify_expr

LINEAR = "linear"
POLYNOMIAL = "polynomial"
UNDECIDABLE = "undecidable"

EXACT = "exact"
BOUNDED = "bounded-only"
UNSOLVABLE = "unsolvable: undecidable class"
BUDGET = "budget-exceeded"


@dataclass
class ConnectionEquation:
    writer: str
    reader: str
    array: str
    exprs: list[sp.Expr]                  # each must equal zero
    variables: tuple[sp.Symbol, ...]
    box: list[tuple[int, int]]
    constraints: list[sp.Basic] = field(default_factory=list)

    @property
    def degree(self) -> int:
        deg = 0
        for e in self.exprs:
            if e.atoms(sp.core.function.AppliedUndef):
                continue
            if e.free_symbols & set(self.variables):
                deg = max(deg, sp.Poly(e, *self.variables).total_degree())
        return deg

    @property
    def cls(self) -> str:
        if any(e.atoms(sp.core.function.AppliedUndef) for e in self.exprs):
            return UNDECIDABLE
        return LINEAR if self.degree <= 1 else POLYNOMIAL

    def __str__(self) -> str:
        eqs = "; ".join(f"{e} = 0" for e in self.exprs)
        return f"{self.writer}->{self.reader} [{self.array}]: {eqs}"

    @classmethod
    def from_text(cls, text: str, bounds: dict[str, tuple[int, int]]) -> "ConnectionEquation":
        """Build from ``lhs = rhs`` (``;``-separated) with explicit variable bounds."""
        exprs = []
        for part in text.split(";"):
            if not part.strip():
                continue
            lhs, rhs = part.split("=", 1)
            exprs.append(sp.expand(sympify_expr(lhs) - sympify_expr(rhs)))
        names = list(bounds)
        syms = tuple(sp.Symbol(n, integer=True) for n in names)
        extra = set().union(*(e.free_symbols for e in exprs)) - set(syms)
        if extra:
            raise ValueError(f"no bounds for {sorted(map(str, extra))}")
        return cls("eq", "eq", "-", exprs, syms, [bounds[n] for n in names])


@dataclass
class Solution:
    status: str
    points: list[tuple[int, ...]]
    variables: tuple[str, ...]
    lattice: IntegerLattice | None = None
    explored: int = 0

    def as_dict(self) -> dict:
        out = {"status": self.status, "variables": list(self.variables),
               "points": [list(p) for p in self.points]}
        if self.lattice is not None:
            out["particular"] = self.lattice.particular
            out["basis"] = self.lattice.basis
        return out


def build_connection_equations(nest: LoopNest) -> list[ConnectionEquation]:
    """One equation system per (writer, reader) pair over a common array."""
    dom = nest.domain
    params = {sp.Symbol(k, integer=True): v for k, v in dom.params.items()}
    syms = dom.symbols
    box = dom.box()
    out: list[ConnectionEquation] = []
    for w in nest.body:
        for r in nest.body:
            for j, ref in enumerate(r.reads):
                if ref.array != w.target.array or len(ref.index) != len(w.target.index):
                    continue
                xs = tuple(sp.Symbol(f"{c}_w", integer=True) for c in dom.counters)
                ys = tuple(sp.Symbol(f"{c}_r", integer=True) for c in dom.counters)
                exprs = []
                for k0, k1 in zip(w.target.index, ref.index):
                    e = k0.subs(dict(zip(syms, xs))) - k1.subs(dict(zip(syms, ys)))
                    exprs.append(sp.expand(e.subs(params)))
                cons = []
                for vs in (xs, ys):
                    sub = dict(zip(syms, vs))
                    for v, (lo, hi) in zip(vs, dom.bounds):
                        cons.append(sp.Le(lo.subs(sub).subs(params), v))
                        cons.append(sp.Le(v, hi.subs(sub).subs(params)))
                label = r.label if len(r.reads) == 1 else f"{r.label}.{j}"
                out.append(ConnectionEquation(w.label, label, w.target.array, exprs, xs + ys,
                                              box + box, cons))
    return out


def _satisfies(constraints, env) -> bool:
    return all(bool(c.subs(env)) for c in constraints)


def solve_connection(eq: ConnectionEquation, budget: int = 10**7) -> Solution:
    """Solve within the equation's box (and domain constraints).

    Degree one: exact integer lattice, listed by nested interval bounds.
    Higher degree: enumeration of the box up to ``budget`` points.
    """
    names = tuple(str(v) for v in eq.variables)
    if eq.cls == UNDECIDABLE:
        return Solution(UNSOLVABLE, [], names)
    if eq.cls == LINEAR:
        A, b = [], []
        for e in eq.exprs:
            poly = sp.Poly(e, *eq.variables) if e.free_symbols else None
            row = [int(poly.coeff_monomial(v)) if poly else 0 for v in eq.variables]
            const = int(e.subs({v: 0 for v in eq.variables}))
            A.append(row)
            b.append(-const)
        lat = solve_integer_system(A, b, len(eq.variables))
        pts: list[tuple[int, ...]] = []
        if lat is not None:
            for p in lat.points_in_box(eq.box):
                if not eq.constraints or _satisfies(eq.constraints, dict(zip(eq.variables, p))):
                    pts.append(p)
        return Solution(EXACT, sorted(pts), names, lat)
    fns = [sp.lambdify(eq.variables, e, "math") for e in eq.exprs]
    cons = [sp.lambdify(eq.variables, c, "math") for c in eq.constraints]
    pts = []
    explored = 0
    for p in product_box(eq.box):
        if explored >= budget:
            return Solution(BUDGET, pts, names, explored=explored)
        explored += 1
        if all(f(*p) == 0 for f in fns) and all(c(*p) for c in cons):
            pts.append(p)
    return Solution(BOUNDED, pts, names, explored=explored)

"""Polynomial selection algorithms for single property forms.

A form ``S = {Q1 x in S: Q2 y in S: P(x, y)}`` has one of four kinds by its
quantifier pair:

=====  =======  =================================================
kind   prefix   algorithm
=====  =======  =================================================
1      all all  greedy: seed with a where P(a, a), grow one by one
2      all ex   iterated removal of elements without a supporter
3      ex all   anchor a, take a and its P-successors, then extend
4      ex ex    everything if some pair holds, else nothing
=====  =======  =================================================

Three-quantifier forms go through a list of sufficient conditions, each of
which reduces the problem to something polynomial; every answer is checked
for agreement and non-extendability before it is returned.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .semantics import (Universe, agreed_families, brute_force_variants, check_selected, elem_key, holds, pool,
                        sorted_elems)
from .syntax import BETA, Form, FormSystem, SetDefError, has_quantifier, prefix_and_matrix

KINDS = {("all", "all"): 1, ("all", "ex"): 2, ("ex", "all"): 3, ("ex", "ex"): 4}


def _single(form: Form) -> tuple[list, list[str], Any]:
    if form.kind != BETA or form.left.args or form.selector:
        raise SetDefError("expected a parameterless property form")
    prefix, matrix = prefix_and_matrix(form.formula)
    if has_quantifier(matrix):
        raise SetDefError("matrix must be quantifier free")
    if any(d.type != form.left.type or d.args or d.star for _, _, d in prefix):
        raise SetDefError("every quantifier must range over the defined set itself")
    return prefix, [v for _, v, _ in prefix], matrix


def _predicate(form: Form, universe: Universe) -> tuple[list, Callable[..., bool], list]:
    prefix, names, matrix = _single(form)
    cache: dict[tuple, bool] = {}

    def P(*vals) -> bool:
        if vals not in cache:
            cache[vals] = holds(matrix, {}, universe, dict(zip(names, vals)))
        return cache[vals]

    return prefix, P, list(pool(form, {}, universe))


def classify(form: Form) -> tuple[int, int]:
    """(quantifier count, kind) where kind is defined for two quantifiers."""
    prefix, _, _ = _single(form)
    if len(prefix) == 2:
        return 2, KINDS[(prefix[0][0], prefix[1][0])]
    return len(prefix), 0


def _agree_fn(prefix: list, P: Callable[..., bool]) -> Callable[[frozenset], bool]:
    """Direct truth test of the prenex formula over a candidate set."""
    qs = [q for q, _, _ in prefix]

    def ok(S: frozenset) -> bool:
        elems = sorted_elems(S)

        def rec(i: int, vals: tuple) -> bool:
            if i == len(qs):
                return P(*vals)
            it = (rec(i + 1, vals + (v,)) for v in elems)
            return all(it) if qs[i] == "all" else any(it)
        return rec(0, ())
    return ok


def _grow(seed: frozenset, cands: list, ok: Callable[[frozenset], bool]) -> frozenset:
    """Add candidates one at a time while the set stays agreed."""
    cur = seed
    changed = True
    while changed:
        changed = False
        for v in cands:
            if v not in cur and ok(cur | {v}):
                cur = cur | {v}
                changed = True
    return cur


def _dedupe(sets: list[frozenset]) -> list[frozenset]:
    seen, out = set(), []
    for s in sets:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return sorted(out, key=lambda s: (len(s), [elem_key(v) for v in sorted_elems(s)]))


def supporter_removal(cands: list, P: Callable[[Any, Any], bool]) -> frozenset:
    """Greatest S with every x in S having a supporter y in S, P(x, y)."""
    cur = set(cands)
    changed = True
    while changed:
        changed = False
        for x in sorted_elems(cur):
            if not any(P(x, y) for y in cur):
                cur.discard(x)
                changed = True
    return frozenset(cur)


def solve_pair(kind: int, cands: list, P: Callable[[Any, Any], bool]) -> list[frozenset]:
    """Kinds 1-4 on an explicit predicate over candidate list ``cands``."""
    prefix = [("all" if kind in (1, 2) else "ex", "x", None), ("all" if kind in (1, 3) else "ex", "y", None)]
    ok = _agree_fn(prefix, P)
    if kind == 1:
        seeds = [a for a in cands if P(a, a)]
        if not seeds:
            return [frozenset()]
        return _dedupe([_grow(frozenset({a}), cands, ok) for a in seeds])
    if kind == 2:
        return [supporter_removal(cands, P)]
    if kind == 3:
        out = []
        for a in cands:
            start = frozenset({a} | {y for y in cands if P(a, y)})
            if not ok(start):
                continue
            out.append(_grow(start, cands, ok))
        return _dedupe(out)
    if kind == 4:
        if any(P(a, b) for a in cands for b in cands):
            return [frozenset(cands)]
        return []
    raise SetDefError(f"unknown kind {kind}")


def solve_120(form: Form, universe: Universe) -> list[frozenset]:
    """Variants of a two-quantifier form ``S = {Q1 x in S: Q2 y in S: P(x, y)}``.

    Kind 2 returns the single greatest agreed set, kind 4 the whole pool
    or nothing (the empty set is not agreed when the outer quantifier is
    existential).  Kinds 1 and 3 return every variant their greedy passes
    reach; each is non-extendable by construction.
    """
    prefix, P, cands = _predicate(form, universe)
    if len(prefix) != 2:
        raise SetDefError("form is not in the two-quantifier class")
    return solve_pair(KINDS[(prefix[0][0], prefix[1][0])], cands, P)


# --- three quantifiers ------------------------------------------------------------------------

@dataclass
class Solve130:
    verdict: str
    variants: list[frozenset] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def render(self, name: str = "S") -> str:
        lines = [f"verdict: {self.verdict}"]
        lines += [f"  {name} = " + "{" + ", ".join(map(str, sorted_elems(v))) + "}" for v in self.variants]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _selected_sets(form: Form, universe: Universe, sets: list[frozenset]) -> list[frozenset]:
    system = FormSystem([form])
    name = form.left.type
    return _dedupe([s for s in sets if check_selected({name: s}, system, universe).ok])


def _closure(seed: Any, cands: list, witness: Callable[[Any, Any], Any]) -> frozenset | None:
    """Close {seed} under (x, y) -> witness(x, y); None if some pair has no witness."""
    cur = {seed}
    changed = True
    while changed:
        changed = False
        for x, y in itertools.product(sorted_elems(cur), repeat=2):
            z = witness(x, y)
            if z is None:
                return None
            if z not in cur:
                cur.add(z)
                changed = True
    return frozenset(cur)


def _unique_witness(prefix: list, P: Callable, cands: list) -> Callable[[Any, Any], Any] | None:
    """For a prefix ending in an existential: the unique z for (x, y), if at most one exists everywhere."""
    if prefix[2][0] != "ex":
        return None
    table: dict[tuple, Any] = {}
    for x, y in itertools.product(cands, repeat=2):
        zs = [z for z in cands if P(x, y, z)]
        if len(zs) > 1:
            return None
        table[(x, y)] = zs[0] if zs else None
    return lambda x, y: table[(x, y)]


def _seeded_variants(cands: list, witness: Callable, ok: Callable[[frozenset], bool]) -> list[frozenset]:
    out = []
    for a in cands:
        base = _closure(a, cands, witness)
        if base is not None and ok(base):
            out.append(_grow(base, cands, ok))
    return out


def _x_classes(P: Callable, cands: list) -> list[list]:
    sig: dict[tuple, list] = {}
    for u in cands:
        key = tuple(P(u, y, z) for y in cands for z in cands)
        sig.setdefault(key, []).append(u)
    return list(sig.values())


def solve_130(form: Form, universe: Universe, hints: dict | None = None, cap: int = 12) -> Solve130:
    """Dispatch a three-quantifier form through the sufficient conditions.

    Order: unique witness, witness function hint, separable hint,
    factorization of the first argument, approximation by
    ``P(x, y, x) & P(x, y, y)``, then brute force under ``cap``.

    ``hints``: ``skolem`` is a function (x, y) -> z for the last variable;
    ``separable`` is ``(r, t, op)`` with ``P(x, y, z) = r(x, y) op t(z)``.
    """
    hints = hints or {}
    prefix, P, cands = _predicate(form, universe)
    if len(prefix) != 3:
        raise SetDefError("form is not in the three-quantifier class")
    ok = _agree_fn(prefix, P)
    qs = tuple(q for q, _, _ in prefix)
    notes: list[str] = []

    def finish(verdict: str, sets: list[frozenset]) -> Solve130 | None:
        good = _selected_sets(form, universe, [_grow(s, cands, ok) for s in sets if ok(s)])
        if good:
            return Solve130(verdict, good, notes)
        notes.append(f"{verdict}: no verified variant")
        return None

    if qs[:2] == ("all", "all") or qs[:2] == ("all", "ex"):
        w = _unique_witness(prefix, P, cands)
        if w is not None and qs[:2] == ("all", "all"):
            res = finish("unique-witness", _seeded_variants(cands, w, ok) or [frozenset()])
            if res:
                return res
        elif w is not None:
            notes.append("unique-witness: only the all-all-ex shape closes under witnesses")

    if "skolem" in hints and qs == ("all", "all", "ex"):
        f = hints["skolem"]
        if all(P(x, y, f(x, y)) for x in cands for y in cands if f(x, y) in cands):
            wit = lambda x, y: f(x, y) if f(x, y) in cands else None  # noqa: E731
            res = finish("skolem", _seeded_variants(cands, wit, ok) or [frozenset()])
            if res:
                return res
        else:
            notes.append("skolem: hint is not a witness function")

    if "separable" in hints:
        r, t, op = hints["separable"]
        comb = (lambda a, b: a and b) if op == "&" else (lambda a, b: a or b)
        if all(P(x, y, z) == comb(r(x, y), t(z)) for x in cands for y in cands for z in cands):
            if op == "&" and qs[2] == "all":
                sub = [v for v in cands if t(v)]
                kind = KINDS[(qs[0], qs[1])]
                res = finish("separable", solve_pair(kind, sub, r))
            elif op == "|":
                kind = KINDS[(qs[0], qs[1])]
                t_part = frozenset(v for v in cands if t(v))
                res = finish("separable", [s | t_part for s in solve_pair(kind, cands, r)] + [t_part])
            else:
                res = None
                notes.append("separable: shape not covered by the split")
            if res:
                return res
        else:
            notes.append("separable: hint does not match the predicate")

    n = len(cands)
    if qs[0] == "all" and n:
        classes = _x_classes(P, cands)
        if len(classes) < n and len(classes) <= math.log2(n) + 1:
            sets = []
            kind = KINDS[(qs[1], qs[2])]
            for r in range(1, len(classes) + 1):
                for chosen in itertools.combinations(classes, r):
                    reps = [c[0] for c in chosen]
                    sub = [v for c in chosen for v in c]
                    PT = lambda y, z, reps=reps: all(P(a, y, z) for a in reps)  # noqa: E731
                    sets += solve_pair(kind, sub, PT)
            res = finish("factorized", sets)
            if res:
                return res

    if qs == ("all", "ex", "all"):
        shrunk = supporter_removal(cands, lambda x, y: P(x, y, x) and P(x, y, y))
        notes.append(f"approximation: pool shrinks to {len(shrunk)} of {n}")
        if len(shrunk) <= cap:
            inside = [s for s in _subsets(sorted_elems(shrunk)) if ok(s)]
            res = finish("approximation", inside)
            if res:
                return res

    if n <= cap:
        fams = agreed_families(FormSystem([form]), universe, cap)
        sets = [f[form.left.type] for f in fams]
        good = _selected_sets(form, universe, sets)
        return Solve130("fallback", good, notes)
    return Solve130("inapplicable", [], notes)


def _subsets(items: list):
    for r in range(len(items) + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)


def oracle_sets(form: Form, universe: Universe, criterion: str = "selected", cap: int = 12) -> list[frozenset]:
    """Brute-force variants of a single form, as plain sets."""
    return [f[form.left.type] for f in brute_force_variants(FormSystem([form]), universe, cap, criterion)]


__all__ = ["KINDS", "Solve130", "classify", "oracle_sets", "solve_120", "solve_130", "solve_pair",
           "supporter_removal"]

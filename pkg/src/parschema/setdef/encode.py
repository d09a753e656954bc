"""Propositional encoding of property-form systems.

Each (set name, candidate element) pair becomes a boolean variable that is
true when the element belongs to the set.  Quantifiers over a property set
expand over its candidates: a universal becomes a conjunction of guarded
terms ``v -> body`` and an existential a disjunction of ``v & body``.  A
guard whose variable is false contributes its neutral value without looking
at the body, which reproduces strict evaluation over the chosen elements.

Forms with two quantifiers of kind 2 also export Horn clauses over
exclusion variables ``e(d)`` ("d is not in S"): if every supporter of d is
excluded, d is excluded too.  The least model of those clauses is the
complement of the greatest agreed set.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from .semantics import (VOID, Family, Universe, domain_values, elem_key, eval_formula, name_groups, pool,
                        resolve_name)
from .syntax import ALPHA, BETA, BoolOp, Form, FormSystem, Formula, Not, Quant, SetDefError
from .solvers import KINDS, _single

# node shapes: ("const", value) ("var", i) ("not", n) ("and", [n]) ("or", [n])
#              ("guard", i, n)  -> var i implies n, neutral true
#              ("sel", i, n)    -> var i and n, neutral false


@dataclass
class ConstraintSystem:
    variables: list[tuple[str, Any]] = field(default_factory=list)
    constraints: list[tuple[str, tuple]] = field(default_factory=list)
    fixed: dict[str, frozenset] = field(default_factory=dict)     # enumerated sets, not variables

    def index(self) -> dict[tuple[str, Any], int]:
        return {v: i for i, v in enumerate(self.variables)}

    def evaluate(self, assignment: tuple[bool, ...]) -> bool:
        return all(_value(node, assignment) is True for _, node in self.constraints)

    def family(self, assignment: tuple[bool, ...]) -> Family:
        fam: dict[str, set] = {n: set() for n in self.names()}
        for (name, e), bit in zip(self.variables, assignment):
            if bit:
                fam[name].add(e)
        out = {n: frozenset(s) for n, s in fam.items()}
        out.update(self.fixed)
        return out

    def names(self) -> list[str]:
        seen: list[str] = []
        for n, _ in self.variables:
            if n not in seen:
                seen.append(n)
        for label, _ in self.constraints:
            if label not in seen and label not in self.fixed:
                seen.append(label)
        return seen

    def solutions(self, limit_vars: int = 20) -> list[Family]:
        """Every satisfying assignment, as families (exhaustive)."""
        n = len(self.variables)
        if n > limit_vars:
            raise SetDefError(f"{n} variables exceed the enumeration limit {limit_vars}")
        out = []
        for bits in itertools.product((False, True), repeat=n):
            if self.evaluate(bits):
                out.append(self.family(bits))
        return out

    def selected(self, limit_vars: int = 20) -> list[Family]:
        """Solutions where no false variable can be flipped alone."""
        n = len(self.variables)
        sols = []
        for bits in itertools.product((False, True), repeat=n):
            if self.evaluate(bits):
                sols.append(bits)
        good = set(sols)
        out = []
        for bits in sols:
            if not any(not b and bits[:i] + (True,) + bits[i + 1:] in good for i, b in enumerate(bits)):
                out.append(self.family(bits))
        return out

    def render(self) -> str:
        lines = [f"variables {len(self.variables)}"]
        for i, (name, e) in enumerate(self.variables):
            lines.append(f"  l{i} = [{e} in {name}]")
        lines.append(f"constraints {len(self.constraints)}")
        for label, node in self.constraints:
            lines.append(f"  {label}: {_show(node)}")
        return "\n".join(lines) + "\n"


def _value(node: tuple, a: tuple[bool, ...]) -> Any:
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return a[node[1]]
    if tag == "not":
        v = _value(node[1], a)
        return VOID if v is VOID else not v
    if tag in ("and", "or"):
        vals = [_value(n, a) for n in node[1]]
        if any(v is VOID for v in vals):
            return VOID
        return all(vals) if tag == "and" else any(vals)
    if tag == "guard":
        return _value(node[2], a) if a[node[1]] else True
    if tag == "sel":
        return _value(node[2], a) if a[node[1]] else False
    raise SetDefError(f"bad node {tag}")


def _show(node: tuple) -> str:
    tag = node[0]
    if tag == "const":
        return "void" if node[1] is VOID else ("1" if node[1] else "0")
    if tag == "var":
        return f"l{node[1]}"
    if tag == "not":
        return f"~{_show(node[1])}"
    if tag in ("and", "or"):
        if not node[1]:
            return "1" if tag == "and" else "0"
        return "(" + f" {'&' if tag == 'and' else '|'} ".join(_show(n) for n in node[1]) + ")"
    if tag == "guard":
        return f"(l{node[1]} -> {_show(node[2])})"
    return f"(l{node[1]} & {_show(node[2])})"


def _simplify(node: tuple) -> tuple:
    tag = node[0]
    if tag in ("and", "or"):
        kids = [_simplify(n) for n in node[1]]
        neutral = tag == "and"
        kids = [k for k in kids if not (k[0] == "const" and k[1] is neutral)]
        if any(k[0] == "const" and k[1] is VOID for k in kids):
            return ("const", VOID)
        if kids and all(k[0] == "const" for k in kids):
            return ("const", _value((tag, kids), ()))
        if len(kids) == 1:
            return kids[0]
        return (tag, kids) if kids else ("const", neutral)
    if tag in ("guard", "sel"):
        return (tag, node[1], _simplify(node[2]))
    if tag == "not":
        return ("not", _simplify(node[1]))
    return node


def to_boolean_constraints(system: FormSystem, universe: Universe) -> ConstraintSystem:
    """Encode a system of property forms (plus enumerations) as constraints."""
    bad = [f.left.type for f in system.forms if f.kind not in (ALPHA, BETA)]
    if bad:
        raise SetDefError(f"only property and enumeration forms are encodable: {bad}")
    fixed: Family = {k: frozenset(v) for k, v in universe.given.items()}
    for f in system.forms:
        if f.kind == ALPHA:
            for name in name_groups(f, fixed, universe):
                fixed[name] = frozenset(f.elements)
    cs = ConstraintSystem(fixed={k: v for k, v in fixed.items() if k not in universe.given})
    beta_names: dict[str, list] = {}
    groups: list[tuple[Form, str, list[dict]]] = []
    for f in system.forms:
        if f.kind != BETA:
            continue
        for name, maps in sorted(name_groups(f, fixed, universe).items()):
            cands = pool(f, fixed, universe, maps[0])
            beta_names[name] = list(cands)
            groups.append((f, name, maps))
            for e in cands:
                cs.variables.append((name, e))
    idx = cs.index()
    for f, name, maps in groups:
        node = ("and", [_expand(f.formula, xi, fixed, beta_names, idx, universe) for xi in maps])
        cs.constraints.append((name, _simplify(node)))
    return cs


def _expand(f: Formula, env: dict, fixed: Family, beta: dict[str, list], idx: dict, universe: Universe) -> tuple:
    if isinstance(f, Quant):
        if f.domain.star:
            raise SetDefError("name patterns as quantifier domains are not encodable")
        name = resolve_name(f.domain, env, universe)
        if name in beta:
            tag = "guard" if f.q == "all" else "sel"
            kids = [(tag, idx[(name, e)], _expand(f.body, {**env, f.var: e}, fixed, beta, idx, universe))
                    for e in beta[name]]
        else:
            kids = [_expand(f.body, {**env, f.var: e}, fixed, beta, idx, universe)
                    for e in domain_values(f.domain, env, fixed, universe)]
        return ("and" if f.q == "all" else "or", kids)
    if isinstance(f, Not):
        return ("not", _expand(f.arg, env, fixed, beta, idx, universe))
    if isinstance(f, BoolOp):
        kids = [_expand(a, env, fixed, beta, idx, universe) for a in f.args]
        if f.op == "->":
            return ("or", [("not", kids[0]), kids[1]])
        return ("and" if f.op == "&" else "or", kids)
    return ("const", eval_formula(f, fixed, universe, env))


# --- Horn export for kind 2 ------------------------------------------------------------------------

@dataclass(frozen=True)
class HornClause:
    head: Any                   # excluded element
    body: tuple                 # supporters, all excluded

    def positive_literals(self) -> int:
        return 1

    def literals(self) -> list[str]:
        return [f"e({self.head})"] + [f"~e({s})" for s in self.body]

    def text(self) -> str:
        return " | ".join(self.literals())


def horn_export(form: Form, universe: Universe) -> list[HornClause]:
    """Clauses ``e(d) | ~e(s1) | ... | ~e(sk)`` over the supporters s of d."""
    prefix, names, matrix = _single(form)
    if len(prefix) != 2 or KINDS[(prefix[0][0], prefix[1][0])] != 2:
        raise SetDefError("Horn export needs a two-quantifier form of kind 2")
    cands = pool(form, {}, universe)
    clauses = []
    for d in cands:
        sup = tuple(y for y in cands
                    if eval_formula(matrix, {}, universe, {names[0]: d, names[1]: y}) is True)
        clauses.append(HornClause(d, sup))
    return clauses


def horn_least_model(clauses: list[HornClause]) -> frozenset:
    """Forward chaining: heads whose whole body is already derived."""
    derived: set = set()
    changed = True
    while changed:
        changed = False
        for c in clauses:
            if c.head not in derived and all(s in derived for s in c.body):
                derived.add(c.head)
                changed = True
    return frozenset(derived)


def horn_greatest(form: Form, universe: Universe) -> frozenset:
    excluded = horn_least_model(horn_export(form, universe))
    return frozenset(e for e in pool(form, {}, universe) if e not in excluded)


def render_horn(clauses: list[HornClause]) -> str:
    return "".join(c.text() + "\n" for c in sorted(clauses, key=lambda c: elem_key(c.head)))


__all__ = ["ConstraintSystem", "HornClause", "horn_export", "horn_greatest", "horn_least_model", "render_horn",
           "to_boolean_constraints"]

"""Evaluation of form systems over a finite universe.

Truth values are ``True``, ``False`` and ``VOID``.  Evaluation is strict: a
void atom makes every connective and quantifier above it void, so a formula
is "true" only when every atom it touches is defined.  Closed-world
interpretations never produce void.

A family maps concrete set names (``"S"``, ``"Lab[l1]"``) to frozensets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from ..schema.interp import Interpretation, StandardInterpretation, Undefined, parse_interpretation, parse_value
from .syntax import (ALPHA, BETA, DELTA, GAMMA, BoolOp, Cmp, Const, Form, FormSystem, Formula, NameRef,
                     Not, Quant, SetDefError, Sym, Term, Truth, Atom, concrete_name, parse_system)


class _Void:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "void"

    def __bool__(self) -> bool:
        raise TypeError("void has no boolean value")


VOID = _Void()
Family = dict[str, frozenset]


def elem_key(v: Any) -> tuple:
    """Deterministic order for mixed int/str elements."""
    if isinstance(v, int) and not isinstance(v, bool):
        return (0, v, "")
    return (1, 0, str(v))


def sorted_elems(vals: Iterable) -> list:
    return sorted(vals, key=elem_key)


def show_set(s: Iterable) -> str:
    return "{" + ", ".join(str(v) for v in sorted_elems(s)) + "}"


def show_family(fam: Family) -> str:
    return "; ".join(f"{n} = {show_set(fam[n])}" for n in sorted(fam))


# --- universe ---------------------------------------------------------------------

@dataclass
class Universe:
    omega: list = field(default_factory=list)
    interp: Interpretation = field(default_factory=lambda: StandardInterpretation(closed_world=True))
    lam: list = field(default_factory=list)             # secondary data grown by image forms
    given: dict[str, frozenset] = field(default_factory=dict)
    provenance: dict[Any, str] = field(default_factory=dict)

    @property
    def data(self) -> list:
        seen, out = set(), []
        for v in [*self.omega, *self.lam]:
            if v not in seen:
                seen.add(v)
                out.append(v)
        return out

    def add_secondary(self, values: Iterable, source: str) -> list:
        """Record new image values; never removes anything."""
        known = set(self.data)
        added = []
        for v in sorted_elems(values):
            if v not in known:
                self.lam.append(v)
                self.provenance[v] = source
                known.add(v)
                added.append(v)
        return added


@dataclass
class Instance:
    system: FormSystem
    universe: Universe
    text: str = ""


def parse_instance(text: str) -> Instance:
    """Sections ``[forms]``, ``[universe]`` (comma list), ``[sets]`` (``Name = a, b``)
    plus the interpretation sections (diagram, functions, predicates, options)."""
    sections: dict[str, list[str]] = {}
    current = None
    interp_lines: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("[") and line.endswith("]") and line[1:-1] in ("forms", "universe", "sets"):
            current = line[1:-1]
            sections.setdefault(current, [])
            continue
        if line.startswith("[") and line.endswith("]"):
            current = "interp"
        if current == "interp":
            interp_lines.append(raw)
        elif current is not None:
            sections[current].append(raw)
        elif line and not line.startswith("//"):
            raise SetDefError(f"content outside a section: {line!r}")
    system = parse_system("\n".join(sections.get("forms", [])))
    omega = []
    for line in sections.get("universe", []):
        line = line.split("//", 1)[0].strip()
        if line:
            omega += [parse_value(v) for v in line.split(",") if v.strip()]
    given = {}
    for line in sections.get("sets", []):
        line = line.split("//", 1)[0].strip()
        if line:
            name, rhs = line.split("=", 1)
            given[name.strip().replace(" ", "")] = frozenset(parse_value(v) for v in rhs.split(",") if v.strip())
    interp_text = "\n".join(interp_lines)
    interp = parse_interpretation(interp_text) if interp_text.strip() else StandardInterpretation(closed_world=True)
    given_types = {n.split("[", 1)[0] for n in given}
    system.validate(given_types)
    return Instance(system, Universe(omega, interp, given=given), text)


# --- three-valued evaluation ------------------------------------------------------------

def eval_term(t: Term, env: dict, universe: Universe) -> Any:
    if isinstance(t, Sym):
        return env.get(t.name, t.name)
    if isinstance(t, Const):
        return t.value
    args = [eval_term(a, env, universe) for a in t.args]
    if any(a is VOID for a in args):
        return VOID
    try:
        return universe.interp.apply(t.func, tuple(args))
    except Undefined:
        return VOID


def _and(vals: list) -> Any:
    if any(v is VOID for v in vals):
        return VOID
    return all(vals)


def _or(vals: list) -> Any:
    if any(v is VOID for v in vals):
        return VOID
    return any(vals)


def _compare(op: str, a: Any, b: Any) -> Any:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    try:
        return {"<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b}[op]
    except TypeError:
        return VOID


def resolve_name(ref: NameRef, env: dict, universe: Universe) -> str | None:
    """Concrete name for a name schema; a bare identifier bound in env is a set name variable."""
    if not ref.args and ref.type in env:
        return str(env[ref.type])
    vals = tuple(eval_term(a, env, universe) for a in ref.args)
    if any(v is VOID for v in vals):
        return None
    return concrete_name(ref.type, vals)


def domain_values(ref: NameRef, env: dict, family: Family, universe: Universe) -> list:
    if ref.star:
        return sorted(n for n in family if n.split("[", 1)[0] == ref.type)
    name = resolve_name(ref, env, universe)
    if name is None:
        raise SetDefError(f"set name {ref} is void")
    if name in family:
        return sorted_elems(family[name])
    if name in universe.given:
        return sorted_elems(universe.given[name])
    raise SetDefError(f"unresolved set name {name}")


def eval_formula(f: Formula, family: Family, universe: Universe, env: dict | None = None) -> Any:
    """Value of a formula: True, False or VOID.  No short-circuiting."""
    env = env or {}
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        args = [eval_term(a, env, universe) for a in f.args]
        if any(a is VOID for a in args):
            return VOID
        try:
            return bool(universe.interp.test(f.pred, tuple(args)))
        except Undefined:
            return VOID
    if isinstance(f, Cmp):
        a, b = eval_term(f.left, env, universe), eval_term(f.right, env, universe)
        if a is VOID or b is VOID:
            return VOID
        return _compare(f.op, a, b)
    if isinstance(f, Not):
        v = eval_formula(f.arg, family, universe, env)
        return VOID if v is VOID else not v
    if isinstance(f, BoolOp):
        vals = [eval_formula(a, family, universe, env) for a in f.args]
        if f.op == "&":
            return _and(vals)
        if f.op == "|":
            return _or(vals)
        a, b = vals
        return VOID if VOID in (a, b) else (not a) or b
    if isinstance(f, Quant):
        vals = [eval_formula(f.body, family, universe, {**env, f.var: v})
                for v in domain_values(f.domain, env, family, universe)]
        return _and(vals) if f.q == "all" else _or(vals)
    raise SetDefError(f"not a formula: {f!r}")


def holds(f: Formula, family: Family, universe: Universe, env: dict | None = None) -> bool:
    return eval_formula(f, family, universe, env) is True


# --- names and acceptable maps ---------------------------------------------------------

def acceptable_maps(form: Form, family: Family, universe: Universe, env: dict | None = None) -> Iterator[dict]:
    """Every assignment of the selector variables, level by level."""
    def rec(i: int, cur: dict):
        if i == len(form.selector):
            if form.condition is None or holds(form.condition, family, universe, cur):
                yield dict(cur)
            return
        var, dom = form.selector[i]
        for v in domain_values(dom, cur, family, universe):
            cur[var] = v
            yield from rec(i + 1, cur)
        cur.pop(var, None)

    yield from rec(0, dict(env or {}))


def name_groups(form: Form, family: Family, universe: Universe) -> dict[str, list[dict]]:
    """Concrete left names with the acceptable maps that produce them."""
    groups: dict[str, list[dict]] = {}
    for xi in acceptable_maps(form, family, universe):
        name = resolve_name(form.left, xi, universe)
        if name is not None:
            groups.setdefault(name, []).append(xi)
    return groups


def pool(form: Form, family: Family, universe: Universe, env: dict | None = None) -> list:
    """Candidate elements of a set defined by ``form``."""
    if form.within is None:
        return universe.data
    return domain_values(form.within, env or {}, family, universe)


# --- deterministic forms ------------------------------------------------------------------

def gamma_closure(form: Form, xi: dict, family: Family, universe: Universe) -> frozenset:
    """Least set containing the base sets and closed under the induction step."""
    cur: set = set()
    for b in form.base:
        cur |= set(domain_values(b, xi, family, universe))
    cands = pool(form, family, universe, xi)
    changed = True
    while changed:
        changed = False
        for x in cands:
            if x in cur:
                continue
            for y in sorted_elems(cur):
                if holds(form.formula, family, universe, {**xi, form.new_var: x, form.old_var: y}):
                    cur.add(x)
                    changed = True
                    break
    return frozenset(cur)


def delta_image(form: Form, maps: list[dict], universe: Universe) -> frozenset:
    out = set()
    for xi in maps:
        v = eval_term(form.image, xi, universe)
        if v is not VOID:
            out.add(v)
    return frozenset(out)


def apply_delta(system: FormSystem, family: Family, universe: Universe) -> list:
    """Add the images of every image form to the secondary data."""
    added = []
    for form in system.forms:
        if form.kind != DELTA:
            continue
        for name, maps in name_groups(form, family, universe).items():
            added += universe.add_secondary(delta_image(form, maps, universe), name)
    return added


def deterministic_value(form: Form, name: str, maps: list[dict], family: Family, universe: Universe) -> frozenset:
    if form.kind == ALPHA:
        return frozenset(form.elements)
    if form.kind == GAMMA:
        vals = {gamma_closure(form, xi, family, universe) for xi in maps}
        if len(vals) != 1:
            raise SetDefError(f"{name}: induction bases disagree across selector maps")
        return vals.pop()
    if form.kind == DELTA:
        known = set(universe.data) | set(family)
        return frozenset(v for v in delta_image(form, maps, universe) if v in known)
    raise SetDefError(f"{form.kind} form is not deterministic")


# --- agreement ---------------------------------------------------------------------------

@dataclass
class FormReport:
    form: int
    name: str
    ok: bool
    reason: str = ""


@dataclass
class AgreedReport:
    ok: bool
    items: list[FormReport] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        lines = [f"agreed: {'yes' if self.ok else 'no'}"]
        for it in self.items:
            lines.append(f"  form {it.form} {it.name}: {'ok' if it.ok else 'FAIL'}"
                         + (f" ({it.reason})" if it.reason else ""))
        return "\n".join(lines) + "\n"


def check_agreed(family: Family, system: FormSystem, universe: Universe) -> AgreedReport:
    """Check every form against the family; the family must name exactly the defined sets."""
    family = {**{k: frozenset(v) for k, v in universe.given.items()}, **family}
    items: list[FormReport] = []
    expected: set[str] = set()
    for i, form in enumerate(system.forms):
        try:
            groups = name_groups(form, family, universe)
        except SetDefError as exc:
            items.append(FormReport(i, form.left.type, False, str(exc)))
            continue
        for name, maps in sorted(groups.items()):
            expected.add(name)
            if name not in family:
                items.append(FormReport(i, name, False, "set missing"))
                continue
            have = family[name]
            try:
                items.append(_check_one(i, form, name, maps, have, family, universe))
            except SetDefError as exc:
                items.append(FormReport(i, name, False, str(exc)))
    defined = set(system.types)
    for name in sorted(family):
        if name.split("[", 1)[0] in defined and name not in expected:
            items.append(FormReport(-1, name, False, "name not produced by any selector map"))
    return AgreedReport(all(it.ok for it in items), items)


def _check_one(i: int, form: Form, name: str, maps: list[dict], have: frozenset, family: Family,
               universe: Universe) -> FormReport:
    if form.kind == BETA:
        allowed = set(pool(form, family, universe, maps[0]))
        stray = have - allowed
        if stray:
            return FormReport(i, name, False, f"elements outside the pool: {show_set(stray)}")
        for xi in maps:
            v = eval_formula(form.formula, family, universe, xi)
            if v is not True:
                return FormReport(i, name, False, f"formula is {'void' if v is VOID else 'false'}")
        return FormReport(i, name, True)
    want = deterministic_value(form, name, maps, family, universe)
    if want != have:
        return FormReport(i, name, False, f"expected {show_set(want)}")
    return FormReport(i, name, True)


def is_agreed(family: Family, system: FormSystem, universe: Universe) -> bool:
    return check_agreed(family, system, universe).ok


# --- selection ------------------------------------------------------------------------------

@dataclass
class SelectedReport:
    ok: bool
    witness: tuple[str, Any] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _extension_candidates(system: FormSystem, family: Family, universe: Universe) -> Iterator[tuple[str, Any]]:
    # Enumerated, induced and image sets are functions of the other sets, so
    # growing one of them alone never stays agreed; only property sets can.
    full = {**{k: frozenset(v) for k, v in universe.given.items()}, **family}
    for form in system.forms:
        if form.kind != BETA:
            continue
        for name, maps in sorted(name_groups(form, full, universe).items()):
            if name not in family:
                continue
            for v in pool(form, full, universe, maps[0]):
                if v not in family[name]:
                    yield name, v


def check_selected(family: Family, system: FormSystem, universe: Universe) -> SelectedReport:
    """Agreed, and no single-element extension of one set is agreed."""
    rep = check_agreed(family, system, universe)
    if not rep.ok:
        return SelectedReport(False, None, "not agreed")
    for name, v in _extension_candidates(system, family, universe):
        ext = dict(family)
        ext[name] = family[name] | {v}
        if is_agreed(ext, system, universe):
            return SelectedReport(False, (name, v), f"{name} extends by {v}")
    return SelectedReport(True)


# --- brute force oracle -------------------------------------------------------------------------

class CapExceeded(SetDefError):
    pass


def _order(system: FormSystem) -> list[Form]:
    """Deterministic forms sorted so that each follows the computed sets it reads."""
    pending = [f for f in system.forms if f.kind != BETA]
    det_types = {f.left.type for f in pending}
    done: set[str] = set()
    out = []
    while pending:
        for f in pending:
            if ((f.depends_on() - {f.left.type}) & det_types) <= done:
                out.append(f)
                pending.remove(f)
                done.add(f.left.type)
                break
        else:
            raise SetDefError("cyclic dependency between deterministic forms")
    return out


def agreed_families(system: FormSystem, universe: Universe, cap: int = 12) -> list[Family]:
    """Every agreed family, by enumerating subsets for the property-defined names.

    Enumeration size is the number of (name, candidate) pairs; it must not
    exceed ``cap``.  Enumerated names and pools must not depend on
    property-defined sets.
    """
    beta_types = {f.left.type for f in system.forms if f.kind == BETA}
    given = {k: frozenset(v) for k, v in universe.given.items()}
    slots: list[tuple[str, list]] = []
    for f in system.forms:
        if f.kind != BETA:
            continue
        sel_types = {d.type for _, d in f.selector} | ({f.within.type} if f.within else set())
        if sel_types & (beta_types | {g.left.type for g in system.forms if g.kind != ALPHA and g.kind != BETA}):
            raise SetDefError(f"{f.left.type}: selector depends on a computed set; enumeration unsupported")
        base = dict(given)
        for g in system.forms:
            if g.kind == ALPHA:
                for name in name_groups(g, base, universe):
                    base[name] = frozenset(g.elements)
        for name, maps in sorted(name_groups(f, base, universe).items()):
            slots.append((name, list(pool(f, base, universe, maps[0]))))
    pairs = sum(len(p) for _, p in slots)
    if pairs > cap:
        raise CapExceeded(f"{pairs} (name, element) pairs exceed the cap of {cap}")
    order = _order(system)
    out: list[Family] = []
    choices = [list(_subsets(p)) for _, p in slots]
    for combo in itertools.product(*choices):
        fam: Family = dict(given)
        for (name, _), chosen in zip(slots, combo):
            fam[name] = chosen
        try:
            for f in order:
                for name, maps in sorted(name_groups(f, fam, universe).items()):
                    fam[name] = deterministic_value(f, name, maps, fam, universe)
        except SetDefError:
            continue
        fam = {k: v for k, v in fam.items() if k not in given}
        if is_agreed(fam, system, universe):
            out.append(fam)
    return out


def _subsets(items: list) -> Iterator[frozenset]:
    for r in range(len(items) + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)


def _family_key(fam: Family) -> tuple:
    return tuple((n, tuple(elem_key(v) for v in sorted_elems(fam[n]))) for n in sorted(fam))


def _contained(a: Family, b: Family) -> bool:
    return a.keys() == b.keys() and all(a[k] <= b[k] for k in a)


def brute_force_variants(system: FormSystem, universe: Universe, cap: int = 12,
                         criterion: str = "selected") -> list[Family]:
    """Ground-truth variants.

    ``selected``: agreed families with no agreed single-element extension.
    ``maximal``: agreed families not strictly inside another agreed family.
    ``agreed``: every agreed family.
    """
    agreed = agreed_families(system, universe, cap)
    if criterion == "agreed":
        res = agreed
    elif criterion == "maximal":
        res = [a for a in agreed if not any(a is not b and _contained(a, b) and a != b for b in agreed)]
    elif criterion == "selected":
        keys = {_family_key(a) for a in agreed}
        res = []
        for a in agreed:
            extendable = False
            for name, v in _extension_candidates(system, a, universe):
                ext = dict(a)
                ext[name] = a[name] | {v}
                if _family_key(ext) in keys:
                    extendable = True
                    break
            if not extendable:
                res.append(a)
    else:
        raise SetDefError(f"unknown criterion {criterion!r}")
    return sorted(res, key=_family_key)


def single_set(variants: list[Family], name: str) -> list[frozenset]:
    return [v[name] for v in variants]


__all__ = [
    "AgreedReport", "CapExceeded", "Family", "FormReport", "Instance", "SelectedReport", "Universe", "VOID",
    "acceptable_maps", "agreed_families", "apply_delta", "brute_force_variants", "check_agreed",
    "check_selected", "delta_image", "domain_values", "elem_key", "eval_formula", "eval_term",
    "gamma_closure", "holds", "is_agreed", "load_instance", "name_groups", "parse_instance", "pool", "resolve_name",
    "show_family", "show_set", "single_set", "sorted_elems",
]


def load_instance(name: str) -> Instance:
    """Parse a bundled ``.sdf`` fixture by file name."""
    from importlib.resources import files
    return parse_instance(files("parschema.fixtures").joinpath(name).read_text())

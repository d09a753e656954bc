"""Data processing specifications: open definition systems run data-driven.

A system reads the current family and produces new values for its output
names.  Step 1 applies every system whose trigger inputs are start names;
afterwards a system is applicable when all its trigger inputs are nonempty,
at least one of them changed in the previous step, and its optional guard
holds.  The run is quiescent when no system is applicable.

Definitions inside a system are image or enumeration forms written in the
set-definition language.  A definition may carry a ``when`` guard; when the
guard is false the target keeps its value.  A form's ``if`` clause instead
filters the selector maps, so a false condition empties the target.

Selector domains may call set functions, e.g. ``a in Abit[S1, 2]`` ranges
over disjoint 2-element groups of S1.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from ..schema.interp import ConcreteInterpretation, parse_value
from ..setdef.semantics import VOID, Universe, eval_term, holds, show_set, sorted_elems
from ..setdef.syntax import ALPHA, DELTA, Const, Form, Formula, NameRef, SetDefError, Sym, parse_form, parse_formula

Family = dict[str, frozenset]


class DpsError(ValueError):
    pass


class FuelExhausted(Exception):
    pass


# --- interpreted functions -------------------------------------------------------------

def _plus(group) -> int:
    return sum(group) if isinstance(group, (tuple, frozenset)) else group


FUNCTIONS: dict[str, Callable] = {
    "o": lambda *args: 0,
    "s": lambda x: x + 1,
    "plus": _plus,
    "add": lambda a, b: a + b,
}


def abit(values: frozenset, k: int, rng: random.Random | None = None) -> list[tuple]:
    """Disjoint k-element groups of ``values``; leftovers form one smaller group.

    Default pairing is sorted order with the leftover taken from the
    smallest elements, so group sums of distinct naturals never collide.
    With ``rng`` the grouping is a seeded shuffle, retried until the group
    sums are distinct (falling back to the sorted grouping).
    """
    vals = sorted_elems(values)
    if k < 1:
        raise DpsError("Abit needs a positive group size")

    def group(order: list) -> list[tuple]:
        r = len(order) % k
        head, rest = order[:r], order[r:]
        out = [tuple(rest[i:i + k]) for i in range(0, len(rest), k)]
        return ([tuple(head)] if head else []) + out

    if rng is not None:
        for _ in range(20):
            order = list(vals)
            rng.shuffle(order)
            groups = group(order)
            sums = [_plus(g) for g in groups] if all(isinstance(v, int) for v in vals) else groups
            if len(set(sums)) == len(sums):
                return groups
    return group(vals)


def tokens(values: frozenset, delta: int) -> list[int]:
    """Counter-tagged tokens 1..n+delta for a set holding tokens 1..n."""
    n = len(values) + delta
    if n < 0:
        raise DpsError("token count would become negative")
    return list(range(1, n + 1))


SET_FUNCTIONS: dict[str, Callable[..., list]] = {"Abit": abit, "Tokens": tokens}


# --- definitions and systems --------------------------------------------------------------

@dataclass
class Call:
    """Run a nested specification to quiescence and take one of its sets."""
    dps: "DPS"
    inputs: tuple[str, ...]          # outer names copied to the nested start names, in order
    output: str = "Z"

    def __str__(self) -> str:
        return f"call[{self.dps.name}]({', '.join(self.inputs)})"


@dataclass
class Definition:
    target: str
    form: Form | None = None
    call: Call | None = None
    when: Formula | None = None

    def __str__(self) -> str:
        body = str(self.form) if self.form is not None else f"{self.target} = {self.call}"
        return body + (f" when {self.when}" if self.when is not None else "")


@dataclass
class OpenSystem:
    name: str
    inputs: tuple[str, ...]
    definitions: list[Definition] = field(default_factory=list)
    guard: Formula | None = None

    @property
    def outputs(self) -> list[str]:
        return [d.target for d in self.definitions]

    def io_overlap(self) -> set[str]:
        return set(self.inputs) & set(self.outputs)

    def render(self) -> str:
        lines = [f"[system {self.name}]", f"inputs = {', '.join(self.inputs)}"]
        if self.guard is not None:
            lines.append(f"when = {self.guard}")
        lines += [str(d) for d in self.definitions]
        return "\n".join(lines) + "\n"


@dataclass
class DPS:
    systems: list[OpenSystem]
    start: tuple[str, ...]
    strategy: str = "all"                  # all | sequential | random | single
    conflicts: str = "error"               # error | union
    name: str = "dps"
    functions: dict[str, Callable] = field(default_factory=lambda: dict(FUNCTIONS))
    start_data: Family = field(default_factory=dict)

    def names(self) -> list[str]:
        seen: list[str] = []

        def add(n: str) -> None:
            if n not in seen:
                seen.append(n)
        for n in self.start:
            add(n)
        for s in self.systems:
            for n in s.inputs:
                add(n)
            for n in s.outputs:
                add(n)
        return seen

    def validate(self) -> list[str]:
        """Problems that make this DPS unusable, plus overlap notes."""
        notes = []
        names = [s.name for s in self.systems]
        if len(set(names)) != len(names):
            raise DpsError("system names must be distinct")
        for s in self.systems:
            if not s.inputs:
                raise DpsError(f"system {s.name} declares no input")
            if s.io_overlap():
                notes.append(f"{s.name} reads and writes {sorted(s.io_overlap())}")
        return notes

    def render(self) -> str:
        head = [f"[dps]", f"start = {', '.join(self.start)}", f"strategy = {self.strategy}"]
        if self.start_data:
            head.append("[start]")
            head += [f"{n} = {', '.join(map(str, sorted_elems(v)))}" for n, v in self.start_data.items()]
        return "\n".join(head) + "\n" + "".join(s.render() for s in self.systems)


# --- running --------------------------------------------------------------------------------

@dataclass
class StepRecord:
    step: int
    applied: list[str]
    updated: list[str]
    digest: str
    snapshot: Family

    def text(self) -> str:
        return f"step {self.step}: applied {','.join(self.applied) or '-'} updated {','.join(self.updated) or '-'} {self.digest}"


@dataclass
class DpsTrace:
    steps: list[StepRecord] = field(default_factory=list)
    status: str = "running"
    fuel_used: int = 0

    @property
    def rounds(self) -> int:
        """Steps that changed at least one set."""
        return sum(1 for s in self.steps if s.updated)

    def values(self, name: str) -> list[frozenset]:
        return [s.snapshot.get(name, frozenset()) for s in self.steps]

    def render(self) -> str:
        return "".join(s.text() + "\n" for s in self.steps) + f"status {self.status} fuel {self.fuel_used}\n"


def digest(family: Family) -> str:
    text = "\n".join(f"{n}={show_set(family[n])}" for n in sorted(family))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


class _Fuel:
    def __init__(self, total: int):
        self.total, self.used = total, 0

    def spend(self) -> None:
        if self.used >= self.total:
            raise FuelExhausted
        self.used += 1


class Runner:
    """Step-by-step execution; ``run_dps`` drives it to the end."""

    def __init__(self, dps: DPS, start: Family | None = None, seed: int = 0, fuel: int | _Fuel = 10_000):
        dps.validate()
        self.dps = dps
        self.rng = random.Random(seed)
        self.seed = seed
        self.fuel = fuel if isinstance(fuel, _Fuel) else _Fuel(fuel)
        self.family: Family = {n: frozenset() for n in dps.names()}
        for n, v in {**dps.start_data, **(start or {})}.items():
            self.family[n] = frozenset(v)
        self.updated: set[str] | None = None     # None before step 1
        self.step_no = 0
        self.universe = Universe([], ConcreteInterpretation(functions=dps.functions))
        self.trace = DpsTrace()

    # applicability
    def applicable(self) -> list[OpenSystem]:
        out = []
        for s in self.dps.systems:
            if self.updated is None:
                ok = all(n in self.dps.start for n in s.inputs) and all(self.family[n] for n in s.inputs)
            else:
                ok = all(self.family[n] for n in s.inputs) and any(n in self.updated for n in s.inputs)
            if ok and s.guard is not None:
                ok = holds(s.guard, self.family, self.universe)
            if ok:
                out.append(s)
        return out

    # evaluation
    def _domain(self, ref: NameRef, env: dict, fam: Family) -> list:
        if ref.type in SET_FUNCTIONS:
            args = []
            for a in ref.args:
                if isinstance(a, Sym) and a.name not in env and a.name in fam:
                    args.append(fam[a.name])
                else:
                    args.append(eval_term(a, env, self.universe))
            if ref.type == "Abit" and self.dps.strategy in ("random", "single") and len(args) == 2:
                args.append(self.rng)
            return list(SET_FUNCTIONS[ref.type](*args))
        if not ref.args and ref.type in env:
            return sorted_elems(fam.get(str(env[ref.type]), frozenset()))
        vals = tuple(eval_term(a, env, self.universe) for a in ref.args)
        name = ref.type if not vals else f"{ref.type}[{','.join(map(str, vals))}]"
        return sorted_elems(fam.get(name, frozenset()))

    def _maps(self, form: Form, fam: Family):
        def rec(i: int, cur: dict):
            if i == len(form.selector):
                if form.condition is None or holds(form.condition, fam, self.universe, cur):
                    yield dict(cur)
                return
            var, dom = form.selector[i]
            for v in self._domain(dom, cur, fam):
                cur[var] = v
                yield from rec(i + 1, cur)
            cur.pop(var, None)
        yield from rec(0, {})

    def _evaluate(self, d: Definition, fam: Family) -> frozenset | None:
        if d.when is not None and not holds(d.when, fam, self.universe):
            return None
        if d.call is not None:
            sub = Runner(d.call.dps, {n: fam[o] for n, o in zip(d.call.dps.start, d.call.inputs)},
                         self.rng.randrange(2 ** 32), self.fuel)
            sub.run()
            return sub.family.get(d.call.output, frozenset())
        form = d.form
        if form.kind == ALPHA:
            return frozenset(form.elements)
        if form.kind != DELTA:
            raise DpsError(f"{d.target}: only image and enumeration forms run in a specification")
        out = set()
        for xi in self._maps(form, fam):
            v = eval_term(form.image, xi, self.universe)
            if v is not VOID:
                out.add(v)
        return frozenset(out)

    def _apply(self, system: OpenSystem, fam: Family) -> dict[str, frozenset]:
        res = {}
        for d in system.definitions:
            v = self._evaluate(d, fam)
            if v is not None:
                res[d.target] = v
        return res

    def step(self, choice: OpenSystem | None = None) -> StepRecord | None:
        """One step; ``choice`` forces the system under the single strategy."""
        apps = self.applicable()
        if not apps:
            return None
        self.fuel.spend()
        self.step_no += 1
        strategy = self.dps.strategy
        before = dict(self.family)
        if strategy == "all":
            writes: dict[str, tuple[str, frozenset]] = {}
            for s in apps:
                for n, v in self._apply(s, before).items():
                    if n in writes and writes[n][1] != v:
                        if self.dps.conflicts == "error":
                            raise DpsError(f"step {self.step_no}: {writes[n][0]} and {s.name} both write {n}")
                        v = writes[n][1] | v
                    writes[n] = (writes.get(n, (s.name,))[0], v)
            for n, (_, v) in writes.items():
                self.family[n] = v
            applied = [s.name for s in apps]
        else:
            if strategy == "single":
                order = [choice if choice is not None else self.rng.choice(apps)]
            elif strategy == "random":
                order = list(apps)
                self.rng.shuffle(order)
            elif strategy == "sequential":
                order = apps
            else:
                raise DpsError(f"unknown strategy {strategy!r}")
            for s in order:
                self.family.update(self._apply(s, self.family))
            applied = [s.name for s in order]
        self.updated = {n for n in self.family if self.family[n] != before.get(n, frozenset())}
        rec = StepRecord(self.step_no, applied, sorted(self.updated), digest(self.family), dict(self.family))
        self.trace.steps.append(rec)
        return rec

    def run(self) -> "Runner":
        while True:
            if self.step() is None:
                self.trace.status = "quiescent"
                break
        self.trace.fuel_used = self.fuel.used
        return self


@dataclass
class DpsResult:
    family: Family
    trace: DpsTrace

    @property
    def status(self) -> str:
        return self.trace.status

    def render(self) -> str:
        lines = [f"status {self.status}", f"steps {len(self.trace.steps)}", f"fuel_used {self.trace.fuel_used}"]
        lines += [f"{n} = {show_set(self.family[n])}" for n in sorted(self.family)]
        return "\n".join(lines) + "\n"


def run_dps(dps: DPS, start: Family | None = None, fuel: int = 10_000, seed: int = 0) -> DpsResult:
    """Run to quiescence or until ``fuel`` steps (nested runs included) are spent."""
    r = Runner(dps, start, seed, fuel)
    try:
        r.run()
    except FuelExhausted:
        r.trace.status = "fuel-exhausted"
        r.trace.fuel_used = r.fuel.used
    return DpsResult(dict(r.family), r.trace)


# --- text format --------------------------------------------------------------------------------

_WHEN = re.compile(r"^(.*\})\s+when\s+(.+)$", re.S)


def parse_definition(line: str) -> Definition:
    m = _WHEN.match(line.strip())
    when = None
    if m:
        line, when = m.group(1), parse_formula(m.group(2))
    form = parse_form(line)
    if form.kind not in (ALPHA, DELTA):
        raise DpsError(f"{form.left}: only image and enumeration forms run in a specification")
    return Definition(str(form.left), form=form, when=when)


def parse_dps(text: str) -> DPS:
    """Sections ``[dps]`` (start, strategy, conflicts), ``[start]`` (``S = 1, 2``)
    and one ``[system NAME]`` per system (``inputs = ...``, optional ``when = ...``,
    then one definition per line)."""
    header: dict[str, str] = {}
    start_data: Family = {}
    systems: list[OpenSystem] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]") and not line.startswith("[system") and "=" not in line:
            section = line[1:-1].strip()
            continue
        if line.startswith("[system ") and line.endswith("]"):
            section = "system"
            systems.append(OpenSystem(line[len("[system "):-1].strip(), ()))
            continue
        try:
            if section == "dps":
                k, v = line.split("=", 1)
                header[k.strip()] = v.strip()
            elif section == "start":
                k, v = line.split("=", 1)
                start_data[k.strip()] = frozenset(parse_value(x) for x in v.split(",") if x.strip())
            elif section == "system":
                s = systems[-1]
                key = line.split("=", 1)[0].strip()
                if key == "inputs":
                    s.inputs = tuple(x.strip() for x in line.split("=", 1)[1].split(",") if x.strip())
                elif key == "when":
                    s.guard = parse_formula(line.split("=", 1)[1])
                else:
                    s.definitions.append(parse_definition(line))
            else:
                raise DpsError("content outside a section")
        except (SetDefError, ValueError) as exc:
            raise DpsError(f"line {lineno}: {exc}") from None
    start = tuple(x.strip() for x in header.get("start", ",".join(start_data)).split(",") if x.strip())
    dps = DPS(systems, start, header.get("strategy", "all"), header.get("conflicts", "error"),
              start_data=start_data)
    dps.validate()
    return dps


def image(target: str, term: Any, selector: list[tuple[str, str | NameRef]], condition: Formula | None = None,
          when: Formula | None = None) -> Definition:
    """Build an image definition programmatically."""
    sel = tuple((v, d if isinstance(d, NameRef) else NameRef(d)) for v, d in selector)
    form = Form(DELTA, NameRef(target), selector=sel, image=term, condition=condition)
    return Definition(target, form=form, when=when)


def const(target: str, values: tuple) -> Definition:
    return Definition(target, form=Form(ALPHA, NameRef(target), elements=tuple(values)))


__all__ = ["Call", "Const", "DPS", "Definition", "DpsError", "DpsResult", "DpsTrace", "FUNCTIONS", "FuelExhausted",
           "OpenSystem", "Runner", "SET_FUNCTIONS", "StepRecord", "abit", "const", "digest", "image",
           "parse_definition", "parse_dps", "run_dps", "tokens"]

"""Program-schema data model.

A schema is a main procedure plus named sub-procedures.  Every procedure is a
label-addressed graph of four instruction forms: assignment, conditional,
loop (body-first ``do P while p(..) then l``) and call (``do P then l``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


class SchemaError(ValueError):
    """Raised for malformed schemas (unknown labels, bad nesting, ...)."""


@dataclass(frozen=True)
class LabelLit:
    """A label used as a data value (for dispatch variables)."""

    label: str

    def __str__(self) -> str:
        return "@" + self.label


@dataclass(frozen=True)
class IndexExpr:
    """One index position: a bare simple variable or ``fn(v1, ..., vk)``."""

    func: str | None
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.func is None and len(self.args) != 1:
            raise SchemaError("bare index must name exactly one variable")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.args

    def __str__(self) -> str:
        if self.func is None:
            return self.args[0]
        return f"{self.func}({', '.join(self.args)})"


@dataclass(frozen=True)
class Var:
    """Simple variable (no indices) or indexed (array) variable."""

    name: str
    indices: tuple[IndexExpr, ...] = ()

    @property
    def is_indexed(self) -> bool:
        return bool(self.indices)

    def index_vars(self) -> frozenset[str]:
        return frozenset(v for ix in self.indices for v in ix.variables)

    def __str__(self) -> str:
        if not self.indices:
            return self.name
        return f"{self.name}[{', '.join(str(i) for i in self.indices)}]"


Arg = Union[Var, LabelLit]


@dataclass(frozen=True)
class Assign:
    label: str
    target: Var
    func: str
    args: tuple[Arg, ...]
    next: str

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


@dataclass(frozen=True)
class Cond:
    label: str
    pred: str
    args: tuple[Arg, ...]
    then: str
    orelse: str

    def successors(self) -> tuple[str, ...]:
        return (self.then, self.orelse)


@dataclass(frozen=True)
class Loop:
    label: str
    body: str
    pred: str
    args: tuple[Arg, ...]
    next: str

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


@dataclass(frozen=True)
class Call:
    label: str
    body: str
    next: str

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


Instruction = Union[Assign, Cond, Loop, Call]


def replace_successor(ins: Instruction, old: str, new: str) -> Instruction:
    """Return ``ins`` with every outgoing edge ``old`` redirected to ``new``."""
    sw = lambda l: new if l == old else l  # noqa: E731
    if isinstance(ins, Cond):
        return Cond(ins.label, ins.pred, ins.args, sw(ins.then), sw(ins.orelse))
    if isinstance(ins, Assign):
        return Assign(ins.label, ins.target, ins.func, ins.args, sw(ins.next))
    if isinstance(ins, Loop):
        return Loop(ins.label, ins.body, ins.pred, ins.args, sw(ins.next))
    return Call(ins.label, ins.body, sw(ins.next))


@dataclass
class Proc:
    """A labelled instruction graph with one start label."""

    name: str
    start: str
    instrs: dict[str, Instruction] = field(default_factory=dict)

    def add(self, ins: Instruction) -> None:
        if ins.label in self.instrs:
            raise SchemaError(f"duplicate label {ins.label!r} in {self.name}")
        self.instrs[ins.label] = ins

    def output_labels(self) -> set[str]:
        out: set[str] = set()
        for ins in self.instrs.values():
            out.update(ins.successors())
        return out

    def final_labels(self) -> list[str]:
        """Output labels that are not input labels, in first-seen order."""
        seen: list[str] = []
        for ins in self.instrs.values():
            for s in ins.successors():
                if s not in self.instrs and s not in seen:
                    seen.append(s)
        if not self.instrs:
            return [self.start]
        return seen

    @property
    def final(self) -> str:
        finals = self.final_labels()
        if len(finals) != 1:
            raise SchemaError(f"procedure {self.name} has final labels {finals}")
        return finals[0]

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instrs.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Proc):
            return NotImplemented
        return (self.name, self.start, list(self.instrs.items())) == (
            other.name, other.start, list(other.instrs.items()))


MAIN = "main"


@dataclass
class Schema:
    """Main procedure plus sub-procedures referenced by loops and calls."""

    main: Proc
    procs: dict[str, Proc] = field(default_factory=dict)
    aux: frozenset[str] = frozenset()

    def proc(self, name: str) -> Proc:
        if name == self.main.name:
            return self.main
        try:
            return self.procs[name]
        except KeyError:
            raise SchemaError(f"unknown procedure {name!r}") from None

    def all_procs(self) -> list[Proc]:
        return [self.main, *self.procs.values()]

    def find(self, label: str) -> tuple[Proc, Instruction]:
        for p in self.all_procs():
            if label in p.instrs:
                return p, p.instrs[label]
        raise SchemaError(f"unknown label {label!r}")

    def labels(self) -> set[str]:
        out: set[str] = set()
        for p in self.all_procs():
            out.update(p.instrs)
            out.update(p.output_labels())
            out.add(p.start)
        return out

    def variables(self) -> set[str]:
        """Base names of all variables (simple, array and index variables)."""
        names: set[str] = set()
        for p in self.all_procs():
            for ins in p:
                for v in instruction_vars(ins):
                    names.add(v.name)
                    names.update(v.index_vars())
        return names

    def copy(self) -> "Schema":
        return Schema(
            Proc(self.main.name, self.main.start, dict(self.main.instrs)),
            {k: Proc(p.name, p.start, dict(p.instrs)) for k, p in self.procs.items()},
            self.aux,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return (self.main == other.main and list(self.procs.items()) == list(other.procs.items())
                and self.aux == other.aux)


def instruction_vars(ins: Instruction) -> list[Var]:
    """Variables appearing directly in an instruction (not in sub-procedures)."""
    out: list[Var] = []
    if isinstance(ins, Assign):
        out.append(ins.target)
    args = getattr(ins, "args", ())
    out.extend(a for a in args if isinstance(a, Var))
    return out


class FreshNames:
    """Generates names not colliding with a given set."""

    def __init__(self, taken: set[str]):
        self.taken = set(taken)

    def __call__(self, stem: str) -> str:
        n = 1
        while f"{stem}{n}" in self.taken:
            n += 1
        name = f"{stem}{n}"
        self.taken.add(name)
        return name

    def exact(self, name: str) -> str:
        if name in self.taken:
            return self(name + "_")
        self.taken.add(name)
        return name

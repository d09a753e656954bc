"""Structural checks and the Ind/Arg/Val sets of instructions and procedures."""
from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from .model import Assign, Call, Cond, Loop, Proc, Schema, SchemaError, Var, instruction_vars


def label_graph_order(proc: Proc) -> list[str]:
    """Topological order of the instruction labels; raises on a cycle."""
    ts = TopologicalSorter()
    for ins in proc:
        ts.add(ins.label)
        for s in ins.successors():
            if s in proc.instrs:
                ts.add(s, ins.label)
    try:
        return list(ts.static_order())
    except CycleError as exc:
        raise SchemaError(f"label graph of {proc.name} has a cycle: {exc.args[1]}") from None


def reachable(proc: Proc, starts) -> list[str]:
    """Labels reachable from ``starts`` (inclusive), in DFS discovery order."""
    seen: list[str] = []
    stack = [s for s in reversed(list(starts))]
    while stack:
        lab = stack.pop()
        if lab in seen or lab not in proc.instrs:
            continue
        seen.append(lab)
        stack.extend(reversed(proc.instrs[lab].successors()))
    return seen


def validate_L(schema: Schema) -> list[str]:
    """Return the list of violations of the L-schema conditions (empty if valid).

    Checked: acyclic label graph per procedure, acyclic call graph, a single
    final label per procedure, disjoint labels across procedures, every
    referenced procedure exists, and consistent array arity.
    """
    problems: list[str] = []
    owner: dict[str, str] = {}
    for p in schema.all_procs():
        for lab in p.instrs:
            if lab in owner:
                problems.append(f"label {lab} used in both {owner[lab]} and {p.name}")
            owner[lab] = p.name
        if p.instrs and p.start not in p.instrs:
            problems.append(f"start label {p.start} of {p.name} has no instruction")
        try:
            label_graph_order(p)
        except SchemaError as exc:
            problems.append(str(exc))
        finals = p.final_labels()
        if len(finals) != 1:
            problems.append(f"{p.name} has {len(finals)} final labels {finals}")
    calls = TopologicalSorter()
    for p in schema.all_procs():
        calls.add(p.name)
        for ins in p:
            if isinstance(ins, (Loop, Call)):
                if ins.body == schema.main.name or (ins.body not in schema.procs):
                    problems.append(f"{ins.label} refers to unknown procedure {ins.body}")
                    continue
                calls.add(p.name, ins.body)
    try:
        calls.prepare()
    except CycleError as exc:
        problems.append(f"recursive procedure: call graph has a cycle: {exc.args[1]}")
    arity: dict[str, int] = {}
    for p in schema.all_procs():
        for ins in p:
            for v in instruction_vars(ins):
                n = len(v.indices)
                if arity.setdefault(v.name, n) != n:
                    problems.append(f"variable {v.name} used with arities {arity[v.name]} and {n}")
    return problems


@dataclass(frozen=True)
class IOSets:
    """Index, argument and value variables of an instruction or procedure."""

    ind: frozenset[str]
    arg: frozenset[str]
    val: frozenset[str]

    def __or__(self, other: "IOSets") -> "IOSets":
        return IOSets(self.ind | other.ind, self.arg | other.arg, self.val | other.val)

    def as_dict(self) -> dict:
        return {"ind": sorted(self.ind), "arg": sorted(self.arg), "val": sorted(self.val)}


EMPTY = IOSets(frozenset(), frozenset(), frozenset())


def _var_names(vs) -> frozenset[str]:
    return frozenset(v.name for v in vs if isinstance(v, Var))


def _ind(vs) -> frozenset[str]:
    out: set[str] = set()
    for v in vs:
        if isinstance(v, Var):
            out |= v.index_vars()
    return frozenset(out)


def io_sets(schema: Schema, label: str) -> IOSets:
    """Ind/Arg/Val of the instruction at ``label`` (bodies are unioned in).

    Sets hold variable base names: an array ``a[i]`` contributes ``a`` to Arg
    or Val and ``i`` to Ind.  Ind is always contained in Arg.
    """
    _, ins = schema.find(label)
    return _io_ins(schema, ins, frozenset())


def proc_io_sets(schema: Schema, name: str) -> IOSets:
    return _io_proc(schema, schema.proc(name), frozenset())


def _io_proc(schema: Schema, proc: Proc, stack: frozenset[str]) -> IOSets:
    if proc.name in stack:
        raise SchemaError(f"recursive procedure {proc.name}")
    acc = EMPTY
    for ins in proc:
        acc = acc | _io_ins(schema, ins, stack | {proc.name})
    return acc


def _io_ins(schema: Schema, ins, stack: frozenset[str]) -> IOSets:
    if isinstance(ins, Assign):
        used = (ins.target, *ins.args)
        ind = _ind(used)
        return IOSets(ind, _var_names(ins.args) | ind, frozenset({ins.target.name}))
    if isinstance(ins, Cond):
        ind = _ind(ins.args)
        return IOSets(ind, _var_names(ins.args) | ind, frozenset())
    body = _io_proc(schema, schema.proc(ins.body), stack)
    if isinstance(ins, Loop):
        ind = _ind(ins.args)
        return body | IOSets(ind, _var_names(ins.args) | ind, frozenset())
    return body

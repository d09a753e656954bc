"""Loop transforms: forward orientation and separation into controllers + kernel.

A loop body is *separated* when it splits into a chain of sub-procedures
``P1, ..., Pk`` where each controller only feeds indexes to later parts and
later parts never write indexes of earlier ones.  The last part is the
kernel.  Separation is done by walking the body graph: an instruction joins
the current controller unless one of its index variables may already have
been written by an instruction earlier in the same controller.  Control
leaving a controller is recorded in a dispatch variable (``vLebN``) so the
next part can resume at the right label.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .schema.analysis import IOSets, io_sets, label_graph_order, proc_io_sets, reachable
from .schema.execute import execute
from .schema.interp import StandardInterpretation, bracket_depth
from .schema.model import (Assign, Call, Cond, FreshNames, IndexExpr, LabelLit, Loop, Proc,
                           Schema, SchemaError, Var, replace_successor)

NOT_SEPARATED = "not separated"
SEPARATED = "separated"
STRICT = "strictly separated"


# --- forward orientation ----------------------------------------------------

def _later(proc: Proc, label: str) -> list[str]:
    succ = proc.instrs[label].successors()
    return reachable(proc, succ)


def _offending_index(schema: Schema, proc: Proc, label: str) -> str | None:
    ins = proc.instrs[label]
    if not isinstance(ins, (Assign, Cond)):
        return None
    ind = io_sets(schema, label).ind
    if not ind:
        return None
    written: set[str] = set()
    for lab in _later(proc, label):
        written |= io_sets(schema, lab).val
    hits = sorted(ind & written)
    return hits[0] if hits else None


def is_forward_oriented(schema: Schema, proc_name: str) -> bool:
    """No index used by an assignment/conditional is written later in the body."""
    proc = schema.proc(proc_name)
    return all(_offending_index(schema, proc, lab) is None for lab in proc.instrs)


def _rename_index(var, old: str, new: str):
    if not isinstance(var, Var) or not var.indices:
        return var
    idx = tuple(IndexExpr(ix.func, tuple(new if a == old else a for a in ix.args))
                for ix in var.indices)
    return Var(var.name, idx)


def _rename_in(ins, old: str, new: str):
    args = tuple(_rename_index(a, old, new) for a in ins.args)
    if isinstance(ins, Assign):
        return Assign(ins.label, _rename_index(ins.target, old, new), ins.func, args, ins.next)
    return Cond(ins.label, ins.pred, args, ins.then, ins.orelse)


def forward_orient(schema: Schema, procs: Iterable[str] | None = None) -> Schema:
    """Insert ``newE = id(E)`` copies so every listed body becomes forward oriented.

    By default all loop bodies are processed.  The copies are auxiliary
    variables and do not count when comparing final memories.
    """
    out = schema.copy()
    if procs is None:
        procs = [ins.body for p in out.all_procs() for ins in p if isinstance(ins, Loop)]
    names = FreshNames(out.variables() | set(out.aux))
    labels = FreshNames(out.labels())
    aux = set(out.aux)
    for pname in dict.fromkeys(procs):
        proc = out.proc(pname)
        while True:
            target = next(((lab, e) for lab in label_graph_order(proc)
                           if (e := _offending_index(out, proc, lab)) is not None), None)
            if target is None:
                break
            lab, e = target
            fresh = names(f"{e}_f")
            aux.add(fresh)
            new_lab = labels(f"{lab}_f")
            rebuilt: dict = {}
            for l2, ins in proc.instrs.items():
                if l2 == lab:
                    rebuilt[new_lab] = Assign(new_lab, Var(fresh), "id", (Var(e),), lab)
                    rebuilt[lab] = _rename_in(ins, e, fresh)
                else:
                    rebuilt[l2] = replace_successor(ins, lab, new_lab)
            proc.instrs = rebuilt
            if proc.start == lab:
                proc.start = new_lab
    out.aux = frozenset(aux)
    return out


# --- separation ---------------------------------------------------------------

@dataclass
class SeparatedLoop:
    schema: Schema
    loop_label: str
    body: str
    parts: list[str]
    dispatch_var: str | None = None
    certificates: list[IOSets] = field(default_factory=list)
    verdict: str = SEPARATED

    @property
    def controllers(self) -> list[str]:
        return self.parts[:-1]

    @property
    def kernel(self) -> str:
        return self.parts[-1]

    @property
    def controller_count(self) -> int:
        return len(self.parts) - 1


def check_separated(schema: Schema, parts: list[str]) -> str:
    """Classify a chain of procedures as not / separated / strictly separated."""
    sets = [proc_io_sets(schema, p) for p in parts]
    for i, si in enumerate(sets):
        for sj in sets[i + 1:]:
            if si.ind & sj.val:
                return NOT_SEPARATED
        if i >= 1 and not (si.ind & sets[i - 1].val):
            return NOT_SEPARATED
    if len(sets) >= 2:
        kern = sets[-1]
        if all(not (kern.val & (c.arg | c.ind)) for c in sets[:-1]):
            return STRICT
    return SEPARATED


def _changes_others(io: dict[str, IOSets], rest: set[str]) -> bool:
    return any(io[x].val & io[y].ind for x in rest for y in rest if x != y)


def _walk(proc: Proc, order: list[str], io: dict[str, IOSets], rest: set[str],
          entries: list[str]) -> set[str]:
    preds: dict[str, list[str]] = {lab: [] for lab in rest}
    for lab in rest:
        for s in proc.instrs[lab].successors():
            if s in rest:
                preds[s].append(lab)
    taken: set[str] = set()
    vs: dict[str, frozenset[str]] = {}
    for lab in order:
        if lab not in rest:
            continue
        ps = preds[lab]
        if lab not in entries and not any(p in taken for p in ps):
            continue
        if any(p not in taken for p in ps):
            continue
        seen = frozenset().union(*(vs[p] | io[p].val for p in ps)) if ps else frozenset()
        if io[lab].ind & seen:
            continue
        taken.add(lab)
        vs[lab] = seen
    return taken


def separate_loop(schema: Schema, loop_label: str) -> SeparatedLoop:
    """Split the body of the loop at ``loop_label`` into controllers and a kernel.

    The body is forward oriented first.  The transformed schema keeps the
    loop instruction and replaces its body by a chain of calls, one per part.
    """
    _, loop = schema.find(loop_label)
    if not isinstance(loop, Loop):
        raise SchemaError(f"{loop_label} is not a loop instruction")
    work = forward_orient(schema, [loop.body])
    body = work.proc(loop.body)
    final = body.final
    order = label_graph_order(body)
    io = {lab: io_sets(work, lab) for lab in body.instrs}

    rest = set(body.instrs)
    entries = [body.start]
    groups: list[tuple[set[str], list[str], list[str]]] = []
    while _changes_others(io, rest):
        taken = _walk(body, order, io, rest, entries)
        if taken == rest or not taken:
            break
        exits = [e for e in entries if e not in taken]
        for lab in order:
            if lab in taken:
                for s in body.instrs[lab].successors():
                    if s not in taken and s not in exits:
                        exits.append(s)
        groups.append((taken, entries, exits))
        rest -= taken
        entries = exits
    if not groups:
        return SeparatedLoop(work, loop_label, loop.body, [loop.body],
                             certificates=[proc_io_sets(work, loop.body)], verdict=SEPARATED)
    groups.append((rest, entries, [final]))

    labels = FreshNames(work.labels())
    procnames = FreshNames(set(work.procs) | {work.main.name})
    vleb = FreshNames(work.variables() | set(work.aux))("vLeb")
    part_names: list[str] = []
    new_procs: list[Proc] = []
    for i, (group, ents, _) in enumerate(groups):
        is_kernel = i == len(groups) - 1
        pname = procnames.exact(f"{loop.body}_k" if is_kernel else f"{loop.body}_c{i + 1}")
        end = labels(f"{pname}_end")
        part = Proc(pname, "")
        exit_labels: dict[str, str] = {}

        def route(target: str) -> str:
            return target if target in group else end

        if len(ents) == 1:
            part.start = route(ents[0])
        else:
            chain = [labels(f"{pname}_d") for _ in ents[:-1]]
            part.start = chain[0]
            for j, tgt in enumerate(ents[:-1]):
                other = chain[j + 1] if j + 1 < len(chain) else route(ents[-1])
                part.add(Cond(chain[j], "eq", (Var(vleb), LabelLit(tgt)), route(tgt), other))
        for lab in order:
            if lab not in group:
                continue
            ins = body.instrs[lab]
            for s in ins.successors():
                if s in group:
                    continue
                if is_kernel:
                    dest = end
                else:
                    if s not in exit_labels:
                        exit_labels[s] = labels(f"{pname}_x")
                    dest = exit_labels[s]
                ins = replace_successor(ins, s, dest)
            part.add(ins)
        for tgt, xl in exit_labels.items():
            part.add(Assign(xl, Var(vleb), "lab", (LabelLit(tgt),), end))
        part_names.append(pname)
        new_procs.append(part)

    chain_proc = Proc(loop.body, "")
    calls = [labels(f"{loop.body}_s") for _ in part_names]
    chain_proc.start = calls[0]
    for j, (cl, pname) in enumerate(zip(calls, part_names)):
        chain_proc.add(Call(cl, pname, calls[j + 1] if j + 1 < len(calls) else final))

    out = work.copy()
    procs: dict[str, Proc] = {}
    for name, p in out.procs.items():
        procs[name] = chain_proc if name == loop.body else p
        if name == loop.body:
            for np in new_procs:
                procs[np.name] = np
    out.procs = procs
    out.aux = frozenset(set(out.aux) | {vleb})
    certs = [proc_io_sets(out, p) for p in part_names]
    return SeparatedLoop(out, loop_label, loop.body, part_names, vleb, certs,
                         check_separated(out, part_names))


# --- depth witness ----------------------------------------------------------

def controller_depth_witness(sep: SeparatedLoop, iterations: int = 3, seed: int = 0,
                             fuel: int = 100_000) -> int | None:
    """Maximum bracket depth of index values used after the first controller.

    Each iteration starts from fresh atoms; values written by the first
    controller are atomized as well, so the depth counts how many further
    levels of indirection the controller chain adds.  For a loop whose every
    controller takes part in index production this equals the number of
    controllers minus one.  Kernel-only loops give None.
    """
    if sep.controller_count == 0:
        return None
    interp = StandardInterpretation(coin_seed=seed)
    memory: dict = {}
    best = 0
    seen: list = []

    def observe(_label, _array, idx):
        seen.extend(idx)

    for it in range(iterations):
        memory = {cell: f"t{it}_{k}" for k, cell in enumerate(sorted(memory, key=str))}
        res = execute(sep.schema, interp, fuel, memory=memory, proc=sep.parts[0], trace=False)
        if not res.halted:
            raise SchemaError(f"controller run failed: {res.reason}")
        written = sorted((c for c in res.memory if memory.get(c) != res.memory[c]), key=str)
        memory = dict(res.memory)
        for k, cell in enumerate(written):
            memory[cell] = f"c{it}_{k}"
        seen.clear()
        for part in sep.parts[1:]:
            res = execute(sep.schema, interp, fuel, memory=memory, proc=part,
                          observer=observe, trace=False)
            if not res.halted:
                raise SchemaError(f"part {part} failed: {res.reason}")
            memory = dict(res.memory)
        best = max([best, *(bracket_depth(v) for v in seen)])
    return best

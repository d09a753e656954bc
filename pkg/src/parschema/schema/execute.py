"""Fuel-bounded execution of schemas under an interpretation."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from .interp import Cell, Interpretation, Undefined, cell_name
from .model import Arg, Assign, Call, Cond, LabelLit, Loop, Proc, Schema, Var

BUILTIN_FUNCS = {"lab", "id"}
BUILTIN_PREDS = {"eq"}


class Outcome(str, Enum):
    HALTED = "halted"
    UNDEFINED = "undefined-value"
    FUEL = "fuel-exhausted"


class _OutOfFuel(Exception):
    pass


class _Failed(Exception):
    def __init__(self, label: str, reason: str):
        super().__init__(reason)
        self.label = label
        self.reason = reason


@dataclass
class RunResult:
    outcome: Outcome
    memory: dict[Cell, Any]
    trace: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    steps: int = 0
    failed_at: str | None = None
    reason: str = ""

    @property
    def halted(self) -> bool:
        return self.outcome is Outcome.HALTED

    def memory_text(self) -> dict[str, str]:
        return {cell_name(c): str(v) for c, v in sorted(self.memory.items(), key=lambda kv: cell_name(kv[0]))}


# observer(label, array_name, index_values) is called for every indexed access
Observer = Callable[[str, str, tuple], None]


class _Machine:
    def __init__(self, schema: Schema, interp: Interpretation, fuel: int,
                 memory: dict | None, observer: Observer | None, trace: bool):
        self.schema = schema
        self.interp = interp
        self.fuel = fuel
        self.steps = 0
        self.memory: dict[Cell, Any] = dict(memory or {})
        self.observer = observer
        self.keep_trace = trace
        self.trace: list[tuple[str, tuple[int, ...]]] = []

    def tick(self) -> None:
        if self.steps >= self.fuel:
            raise _OutOfFuel()
        self.steps += 1

    def value_of_cell(self, label: str, cell: Cell) -> Any:
        if cell in self.memory:
            return self.memory[cell]
        try:
            return self.interp.initial(cell)
        except Undefined as exc:
            raise _Failed(label, str(exc)) from None

    def cell(self, label: str, var: Var) -> Cell:
        if not var.indices:
            return var.name
        idx = []
        for ix in var.indices:
            vals = tuple(self.value_of_cell(label, a) for a in ix.args)
            idx.append(vals[0] if ix.func is None else self.call(label, ix.func, vals))
        idx_t = tuple(idx)
        if self.observer is not None:
            self.observer(label, var.name, idx_t)
        return (var.name, idx_t)

    def read(self, label: str, arg: Arg) -> Any:
        if isinstance(arg, LabelLit):
            return arg
        return self.value_of_cell(label, self.cell(label, arg))

    def call(self, label: str, func: str, vals: tuple) -> Any:
        if func in BUILTIN_FUNCS and len(vals) == 1:
            return vals[0]
        try:
            return self.interp.apply(func, vals)
        except Undefined as exc:
            raise _Failed(label, str(exc)) from None

    def test(self, label: str, pred: str, vals: tuple) -> bool:
        if pred in BUILTIN_PREDS and len(vals) == 2:
            return vals[0] == vals[1]
        try:
            return bool(self.interp.test(pred, vals))
        except Undefined as exc:
            raise _Failed(label, str(exc)) from None

    def run_proc(self, proc: Proc, counters: tuple[int, ...]) -> None:
        lab = proc.start
        while lab in proc.instrs:
            ins = proc.instrs[lab]
            self.tick()
            if self.keep_trace:
                self.trace.append((lab, counters))
            if isinstance(ins, Assign):
                vals = tuple(self.read(lab, a) for a in ins.args)
                value = self.call(lab, ins.func, vals)
                self.memory[self.cell(lab, ins.target)] = value
                lab = ins.next
            elif isinstance(ins, Cond):
                vals = tuple(self.read(lab, a) for a in ins.args)
                lab = ins.then if self.test(lab, ins.pred, vals) else ins.orelse
            elif isinstance(ins, Loop):
                body = self.schema.proc(ins.body)
                k = 1
                while True:
                    self.run_proc(body, counters + (k,))
                    self.tick()
                    vals = tuple(self.read(lab, a) for a in ins.args)
                    if not self.test(lab, ins.pred, vals):
                        break
                    k += 1
                lab = ins.next
            else:
                assert isinstance(ins, Call)
                self.run_proc(self.schema.proc(ins.body), counters)
                lab = ins.next


def execute(schema: Schema, interp: Interpretation, fuel: int, *,
            memory: dict | None = None, proc: str | None = None,
            observer: Observer | None = None, trace: bool = True) -> RunResult:
    """Run ``schema`` (or one of its procedures) from ``memory``.

    Fuel counts executed instructions plus one per loop-continuation test and
    is mandatory.  The trace lists ``(label, iteration counters)``; a halted
    main-procedure run ends with its final label.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    m = _Machine(schema, interp, fuel, memory, observer, trace)
    target = schema.proc(proc) if proc else schema.main
    try:
        m.run_proc(target, ())
    except _OutOfFuel:
        return RunResult(Outcome.FUEL, m.memory, m.trace, m.steps, reason="fuel exhausted")
    except _Failed as exc:
        return RunResult(Outcome.UNDEFINED, m.memory, m.trace, m.steps, exc.label, exc.reason)
    if trace:
        m.trace.append((target.final, ()))
    return RunResult(Outcome.HALTED, m.memory, m.trace, m.steps)


def _visible(memory: dict, aux: frozenset[str]) -> dict:
    out = {}
    for cell, v in memory.items():
        base = cell[0] if isinstance(cell, tuple) else cell
        if base not in aux:
            out[cell] = v
    return out


def compare_runs(a: RunResult, b: RunResult, aux: frozenset[str] = frozenset()) -> bool | None:
    """True/False for equal/different results, None when either ran out of fuel."""
    if a.outcome is Outcome.FUEL or b.outcome is Outcome.FUEL:
        return None
    if a.outcome is not b.outcome:
        return False
    if a.outcome is Outcome.UNDEFINED:
        return True
    return _visible(a.memory, aux) == _visible(b.memory, aux)


def runs_equal(s1: Schema, s2: Schema, interp: Interpretation, fuel: int) -> bool | None:
    """Compare final memories of two schemas, ignoring auxiliary variables.

    Returns None (indeterminate) if either run exhausts its fuel.
    """
    r1 = execute(s1, interp, fuel, trace=False)
    r2 = execute(s2, interp, fuel, trace=False)
    return compare_runs(r1, r2, s1.aux | s2.aux)

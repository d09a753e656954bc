"""Priority loops: nested scans over ranked lists driven by a vector-pointer.

Input list ``L_j`` has priority ``j`` and is scanned by pointer ``p_j``; the
pointer vector ``(p_1, ..., p_n)`` advances in lexicographic order.  An output
list of priority ``q`` holds one cell per prefix ``(p_1, ..., p_{q-1})``, so
its cell is shared by one whole run of the level-q scan and is private to a
single iteration of every shallower level.

The kernel sees the input elements at the pointer and an output view.  The
view only allows reads of declared argument outputs and writes of declared
value outputs, so the declared signature is the one actually used.
"""
from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence


class PriorityLoopError(ValueError):
    pass


@dataclass(frozen=True)
class OutputList:
    name: str
    priority: int
    read: bool = False                    # kernel reads it (Arg)
    write: bool = True                    # kernel writes it (Val)
    init: Callable[[dict], Any] | None = None   # first value from the prefix rows


@dataclass
class PriorityLoop:
    """``inputs[j-1]`` is the name of the priority-j input list."""

    inputs: tuple[str, ...]
    outputs: tuple[OutputList, ...]
    kernel: Callable[[dict, "OutputView"], None]
    starters: dict[int, Callable[[tuple, "OutputView"], None]] = field(default_factory=dict)
    finals: dict[int, Callable[[tuple, "OutputView"], None]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = set(self.inputs)
        if len(names) != len(self.inputs):
            raise PriorityLoopError("duplicate input list")
        for o in self.outputs:
            if not 1 <= o.priority <= self.levels:
                raise PriorityLoopError(f"output {o.name} has priority {o.priority} outside 1..{self.levels}")
            if o.name in names:
                raise PriorityLoopError(f"{o.name} is both input and output")
            names.add(o.name)
        for lvl in (*self.starters, *self.finals):
            if not 1 <= lvl <= self.levels:
                raise PriorityLoopError(f"hook for unknown level {lvl}")

    @property
    def levels(self) -> int:
        return len(self.inputs)

    def output(self, name: str) -> OutputList:
        for o in self.outputs:
            if o.name == name:
                return o
        raise KeyError(name)

    @property
    def arg(self) -> set[str]:
        return set(self.inputs) | {o.name for o in self.outputs if o.read}

    @property
    def val(self) -> set[str]:
        return {o.name for o in self.outputs if o.write}

    def shared_lists(self) -> set[str]:
        """Lists both read and written by the kernel."""
        return self.arg & self.val


def independence_level(pl: PriorityLoop) -> int | None:
    """Greatest r such that every read-and-written list has priority > r.

    Iterations of the level-r scan (and of every shallower scan) are then
    independent.  ``None`` when a priority-1 list is shared; the number of
    levels when nothing is shared.
    """
    shared = pl.shared_lists()
    if not shared:
        return pl.levels
    r = min(pl.output(n).priority for n in shared) - 1
    return r or None


class OutputView:
    """Kernel access to outputs at the current pointer."""

    def __init__(self, pl: PriorityLoop, store: dict, rows: dict, pointer: tuple,
                 stamps: dict | None = None, hook: bool = False):
        self._pl, self._store, self._rows = pl, store, rows
        self._pointer, self._stamps, self._hook = pointer, stamps, hook

    def _key(self, name: str) -> tuple:
        o = self._pl.output(name)
        if len(self._pointer) < o.priority - 1:
            raise PriorityLoopError(f"{name} is not addressable at pointer {self._pointer}")
        return (name, self._pointer[: o.priority - 1])

    def _ensure(self, key: tuple) -> None:
        if key not in self._store:
            o = self._pl.output(key[0])
            prefix_rows = {n: v for n, v in self._rows.items()
                           if self._pl.inputs.index(n) < o.priority - 1}
            self._store[key] = o.init(prefix_rows) if o.init else None

    def get(self, name: str) -> Any:
        if not self._hook and not self._pl.output(name).read:
            raise PriorityLoopError(f"kernel reads {name} which is not declared as read")
        key = self._key(name)
        self._ensure(key)
        return self._store[key]

    def set(self, name: str, value: Any) -> None:
        if not self._hook and not self._pl.output(name).write:
            raise PriorityLoopError(f"kernel writes {name} which is not declared as written")
        key = self._key(name)
        self._store[key] = value
        if self._stamps is not None:
            self._stamps[key] = self._pointer


@dataclass
class LoopResult:
    outputs: dict[str, dict[tuple, Any]]
    steps: int

    def normalized(self) -> dict[str, list]:
        return {n: sorted(cells.items()) for n, cells in sorted(self.outputs.items())}


def _collect(pl: PriorityLoop, store: dict) -> dict[str, dict[tuple, Any]]:
    out: dict[str, dict[tuple, Any]] = {o.name: {} for o in pl.outputs}
    for (name, prefix), v in store.items():
        out[name][prefix] = v
    return out


class _Runner:
    def __init__(self, pl: PriorityLoop, data: dict[str, Sequence], store: dict, stamps: dict):
        missing = [n for n in pl.inputs if n not in data]
        if missing:
            raise PriorityLoopError(f"no data for input lists {missing}")
        self.pl, self.data, self.store, self.stamps = pl, data, store, stamps
        self.steps = 0

    def rows(self, pointer: tuple) -> dict:
        return {self.pl.inputs[j]: self.data[self.pl.inputs[j]][p] for j, p in enumerate(pointer)}

    def hook(self, table: dict, level: int, pointer: tuple) -> None:
        fn = table.get(level)
        if fn is not None:
            fn(pointer, OutputView(self.pl, self.store, self.rows(pointer), pointer, self.stamps, True))

    def kernel(self, pointer: tuple) -> None:
        self.steps += 1
        rows = self.rows(pointer)
        self.pl.kernel(rows, OutputView(self.pl, self.store, rows, pointer, self.stamps))


def _sequential_scan(runner: _Runner, pointer: tuple) -> None:
    level = len(pointer) + 1
    if level > runner.pl.levels:
        runner.kernel(pointer)
        return
    runner.hook(runner.pl.starters, level, pointer)
    for p in range(len(runner.data[runner.pl.inputs[level - 1]])):
        _sequential_scan(runner, pointer + (p,))
    runner.hook(runner.pl.finals, level, pointer)


def run_priority_loop(pl: PriorityLoop, data: dict[str, Sequence], mode: str = "sequential",
                      level: int | None = None, workers: int = 4) -> LoopResult:
    """Run sequentially, or with the level-``level`` scan split over ``workers``.

    Parallel mode walks the shallower levels in order; each run of the
    level-r scan hands its rows to workers round robin.  Workers start from
    a private copy of the outputs and the copies are merged cell by cell,
    keeping the write with the lexicographically last pointer.
    """
    store: dict = {}
    stamps: dict = {}
    if mode == "sequential":
        runner = _Runner(pl, data, store, stamps)
        _sequential_scan(runner, ())
        return LoopResult(_collect(pl, store), runner.steps)
    if mode != "parallel":
        raise PriorityLoopError(f"unknown mode {mode!r}")
    certified = independence_level(pl)
    if level is None or certified is None or not 1 <= level <= certified:
        raise PriorityLoopError(f"parallel level {level} is not certified (independence level {certified})")
    if workers < 1:
        raise PriorityLoopError("need at least one worker")
    runner = _Runner(pl, data, store, stamps)
    steps = 0

    def outer(pointer: tuple) -> None:
        nonlocal steps
        d = len(pointer) + 1
        if d < level:
            runner.hook(pl.starters, d, pointer)
            for p in range(len(data[pl.inputs[d - 1]])):
                outer(pointer + (p,))
            runner.hook(pl.finals, d, pointer)
            return
        runner.hook(pl.starters, d, pointer)
        rows = list(range(len(data[pl.inputs[d - 1]])))
        results = []
        for w in range(workers):
            mine = rows[w::workers]
            if not mine:
                continue
            wstore, wstamps = copy.deepcopy(store), {}
            wr = _Runner(pl, data, wstore, wstamps)
            for p in mine:
                _sequential_scan(wr, pointer + (p,))
            steps += wr.steps
            results.append((wstore, wstamps))
        merged_stamps: dict = {}
        for wstore, wstamps in results:
            for key, v in wstore.items():
                if key not in store and key not in wstamps:
                    store[key] = v          # lazily initialized, never written
            for key, stamp in wstamps.items():
                if key not in merged_stamps or stamp > merged_stamps[key]:
                    merged_stamps[key] = stamp
                    store[key] = wstore[key]
        stamps.update(merged_stamps)
        runner.hook(pl.finals, d, pointer)

    outer(())
    return LoopResult(_collect(pl, store), steps + runner.steps)


# --- fixtures -------------------------------------------------------------------

def expenses_loop() -> PriorityLoop:
    """Office-expense limit control.

    Level 1 scans departments (limits), level 2 the purchases table (the
    activated one), level 3 the price list.  ``Limit`` is a running balance
    per department; ``LimitMark`` flags a department that went negative.
    """
    def kernel(rows: dict, out: OutputView) -> None:
        dep, buy, price = rows["Limits"], rows["Bought"], rows["Prices"]
        if dep["DepL"] == buy["DepB"] and price["Prod"] == buy["Sup"]:
            out.set("Limit", out.get("Limit") - buy["Quant"] * price["price"])
            if out.get("Limit") < 0:
                out.set("LimitMark", "*")

    return PriorityLoop(
        inputs=("Limits", "Bought", "Prices"),
        outputs=(OutputList("Limit", 2, read=True, init=lambda rows: rows["Limits"]["Limit"]),
                 OutputList("LimitMark", 2)),
        kernel=kernel)


def expenses_data(seed: int, departments: int = 6, purchases: int = 12, products: int = 5) -> dict:
    rng = random.Random(seed)
    return {
        "Limits": [{"DepL": f"d{i}", "Limit": rng.randint(0, 400)} for i in range(departments)],
        "Bought": [{"DepB": f"d{rng.randrange(departments)}", "Sup": f"s{rng.randrange(products)}",
                    "Quant": rng.randint(1, 9)} for _ in range(purchases)],
        "Prices": [{"Prod": f"s{i}", "price": rng.randint(1, 20)} for i in range(products)],
    }


def four_list_loop() -> PriorityLoop:
    """Lists A, B, C, D; a per-(a, b) accumulator makes level 2 independent."""
    def kernel(rows: dict, out: OutputView) -> None:
        out.set("acc", out.get("acc") + rows["A"] * rows["B"] * rows["C"] - rows["D"])
        out.set("seen", (rows["A"], rows["B"]))

    return PriorityLoop(
        inputs=("A", "B", "C", "D"),
        outputs=(OutputList("acc", 3, read=True, init=lambda rows: 0),
                 OutputList("seen", 1)),
        kernel=kernel)


def product_sum_loop() -> PriorityLoop:
    """Sum of pairwise products of two lists; the global total serializes level 1."""
    def kernel(rows: dict, out: OutputView) -> None:
        out.set("total", out.get("total") + rows["X"] * rows["Y"])

    return PriorityLoop(inputs=("X", "Y"),
                        outputs=(OutputList("total", 1, read=True, init=lambda rows: 0),),
                        kernel=kernel)


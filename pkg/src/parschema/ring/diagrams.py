"""Parallel execution diagrams for a priority loop on a ring of modules.

Rows are modules ``M1..Mw``, columns are time steps.  In the shared-memory
diagram every module owns a block of the independent list B and scans it
against each element of A.  In the distributed diagram list C is split
into fragments ``C1..Cw`` that travel around the ring; a module idles until
fragment C1 reaches it, which gives the startup staircase.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Cell:
    a: int | None            # A element (1-based), None while idle
    b: int | None            # B element (1-based)
    fragment: str            # "C", "Cj" or the held fragment while idle
    extra: tuple[str, ...] = ()
    idle: bool = False

    def text(self) -> str:
        if self.idle:
            return f"({self.fragment})"
        return ",".join([str(self.a), str(self.b), self.fragment, *self.extra])


@dataclass
class ExecutionDiagram:
    workers: int
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)   # (module, time) -> cell
    holders: dict[tuple[int, str], int] = field(default_factory=dict)  # (time, fragment) -> module

    @property
    def steps(self) -> int:
        return max((t for _, t in self.cells), default=0)

    def row(self, module: int, upto: int | None = None) -> list[Cell]:
        end = self.steps if upto is None else upto
        return [self.cells[(module, t)] for t in range(1, end + 1) if (module, t) in self.cells]

    def processed(self) -> list[tuple[int, int, str]]:
        """Every (a, b, fragment) combination handled, sorted."""
        return sorted((c.a, c.b, c.fragment) for c in self.cells.values() if not c.idle)

    def render(self, upto: int | None = None) -> str:
        end = self.steps if upto is None else min(upto, self.steps)
        head = ["Time/module", *(str(t) for t in range(1, end + 1))]
        rows = [head]
        for m in range(1, self.workers + 1):
            rows.append([f"M{m}", *(self.cells[(m, t)].text() if (m, t) in self.cells else ""
                                    for t in range(1, end + 1))])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"

    def records(self) -> list[dict[str, Any]]:
        return [{"module": m, "time": t, "cell": c.text(), "idle": c.idle}
                for (m, t), c in sorted(self.cells.items())]


def diagram_shared(workers: int, a_len: int = 2, b_len: int = 16, extra: tuple[str, ...] = ("C", "D")) -> ExecutionDiagram:
    """Block-distribute B; module w walks A outer, its B block inner."""
    if workers < 1 or b_len % workers:
        raise ValueError("B must split evenly across workers")
    nb = b_len // workers
    d = ExecutionDiagram(workers)
    for w in range(1, workers + 1):
        t = 0
        for a in range(1, a_len + 1):
            for j in range(nb):
                t += 1
                d.cells[(w, t)] = Cell(a, (w - 1) * nb + j + 1, extra[0], extra[1:])
    return d


def diagram_rotating(workers: int, a_len: int = 2, b_len: int | None = None) -> ExecutionDiagram:
    """Fragments of C rotate one module to the right per step.

    At time t module k holds fragment ``C_{((k - t) mod w) + 1}``.  Module k
    starts when C1 arrives (t = k) and then processes its B block against
    every fragment in the order they reach it.
    """
    w = workers
    if w < 1:
        raise ValueError("need at least one worker")
    b_len = w if b_len is None else b_len
    if b_len % w:
        raise ValueError("B must split evenly across workers")
    nb = b_len // w
    active = w * nb * a_len
    total = w - 1 + active
    d = ExecutionDiagram(w)
    for t in range(1, total + 1):
        for k in range(1, w + 1):
            frag = f"C{(k - t) % w + 1}"
            d.holders[(t, frag)] = k
            s = t - k
            if s < 0:
                d.cells[(k, t)] = Cell(None, None, frag, idle=True)
            elif s < active:
                a = s // (w * nb) + 1
                b = (k - 1) * nb + (s // w) % nb + 1
                d.cells[(k, t)] = Cell(a, b, frag)
    return d


def sequential_combinations(workers: int, a_len: int, b_len: int) -> list[tuple[int, int, str]]:
    """Reference: every (a, b, C fragment) pair a single processor would handle."""
    return sorted((a, b, f"C{j}") for a in range(1, a_len + 1) for b in range(1, b_len + 1)
                  for j in range(1, workers + 1))

"""Decentralized equalization and sorting on an even ring of modules.

Both algorithms alternate two pairings of neighbors:

* phase A: (1, 2), (3, 4), ..., (2n-1, 2n)
* phase B: (2, 3), (4, 5), ..., (2n, 1)

In a pair the left module is the lower index, except for the wraparound
pair (2n, 1) whose left module is 2n.  Equalization moves counts only;
sorting moves actual elements with merge-split exchanges.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence


def pairs(modules: int, phase: int) -> list[tuple[int, int]]:
    """0-based (left, right) pairs for phase 0 (A), 1 (B), 2 (A), ..."""
    if modules % 2:
        raise ValueError("module count must be even")
    if phase % 2 == 0:
        return [(i, i + 1) for i in range(0, modules, 2)]
    if modules == 2:
        return [(1, 0)]
    return [(i, (i + 1) % modules) for i in range(1, modules, 2)]


@dataclass
class EqualizeTrace:
    phases: list[tuple[int, ...]] = field(default_factory=list)   # state after each phase
    start: tuple[int, ...] = ()
    converged: bool = False

    @property
    def rounds(self) -> int:
        return len(self.phases)

    def spread(self, k: int) -> int:
        state = self.start if k == 0 else self.phases[k - 1]
        return max(state) - min(state)

    def first_balanced(self) -> int | None:
        """Smallest phase count after which max - min <= 1 (0 = already balanced)."""
        for k in range(len(self.phases) + 1):
            if self.spread(k) <= 1:
                return k
        return None

    @property
    def final(self) -> tuple[int, ...]:
        return self.phases[-1] if self.phases else self.start

    def render(self) -> str:
        lines = [f"{0:>5}: " + " ".join(f"{v:>4}" for v in self.start)]
        for k, st in enumerate(self.phases, 1):
            lines.append(f"{k:>5}: " + " ".join(f"{v:>4}" for v in st))
        return "\n".join(lines) + "\n"


def equalize(counts: Sequence[int], max_phases: int | None = None) -> EqualizeTrace:
    """Pairwise equalization until balanced (max - min <= 1) or stuck.

    An odd joint count puts the extra element on the left module.  The run
    also stops after two consecutive phases that change nothing.
    """
    state = list(counts)
    m = len(state)
    if m % 2 or m == 0:
        raise ValueError("module count must be even and positive")
    if any(c < 0 for c in state):
        raise ValueError("counts must be non-negative")
    limit = max_phases if max_phases is not None else 4 * m * m + 10 * m
    trace = EqualizeTrace(start=tuple(state))
    quiet = 0
    phase = 0
    while max(state) - min(state) > 1 and quiet < 2 and phase < limit:
        before = tuple(state)
        for l, r in pairs(m, phase):
            tot = state[l] + state[r]
            state[l], state[r] = (tot + 1) // 2, tot // 2
        trace.phases.append(tuple(state))
        quiet = quiet + 1 if tuple(state) == before else 0
        phase += 1
    trace.converged = max(state) - min(state) <= 1
    return trace


@dataclass
class SortTrace:
    start: list[list] = field(default_factory=list)
    phases: list[list[list]] = field(default_factory=list)
    exchanges: list[int] = field(default_factory=list)    # pairs that changed per phase

    @property
    def final(self) -> list[list]:
        return self.phases[-1] if self.phases else self.start

    @property
    def rounds(self) -> int:
        return len(self.phases)

    def flat(self) -> list:
        return [x for frag in self.final for x in frag]

    def render(self) -> str:
        out = []
        for k, st in enumerate([self.start, *self.phases]):
            out.append(f"{k:>5}: " + " | ".join(" ".join(map(str, f)) for f in st))
        return "\n".join(out) + "\n"


def _globally_sorted(frags: list[list]) -> bool:
    flat = [x for f in frags for x in f]
    return all(a <= b for a, b in zip(flat, flat[1:]))


def ring_sort(fragments: Sequence[Sequence]) -> SortTrace:
    """Local sort, then odd-even merge-split phases until globally sorted.

    The pair (2n, 1) is never used: ascending order runs from module 1 to
    module 2n, so wrapping around would undo it.  At least one phase runs
    (for an already sorted ring it is a pure verification phase).  With equal
    fragment sizes at most ``modules`` phases are needed; sizes differing by
    one still sort but may take longer.
    """
    m = len(fragments)
    if m % 2 or m == 0:
        raise ValueError("module count must be even and positive")
    sizes = [len(f) for f in fragments]
    if max(sizes) - min(sizes) > 1:
        raise ValueError("fragments must be equalized first (sizes differ by more than one)")
    frags = [sorted(f) for f in fragments]
    trace = SortTrace(start=[list(f) for f in frags])
    phase = 0
    while True:
        changed = 0
        for l, r in pairs(m, phase):
            if r < l:
                continue
            merged = sorted(frags[l] + frags[r])
            left, right = merged[: len(frags[l])], merged[len(frags[l]):]
            if left != frags[l]:
                changed += 1
            frags[l], frags[r] = left, right
        trace.phases.append([list(f) for f in frags])
        trace.exchanges.append(changed)
        phase += 1
        if _globally_sorted(frags) or phase > m + sum(sizes):
            break
    return trace

"""Odd-even handshaking between ring neighbors, simulated with an event queue.

Phase s pairs every module with one neighbor.  In even phases odd modules
send to their left neighbor (state q) and even modules receive from their
right neighbor (state p); the roles swap after every handshake, so the
partners alternate sides: pairs (2,3), (4,5), ..., (2n,1) and then
(1,2), (3,4), ...

Two timing models:

* ``plain``: a module computes one step, then handshakes.  A slow module
  holds up its partner, which holds up the next one, and so on.
* ``flag``: communication runs apart from computation.  A sender with no
  finished package goes through state f, sends a flag ``F(id)`` instead of a
  package and waits in state r until the partner echoes its own id back.

The automaton is the transition table below; ``step`` applies one row.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Sequence

READY, BUSY = "ready", "busy"

# (state, input symbol, condition) -> (action, next state)
#   symbol: "-" none, "K" package, "F" flag; condition on memory or flag id
TRANSITIONS: dict[tuple[str, str, str], tuple[str, str]] = {
    ("q", "-", READY): ("send K left", "p"),
    ("q", "-", BUSY): ("raise flag", "f"),
    ("f", "-", "*"): ("send F(id) left", "r"),
    ("r", "F", "own"): ("take package from right", "p"),
    ("r", "F", "other"): ("wait", "r"),
    ("p", "K", "*"): ("store package", "q"),
    ("p", "F", "*"): ("echo flag", "q"),
}


def step(state: str, symbol: str = "-", memory: str = READY, flag_id: int | None = None,
         own_id: int | None = None) -> tuple[str, str]:
    """Apply one automaton command; returns (action, next state)."""
    if state == "q":
        key = ("q", "-", memory)
    elif state == "r":
        if symbol != "F":
            return "wait", "r"
        key = ("r", "F", "own" if flag_id == own_id else "other")
    else:
        key = (state, symbol, "*")
    if key not in TRANSITIONS:
        raise ValueError(f"no command for {key}")
    return TRANSITIONS[key]


def transition_table() -> str:
    rows = [("state", "input", "memory/flag", "action", "next")]
    rows += [(s, i, c, a, n) for (s, i, c), (a, n) in TRANSITIONS.items()]
    widths = [max(len(r[k]) for r in rows) for k in range(5)]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def partner(module: int, phase: int, modules: int) -> int:
    """1-based neighbor of ``module`` in ``phase``."""
    odd = module % 2 == 1
    sends_left = odd == (phase % 2 == 0)
    return (module - 2) % modules + 1 if sends_left else module % modules + 1


def role(module: int, phase: int) -> str:
    return "q" if (module % 2 == 1) == (phase % 2 == 0) else "p"


@dataclass
class Event:
    time: int
    module: int
    state: str
    symbol: str
    action: str
    next: str

    def text(self) -> str:
        return f"{self.time:>6} M{self.module:<3} {self.state} {self.symbol:<5} {self.action} -> {self.next}"


@dataclass
class HandshakeTrace:
    mode: str
    modules: int
    events: list[Event] = field(default_factory=list)
    handshakes: dict[tuple[int, int], int] = field(default_factory=dict)  # (module, phase) -> time
    waits: list[int] = field(default_factory=list)
    packages: list[int] = field(default_factory=list)
    flags: list[int] = field(default_factory=list)
    deadlock: bool = False
    stuck: list[int] = field(default_factory=list)

    @property
    def max_wait(self) -> int:
        return max(self.waits, default=0)

    def skew(self) -> int:
        """Largest spread of handshake times within one phase."""
        by_phase: dict[int, list[int]] = {}
        for (_, s), t in self.handshakes.items():
            by_phase.setdefault(s, []).append(t)
        return max((max(v) - min(v) for v in by_phase.values()), default=0)

    def states(self, module: int) -> list[str]:
        return [e.state for e in self.events if e.module == module and e.state in "qp"]

    def render(self) -> str:
        lines = [f"mode {self.mode} modules {self.modules} deadlock {self.deadlock}"]
        lines.append("module  wait  packages  flags")
        for k in range(self.modules):
            lines.append(f"M{k + 1:<6} {self.waits[k]:>4}  {self.packages[k]:>8}  {self.flags[k]:>5}")
        return "\n".join(lines) + "\n"


Cost = int | Sequence[int] | Callable[[int], int] | None


def _cost(c: Cost, s: int) -> int | None:
    if c is None:
        return None
    if callable(c):
        return c(s)
    if isinstance(c, int):
        return c
    return c[s % len(c)]


def run_handshake(modules: int, steps: int, timing: Sequence[Cost], mode: str = "plain",
                  comm: int = 1, stray_flags: dict[tuple[int, int], int] | None = None) -> HandshakeTrace:
    """Simulate ``steps`` handshakes per module.

    ``timing[k]`` is module k+1's compute cost per step (an int, a cycle of
    ints, a function of the step, or None for a module that never finishes).
    ``stray_flags`` maps (module, phase) to a foreign flag id that reaches
    the module while it waits in state r.
    """
    if modules % 2 or modules < 2:
        raise ValueError("module count must be even")
    if mode not in ("plain", "flag"):
        raise ValueError(f"unknown mode {mode!r}")
    if len(timing) != modules:
        raise ValueError("one timing entry per module")
    stray_flags = stray_flags or {}
    tr = HandshakeTrace(mode, modules, waits=[0] * modules, packages=[0] * modules, flags=[0] * modules)
    queue: list[tuple[int, int, int, int]] = []   # (time, seq, module, phase)
    seq = 0

    def schedule(t: int, k: int, s: int) -> None:
        nonlocal seq
        heapq.heappush(queue, (t, seq, k, s))
        seq += 1

    # flag mode: packages finish on a free-running compute timeline
    ready_at: list[list[int]] = [[] for _ in range(modules)]
    sent = [0] * modules
    if mode == "flag":
        for k in range(modules):
            t = 0
            for s in range(steps):
                c = _cost(timing[k], s)
                if c is None:
                    break
                t += c
                ready_at[k].append(t)

    for k in range(1, modules + 1):
        c = _cost(timing[k - 1], 0) if mode == "plain" else 0
        if c is not None:
            schedule(c, k, 0)
    waiting: dict[tuple[int, int], int] = {}   # (module, phase) -> arrival time
    finished = [0] * modules
    while queue:
        t, _, k, s = heapq.heappop(queue)
        j = partner(k, s, modules)
        if (j, s) not in waiting:
            waiting[(k, s)] = t
            continue
        tj = waiting.pop((j, s))
        done = t + comm
        for m, arrived in ((k, t), (j, tj)):
            tr.waits[m - 1] += done - comm - arrived
        sender, receiver = (k, j) if role(k, s) == "q" else (j, k)
        memory = READY
        if mode == "flag":
            memory = READY if sent[sender - 1] < len(ready_at[sender - 1]) and \
                ready_at[sender - 1][sent[sender - 1]] <= done - comm else BUSY
        action, nxt = step("q", memory=memory)
        tr.events.append(Event(done, sender, "q", "-", action, nxt))
        if nxt == "p":
            tr.packages[sender - 1] += 1
            sent[sender - 1] += 1
            tr.events.append(Event(done, receiver, "p", "K", *step("p", "K")))
        else:
            tr.flags[sender - 1] += 1
            tr.events.append(Event(done, sender, "f", "-", *step("f")))
            tr.events.append(Event(done, receiver, "p", f"F{sender}", *step("p", "F")))
            stray = stray_flags.get((sender, s))
            if stray is not None:
                tr.events.append(Event(done, sender, "r", f"F{stray}",
                                       *step("r", "F", flag_id=stray, own_id=sender)))
                tr.waits[sender - 1] += comm
                tr.waits[receiver - 1] += comm
                done += comm
            tr.events.append(Event(done, sender, "r", f"F{sender}",
                                   *step("r", "F", flag_id=sender, own_id=sender)))
        for m in (k, j):
            tr.handshakes[(m, s)] = done
            finished[m - 1] += 1
            if s + 1 < steps:
                c = _cost(timing[m - 1], s + 1) if mode == "plain" else 0
                if c is not None:
                    schedule(done + c, m, s + 1)
    tr.stuck = sorted(k for k in range(1, modules + 1) if finished[k - 1] < steps)
    tr.deadlock = bool(tr.stuck)
    return tr


# --- fault detection --------------------------------------------------------------

@dataclass
class Detection:
    phase: int
    detector: int
    suspect: int
    reason: str


def detect_fault(modules: int, faulty: int | None = None, behavior: str = "silent",
                 phases: int = 100, start: int = 0) -> list[Detection]:
    """Neighbors compare automaton states at every handshake.

    A healthy partner is in the opposite role (q against p).  ``silent``
    stops answering from phase ``start``; ``wrong_state`` keeps reporting
    the role it had at ``start``.
    """
    if behavior not in ("silent", "wrong_state"):
        raise ValueError(f"unknown behavior {behavior!r}")
    found: list[Detection] = []
    for s in range(phases):
        for k in range(1, modules + 1):
            if k == faulty:
                continue
            j = partner(k, s, modules)
            mine = role(k, s)
            if j == faulty and s >= start:
                if behavior == "silent":
                    found.append(Detection(s, k, j, "no response"))
                    continue
                reported = role(j, start)
            else:
                reported = role(j, s)
            if reported == mine:
                found.append(Detection(s, k, j, f"state mismatch ({mine} against {reported})"))
    return found

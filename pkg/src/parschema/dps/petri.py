"""Petri nets and their encoding as data processing specifications.

Each place p becomes a set ``P_p`` holding the tokens ``1..mu(p)``, so the
set stays a set while counting.  Each transition t becomes one system whose
guard says every input place holds at least ``k(p, t)`` tokens (token
number k is present) and whose definitions rewrite the touched places to
``Tokens[P_p, delta]``.  A shared ``Tick`` set is the trigger: every firing
increments it, which makes all systems eligible again on the next step.
The specification runs under the ``single`` strategy, firing one
applicable transition per step like the net does.

Net files list places, transitions, weighted arcs and a marking::

    places p1 p2
    transitions t1
    p1 -> t1 2
    t1 -> p2
    marking p1=1 p2=0
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..setdef.syntax import App, Const, NameRef, Sym, parse_formula
from .engine import DPS, DpsError, OpenSystem, Runner, image

Marking = dict[str, int]


@dataclass
class PetriNet:
    places: list[str]
    transitions: list[str]
    pre: dict[tuple[str, str], int] = field(default_factory=dict)     # (place, transition) -> k(p, t)
    post: dict[tuple[str, str], int] = field(default_factory=dict)    # (transition, place) -> k(t, q)
    marking: Marking = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.places) & set(self.transitions):
            raise DpsError("places and transitions must be disjoint")
        for (p, t), k in self.pre.items():
            if p not in self.places or t not in self.transitions or k < 1:
                raise DpsError(f"bad input arc {p} -> {t}")
        for (t, q), k in self.post.items():
            if t not in self.transitions or q not in self.places or k < 1:
                raise DpsError(f"bad output arc {t} -> {q}")
        self.marking = {p: self.marking.get(p, 0) for p in self.places}
        if any(v < 0 for v in self.marking.values()):
            raise DpsError("marking must be nonnegative")

    def allowed(self, t: str, m: Marking | None = None) -> bool:
        m = self.marking if m is None else m
        return all(m[p] >= k for (p, tt), k in self.pre.items() if tt == t)

    def enabled(self, m: Marking | None = None) -> list[str]:
        return [t for t in self.transitions if self.allowed(t, m)]

    def fire(self, t: str, m: Marking | None = None) -> Marking:
        m = dict(self.marking if m is None else m)
        if not self.allowed(t, m):
            raise DpsError(f"transition {t} is not allowed")
        for (p, tt), k in self.pre.items():
            if tt == t:
                m[p] -= k
        for (tt, q), k in self.post.items():
            if tt == t:
                m[q] += k
        return m

    def delta(self, t: str) -> dict[str, int]:
        d = {p: 0 for p in self.places}
        for (p, tt), k in self.pre.items():
            if tt == t:
                d[p] -= k
        for (tt, q), k in self.post.items():
            if tt == t:
                d[q] += k
        return d

    def render(self) -> str:
        lines = [f"places {' '.join(self.places)}", f"transitions {' '.join(self.transitions)}"]
        lines += [f"{p} -> {t} {k}" for (p, t), k in sorted(self.pre.items())]
        lines += [f"{t} -> {q} {k}" for (t, q), k in sorted(self.post.items())]
        lines.append("marking " + " ".join(f"{p}={self.marking[p]}" for p in self.places))
        return "\n".join(lines) + "\n"


def parse_net(text: str) -> PetriNet:
    places: list[str] = []
    transitions: list[str] = []
    arcs: list[tuple[str, str, int]] = []
    marking: Marking = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "places":
                places += words[1:]
            elif words[0] == "transitions":
                transitions += words[1:]
            elif words[0] == "marking":
                for w in words[1:]:
                    p, v = w.split("=")
                    marking[p] = int(v)
            elif len(words) in (3, 4) and words[1] == "->":
                arcs.append((words[0], words[2], int(words[3]) if len(words) == 4 else 1))
            else:
                raise ValueError(f"cannot read {line!r}")
        except ValueError as exc:
            raise DpsError(f"line {lineno}: {exc}") from None
    pre, post = {}, {}
    for a, b, k in arcs:
        if a in places and b in transitions:
            pre[(a, b)] = pre.get((a, b), 0) + k
        elif a in transitions and b in places:
            post[(a, b)] = post.get((a, b), 0) + k
        else:
            raise DpsError(f"arc {a} -> {b} must join a place and a transition")
    unknown = set(marking) - set(places)
    if unknown:
        raise DpsError(f"marking names unknown places {sorted(unknown)}")
    return PetriNet(places, transitions, pre, post, marking)


def random_net(rng: random.Random, n_places: int = 4, n_transitions: int = 3, max_weight: int = 2,
               max_tokens: int = 3) -> PetriNet:
    places = [f"p{i}" for i in range(1, n_places + 1)]
    transitions = [f"t{i}" for i in range(1, n_transitions + 1)]
    pre, post = {}, {}
    for t in transitions:
        for p in places:
            if rng.random() < 0.4:
                pre[(p, t)] = rng.randint(1, max_weight)
            if rng.random() < 0.4:
                post[(t, p)] = rng.randint(1, max_weight)
    marking = {p: rng.randint(0, max_tokens) for p in places}
    return PetriNet(places, transitions, pre, post, marking)


@dataclass
class MarkingCodec:
    places: list[str]

    def set_name(self, p: str) -> str:
        return f"P_{p}"

    def encode(self, m: Marking) -> dict[str, frozenset]:
        fam = {self.set_name(p): frozenset(range(1, m[p] + 1)) for p in self.places}
        fam["Tick"] = frozenset({0})
        return fam

    def decode(self, family: dict[str, frozenset]) -> Marking:
        out = {}
        for p in self.places:
            s = family.get(self.set_name(p), frozenset())
            if s != frozenset(range(1, len(s) + 1)):
                raise DpsError(f"set for {p} is not a token counter: {sorted(s)}")
            out[p] = len(s)
        return out


def petri_to_dps(net: PetriNet) -> tuple[DPS, MarkingCodec]:
    codec = MarkingCodec(list(net.places))
    systems = []
    for t in net.transitions:
        needs = [(p, k) for (p, tt), k in sorted(net.pre.items()) if tt == t]
        guard = parse_formula(" & ".join(f"ex w in {codec.set_name(p)}: w = {k}" for p, k in needs)) if needs else None
        defs = []
        for p, d in net.delta(t).items():
            if d:
                name = codec.set_name(p)
                defs.append(image(name, Sym("u"), [("u", NameRef("Tokens", (Sym(name), Const(d))))]))
        defs.append(image("Tick", App("s", (Sym("u"),)), [("u", "Tick")]))
        systems.append(OpenSystem(t, ("Tick",), defs, guard))
    start = tuple(codec.set_name(p) for p in net.places) + ("Tick",)
    dps = DPS(systems, start, strategy="single", name="petri", start_data=codec.encode(net.marking))
    return dps, codec


def dps_successors(dps: DPS, codec: MarkingCodec, m: Marking, seed: int = 0) -> dict[str, Marking]:
    """Marking reached by applying each applicable system once from ``m``."""
    out = {}
    probe = Runner(dps, codec.encode(m), seed)
    for s in probe.applicable():
        r = Runner(dps, codec.encode(m), seed)
        r.step(choice=s)
        out[s.name] = codec.decode(r.family)
    return out


def net_successors(net: PetriNet, m: Marking) -> dict[str, Marking]:
    return {t: net.fire(t, m) for t in net.enabled(m)}


def reachable(net: PetriNet, limit: int = 200, cap: int = 12) -> list[Marking]:
    """Breadth-first reachable markings, stopping at ``limit`` markings or ``cap`` tokens per place."""
    seen = [dict(net.marking)]
    keys = {tuple(sorted(net.marking.items()))}
    i = 0
    while i < len(seen) and len(seen) < limit:
        for m2 in net_successors(net, seen[i]).values():
            k = tuple(sorted(m2.items()))
            if k not in keys and max(m2.values(), default=0) <= cap:
                keys.add(k)
                seen.append(m2)
        i += 1
    return seen


@dataclass
class CoRun:
    fired: list[str]
    markings: list[Marking]
    agreed: bool
    reason: str = ""


def dual_run(net: PetriNet, steps: int = 20, seed: int = 0) -> CoRun:
    """Drive the encoded specification with seeded choices and replay each choice on the net.

    Every step compares the applicable systems with the allowed transitions
    and the decoded family with the net's marking.
    """
    dps, codec = petri_to_dps(net)
    runner = Runner(dps, seed=seed)
    m = dict(net.marking)
    fired, marks = [], [dict(m)]
    for _ in range(steps):
        apps = [s.name for s in runner.applicable()]
        if apps != net.enabled(m):
            return CoRun(fired, marks, False, f"applicable {apps} vs allowed {net.enabled(m)} at {m}")
        rec = runner.step()
        if rec is None:
            break
        t = rec.applied[0]
        m = net.fire(t, m)
        fired.append(t)
        marks.append(dict(m))
        got = codec.decode(runner.family)
        if got != m:
            return CoRun(fired, marks, False, f"after {t}: specification {got} vs net {m}")
    return CoRun(fired, marks, True)


__all__ = ["CoRun", "MarkingCodec", "PetriNet", "dps_successors", "dual_run", "net_successors", "parse_net",
           "petri_to_dps", "random_net", "reachable"]

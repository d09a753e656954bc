"""Named dictionaries with genesis tags.

A dictionary is an ordered list of distinct elements; every element carries
a genesis, the set of tags naming where it came from.  A freshly built
dictionary tags its elements with its own name.  Set operations merge the
tags of an element across operands.

Hierarchies name a grid of dictionaries: ``P(D, B)`` over ``D = {IT, HR}``
and ``B = {USA, UK, FR}`` gives ``P(IT,USA)``, ``P(HR,USA)``, ... .  The
last dimension is the outer one, so a member of ``P(IT,USA)`` is tagged
``USA in B`` and ``IT in D(USA)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable

from .syntax import SetDefError


@dataclass
class Dictionary:
    name: str
    elements: list = field(default_factory=list)
    genesis: dict[Any, frozenset] = field(default_factory=dict)

    @classmethod
    def of(cls, name: str, items: Iterable) -> "Dictionary":
        d = cls(name)
        for v in items:
            d.add(v, {name})
        return d

    def add(self, value: Any, tags: Iterable[str]) -> None:
        if value not in self.genesis:
            self.elements.append(value)
            self.genesis[value] = frozenset(tags)
        else:
            self.genesis[value] = self.genesis[value] | frozenset(tags)

    def __contains__(self, value: Any) -> bool:
        return value in self.genesis

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def render(self) -> str:
        lines = [f"{self.name}:"]
        for v in self.elements:
            lines.append(f"  {v}  [{', '.join(sorted(self.genesis[v]))}]")
        return "\n".join(lines) + "\n"


def _check(*ds: Dictionary) -> None:
    for d in ds:
        if not isinstance(d, Dictionary):
            raise SetDefError(f"operand {d!r} is not a dictionary")


def union(a: Dictionary, b: Dictionary, name: str | None = None) -> Dictionary:
    _check(a, b)
    out = Dictionary(name or (f"{a.name}+{b.name}" if a.name != b.name else a.name))
    for d in (a, b):
        for v in d:
            out.add(v, d.genesis[v])
    return out


def intersection(a: Dictionary, b: Dictionary, name: str | None = None) -> Dictionary:
    _check(a, b)
    out = Dictionary(name or f"{a.name}*{b.name}")
    for v in a:
        if v in b:
            out.add(v, a.genesis[v] | b.genesis[v])
    return out


def difference(a: Dictionary, b: Dictionary, name: str | None = None) -> Dictionary:
    _check(a, b)
    out = Dictionary(name or f"{a.name}-{b.name}")
    for v in a:
        if v not in b:
            out.add(v, a.genesis[v])
    return out


def product(a: Dictionary, b: Dictionary, name: str | None = None) -> Dictionary:
    _check(a, b)
    out = Dictionary(name or f"{a.name}x{b.name}")
    for u in a:
        for v in b:
            out.add((u, v), a.genesis[u] | b.genesis[v])
    return out


OPS = {"union": union, "intersection": intersection, "difference": difference, "product": product}


def dictionary_op(op: str, *operands: Dictionary, name: str | None = None) -> Dictionary:
    if op not in OPS:
        raise SetDefError(f"unknown dictionary operation {op!r}")
    if len(operands) < 2:
        raise SetDefError(f"{op} needs at least two operands")
    res = operands[0]
    for d in operands[1:]:
        res = OPS[op](res, d)
    if name is not None:
        res.name = name
    return res


@dataclass
class Hierarchy:
    """Grid of dictionaries ``name(v1, ..., vk)`` over dimension dictionaries."""
    name: str
    dims: list[Dictionary]
    members: dict[tuple, Dictionary] = field(default_factory=dict)

    def names(self) -> list[str]:
        return [m.name for m in self.members.values()]

    def __getitem__(self, key: tuple) -> Dictionary:
        return self.members[key]

    def collapse(self, dim: int, name: str | None = None) -> "Hierarchy":
        """Join the members along one dimension (members of P(D,B) collapsed over D give P(B))."""
        rest = [d for i, d in enumerate(self.dims) if i != dim]
        out = Hierarchy(name or self.name, rest)
        for key in itertools.product(*[list(d) for d in rest]):
            joined = Dictionary(_grid_name(out.name, key))
            for full, member in self.members.items():
                if tuple(v for i, v in enumerate(full) if i != dim) == key:
                    for v in member:
                        joined.add(v, member.genesis[v])
            out.members[key] = joined
        return out


def _grid_name(name: str, key: tuple) -> str:
    return f"{name}({','.join(map(str, key))})"


def _coordinate_tags(dims: list[Dictionary], key: tuple) -> set[str]:
    # outermost dimension last: its value is tagged plainly, inner ones
    # are qualified by the values of every dimension outside them
    tags = set()
    k = len(dims)
    for i in range(k):
        outer = key[i + 1:]
        where = dims[i].name + (f"({','.join(map(str, outer))})" if outer else "")
        tags.add(f"{key[i]} in {where}")
    return tags


def hierarchy(name: str, dims: list[Dictionary], assign: dict[Any, tuple] | None = None) -> Hierarchy:
    """Build the full name grid; ``assign`` places elements into cells by coordinate tuple."""
    if not dims:
        raise SetDefError("a hierarchy needs at least one dimension")
    _check(*dims)
    h = Hierarchy(name, list(dims))
    for key in itertools.product(*[list(d) for d in dims]):
        h.members[key] = Dictionary(_grid_name(name, key))
    for value, key in (assign or {}).items():
        key = tuple(key)
        if key not in h.members:
            raise SetDefError(f"{value}: coordinates {key} are not in the grid")
        h.members[key].add(value, _coordinate_tags(dims, key))
    return h


@dataclass
class Section:
    header: Any
    header_genesis: frozenset
    items: list[tuple[Any, frozenset]]


def flatten(h: Hierarchy, dim: int = 0) -> list[Section]:
    """Sectioned listing: one section per value of dimension ``dim``, headed by it."""
    if not 0 <= dim < len(h.dims):
        raise SetDefError(f"dimension {dim} out of range")
    head_dict = h.dims[dim]
    others = [d.name for i, d in enumerate(h.dims) if i != dim]
    sections = []
    for c in head_dict:
        items: list[tuple[Any, frozenset]] = []
        seen = set()
        for key, member in h.members.items():
            if key[dim] != c:
                continue
            for v in member:
                if v not in seen:
                    seen.add(v)
                    items.append((v, member.genesis[v]))
        tag = f"{head_dict.name}({','.join(others)})" if others else head_dict.name
        sections.append(Section(c, frozenset({tag}), items))
    return sections


def render_sections(sections: list[Section]) -> str:
    lines = []
    for s in sections:
        lines.append(f"{s.header}  [{', '.join(sorted(s.header_genesis))}]")
        for v, g in s.items:
            lines.append(f"  {v}  [{', '.join(sorted(g))}]")
    return "\n".join(lines) + "\n"


__all__ = ["Dictionary", "Hierarchy", "OPS", "Section", "dictionary_op", "difference", "flatten", "hierarchy",
           "intersection", "product", "render_sections", "union"]

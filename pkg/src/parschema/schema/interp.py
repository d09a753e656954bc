"""Interpretations: concrete (tables or callables) and the standard term model."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable

from .model import Assign, Cond, LabelLit, Loop, Schema, SchemaError

Cell = Hashable  # "x" for simple variables, ("a", (v1, ...)) for array cells


class Undefined(Exception):
    """A value that the interpretation does not define (empty cell, partial table)."""


def cell_name(cell: Cell) -> str:
    if isinstance(cell, tuple):
        name, idx = cell
        return f"{name}[{', '.join(str(v) for v in idx)}]"
    return str(cell)


def term(func: str, args) -> str:
    return f"{func}({', '.join(str(a) for a in args)})"


def bracket_depth(value: Any) -> int:
    """Maximum nesting of ``[...]`` in the printed form of a value."""
    depth = best = 0
    for ch in str(value):
        if ch == "[":
            depth += 1
            best = max(best, depth)
        elif ch == "]":
            depth -= 1
    return best


class Interpretation:
    """Base protocol.  Subclasses override the three hooks."""

    def initial(self, cell: Cell) -> Any:
        raise Undefined(f"empty cell {cell_name(cell)}")

    def apply(self, func: str, args: tuple) -> Any:
        raise Undefined(f"no value for {term(func, args)}")

    def test(self, pred: str, args: tuple) -> bool:
        raise Undefined(f"no truth value for {term(pred, args)}")


def _lookup(table, name: str, args: tuple, what: str):
    impl = table.get(name)
    if impl is None:
        raise Undefined(f"unknown {what} {name}")
    if callable(impl):
        try:
            return impl(*args)
        except (KeyError, ZeroDivisionError, IndexError) as exc:
            raise Undefined(f"{term(name, args)}: {exc}") from None
    key = args if len(args) != 1 else args[0]
    if args in impl:
        return impl[args]
    if key in impl:
        return impl[key]
    raise Undefined(f"{term(name, args)} not in table")


@dataclass
class ConcreteInterpretation(Interpretation):
    """Functions and predicates as Python callables or lookup tables."""

    functions: dict[str, Callable | dict] = field(default_factory=dict)
    predicates: dict[str, Callable | dict] = field(default_factory=dict)
    start: dict[Cell, Any] = field(default_factory=dict)

    def initial(self, cell: Cell) -> Any:
        if cell in self.start:
            return self.start[cell]
        raise Undefined(f"empty cell {cell_name(cell)}")

    def apply(self, func: str, args: tuple) -> Any:
        return _lookup(self.functions, func, args, "function")

    def test(self, pred: str, args: tuple) -> bool:
        return bool(_lookup(self.predicates, pred, args, "predicate"))


@dataclass
class StandardInterpretation(Interpretation):
    """Term model: a function value is the string ``f(t1, ..., tn)``.

    Predicates are answered by the diagram, a map from atom strings to truth
    values.  An atom absent from the diagram is undefined in strict mode, false
    in closed-world mode, or decided by a stateless seeded coin when
    ``coin_seed`` is set (a total interpretation).  With ``free_memory`` an
    empty cell reads as its own name, so every run is well defined.
    """

    diagram: dict[str, bool] = field(default_factory=dict)
    start: dict[Cell, Any] = field(default_factory=dict)
    closed_world: bool = False
    free_memory: bool = True
    coin_seed: int | None = None

    def initial(self, cell: Cell) -> Any:
        if cell in self.start:
            return self.start[cell]
        if self.free_memory:
            return cell_name(cell)
        raise Undefined(f"empty cell {cell_name(cell)}")

    def apply(self, func: str, args: tuple) -> Any:
        return term(func, args)

    def test(self, pred: str, args: tuple) -> bool:
        atom = term(pred, args)
        if atom in self.diagram:
            return self.diagram[atom]
        if self.coin_seed is not None:
            digest = hashlib.sha256(f"{self.coin_seed}|{atom}".encode()).digest()
            return bool(digest[0] & 1)
        if self.closed_world:
            return False
        raise Undefined(f"atom {atom} not in diagram")


def schema_symbols(schema: Schema) -> tuple[dict[str, int], dict[str, int]]:
    """Function and predicate symbols with their arities."""
    funcs: dict[str, int] = {}
    preds: dict[str, int] = {}
    for p in schema.all_procs():
        for ins in p:
            if isinstance(ins, Assign):
                funcs[ins.func] = len(ins.args)
                for v in (ins.target, *ins.args):
                    for ix in getattr(v, "indices", ()):
                        if ix.func:
                            funcs[ix.func] = len(ix.args)
            elif isinstance(ins, (Cond, Loop)):
                preds[ins.pred] = len(ins.args)
    return funcs, preds


def random_standard_interpretation(schema: Schema, seed: int, totality: bool = True,
                                   atoms: int = 12) -> StandardInterpretation:
    """A seeded standard interpretation.

    A handful of random signed ground atoms over the schema's simple variables
    go into the diagram; with ``totality`` every other atom is decided by a
    seeded coin so all predicate tests are defined.
    """
    rng = random.Random(seed)
    _, preds = schema_symbols(schema)
    names = sorted(schema.variables()) or ["x"]
    diagram: dict[str, bool] = {}
    for pred in sorted(preds):
        if pred == "eq":
            continue
        for _ in range(atoms // max(1, len(preds))):
            args = tuple(rng.choice(names) for _ in range(preds[pred]))
            diagram[term(pred, args)] = rng.random() < 0.5
    return StandardInterpretation(diagram=diagram, coin_seed=seed if totality else None)


# --- text format -----------------------------------------------------------

def parse_value(text: str) -> Any:
    text = text.strip()
    if text.startswith("@"):
        return LabelLit(text[1:])
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text or "." in text:
        try:
            return Fraction(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    return text


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str) and (value.lower() in ("true", "false") or _looks_numeric(value)):
        return f'"{value}"'
    return str(value)


def _looks_numeric(s: str) -> bool:
    try:
        Fraction(s)
        return True
    except ValueError:
        return False


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur.strip())
    return parts


def _parse_cell(text: str) -> Cell:
    text = text.strip()
    if text.endswith("]") and "[" in text:
        name, rest = text.split("[", 1)
        return (name.strip(), tuple(parse_value(v) for v in _split_top(rest[:-1])))
    return text


def _parse_app(text: str) -> tuple[str, tuple]:
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise SchemaError(f"expected application, got {text!r}")
    name, rest = text.split("(", 1)
    return name.strip(), tuple(parse_value(v) for v in _split_top(rest[:-1]))


def parse_interpretation(text: str) -> Interpretation:
    """Parse the sectioned interpretation format.

    Sections: ``[start]`` (``cell = value``), ``[functions]`` and
    ``[predicates]`` (``f(v, ...) = value`` table rows), ``[diagram]``
    (one atom per line, ``~`` for negative atoms) and ``[options]``
    (``closed_world``, ``free_memory``, ``coin_seed``).  A file with a diagram
    section yields a :class:`StandardInterpretation`.
    """
    section = None
    start: dict = {}
    funcs: dict[str, dict] = {}
    preds: dict[str, dict] = {}
    diagram: dict[str, bool] = {}
    options: dict[str, str] = {}
    has_diagram = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]") and line[1:-1] in (
                "start", "functions", "predicates", "diagram", "options"):
            section = line[1:-1]
            has_diagram |= section == "diagram"
            continue
        try:
            if section == "start":
                lhs, rhs = line.split("=", 1)
                start[_parse_cell(lhs)] = parse_value(rhs)
            elif section in ("functions", "predicates"):
                lhs, rhs = line.rsplit("=", 1)
                name, args = _parse_app(lhs)
                table = (funcs if section == "functions" else preds).setdefault(name, {})
                table[args] = parse_value(rhs)
            elif section == "diagram":
                neg = line.startswith("~")
                name, args = _parse_app(line[1:] if neg else line)
                diagram[term(name, args)] = not neg
            elif section == "options":
                k, v = line.split("=", 1)
                options[k.strip()] = v.strip()
            else:
                raise SchemaError("content outside a section")
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    if has_diagram or options:
        seed = options.get("coin_seed")
        return StandardInterpretation(
            diagram=diagram, start=start,
            closed_world=options.get("closed_world", "false") == "true",
            free_memory=options.get("free_memory", "true") == "true",
            coin_seed=int(seed) if seed is not None else None)
    return ConcreteInterpretation(functions=funcs, predicates=preds, start=start)


def print_interpretation(interp: Interpretation) -> str:
    lines: list[str] = []

    def cell_text(cell):
        if isinstance(cell, tuple):
            return f"{cell[0]}[{', '.join(format_value(v) for v in cell[1])}]"
        return str(cell)

    start = getattr(interp, "start", {})
    if start:
        lines.append("[start]")
        lines.extend(f"{cell_text(c)} = {format_value(v)}" for c, v in start.items())
    if isinstance(interp, ConcreteInterpretation):
        for sec, tables in (("functions", interp.functions), ("predicates", interp.predicates)):
            rows = [(n, t) for n, t in tables.items() if isinstance(t, dict)]
            if rows:
                lines.append(f"[{sec}]")
                for n, t in rows:
                    for args, v in t.items():
                        args = args if isinstance(args, tuple) else (args,)
                        lines.append(f"{n}({', '.join(format_value(a) for a in args)}) = {format_value(v)}")
    elif isinstance(interp, StandardInterpretation):
        lines.append("[diagram]")
        lines.extend(("" if v else "~") + a for a, v in interp.diagram.items())
        lines.append("[options]")
        lines.append(f"closed_world = {'true' if interp.closed_world else 'false'}")
        lines.append(f"free_memory = {'true' if interp.free_memory else 'false'}")
        if interp.coin_seed is not None:
            lines.append(f"coin_seed = {interp.coin_seed}")
    return "\n".join(lines) + "\n"

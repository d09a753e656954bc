"""Text format for schemas.

Example::

    // comment
    start m0
    m0: i = one() then m1
    m1: do body while le(i, n) then m2
    m2: halt
    proc body start b0 {
      b0: a[i] = f(a[i], x) then b1
      b1: i = inc(i) then b2
    }

``aux NAME, ...`` declares auxiliary variables introduced by transforms.
Label literals are written ``@label``.  ``L: halt`` only documents the final
label and is checked, not stored.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (MAIN, Arg, Assign, Call, Cond, IndexExpr, LabelLit, Loop, Proc,
                    Schema, SchemaError, Var)

_TOKEN = re.compile(r"\s*(?:(//.*)|([A-Za-z_][A-Za-z0-9_']*)|(@[A-Za-z_][A-Za-z0-9_']*)|(.))")


@dataclass
class _Tokens:
    items: list[str]
    pos: int = 0
    line: int = 0

    def peek(self) -> str | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise SchemaError(f"line {self.line}: unexpected end of line")
        if expect is not None and tok != expect:
            raise SchemaError(f"line {self.line}: expected {expect!r}, got {tok!r}")
        self.pos += 1
        return tok

    def ident(self) -> str:
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            raise SchemaError(f"line {self.line}: expected identifier, got {tok!r}")
        return tok

    def done(self) -> bool:
        return self.pos >= len(self.items)


def _tokenize(text: str, line: int) -> _Tokens:
    out: list[str] = []
    for m in _TOKEN.finditer(text):
        if m.group(1):
            break
        tok = m.group(2) or m.group(3) or m.group(4)
        if tok is None or tok.isspace():
            continue
        out.append(tok)
    return _Tokens(out, line=line)


def _parse_var(t: _Tokens) -> Var:
    name = t.ident()
    if t.peek() != "[":
        return Var(name)
    t.take("[")
    idx: list[IndexExpr] = []
    while True:
        fn = t.ident()
        if t.peek() == "[":
            raise SchemaError(f"line {t.line}: nested indexing is not allowed")
        if t.peek() == "(":
            t.take("(")
            args = [t.ident()]
            while t.peek() == ",":
                t.take(",")
                args.append(t.ident())
            if t.peek() == "[":
                raise SchemaError(f"line {t.line}: nested indexing is not allowed")
            t.take(")")
            idx.append(IndexExpr(fn, tuple(args)))
        else:
            idx.append(IndexExpr(None, (fn,)))
        if t.peek() == ",":
            t.take(",")
            continue
        t.take("]")
        break
    return Var(name, tuple(idx))


def _parse_args(t: _Tokens) -> tuple[Arg, ...]:
    t.take("(")
    args: list[Arg] = []
    if t.peek() == ")":
        t.take(")")
        return ()
    while True:
        tok = t.peek()
        if tok is not None and tok.startswith("@"):
            args.append(LabelLit(t.take()[1:]))
        else:
            args.append(_parse_var(t))
        if t.peek() == ",":
            t.take(",")
            continue
        t.take(")")
        return tuple(args)


def _parse_instruction(t: _Tokens):
    label = t.ident()
    t.take(":")
    head = t.peek()
    if head == "halt":
        t.take()
        return ("halt", label)
    if head == "if":
        t.take()
        pred = t.ident()
        args = _parse_args(t)
        t.take("then")
        l1 = t.ident()
        t.take("else")
        l2 = t.ident()
        return Cond(label, pred, args, l1, l2)
    if head == "do":
        t.take()
        body = t.ident()
        if t.peek() == "while":
            t.take()
            pred = t.ident()
            args = _parse_args(t)
            t.take("then")
            return Loop(label, body, pred, args, t.ident())
        t.take("then")
        return Call(label, body, t.ident())
    target = _parse_var(t)
    t.take("=")
    func = t.ident()
    args = _parse_args(t)
    t.take("then")
    return Assign(label, target, func, args, t.ident())


def parse_schema(text: str) -> Schema:
    """Parse the schema text format; raises :class:`SchemaError` on bad input."""
    main_start: str | None = None
    main = Proc(MAIN, "")
    procs: dict[str, Proc] = {}
    aux: set[str] = set()
    halts: dict[str, str] = {}
    current = main
    for lineno, raw in enumerate(text.splitlines(), 1):
        t = _tokenize(raw, lineno)
        if t.done():
            continue
        head = t.peek()
        if head == "}":
            if current is main:
                raise SchemaError(f"line {lineno}: unmatched '}}'")
            current = main
            t.take()
        elif head == "start" and len(t.items) >= 2 and t.items[1] != ":":
            t.take()
            if current is not main:
                raise SchemaError(f"line {lineno}: 'start' inside a proc block")
            main_start = t.ident()
        elif head == "aux" and len(t.items) >= 2 and t.items[1] != ":":
            t.take()
            aux.add(t.ident())
            while t.peek() == ",":
                t.take(",")
                aux.add(t.ident())
        elif head == "proc" and len(t.items) >= 2 and t.items[1] != ":":
            t.take()
            if current is not main:
                raise SchemaError(f"line {lineno}: nested proc blocks")
            name = t.ident()
            t.take("start")
            start = t.ident()
            t.take("{")
            if name in procs or name == MAIN:
                raise SchemaError(f"line {lineno}: duplicate proc {name!r}")
            current = Proc(name, start)
            procs[name] = current
        else:
            ins = _parse_instruction(t)
            if isinstance(ins, tuple):
                halts[current.name] = ins[1]
            else:
                current.add(ins)
        if not t.done():
            raise SchemaError(f"line {lineno}: trailing tokens {t.items[t.pos:]}")
    if current is not main:
        raise SchemaError("unterminated proc block")
    if main_start is None:
        if main.instrs:
            raise SchemaError("missing 'start' line")
        main_start = halts.get(MAIN, "m0")
    main.start = main_start
    schema = Schema(main, procs, frozenset(aux))
    for pname, lab in halts.items():
        p = schema.proc(pname)
        if lab in p.instrs or (p.instrs and lab not in p.final_labels()):
            raise SchemaError(f"'{lab}: halt' is not a final label of {pname}")
    return schema


def _fmt_args(args) -> str:
    return "(" + ", ".join(str(a) for a in args) + ")"


def format_instruction(ins) -> str:
    if isinstance(ins, Assign):
        return f"{ins.label}: {ins.target} = {ins.func}{_fmt_args(ins.args)} then {ins.next}"
    if isinstance(ins, Cond):
        return f"{ins.label}: if {ins.pred}{_fmt_args(ins.args)} then {ins.then} else {ins.orelse}"
    if isinstance(ins, Loop):
        return f"{ins.label}: do {ins.body} while {ins.pred}{_fmt_args(ins.args)} then {ins.next}"
    return f"{ins.label}: do {ins.body} then {ins.next}"


def print_schema(schema: Schema) -> str:
    """Inverse of :func:`parse_schema` (up to comments and whitespace)."""
    lines: list[str] = []
    if schema.aux:
        lines.append("aux " + ", ".join(sorted(schema.aux)))
    lines.append(f"start {schema.main.start}")
    lines.extend(format_instruction(i) for i in schema.main)
    finals = schema.main.final_labels()
    if len(finals) == 1:
        lines.append(f"{finals[0]}: halt")
    for p in schema.procs.values():
        lines.append(f"proc {p.name} start {p.start} {{")
        lines.extend("  " + format_instruction(i) for i in p)
        lines.append("}")
    return "\n".join(lines) + "\n"

"""Abstract syntax and parser for systems of named-set definitions.

One form per line::

    Sc = {l1, l2}                                   enumeration
    S = {all x in S: all y in S: p(x, y)}           property of the whole set
    Comp = {base Seed step x from y: edge(x, y)}    induction from a base
    T[v] = {image f(v, z); v in A, z in B}          image of a term
    Nice = {all L in Nice: all x in L: ok(x); within Lab[*]}

``all``/``ex`` may be written ``∀``/``∃`` and ``in`` as ``∈``.  Matrix
connectives are ``~ & | ->`` plus the comparisons ``= != < > <= >=``.
After ``;`` come selector items ``x in D`` (each domain may use variables
bound earlier in the list), an optional ``if FORMULA`` clause that keeps only
the selector maps satisfying it, and an optional ``within POOL`` clause that
names the candidate elements of the set (``T[*]`` = every concrete name of
type T).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Union


class SetDefError(ValueError):
    pass


# --- terms ---------------------------------------------------------------------

@dataclass(frozen=True)
class Sym:
    """Identifier: a variable if bound, otherwise a constant."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Any

    def __str__(self) -> str:
        return f'"{self.value}"' if isinstance(self.value, str) else str(self.value)


@dataclass(frozen=True)
class App:
    func: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.func}({', '.join(map(str, self.args))})"


Term = Union[Sym, Const, App]


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Sym):
        return {t.name}
    if isinstance(t, App):
        return set().union(*(term_vars(a) for a in t.args)) if t.args else set()
    return set()


@dataclass(frozen=True)
class NameRef:
    """Schema of set names ``T`` or ``T[t1, ...]``; ``star`` means every name of type T."""
    type: str
    args: tuple = ()
    star: bool = False

    def __str__(self) -> str:
        if self.star:
            return f"{self.type}[*]"
        return self.type if not self.args else f"{self.type}[{', '.join(map(str, self.args))}]"


def concrete_name(type_: str, values: tuple = ()) -> str:
    return type_ if not values else f"{type_}[{','.join(str(v) for v in values)}]"


# --- formulas --------------------------------------------------------------------

@dataclass(frozen=True)
class Quant:
    q: str                      # "all" | "ex"
    var: str
    domain: NameRef
    body: "Formula"

    def __str__(self) -> str:
        return f"{self.q} {self.var} in {self.domain}: {self.body}"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class BoolOp:
    op: str                     # "&" | "|" | "->"
    args: tuple

    def __str__(self) -> str:
        return f" {self.op} ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Truth:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


Formula = Union[Quant, Atom, Cmp, Not, BoolOp, Truth]


def _wrap(f: Formula) -> str:
    return f"({f})" if isinstance(f, (BoolOp, Quant)) else str(f)


def prefix_and_matrix(f: Formula) -> tuple[list[tuple[str, str, NameRef]], Formula]:
    """Split a prenex formula into its quantifier prefix and matrix."""
    prefix = []
    while isinstance(f, Quant):
        prefix.append((f.q, f.var, f.domain))
        f = f.body
    return prefix, f


def has_quantifier(f: Formula) -> bool:
    if isinstance(f, Quant):
        return True
    if isinstance(f, Not):
        return has_quantifier(f.arg)
    if isinstance(f, BoolOp):
        return any(has_quantifier(a) for a in f.args)
    return False


def formula_types(f: Formula, bound: frozenset = frozenset()) -> set[str]:
    """Set-name types used as quantifier domains (a domain naming a bound variable is not a type)."""
    if isinstance(f, Quant):
        own = set() if (f.domain.type in bound and not f.domain.args) else {f.domain.type}
        return own | formula_types(f.body, bound | {f.var})
    if isinstance(f, Not):
        return formula_types(f.arg, bound)
    if isinstance(f, BoolOp):
        return set().union(*(formula_types(a, bound) for a in f.args))
    return set()


# --- forms -------------------------------------------------------------------------

ALPHA, BETA, GAMMA, DELTA = "alpha", "beta", "gamma", "delta"


@dataclass(frozen=True)
class Form:
    kind: str
    left: NameRef
    selector: tuple[tuple[str, NameRef], ...] = ()
    within: NameRef | None = None
    elements: tuple = ()                     # alpha
    formula: Formula | None = None           # beta; gamma step
    base: tuple[NameRef, ...] = ()           # gamma
    new_var: str = "x"                       # gamma: element added
    old_var: str = "y"                       # gamma: element already in the set
    image: Term | None = None                # delta
    condition: Formula | None = None         # "if" clause filtering selector maps

    @property
    def params(self) -> set[str]:
        return set().union(*(term_vars(a) for a in self.left.args)) if self.left.args else set()

    def depends_on(self) -> set[str]:
        deps = {d.type for _, d in self.selector} | {b.type for b in self.base}
        if self.formula is not None:
            bound = frozenset(v for v, _ in self.selector) | {self.new_var, self.old_var} \
                if self.kind == GAMMA else frozenset(v for v, _ in self.selector)
            deps |= formula_types(self.formula, bound)
        if self.within is not None:
            deps.add(self.within.type)
        if self.condition is not None:
            deps |= formula_types(self.condition, frozenset(v for v, _ in self.selector))
        return deps

    def __str__(self) -> str:
        if self.kind == ALPHA:
            core = ", ".join(str(Const(e)) if isinstance(e, str) and not _IDENT.fullmatch(e) else str(e)
                             for e in self.elements)
        elif self.kind == BETA:
            core = str(self.formula)
        elif self.kind == GAMMA:
            core = (f"base {', '.join(map(str, self.base))} step {self.new_var} from {self.old_var}: "
                    f"{self.formula}")
        else:
            core = f"image {self.image}"
        clauses = []
        if self.selector:
            clauses.append(", ".join(f"{v} in {d}" for v, d in self.selector))
        if self.condition is not None:
            clauses.append(f"if {self.condition}")
        if self.within is not None:
            clauses.append(f"within {self.within}")
        return f"{self.left} = {{{'; '.join([core, *clauses])}}}"


@dataclass
class FormSystem:
    forms: list[Form] = field(default_factory=list)

    def form_for(self, type_: str) -> Form | None:
        for f in self.forms:
            if f.left.type == type_:
                return f
        return None

    @property
    def types(self) -> list[str]:
        return [f.left.type for f in self.forms]

    def validate(self, given: set[str] = frozenset()) -> None:
        """Distinct left types, every referenced type defined, selector levels well formed."""
        seen: dict[str, list[Form]] = {}
        for f in self.forms:
            seen.setdefault(f.left.type, []).append(f)
        for t, fs in seen.items():
            # several enumerations may share a type when each names one concrete set
            if len(fs) > 1 and not (all(f.kind == ALPHA and not f.selector for f in fs)
                                    and len({str(f.left) for f in fs}) == len(fs)):
                raise SetDefError(f"two forms define type {t}")
        for f in self.forms:
            missing = f.depends_on() - set(seen) - set(given)
            if missing:
                raise SetDefError(f"{f.left.type}: no definition for {sorted(missing)}")
            bound: set[str] = set()
            for var, dom in f.selector:
                if var in bound:
                    raise SetDefError(f"{f.left.type}: variable {var} selected twice")
                used = set().union(*(term_vars(a) for a in dom.args)) if dom.args else set()
                if var in used or not used <= bound:
                    raise SetDefError(f"{f.left.type}: selector level for {var} uses unbound {sorted(used - bound)}")
                bound.add(var)
            free = (f.params - bound) if f.kind != ALPHA else set()
            if f.kind == DELTA and f.image is not None:
                free |= term_vars(f.image) - bound
            if free:
                raise SetDefError(f"{f.left.type}: selector is not closed, unbound {sorted(free)}")

    def __str__(self) -> str:
        return "\n".join(map(str, self.forms)) + ("\n" if self.forms else "")


# --- tokenizer / parser ---------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<str>"[^"]*")
  | (?P<num>-?\d+)
  | (?P<op>->|<=|>=|!=|=|<|>|~|&|\||\(|\)|\[|\]|,|:|;|\*|∀|∃|∈|¬|∧|∨)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
""", re.X)
_UNICODE = {"∀": "all", "∃": "ex", "∈": "in", "¬": "~", "∧": "&", "∨": "|"}
_CMP = {"=", "!=", "<", ">", "<=", ">="}


def tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SetDefError(f"unexpected character {text[pos]!r} in {text!r}")
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tok = m.group(0)
        out.append(_UNICODE.get(tok, tok))
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks, self.i = tokens, 0

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise SetDefError(f"expected {expect or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)

    # terms
    def term(self) -> Term:
        tok = self.take()
        if tok.startswith('"'):
            return Const(tok[1:-1])
        if re.fullmatch(r"-?\d+", tok):
            return Const(int(tok))
        if not _IDENT.fullmatch(tok):
            raise SetDefError(f"bad term at {tok!r}")
        if self.peek() == "(":
            self.take("(")
            args = self.term_list(")")
            return App(tok, tuple(args))
        return Sym(tok)

    def term_list(self, close: str) -> list[Term]:
        args = []
        if self.peek() == close:
            self.take(close)
            return args
        while True:
            args.append(self.term())
            if self.peek() == ",":
                self.take(",")
                continue
            self.take(close)
            return args

    def name_ref(self) -> NameRef:
        tok = self.take()
        if not _IDENT.fullmatch(tok):
            raise SetDefError(f"bad set name {tok!r}")
        if self.peek() == "[":
            self.take("[")
            if self.peek() == "*":
                self.take("*")
                self.take("]")
                return NameRef(tok, (), True)
            return NameRef(tok, tuple(self.term_list("]")))
        return NameRef(tok)

    # formulas
    def formula(self) -> Formula:
        if self.peek() in ("all", "ex"):
            q = self.take()
            var = self.take()
            self.take("in")
            dom = self.name_ref()
            if self.peek() == ":":
                self.take(":")
            return Quant(q, var, dom, self.formula())
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take("->")
            return BoolOp("->", (left, self.implication()))
        return left

    def disjunction(self) -> Formula:
        args = [self.conjunction()]
        while self.peek() == "|":
            self.take("|")
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else BoolOp("|", tuple(args))

    def conjunction(self) -> Formula:
        args = [self.unary()]
        while self.peek() == "&":
            self.take("&")
            args.append(self.unary())
        return args[0] if len(args) == 1 else BoolOp("&", tuple(args))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("all", "ex"):
            return self.formula()
        if tok == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if tok in ("true", "false") and self.peek(1) not in _CMP:
            self.take()
            return Truth(tok == "true")
        t = self.term()
        if self.peek() in _CMP:
            op = self.take()
            return Cmp(op, t, self.term())
        if isinstance(t, App):
            return Atom(t.func, t.args)
        raise SetDefError(f"expected a predicate or comparison at {t}")


def parse_formula(text: str) -> Formula:
    p = _Parser(tokenize(text))
    f = p.formula()
    if not p.done():
        raise SetDefError(f"trailing input at {p.peek()!r} in {text!r}")
    return f


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def _parse_name_text(text: str) -> NameRef:
    p = _Parser(tokenize(text))
    ref = p.name_ref()
    if not p.done():
        raise SetDefError(f"bad set name {text!r}")
    return ref


def parse_form(line: str) -> Form:
    m = re.fullmatch(r"\s*(.+?)\s*=\s*\{(.*)\}\s*", line, re.S)
    if not m:
        raise SetDefError(f"form must look like NAME = {{...}}: {line!r}")
    left = _parse_name_text(m.group(1))
    if left.star:
        raise SetDefError("left side cannot be a name pattern")
    parts = _split_top(m.group(2), ";")
    core, clauses = parts[0], [c for c in parts[1:] if c]
    selector: list[tuple[str, NameRef]] = []
    within = None
    condition = None
    for clause in clauses:
        if clause.startswith("within "):
            within = _parse_name_text(clause[len("within "):])
            continue
        if clause.startswith("if "):
            condition = parse_formula(clause[len("if "):])
            continue
        for item in _split_top(clause, ","):
            toks = tokenize(item)
            if len(toks) < 3 or toks[1] != "in":
                raise SetDefError(f"bad selector item {item!r}")
            p = _Parser(toks[2:])
            dom = p.name_ref()
            if not p.done():
                raise SetDefError(f"bad selector item {item!r}")
            selector.append((toks[0], dom))
    common = dict(left=left, selector=tuple(selector), within=within, condition=condition)
    if core.startswith("base "):
        mm = re.fullmatch(r"base\s+(.+?)\s+step\s+(\w+)\s+from\s+(\w+)\s*:\s*(.+)", core, re.S)
        if not mm:
            raise SetDefError(f"induction form must be 'base S0 step x from y: formula': {core!r}")
        bases = tuple(_parse_name_text(b) for b in _split_top(mm.group(1), ","))
        return Form(GAMMA, base=bases, new_var=mm.group(2), old_var=mm.group(3),
                    formula=parse_formula(mm.group(4)), **common)
    if core.startswith("image "):
        p = _Parser(tokenize(core[len("image "):]))
        t = p.term()
        if not p.done():
            raise SetDefError(f"bad image term {core!r}")
        return Form(DELTA, image=t, **common)
    toks = tokenize(core) if core else []
    if all(t == "," or _IDENT.fullmatch(t) or re.fullmatch(r"-?\d+", t) or t.startswith('"') for t in toks) \
            and not any(t in ("all", "ex", "true", "false") for t in toks):
        elems = []
        for item in _split_top(core, ",") if core else []:
            if item.startswith('"'):
                elems.append(item[1:-1])
            elif re.fullmatch(r"-?\d+", item):
                elems.append(int(item))
            else:
                elems.append(item)
        return Form(ALPHA, elements=tuple(elems), **common)
    return Form(BETA, formula=parse_formula(core), **common)


def parse_system(text: str) -> FormSystem:
    forms = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].split("#", 1)[0].strip()
        if line:
            forms.append(parse_form(line))
    return FormSystem(forms)

"""Command-line entry point: ``parschema <group> <command> [options]``.

Every report starts with a header echoing the command, seed and fuel, so
two runs with the same inputs can be diffed byte for byte.  ``--format
records`` writes newline-delimited JSON: a versioned header record, then one
record per result item.  ``--selftest`` replays a bundled example and
checks the expected answer instead of reading input files.

Exit status: 0 success, 1 domain error (or failed selftest), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from importlib.resources import files
from typing import Any, Callable

from . import __version__
from .dependence import (ConnectionEquation, NestError, build_connection_equations, dependence_cone, diagonal,
                         execute_sequential, execute_wavefront, four_point, from_nest, is_parallel, parse_nest,
                         seeded_boundary, solve_connection, wavefront_layers)
from .dps import DpsError, dual_run, parse_dps, parse_net, petri_to_dps, run_dps, run_pr
from .loops import controller_depth_witness, forward_orient, is_forward_oriented, separate_loop
from .ring import (PriorityLoopError, detect_fault, diagram_rotating, diagram_shared, equalize, ring_sort,
                   run_handshake)
from .schema import (SchemaError, execute, io_sets, parse_interpretation, parse_schema, print_schema,
                     proc_io_sets, random_standard_interpretation, validate_L)
from .setdef import (SetDefError, brute_force_variants, check_agreed, check_selected, classify, horn_export,
                     parse_instance, render_horn, show_family, show_set, solve_120, solve_130,
                     to_boolean_constraints)
from .setdef.semantics import parse_value, sorted_elems

RECORD_FORMAT = "parschema.report"
RECORD_VERSION = 1

# exception type -> contract named in the diagnostic
CONTRACTS: list[tuple[type, str]] = [
    (SchemaError, "schema"), (NestError, "loop nest"), (SetDefError, "set definitions"),
    (DpsError, "data processing"), (PriorityLoopError, "priority loop"), (ValueError, "input"),
]


class DomainError(Exception):
    """A violated contract, reported with exit status 1."""

    def __init__(self, contract: str, message: str):
        super().__init__(message)
        self.contract = contract


class SelftestFailed(Exception):
    pass


@dataclass
class Report:
    command: str
    seed: int
    fuel: int
    items: list[tuple[str, str, dict]] = field(default_factory=list)

    def add(self, kind: str, text: str | None = None, /, **data: Any) -> None:
        if text is None:
            text = f"{kind}: " + " ".join(f"{k}={_plain(v)}" for k, v in data.items())
        self.items.append((kind, text, data))

    def block(self, kind: str, text: str) -> None:
        self.items.append((kind, text.rstrip("\n"), {"text": text}))

    def render(self, fmt: str) -> str:
        if fmt == "records":
            head = {"format": RECORD_FORMAT, "version": RECORD_VERSION, "tool": __version__,
                    "command": self.command, "seed": self.seed, "fuel": self.fuel}
            lines = [json.dumps(head, sort_keys=True)]
            lines += [json.dumps({"type": k, **_jsonable(d)}, sort_keys=True) for k, _, d in self.items]
            return "\n".join(lines) + "\n"
        lines = [f"# parschema report v{RECORD_VERSION}", f"# command: {self.command}",
                 f"# seed: {self.seed} fuel: {self.fuel}"]
        lines += [t for _, t, _ in self.items]
        return "\n".join(lines) + "\n"


def _plain(v: Any) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_plain(x) for x in v)
    if isinstance(v, (set, frozenset)):
        return show_set(v)
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (set, frozenset)):
        return [_jsonable(x) for x in sorted_elems(v)]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    return str(v)


def fixture(name: str) -> str:
    return files("parschema.fixtures").joinpath(name).read_text()


def read_input(args: argparse.Namespace, attr: str = "file", default_fixture: str | None = None) -> str:
    """Contents of the named input, or the bundled example under ``--selftest``."""
    if args.selftest and default_fixture is not None:
        return fixture(default_fixture)
    path = getattr(args, attr, None)
    if path is None:
        raise UsageError("an input file is required (or --selftest)")
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


class UsageError(Exception):
    pass


def expect(cond: bool, what: str) -> None:
    if not cond:
        raise SelftestFailed(what)


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# --- schema ------------------------------------------------------------------------------

def cmd_schema_validate(args, rep: Report) -> None:
    schema = parse_schema(read_input(args, default_fixture="list.schema"))
    problems = validate_L(schema)
    for p in problems:
        rep.add("problem", f"problem: {p}", message=p)
    rep.add("verdict", valid=not problems, procedures=len(schema.all_procs()))
    if args.selftest:
        expect(not problems, "bundled list-walk schema must be a valid L-schema")
        bad = parse_schema("start m0\nm0: do A then m1\nproc A start a0 {\n  a0: do A then a1\n}\n")
        expect(any("recursive procedure" in p for p in validate_L(bad)), "recursion must be rejected")
    elif problems:
        raise DomainError("L-schema", "; ".join(problems))


def cmd_schema_run(args, rep: Report) -> None:
    schema = parse_schema(read_input(args, default_fixture="counted.schema"))
    if args.interp and not args.selftest:
        interp = parse_interpretation(read_input(args, "interp"))
    else:
        interp = random_standard_interpretation(schema, args.seed)
    res = execute(schema, interp, args.fuel)
    rep.add("outcome", outcome=res.outcome.value, steps=res.steps, reason=res.reason or "-")
    for cell, value in res.memory_text().items():
        rep.add("cell", f"  {cell} = {value}", cell=cell, value=value)
    if args.selftest:
        expect(res.halted, "counted loop halts under a total standard interpretation")


def cmd_schema_iosets(args, rep: Report) -> None:
    schema = parse_schema(read_input(args, default_fixture="list.schema"))
    if args.label and not args.selftest:
        items = [(args.label, io_sets(schema, args.label))]
    else:
        items = [(p.name, proc_io_sets(schema, p.name)) for p in schema.all_procs()]
    for name, io in items:
        d = io.as_dict()
        rep.add("iosets", f"{name}: Ind={d['ind']} Arg={d['arg']} Val={d['val']}", name=name, **d)
    if args.selftest:
        body = dict(items)["body"]
        expect("p" in body.ind and "p" in body.val, "the list walk reads and advances its pointer")


# --- loop ---------------------------------------------------------------------------------

def cmd_loop_forward(args, rep: Report) -> None:
    schema = parse_schema(read_input(args, default_fixture="list.schema"))
    out = forward_orient(schema)
    rep.add("aux", variables=sorted(out.aux))
    rep.block("schema", print_schema(out))
    if args.selftest:
        expect(all(is_forward_oriented(out, p.name) for p in out.procs.values()), "result is forward oriented")


def _separate(args, default: str, label: str):
    schema = parse_schema(read_input(args, default_fixture=default))
    lab = label if args.selftest or not args.label else args.label
    return separate_loop(schema, lab)


def cmd_loop_separate(args, rep: Report) -> None:
    sep = _separate(args, "list.schema", "m1")
    rep.add("separation", verdict=sep.verdict, controllers=sep.controller_count, parts=sep.parts,
            dispatch=sep.dispatch_var or "-")
    rep.block("schema", print_schema(sep.schema))
    if args.selftest:
        expect(sep.controller_count == 2, "list walk separates into two controllers and a kernel")


def cmd_loop_depth(args, rep: Report) -> None:
    sep = _separate(args, "chain3.schema", "m0")
    depth = controller_depth_witness(sep, seed=args.seed, fuel=args.fuel)
    rep.add("depth", controllers=sep.controller_count, witness=depth if depth is not None else "-")
    if args.selftest:
        expect(depth == sep.controller_count - 1 == 2, "three controllers give depth witness 2")


# --- dependence ---------------------------------------------------------------------------

def _params(items: list[str] | None) -> dict[str, int]:
    out = {}
    for item in items or []:
        k, _, v = item.partition("=")
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise UsageError(f"bad parameter {item!r}, expected NAME=INT") from None
    return out


def _nest_text(args) -> str:
    from .dependence.wavefront import DIAGONAL, FOUR_POINT
    if args.selftest or args.file is None:
        if args.file is None and not args.selftest and args.example is None:
            raise UsageError("give a nest file, --example or --selftest")
        return {"diagonal": DIAGONAL}.get(args.example, FOUR_POINT)
    return read_input(args)


def cmd_dep_equations(args, rep: Report) -> None:
    params = _params(args.param)
    if args.selftest:
        params = {"N": 4}
    nest = parse_nest(_nest_text(args), **params)
    eqs = build_connection_equations(nest)
    for eq in eqs:
        sol = solve_connection(eq)
        rep.add("equation", f"{eq}  class={eq.cls} status={sol.status} solutions={len(sol.points)}",
                equation=str(eq), cls=eq.cls, status=sol.status, solutions=len(sol.points))
    if args.selftest:
        expect(len(eqs) == 4, "four reads give four connection equations")


def _bounds(text: str) -> dict[str, tuple[int, int]]:
    out = {}
    for item in text.split(","):
        name, _, rng = item.partition("=")
        lo, _, hi = rng.partition(":")
        try:
            out[name.strip()] = (int(lo), int(hi))
        except ValueError:
            raise UsageError(f"bad bound {item!r}, expected NAME=LO:HI") from None
    return out


def cmd_dep_solve(args, rep: Report) -> None:
    if args.selftest:
        text, bounds = "i**2 = 2*j", {"i": (1, 10), "j": (1, 10)}
    else:
        if not args.equation or not args.bounds:
            raise UsageError("an equation and --bounds are required (or --selftest)")
        text, bounds = args.equation, _bounds(args.bounds)
    eq = ConnectionEquation.from_text(text, bounds)
    sol = solve_connection(eq, budget=args.fuel * 1000)
    rep.add("solution", status=sol.status, variables=list(sol.variables), count=len(sol.points),
            explored=sol.explored)
    for p in sol.points:
        rep.add("point", "  (" + ", ".join(map(str, p)) + ")", point=list(p))
    if args.selftest:
        expect(sol.points == [(2, 2), (4, 8)], "i**2 = 2*j on [1,10]^2 has exactly (2,2) and (4,8)")


def _program(args):
    if args.selftest:
        return four_point(4, args.seed)
    if args.file is None:
        n = args.N if args.N is not None else 8
        if args.example == "diagonal":
            return diagonal(n, args.seed)
        return four_point(n, args.seed)
    params = {"N": args.N} if args.N is not None else {}
    pp = from_nest(parse_nest(read_input(args), **params))
    pp.boundary = seeded_boundary(pp, args.seed)
    return pp


def cmd_dep_wavefront(args, rep: Report) -> None:
    pp = _program(args)
    layers = wavefront_layers(pp)
    rep.add("layers", count=len(layers), points=sum(map(len, layers)))
    for k, layer in enumerate(layers):
        ok = is_parallel(pp, layer)
        rep.add("layer", f"layer {k} ({len(layer)} points, parallel={ok}): " + " ".join(_pt(p) for p in layer),
                index=k, parallel=ok, points=[list(p) for p in layer])
    if args.selftest:
        expect(layers[0] == [(1, 1, 1)], "layer 0 of the four-point example is {(1,1,1)}")


def _pt(p) -> str:
    return "(" + ",".join(map(str, p)) + ")"


def cmd_dep_cone(args, rep: Report) -> None:
    pp = _program(args)
    point = (2, 2, 2) if args.selftest else tuple(int_list(args.point or ""))
    if point not in set(pp.points()):
        raise DomainError("loop nest", f"point {point} is outside the iteration domain")
    cone = sorted(dependence_cone(pp, point))
    rep.add("cone", point=list(point), size=len(cone))
    rep.add("members", "  " + " ".join(_pt(p) for p in cone), points=[list(p) for p in cone])
    if args.selftest:
        expect((1, 1, 1) in cone and point not in cone, "cone reaches the origin and excludes the point")


def cmd_dep_exec(args, rep: Report) -> None:
    pp = _program(args)
    seq = execute_sequential(pp)
    shuffles = 3 if args.selftest else args.shuffles
    same = all(execute_wavefront(pp, shuffle_seed=args.seed + k) == seq for k in range(shuffles))
    last = max(seq)
    rep.add("exec", points=len(seq), shuffles=shuffles, equal=same, last=_pt(last), value=str(seq[last]))
    if args.selftest:
        expect(same, "wavefront execution equals sequential execution exactly")
    elif not same:
        raise DomainError("wavefront", "wavefront execution differs from sequential execution")


# --- ring ---------------------------------------------------------------------------------

PAPER_START = (4, 56, 34, 10, 20, 50, 12, 73, 16, 23)


def cmd_ring_equalize(args, rep: Report) -> None:
    start = PAPER_START if args.selftest or not args.start else tuple(int_list(args.start))
    tr = equalize(start)
    conserved = all(sum(s) == sum(start) for s in tr.phases)
    bound = 2 * len(start) + 1
    first = tr.first_balanced()
    rep.add("equalize", converged=tr.converged, total=sum(start), conserved=conserved,
            balanced_after=first if first is not None else "-", bound=bound, within_bound=first is not None and first <= bound)
    rep.block("trace", tr.render())
    if args.selftest:
        expect(tr.converged and conserved and first is not None and first <= 21, "worked vector balances in 21 phases")


def cmd_ring_sort(args, rep: Report) -> None:
    if args.selftest or not args.fragments:
        if not args.selftest and not args.random:
            raise UsageError("give --fragments, --random M,SIZE or --selftest")
        if args.selftest:
            data = list(range(32, 0, -1))
            frags = [data[i:i + 4] for i in range(0, 32, 4)]
        else:
            m, size = int_list(args.random)
            rng = random.Random(args.seed)
            frags = [[rng.randint(0, 99) for _ in range(size)] for _ in range(m)]
    else:
        frags = [int_list(f) for f in args.fragments.split("/")]
    tr = ring_sort(frags)
    ok = tr.flat() == sorted(x for f in frags for x in f)
    rep.add("sort", modules=len(frags), phases=tr.rounds, sorted=ok)
    rep.block("trace", tr.render())
    if args.selftest:
        expect(ok and tr.rounds <= len(frags), "reverse data sorts within module-count phases")


def cmd_ring_handshake(args, rep: Report) -> None:
    modules = 8 if args.selftest else args.modules
    timing: list = [1] * modules
    if args.timing and not args.selftest:
        timing = [None if t == "dead" else int(t) for t in args.timing.split(",")]
    elif args.selftest:
        timing[3] = 4
    mode = "flag" if args.selftest else args.mode
    tr = run_handshake(modules, args.steps, timing, mode)
    rep.add("handshake", mode=mode, modules=modules, max_wait=tr.max_wait, skew=tr.skew(), deadlock=tr.deadlock)
    rep.block("table", tr.render())
    if args.selftest:
        expect(not tr.deadlock and sum(tr.flags) > 0, "a slow module raises flags instead of blocking")


def cmd_ring_diagram(args, rep: Report) -> None:
    kind = "shared" if args.selftest else args.kind
    if kind == "shared":
        d = diagram_shared(args.workers, args.a, args.b)
    else:
        d = diagram_rotating(args.workers, args.a, args.b)
    rep.add("diagram", kind=kind, workers=args.workers, steps=d.steps)
    rep.block("table", d.render(upto=args.upto))
    if args.selftest:
        first = [c.text() for c in d.row(1)[:5]]
        expect(first == ["1,1,C,D", "1,2,C,D", "1,3,C,D", "1,4,C,D", "2,1,C,D"], "M1 row matches the printed table")


def cmd_ring_fault(args, rep: Report) -> None:
    modules, faulty, behavior, start = (8, 3, "silent", 3) if args.selftest else (
        args.modules, args.faulty, args.behavior, args.start)
    found = detect_fault(modules, faulty, behavior, phases=args.phases, start=start)
    rep.add("fault", detections=len(found), first_phase=found[0].phase if found else "-")
    for d in found[:20]:
        rep.add("detection", f"  phase {d.phase}: M{d.detector} suspects M{d.suspect} ({d.reason})",
                phase=d.phase, detector=d.detector, suspect=d.suspect, reason=d.reason)
    if args.selftest:
        expect(bool(found) and found[0].phase <= start + 1 and found[0].suspect == faulty,
               "silent module found within two phases")


# --- setdef -------------------------------------------------------------------------------

def _family(items: list[str] | None) -> dict[str, frozenset]:
    fam = {}
    for item in items or []:
        name, eq, rhs = item.partition("=")
        if not eq:
            raise UsageError(f"bad set {item!r}, expected NAME=a,b,...")
        fam[name.strip()] = frozenset(parse_value(v) for v in rhs.split(",") if v.strip())
    return fam


def cmd_setdef_check(args, rep: Report) -> None:
    inst = parse_instance(read_input(args, default_fixture="cliques_printed.sdf"))
    fam = {"S": frozenset({"q1"})} if args.selftest else _family(args.set)
    agreed = check_agreed(fam, inst.system, inst.universe)
    rep.add("family", show_family(fam).strip() or "family: (empty)", family=fam)
    rep.block("agreed", agreed.render())
    selected = check_selected(fam, inst.system, inst.universe) if agreed.ok else None
    if selected is not None:
        rep.add("selected", ok=selected.ok, witness=selected.witness or "-", reason=selected.reason or "-")
    if args.selftest:
        expect(agreed.ok and selected is not None and selected.ok, "{q1} is agreed and selected")


def cmd_setdef_solve(args, rep: Report) -> None:
    inst = parse_instance(read_input(args, default_fixture="supporters.sdf"))
    results = {}
    for form in inst.system.forms:
        name = str(form.left)
        try:
            count, kind = classify(form)
        except SetDefError:
            continue
        if count == 2:
            sets = solve_120(form, inst.universe)
            rep.add("solve", f"{name}: two quantifiers, kind {kind}, {len(sets)} variant(s)",
                    name=name, quantifiers=2, kind=kind, variants=sets)
            for s in sets:
                rep.add("variant", f"  {name} = {show_set(s)}", name=name, set=s)
            results[name] = sets
        elif count == 3:
            res = solve_130(form, inst.universe, cap=args.cap)
            rep.add("solve", f"{name}: three quantifiers, verdict {res.verdict}", name=name, quantifiers=3,
                    verdict=res.verdict, variants=res.variants)
            rep.block("detail", res.render(name))
            results[name] = res.variants
        else:
            rep.add("skip", f"{name}: {count} quantifiers, use variants", name=name, quantifiers=count)
    if not results and not args.selftest:
        raise DomainError("set definitions", "no single property form with two or three quantifiers")
    if args.selftest:
        expect(results.get("S") == [frozenset("abcd")], "supporter removal keeps {a,b,c,d}")


def cmd_setdef_variants(args, rep: Report) -> None:
    inst = parse_instance(read_input(args, default_fixture="cliques_printed.sdf"))
    fams = brute_force_variants(inst.system, inst.universe, args.cap, args.criterion)
    rep.add("variants", criterion=args.criterion, count=len(fams))
    for f in fams:
        rep.add("family", "  " + show_family(f).strip().replace("\n", "; "), family=f)
    if args.selftest:
        got = sorted(sorted(f["S"]) for f in fams)
        expect(got == [["q1"], ["q2"], ["q3"]], "printed diagram gives {q1}, {q2}, {q3}")


def cmd_setdef_encode(args, rep: Report) -> None:
    inst = parse_instance(read_input(args, default_fixture="supporters.sdf"))
    cs = to_boolean_constraints(inst.system, inst.universe)
    rep.block("constraints", cs.render())
    horn = None
    if args.horn or args.selftest:
        form = inst.system.forms[0]
        horn = horn_export(form, inst.universe)
        rep.block("horn", render_horn(horn))
    if args.selftest:
        expect(horn is not None and all(len([l for l in c.literals() if not l.startswith("~")]) == 1 for c in horn),
               "every exported clause has one positive literal")


# --- dps ---------------------------------------------------------------------------------

def cmd_dps_run(args, rep: Report) -> None:
    dps = parse_dps(read_input(args, default_fixture="summation.dps"))
    if args.strategy and not args.selftest:
        dps.strategy = args.strategy
    res = run_dps(dps, fuel=args.fuel, seed=args.seed)
    rep.add("run", status=res.status, steps=len(res.trace.steps), rounds=res.trace.rounds,
            fuel_used=res.trace.fuel_used)
    for s in res.trace.steps:
        rep.add("step", s.text(), step=s.step, applied=s.applied, updated=s.updated, digest=s.digest)
    for n in sorted(res.family):
        rep.add("set", f"{n} = {show_set(res.family[n])}", name=n, value=res.family[n])
    if args.selftest:
        expect(res.family["S1"] == {36} and res.trace.rounds == 3, "summation of 1..8 gives {36} in 3 rounds")


def cmd_dps_pr(args, rep: Report) -> None:
    spec, values = ("proj(2,3)", (5, 7, 9)) if args.selftest else (args.spec, tuple(int_list(args.args or "")))
    if not spec:
        raise UsageError("a function spec is required (or --selftest)")
    value, res = run_pr(spec, values, fuel=args.fuel, seed=args.seed)
    rep.add("pr", spec=spec, args=list(values), status=res.status, value=value if value is not None else "-",
            steps=len(res.trace.steps), fuel_used=res.trace.fuel_used)
    if args.selftest:
        expect(value == 7, "proj(2,3) on (5,7,9) returns 7")


def cmd_dps_petri(args, rep: Report) -> None:
    net = parse_net(read_input(args, default_fixture="producer.net"))
    dps, codec = petri_to_dps(net)
    res = run_dps(dps, fuel=args.steps, seed=args.seed)
    for s in res.trace.steps:
        m = codec.decode(s.snapshot)
        rep.add("fire", f"step {s.step}: {s.applied[0]} -> " + " ".join(f"{p}={m[p]}" for p in net.places),
                step=s.step, transition=s.applied[0], marking=m)
    final = codec.decode(res.family)
    rep.add("final", status=res.status, marking=" ".join(f"{p}={final[p]}" for p in net.places))
    co = dual_run(net, args.steps, seed=args.seed)
    rep.add("dual", agreed=co.agreed, fired=len(co.fired), reason=co.reason or "-")
    if args.selftest:
        expect(final == {"ready": 0, "done": 1} and co.agreed, "one firing moves the token")
    elif not co.agreed:
        raise DomainError("petri encoding", co.reason)


# --- parser ------------------------------------------------------------------------------

Handler = Callable[[argparse.Namespace, Report], None]

# group -> command -> (help, handler, argument adder)
COMMANDS: dict[str, dict[str, tuple[str, Handler, Callable[[argparse.ArgumentParser], None]]]] = {}


def command(group: str, name: str, help: str):
    def wrap(add_args):
        def register(handler: Handler):
            COMMANDS.setdefault(group, {})[name] = (help, handler, add_args)
            return handler
        return register
    return wrap


def _file(p):
    p.add_argument("file", nargs="?", help="input file (a bundled example with --selftest)")


def _label(p):
    _file(p)
    p.add_argument("--label", help="loop label")


def _nest(p):
    _file(p)
    p.add_argument("--example", choices=["four-point", "diagonal"], help="built-in nest instead of a file")
    p.add_argument("-N", type=int, help="size parameter N")


GROUP_HELP = {
    "schema": "program schemas", "loop": "loop orientation and separation", "dep": "index dependence",
    "ring": "ring algorithms and diagrams", "setdef": "set-definition systems", "dps": "data processing specifications",
}

command("schema", "validate", "check the L-schema conditions")(_file)(cmd_schema_validate)
command("schema", "run", "execute under an interpretation")(
    lambda p: (_file(p), p.add_argument("--interp", help="interpretation file (default: seeded standard)")))(cmd_schema_run)
command("schema", "iosets", "index/argument/value sets")(_label)(cmd_schema_iosets)
command("loop", "forward", "forward-orient loop bodies")(_file)(cmd_loop_forward)
command("loop", "separate", "split a loop into controllers and kernel")(_label)(cmd_loop_separate)
command("loop", "depth", "controller depth witness")(_label)(cmd_loop_depth)
command("dep", "equations", "connection equations of a nest")(
    lambda p: (_nest(p), p.add_argument("--param", action="append", help="NAME=INT")))(cmd_dep_equations)
command("dep", "solve", "solve one connection equation")(
    lambda p: (p.add_argument("equation", nargs="?", help="e.g. 'i**2 = 2*j'"),
               p.add_argument("--bounds", help="e.g. i=1:10,j=1:10")))(cmd_dep_solve)
command("dep", "wavefront", "wavefront layers")(_nest)(cmd_dep_wavefront)
command("dep", "cone", "dependence cone of a point")(
    lambda p: (_nest(p), p.add_argument("--point", help="comma-separated coordinates")))(cmd_dep_cone)
command("dep", "exec", "wavefront against sequential execution")(
    lambda p: (_nest(p), p.add_argument("--shuffles", type=int, default=10)))(cmd_dep_exec)
command("ring", "equalize", "pairwise load equalization")(
    lambda p: p.add_argument("--start", help="comma-separated module counts"))(cmd_ring_equalize)
command("ring", "sort", "odd-even merge-split sort")(
    lambda p: (p.add_argument("--fragments", help="fragments as 3,1/4,2/..."),
               p.add_argument("--random", help="M,SIZE seeded fragments")))(cmd_ring_sort)
command("ring", "handshake", "handshake timing simulation")(
    lambda p: (p.add_argument("--modules", type=int, default=8), p.add_argument("--steps", type=int, default=20),
               p.add_argument("--mode", choices=["plain", "flag"], default="plain"),
               p.add_argument("--timing", help="per-module compute cost, 'dead' for none")))(cmd_ring_handshake)
command("ring", "diagram", "execution diagram")(
    lambda p: (p.add_argument("--kind", choices=["shared", "rotating"], default="shared"),
               p.add_argument("--workers", type=int, default=4), p.add_argument("--a", type=int, default=2),
               p.add_argument("--b", type=int, default=16), p.add_argument("--upto", type=int)))(cmd_ring_diagram)
command("ring", "fault", "fault detection by state comparison")(
    lambda p: (p.add_argument("--modules", type=int, default=8), p.add_argument("--faulty", type=int),
               p.add_argument("--behavior", choices=["silent", "wrong_state"], default="silent"),
               p.add_argument("--phases", type=int, default=10), p.add_argument("--start", type=int, default=0)))(
    cmd_ring_fault)
command("setdef", "check", "check a family for agreement and selection")(
    lambda p: (_file(p), p.add_argument("--set", action="append", help="NAME=a,b (repeatable)")))(cmd_setdef_check)
command("setdef", "solve", "run the quantifier-class solvers")(
    lambda p: (_file(p), p.add_argument("--cap", type=int, default=12)))(cmd_setdef_solve)
command("setdef", "variants", "enumerate variants by brute force")(
    lambda p: (_file(p), p.add_argument("--cap", type=int, default=12),
               p.add_argument("--criterion", choices=["selected", "maximal", "agreed"], default="selected")))(
    cmd_setdef_variants)
command("setdef", "encode", "boolean encoding and Horn export")(
    lambda p: (_file(p), p.add_argument("--horn", action="store_true")))(cmd_setdef_encode)
command("dps", "run", "run a specification file")(
    lambda p: (_file(p), p.add_argument("--strategy", choices=["all", "sequential", "random", "single"])))(cmd_dps_run)
command("dps", "pr", "run a recursive function representation")(
    lambda p: (p.add_argument("spec", nargs="?", help="e.g. 'add' or 'minimize(sqdiff)'"),
               p.add_argument("args", nargs="?", help="comma-separated arguments")))(cmd_dps_pr)
command("dps", "petri", "run a Petri net through its encoding")(
    lambda p: (_file(p), p.add_argument("--steps", type=int, default=20)))(cmd_dps_petri)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--fuel", type=int, default=10_000, help="step budget (default 10000)")
    common.add_argument("--format", choices=["text", "records"], default="text",
                        help="plain text or newline-delimited JSON records")
    common.add_argument("--selftest", action="store_true", help="replay a bundled example and check it")
    parser = argparse.ArgumentParser(prog="parschema", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"parschema {__version__}")
    groups = parser.add_subparsers(dest="group", required=True, metavar="GROUP")
    for group, cmds in COMMANDS.items():
        gp = groups.add_parser(group, help=GROUP_HELP[group])
        sub = gp.add_subparsers(dest="command", required=True, metavar="COMMAND")
        for name, (help, handler, add_args) in cmds.items():
            p = sub.add_parser(name, help=help, parents=[common], description=help)
            add_args(p)
            p.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.fuel < 0:
        parser.print_usage(sys.stderr)
        print("parschema: error: --fuel must be non-negative", file=sys.stderr)
        return 2
    rep = Report(f"{args.group} {args.command}" + (" --selftest" if args.selftest else ""), args.seed, args.fuel)
    try:
        args.handler(args, rep)
    except UsageError as exc:
        print(f"parschema: error: {exc}", file=sys.stderr)
        return 2
    except SelftestFailed as exc:
        sys.stdout.write(rep.render(args.format))
        print(f"selftest failed: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        sys.stdout.write(rep.render(args.format))
        print(f"error [{exc.contract}]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        for cls, contract in CONTRACTS:
            if isinstance(exc, cls):
                print(f"error [{contract}]: {exc}", file=sys.stderr)
                return 1
        raise
    if args.selftest:
        rep.add("selftest", "selftest: pass", passed=True)
    sys.stdout.write(rep.render(args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parschema.schema import (Assign, ConcreteInterpretation, Cond, IndexExpr, LabelLit, Loop,
                              Outcome, Proc, Schema, SchemaError, StandardInterpretation, Var,
                              bracket_depth, execute, io_sets, parse_interpretation,
                              parse_schema, print_interpretation, print_schema, proc_io_sets,
                              random_standard_interpretation, runs_equal, validate_L)

COUNTED = """
start m0
m0: i = one() then m1
m1: do body while le(i, n) then m2
m2: halt
proc body start b0 {
  b0: a[i] = f(a[i], x) then b1
  b1: i = inc(i) then b2
}
"""


def test_parse_print_roundtrip_counted():
    s = parse_schema(COUNTED)
    assert parse_schema(print_schema(s)) == s
    assert validate_L(s) == []


def test_nested_indexing_rejected():
    with pytest.raises(SchemaError):
        parse_schema("start m0\nm0: x = f(a[b[i]]) then m1\n")


def test_halt_must_be_final():
    with pytest.raises(SchemaError):
        parse_schema("start m0\nm0: x = f() then m1\nm0: halt\n")


def test_cycle_detected():
    s = parse_schema("start m0\nm0: x = f(x) then m1\nm1: if p(x) then m0 else m2\n")
    assert any("cycle" in p for p in validate_L(s))


def test_two_final_labels_detected():
    s = parse_schema("start m0\nm0: if p(x) then m1 else m2\n")
    assert any("final labels" in p for p in validate_L(s))


def test_recursive_call_graph_detected():
    s = parse_schema("""
start m0
m0: do A then m1
proc A start a0 {
  a0: do B then a1
}
proc B start c0 {
  c0: do A then c1
}
""")
    assert any("call graph" in p for p in validate_L(s))


def test_io_sets_frozen():
    # hand-derived: b0 reads a[i], x and writes a; index i
    s = parse_schema(COUNTED)
    b0 = io_sets(s, "b0")
    assert (b0.ind, b0.arg, b0.val) == ({"i"}, {"a", "x", "i"}, {"a"})
    m1 = io_sets(s, "m1")
    assert m1.ind == {"i"} and m1.val == {"a", "i"} and m1.arg == {"a", "x", "i", "n"}
    cond = parse_schema("start m0\nm0: if p(c[k], y) then m1 else m1\n")
    assert io_sets(cond, "m0").val == frozenset()
    assert io_sets(cond, "m0").ind == {"k"}


def test_indexed_target_index_in_ind():
    s = parse_schema("start m0\nm0: a[g(i, j)] = f(x) then m1\n")
    io = io_sets(s, "m0")
    assert io.ind == {"i", "j"} and io.val == {"a"} and io.ind <= io.arg


def test_standard_run_trace_frozen():
    s = parse_schema(COUNTED)
    interp = StandardInterpretation(diagram={"le(inc(one()), n)": True,
                                             "le(inc(inc(one())), n)": False})
    r = execute(s, interp, 100)
    assert r.outcome is Outcome.HALTED
    assert [lab for lab, _ in r.trace] == ["m0", "m1", "b0", "b1", "b0", "b1", "m2"]
    assert [c for lab, c in r.trace if lab == "b0"] == [(1,), (2,)]
    assert r.memory["i"] == "inc(inc(one()))"
    assert r.memory[("a", ("one()",))] == "f(a[one()], x)"


def test_strict_diagram_missing_atom_is_undefined():
    s = parse_schema(COUNTED)
    r = execute(s, StandardInterpretation(diagram={}), 100)
    assert r.outcome is Outcome.UNDEFINED and r.failed_at == "m1"


def test_closed_world_missing_atom_is_false():
    s = parse_schema(COUNTED)
    r = execute(s, StandardInterpretation(closed_world=True), 100)
    assert r.halted and r.memory["i"] == "inc(one())"


def test_empty_cell_without_free_memory():
    s = parse_schema("start m0\nm0: x = f(y) then m1\n")
    r = execute(s, StandardInterpretation(free_memory=False), 10)
    assert r.outcome is Outcome.UNDEFINED


def test_fuel_zero_and_exhaustion():
    s = parse_schema(COUNTED)
    r = execute(s, StandardInterpretation(coin_seed=1), 0)
    assert r.outcome is Outcome.FUEL and r.steps == 0
    loop = parse_schema("start m0\nm0: do B while t() then m1\nproc B start b0 {\n b0: x = f(x) then b1\n}\n")
    r = execute(loop, ConcreteInterpretation(functions={"f": lambda v: v + 1},
                                             predicates={"t": lambda: True}, start={"x": 0}), 50)
    assert r.outcome is Outcome.FUEL


def test_empty_schema_halts_immediately():
    s = parse_schema("start m0\nm0: halt\n")
    r = execute(s, StandardInterpretation(), 5)
    assert r.halted and r.memory == {} and r.trace == [("m0", ())]


def test_concrete_interpretation_arithmetic():
    s = parse_schema(COUNTED)
    interp = ConcreteInterpretation(
        functions={"one": lambda: 1, "inc": lambda v: v + 1, "f": lambda a, x: a * x},
        predicates={"le": lambda a, b: a <= b},
        start={"n": 3, "x": 2, ("a", (1,)): 1, ("a", (2,)): 5, ("a", (3,)): 7})
    r = execute(s, interp, 1000)
    assert r.halted
    assert [r.memory[("a", (k,))] for k in (1, 2, 3)] == [2, 10, 14]


def test_partial_table_is_undefined():
    s = parse_schema("start m0\nm0: x = f(y) then m1\n")
    interp = ConcreteInterpretation(functions={"f": {1: 2}}, start={"y": 3})
    assert execute(s, interp, 10).outcome is Outcome.UNDEFINED


def test_runs_equal_verdicts():
    s = parse_schema(COUNTED)
    t = parse_schema(COUNTED.replace("f(a[i], x)", "f(x, a[i])"))
    interp = random_standard_interpretation(s, 4)
    assert runs_equal(s, s, interp, 10_000) is True
    assert runs_equal(s, t, interp, 10_000) is False
    assert runs_equal(s, t, interp, 2) is None


def test_interpretation_file_roundtrip():
    text = """
[start]
x = 3
a[1] = 1/4
[functions]
f(1, 2) = 3
[predicates]
p(1) = true
"""
    interp = parse_interpretation(text)
    assert isinstance(interp, ConcreteInterpretation)
    assert interp.start[("a", (1,))] == Fraction(1, 4)
    again = parse_interpretation(print_interpretation(interp))
    assert again == interp
    std = parse_interpretation("[diagram]\np(x, f(y))\n~q(x)\n[options]\nclosed_world = true\n")
    assert isinstance(std, StandardInterpretation)
    assert std.diagram == {"p(x, f(y))": True, "q(x)": False} and std.closed_world
    assert parse_interpretation(print_interpretation(std)) == std


def test_bracket_depth():
    assert bracket_depth("x") == 0
    assert bracket_depth("a[b[c], d[e]]") == 2


# --- property tests ---------------------------------------------------------

NAMES = ["i", "j", "s", "t"]
ARRAYS = ["a", "b"]


@st.composite
def variables(draw):
    if draw(st.booleans()):
        return Var(draw(st.sampled_from(NAMES)))
    ix = draw(st.sampled_from(NAMES))
    fn = draw(st.sampled_from([None, "g"]))
    return Var(draw(st.sampled_from(ARRAYS)), (IndexExpr(fn, (ix,)),))


@st.composite
def straight_bodies(draw, max_len=6):
    n = draw(st.integers(1, max_len))
    proc = Proc("body", "b0")
    for k in range(n):
        if draw(st.integers(0, 5)) == 0:
            nxt = f"b{k + 1}"
            proc.add(Cond(f"b{k}", "q", (draw(variables()),), nxt, nxt))
            continue
        args = tuple(draw(st.lists(variables(), max_size=2)))
        proc.add(Assign(f"b{k}", draw(variables()), draw(st.sampled_from(["f", "h"])), args,
                        f"b{k + 1}"))
    # a fresh counter term every iteration keeps coin-decided loops terminating
    proc.add(Assign(f"b{n}", Var("ctr"), "inc", (Var("ctr"),), f"b{n + 1}"))
    main = Proc("main", "m0", {"m0": Loop("m0", "body", "more", (Var("ctr"),), "m1")})
    return Schema(main, {"body": proc})


@settings(max_examples=60, deadline=None)
@given(straight_bodies())
def test_roundtrip_property(schema):
    assert parse_schema(print_schema(schema)) == schema


@settings(max_examples=60, deadline=None)
@given(straight_bodies())
def test_ind_subset_arg_property(schema):
    for lab in schema.procs["body"].instrs:
        io = io_sets(schema, lab)
        assert io.ind <= io.arg
    whole = proc_io_sets(schema, "body")
    assert whole.ind <= whole.arg


@settings(max_examples=30, deadline=None)
@given(straight_bodies(), st.integers(0, 10_000))
def test_execution_deterministic(schema, seed):
    interp = random_standard_interpretation(schema, seed)
    r1 = execute(schema, interp, 5_000)
    r2 = execute(schema, interp, 5_000)
    assert r1.outcome == r2.outcome and r1.memory == r2.memory and r1.trace == r2.trace
    if r1.halted:
        assert r1.trace[-1][0] == schema.main.final

import random

import pytest
from hypothesis import given, settings, strategies as st

from parschema.dps import (DpsError, LIBRARY, PetriNet, Runner, abit, build_pr, dps_successors,
                           dual_run, net_successors, parse_dps, parse_net, parse_pr, petri_to_dps, random_net,
                           reachable, run_dps, run_pr)
from parschema.dps.engine import parse_definition

from conftest import load_fixture


def summation(values, strategy="all"):
    d = parse_dps(load_fixture("summation.dps"))
    d.strategy = strategy
    return d, {"S1": frozenset(values)}


# --- direct evaluation of recursive function specs, used as oracle -------------------------------

def direct(spec, args, budget=10_000):
    """Plain recursive evaluation; None when the minimization search exceeds ``budget``."""
    op = spec.op
    if op == "zero":
        return 0
    if op == "succ":
        return args[0] + 1
    if op == "proj":
        return args[spec.args[0] - 1]
    if op == "compose":
        inner = [direct(h, args, budget) for h in spec.args[1:]]
        return None if None in inner else direct(spec.args[0], inner, budget)
    if op == "primrec":
        g, h = spec.args
        acc = direct(g, args[1:], budget)
        for y in range(args[0]):
            if acc is None:
                return None
            acc = direct(h, [y, acc] + list(args[1:]), budget)
        return acc
    if op == "minimize":
        for y in range(budget):
            v = direct(spec.args[0], [y] + list(args), budget)
            if v is None:
                return None
            if v == 0:
                return y
        return None
    raise AssertionError(op)


# --- engine -------------------------------------------------------------------------------

def test_summation_example():
    d, start = summation(range(1, 9))
    res = run_dps(d, start)
    assert res.status == "quiescent"
    assert res.family["S1"] == {36}
    assert res.trace.rounds == 3
    assert [len(v) for v in res.trace.values("S1")] == [4, 2, 1, 1]


def test_summation_hundred():
    d, start = summation(range(1, 101))
    res = run_dps(d, start)
    assert res.family["S1"] == {5050}
    assert res.status == "quiescent"


@given(st.sets(st.integers(0, 200), min_size=1, max_size=40), st.sampled_from(["all", "random", "single"]),
       st.integers(0, 1000))
@settings(max_examples=60, deadline=None)
def test_summation_sum_invariant(values, strategy, seed):
    d, start = summation(values, strategy)
    res = run_dps(d, start, seed=seed)
    total = sum(values)
    for snap in res.trace.values("S1"):
        assert sum(snap) == total
    assert res.family["S1"] == {total}


def test_seeded_abit_odd_size_carries_one():
    groups = abit(frozenset(range(1, 10)), 2, random.Random(3))
    assert sorted(len(g) for g in groups) == [1, 2, 2, 2, 2]
    assert sorted(v for g in groups for v in g) == list(range(1, 10))
    d, start = summation(range(1, 10), "random")
    for seed in range(10):
        assert run_dps(d, start, seed=seed).family["S1"] == {45}


def test_default_abit_sorted_with_smallest_carried():
    assert abit(frozenset({1, 2, 3, 4, 5}), 2) == [(1,), (2, 3), (4, 5)]


def test_empty_input_quiescent_at_once():
    d, _ = summation([])
    res = run_dps(d, {"S1": frozenset()})
    assert res.status == "quiescent"
    assert res.trace.steps == []


def test_trace_reproducible():
    d, start = summation(range(1, 30), "random")
    a = run_dps(d, start, seed=5).trace.render()
    b = run_dps(d, start, seed=5).trace.render()
    assert a == b


def test_fuel_exhaustion_is_a_status():
    d, start = summation(range(1, 101))
    res = run_dps(d, start, fuel=2)
    assert res.status == "fuel-exhausted"
    assert res.trace.fuel_used == 2


def test_conflicting_writes():
    text = """[dps]
start = A
[start]
A = 1
[system F1]
inputs = A
B = {5}
[system F2]
inputs = A
B = {6}
"""
    with pytest.raises(DpsError, match="both write B"):
        run_dps(parse_dps(text))
    d = parse_dps(text)
    d.conflicts = "union"
    assert run_dps(d).family["B"] == {5, 6}


def test_when_keeps_and_if_clears():
    text = """[dps]
start = A
[start]
A = 1
B = 7
C = 7
[system F1]
inputs = A
B = {image s(x); x in A} when all x in A: x > 3
C = {image s(x); x in A; if x > 3}
"""
    fam = run_dps(parse_dps(text)).family
    assert fam["B"] == {7}
    assert fam["C"] == frozenset()


def test_later_steps_need_an_updated_input():
    # G reads A, which never changes after the start, so G fires only on step 1
    text = """[dps]
start = A
[start]
A = 1
[system G]
inputs = A
B = {image s(x); x in A}
[system H]
inputs = B
C = {image s(x); x in B}
"""
    res = run_dps(parse_dps(text))
    assert [s.applied for s in res.trace.steps] == [["G"], ["H"]]
    assert res.family["C"] == {3}


def test_definition_round_trip():
    d = parse_definition("Z = {image s(x2); x1 in I, x2 in Z} when all v in A1: all w in I: w < v")
    assert str(parse_definition(str(d))) == str(d)


def test_dps_text_round_trip():
    d = build_pr("add")
    assert parse_dps(d.render()).render() == d.render()


@pytest.mark.parametrize("strategy", ["all", "sequential", "random"])
def test_strategy_independence_on_disjoint_systems(strategy):
    text = """[dps]
start = S1, S2
[start]
S1 = 1, 2, 3, 4, 5, 6, 7
S2 = 10, 20, 30
[system F1]
inputs = S1
S1 = {image plus(a); a in Abit[S1, 2]}
[system F2]
inputs = S2
S2 = {image plus(a); a in Abit[S2, 2]}
"""
    base = run_dps(parse_dps(text)).family
    d = parse_dps(text)
    d.strategy = strategy
    for seed in range(20):
        assert run_dps(d, seed=seed).family == base


def test_single_strategy_fires_one_system():
    d, start = summation(range(1, 9), "single")
    res = run_dps(d, start, seed=1)
    assert all(len(s.applied) == 1 for s in res.trace.steps)


# --- recursive functions -------------------------------------------------------------------

def test_projection():
    value, res = run_pr("proj(2,3)", (5, 7, 9))
    assert value == 7
    assert res.family["Z"] == {7}


def test_basic_functions():
    assert run_pr("zero", (4,))[0] == 0
    assert run_pr("succ", (4,))[0] == 5
    assert run_pr("compose(succ, compose(succ, proj(1,2)))", (4, 9))[0] == 6


def test_add_exhaustive():
    spec = parse_pr("add")
    for x in range(11):
        for y in range(11):
            value, res = run_pr("add", (x, y))
            assert res.status == "quiescent"
            assert value == x + y == direct(spec, [x, y])


def test_counter_discipline():
    for y in range(6):
        _, res = run_pr("add", (y, 2))
        counters = res.trace.values("I")
        assert counters == [frozenset({i}) for i in range(y + 1)] + [frozenset()]
        # the base system fires once, the step system on every later step
        assert res.trace.steps[0].applied == ["F1"]
        assert all(s.applied == ["F2"] for s in res.trace.steps[1:])
        assert [sorted(z) for z in res.trace.values("Z")] == [[2 + i] for i in range(y + 1)] + [[2 + y]]


@pytest.mark.parametrize("name", ["mul", "pred", "monus", "absdiff", "sqdiff"])
def test_library_against_direct_recursion(name):
    spec = parse_pr(LIBRARY[name])
    n = 1 if name == "pred" else 2
    for args in ([a] if n == 1 else [a, b] for a in range(5) for b in range(5 if n == 2 else 1)):
        value, res = run_pr(name, tuple(args))
        assert value == direct(spec, args), (name, args)


def test_minimization():
    spec = parse_pr("minimize(sqdiff)")
    value, res = run_pr("minimize(sqdiff)", (9,))
    assert value == 3 == direct(spec, [9])
    for x in (0, 1, 4, 16):
        assert run_pr("minimize(sqdiff)", (x,))[0] == direct(spec, [x])


def test_minimization_undefined_never_answers():
    value, res = run_pr("minimize(sqdiff)", (7,), fuel=3000)
    assert value is None
    assert res.status == "fuel-exhausted"
    assert res.family["Z"] == frozenset()


def test_minimization_structure():
    d = build_pr("minimize(sqdiff)")
    assert [s.name for s in d.systems] == ["F1", "F2"]
    assert "all y in U: y != 0" in d.render()


@pytest.mark.parametrize("bad", ["proj(3,2)", "compose(succ)", "primrec(zero)", "frob", "succ(", "proj(1,1) x",
                                 "compose(proj(1,2), succ)"])
def test_malformed_specs(bad):
    with pytest.raises(DpsError):
        build_pr(bad)


# --- Petri nets -----------------------------------------------------------------------------

def test_net_needing_two_tokens_is_quiescent():
    net = PetriNet(["p", "q"], ["t"], {("p", "t"): 2}, {("t", "q"): 1}, {"p": 1})
    d, codec = petri_to_dps(net)
    res = run_dps(d)
    assert res.status == "quiescent"
    assert res.trace.steps == []
    assert codec.decode(res.family) == {"p": 1, "q": 0}


def test_producer_consumer():
    net = parse_net(load_fixture("producer.net"))
    d, codec = petri_to_dps(net)
    r = Runner(d)
    r.step()
    assert codec.decode(r.family) == {"ready": 0, "done": 1} == net.fire("move")


def test_net_text_round_trip():
    net = random_net(random.Random(4))
    assert parse_net(net.render()).render() == net.render()


def test_codec_round_trip():
    net = random_net(random.Random(8))
    _, codec = petri_to_dps(net)
    assert codec.decode(codec.encode(net.marking)) == net.marking


def test_dual_simulation_random_nets():
    for i in range(50):
        net = random_net(random.Random(i), 4, 3)
        run = dual_run(net, 25, seed=i)
        assert run.agreed, run.reason


def test_single_step_relation_small_nets():
    for i in range(60):
        rng = random.Random(500 + i)
        net = random_net(rng, rng.randint(1, 5), rng.randint(1, 5))
        d, codec = petri_to_dps(net)
        for m in reachable(net, limit=30):
            assert dps_successors(d, codec, m) == net_successors(net, m)


def test_bad_net():
    with pytest.raises(DpsError):
        parse_net("places p\ntransitions t\nt -> t")
    with pytest.raises(DpsError):
        PetriNet(["p"], ["t"], marking={"p": -1})

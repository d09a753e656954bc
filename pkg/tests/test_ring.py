import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_fixture
from parschema.ring import (OutputList, PriorityLoop, PriorityLoopError, detect_fault, diagram_rotating,
                            diagram_shared, equalize, expenses_data, expenses_loop, four_list_loop,
                            independence_level, product_sum_loop, ring_sort, run_handshake,
                            run_priority_loop, sequential_combinations, step, transition_table)

START = (4, 56, 34, 10, 20, 50, 12, 73, 16, 23)

# printed shared-memory table, times 1..6
SHARED_TABLE = {
    1: ["1,1,C,D", "1,2,C,D", "1,3,C,D", "1,4,C,D", "2,1,C,D", "2,2,C,D"],
    2: ["1,5,C,D", "1,6,C,D", "1,7,C,D", "1,8,C,D", "2,5,C,D", "2,6,C,D"],
    3: ["1,9,C,D", "1,10,C,D", "1,11,C,D", "1,12,C,D", "2,9,C,D", "2,10,C,D"],
    4: ["1,13,C,D", "1,14,C,D", "1,15,C,D", "1,16,C,D", "2,13,C,D", "2,14,C,D"],
}


# --- priority loops ----------------------------------------------------------------

def expenses_oracle(data):
    """Department balances computed directly, without the loop machinery."""
    limit, mark = {}, {}
    for d, dep in enumerate(data["Limits"]):
        bal = dep["Limit"]
        touched = False
        for buy in data["Bought"]:
            for pr in data["Prices"]:
                if dep["DepL"] == buy["DepB"] and pr["Prod"] == buy["Sup"]:
                    bal -= buy["Quant"] * pr["price"]
                    touched = True
                    if bal < 0:
                        mark[(d,)] = "*"
        if touched:
            limit[(d,)] = bal
    return limit, mark


def test_independence_levels():
    assert independence_level(expenses_loop()) == 1
    assert independence_level(four_list_loop()) == 2
    assert independence_level(product_sum_loop()) is None
    free = PriorityLoop(("X", "Y"), (OutputList("out", 2),), lambda rows, out: out.set("out", 1))
    assert independence_level(free) == 2


@pytest.mark.parametrize("seed", range(10))
def test_expenses_match_oracle_and_parallel(seed):
    data = expenses_data(seed)
    seq = run_priority_loop(expenses_loop(), data)
    par = run_priority_loop(expenses_loop(), data, "parallel", 1, workers=4)
    limit, mark = expenses_oracle(data)
    assert seq.outputs["Limit"] == limit
    assert seq.outputs["LimitMark"] == mark
    assert par.normalized() == seq.normalized()


def test_product_sum_matches_double_loop():
    xs, ys = [3, -1, 4, 1], [5, 9, 2]
    res = run_priority_loop(product_sum_loop(), {"X": xs, "Y": ys})
    assert res.outputs["total"][()] == sum(x * y for x in xs for y in ys)
    assert res.steps == 12


def test_four_lists_parallel_levels():
    data = {"A": [1, 2], "B": list(range(1, 17)), "C": [2, 3, 5], "D": [1, 4]}
    seq = run_priority_loop(four_list_loop(), data)
    for level in (1, 2):
        assert run_priority_loop(four_list_loop(), data, "parallel", level, 4).normalized() == seq.normalized()
    assert len(seq.outputs["acc"]) == 32


def test_empty_list_gives_empty_outputs():
    res = run_priority_loop(product_sum_loop(), {"X": [], "Y": [1, 2]})
    assert res.steps == 0 and res.outputs == {"total": {}}


def test_parallel_above_certified_level_is_rejected():
    with pytest.raises(PriorityLoopError):
        run_priority_loop(expenses_loop(), expenses_data(0), "parallel", 2)
    with pytest.raises(PriorityLoopError):
        run_priority_loop(product_sum_loop(), {"X": [1], "Y": [1]}, "parallel", 1)


def test_undeclared_read_is_caught():
    sneaky = PriorityLoop(("X",), (OutputList("o", 1),), lambda rows, out: out.set("o", out.get("o")))
    with pytest.raises(PriorityLoopError):
        run_priority_loop(sneaky, {"X": [1]})


def test_starter_and_final_hooks_run_once_per_scan():
    calls = []
    pl = PriorityLoop(("X", "Y"), (OutputList("o", 2),), lambda rows, out: out.set("o", rows["Y"]),
                      starters={2: lambda p, out: calls.append(("H", p))},
                      finals={2: lambda p, out: calls.append(("K", p))})
    run_priority_loop(pl, {"X": [1, 2], "Y": [7, 8, 9]})
    assert calls == [("H", (0,)), ("K", (0,)), ("H", (1,)), ("K", (1,))]


# --- diagrams ---------------------------------------------------------------------

def test_shared_diagram_matches_printed_table():
    d = diagram_shared(4, a_len=2, b_len=16)
    for m, row in SHARED_TABLE.items():
        assert [c.text() for c in d.row(m, 6)] == row


def test_single_worker_shared_is_sequential_order():
    d = diagram_shared(1, a_len=2, b_len=3)
    assert [(c.a, c.b) for c in d.row(1)] == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]


def test_rotating_staircase_and_movement():
    d = diagram_rotating(4, a_len=2, b_len=16)
    idle = {m: [c.text() for c in d.row(m) if c.idle] for m in range(1, 5)}
    assert idle == {1: [], 2: ["(C2)"], 3: ["(C3)", "(C2)"], 4: ["(C4)", "(C3)", "(C2)"]}
    assert d.holders[(1, "C3")] == 3 and d.holders[(2, "C2")] == 3 and d.holders[(3, "C1")] == 3
    assert d.holders[(1, "C2")] == 2
    assert d.row(1, 1)[0].text() == "1,1,C1"
    assert d.cells[(3, 3)].text() == "1,9,C1" and d.cells[(4, 4)].text() == "1,13,C1"


@pytest.mark.parametrize("w,a_len,nb", [(1, 2, 3), (2, 1, 1), (3, 2, 2), (4, 2, 4), (5, 1, 2)])
def test_rotating_invariants(w, a_len, nb):
    d = diagram_rotating(w, a_len=a_len, b_len=w * nb)
    for t in range(1, d.steps + 1):
        held = [d.holders[(t, f"C{j}")] for j in range(1, w + 1)]
        assert sorted(held) == list(range(1, w + 1))
    assert d.processed() == sequential_combinations(w, a_len, w * nb)
    # counted cell by cell: module w idles w-1 steps, then works w*nb*a_len
    assert d.steps == (w - 1) + w * nb * a_len
    if w == 1:
        assert [(c.a, c.b) for c in d.row(1)] == [(c.a, c.b) for c in diagram_shared(1, a_len, nb).row(1)]


# --- equalization -------------------------------------------------------------------

def test_equalize_worked_example():
    tr = equalize(START)
    assert all(sum(s) == 298 for s in tr.phases)
    assert tr.first_balanced() <= 21
    assert sorted(tr.final) == [29, 29] + [30] * 8
    # second printed row of the worked trace
    assert tr.phases[0] == (30, 30, 22, 22, 35, 35, 43, 42, 20, 19)


def test_equalize_trivial_cases():
    assert equalize((7, 7, 7, 7)).rounds == 0
    tr = equalize((0, 10))
    assert tr.phases == [(5, 5)]
    assert equalize((0, 9)).final == (5, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.lists(st.integers(0, 100), min_size=2 * n, max_size=2 * n)))
def test_equalize_conserves_and_converges(counts):
    tr = equalize(counts)
    assert all(sum(s) == sum(counts) for s in tr.phases)
    assert tr.converged


# --- sorting --------------------------------------------------------------------------

def test_sort_already_sorted_one_phase():
    tr = ring_sort([[1, 2], [3, 4], [5, 6], [7, 8]])
    assert tr.rounds == 1 and tr.exchanges == [0]


def test_sort_reverse_eight_modules():
    data = list(range(32, 0, -1))
    tr = ring_sort([data[i:i + 4] for i in range(0, 32, 4)])
    assert tr.flat() == sorted(data)
    assert tr.rounds <= 8


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 5), st.randoms(use_true_random=False))
def test_sort_property(n, size, rnd):
    frags = [[rnd.randint(-20, 20) for _ in range(size)] for _ in range(2 * n)]
    tr = ring_sort(frags)
    assert tr.flat() == sorted(x for f in frags for x in f)
    assert tr.rounds <= 2 * n
    assert [len(f) for f in tr.final] == [size] * (2 * n)


def test_sort_rejects_unequalized():
    with pytest.raises(ValueError):
        ring_sort([[1, 2, 3], [1]])


# --- handshake automaton ------------------------------------------------------------

def test_transition_table_fixture():
    assert transition_table() == load_fixture("automaton.txt")


def test_mismatched_flag_keeps_waiting():
    assert step("r", "F", flag_id=3, own_id=2) == ("wait", "r")
    assert step("r", "F", flag_id=2, own_id=2) == ("take package from right", "p")
    tr = run_handshake(4, 4, [1] * 4, "flag", stray_flags={(1, 0): 3})
    waits = [e for e in tr.events if e.module == 1 and e.state == "r"]
    assert [e.next for e in waits] == ["r", "p"] + ["p"] * (len(waits) - 2)
    assert not tr.deadlock


def test_uniform_timing_has_no_skew():
    tr = run_handshake(8, 20, [1] * 8)
    assert tr.skew() == 0 and tr.max_wait == 0 and not tr.deadlock
    for k in range(1, 9):
        states = tr.states(k)
        assert len(states) == 20
        assert all(a != b for a, b in zip(states, states[1:]))


def test_slow_module_linear_without_flags_bounded_with():
    timing = [1, 1, 10, 1, 1, 1, 1, 1]
    plain = [run_handshake(8, s, timing).max_wait for s in (20, 40, 80)]
    flag = [run_handshake(8, s, timing, "flag").max_wait for s in (20, 40, 80)]
    # doubling the run roughly doubles the worst wait
    assert plain[0] > 0 and plain[1] >= 1.8 * plain[0] and plain[2] >= 1.8 * plain[1]
    assert max(flag) <= 1
    assert len(set(flag)) == 1


def test_dead_module_deadlocks():
    tr = run_handshake(4, 5, [1, None, 1, 1])
    assert tr.deadlock and 2 in tr.stuck


# --- fault detection ----------------------------------------------------------------

def test_healthy_ring_no_flags():
    assert detect_fault(8, None, phases=100) == []


@pytest.mark.parametrize("k", range(1, 9))
def test_silent_module_detected_within_two_phases(k):
    found = detect_fault(8, k, "silent", phases=10, start=3)
    assert found and found[0].phase <= 3 + 1
    assert {d.detector for d in found if d.phase <= 4} <= {(k - 2) % 8 + 1, k % 8 + 1}
    assert all(d.suspect == k for d in found)


@pytest.mark.parametrize("start", [0, 1, 5])
def test_wrong_state_detected(start):
    found = detect_fault(6, 4, "wrong_state", phases=20, start=start)
    assert found and found[0].phase <= start + 1
    assert "state mismatch" in found[0].reason


def test_seeded_random_ring_sizes_converge():
    rng = random.Random(3)
    for _ in range(50):
        m = rng.choice(range(2, 17, 2))
        assert equalize([rng.randint(0, 100) for _ in range(m)]).converged

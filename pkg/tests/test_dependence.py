import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from parschema.dependence import (BOUNDED, BUDGET, EXACT, UNSOLVABLE, ConnectionEquation,
                                  NestError, PredecessorProgram, affine_normal,
                                  build_connection_equations, certify_normal, column_echelon,
                                  dependence_cone, diagonal, execute_sequential,
                                  execute_wavefront, format_nest, four_point, from_nest,
                                  hyperplane_layers, is_parallel, lower_to_schema, parse_nest,
                                  run_nest, solve_connection, solve_integer_system,
                                  wavefront_layers)
from parschema.dependence.wavefront import FOUR_POINT
from parschema.schema import ConcreteInterpretation, execute, validate_L


def brute_points(eq: ConnectionEquation):
    """Independent oracle: test every box point against the sympy expressions."""
    exprs = [sp.lambdify(eq.variables, e) for e in eq.exprs]
    cons = [sp.lambdify(eq.variables, c) for c in eq.constraints]
    out = []
    for p in itertools.product(*(range(lo, hi + 1) for lo, hi in eq.box)):
        if all(f(*p) == 0 for f in exprs) and all(c(*p) for c in cons):
            out.append(p)
    return out


def test_quadratic_example_frozen():
    eq = ConnectionEquation.from_text("i**2 = 2*j", {"i": (1, 10), "j": (1, 10)})
    sol = solve_connection(eq)
    assert sol.status == BOUNDED
    assert sol.points == [(2, 2), (4, 8)]


def test_opaque_index_is_unsolvable():
    eq = ConnectionEquation.from_text("g(i) = j", {"i": (1, 3), "j": (1, 3)})
    assert solve_connection(eq).status == UNSOLVABLE


def test_budget_exceeded_reported():
    eq = ConnectionEquation.from_text("i**2 + j**2 = k", {"i": (1, 30), "j": (1, 30), "k": (1, 30)})
    sol = solve_connection(eq, budget=100)
    assert sol.status == BUDGET and sol.explored == 100


def test_linear_empty_and_full_bounds():
    eq = ConnectionEquation.from_text("2*i = 2*j + 1", {"i": (1, 9), "j": (1, 9)})
    assert solve_connection(eq).points == []
    eq = ConnectionEquation.from_text("i = i", {"i": (3, 2)})
    assert solve_connection(eq).points == []


def test_nest_equations_against_enumeration():
    nest = parse_nest("""
param N = 6
for i = 1 .. N
for j = 1 .. i
a[i, j] = f(a[i - 1, j], a[j, i])
b[2*i] = h(b[i + j])
""")
    eqs = build_connection_equations(nest)
    assert len(eqs) == 3
    for eq in eqs:
        sol = solve_connection(eq)
        assert sol.status == EXACT
        assert sol.points == brute_points(eq)


def random_linear_instance(rng: random.Random) -> ConnectionEquation:
    names = ["x", "y", "z", "w"][: rng.randint(1, 4)]
    m = rng.randint(1, 2)
    parts = []
    for _ in range(m):
        lhs = " + ".join(f"({rng.randint(-5, 5)})*{v}" for v in names)
        parts.append(f"{lhs} = {rng.randint(-8, 8)}")
    bounds = {v: (rng.randint(-6, 1), rng.randint(1, 7)) for v in names}
    return ConnectionEquation.from_text("; ".join(parts), bounds)


def test_linear_solver_matches_enumeration_1000():
    rng = random.Random(2024)
    for _ in range(1000):
        eq = random_linear_instance(rng)
        assert solve_connection(eq).points == brute_points(eq)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=3))
def test_column_echelon_invariants(A):
    H, U, piv = column_echelon(A, 3)
    AU = [[sum(A[i][k] * U[k][j] for k in range(3)) for j in range(3)] for i in range(len(A))]
    assert AU == H
    det = sp.Matrix(U).det()
    assert abs(det) == 1
    for r, c in piv:
        assert H[r][c] > 0 and all(H[r][j] == 0 for j in range(c + 1, 3))


def test_integer_system_no_solution():
    assert solve_integer_system([[2, 4]], [3], 2) is None


# --- predecessor programs ---------------------------------------------------------

def test_four_point_layers_frozen_N4():
    pp = four_point(4)
    layers = wavefront_layers(pp)
    assert layers[0] == [(1, 1, 1)]
    assert layers[1] == [(1, 1, 2), (1, 2, 1)]
    assert (2, 1, 1) in layers[2]
    assert len(layers) == 13


def brute_layers(pp):
    """Independent oracle: iterate layer(x) = 1 + max(layer(pred)) until stable."""
    pts = list(pp.points())
    dom = set(pts)
    layer = {x: 0 for x in pts}
    changed = True
    while changed:
        changed = False
        for x in reversed(pts):
            preds = [tuple(a + b for a, b in zip(x, d)) for d in pp.offsets]
            best = max([layer[y] + 1 for y in preds if y in dom], default=0)
            if best != layer[x]:
                layer[x] = best
                changed = True
    out = {}
    for x, k in layer.items():
        out.setdefault(k, []).append(x)
    return [sorted(out[k]) for k in sorted(out)]


@pytest.mark.parametrize("make,N", [(four_point, 3), (four_point, 5), (diagonal, 6)])
def test_layers_match_fixpoint_oracle(make, N):
    pp = make(N)
    assert wavefront_layers(pp) == brute_layers(pp)


def test_affine_normal_four_point():
    pp = four_point(4)
    n = affine_normal(pp)
    assert n == (2, 1, 1) and certify_normal(pp, n)
    assert not certify_normal(pp, (1, 1, 1))
    for plane in hyperplane_layers(pp, n):
        assert is_parallel(pp, plane)


def test_cone_contains_all_lex_smaller_in_reach():
    pp = four_point(3)
    cone = dependence_cone(pp, (2, 2, 2))
    assert (1, 1, 1) in cone and (2, 2, 2) not in cone
    assert all(p < (2, 2, 2) for p in cone)


def test_offset_must_be_lex_negative():
    with pytest.raises(NestError):
        from_nest(parse_nest("for i = 1 .. 3\nf[i] = g(f[i + 1])\n"))


def test_missing_boundary_is_error():
    pp = from_nest(parse_nest("for i = 1 .. 3\nf[i] = avg(f[i - 1])\n"))
    with pytest.raises(NestError):
        execute_sequential(pp)


def test_empty_domain():
    pp = from_nest(parse_nest("param N = 0\nfor i = 1 .. N\nf[i] = avg(f[i - 1])\n"))
    assert wavefront_layers(pp) == [] and execute_sequential(pp) == {}


def test_diagonal_rows_independent_pairs_not():
    pp = diagonal(8)
    rows = {}
    for x, y in pp.points():
        rows.setdefault(y, []).append((x, y))
    assert all(is_parallel(pp, r) for r in rows.values())
    assert not is_parallel(pp, rows[1] + rows[2])


@pytest.mark.parametrize("seed", range(3))
def test_wavefront_equals_sequential_exact(seed):
    pp = four_point(5, seed)
    seq = execute_sequential(pp)
    assert all(isinstance(v, Fraction) for v in seq.values())
    assert execute_wavefront(pp, shuffle_seed=seed) == seq


def test_nest_roundtrip_text():
    nest = parse_nest("param N = 3\nfor i = 1 .. N\nfor j = i .. N\na[i, j] = f(a[i - 1, j])\n")
    again = parse_nest(format_nest(nest))
    assert list(again.domain.points()) == list(nest.domain.points())
    assert [str(s) for s in again.body] == [str(s) for s in nest.body]


def test_lowered_schema_matches_direct_run():
    pp = four_point(3, seed=5)
    nest = parse_nest(FOUR_POINT, N=3)
    schema, funcs, preds = lower_to_schema(nest)
    assert validate_L(schema) == []
    start = {("f", p): v for p, v in pp.boundary.items()}
    funcs["avg"] = lambda *a: sum(a, Fraction(0)) / len(a)
    res = execute(schema, ConcreteInterpretation(funcs, preds, start), 100_000, trace=False)
    assert res.halted
    direct = run_nest(nest, start, {"avg": funcs["avg"]})
    seq = execute_sequential(pp)
    for p, v in seq.items():
        assert res.memory[("f", p)] == v == direct[("f", p)]

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parschema.schema import ConcreteInterpretation, StandardInterpretation
from parschema.setdef import (VOID, CapExceeded, Dictionary, FormSystem, SetDefError, Universe, agreed_families,
                              apply_delta, brute_force_variants, check_agreed, check_selected, dictionary_op,
                              eval_formula, flatten, gamma_closure, hierarchy, horn_export, horn_greatest,
                              load_instance, oracle_sets, parse_form, parse_formula, parse_instance, parse_system,
                              render_sections, solve_120, solve_130, solve_pair, to_boolean_constraints)

PAIR_FORMS = {
    1: "S = {all x in S: all y in S: p(x, y)}",
    2: "S = {all x in S: ex y in S: p(x, y)}",
    3: "S = {ex x in S: all y in S: p(x, y)}",
    4: "S = {ex x in S: ex y in S: p(x, y)}",
}


def closed(atoms, elems):
    return Universe(list(elems), StandardInterpretation(diagram={a: True for a in atoms}, closed_world=True))


def random_pair_universe(rng, n, density=0.35):
    elems = [f"e{i}" for i in range(n)]
    atoms = [f"p({x}, {y})" for x in elems for y in elems if rng.random() < density]
    return closed(atoms, elems)


# --- syntax ----------------------------------------------------------------------------

@pytest.mark.parametrize("text", [
    *PAIR_FORMS.values(),
    "Sc = {l1, l2}",
    "Comp = {base Seed step x from y: edge(x, y)}",
    "T[v] = {image f(v, z); v in A, z in B[v]}",
    "Nice = {all L in Nice: all x in L: ok(x); within Lab[*]}",
    "S = {all x in S: ~p(x) | (q(x) -> x != c)}",
])
def test_form_round_trip(text):
    f = parse_form(text)
    assert parse_form(str(f)) == f


def test_unicode_quantifiers():
    assert parse_form("S = {∀x∈S ∃y∈S p(x, y)}") == parse_form(PAIR_FORMS[2])


def test_selector_levels_must_be_ordered():
    with pytest.raises(SetDefError):
        parse_system("T[v] = {image f(z); z in B[v], v in A}").validate({"A", "B"})
    with pytest.raises(SetDefError):
        parse_system("S = {all x in S: p(x)}\nS = {all x in S: q(x)}").validate()
    with pytest.raises(SetDefError):
        parse_system("S = {all x in R: p(x)}").validate()


# --- evaluation -----------------------------------------------------------------------------

def test_formula_values():
    u = closed(["p(q1, q1)"], ["q1", "q2"])
    assert eval_formula(parse_formula("all x in S: all y in S: p(x, y)"), {"S": frozenset({"q1"})}, u) is True
    assert eval_formula(parse_formula("ex x in S: p(x, x)"), {"S": frozenset()}, u) is False
    assert eval_formula(parse_formula("all x in S: p(x, x)"), {"S": frozenset()}, u) is True
    strict = Universe(["q1"], StandardInterpretation(diagram={"p(q1)": True}))
    assert eval_formula(parse_formula("r(q1)"), {}, strict) is VOID
    # no short-circuit: a void conjunct poisons a false one
    assert eval_formula(parse_formula("~p(q1) & r(q1)"), {}, strict) is VOID


def test_unresolved_set_name():
    with pytest.raises(SetDefError):
        eval_formula(parse_formula("all x in Missing: p(x)"), {}, closed([], []))


# --- agreement --------------------------------------------------------------------------------

def test_nice_labs():
    inst = load_instance("labs.sdf")
    base = {"Sc": frozenset({"l1", "l2"}), "Lab[l1]": frozenset({"ann", "bob"}),
            "Lab[l2]": frozenset({"cid", "dan"})}
    assert check_agreed({**base, "Nice": frozenset({"Lab[l1]"})}, inst.system, inst.universe).ok
    assert not check_agreed({**base, "Nice": frozenset({"Lab[l1]", "Lab[l2]"})}, inst.system, inst.universe).ok
    assert check_selected({**base, "Nice": frozenset({"Lab[l1]"})}, inst.system, inst.universe).ok
    assert not check_selected({**base, "Nice": frozenset()}, inst.system, inst.universe).ok


def test_enumeration_must_be_present():
    sysm = parse_system("Sc = {l1, l2}")
    rep = check_agreed({}, sysm, closed([], ["l1", "l2"]))
    assert not rep.ok and "missing" in rep.items[0].reason


def test_graph_component():
    inst = load_instance("component.sdf")
    assert check_agreed({"Comp": frozenset({"v1", "v2", "v3"})}, inst.system, inst.universe).ok
    assert not check_agreed({"Comp": frozenset({"v1", "v2", "v3", "v4"})}, inst.system, inst.universe).ok
    assert [f["Comp"] for f in brute_force_variants(inst.system, inst.universe)] == [frozenset({"v1", "v2", "v3"})]


def _reachable(edges, seeds):
    """Plain graph search for the component oracle."""
    seen, stack = set(seeds), list(seeds)
    while stack:
        y = stack.pop()
        for a, b in edges:
            if b == y and a not in seen:
                seen.add(a)
                stack.append(a)
    return frozenset(seen)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_gamma_is_least_fixpoint(n, rnd):
    elems = [f"v{i}" for i in range(n)]
    edges = [(a, b) for a in elems for b in elems if a != b and rnd.random() < 0.3]
    u = closed([f"edge({a}, {b})" for a, b in edges], elems)
    u.given = {"Seed": frozenset({elems[0]})}
    sysm = parse_system("Comp = {base Seed step x from y: edge(x, y)}")
    form = sysm.forms[0]
    fam = {"Seed": u.given["Seed"]}
    comp = gamma_closure(form, {}, fam, u)
    assert comp == _reachable(edges, [elems[0]])
    assert check_agreed({"Comp": comp}, sysm, u).ok
    for x in comp - u.given["Seed"]:
        assert not check_agreed({"Comp": comp - {x}}, sysm, u).ok


def test_image_form_grows_secondary_data():
    text = "[forms]\nT = {image f(z); z in A}\n[sets]\nA = a, b\n[universe]\na, b\n[options]\nclosed_world = true\n"
    inst = parse_instance(text)
    u = inst.universe
    assert check_agreed({"T": frozenset()}, inst.system, u).ok
    before = list(u.data)
    added = apply_delta(inst.system, {}, u)
    assert added == ["f(a)", "f(b)"] and u.data[:2] == before
    assert u.provenance["f(a)"] == "T"
    assert check_agreed({"T": frozenset({"f(a)", "f(b)"})}, inst.system, u).ok
    assert apply_delta(inst.system, {}, u) == [] and len(u.data) == 4


def test_parameterized_names():
    text = ("[forms]\nS[v] = {all x in S[v]: q(x, v); v in A}\n[sets]\nA = a, b\n[universe]\na, b\n"
            "[diagram]\nq(a, a)\nq(b, a)\nq(b, b)\n[options]\nclosed_world = true\n")
    inst = parse_instance(text)
    (fam,) = brute_force_variants(inst.system, inst.universe)
    assert fam == {"S[a]": frozenset({"a", "b"}), "S[b]": frozenset({"b"})}


# --- selection ----------------------------------------------------------------------------------

def test_printed_clique_diagram_gives_q1():
    inst = load_instance("cliques_printed.sdf")
    sets = oracle_sets(inst.system.forms[0], inst.universe)
    assert frozenset({"q1"}) in sets
    assert frozenset({"q2", "q3"}) not in sets


def test_fixed_clique_diagram_adds_pair():
    inst = load_instance("cliques_fixed.sdf")
    assert oracle_sets(inst.system.forms[0], inst.universe) == [frozenset({"q1"}), frozenset({"q2", "q3"})]


def test_selected_sets_nested():
    inst = load_instance("supporters.sdf")
    sel = oracle_sets(inst.system.forms[0], inst.universe)
    ab, abcd = frozenset("ab"), frozenset("abcd")
    assert ab in sel and abcd in sel and ab < abcd
    assert check_selected({"S": ab}, inst.system, inst.universe).ok
    assert oracle_sets(inst.system.forms[0], inst.universe, "maximal") == [abcd]


def test_non_maximal_gets_witness():
    inst = load_instance("cliques_fixed.sdf")
    rep = check_selected({"S": frozenset({"q2"})}, inst.system, inst.universe)
    assert not rep.ok and rep.witness == ("S", "q3")
    rep = check_selected({"S": frozenset()}, inst.system, inst.universe)
    assert not rep.ok and rep.witness is not None


def test_two_forms_no_family_reaches_per_name_maximum():
    inst = load_instance("two_forms.sdf")
    agreed = agreed_families(inst.system, inst.universe)
    assert len(agreed) > 2
    p_set = frozenset("abcd")
    assert not any(f["S1"] == p_set for f in agreed)
    assert not any(f["S2"] == p_set and f["S1"] == p_set for f in agreed)


def test_cap_exceeded():
    with pytest.raises(CapExceeded):
        brute_force_variants(parse_system(PAIR_FORMS[1]), closed([], range(13)))


def test_selector_on_property_set_not_enumerable():
    sysm = parse_system("S = {all x in S: p(x)}\nT[v] = {all x in T[v]: q(x, v); v in S}")
    with pytest.raises(SetDefError):
        agreed_families(sysm, closed([], ["a"]))


# --- pair solvers ------------------------------------------------------------------------------

def test_kind2_on_supporters():
    inst = load_instance("supporters.sdf")
    assert solve_120(inst.system.forms[0], inst.universe) == [frozenset("abcd")]


def test_kind4_all_false_has_no_variant():
    u = closed([], ["a", "b", "c"])
    assert solve_120(parse_form(PAIR_FORMS[4]), u) == []
    assert oracle_sets(parse_form(PAIR_FORMS[4]), u) == []


def test_kind1_on_printed_cliques():
    inst = load_instance("cliques_printed.sdf")
    for s in solve_120(inst.system.forms[0], inst.universe):
        assert check_selected({"S": s}, inst.system, inst.universe).ok


def test_pair_solver_rejects_other_shapes():
    with pytest.raises(SetDefError):
        solve_120(parse_form("S = {all x in S: p(x)}"), closed([], ["a"]))
    with pytest.raises(SetDefError):
        solve_120(parse_form("S = {all x in T: all y in S: p(x, y)}"), closed([], ["a"]))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5), st.integers(1, 4), st.randoms(use_true_random=False))
def test_pair_solvers_against_oracle(n, kind, rnd):
    u = random_pair_universe(rnd, n, density=rnd.choice([0.2, 0.4, 0.6]))
    form = parse_form(PAIR_FORMS[kind])
    sysm = FormSystem([form])
    out = solve_120(form, u)
    for s in out:
        assert check_selected({"S": s}, sysm, u).ok
    selected = oracle_sets(form, u)
    if kind == 2:
        assert out == oracle_sets(form, u, "maximal")
        assert out[0] in selected
    if kind == 4:
        assert out == selected
    if kind in (1, 3):
        assert set(out) <= set(selected)


# --- three quantifiers ---------------------------------------------------------------------------

def test_unique_witness_chain():
    inst = load_instance("witness_chain.sdf")
    res = solve_130(inst.system.forms[0], inst.universe)
    assert res.verdict == "unique-witness"
    assert res.variants == oracle_sets(inst.system.forms[0], inst.universe) == [frozenset("abc")]


def test_separable_and_case_restricts_universe():
    rng = random.Random(5)
    elems = [f"u{i}" for i in range(6)]
    half = set(elems[:3])
    r_atoms = {(x, y) for x in elems for y in elems if rng.random() < 0.4}
    atoms = [f"r({x}, {y})" for x, y in r_atoms] + [f"t({z})" for z in half]
    u = closed(atoms, elems)
    form = parse_form("S = {all x in S: ex y in S: all z in S: r(x, y) & t(z)}")
    hints = {"separable": (lambda x, y: (x, y) in r_atoms, lambda z: z in half, "&")}
    res = solve_130(form, u, hints)
    assert res.verdict == "separable"
    restricted = closed(atoms, sorted(half))
    assert res.variants == solve_120(parse_form("S = {all x in S: ex y in S: r(x, y)}"), restricted)
    assert res.variants == oracle_sets(form, u, "maximal")


def test_fallback_verdict():
    u = closed(["p(a, b, c)"], ["a", "b", "c"])
    form = parse_form("S = {ex x in S: ex y in S: ex z in S: p(x, y, z)}")
    res = solve_130(form, u)
    assert res.verdict == "fallback"
    assert res.variants == oracle_sets(form, u)


def test_skolem_hint():
    elems = ["a", "b", "c", "d"]
    f = {(x, y): max(x, y) for x in elems for y in elems}
    atoms = [f"p({x}, {y}, {z})" for (x, y), z in f.items()] + ["p(a, a, b)"]
    u = closed(atoms, elems)
    form = parse_form("S = {all x in S: all y in S: ex z in S: p(x, y, z)}")
    res = solve_130(form, u, {"skolem": lambda x, y: f[(x, y)]})
    assert res.verdict == "skolem"
    assert set(res.variants) <= set(oracle_sets(form, u))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.sampled_from(["all", "ex"]), st.sampled_from(["all", "ex"]),
       st.sampled_from(["all", "ex"]), st.randoms(use_true_random=False))
def test_three_quantifier_outputs_are_selected(n, q1, q2, q3, rnd):
    elems = [f"e{i}" for i in range(n)]
    atoms = [f"p({x}, {y}, {z})" for x, y, z in itertools.product(elems, repeat=3) if rnd.random() < 0.4]
    u = closed(atoms, elems)
    form = parse_form(f"S = {{{q1} x in S: {q2} y in S: {q3} z in S: p(x, y, z)}}")
    res = solve_130(form, u)
    assert res.verdict != "inapplicable"
    for s in res.variants:
        assert check_selected({"S": s}, FormSystem([form]), u).ok


# --- boolean encoding ----------------------------------------------------------------------------

def _keyed(fams):
    return sorted(sorted((k, tuple(sorted(map(str, v)))) for k, v in f.items()) for f in fams)


@pytest.mark.parametrize("name", ["cliques_printed.sdf", "cliques_fixed.sdf", "supporters.sdf", "labs.sdf",
                                  "witness_chain.sdf", "two_forms.sdf"])
def test_encoding_matches_agreed(name):
    inst = load_instance(name)
    cs = to_boolean_constraints(inst.system, inst.universe)
    assert _keyed(cs.solutions()) == _keyed(agreed_families(inst.system, inst.universe, cap=20))
    assert _keyed(cs.selected()) == _keyed(brute_force_variants(inst.system, inst.universe, cap=20))


def test_encoding_empty_universe():
    cs = to_boolean_constraints(parse_system(PAIR_FORMS[1]), closed([], []))
    assert cs.variables == [] and cs.solutions() == [{"S": frozenset()}]


def test_encoding_rejects_induction():
    inst = load_instance("component.sdf")
    with pytest.raises(SetDefError):
        to_boolean_constraints(inst.system, inst.universe)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 4), st.integers(1, 4), st.booleans(), st.randoms(use_true_random=False))
def test_encoding_equivalence_random(n, kind, strict, rnd):
    elems = [f"e{i}" for i in range(n)]
    diagram = {}
    for x, y in itertools.product(elems, repeat=2):
        roll = rnd.random()
        if roll < 0.35:
            diagram[f"p({x}, {y})"] = True
        elif roll < 0.7 or not strict:
            diagram[f"p({x}, {y})"] = False
    u = Universe(elems, StandardInterpretation(diagram=diagram, closed_world=not strict))
    sysm = parse_system(PAIR_FORMS[kind])
    cs = to_boolean_constraints(sysm, u)
    assert _keyed(cs.solutions()) == _keyed(agreed_families(sysm, u))


def test_horn_export_shape_and_model():
    inst = load_instance("supporters.sdf")
    form = inst.system.forms[0]
    clauses = horn_export(form, inst.universe)
    assert all(sum(1 for lit in c.literals() if not lit.startswith("~")) <= 1 for c in clauses)
    assert horn_greatest(form, inst.universe) == solve_120(form, inst.universe)[0]
    with pytest.raises(SetDefError):
        horn_export(parse_form(PAIR_FORMS[1]), inst.universe)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 6), st.randoms(use_true_random=False))
def test_horn_model_is_complement_of_removal(n, rnd):
    u = random_pair_universe(rnd, n, 0.3)
    form = parse_form(PAIR_FORMS[2])
    assert [horn_greatest(form, u)] == solve_120(form, u) == solve_pair(
        2, u.data, lambda x, y: u.interp.test("p", (x, y)))


# --- concrete interpretations ------------------------------------------------------------------------

def test_concrete_interpretation_numbers():
    u = Universe([1, 2, 3, 4, 6], ConcreteInterpretation(predicates={"divides": lambda a, b: b % a == 0}))
    form = parse_form("S = {all x in S: all y in S: divides(x, y) | divides(y, x)}")
    out = solve_120(form, u)
    assert frozenset({1, 2, 4}) in out and frozenset({1, 3, 6}) in out
    assert set(out) <= set(oracle_sets(form, u))


# --- dictionaries ---------------------------------------------------------------------------------------

def test_hierarchy_names_grid():
    D, B = Dictionary.of("D", ["IT", "HR"]), Dictionary.of("B", ["USA", "UK", "FR"])
    h = hierarchy("P", [D, B], {"Person1": ("IT", "USA"), "Person2": ("HR", "UK")})
    assert len(h.names()) == 6 and h.names()[0] == "P(IT,USA)"
    assert h[("IT", "USA")].genesis["Person1"] == {"USA in B", "IT in D(USA)"}
    assert list(h.collapse(0)[("UK",)]) == ["Person2"]


def test_union_with_itself_keeps_genesis():
    a = Dictionary.of("A", [1, 2, 3])
    u = dictionary_op("union", a, a)
    assert u.elements == a.elements and u.genesis == a.genesis and u.name == "A"


def test_set_operations_merge_genesis():
    a, b = Dictionary.of("A", [1, 2, 3]), Dictionary.of("B", [2, 3, 4])
    assert dictionary_op("union", a, b).genesis[2] == {"A", "B"}
    assert dictionary_op("intersection", a, b).elements == [2, 3]
    assert dictionary_op("difference", a, b).elements == [1]
    prod = dictionary_op("product", a, b)
    assert len(prod) == 9 and prod.genesis[(1, 4)] == {"A", "B"}
    with pytest.raises(SetDefError):
        dictionary_op("union", a, [1])
    with pytest.raises(SetDefError):
        dictionary_op("power", a, b)


def test_flatten_sections_headed_by_department():
    D, B = Dictionary.of("D", ["IT", "HR"]), Dictionary.of("B", ["USA", "UK"])
    h = hierarchy("P", [D, B], {"Ann": ("IT", "USA"), "Bo": ("IT", "UK"), "Cy": ("HR", "UK")})
    secs = flatten(h, 0)
    assert [s.header for s in secs] == ["IT", "HR"]
    assert [v for v, _ in secs[0].items] == ["Ann", "Bo"]
    assert secs[0].header_genesis == {"D(B)"}
    text = render_sections(secs)
    assert text.splitlines()[0].startswith("IT")


def test_if_clause_filters_maps():
    system = parse_system("A = {a, b}\nT[v] = {image f(v); v in A; if p(v)}")
    form = system.forms[1]
    assert str(parse_form(str(form))) == str(form)
    inst = parse_instance("[forms]\nA = {a, b}\nT = {image f(v); v in A; if p(v)}\n[diagram]\np(a)\n")
    fam = {"A": frozenset({"a", "b"})}
    assert apply_delta(inst.system, fam, inst.universe) == ["f(a)"]

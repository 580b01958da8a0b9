import json
import math
import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import perm
from oracles import closure, invariant_block_systems
from twogen.groups import (
    VERDICTS,
    NotTransitiveError,
    classify,
    contains_alternating,
    group_order,
    is_primitive,
    is_transitive,
    minimal_block_system,
    order_lower_bound,
    orbits,
)
from twogen.perm import Permutation, uniform_random


def perms_of(n):
    return st.permutations(list(range(n))).map(tuple)


# --- worked examples -------------------------------------------------------


def test_orbits_of_disjoint_cycles():
    g = perm("(1 2)(3 4 5)", 6)
    assert orbits([g]) == [[0, 1], [2, 3, 4], [5]]
    assert not is_transitive([g])


def test_orbits_empty_generating_set():
    assert orbits([], 3) == [[0], [1], [2]]
    with pytest.raises(ValueError):
        orbits([])


def test_generators_must_share_degree():
    with pytest.raises(ValueError):
        group_order([(1, 0), (0, 2, 1)])


def test_s3_order_six():
    assert group_order([perm("(1 2 3)"), perm("(1 2)", 3)]) == 6


def test_trivial_group():
    assert group_order([perm("()", 4)]) == 1
    assert group_order([], 5) == 1


def test_s5_from_five_cycle_and_transposition():
    assert group_order([perm("(1 2 3 4 5)"), perm("(1 2)", 5)]) == 120


def test_dihedral_square_is_imprimitive():
    r, s = perm("(1 2 3 4)"), perm("(1 3)", 4)
    assert group_order([r, s]) == 8
    ok, blocks = is_primitive([r, s])
    assert not ok and blocks == [[0, 2], [1, 3]]
    c = classify(r, s)
    assert c.verdict == "transitive-imprimitive"
    assert c.order == 8


def test_is_primitive_requires_transitivity():
    with pytest.raises(NotTransitiveError):
        is_primitive([perm("(1 2)", 3)])


def test_frobenius_20_is_primitive_proper():
    # AGL(1, 5): x -> x + 1 and x -> 2x on Z/5
    t = Permutation([(i + 1) % 5 for i in range(5)])
    m = Permutation([(2 * i) % 5 for i in range(5)])
    c = classify(t, m)
    assert c.verdict == "primitive-proper" and c.order == 20


def test_alternating_vs_symmetric():
    a = classify(perm("(1 2 3 4 5)"), perm("(1 2 3)", 5))
    assert a.verdict == "alternating" and a.order == 60
    s = classify(perm("(1 2 3 4 5)"), perm("(1 2)", 5))
    assert s.verdict == "symmetric" and s.contains_alternating


def test_degree_two_trivial_group_counts_as_alternating():
    c = classify(perm("()", 2), perm("()", 2))
    assert c.order == 1 and c.verdict == "alternating"


def test_classification_json_schema():
    c = classify(perm("(1 2 3 4 5)"), perm("(1 2)", 5))
    d = json.loads(c.to_json())
    assert d == {"n": 5, "transitive": True, "primitive": True, "order": "120", "verdict": "symmetric"}


def test_order_serialised_as_string_for_large_degree():
    n = 30
    c = classify(Permutation(list(range(1, n)) + [0]), perm("(1 2)", n))
    assert c.verdict == "symmetric"
    assert json.loads(c.to_json())["order"] == str(math.factorial(n))


def test_intransitive_large_degree_order():
    # S_20 x S_20 acting on two halves
    n = 40
    a = Permutation(list(range(1, 20)) + [0] + list(range(21, 40)) + [20])
    b = perm("(1 2)(21 22)", n)
    c = perm("(1 2)", n)
    assert group_order([a, b, c]) == math.factorial(20) ** 2
    # moving both halves together gives only the diagonal copy of S_20
    assert group_order([a, b]) == math.factorial(20)
    # 20-cycle on one half times a transposition on the other: only even elements
    g = Permutation(list(range(1, 20)) + [0] + [21, 20] + list(range(22, 40)))
    h = Permutation([1, 0] + list(range(2, 20)) + list(range(21, 40)) + [20])
    for method in ("auto", "deterministic"):
        assert group_order([g, h], method=method) == math.factorial(20) ** 2 // 2


def test_jordan_route_matches_deterministic():
    rnd = random.Random(3)
    for n in (8, 9, 10, 11, 12):
        for _ in range(4):
            x, y = uniform_random(n, rnd), uniform_random(n, rnd)
            assert group_order([x, y]) == group_order([x, y], method="deterministic")


def test_imprimitive_wreath_product_order():
    # S_3 wr S_2 on 6 points, order 72
    gens = [perm("(1 2 3)", 6), perm("(1 2)", 6), perm("(1 4)(2 5)(3 6)")]
    assert group_order(gens) == 72
    assert group_order(gens, method="deterministic") == 72
    assert not contains_alternating(gens)


def test_method_and_degree_limits():
    g = perm("(1 2 3)")
    with pytest.raises(ValueError):
        group_order([g], method="magic")
    with pytest.raises(ValueError):
        group_order([g], max_degree=2)


def test_order_lower_bound_never_exceeds_order():
    rnd = random.Random(5)
    for _ in range(20):
        x, y = uniform_random(9, rnd), uniform_random(9, rnd)
        assert order_lower_bound([x, y]) <= group_order([x, y])


# --- brute-force cross checks ---------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(perms_of(n), perms_of(n))))
def test_order_matches_closure(pair):
    x, y = pair
    n = len(x)
    assert group_order([x, y]) == len(closure([x, y], n))
    assert group_order([x, y], method="deterministic") == len(closure([x, y], n))


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 6).flatmap(lambda n: st.tuples(perms_of(n), perms_of(n))))
def test_primitivity_matches_brute_force(pair):
    x, y = pair
    n = len(x)
    if not is_transitive([x, y]):
        return
    systems = invariant_block_systems([x, y], n)
    ok, blocks = is_primitive([x, y])
    assert ok == (not systems)
    if blocks is not None:
        assert blocks in systems
        assert minimal_block_system([x, y]) == blocks


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 9).flatmap(lambda n: st.tuples(perms_of(n), perms_of(n), perms_of(n))))
def test_verdict_invariant_under_conjugation(triple):
    x, y, g = (Permutation(t) for t in triple)
    a = classify(x, y)
    b = classify(~g * x * g, ~g * y * g)
    assert a.verdict == b.verdict and a.order == b.order


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.tuples(perms_of(n), perms_of(n))))
def test_order_divides_factorial_and_parity(pair):
    x, y = (Permutation(t) for t in pair)
    n = x.degree
    order = group_order([x, y])
    assert math.factorial(n) % order == 0
    # even generators cannot generate all of S_n
    c = classify(x, y)
    assert c.verdict in VERDICTS
    if c.verdict == "symmetric":
        assert not (x.is_even() and y.is_even())
    if x.is_even() and y.is_even() and n >= 2:
        assert c.verdict != "symmetric"
    # swapping the generators cannot change the group
    assert group_order([y, x]) == order


def test_every_pair_in_s4_agrees_with_closure():
    ps = [tuple(p) for p in permutations(range(4))]
    for x in ps:
        for y in ps:
            c = classify(x, y)
            size = len(closure([x, y], 4))
            assert c.order == size
            assert c.contains_alternating == (2 * size >= 24)

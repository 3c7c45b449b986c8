import itertools
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ordlab.errors import DomainError
from ordlab.frostman import (DyadicTree, FrostmanSolution, brute_force_cover_weight,
                             enumerate_covers, frostman_verify, instance_dict,
                             is_covering_antichain, load_instance, max_frostman_mass,
                             min_cover_weight, random_tree)
from ordlab.paths import make_rng
from ordlab.scaling import GaugeSpec


@st.composite
def trees(draw, max_depth=7, arity=st.sampled_from([2, 3])):
    a = draw(arity)
    depth = draw(st.integers(1, max_depth if a == 2 else 4))
    leaves = a ** depth
    marked = draw(st.sets(st.integers(0, leaves - 1), min_size=1, max_size=min(leaves, 40)))
    return DyadicTree(depth, frozenset(marked), a)


gauges = st.sampled_from([0.3, 0.5, 1.0, 1.5, 2.5]).map(GaugeSpec.dim)


def full(depth):
    return DyadicTree(depth, frozenset(range(2 ** depth)))


def test_tree_validation():
    with pytest.raises(DomainError):
        DyadicTree(3, frozenset())
    with pytest.raises(DomainError):
        DyadicTree(2, frozenset({4}))
    with pytest.raises(DomainError):
        DyadicTree(0, frozenset({0}))
    t = DyadicTree(3, frozenset({5}))
    assert t.node_label((3, 5)) == "root/1/0/1" and t.node_label((0, 0)) == "root"


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_single_leaf(alpha):
    t = DyadicTree(5, frozenset({13}))
    g = GaugeSpec.dim(alpha)
    assert min_cover_weight(t, g).weight == pytest.approx(2 ** (-5 * alpha))
    sol = max_frostman_mass(t, g)
    assert sol.total_mass == pytest.approx(2 ** (-5 * alpha))
    assert list(sol.leaf_masses) == [13]


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_full_tree_examples(depth):
    t = full(depth)
    low = min_cover_weight(t, GaugeSpec.dim(0.5))
    assert low.weight == pytest.approx(1.0) and low.antichain == [(0, 0)]
    high = min_cover_weight(t, GaugeSpec.dim(1.5))
    assert high.weight == pytest.approx(2 ** (depth * (1 - 1.5)))
    assert high.antichain == [(depth, i) for i in range(2 ** depth)]
    for alpha in (0.5, 1.0, 1.5):
        g = GaugeSpec.dim(alpha)
        assert brute_force_cover_weight(t, g) == pytest.approx(min_cover_weight(t, g).weight, abs=1e-15)


def test_random_tree_duality_example():
    t = random_tree(10, 0.2, make_rng(0, 0))
    g = GaugeSpec.dim(0.7)
    assert abs(max_frostman_mass(t, g).total_mass - min_cover_weight(t, g).weight) <= 1e-12


def _all_antichains(tree):
    nodes = [(k, i) for k in range(tree.depth + 1) for i in range(tree.arity ** k)]
    for r in range(1, len(nodes) + 1):
        for combo in itertools.combinations(nodes, r):
            if is_covering_antichain(tree, combo):
                yield combo


@given(trees(max_depth=3, arity=st.just(2)), gauges)
def test_enumeration_oracle_over_all_node_subsets(tree, g):
    # independent of the recursive enumerator: scan every subset of cells
    h = [math.exp(g(tree.side(k))) for k in range(tree.depth + 1)]
    best = min(math.fsum(h[k] for k, _ in c) for c in _all_antichains(tree))
    assert min_cover_weight(tree, g).weight == pytest.approx(best, rel=1e-12)


@given(trees(max_depth=4), gauges)
def test_dp_matches_brute_force(tree, g):
    assert min_cover_weight(tree, g).weight == pytest.approx(brute_force_cover_weight(tree, g),
                                                             rel=1e-12)


@given(trees(), gauges)
def test_strong_duality(tree, g):
    sol = max_frostman_mass(tree, g)
    cover = min_cover_weight(tree, g)
    assert abs(sol.total_mass - cover.weight) <= 1e-12 * max(1.0, cover.weight)
    assert is_covering_antichain(tree, cover.antichain)
    rep = frostman_verify(sol, tree, g)
    assert rep.passed, rep.messages


@given(trees(), gauges, st.integers(0, 10 ** 6))
def test_more_marks_never_lose_mass(tree, g, extra):
    bigger = DyadicTree(tree.depth, tree.marked | {extra % tree.arity ** tree.depth}, tree.arity)
    assert max_frostman_mass(bigger, g).total_mass >= max_frostman_mass(tree, g).total_mass - 1e-12


@given(trees(), st.floats(0.2, 2.0), st.floats(0.01, 1.0))
def test_larger_gauge_never_loses_mass(tree, alpha, d):
    # r^(alpha - d) >= r^alpha on (0, 1]
    small = max_frostman_mass(tree, GaugeSpec.dim(alpha)).total_mass
    large = max_frostman_mass(tree, GaugeSpec.dim(alpha - d if alpha - d > 0 else alpha)).total_mass
    assert large >= small - 1e-12


@given(trees(), gauges, st.floats(0.01, 100))
def test_gauge_scaling(tree, g, c):
    a = max_frostman_mass(tree, g).total_mass
    b = max_frostman_mass(tree, g.scaled(c)).total_mass
    assert b == pytest.approx(c * a, rel=1e-12)


def test_verify_flags_capacity_violation():
    t = DyadicTree(2, frozenset({0, 1}))
    g = GaugeSpec.dim(1.0)
    sol = max_frostman_mass(t, g)
    bad = FrostmanSolution(sol.total_mass + 1e-6,
                           {0: sol.leaf_masses[0] + 1e-6, 1: sol.leaf_masses[1]})
    rep = frostman_verify(bad, t, g)
    assert not rep.passed and not rep.feasible
    assert any(label == "root/0/0" for label, _, _ in rep.violations)


def test_verify_reports_suboptimal():
    t = random_tree(6, 0.4, make_rng(1, 0))
    g = GaugeSpec.dim(0.8)
    sol = max_frostman_mass(t, g)
    half = FrostmanSolution(sol.total_mass / 2, {k: v / 2 for k, v in sol.leaf_masses.items()})
    rep = frostman_verify(half, t, g)
    assert rep.feasible and not rep.optimal and not rep.passed
    assert rep.duality_gap == pytest.approx(sol.total_mass / 2)
    assert any("suboptimal" in m for m in rep.messages)


def test_enumerate_covers_are_antichains():
    t = DyadicTree(3, frozenset({0, 3, 6}))
    covers = list(enumerate_covers(t))
    assert all(is_covering_antichain(t, c) for c in covers)
    assert len({tuple(sorted(c)) for c in covers}) == len(covers)


def test_instance_round_trip(tmp_path):
    t = DyadicTree(4, frozenset({1, 2, 9}), 2)
    g = GaugeSpec.dim(0.6)
    (tmp_path / "tree.json").write_text(json.dumps(instance_dict(t, g)))
    t2, g2 = load_instance(tmp_path / "tree.json")
    assert t2 == t and g2 == g
    sol = max_frostman_mass(t, g)
    assert FrostmanSolution.from_dict(json.loads(json.dumps(sol.to_dict()))) == sol

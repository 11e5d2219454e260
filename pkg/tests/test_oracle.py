import itertools

import pytest

from anchormatch.errors import OracleBoundError
from anchormatch.features import AnchoredStar
from anchormatch.graph import Graph
from anchormatch.oracle import (
    anchored_isomorphic_by_search,
    brute_force_matches,
    is_match,
    permutation_matches,
    star_isomorphic,
)

from conftest import complete_graph, random_instances, triangle


def test_oracles_agree_on_small_instances():
    for g, q, _ in random_instances(30, seed=17, max_vertices=24, sizes=(2, 4)):
        assert brute_force_matches(q, g) == permutation_matches(q, g)


def test_sample_truth(example_graph, example_query):
    truth = brute_force_matches(example_query, example_graph)
    assert len(truth) == 2
    assert all(is_match(example_query, example_graph, m) for m in truth)


def test_counts_on_cliques():
    assert len(brute_force_matches(triangle(), complete_graph(5))) == 60
    assert len(permutation_matches(complete_graph(4), complete_graph(4))) == 24


def test_is_match_rejects_each_violation(example_graph, example_query):
    good = next(iter(brute_force_matches(example_query, example_graph)))
    assert not is_match(example_query, example_graph, good[:-1])
    assert not is_match(example_query, example_graph, (good[0],) * 5)
    wrong_label = (*good[:-1], 5)  # v6 has label D but no edge to v9's image
    assert not is_match(example_query, example_graph, wrong_label)
    assert not is_match(example_query, example_graph, (*good[:-1], 0))


def test_bounds():
    big = Graph.from_edges([0] * 11, [(i, i + 1) for i in range(10)], 1)
    with pytest.raises(OracleBoundError):
        brute_force_matches(big, big)
    with pytest.raises(OracleBoundError):
        permutation_matches(complete_graph(7), complete_graph(7))


def all_stars(sigma=3, max_leaves=3):
    for c, a in itertools.product(range(sigma), repeat=2):
        for r in range(max_leaves + 1):
            for leaves in itertools.product(range(sigma), repeat=r):
                yield AnchoredStar(c, a, leaves)


def test_canonical_equality_matches_bijection_search():
    stars = list(all_stars())
    by_size: dict[int, list[AnchoredStar]] = {}
    for s in stars:
        by_size.setdefault(s.size, []).append(s)
    for group in by_size.values():
        for a, b in itertools.combinations(group[::3], 2):
            assert star_isomorphic(a, b) == anchored_isomorphic_by_search(a, b)
    assert not anchored_isomorphic_by_search(AnchoredStar(0, 1, (2,)), AnchoredStar(0, 2, (1,)))
    assert anchored_isomorphic_by_search(AnchoredStar(0, 1, (2, 1)), AnchoredStar(0, 1, (1, 2)))

from fractions import Fraction

import pytest

from multicover.generators import GenSpec, generate
from multicover.hypergraph import Hypergraph, InfeasibleInstanceError, degree_profile, is_k_matching, is_multicover
from multicover.matching import (
    capacity_vector,
    five_sixths_applies,
    five_sixths_hypotheses,
    five_sixths_ratio,
    five_sixths_refined_ratio,
    duality_cover,
    edge_order,
    greedy_k_matching,
    is_maximal,
    lemma6_bound,
)
from multicover.oracle import exact_max_k_matching, exact_min_multicover


def test_capacities(h_a, two_loops):
    assert capacity_vector(h_a) == (1, 1, 1)
    assert capacity_vector(two_loops) == (0,)
    assert capacity_vector(h_a.with_demands(h_a.degrees)) == (0, 0, 0)


def test_negative_capacity_names_vertex():
    with pytest.raises(InfeasibleInstanceError, match="v1"):
        capacity_vector(Hypergraph(2, [(0, 1), (1,), (1,)], [2, 2]))


def test_greedy_on_triangle(h_a):
    m = greedy_k_matching(h_a, (1, 1, 1))
    assert m.chosen == (0,)
    assert exact_max_k_matching(h_a, (1, 1, 1)).value == 1
    assert is_maximal(h_a, m)


def test_greedy_extremes(h_a, disjoint):
    assert greedy_k_matching(h_a, (0, 0, 0)).chosen == ()
    assert greedy_k_matching(disjoint, (1,) * 5).chosen == (0, 1, 2)


def test_duality_cover_on_triangle(h_a):
    cover, m = duality_cover(h_a)
    assert m.chosen == (0,)
    assert cover.chosen == (1, 2, 3)
    assert len(cover) == exact_min_multicover(h_a).value
    assert cover.provenance == "duality"


def test_duality_cover_with_zero_capacities(h_a):
    h = h_a.with_demands(h_a.degrees)
    cover, _ = duality_cover(h)
    assert cover.chosen == tuple(range(h.m))


def test_matching_bound_value_on_triangle(h_a):
    bound = lemma6_bound(h_a)
    assert bound.value == 1
    assert bound.r == Fraction(1, 3)
    assert bound.ratio_bound == Fraction(5, 3)
    assert exact_max_k_matching(h_a, capacity_vector(h_a)).value <= bound.value * exact_min_multicover(h_a).value


def test_matching_bound_regular_uniform():
    # 3-regular, 2-uniform (the complete graph on four vertices), b = 2.
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    bound = lemma6_bound(Hypergraph(4, edges, [2] * 4))
    assert bound.value == Fraction(3, 2) - 1


def test_matching_bound_rejects_bad_r(h_a):
    with pytest.raises(ValueError):
        lemma6_bound(h_a, r=0)


def test_edge_orders(h_a):
    assert edge_order(h_a, "input") == [0, 1, 2, 3]
    assert edge_order(h_a, "size") == [0, 1, 2, 3]
    assert sorted(edge_order(h_a, "random", seed=1)) == [0, 1, 2, 3]
    assert edge_order(h_a, "random", seed=1) == edge_order(h_a, "random", seed=1)
    assert edge_order(h_a, [3, 2, 1, 0]) == [3, 2, 1, 0]
    with pytest.raises(ValueError):
        edge_order(h_a, [0, 0, 1, 2])
    with pytest.raises(ValueError):
        edge_order(h_a, "sideways")


def test_five_sixths_gate():
    h = generate(
        GenSpec(
            "near-uniform",
            n=7,
            m=18,
            ell_range=(2, 3),
            b_range=(3, 4),
            constraints={"b_ge_3", "Delta_ge_b_plus_2", "delta_ge_3"},
            seed=5,
        )
    )
    p = degree_profile(h)
    assert five_sixths_applies(p)
    assert five_sixths_ratio(p) == Fraction(5, 6) * p.delta
    assert five_sixths_refined_ratio(p) < five_sixths_ratio(p)
    assert not five_sixths_hypotheses(p, Fraction(3, 4))["epsilon_in_range"]


def test_triangle_fails_gate(h_a):
    hyp = five_sixths_hypotheses(degree_profile(h_a))
    assert not hyp["b_ge_3"] and not hyp["delta_ge_3"]


@pytest.mark.parametrize("seed", range(30))
def test_greedy_guarantee_small(seed):
    h = generate(GenSpec("random", n=6, m=10, ell_range=(1, 4), seed=seed))
    k = capacity_vector(h)
    nu = exact_max_k_matching(h, k).value
    ell = degree_profile(h).ell_max
    for order in ("input", "size", "random"):
        m = greedy_k_matching(h, k, order, seed)
        assert is_k_matching(h, m).ok
        assert is_maximal(h, m)
        assert ell * len(m) >= nu
    cover, m = duality_cover(h)
    assert is_multicover(h, cover).ok
    assert len(cover) == h.m - len(m)

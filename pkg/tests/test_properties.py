"""Randomised invariants over small instances."""

from fractions import Fraction

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from multicover.generators import FAMILIES, GenSpec, generate
from multicover.hypergraph import Hypergraph, MatchingSolution, complement, degree_profile, is_k_matching, is_multicover, validate
from multicover.instance_io import parse_json, parse_text, to_json, to_text
from multicover.lp import build_relaxation, solve_relaxation, verify_lp_optimality
from multicover.matching import capacity_vector, greedy_k_matching, lemma6_bound
from multicover.oracle import exact_max_k_matching, exact_min_multicover
from multicover.rounding import check_threshold_structure, threshold_cover

SETTINGS = settings(max_examples=150, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def instances(draw, max_n=5, max_m=8):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    edges = [draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n)) for _ in range(m)]
    deg = [sum(1 for e in edges if v in e) for v in range(n)]
    assume(min(deg) >= 2)
    demands = [draw(st.integers(2, d)) for d in deg]
    return Hypergraph(n, edges, demands)


@SETTINGS
@given(instances(), st.data())
def test_cover_monotone(h, data):
    base = data.draw(st.sets(st.integers(0, h.m - 1)))
    extra = data.draw(st.sets(st.integers(0, h.m - 1)))
    if is_multicover(h, base).ok:
        assert is_multicover(h, base | extra).ok


@SETTINGS
@given(instances(), st.data())
def test_matching_iff_complement_covers(h, data):
    k = capacity_vector(h)
    subset = data.draw(st.sets(st.integers(0, h.m - 1)))
    assert is_k_matching(h, MatchingSolution(subset, k)).ok == is_multicover(h, complement(h, subset)).ok


@SETTINGS
@given(instances())
def test_double_counting(h):
    p = degree_profile(h)
    total = sum(len(e) for e in h.edges)
    assert h.n * p.delta_bar == total == h.m * p.ell_bar


@SETTINGS
@given(instances())
def test_cardinality_duality(h):
    nu = exact_max_k_matching(h, capacity_vector(h)).value
    assert h.m - nu == exact_min_multicover(h).value


@SETTINGS
@given(instances())
def test_lp_sandwich_and_threshold_cover(h):
    sol = solve_relaxation(h, "rational")
    opt = exact_min_multicover(h).value
    assert max(h.demands) <= sol.objective <= opt <= h.m
    assert verify_lp_optimality(build_relaxation(h), sol)
    assert check_threshold_structure(h, sol.x).ok
    cover = threshold_cover(h, sol)
    assert is_multicover(h, cover).ok
    delta = degree_profile(h).delta
    assert len(cover) <= delta * opt
    if delta > 1:
        assert len(cover) < delta * opt


@SETTINGS
@given(instances(), st.data())
def test_greedy_matching_guarantee(h, data):
    k = tuple(data.draw(st.lists(st.integers(0, 3), min_size=h.n, max_size=h.n)))
    m = greedy_k_matching(h, k, "random", data.draw(st.integers(0, 2**32)))
    assert is_k_matching(h, m).ok
    nu = exact_max_k_matching(h, k).value
    ell = degree_profile(h).ell_max
    assert ell * len(m) >= nu
    assert (ell + 1) * (len(m) + 1) > nu


@SETTINGS
@given(instances())
def test_matching_bound_holds(h):
    nu = exact_max_k_matching(h, capacity_vector(h)).value
    opt = exact_min_multicover(h).value
    bound = lemma6_bound(h)
    assert nu <= bound.value * opt
    assert bound.value >= 0


@SETTINGS
@given(instances())
def test_formats_round_trip(h):
    assert parse_text(to_text(h)) == h
    assert parse_json(to_json(h)) == h


specs = st.builds(
    lambda family, n, m, lo, width, blo, bwidth, seed: GenSpec(
        family, n=n, m=m, ell_range=(min(lo, n), min(lo + width, n)), b_range=(blo, blo + bwidth), seed=seed
    ),
    st.sampled_from([f for f in FAMILIES if f != "flat"]),
    st.integers(2, 9),
    st.integers(1, 15),
    st.integers(1, 3),
    st.integers(0, 2),
    st.integers(2, 3),
    st.integers(0, 2),
    st.integers(0, 2**63),
)


@settings(max_examples=80, deadline=None, derandomize=True)
@given(specs)
def test_generator_valid_and_reproducible(spec):
    h = generate(spec)
    assert validate(h).ok
    assert to_text(generate(spec)) == to_text(h)
    if spec.family == "near-uniform":
        p = degree_profile(h)
        assert Fraction(p.ell_max) <= (1 + spec.epsilon) * p.ell_bar

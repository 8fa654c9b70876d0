import json
from fractions import Fraction

import pytest

from multicover.generators import GenerationError, GenSpec, generate, generate_corpus, generate_flat, write_corpus
from multicover.hypergraph import degree_profile, validate
from multicover.instance_io import list_corpus, read_instance, to_text
from multicover.matching import five_sixths_hypotheses
from multicover.rounding import RoundingParams, make_partition, point_is_feasible, randomized_trigger


def test_uniform_family_meets_near_uniform_condition_with_zero_epsilon():
    h = generate(GenSpec("uniform", n=9, m=12, ell_range=(3, 3), b_range=(2, 2), seed=42))
    p = degree_profile(h)
    assert p.ell_bar == p.ell_max == 3
    assert five_sixths_hypotheses(p, Fraction(0))["near_uniform"]


def test_same_seed_same_bytes():
    spec = GenSpec("uniform", n=9, m=12, ell_range=(3, 3), b_range=(2, 2), seed=42)
    assert to_text(generate(spec)) == to_text(generate(spec))
    assert to_text(generate(spec)) != to_text(generate(GenSpec("uniform", n=9, m=12, ell_range=(3, 3), b_range=(2, 2), seed=43)))


@pytest.mark.parametrize("seed", range(20))
def test_near_uniform_condition_is_exact(seed):
    h = generate(GenSpec("near-uniform", n=8, m=16, ell_range=(2, 4), epsilon=Fraction(1, 2), seed=seed))
    p = degree_profile(h)
    assert Fraction(p.ell_max) <= Fraction(3, 2) * p.ell_bar


@pytest.mark.parametrize("family", ["random", "uniform", "near-uniform"])
def test_generated_instances_validate(family):
    for h in generate_corpus(GenSpec(family, n=7, m=10, ell_range=(2, 4), b_range=(2, 4), seed=100), 15):
        assert validate(h).ok


def test_constraints_hold_or_fail_loudly():
    spec = GenSpec("random", n=8, m=30, ell_range=(2, 4), b_range=(3, 4), constraints={"b_ge_3", "Delta_ge_b_plus_2", "delta_ge_3"}, seed=8)
    p = degree_profile(generate(spec))
    assert p.b_min >= 3 and p.delta_max >= p.b_min + 2 and p.delta >= 3
    impossible = GenSpec("random", n=3, m=3, ell_range=(1, 1), b_range=(2, 2), constraints={"delta_ge_3"}, retries=5)
    with pytest.raises(GenerationError, match="delta < 3"):
        generate(impossible)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="nope"),
        dict(ell_range=(0, 2)),
        dict(ell_range=(3, 2)),
        dict(b_range=(1, 2)),
        dict(n=3, ell_range=(2, 4)),
        dict(constraints={"odd"}),
    ],
)
def test_inconsistent_specs_are_rejected(kwargs):
    with pytest.raises(ValueError):
        GenSpec(**kwargs)


def test_flat_point_triggers_and_is_feasible():
    h, point = generate_flat(GenSpec("flat", n=40, m=1561, ell_range=(1, 40), b_range=(2, 2), seed=0))
    assert all(d == 40 for d in h.degrees)
    params = RoundingParams.for_instance(h)
    assert params.delta == 39
    assert point_is_feasible(h, point.x)
    part = make_partition(point, params)
    assert randomized_trigger(part, point.objective, params)
    assert len(part.c2) > 73 * len(part.c1)


def test_flat_with_delta_one_fails():
    with pytest.raises(GenerationError, match="C3 empty"):
        generate_flat(GenSpec("flat", n=10, m=8, ell_range=(2, 5), b_range=(2, 2)))


def test_flat_that_cannot_trigger_fails():
    with pytest.raises(GenerationError, match="cannot trigger"):
        generate_flat(GenSpec("flat", n=12, m=40, ell_range=(2, 4), b_range=(2, 2)))


def test_write_corpus_with_manifest(tmp_path):
    spec = GenSpec("random", n=6, m=8, seed=7)
    manifest = write_corpus(spec, 4, tmp_path)
    data = json.loads(manifest.read_text())
    assert data["count"] == 4
    assert [e["spec"]["seed"] for e in data["instances"]] == [7, 8, 9, 10]
    paths = list_corpus(tmp_path)
    assert len(paths) == 4
    assert [read_instance(p) for p in paths] == generate_corpus(spec, 4)

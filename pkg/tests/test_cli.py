import csv
import json
from fractions import Fraction

import pytest

from multicover import cli
from multicover.bench import CSV_COLUMNS, run_bench, solve_instance
from multicover.generators import GenSpec, generate, write_corpus
from multicover.instance_io import read_instance, write_instance

GATED = GenSpec(
    "near-uniform",
    n=7,
    m=16,
    ell_range=(2, 3),
    b_range=(3, 4),
    constraints={"b_ge_3", "Delta_ge_b_plus_2", "delta_ge_3"},
    seed=11,
)


@pytest.fixture
def h_a_file(tmp_path, h_a):
    return str(write_instance(h_a, tmp_path / "H_A")[0])


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_duality(capsys, h_a_file):
    code, out, _ = run(capsys, "--format", "json", "solve", h_a_file, "--algo", "duality")
    report = json.loads(out)
    assert code == 0
    assert report["size"] == 3 and report["ratio_opt"] == 1.0
    assert report["cover"] == [2, 3, 4]


def test_solve_threshold(capsys, h_a_file):
    code, out, _ = run(capsys, "solve", h_a_file, "--algo", "threshold", "--format", "json")
    report = json.loads(out)
    assert code == 0
    assert report["size"] == 4
    assert report["ratio_opt"] == pytest.approx(4 / 3)
    assert report["bound_ratio"] * report["opt"] == 6
    assert report["bound_satisfied"] is True


def test_solve_text_output(capsys, h_a_file):
    code, out, _ = run(capsys, "solve", h_a_file, "--algo", "alg1")
    assert code == 0
    fields = dict(line.split(None, 1) for line in out.splitlines() if len(line.split(None, 1)) == 2)
    assert fields["size"] == "4" and fields["cover"] == "1 2 3 4"


def test_solve_infeasible_names_vertex(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n2 2\n1 2\n1\n")
    code, _, err = run(capsys, "solve", str(p), "--algo", "alg1")
    assert code == 3
    assert "v2" in err


def test_solve_parse_and_usage_errors(capsys, tmp_path):
    p = tmp_path / "junk.txt"
    p.write_text("hello\n")
    assert run(capsys, "solve", str(p))[0] == 2
    assert run(capsys, "solve", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "solve", str(p), "--algo", "magic")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "--help")[0] == 0


def test_solve_exact_timeout(capsys, tmp_path):
    h = generate(GenSpec("random", n=14, m=40, ell_range=(2, 5), b_range=(2, 4), seed=9))
    path = write_instance(h, tmp_path / "big")[0]
    code, out, err = run(capsys, "--format", "json", "solve", str(path), "--algo", "exact", "--budget", "3")
    assert code == 5
    assert json.loads(out)["opt_timed_out"] is True


def test_dump_lp_and_out(capsys, tmp_path, h_a_file):
    lp, out = tmp_path / "m.lp", tmp_path / "r.json"
    assert run(capsys, "solve", h_a_file, "--algo", "threshold", "--dump-lp", str(lp), "--out", str(out))[0] == 0
    assert "Subject To" in lp.read_text()
    assert json.loads(out.read_text())["size"] == 4


def test_seed_from_environment(capsys, monkeypatch, h_a_file):
    monkeypatch.setenv("MULTICOVER_SEED", "17")
    _, out, _ = run(capsys, "--format", "json", "solve", h_a_file, "--algo", "alg1")
    assert json.loads(out)["seed"] == 17
    _, out, _ = run(capsys, "--format", "json", "solve", h_a_file, "--algo", "alg1", "--seed", "3")
    assert json.loads(out)["seed"] == 3


def test_gen_writes_corpus(capsys, tmp_path):
    out = tmp_path / "c"
    code, _, _ = run(capsys, "--seed", "5", "gen", "--family", "uniform", "--n", "9", "--m", "12", "--ell", "3", "3", "--count", "3", "--out", str(out))
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["count"] == 3 and manifest["instances"][0]["spec"]["seed"] == 5


def test_gen_flat_writes_points(capsys, tmp_path):
    out = tmp_path / "f"
    argv = ["gen", "--family", "flat", "--n", "60", "--m", "605", "--ell", "2", "12", "--b", "2", "2", "--count", "1", "--out", str(out)]
    assert run(capsys, *argv)[0] == 0
    point = json.loads((out / "flat_000.point.json").read_text())
    assert len(point["x"]) == read_instance(out / "flat_000.txt").m
    assert Fraction(point["x"][0]) == 1


def test_gen_failure_is_reported(capsys, tmp_path):
    code, _, err = run(capsys, "gen", "--family", "flat", "--n", "10", "--m", "8", "--ell", "2", "5", "--b", "2", "2", "--out", str(tmp_path / "x"))
    assert code == 2 and "C3 empty" in err


def test_bench_gated_corpus(capsys, tmp_path):
    corpus = tmp_path / "nu"
    write_corpus(GATED, 50, corpus)
    code, _, _ = run(capsys, "bench", "--corpus", str(corpus), "--algos", "duality,threshold", "--out", str(tmp_path / "r"))
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "r.csv").open()))
    assert len(rows) == 100
    assert list(rows[0]) == CSV_COLUMNS
    duality = [r for r in rows if r["algorithm"] == "duality"]
    assert all(r["bound_name"] == "five-sixths-delta" and r["bound_satisfied"] == "true" for r in duality)
    for r in duality:
        assert int(r["size"]) <= float(r["bound_ratio"]) * int(r["opt"])
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["rows"] == rows
    assert payload["roundtrip_ok"] is True


def test_bench_empty_corpus(capsys, tmp_path):
    (tmp_path / "empty").mkdir()
    code, _, err = run(capsys, "bench", "--corpus", str(tmp_path / "empty"), "--out", str(tmp_path / "e"))
    assert code == 0 and "warning" in err
    assert (tmp_path / "e.csv").read_text().strip() == ",".join(CSV_COLUMNS)


def test_bench_bad_arguments(capsys, tmp_path):
    assert run(capsys, "bench", "--corpus", str(tmp_path / "none"), "--out", str(tmp_path / "o"))[0] == 2
    (tmp_path / "c").mkdir()
    assert run(capsys, "bench", "--corpus", str(tmp_path / "c"), "--algos", "fast", "--out", str(tmp_path / "o"))[0] == 1


def test_bench_records_row_errors(tmp_path, h_a):
    write_instance(h_a, tmp_path / "a")
    (tmp_path / "b.txt").write_text("2 2\n2 2\n1 2\n1\n")
    result = run_bench(tmp_path, ["duality"])
    assert len(result.rows) == 1 and len(result.errors) == 1
    assert result.errors[0]["instance"] == "b"
    assert "InfeasibleInstanceError" in result.errors[0]["error"]


def test_report_numbers_are_recomputable(h_a):
    report, cover = solve_instance(h_a, "duality", "H_A")
    assert report.size == len(cover)
    assert report.ratio_opt == report.size / report.opt >= 1
    assert report.ratio_opt_star == pytest.approx(report.size / 2.5)
    again, _ = solve_instance(h_a, "duality", "H_A")
    assert again.row() == report.row()
    assert "wall_time" not in report.row() and "wall_time" in report.row(timing=True)


def test_verify_suites_pass(capsys, tmp_path):
    code, out, _ = run(capsys, "--format", "json", "verify", "duality", "--max-m", "12", "--count", "20")
    summary = json.loads(out)
    assert code == 0 and summary["passed"]
    names = {p["name"] for p in summary["properties"]}
    assert {"matching_iff_complement_cover", "cardinality_m_minus_nu_eq_opt"} <= names
    code, out, _ = run(capsys, "verify", "lemmas", "--corpus", "random", "--count", "20")
    assert code == 0 and "count_above_inv_delta" in out


def test_verify_on_directory(capsys, tmp_path):
    write_corpus(GATED, 5, tmp_path / "c")
    code, out, _ = run(capsys, "--format", "json", "verify", "ratios", "--corpus", str(tmp_path / "c"), "--out", str(tmp_path / "v.json"))
    assert code == 0
    assert json.loads(out) == json.loads((tmp_path / "v.json").read_text())
    assert json.loads(out)["instances"] == 5


def test_verify_failure_exit_code(capsys, monkeypatch):
    failing = {"suite": "duality", "seed": 0, "instances": 1, "passed": False, "warning": None,
               "properties": [{"name": "x", "passed": False, "checked": 1, "failed": 1, "failures": ["i: d"]}]}
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: failing)
    code, out, _ = run(capsys, "verify", "duality")
    assert code == 4 and "FAIL" in out


def test_verify_unknown_corpus(capsys):
    assert run(capsys, "verify", "lemmas", "--corpus", "/no/such/place")[0] == 2


def test_verify_empty_corpus_warns(capsys, tmp_path):
    (tmp_path / "e").mkdir()
    code, _, err = run(capsys, "verify", "rounding", "--corpus", str(tmp_path / "e"))
    assert code == 0 and "warning" in err

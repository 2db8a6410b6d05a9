import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trust_taea import io
from trust_taea.cli import SWEEP_DEFAULTS, collect_runs, main
from trust_taea.config import RunConfig, dump_config, load_config
from trust_taea.engine import run
from trust_taea.metrics import wilcoxon_rank_sum
from trust_taea.problems import generate_scenario, make_problem
from trust_taea.problems.microgrid import CONSTRAINTS, replay_soc

SMALL = ["--m", "2", "--d", "30", "--pop", "10", "--gens", "10"]


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("TRUST_TAEA_THREADS", "1")


def test_run_writes_three_files_deterministically(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--problem", "LSMOP1", *SMALL, "--seed", "42", "--out", str(a)]) == 0
    assert main(["run", "--problem", "LSMOP1", *SMALL, "--seed", "42", "--out", str(b)]) == 0
    assert sorted(p.name for p in a.iterdir()) == ["front.csv", "manifest.json", "metrics.csv"]
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    assert (a / "front.csv").read_bytes() == (b / "front.csv").read_bytes()
    header = (a / "metrics.csv").read_text().splitlines()[0]
    assert header == "generation,evaluations,hv,igd_plus,trust,phi,maturity,delta,nd_ratio,checkpoint_event"
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 42 and manifest["algorithm"] == "trust_taea"
    assert manifest["config_hash"] == io.config_from_manifest(a / "manifest.json").digest()


def test_run_vanilla_and_x_dump(tmp_path):
    out = tmp_path / "v"
    assert main(["run", "--problem", "LSMOP2", *SMALL, "--algo", "vanilla-taea", "--x-dump", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["algorithm"] == "vanilla_taea"
    header = (out / "front.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["f1", "f2", "x1"] and len(header) == 2 + 30


def test_usage_and_config_errors(tmp_path, capsys):
    assert main(["run", "--problem", "NOPE", *SMALL, "--out", str(tmp_path)]) == 2
    assert main(["run", "--bogus-flag"]) == 2
    assert main(["run", "--problem", "LSMOP1", "--set", "trust.nope=1", "--out", str(tmp_path)]) == 2
    assert main(["stats", str(tmp_path / "missing"), str(tmp_path)]) == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.txt"
    cfg_file.write_text("# comment\nrun.N=12\ntrust.tau_s=0.2\nanchor_probe.p_start=0.3\n")
    cfg = load_config(cfg_file)
    assert cfg.N == 12 and cfg.trust.tau_s == 0.2 and cfg.probe.p_start == 0.3
    out = tmp_path / "o"
    assert main(["run", "--problem", "LSMOP1", "--m", "2", "--d", "30", "--gens", "3", "--config", str(cfg_file),
                 "--pop", "8", "--set", "trust.tau_s=0.15", "--out", str(out)]) == 0
    flat = json.loads((out / "manifest.json").read_text())["config"]
    assert flat["run.N"] == 8 and flat["trust.tau_s"] == 0.15 and flat["anchor_probe.p_start"] == 0.3
    dumped = tmp_path / "dumped.txt"
    dumped.write_text(dump_config(cfg))
    assert load_config(dumped) == cfg


def test_manifest_replay(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--problem", "LSMOP5", *SMALL, "--seed", "7", "--out", str(out)]) == 0
    cfg = io.config_from_manifest(out / "manifest.json")
    res = run(cfg, make_problem(cfg.problem, cfg.M, cfg.D, cfg.conv_groups))
    replay = tmp_path / "replay.csv"
    io.write_metrics(replay, res.rows)
    assert replay.read_bytes() == (out / "metrics.csv").read_bytes()


def test_sweep_counts_and_aggregate(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--param", "lambda_exp", "--values", "0.75,1.0,1.25", "--problems", "LSMOP1,LSMOP5",
                 "--seeds", "3", *SMALL, "--gens", "4", "--out", str(out)]) == 0
    assert len(list(out.rglob("manifest.json"))) == 18
    agg = io.read_table(out / "aggregate.csv")
    assert len(agg["value"]) == 6
    for value, prob, mean, std in zip(agg["value"], agg["problem"], agg["igd_plus_mean"], agg["igd_plus_std"]):
        runs = sorted((out / f"lambda_exp={io.fmt(float(value))}" / prob).glob("seed*/metrics.csv"))
        finals = [io.read_table(p)["igd_plus"][-1] for p in runs]
        assert len(finals) == 3
        assert mean == pytest.approx(np.mean(finals), rel=1e-12)
        assert std == pytest.approx(np.std(finals, ddof=1), rel=1e-9, abs=1e-15)


def test_sweep_worker_count_does_not_change_results(tmp_path, monkeypatch):
    args = ["sweep", "--param", "p_start", "--values", "0.05", "--problems", "LSMOP1", "--seeds", "2", *SMALL,
            "--gens", "4"]
    assert main([*args, "--out", str(tmp_path / "one")]) == 0
    monkeypatch.setenv("TRUST_TAEA_THREADS", "2")
    assert main([*args, "--out", str(tmp_path / "two")]) == 0
    assert (tmp_path / "one" / "aggregate.csv").read_bytes() == (tmp_path / "two" / "aggregate.csv").read_bytes()


def test_sweep_defaults_include_standard_values():
    assert 0.12 in SWEEP_DEFAULTS["p_start"]
    assert SWEEP_DEFAULTS["lambda_exp"] == (0.75, 1.0, 1.25)
    assert RunConfig().probe.p_start == 0.12


def test_microgrid_report(tmp_path):
    out = tmp_path / "mg"
    scen = tmp_path / "scenario.csv"
    status = main(["microgrid", "--scenario", "synthetic:0", "--max-evals", "3000", "--pop", "30", "--seed", "1",
                   "--write-scenario", str(scen), "--out", str(out)])
    assert status in (0, 1)
    report = io.read_table(out / "feasibility.csv")
    assert report["constraint"] == [*CONSTRAINTS, "total"]
    assert report["violation"][-1] == pytest.approx(sum(report["violation"][:-1]))
    sched = io.read_table(out / "schedule.csv")
    sc = generate_scenario(seed=0)
    assert len(sched["t"]) == sc.T
    soc = replay_soc(np.array(sched["ch_kw"]), np.array(sched["dis_kw"]), sc)
    assert np.allclose(soc, sched["soc_kwh"], rtol=0, atol=1e-9)
    if status == 0:
        assert report["violation"][-1] == 0.0
        assert all(v == 0.0 for v in report["violation"])
    # the saved scenario drives an identical run
    again = tmp_path / "mg2"
    main(["microgrid", "--scenario", str(scen), "--max-evals", "3000", "--pop", "30", "--seed", "1", "--out", str(again)])
    assert (again / "front.csv").read_bytes() == (out / "front.csv").read_bytes()


def _make_runs(root, seeds, algo, problems=("LSMOP1", "LSMOP2")):
    for prob in problems:
        for s in seeds:
            assert main(["run", "--problem", prob, "--m", "2", "--d", "30", "--pop", "10", "--gens", "6",
                         "--algo", algo, "--seed", str(s), "--out", str(root / prob / f"s{s}")]) == 0


def test_stats_identical_and_recompute(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    _make_runs(a, range(5), "trust-taea")
    _make_runs(b, range(5), "vanilla-taea")
    capsys.readouterr()
    assert main(["stats", str(a), str(a)]) == 0
    text = capsys.readouterr().out
    assert text.strip().splitlines()[-1] == "+/-/≈: 0/0/2"
    assert main(["stats", str(a), str(b)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    ra, rb = collect_runs(a, "igd_plus"), collect_runs(b, "igd_plus")
    expected = [wilcoxon_rank_sum(ra[k], rb[k])[0] for k in sorted(ra)]
    symbols = {"plus": "+", "minus": "-", "approx": "≈"}
    assert [ln.split()[-1] for ln in lines[1:-1]] == [symbols[v] for v in expected]
    counts = [int(c) for c in lines[-1].split(": ")[1].split("/")]
    assert sum(counts) == 2
    assert counts == [expected.count(v) for v in ("plus", "minus", "approx")]


def test_stats_mismatched_sets(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _make_runs(a, range(5), "trust-taea", problems=("LSMOP1",))
    _make_runs(b, range(5), "trust-taea", problems=("LSMOP2",))
    assert main(["stats", str(a), str(b)]) == 2


@settings(max_examples=200)
@given(st.lists(st.lists(st.one_of(st.floats(allow_nan=False), st.integers(-10**6, 10**6)), min_size=3, max_size=3),
                min_size=1, max_size=10))
def test_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    io.write_rows(path, ["a", "b", "c"], rows)
    header, back = io.read_rows(path)
    assert header == ["a", "b", "c"]
    for r, s in zip(rows, back):
        for x, y in zip(r, s):
            assert x == y and type(x) is type(y)

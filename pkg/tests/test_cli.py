import csv
import json

import numpy as np
import pytest

from tabhpo.cli import main
from tabhpo.data import make_toy_regression, write_csv
from tabhpo.table import load_table

TINY_SPACE = {
    "format_version": 1,
    "space": [
        {"name": "init_lr", "kind": "ordinal", "values": [0.001, 0.01]},
        {"name": "layer1_size", "kind": "ordinal", "values": [4, 8]},
        {"name": "act1", "kind": "categorical", "values": ["relu", "tanh"]},
    ]
}


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


@pytest.fixture
def synth(tmp_path):
    out = tmp_path / "s.jsonl"
    assert main(["gen-synth", "--space", "configs/mini_space.json", "--epochs", "12",
                 "--seeds", "3", "--out", str(out), "--dataset-name", "syn"]) == 0
    return out


def test_gen_grid_on_eight_cells(tmp_path, capsys):
    data = tmp_path / "toy.csv"
    write_csv(data, make_toy_regression(120, 4, seed=1), ["a", "b", "c", "d", "y"])
    space = tmp_path / "space.json"
    space.write_text(json.dumps(TINY_SPACE))
    out = tmp_path / "grid.jsonl"
    assert main(["gen-grid", "--data", str(data), "--target", "y", "--space", str(space),
                 "--seeds", "2", "--epochs", "3", "--out", str(out), "--timing", "model",
                 "--jobs", "1"]) == 0
    t = load_table(out)
    assert t.n_configs == 8 and t.n_seeds == 2 and t.max_epochs == 3
    assert main(["validate", str(out)]) == 0
    assert "8 configs" in capsys.readouterr().out


def test_usage_errors_exit_2(tmp_path, synth, capsys):
    assert main(["gen-grid", "--data", "x.csv", "--out", "y"]) == 2  # missing --target
    assert main(["compare", str(synth), "--strategies", "rs,smac", "--out-dir",
                 str(tmp_path / "r")]) == 2
    assert main(["run", str(synth), "--strategy", "rs", "--param", "rs.bogus=1"]) == 2
    assert main(["analyze", "cross-rank", str(synth)]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_runtime_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    assert main(["validate", str(bad)]) == 1
    assert main(["validate", str(tmp_path / "missing.jsonl")]) == 1
    capsys.readouterr()


def test_query_prints_json(synth, capsys):
    assert main(["query", str(synth), "--budget", "5", "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["budget_epochs"] == 5 and 0 <= out["seed"] < 3
    assert out["runtime_charged_seconds"] > 0


def test_analyses_write_outputs(synth, tmp_path, capsys):
    od = tmp_path / "an"
    for analysis in ("ecdf", "noise", "fanova", "neighbors"):
        assert main(["analyze", analysis, str(synth), "--out-dir", str(od)]) == 0
        assert (od / f"{analysis}_syn.csv").exists()
        assert (od / f"{analysis}_syn.svg").exists() == (analysis != "neighbors")
    # one row per alternative value of each parameter: sum of (card - 1)
    nb = _rows(od / "neighbors_syn.csv")
    assert len(nb) - 1 == (3 - 1) + (2 - 1) * 3 + (3 - 1) + (2 - 1) * 2
    assert main(["analyze", "rank-corr", str(synth), "--out-dir", str(od),
                 "--budgets", "1,3,6,12"]) == 0
    rc = _rows(od / "rank_corr_syn.csv")
    assert len(rc) == 5 and len(rc[0]) == 6
    assert float(rc[-1][-1]) == pytest.approx(1.0)
    capsys.readouterr()


def test_fanova_on_additive_table_has_no_interactions(tmp_path, capsys):
    out = tmp_path / "add.jsonl"
    assert main(["gen-synth", "--space", "configs/mini_space.json", "--epochs", "4",
                 "--seeds", "2", "--noise", "0", "--out", str(out),
                 "--dataset-name", "add"]) == 0
    assert main(["analyze", "fanova", str(out), "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "fanova_add.csv")[1:]
    unary = sum(float(r[3]) for r in rows if r[1] == "1")
    assert unary == pytest.approx(1.0, abs=1e-9)
    assert all(abs(float(r[3])) < 1e-9 for r in rows if r[1] == "2")
    capsys.readouterr()


def test_run_and_compare(synth, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    assert main(["run", str(synth), "--strategy", "rs", "--max-evals", "5",
                 "--out", str(trace)]) == 0
    assert len(_rows(trace)) == 6
    metas = []
    for name in ("a", "b"):
        od = tmp_path / name
        assert main(["compare", str(synth), "--strategies", "rs,hb", "--n-runs", "3",
                     "--max-evals", "20", "--out-dir", str(od), "--jobs", "1"]) == 0
        metas.append(json.loads((od / "meta.json").read_text()))
        assert (od / "curves.svg").exists()
    assert metas[0]["checksums"] == metas[1]["checksums"]
    assert main(["report", str(tmp_path / "a")]) == 0
    assert main(["report", str(tmp_path)]) == 1
    capsys.readouterr()


def test_config_file_supplies_flags(synth, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"strategies": ["rs"], "n_runs": 2, "max_evals": 4,
                               "out_dir": str(tmp_path / "c")}))
    assert main(["compare", str(synth), "--config", str(cfg)]) == 0
    meta = json.loads((tmp_path / "c" / "meta.json").read_text())
    assert meta["n_runs"] == 2 and meta["strategies"] == ["rs"]
    cfg.write_text(json.dumps({"unknown_key": 1}))
    assert main(["compare", str(synth), "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_param_flag_reaches_the_strategy(synth, tmp_path, capsys):
    od = tmp_path / "p"
    assert main(["compare", str(synth), "--strategies", "re", "--n-runs", "1",
                 "--max-evals", "10", "--out-dir", str(od), "--no-svg",
                 "--param", "re.population_size=5"]) == 0
    meta = json.loads((od / "meta.json").read_text())
    assert meta["strategy_params"] == {"re": {"population_size": 5}}
    capsys.readouterr()

import csv
import json
from pathlib import Path

import pytest

from msana.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text("seed: 1\nstream:\n  n_pre: 800\n  n_post: 800\n")
    return p


def test_run_writes_reports(small_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(small_config), "--out", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    assert 0.0 <= res["metrics"]["accuracy"] <= 1.0
    assert "timing" in res and "determinism_hash" in res
    for name in ("curve.csv", "latency_pdf.csv", "breakdown.csv", "events.jsonl", "masks.csv"):
        assert (out / name).exists()
    rows = list(csv.DictReader(open(out / "latency_pdf.csv")))
    assert len(rows) == 50
    comps = [r["component"] for r in csv.DictReader(open(out / "breakdown.csv"))]
    assert "base_learning" in comps


def test_run_seed_and_threads_flags(small_config, tmp_path):
    assert main(["run", "--config", str(small_config), "--out", str(tmp_path / "o"),
                 "--seed", "4", "--threads", "2"]) == 0
    res = json.loads((tmp_path / "o" / "results.json").read_text())
    assert res["seed"] == 4 and res["config"]["threads"] == 2


def test_bundled_configs_parse():
    from msana.config import load_config
    for name in ("abrupt.yaml", "gradual.yaml", "csv_example.yaml"):
        load_config(CONFIGS / name, environ={})


def test_unknown_key_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("ensemble:\n  wieght: 1\n")
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "ensemble.wieght" in capsys.readouterr().err


def test_missing_csv_exit_3(tmp_path):
    p = tmp_path / "csv.yaml"
    p.write_text("stream:\n  source: csv\n  path: nowhere.csv\n")
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 3


def test_csv_run(tmp_path):
    import numpy as np
    r = np.random.default_rng(0)
    lines = ["a,b,c,Label"]
    for i in range(600):
        x = r.random(3)
        lines.append(f"{x[0]},{x[1]},{x[2]},{'ATTACK' if x[0] > 0.5 else 'BENIGN'}")
    (tmp_path / "flows.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "schema.yaml").write_text("label_column: Label\nlabel_map:\n  BENIGN: 0\n  ATTACK: 1\n")
    (tmp_path / "c.yaml").write_text("stream:\n  source: csv\n  path: flows.csv\n  schema: schema.yaml\n")
    assert main(["run", "--config", str(tmp_path / "c.yaml"), "--out", str(tmp_path / "o")]) == 0
    res = json.loads((tmp_path / "o" / "results.json").read_text())
    assert res["metrics"]["accuracy"] > 0.85


def test_compare_one_and_two_rows(small_config, tmp_path, capsys):
    assert main(["compare", "--config", str(small_config), "--methods", "opa"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[2].startswith("opa")
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(small_config), "--methods", "msana,arf-adwin",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "compare.csv")))
    assert [r["method"] for r in rows] == ["msana", "arf-adwin"]
    assert set(rows[0]) == {"method", "accuracy", "precision", "recall", "f1",
                            "mean_latency_ms", "throughput_sps"}


def test_compare_out_of_scope(small_config, capsys):
    assert main(["compare", "--config", str(small_config), "--methods", "msana,lb"]) == 2
    assert "not implemented (out of scope baseline)" in capsys.readouterr().err


def test_compare_unknown_method(small_config, capsys):
    assert main(["compare", "--config", str(small_config), "--methods", "foo"]) == 2
    assert "unknown method" in capsys.readouterr().err

import json

import numpy as np
import pytest

from spnforest.cli import main
from spnforest import SpnGraph, save_model

from conftest import synthetic_data


@pytest.fixture()
def toy_dataset(tmp_path):
    rng = np.random.default_rng(0)
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    full = synthetic_data(rng, 260, 6)
    splits = {"ts": full[:200], "valid": full[200:230], "test": full[230:]}
    for split, matrix in splits.items():
        with open(data_dir / f"toy.{split}.data", "w") as fh:
            for row in matrix:
                fh.write(",".join(str(int(v)) for v in row) + "\n")
    return data_dir


def base_args(data_dir, out):
    return ["--data-dir", str(data_dir), "--dataset", "toy", "--out", str(out),
            "--em-max-iters", "5"]


def test_learn_extra_and_report(toy_dataset, tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["learn-extra", *base_args(toy_dataset, out),
               "--n-components", "3", "--seed", "1"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["components"]) == 3
    assert all(1 <= c["mu"] <= 200 // 5 for c in report["components"])
    assert "best_extraspn_test_ll" in report
    assert (out / "extraspn_00.json").exists()


def test_learn_extra_deterministic(toy_dataset, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["learn-extra", *base_args(toy_dataset, out),
                     "--n-components", "2", "--seed", "7"]) == 0
    m1 = (out1 / "extraspn_00.json").read_bytes()
    m2 = (out2 / "extraspn_00.json").read_bytes()
    assert m1 == m2


@pytest.mark.parametrize("kind", ["rspf", "resspn", "inforesspn"])
def test_ensemble_kinds(toy_dataset, tmp_path, kind):
    comp_dir = tmp_path / "comps"
    assert main(["learn-extra", *base_args(toy_dataset, comp_dir),
                 "--n-components", "3", "--seed", "2"]) == 0
    comps = sorted(str(p) for p in comp_dir.glob("extraspn_*.json"))
    out = tmp_path / f"run_{kind}"
    rc = main(["ensemble", *base_args(toy_dataset, out), "--kind", kind,
               "--seed", "2", "--k", "0.1", "0.2", "--components", *comps])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert {"train_ll", "valid_ll", "test_ll", "stats"} <= set(report)
    assert (out / "em_trace.csv").exists()
    if kind == "rspf":
        assert report["selected_k"] is None
    else:
        assert report["selected_k"] in (0.1, 0.2)


def test_eval_uniform_model_closed_form(toy_dataset, tmp_path, capsys):
    g = SpnGraph(6)
    g.set_root(g.add_product([g.add_leaf(v, 0.5) for v in range(6)]))
    path = tmp_path / "uniform.json"
    save_model(g, path)
    rc = main(["eval", str(path), "--data-dir", str(toy_dataset),
               "--dataset", "toy", "--split", "test"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean_ll"] == pytest.approx(-6 * np.log(2), abs=1e-10)


def test_mi_command(toy_dataset, tmp_path, capsys):
    g = SpnGraph(6)
    g.set_root(g.add_product([g.add_leaf(v, 0.5) for v in range(6)]))
    path = tmp_path / "uniform.json"
    save_model(g, path)
    out_dir = tmp_path / "mi"
    rc = main(["mi", str(path), "--data-dir", str(toy_dataset),
               "--dataset", "toy", "--out", str(out_dir)])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    # factorized model: model MI is 0, gap equals the empirical norm
    emp = np.loadtxt(out_dir / "mi_empirical.csv", delimiter=",", skiprows=1)
    assert out["gap"] == pytest.approx(np.sqrt((emp ** 2).sum()), rel=1e-9)


def test_stats_command(toy_dataset, tmp_path, capsys):
    g = SpnGraph(6)
    g.set_root(g.add_product([g.add_leaf(v, 0.5) for v in range(6)]))
    path = tmp_path / "m.json"
    save_model(g, path)
    assert main(["stats", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n_edges"] == 6
    assert out["n_layers"] == 2
    assert "reference" not in out
    assert main(["stats", str(path), "--dataset", "nltcs"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reference"] == "LearnSPN/nltcs: 7509 edges, 4 layers"


def test_bench_smoke(toy_dataset, tmp_path):
    out = tmp_path / "bench"
    rc = main(["bench", *base_args(toy_dataset, out), "--sizes", "2", "3",
               "--k", "0.1", "--seed", "3"])
    assert rc == 0
    report = json.loads((out / "bench.json").read_text())
    assert [r["n_components"] for r in report["results"]] == [2, 3]
    assert all("rspf" in r and "resspn" in r for r in report["results"])


def test_error_record_on_failure(tmp_path, capsys):
    rc = main(["eval", str(tmp_path / "missing.json"),
               "--dataset", "toy", "--data-dir", str(tmp_path)])
    assert rc == 1
    record = json.loads(capsys.readouterr().err)
    assert record["error"]
    assert record["command"] == "eval"

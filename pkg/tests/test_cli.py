import json

import pytest
from click.testing import CliRunner

from dimbench.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def test_version(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0
    assert "dimbench" in result.output


def test_gen_cluster_eval_pipeline(runner, tmp_path):
    data = tmp_path / "blobs.mnde"
    result = invoke(runner, "gen-synth", "--d", "2", "--k", "3", "--n", "90",
                    "--overlap", "16.0", "--out", str(data))
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["n"] == 90

    pred = tmp_path / "pred.csv"
    result = invoke(runner, "cluster", "--data", str(data), "--method", "kmeans",
                    "--k", "3", "--out", str(pred))
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["n_clusters"] == 3

    result = invoke(runner, "eval", "--truth", str(data), "--pred", str(pred))
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["ari"] == 1.0


def test_split_writes_file(runner, tmp_path):
    out = tmp_path / "split.json"
    result = invoke(runner, "split", "--n", "100", "--seed", "4", "--out", str(out))
    assert result.exit_code == 0
    saved = json.loads(out.read_text())
    assert len(saved["shared"]) == 40


def test_missing_file_exits_2(runner, tmp_path):
    result = invoke(runner, "eval", "--truth", str(tmp_path / "a.csv"),
                    "--pred", str(tmp_path / "b.csv"))
    assert result.exit_code == 2
    assert "error:" in result.output


def test_bad_method_exits_2(runner, tmp_path):
    result = invoke(runner, "cluster", "--data", "x.mnde", "--method", "dbscan")
    assert result.exit_code == 2


def test_bad_dims_flag_exits_2(runner):
    result = invoke(runner, "performance", "--dims", "2,apple")
    assert result.exit_code == 2


def test_bad_dataset_entry_exits_2(runner):
    result = invoke(runner, "performance", "--dataset", "two:file.mnde")
    assert result.exit_code == 2
    assert "DIM=PATH" in result.output


def test_unknown_config_key_exits_2(runner, tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("bogus_key = 1\n")
    result = invoke(runner, "performance", "--config", str(cfg))
    assert result.exit_code == 2


SMALL = ["--dims", "2", "--methods", "kmeans", "--k", "3", "--n-seeds", "2",
         "--synth-k", "3", "--synth-n", "60", "--rf-trees", "10", "--folds", "3",
         "--percentiles", "2.0", "--neighbors", "5", "--top-m", "3"]


def test_all_pipeline_exit_0(runner, tmp_path):
    out = tmp_path / "bench"
    result = invoke(runner, "all", "--out", str(out), "--seed", "9", *SMALL)
    assert result.exit_code == 0, result.output
    assert (out / "report.json").exists()
    body = json.loads(result.output)
    assert body["n_failures"] == 0


def test_failing_cells_exit_3(runner, tmp_path):
    # k larger than the dataset makes every fit fail; outputs still written
    out = tmp_path / "bench"
    args = list(SMALL)
    args[args.index("--k") + 1] = "500"
    result = invoke(runner, "performance", "--out", str(out), *args)
    assert result.exit_code == 3, result.output
    assert (out / "sections" / "performance.json").exists()


def test_config_file_with_flag_override(runner, tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text(
        "dims = [2]\nmethods = [\"kmeans\"]\nk = 3\nn-seeds = 2\n"
        "synth-k = 3\nsynth-n = 60\nrf-trees = 10\nfolds = 3\n"
        "percentiles = [2.0]\nn-neighbors = 5\ntop-m = 3\n"
    )
    out = tmp_path / "bench"
    result = invoke(runner, "rf-cv", "--config", str(cfg), "--out", str(out),
                    "--folds", "4")
    assert result.exit_code == 0, result.output
    section = json.loads((out / "sections" / "rf.json").read_text())
    assert section["cells"][0]["folds"] == 4

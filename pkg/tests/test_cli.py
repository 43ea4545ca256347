import csv
import json
import subprocess
import sys

from seedlabel.cli import main


def run_cli(*argv):
    return main(list(argv))


def autofill(template, truth_csv, filled):
    truth = dict(row for row in list(csv.reader(open(truth_csv, newline="")))[1:])
    rows = list(csv.reader(open(template, newline="")))
    with open(filled, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"])
        for iid, _ in rows[1:]:
            writer.writerow([iid, truth[iid]])


def gen(tmp_path, **kw):
    out = tmp_path / "data"
    args = ["gen-synth", "--out", str(out)]
    defaults = {"n-per-class": 15, "dim": 5, "separation": 5.0, "seed": 2}
    defaults.update(kw)
    for key, val in defaults.items():
        args += [f"--{key}", str(val)]
    assert run_cli(*args) == 0
    return out / "features.csv", out / "truth.csv"


class TestExitCodes:
    def test_budget_zero_is_usage_error(self, tmp_path):
        features, _ = gen(tmp_path)
        code = run_cli(
            "select", "--features", str(features), "--budget", "0",
            "--out", str(tmp_path / "run"),
        )
        assert code == 2

    def test_budget_beyond_pool_is_usage_error(self, tmp_path):
        features, _ = gen(tmp_path)
        code = run_cli(
            "select", "--features", str(features), "--budget", "99999",
            "--out", str(tmp_path / "run"),
        )
        assert code == 2

    def test_missing_features_file_is_usage_error(self, tmp_path):
        code = run_cli(
            "select", "--features", str(tmp_path / "ghost.csv"),
            "--out", str(tmp_path / "run"),
        )
        assert code == 2

    def test_happy_path_is_zero(self, tmp_path):
        features, truth = gen(tmp_path)
        out = tmp_path / "run"
        assert run_cli(
            "select", "--features", str(features), "--budget", "5",
            "--seed", "1", "--out", str(out),
        ) == 0
        autofill(out / "template.csv", truth, out / "filled.csv")
        assert run_cli(
            "label", "--features", str(features), "--template", str(out / "filled.csv"),
            "--out", str(out), "--epochs", "30",
        ) == 0
        assert run_cli(
            "evaluate", "--predictions", str(out / "predictions.csv"),
            "--truth", str(truth),
        ) == 0


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_win(self, tmp_path):
        features, _ = gen(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("budget = 4\nobjective = random\nseed = 6\n")
        out = tmp_path / "a"
        assert run_cli(
            "select", "--features", str(features), "--config", str(cfg),
            "--out", str(out),
        ) == 0
        doc = json.loads((out / "manifest.json").read_text())
        assert doc["budget"] == 4 and doc["objective"] == "random_baseline"
        out2 = tmp_path / "b"
        assert run_cli(
            "select", "--features", str(features), "--config", str(cfg),
            "--budget", "7", "--out", str(out2),
        ) == 0
        doc2 = json.loads((out2 / "manifest.json").read_text())
        assert doc2["budget"] == 7

    def test_unknown_config_key_rejected(self, tmp_path):
        features, _ = gen(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        assert run_cli(
            "select", "--features", str(features), "--config", str(cfg),
            "--out", str(tmp_path / "r"),
        ) == 2


class TestSubcommands:
    def test_ingest_reports_shape(self, tmp_path, capsys):
        features, _ = gen(tmp_path)
        assert run_cli("ingest", "--features", str(features)) == 0
        out = capsys.readouterr().out
        assert "30 instances x 5 features" in out

    def test_ingest_builds_cache_reused_by_select(self, tmp_path):
        features, _ = gen(tmp_path)
        cache = tmp_path / "sim.bin"
        assert run_cli("ingest", "--features", str(features), "--cache", str(cache)) == 0
        assert cache.exists()
        out = tmp_path / "run"
        assert run_cli(
            "select", "--features", str(features), "--cache", str(cache),
            "--budget", "4", "--out", str(out),
        ) == 0

    def test_predict_roundtrip(self, tmp_path):
        features, truth = gen(tmp_path)
        out = tmp_path / "run"
        run_cli("select", "--features", str(features), "--budget", "5", "--out", str(out))
        autofill(out / "template.csv", truth, out / "filled.csv")
        run_cli(
            "label", "--features", str(features), "--template", str(out / "filled.csv"),
            "--out", str(out), "--epochs", "25",
        )
        redo = tmp_path / "redo"
        assert run_cli(
            "predict", "--features", str(features), "--params", str(out / "params.json"),
            "--lfs", str(out / "lf_matrix.meta.json"), "--out", str(redo),
        ) == 0
        assert (redo / "predictions.csv").read_bytes() == (out / "predictions.csv").read_bytes()

    def test_grid_synthetic(self, tmp_path):
        out = tmp_path / "grid"
        assert run_cli(
            "grid", "--objectives", "fl,random", "--budgets", "3,5", "--repeats", "2",
            "--n-per-class", "10", "--dim", "4", "--separation", "5.0",
            "--epochs", "25", "--seed", "3", "--out", str(out),
        ) == 0
        lines = (out / "grid.csv").read_text().splitlines()
        assert lines[0] == "objective,budget,seed,accuracy"
        assert len(lines) == 1 + 2 * 2 * 3

    def test_grid_on_files(self, tmp_path):
        features, truth = gen(tmp_path)
        out = tmp_path / "grid"
        assert run_cli(
            "grid", "--features", str(features), "--truth", str(truth),
            "--objectives", "random", "--budgets", "4", "--repeats", "2",
            "--epochs", "20", "--out", str(out),
        ) == 0
        assert (out / "grid.csv").exists()

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "seedlabel", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "gen-synth" in proc.stdout

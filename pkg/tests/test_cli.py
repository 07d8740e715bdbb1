import csv
import json
import os

import numpy as np
import pytest

from caplab import cli


def run(args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv("CAPLAB_THREADS", "1")


class TestFig3:
    def test_closed_forms(self, tmp_path):
        out = tmp_path / "fig3.csv"
        assert run(["fig3", "--p-grid", "0:1:0.05", "--out", out]) == 0
        rows = read_csv(out)
        assert len(rows) == 21
        for row in rows:
            p = float(row["p"])
            assert float(row["joint_rate"]) == pytest.approx(1 - p, abs=1e-12)
            assert float(row["erasure_alone"]) == pytest.approx(
                max(0.0, 1 - 2 * p), abs=1e-12
            )
            assert float(row["retro_alone_upper"]) == 0.0
        mid = [r for r in rows if float(r["p"]) == 0.5]
        assert len(mid) == 1 and float(mid[0]["erasure_alone"]) == 0.0

    def test_header_schema(self, tmp_path):
        out = tmp_path / "fig3.csv"
        run(["fig3", "--p-grid", "0:1:0.5", "--out", out])
        first = out.read_text().splitlines()[0]
        assert first == "p,joint_rate,erasure_alone,retro_alone_upper"

    def test_rejects_grid_outside_unit_interval(self, tmp_path, capsys):
        out = tmp_path / "bad.csv"
        assert run(["fig3", "--p-grid", "0:2:0.5", "--out", out]) == 2
        assert "p-grid" in capsys.readouterr().err
        assert not out.exists()


class TestRetroSim:
    def test_rows_and_summary(self, tmp_path):
        out = tmp_path / "retro.csv"
        assert run(["retro-sim", "--d", 2, "--c", 1, "--p", 0.5,
                    "--trials", 3, "--seed", 7, "--out", out]) == 0
        rows = read_csv(out)
        trial_rows = [r for r in rows if r["trial"] != "summary"]
        assert len(trial_rows) == 3
        for r in trial_rows:
            assert float(r["joint_at_p"]) == pytest.approx(1.0, abs=1e-9)
        summary = rows[-1]
        assert summary["trial"] == "summary"
        assert float(summary["mean"]) == pytest.approx(1.0, abs=1e-9)

    def test_p_zero_joint_is_log_d(self, tmp_path):
        out = tmp_path / "retro.csv"
        run(["retro-sim", "--d", 2, "--c", 4, "--p", 0, "--trials", 3,
             "--seed", 7, "--out", out])
        for r in read_csv(out)[:-1]:
            assert float(r["joint_at_p"]) == pytest.approx(1.0, abs=1e-9)

    def test_statistical_self_consistency(self, tmp_path):
        # Two independent master seeds agree within three standard errors.
        means, errs = [], []
        for seed in (7, 1234):
            out = tmp_path / f"retro{seed}.csv"
            run(["retro-sim", "--d", 4, "--c", 16, "--p", 0.5, "--trials", 25,
                 "--seed", seed, "--out", out])
            summary = read_csv(out)[-1]
            means.append(float(summary["mean"]))
            errs.append(float(summary["std_error"]))
        pooled = np.hypot(errs[0], errs[1])
        assert abs(means[0] - means[1]) < 3 * pooled

    def test_missing_field_names_it(self, tmp_path, capsys):
        assert run(["retro-sim", "--d", 2, "--c", 1, "--p", 0.5,
                    "--seed", 7, "--out", tmp_path / "x.csv"]) == 2
        assert "trials" in capsys.readouterr().err


class TestCapacity:
    def test_identity_qubit(self, tmp_path):
        out = tmp_path / "id.csv"
        assert run(["capacity", "--channel", "identity", "--dim", 2,
                    "--restarts", 3, "--seed", 7, "--out", out]) == 0
        row = read_csv(out)[0]
        assert float(row["chi_hat"]) == pytest.approx(1.0, abs=1e-3)
        assert float(row["q1_hat"]) == pytest.approx(1.0, abs=1e-3)
        assert row["parameter"] == ""

    def test_half_erasure(self, tmp_path):
        out = tmp_path / "er.csv"
        run(["capacity", "--channel", "erasure", "--dim", 2, "--p", 0.5,
             "--restarts", 3, "--seed", 7, "--out", out])
        row = read_csv(out)[0]
        assert float(row["chi_hat"]) == pytest.approx(0.5, abs=1e-3)
        assert abs(float(row["q1_hat"])) <= 1e-6
        assert abs(float(row["p1_hat"])) <= 1e-6

    def test_fully_depolarizing(self, tmp_path):
        out = tmp_path / "dep.csv"
        run(["capacity", "--channel", "depolarizing", "--p", 1.0,
             "--restarts", 2, "--seed", 7, "--out", out])
        row = read_csv(out)[0]
        assert float(row["chi_hat"]) <= 1e-6
        assert abs(float(row["q1_hat"])) <= 1e-6
        assert abs(float(row["p1_hat"])) <= 1e-6

    def test_invalid_channel_kind(self, tmp_path, capsys):
        assert run(["capacity", "--channel", "erasure", "--dim", 2, "--p", 2.0,
                    "--seed", 1, "--out", tmp_path / "x.csv"]) == 2
        assert "p" in capsys.readouterr().err


class TestChiScan:
    def test_c1_is_unit(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert run(["chi-scan", "--d", 2, "--c", "1", "--instances", 2,
                    "--restarts", 1, "--seed", 7, "--out", out]) == 0
        for row in read_csv(out):
            assert float(row["chi_hat"]) == pytest.approx(1.0, abs=1e-3)

    def test_schema(self, tmp_path):
        out = tmp_path / "scan.csv"
        run(["chi-scan", "--d", 2, "--c", "1,2", "--instances", 1,
             "--restarts", 1, "--max-iters", 30, "--seed", 7, "--out", out])
        first = out.read_text().splitlines()[0]
        assert first == "d,c,instance_seed,chi_hat"
        assert len(read_csv(out)) == 2


class TestManifestAndDeterminism:
    def test_manifest_written_next_to_csv(self, tmp_path):
        out = tmp_path / "fig3.csv"
        run(["fig3", "--p-grid", "0:1:0.5", "--out", out])
        manifest = json.loads((tmp_path / "fig3.csv.manifest.json").read_text())
        assert manifest["command"] == "fig3"
        assert manifest["config"]["p-grid"] == "0:1:0.5"
        assert manifest["csv"] == "fig3.csv"

    def test_rerun_from_manifest_is_byte_identical(self, tmp_path):
        out = tmp_path / "retro.csv"
        run(["retro-sim", "--d", 2, "--c", 3, "--p", 0.4, "--trials", 4,
             "--seed", 11, "--out", out])
        again = tmp_path / "again.csv"
        assert run(["retro-sim", "--config", tmp_path / "retro.csv.manifest.json",
                    "--out", again]) == 0
        assert out.read_bytes() == again.read_bytes()

    def test_thread_count_does_not_change_bytes(self, tmp_path, monkeypatch):
        outputs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("CAPLAB_THREADS", threads)
            out = tmp_path / f"retro{threads}.csv"
            run(["retro-sim", "--d", 2, "--c", 4, "--p", 0.3, "--trials", 6,
                 "--seed", 5, "--out", out])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "command": "retro-sim", "d": 2, "c": 2, "p": 0.5,
            "trials": 2, "seed": 3, "out": str(tmp_path / "a.csv"),
        }))
        assert run(["retro-sim", "--config", cfg, "--out", tmp_path / "b.csv"]) == 0
        assert (tmp_path / "b.csv").exists()
        assert not (tmp_path / "a.csv").exists()

    def test_command_mismatch_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "fig3", "p-grid": "0:1:0.5",
                                   "out": str(tmp_path / "a.csv")}))
        assert run(["retro-sim", "--config", cfg]) == 2
        assert "command" in capsys.readouterr().err

    def test_no_partial_file_on_failure(self, tmp_path):
        out = tmp_path / "never.csv"
        assert run(["retro-sim", "--d", 2, "--c", 1, "--p", 3.0, "--trials", 1,
                    "--seed", 1, "--out", out]) == 2
        assert not out.exists()
        assert not (tmp_path / "never.csv.manifest.json").exists()

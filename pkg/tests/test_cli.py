from __future__ import annotations

import json

import pytest

from polycong.cli import main
from polycong.experiment import CSV_HEADER, ExperimentConfig, geometric_moduli, run_experiment


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCount:
    def test_nf_record(self, capsys):
        code, out, _ = run(capsys, "count", "nf", "--poly", "x1^2+x2^2", "--mod", "5", "--no-timing")
        rec = json.loads(out)
        assert code == 0 and rec["count"] == 9 and "elapsed_s" not in rec

    def test_nf_region(self, capsys):
        region = json.dumps({"kind": "ball", "center": [0.5, 0.5, 0.5], "radius": 0.3})
        code, out, _ = run(capsys, "count", "nf", "--poly", "x1^2+x2^2-x3", "--mod", "31", "--region", region, "--bare")
        assert code == 0 and out.strip() == "104"

    def test_mf_j_t(self, capsys):
        assert run(capsys, "count", "mf", "--poly", "x1^2", "--mod", "7", "--H", "3", "--R", "1", "--bare")[1] == "1\n"
        assert run(capsys, "count", "j", "--s", "2", "--k", "2", "--d", "1", "--H", "6", "--bare")[1] == "66\n"
        assert run(capsys, "count", "j", "--s", "2", "--k", "2", "--d", "1", "--H", "6", "--method",
                   "convolution", "--bare")[1] == "66\n"
        assert run(capsys, "count", "t", "--poly", "x1^2+3*x1*x2+x2", "--mod", "11", "--H", "3", "--s", "2",
                   "--u", "1", "--bare")[1] == "593\n"

    @pytest.mark.parametrize("argv", [
        ["count", "j", "--s", "0", "--k", "2", "--d", "1", "--H", "3"],
        ["count", "nf", "--poly", "x1^^2", "--mod", "5"],
        ["count", "nf", "--poly", "x1"],
        ["count", "mf", "--poly", "x1^2", "--mod", "7", "--H", "3"],
        ["count", "nf", "--poly", "x1", "--mod", "5", "--region", "{\"kind\": \"blob\"}"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_budget_exit(self, capsys):
        code, _, err = run(capsys, "count", "j", "--s", "3", "--k", "2", "--d", "2", "--H", "10",
                           "--method", "direct")
        assert code == 3 and "budget" in err

    def test_bad_threads(self, capsys):
        assert run(capsys, "--threads", "0", "count", "j", "--s", "1", "--k", "2", "--d", "1", "--H", "3")[0] == 2


class TestVerifyChain:
    def test_small_grid(self, capsys, tmp_path):
        out_file = tmp_path / "chain.csv"
        argv = ["verify-chain", "--d", "1", "--k", "2", "--m", "5-7", "--H", "2,3", "--s", "1", "--polys", "3",
                "--out", str(out_file)]
        code, _, err = run(capsys, *argv)
        first = out_file.read_bytes()
        assert code == 0 and "0 violations" in err
        assert run(capsys, "--threads", "2", *argv)[0] == 0
        assert out_file.read_bytes() == first

    def test_single_instance(self, capsys):
        code, out, _ = run(capsys, "verify-chain", "--poly", "x1^2+3*x1*x2+x2", "--mod", "11", "--K", "2,5",
                           "--L", "4", "--H", "3", "--R", "3", "--s", "2")
        assert code == 0 and "master pass" in out

    @pytest.mark.parametrize("extra", [["--m", ""], ["--s", "0"], ["--k", "1"], ["--R", "x"]])
    def test_grid_usage_errors(self, capsys, extra):
        assert run(capsys, "verify-chain", "--polys", "1", *extra)[0] == 2

    def test_single_instance_needs_scalars(self, capsys):
        assert run(capsys, "verify-chain", "--poly", "x1^2", "--mod", "5", "--H", "2,3", "--R", "1",
                   "--s", "1")[0] == 2


class TestCover:
    def test_ball(self, capsys, tmp_path):
        region = json.dumps({"kind": "ball", "center": [0.5, 0.5], "radius": 0.3})
        exp = tmp_path / "cover.txt"
        code, out, _ = run(capsys, "cover", "--region", region, "--M", "5", "--samples", "2000",
                           "--shell-budget", "20000", "--out", str(exp))
        assert code == 0 and "uncovered 0" in out.replace("=", " ").replace(":", " ").replace("  ", " ")
        assert exp.read_text().startswith("# polycong cover v1")


class TestBounds:
    def test_thm31_csv(self, capsys):
        code, out, _ = run(capsys, "bounds", "thm31", "--m", "101", "--H", "5", "--R", "3", "--observed", "2")
        header, row = out.splitlines()
        assert code == 0 and header.startswith("name,m,H,R")
        assert row.startswith("thm31,101,5,3,") and row.endswith(",below")

    def test_violation_exit(self, capsys):
        assert run(capsys, "bounds", "heuristic", "--m", "101", "--H", "5", "--R", "3", "--observed", "10")[0] == 1

    def test_thm35_reports_cases(self, capsys):
        code, out, _ = run(capsys, "bounds", "thm35", "--m", "10000", "--mu", "0.01", "--k", "2", "--d", "2")
        assert code == 0 and "# case=1" in out

    def test_params(self, capsys):
        code, out, _ = run(capsys, "bounds", "params", "--m", "16", "--mu", "0.5")
        assert code == 0 and "M=3" in out and "bracketing=ok" in out

    def test_mu_below_range(self, capsys):
        assert run(capsys, "bounds", "thm34", "--m", "100", "--mu", "0.001")[0] == 2


class TestExperiment:
    def config(self, tmp_path):
        return ExperimentConfig(polys=["x1^2+x2^2-x3"], moduli=[31, 50],
                                regions=[{"kind": "ball", "center": [0.5, 0.5, 0.5], "radius": 0.3}],
                                H=[3], R=["1", "m"], slack_exponent=0.25, measure_budget=10_000,
                                output=str(tmp_path / "out.csv"))

    def test_round_trip(self, tmp_path):
        cfg = self.config(tmp_path)
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg
        with pytest.raises(ValueError):
            ExperimentConfig.from_json('{"polys": ["x1"], "moduli": [5], "bogus": 1}')

    def test_rows(self, tmp_path):
        text = run_experiment(self.config(tmp_path))
        lines = text.splitlines()
        assert lines[1] == CSV_HEADER
        rows = [dict(zip(CSV_HEADER.split(","), l.split(","))) for l in lines[2:]]
        region = [r for r in rows if r["kind"] == "region"]
        assert [r["observed"] for r in region if r["bound_name"] == "thm34"] == ["104", "304"]
        assert {r["bound_name"] for r in region} == {"thm34", "thm35"}
        box = [r for r in rows if r["kind"] == "box"]
        assert len(box) == 2 * 2 * 2 and all(r["regime"] == "below" for r in box)
        assert all(r["status"] == "ok" for r in rows)

    def test_cli_is_reproducible(self, capsys, tmp_path):
        cfg = self.config(tmp_path)
        path = tmp_path / "cfg.json"
        path.write_text(cfg.to_json())
        assert run(capsys, "experiment", str(path))[0] == 0
        first = (tmp_path / "out.csv").read_bytes()
        assert run(capsys, "--threads", "2", "experiment", str(path))[0] == 0
        assert (tmp_path / "out.csv").read_bytes() == first

    def test_invalid_config(self, capsys, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"polys": [], "moduli": [5]}')
        assert run(capsys, "experiment", str(path))[0] == 2
        assert run(capsys, "experiment", str(tmp_path / "missing.json"))[0] == 2

    def test_geometric_moduli(self):
        ms = geometric_moduli(50, 2000, 30)
        assert len(ms) == 30 and ms[0] == 50 and ms[-1] == 2000
        assert all(a < b for a, b in zip(ms, ms[1:]))
        with pytest.raises(ValueError):
            geometric_moduli(5, 8, 10)

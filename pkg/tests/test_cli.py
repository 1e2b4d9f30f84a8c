"""Command-line front end."""

import csv
import io
import json
import os

import numpy as np
import pytest

from hyperwave.cli import dispatch, main, render, resolve


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


CHEAP = [
    ["phi", "--n", "4", "--lam", "0,1", "--r", "0,2"],
    ["transform", "--n", "2"],
    ["abel", "--n", "4"],
    ["kernel", "--kind", "winf-tilde", "--sigma", "1+0.5j", "--t", "1", "--r", "0.5"],
    ["envelope", "--regimes", "low-bounded", "--nt", "3", "--nr", "6"],
    ["ks", "--q", "4", "--q-tilde", "6"],
    ["dispersive", "--times", "0.1,0.5", "--no-probe"],
    ["nlw", "--sigma", "0.6"],
    ["regions", "--n", "4", "--ng", "3", "--ns", "3"],
    ["calibrate", "--n", "3"],
]


class TestExamples:
    def test_lwp_case_a(self, capsys):
        doc = run_json(capsys, "lwp", "--n", "4", "--gamma", "1.5", "--sigma", "0.1")
        assert doc["status"] == "LWP"
        assert doc["case"] == "A"
        assert set(doc["witness"]) == {"1/p", "1/q", "1/p~", "1/q~"}

    def test_lwp_bruteforce(self, capsys):
        doc = run_json(capsys, "lwp", "--n", "4", "--gamma", "2", "--sigma", "1/2", "--bruteforce", "60")
        assert doc["status"] == "LWP"
        assert doc["bruteforce_witness"] is not None

    def test_thresholds_n3(self, capsys):
        doc = run_json(capsys, "thresholds", "--n", "3")
        assert doc["gamma1"] == "2"
        assert doc["gamma_conf"] == "3"
        assert doc["gamma3"] == "(11+sqrt(73))/6"

    def test_solve_time_zero_returns_data(self, capsys):
        code, out, _ = run(capsys, "solve", "--n", "3", "--t", "0", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        r = np.array([float(x["r"]) for x in rows])
        u = np.array([float(x["u"]) for x in rows])
        np.testing.assert_array_equal(u, np.exp(-r * r))

    def test_solve_snapshot(self, capsys):
        doc = run_json(capsys, "solve", "--n", "3", "--t", "1", "--data", "gaussian")
        assert doc["energy"] > 0
        assert len(doc["rows"]) == doc["nodes"]


class TestSubcommands:
    @pytest.mark.parametrize("argv", CHEAP, ids=lambda a: a[0])
    def test_runs(self, capsys, argv):
        doc = run_json(capsys, *argv)
        assert isinstance(doc, dict)

    @pytest.mark.parametrize("argv", CHEAP + [["lwp"], ["thresholds"], ["solve"]], ids=lambda a: a[0])
    def test_csv(self, capsys, argv):
        code, out, err = run(capsys, *argv, "--format", "csv")
        assert code == 0, err
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) >= 2
        assert all(len(r) == len(rows[0]) for r in rows)

    def test_quiet(self, capsys):
        code, out, _ = run(capsys, "thresholds", "--quiet")
        assert code == 0
        assert out == ""


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert run(capsys, "bogus")[0] == 2

    def test_no_subcommand(self, capsys):
        assert run(capsys)[0] == 2

    def test_bad_dimension(self, capsys):
        assert run(capsys, "thresholds", "--n", "1")[0] == 2

    def test_bad_value(self, capsys):
        assert run(capsys, "lwp", "--gamma", "1")[0] == 2

    def test_nonconvergence(self, capsys):
        assert run(capsys, "nlw", "--T", "2", "--amplitude", "10")[0] == 3

    def test_main_alias(self, capsys):
        assert main(["thresholds", "--quiet"]) == 0


class TestConfig:
    def test_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 4, "gamma": "3/2", "sigma": "1/10"}))
        doc = run_json(capsys, "lwp", "--config", str(cfg))
        assert doc["case"] == "A"
        doc = run_json(capsys, "lwp", "--config", str(cfg), "--n", "3")
        assert doc["case"] == "n3-case"

    def test_resolve_defaults(self):
        run_cfg, args = resolve("lwp", {})
        assert run_cfg.n == 3
        assert args["gamma"] == "3/2"

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]", '{"nope": 1}'])
    def test_malformed(self, tmp_path, capsys, text):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(text)
        assert run(capsys, "thresholds", "--config", str(cfg))[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "thresholds", "--config", str(tmp_path / "none.json"))[0] == 2


class TestOutput:
    def test_csv_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert dispatch(["phi", "--n", "5", "--lam", "0,0.5,3", "--r", "0,1,4", "--format", "csv", "--output", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_csv_round_trip_floats(self):
        text = render({}, [{"x": 0.1 + 0.2}], "csv")
        assert float(text.splitlines()[1]) == 0.1 + 0.2

    def test_atomic_write_leaves_no_temp(self, tmp_path, capsys):
        out = tmp_path / "v.json"
        assert dispatch(["thresholds", "--n", "4", "--output", str(out)]) == 0
        assert json.loads(out.read_text())["gamma3"] == "5/2"
        assert os.listdir(tmp_path) == ["v.json"]
        assert capsys.readouterr().out == ""

    def test_nan_becomes_null(self):
        doc = json.loads(render({"x": float("nan")}, [], "json"))
        assert doc["x"] is None

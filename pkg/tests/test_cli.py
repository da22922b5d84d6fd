import csv
import io

import pytest

from mprsampling import cli, experiments
from mprsampling.experiments import ExperimentSpec, load_config, run_rte_curves, spec_from_config, to_csv


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_cfg(tmp_path, body, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


FAST = """
[optimizer]
resolution = 21
refine_rounds = 1
tdma_resolution = 21
"""


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        s = experiments.scenario_from_config(cfg)
        assert (s.source_1.alpha, s.source_1.beta, s.source_2.alpha, s.source_2.beta) == (0.8, 0.6, 0.3, 0.2)
        assert s.channel.p_joint_2 == 0.55
        assert cfg["gamma_sweep"]["grid"][:3] == [0.01, 0.05, 0.1]
        assert len(cfg["weight_sweep"]["grid"]) == 21

    def test_unknown_key(self, tmp_path):
        assert cli.main(["solve", "--config", write_cfg(tmp_path, "[scenario.channel]\np_solo_3 = 0.5\n")]) == 2

    def test_bad_toml(self, tmp_path):
        assert cli.main(["solve", "--config", write_cfg(tmp_path, "[scenario\n")]) == 2

    def test_missing_file(self, tmp_path):
        assert cli.main(["solve", "--config", str(tmp_path / "nope.toml")]) == 2

    def test_invalid_parameter(self, tmp_path):
        assert cli.main(["solve", "--config", write_cfg(tmp_path, "[scenario.source_1]\nalpha = 1.0\n")]) == 2

    def test_grid_must_increase(self, tmp_path):
        assert cli.main(["gamma-sweep", "--config", write_cfg(tmp_path, "[gamma_sweep]\ngrid = [0.5, 0.2]\n")]) == 2

    def test_gamma_grid_domain(self, tmp_path):
        assert cli.main(["gamma-sweep", "--config", write_cfg(tmp_path, "[gamma_sweep]\ngrid = [0.0, 0.2]\n")]) == 2

    def test_unknown_policy(self, tmp_path):
        assert cli.main(["validate", "--config", write_cfg(tmp_path, '[validate]\npolicies = ["best"]\n')]) == 2


class TestCsv:
    def test_format(self):
        text = to_csv(["a", "b", "c"], [[1 / 3, 2, -0.0]])
        assert text == "a,b,c\n0.333333333333,2,0\n"

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            to_csv(["a"], [[float("nan")]])


class TestRteCurves:
    def test_rows(self):
        spec = spec_from_config("rte-curves", load_config(None))
        header, rows = run_rte_curves(spec)
        assert header == ["alpha", "beta", "q", "rte", "is_limit"]
        table = {(r[0], r[1], r[2]): r for r in rows}
        assert table[0.5, 0.5, 1.0][3] == 0.0
        assert table[0.8, 0.6, 0.5][3] == pytest.approx(0.2857142857142857, abs=1e-12)
        assert table[0.3, 0.2, 0.0][3] == pytest.approx(0.48, abs=1e-15)
        assert table[0.3, 0.2, 0.0][4] == 1

    def test_cli_output(self, tmp_path, capsys):
        out = tmp_path / "curves.csv"
        assert cli.main(["rte-curves", "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert len(rows) == 5 * 101
        assert all(0.0 <= float(r["rte"]) <= 1.0 for r in rows)


class TestSweeps:
    def test_gamma_sweep_columns_and_ranges(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST + "[gamma_sweep]\ngrid = [0.1, 0.5, 0.9]\n")
        out = tmp_path / "g.csv"
        assert cli.main(["gamma-sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert list(rows[0]) == ["gamma", "E_optimized", "E_random", "E_greedy1", "E_greedy2", "E_tdma"]
        for r in rows:
            vals = [float(v) for v in r.values()]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert float(r["E_optimized"]) <= min(float(r[c]) for c in ("E_random", "E_greedy1", "E_greedy2"))

    def test_denser_grid_agrees_on_shared_points(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        cli.main(["gamma-sweep", "--config", write_cfg(tmp_path, FAST + "[gamma_sweep]\ngrid = [0.2, 0.6]\n", "a.toml"), "--out", str(a)])
        cli.main(["gamma-sweep", "--config", write_cfg(tmp_path, FAST + "[gamma_sweep]\ngrid = [0.2, 0.4, 0.6]\n", "b.toml"), "--out", str(b)])
        ra = {r["gamma"]: r for r in read_csv(a.read_text())}
        rb = {r["gamma"]: r for r in read_csv(b.read_text())}
        for g in ra:
            assert ra[g] == rb[g]

    def test_weight_sweep(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST + "[weight_sweep]\ngrid = [0.0, 0.5, 1.0]\n")
        out = tmp_path / "w.csv"
        assert cli.main(["weight-sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert [r["w2"] for r in rows] == ["0", "0.5", "1"]

    def test_spec_validation(self):
        s = experiments.scenario_from_config(load_config(None))
        with pytest.raises(experiments.ConfigError):
            ExperimentSpec("weight-sweep", s, [0.0, 1.5])
        with pytest.raises(experiments.ConfigError):
            ExperimentSpec("rte-curves", s, [])


class TestSolve:
    def test_table(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert cli.main(["solve", "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert len(rows) == 9
        assert sum(int(r["best"]) for r in rows) == 1
        best = next(r for r in rows if r["best"] == "1")
        assert float(best["objective"]) == min(float(r["objective"]) for r in rows)
        assert "certificate=best-found" in capsys.readouterr().out


VALIDATE = """
[scenario.budget]
gamma_1 = 0.5
gamma_2 = 0.5
[sim]
horizon = 200000
warmup = 5000
[validate]
policies = ["greedy1", "random", "silent"]
"""


class TestValidate:
    def test_passes_and_rejects_silent(self, tmp_path, capsys):
        out = tmp_path / "v.csv"
        code = cli.main(["validate", "--config", write_cfg(tmp_path, FAST + VALIDATE), "--out", str(out), "--seed", "17"])
        assert code == 0
        rows = read_csv(out.read_text())
        assert {r["policy"] for r in rows} == {"greedy1", "random"}
        # greedy1 never updates source 2: only its q row is reported
        assert [r["metric"] for r in rows if r["policy"] == "greedy1" and r["source"] == "2"] == ["q"]
        assert all(abs(float(r["z"])) <= 4 for r in rows)
        assert "rejected silent" in capsys.readouterr().out

    def test_failure_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.setattr(experiments, "Z_FAIL", -1.0)
        assert cli.main(["validate", "--config", write_cfg(tmp_path, FAST + VALIDATE)]) == 1

    def test_seed_changes_output(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST + VALIDATE)
        outs = []
        for seed in ("1", "1", "2"):
            out = tmp_path / f"v{len(outs)}.csv"
            cli.main(["validate", "--config", cfg, "--out", str(out), "--seed", seed])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] != outs[2]

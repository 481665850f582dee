from __future__ import annotations

import json
import re

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spsg.cli import main
from spsg.config import ConfigError, build_config, parse_config, parse_override
from spsg.output import format_value, read_csv, write_csv, write_json
from spsg.runner import build_problem, check_doubling, snapshot_table


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


SMALL_OPINION = {"problem": "opinion", "grid": {"n": 11}, "gpc": {"order": 2}, "time": {"t_end": 0.5}}


class TestConfig:
    def test_minimal(self, tmp_path):
        cfg = parse_config(write_cfg(tmp_path, {"problem": "opinion"}))
        assert cfg.grid.n == 41 and cfg.gpc.order == 5 and cfg.quadrature.rule == "G"
        assert cfg.time.scheme == "rk4" and cfg.opinion.sigma2 == 0.2
        assert cfg.to_dict()["opinion"]["u_g"] == 0.25

    def test_problem_defaults(self):
        adv = build_config({"problem": "advected"})
        assert (adv.time.scheme, adv.opinion.confidence) == ("si2", 1.0)
        sw = build_config({"problem": "swarming2d"})
        assert (sw.grid.n, sw.gpc.order, sw.time.t_end) == (51, 10, 100.0)

    def test_wide_confidence_accepted(self):
        assert build_config({"opinion": {"confidence": 3}}).opinion.confidence == 3.0

    @pytest.mark.parametrize(
        "data,path",
        [
            ({"opinion": {"sigma2": -1}}, "opinion.sigma2"),
            ({"grid": {"cells": 4}}, "grid.cells"),
            ({"grid": {"n": "many"}}, "grid.n"),
            ({"time": {"scheme": "bdf2"}}, "time.scheme"),
            ({"time": {"dt_policy": "fixed"}}, "time.dt"),
            ({"problem": "kinetic"}, "problem"),
            ({"entropy": {"rows": [9]}}, "entropy.rows[0]"),
            ({"swarming": {"mu": [1.0]}}, "swarming.mu"),
            ({"problem": "advected", "time": {"cfl": 30.0}}, "time.cfl"),
        ],
    )
    def test_rejections_name_field(self, data, path):
        with pytest.raises(ConfigError, match="^" + re.escape(path) + ":"):
            build_config(data)

    def test_malformed_and_missing(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(ConfigError, match="malformed JSON"):
            parse_config(bad)
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "absent.json")

    def test_overrides(self):
        assert parse_override("--grid.n=21") == ("grid.n", 21)
        assert parse_override("quadrature.rule=G") == ("quadrature.rule", "G")
        assert parse_override("converge.grids=[11,21,41]") == ("converge.grids", [11, 21, 41])
        cfg = build_config({"grid": {"n": 41}}, [("grid.n", 21), ("opinion.sigma2", 0.3)])
        assert cfg.grid.n == 21 and cfg.opinion.sigma2 == 0.3
        with pytest.raises(ConfigError):
            parse_override("grid.n")


class TestOutput:
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
    def test_format_round_trip(self, xs):
        for x in xs:
            assert float(format_value(x)) == x

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(7, 3)) * 10.0 ** rng.integers(-300, 300, (7, 3))
        write_csv(tmp_path / "a.csv", ["x", "y", "z"], data)
        header, back = read_csv(tmp_path / "a.csv")
        assert header == ["x", "y", "z"]
        nptest.assert_array_equal(back, data)

    def test_snapshot_round_trip(self, tmp_path):
        problem = build_problem(build_config(SMALL_OPINION))
        header, table = snapshot_table(problem)
        assert header == ["v", "f0", "f1", "f2", "mean", "variance", "band"]
        write_csv(tmp_path / "s.csv", header, table)
        nptest.assert_array_equal(read_csv(tmp_path / "s.csv")[1], table)

    def test_json_nonfinite(self, tmp_path):
        write_json(tmp_path / "m.json", {"a": np.float64(np.nan), "b": np.arange(2)})
        assert json.loads((tmp_path / "m.json").read_text()) == {"a": "nan", "b": [0, 1]}


class TestRunCommand:
    def test_opinion_run(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {**SMALL_OPINION, "output": {"snapshot_times": [0.0, 0.25]}})
        out = tmp_path / "out"
        assert main(["run", str(cfg), "--out", str(out)]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["metadata.json", "series.csv", "snapshot_t0.25.csv", "snapshot_t0.5.csv", "snapshot_t0.csv"]
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["dt"] <= meta["positivity_bounds"]["explicit"]
        assert meta["config"]["grid"]["n"] == 11 and meta["wall_time_s"] >= 0
        header, series = read_csv(out / "series.csv")
        for col in ("t", "mass_0", "mass_2", "l2_norm", "H_0", "I_0", "valid_0", "H_1"):
            assert col in header
        assert series[-1, header.index("t")] == pytest.approx(0.5)
        m0 = series[:, header.index("mass_0")]
        assert np.max(np.abs(m0 - m0[0])) <= 1e-12

    def test_reference_column(self, tmp_path):
        cfg = write_cfg(tmp_path, {**SMALL_OPINION, "opinion": {"confidence": 2.0}})
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
        header, _ = read_csv(tmp_path / "o" / "series.csv")
        assert "l1_error_0" in header and "l1_error_1" in header

    def test_override_flag(self, tmp_path):
        cfg = write_cfg(tmp_path, SMALL_OPINION)
        assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--grid.n=13"]) == 0
        meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
        assert meta["config"]["grid"]["n"] == 13

    def test_swarming_run(self, tmp_path):
        data = {"problem": "swarming2d", "grid": {"n": 9}, "gpc": {"order": 2}, "time": {"t_end": 0.5}}
        assert main(["run", str(write_cfg(tmp_path, data)), "--out", str(tmp_path / "o")]) == 0
        header, table = read_csv(tmp_path / "o" / "snapshot_t0.5.csv")
        assert header[:2] == ["v_x", "v_y"] and header[-3:] == ["mean", "variance", "band"]
        assert table.shape == (81, 8)

    def test_bit_reproducible(self, tmp_path):
        cfg = write_cfg(tmp_path, SMALL_OPINION)
        for d in ("a", "b"):
            assert main(["run", str(cfg), "--out", str(tmp_path / d)]) == 0
        for name in ("series.csv", "snapshot_t0.5.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"opinion": {"sigma2": -1}})
        assert main(["run", str(cfg)]) == 2
        assert "opinion.sigma2" in capsys.readouterr().err

    def test_run_error_names_step(self, tmp_path, capsys):
        data = {"problem": "advected", "time": {"dt_policy": "fixed", "dt": 1.0, "t_end": 2.0}}
        assert main(["run", str(write_cfg(tmp_path, data)), "--out", str(tmp_path / "o")]) == 1
        assert "step 1" in capsys.readouterr().err


class TestConvergeAndEntropy:
    def test_doubling(self):
        check_doubling([21, 41, 81], "node")
        check_doubling([20, 40, 80], "cell")
        with pytest.raises(ValueError, match="refine"):
            check_doubling([21, 41, 80], "node")
        with pytest.raises(ValueError):
            check_doubling([21, 41], "node")

    def test_non_doubling_exit(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SMALL_OPINION)
        assert main(["converge", str(cfg), "--grids", "11,21,30"]) == 1
        assert "refine" in capsys.readouterr().err

    def test_converge_table(self, tmp_path):
        cfg = write_cfg(tmp_path, {**SMALL_OPINION, "time": {"scheme": "si2", "dt_policy": "cfl", "cfl": 0.5}})
        out = tmp_path / "rates.csv"
        rc = main(["converge", str(cfg), "--grids", "11,21,41", "--times", "0.5", "--rules", "2,G", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "rule,time,quantity,grids,e1,e2,order"
        assert len(lines) == 1 + 2 * 2

    def test_entropy_command(self, tmp_path):
        cfg = write_cfg(tmp_path, {**SMALL_OPINION, "entropy": {"grids": [11], "rows": [0]}})
        assert main(["entropy", str(cfg), "--out", str(tmp_path / "e")]) == 0
        summary = json.loads((tmp_path / "e" / "entropy_summary.json").read_text())
        rep = summary["rows"][0]
        assert rep["all_valid"] and rep["nonincreasing"] and rep["production_nonnegative"]
        assert (tmp_path / "e" / "entropy_N11.csv").exists()

    def test_entropy_rejects_advected(self, tmp_path):
        assert main(["entropy", str(write_cfg(tmp_path, {"problem": "advected"}))]) == 1

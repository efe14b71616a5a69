import json
from pathlib import Path

import numpy as np
import pytest

from vacgas.cli import main
from vacgas.grid import GridError, Stretching
from vacgas.harness import (
    ConfigError,
    barrier_corpus,
    build_barrier,
    calibrate_coefficients,
    comparison_corpus,
    convergence_study,
    kelvin_coefficients,
    load_config,
    parse_config,
    run_domain_sweep,
    run_single,
    scaling_coefficients,
)
from vacgas.hopf import verify_barrier
from vacgas.solver import SolverAbort


def _cfg(**overrides):
    raw = {
        "profile": {"family": "Algebraic", "params": [1.0, 4.0]},
        "grid": {"n_cells": 128},
        "domain": {"base_half_width": 10.0, "growth": 2.0, "n_levels": 2},
        "solver": {"t_end": 0.02},
    }
    raw.update(overrides)
    return parse_config(raw)


class TestConfigParsing:
    def test_defaults(self):
        cfg = parse_config({})
        assert cfg.profile_family == "Algebraic"
        assert cfg.stretching is Stretching.SINH
        assert cfg.gas.gamma == 2.0
        assert len(cfg.config_hash) == 64

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"prfile": {}})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"solver": {"dt": 1e-3}})
        with pytest.raises(ConfigError):
            parse_config({"grid": {"cells": 100}})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"solver": {"t_end": -1.0}})
        with pytest.raises(ConfigError):
            parse_config({"grid": {"stretching": "Log"}})
        with pytest.raises(ConfigError):
            parse_config({"profile": {"params": "wide"}})
        with pytest.raises(ConfigError):
            parse_config({"diagnostics": {"probe_band": [1.0]}})
        with pytest.raises(ConfigError):
            parse_config({"profile": {"family": "Algebraic", "params": [1.0, -2.0]}})

    def test_narrow_domain_rejected_before_any_run(self, tmp_path):
        out = tmp_path / "out"
        with pytest.raises(GridError):
            parse_config({"domain": {"base_half_width": 0.4},
                          "output": {"directory": str(out)}})
        assert not out.exists()

    def test_load_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[solver]\nt_end = 0.25\n[grid]\nn_cells = 99\n')
        cfg = load_config(path)
        assert cfg.t_end == 0.25
        assert cfg.n_cells == 99

    def test_load_malformed_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('solver = [unclosed\n')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_hash_depends_on_content(self):
        a = parse_config({"seed": 1})
        b = parse_config({"seed": 2})
        assert a.config_hash != b.config_hash


class TestRunSingle:
    def test_zero_data_report(self):
        cfg = _cfg(fields={"v_amp": 0.0, "t_amp": 0.0})
        report, final, _ = run_single(cfg)
        assert all(e == 0.0 for e in report.energy)
        assert all(e == 0.0 for e in report.step_energies)
        assert all(s == 0.0 for s in report.sup_abs_s)
        assert np.array_equal(final.J, np.ones_like(final.J))

    def test_deterministic_outputs(self, tmp_path):
        cfg = _cfg(output={"directory": str(tmp_path / "out")})
        report_path = tmp_path / "out" / "level0" / "report.json"
        outs = []
        for _ in range(2):
            run_single(cfg)
            outs.append(report_path.read_bytes())
        assert outs[0] == outs[1]

    def test_no_partial_files_left(self, tmp_path):
        cfg = _cfg(output={"directory": str(tmp_path / "out")})
        run_single(cfg)
        leftovers = list((tmp_path / "out").rglob("*.tmp"))
        assert leftovers == []
        files = {p.name for p in (tmp_path / "out" / "level0").iterdir()}
        assert {"report.json", "series.csv", "steps.csv"} <= files

    def test_report_carries_config_hash(self, tmp_path):
        cfg = _cfg(output={"directory": str(tmp_path / "out")})
        report, _, _ = run_single(cfg)
        on_disk = json.loads(
            (tmp_path / "out" / "level0" / "report.json").read_text())
        assert report.config_hash == cfg.config_hash == on_disk["config_hash"]

    def test_snapshot_rows_aligned(self):
        cfg = _cfg(solver={"t_end": 0.02, "snapshot_times": [0.01]})
        report, _, snaps = run_single(cfg)
        assert report.times == [0.0, 0.01, 0.02]
        for series in (report.energy, report.sup_abs_s, report.min_j,
                       report.kelvin_slope0, report.monitored_norms):
            assert len(series) == 3


class TestDomainSweep:
    def test_levels_and_overlap(self):
        cfg = _cfg()
        sweep, reports = run_domain_sweep(cfg)
        assert len(sweep.levels) == 2
        assert len(reports) == 2
        assert len(sweep.overlap_rel_diff) == 1
        assert np.isfinite(sweep.overlap_rel_diff[0])
        # interior overlap agreement within the truncation-pollution tolerance
        assert sweep.overlap_rel_diff[0] < 0.25

    def test_sweep_output_written(self, tmp_path):
        cfg = _cfg(output={"directory": str(tmp_path / "sw")})
        sweep, _ = run_domain_sweep(cfg)
        data = json.loads((tmp_path / "sw" / "sweep.json").read_text())
        assert data["levels"][0]["level"] == 0
        assert data["config_hash"] == cfg.config_hash


class TestConvergenceStudy:
    def test_rejects_too_few_refinements(self):
        with pytest.raises(ConfigError):
            convergence_study(_cfg(), refinements=2)

    def test_orders_in_expected_ranges(self):
        cfg = parse_config({
            "profile": {"family": "Algebraic", "params": [1.0, 4.0]},
            "grid": {"n_cells": 64},
            "domain": {"base_half_width": 8.0},
            "solver": {"t_end": 0.05, "dt_init": 2e-4, "dt_max": 2e-4},
        })
        rep = convergence_study(cfg, refinements=3)
        assert rep.spatial_monotone and rep.temporal_monotone
        assert 1.8 <= rep.spatial_orders[-1] <= 2.4
        assert 0.8 <= rep.temporal_orders[-1] <= 1.4


class TestOperatorWiring:
    def _snapshot(self):
        cfg = _cfg(domain={"base_half_width": 20.0, "growth": 2.0, "n_levels": 1},
                   grid={"n_cells": 256}, solver={"t_end": 0.1})
        _, final, _ = run_single(cfg)
        return cfg, final

    def test_kelvin_coefficients_verified(self):
        cfg, final = self._snapshot()
        profile = cfg.density_profile()
        fns = kelvin_coefficients(final, cfg.gas, profile, n_t=5.0)
        geom = {"p0": (0.05, 0.1), "r": 0.05, "p_star": (0.0, 0.1),
                "delta_star": 0.005}
        coeffs = calibrate_coefficients(*fns, geom)
        spec = build_barrier(coeffs, **geom)
        assert verify_barrier(coeffs, spec).passed

    def test_scaling_coefficients_verified(self):
        cfg, final = self._snapshot()
        profile = cfg.density_profile()
        fns = scaling_coefficients(final, cfg.gas, profile, beta=1.0, m_t=0.5)
        geom = {"p0": (0.05, 0.1), "r": 0.05, "p_star": (0.0, 0.1),
                "delta_star": 0.005}
        coeffs = calibrate_coefficients(*fns, geom)
        spec = build_barrier(coeffs, **geom)
        assert verify_barrier(coeffs, spec).passed


class TestRandomCorpora:
    def test_barrier_corpus_reproducible(self):
        a = barrier_corpus(10, seed=42)
        b = barrier_corpus(10, seed=42)
        assert [v.worst_value for v in a] == [v.worst_value for v in b]
        assert all(v.passed for v in a)

    def test_comparison_corpus_all_hold(self):
        results = comparison_corpus(25, seed=3)
        assert all(r.holds for r in results)
        assert all(r.min_value > 0 for r in results)


class TestCli:
    def test_run_and_summarize(self, tmp_path, capsys):
        path = tmp_path / "c.toml"
        path.write_text(
            '[grid]\nn_cells = 96\n'
            '[domain]\nbase_half_width = 8.0\n'
            '[solver]\nt_end = 0.01\n'
            f'[output]\ndirectory = "{tmp_path / "out"}"\n')
        assert main(["run", "--config", str(path), "--check"]) == 0
        assert main(["report", "summarize",
                     str(tmp_path / "out" / "level0" / "report.json")]) == 0
        out = capsys.readouterr().out
        assert "energy" in out

    def test_missing_config_is_validation_error(self):
        assert main(["run", "--config", "/definitely/not/here.toml"]) == 1

    def test_bad_config_is_validation_error(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[grid]\nwrong_key = 3\n')
        assert main(["run", "--config", str(path)]) == 1

    def test_hopf_verify_constant(self):
        assert main(["hopf", "verify", "--preset", "constant", "--check"]) == 0

    def test_hopf_blunt_barrier_check_fails(self):
        assert main(["hopf", "verify", "--preset", "constant",
                     "--zeta-factor", "0.01", "--check"]) == 3

    def test_hopf_corpus(self):
        assert main(["hopf", "corpus", "--count", "10", "--check"]) == 0
        assert main(["hopf", "corpus", "--mode", "comparison",
                     "--count", "10", "--check"]) == 0

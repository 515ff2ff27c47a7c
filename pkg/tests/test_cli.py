import json
from pathlib import Path

import numpy as np
import pytest

from spintomo import (
    EMFieldConfig,
    PropagatorConfig,
    SpinorDensity,
    evolve_oracle,
    evolve_wigner_vector,
    spin_coherent_state,
    to_vector,
)
from spintomo.cli import emit_plot_data, load_config, main
from spintomo.errors import ConfigError


def read_report(out_dir):
    return json.loads((Path(out_dir) / "report.json").read_text())


class TestConfig:
    def test_defaults_fill_in(self):
        cfg = load_config({}, "precess")
        assert cfg["run"]["periods"] == 10.0
        assert cfg["field"]["b"] == [1.0, 0.0, 0.0]

    def test_unknown_top_key(self):
        with pytest.raises(ConfigError, match="bogus"):
            load_config({"bogus": 1}, "precess")

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="run.extra"):
            load_config({"run": {"extra": 2}}, "precess")

    def test_scenario_mismatch(self):
        with pytest.raises(ConfigError, match="scenario"):
            load_config({"scenario": "precess"}, "roundtrip")

    def test_non_finite_rejected(self):
        with pytest.raises(ConfigError, match="grid.length"):
            load_config({"grid": {"length": float("nan")}}, "precess")


class TestScenarios:
    def test_audit_frame(self, tmp_path):
        rc = main(["audit-frame", "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = read_report(tmp_path / "o")
        assert rep["pass"] is True
        assert rep["measurements"]["duality_residual"] < 1e-12
        assert (tmp_path / "o" / "frame.json").exists()
        assert (tmp_path / "o" / "quantizer_diff.csv").exists()

    def test_audit_random_frame(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"run": {"frame": "random", "spin": 0.5}}))
        rc = main(["audit-frame", "--config", str(cfg), "--out", str(tmp_path / "o"),
                   "--seed", "3"])
        assert rc == 0

    def test_precess(self, tmp_path):
        rc = main(["precess", "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = read_report(tmp_path / "o")
        assert rep["measurements"]["freq_rel_err"] < 1e-6
        assert rep["measurements"]["s_matrix_vs_oracle"] < 1e-8
        weights = (tmp_path / "o" / "precess_weights.csv").read_text().splitlines()
        assert weights[0] == "t,series,value"

    def test_wavepacket(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "grid": {"n": 64},
            "run": {"t_final": 1.0, "n_steps": 10000, "save_every": 2500}}))
        rc = main(["wavepacket", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = read_report(tmp_path / "o")
        assert rep["gates"]["energy_rel_drift"]["pass"]
        assert (tmp_path / "o" / "conserved.csv").exists()
        assert (tmp_path / "o" / "norm_sums.csv").exists()

    def test_roundtrip_wigner_only(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"run": {"route": "wigner"}}))
        rc = main(["roundtrip", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = read_report(tmp_path / "o")
        assert rep["measurements"]["wigner_block_err"] < 1e-10

    def test_residual_single_representation(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "grid": {"n": 64},
            "run": {"representations": ["wigner"], "n": 64, "n_frames": 4,
                    "dt_frame": 0.04, "substeps": 6}}))
        rc = main(["residual", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = read_report(tmp_path / "o")
        assert 3.0 <= rep["measurements"]["wigner"]["ratio_max"] <= 5.0
        assert (tmp_path / "o" / "residual_convergence.csv").exists()

    def test_exit_codes_contract(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["precess", "--config", str(bad), "--out", str(tmp_path / "o1")]) == 2
        unknown = tmp_path / "unknown.json"
        unknown.write_text(json.dumps({"run": {"nope": 1}}))
        assert main(["precess", "--config", str(unknown), "--out", str(tmp_path / "o2")]) == 2
        # an unreachable tolerance forces a physics-gate failure
        impossible = tmp_path / "imp.json"
        impossible.write_text(json.dumps({"tolerances": {"freq_rel_err": 1e-30}}))
        assert main(["precess", "--config", str(impossible), "--out", str(tmp_path / "o3")]) == 1
        rep = read_report(tmp_path / "o3")
        assert rep["first_failed_gate"] == "freq_rel_err"

    def test_tolerance_scale_loosens_gate(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tolerances": {"freq_rel_err": 1e-12}}))
        assert main(["precess", "--config", str(cfg), "--out", str(tmp_path / "o1")]) == 1
        assert main(["precess", "--config", str(cfg), "--out", str(tmp_path / "o2"),
                     "--tolerance-scale", "1e6"]) == 0

    def test_reports_byte_identical(self, tmp_path):
        main(["precess", "--out", str(tmp_path / "a"), "--seed", "7"])
        main(["precess", "--out", str(tmp_path / "b"), "--seed", "7"])
        assert ((tmp_path / "a" / "report.json").read_bytes()
                == (tmp_path / "b" / "report.json").read_bytes())
        assert ((tmp_path / "a" / "precess_weights.csv").read_bytes()
                == (tmp_path / "b" / "precess_weights.csv").read_bytes())


@pytest.fixture(scope="module")
def trajectories(frame, grid64):
    fld = EMFieldConfig(phi=(0, 0, 0.5), b_field=[0, 0, 1.0], kappa=1.0, spin=1.0)
    rho0 = SpinorDensity.from_pure(spin_coherent_state(grid64, [1, 0, 0]), grid64)
    v0 = to_vector(rho0, frame, "wigner")
    vec = evolve_wigner_vector(v0, fld, PropagatorConfig(
        dt=0.05, n_steps=8, scheme="wigner-spectral", save_every=2))
    orc = evolve_oracle(rho0, fld, PropagatorConfig(dt=0.05, n_steps=8, save_every=2))
    return vec, orc


class TestEmitPlotData:
    def test_component_integrals_tidy(self, trajectories, tmp_path):
        vec, _ = trajectories
        emit_plot_data(vec, "component-integrals", tmp_path / "ci.csv")
        lines = (tmp_path / "ci.csv").read_text().splitlines()
        assert lines[0] == "t,series,value"
        assert len(lines) == 1 + 9 * len(vec.frames)

    def test_component_integrals_constant_under_bz(self, trajectories):
        # the three z-axis weights are stationary for a field along z
        vec, _ = trajectories
        series = np.stack([f.component_integrals() for f in vec.frames])
        assert np.max(np.abs(series[:, :3] - series[0, :3])) < 1e-9
        assert series[:, 3].max() - series[:, 3].min() > 1e-3

    def test_conserved_oracle(self, trajectories, tmp_path):
        _, orc = trajectories
        emit_plot_data(orc, "conserved", tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "t,series,value"
        energies = [float(l.split(",")[2]) for l in lines[1:] if ",energy," in l]
        assert len(energies) == 5
        assert max(energies) - min(energies) < 1e-3 * abs(energies[0])

    def test_slice(self, trajectories, tmp_path):
        vec, _ = trajectories
        emit_plot_data(vec, "slice", tmp_path / "s.csv")
        header = (tmp_path / "s.csv").read_text().splitlines()[0]
        assert header == "t,series,X,value"

    def test_empty_trajectory_rejected(self, trajectories, tmp_path):
        vec, _ = trajectories
        empty = type(vec)(times=np.array([]), frames=[], field=vec.field,
                          scheme=vec.scheme, norm_sums=np.array([]))
        with pytest.raises(ValueError, match="empty"):
            emit_plot_data(empty, "component-integrals", tmp_path / "e.csv")

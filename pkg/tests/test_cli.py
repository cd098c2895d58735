import json
import math

import numpy as np
import pytest

from thermocontact import ExtendedPoint, SampledPath, path_from_csv, path_to_csv, save_system
from thermocontact import AffineHamiltonian, MicrostateSpace
from thermocontact.cli import dispatch


@pytest.fixture()
def system_file(tmp_path):
    sp = MicrostateSpace(("a", "b", "c"), [1.0, 1.0, 1.0])
    h = AffineHamiltonian([0.0, 0.5, 1.0], [[1.0, 0.0, -1.0]])
    dest = tmp_path / "system.json"
    save_system(sp, h, str(dest))
    return dest


class TestChordCommand:
    def test_gas_reference_run(self, tmp_path, capsys):
        code = dispatch(
            ["chord", "gas", "--t0", "1", "--t1", "5", "--c", "2", "--out-dir", str(tmp_path)]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "P0=0.5" in out and "v=2" in out
        for name in (
            "fig1_family_cold.csv",
            "fig1_family_hot.csv",
            "fig1_chord.csv",
            "fig3_difference_front.csv",
            "fig3_zero_section.csv",
            "fig3_chord.csv",
            "chords_gas.csv",
        ):
            assert (tmp_path / name).exists()

    def test_fig1_curves_follow_state_equation(self, tmp_path):
        dispatch(["chord", "gas", "--t0", "1", "--t1", "5", "--c", "2", "--out-dir", str(tmp_path)])
        rows = np.loadtxt(tmp_path / "fig1_family_cold.csv", delimiter=",", skiprows=1)
        q, p = rows[:, 0], rows[:, 1]
        assert np.abs(p - 1.0 / (-q)).max() < 1e-12
        rows = np.loadtxt(tmp_path / "fig1_family_hot.csv", delimiter=",", skiprows=1)
        q, p = rows[:, 0], rows[:, 1]
        assert np.abs(p - 5.0 / (-q + 2.0)).max() < 1e-12
        marker = np.loadtxt(tmp_path / "fig1_chord.csv", delimiter=",", skiprows=1)
        assert marker[0] == -0.5 and marker[1] == 2.0

    def test_fig3_front_peaks_at_chord(self, tmp_path):
        dispatch(["chord", "gas", "--t0", "1", "--t1", "5", "--c", "2", "--out-dir", str(tmp_path)])
        rows = np.loadtxt(tmp_path / "fig3_difference_front.csv", delimiter=",", skiprows=1)
        assert abs(rows[np.argmax(rows[:, 1]), 0] + 0.5) < 0.05
        chord = np.loadtxt(tmp_path / "fig3_chord.csv", delimiter=",", skiprows=1)
        assert abs(chord[1, 1] - 4 * math.log(2)) < 1e-12

    def test_cw_reference_run(self, tmp_path, capsys):
        code = dispatch(
            [
                "chord", "cw",
                "--t0", "2", "--t1", "3.3333333333333335", "--c", "1", "--b", "1",
                "--out-dir", str(tmp_path),
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "Q*=1.5" in out
        assert "p=0.635" in out
        assert (tmp_path / "fig4_difference_front.csv").exists()
        sample = np.loadtxt(tmp_path / "cw_legendrian.csv", delimiter=",", skiprows=1)
        assert sample.shape[1] == 4  # q, p, z, S

    def test_degenerate_jump_is_numerical_failure(self, tmp_path):
        code = dispatch(
            ["chord", "gas", "--t0", "1", "--t1", "5", "--c", "4", "--out-dir", str(tmp_path)]
        )
        assert code == 2

    def test_missing_required_flag(self, tmp_path):
        code = dispatch(["chord", "gas", "--t0", "1", "--out-dir", str(tmp_path)])
        assert code == 1

    def test_json_format(self, tmp_path):
        code = dispatch(
            [
                "chord", "gas",
                "--t0", "1", "--t1", "5", "--c", "2",
                "--out-dir", str(tmp_path), "--format", "json",
            ]
        )
        assert code == 0
        doc = json.loads((tmp_path / "chords_gas.json").read_text())
        assert doc[0]["direction"] == 1


class TestConfigHandling:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t0": 1.0, "t1": 5.0, "c": 2.0}))
        code = dispatch(["chord", "gas", "--config", str(cfg), "--out-dir", str(tmp_path)])
        assert code == 0

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t0": 1.0, "t1": 5.0, "c": 8.0}))
        code = dispatch(
            ["chord", "gas", "--config", str(cfg), "--c", "2", "--out-dir", str(tmp_path)]
        )
        assert code == 0
        assert "v=2" in capsys.readouterr().out

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t0": 1.0, "bogus": 1}))
        assert dispatch(["chord", "gas", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1

    def test_format_via_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t0": 1.0, "t1": 5.0, "c": 2.0, "format": "json"}))
        assert dispatch(["chord", "gas", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        assert (tmp_path / "chords_gas.json").exists()

    def test_config_must_be_object(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2, 3]")
        assert dispatch(["chord", "gas", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1

    def test_no_output_on_validation_failure(self, tmp_path):
        out = tmp_path / "fresh"
        code = dispatch(
            ["chord", "gas", "--t0", "5", "--t1", "1", "--c", "2", "--out-dir", str(out)]
        )
        assert code == 1
        assert not any(out.glob("*.csv"))

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("THERMO_OUT_DIR", str(tmp_path / "envout"))
        code = dispatch(["chord", "gas", "--t0", "1", "--t1", "5", "--c", "2"])
        assert code == 0
        assert (tmp_path / "envout" / "chords_gas.csv").exists()


class TestDeterminism:
    def test_identical_config_gives_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert (
                dispatch(
                    ["chord", "gas", "--t0", "1", "--t1", "5", "--c", "2", "--out-dir", str(out)]
                )
                == 0
            )
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()


class TestOtherCommands:
    def test_gibbs(self, tmp_path, system_file, capsys):
        code = dispatch(
            ["gibbs", "--system", str(system_file), "--T", "1.5", "--q", "0.3", "--out-dir", str(tmp_path)]
        )
        assert code == 0
        assert "log_z=" in capsys.readouterr().out
        doc = json.loads((tmp_path / "gibbs_point.json").read_text())
        assert set(doc) == {"log_z", "z", "S", "T", "p", "q"}

    def test_gibbs_dimension_mismatch(self, tmp_path, system_file):
        code = dispatch(
            ["gibbs", "--system", str(system_file), "--T", "1.5", "--q", "0.3,0.4", "--out-dir", str(tmp_path)]
        )
        assert code == 1

    def test_missing_input_files_are_validation_errors(self, tmp_path):
        code = dispatch(
            ["gibbs", "--system", str(tmp_path / "nope.json"), "--T", "1.0", "--q", "0", "--out-dir", str(tmp_path)]
        )
        assert code == 1
        code = dispatch(
            ["reduce", "--input", str(tmp_path / "nope.csv"), "--k", "1", "--out-dir", str(tmp_path)]
        )
        assert code == 1

    def test_relax(self, tmp_path, system_file, capsys):
        code = dispatch(
            [
                "relax",
                "--system", str(system_file),
                "--q", "0.2",
                "--T0", "1.0", "--T1", "1.5", "--ramp", "2.0",
                "--t-end", "10", "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "relax_manifest.json").read_text())
        assert manifest["terminal_tv_to_gibbs"] < 1e-6
        assert manifest["min_form_value"] > -1e-8
        path = path_from_csv(str(tmp_path / "relax_path.csv"))
        assert path.kind == "reduced"

    def test_relax_with_density_file(self, tmp_path, system_file):
        from thermocontact import Density, densities_to_csv

        rho_file = tmp_path / "rho0.csv"
        densities_to_csv([Density([0.6, 0.3, 0.1])], str(rho_file))
        code = dispatch(
            [
                "relax",
                "--system", str(system_file),
                "--q", "0.0",
                "--T0", "1.0",
                "--rho0", str(rho_file),
                "--t-end", "8",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "relax_manifest.json").read_text())
        assert manifest["terminal_tv_to_gibbs"] < 1e-6

    def test_isotopy(self, tmp_path, capsys):
        code = dispatch(
            [
                "isotopy", "gas",
                "--T0", "1", "--T1", "5", "--bg0", "0", "--bg1", "2",
                "--x-lo", "-2.5", "--x-hi", "-0.5", "--n-x", "3",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "isotopy_manifest.json").read_text())
        assert len(manifest["paths"]) == 3
        assert manifest["legendrian_residual"] < 1e-8
        for entry in manifest["paths"]:
            assert (tmp_path / entry["file"]).exists()
            assert set(entry["report"]) == {"min_form_value", "violations", "verdict"}

    def test_isotopy_branch_loss_is_numerical_failure(self, tmp_path):
        code = dispatch(
            [
                "isotopy", "cw",
                "--T0", "1", "--T1", "2",
                "--x-lo", "-0.5", "--x-hi", "-0.5", "--n-x", "1",
                "--b", "1.2", "--out-dir", str(tmp_path),
            ]
        )
        assert code == 2

    def test_stirling(self, tmp_path, capsys):
        code = dispatch(
            [
                "stirling",
                "--t-cold", "1", "--t-hot", "5",
                "--v-min", "1.5", "--v-max", "2",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "stirling_manifest.json").read_text())
        assert manifest["closure_residual"] < 1e-9
        assert abs(manifest["total_delta_G"]) < 1e-9
        names = [seg["name"] for seg in manifest["segments"]]
        assert names == ["isotherm_hot", "cooling_corner", "isotherm_cold", "heating_corner"]
        heat = manifest["segments"][3]
        assert heat["chord"]["q"] == -0.5
        assert heat["form_sign"] == "positive"
        cool = manifest["segments"][1]
        assert cool["temperature_decreasing"] is True
        for seg in manifest["segments"]:
            assert (tmp_path / seg["file"]).exists()

    def test_reduce_roundtrip(self, tmp_path):
        t = np.linspace(0.0, 1.0, 9)
        pts = tuple(
            ExtendedPoint(2.0 * ti, 1.0, 1.0 + ti, [0.5, 0.0], [0.1 * ti, 1.0])
            for ti in t
        )
        src = tmp_path / "ext.csv"
        path_to_csv(SampledPath(t, pts), str(src))
        code = dispatch(
            [
                "reduce",
                "--input", str(src),
                "--k", "1", "--zeroed", "2",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        reduced = path_from_csv(str(tmp_path / "reduced_path.csv"))
        assert reduced.kind == "reduced" and reduced.dimension == 1
        report = json.loads((tmp_path / "reduced_report.json").read_text())
        assert report["verdict"] == "nonnegative"

    def test_reduce_rejects_reduced_input(self, tmp_path):
        from thermocontact import ReducedPoint

        t = np.array([0.0, 1.0])
        pts = tuple(ReducedPoint(ti, [1.0], [0.0]) for ti in t)
        src = tmp_path / "red.csv"
        path_to_csv(SampledPath(t, pts), str(src))
        assert dispatch(["reduce", "--input", str(src), "--k", "1", "--out-dir", str(tmp_path)]) == 1

    def test_verify_subset(self, tmp_path, capsys):
        code = dispatch(["verify", "--criteria", "1", "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS criterion  1" in out

    def test_unknown_subcommand(self, capsys):
        assert dispatch(["frobnicate"]) == 1

    def test_no_arguments(self):
        assert dispatch([]) == 1

    def test_help_exits_zero(self):
        assert dispatch(["--help"]) == 0

import json
import math

import numpy as np
import pytest

from kreinext.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestClassify:
    def test_self_adjoint(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "classify", "--q", "0", "--r", "1")
        assert code == 0
        payload = json.loads(out)
        assert payload["class"] == "self_adjoint"
        assert payload["theta"] is None
        assert set(payload) == {"class", "theta", "omega", "in_upsilon", "d1", "d2"}

    def test_non_real_spectrum(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "classify", "--q", "1", "--r", "0")
        assert code == 0
        assert json.loads(out)["class"] == "non_real_spectrum"

    def test_c_symmetric_recovery(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "classify",
                               "--q", "-0.6", "--phi", "0", "--gamma", "1")
        payload = json.loads(out)
        assert payload["class"] == "c_symmetric"
        assert payload["theta"] == pytest.approx(2.0, abs=1e-10)
        assert payload["omega"] == pytest.approx(1.0, abs=1e-10)

    def test_u_entries_source(self, capsys):
        entries = json.dumps([[[0.0, 0.0], [1.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0]]])
        code, out, _ = run_cli(capsys, "--json", "classify", "--u-entries", entries)
        assert code == 0
        assert json.loads(out)["class"] == "self_adjoint"

    def test_degrees_flag(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "--degrees", "classify",
                               "--q", "-0.6", "--phi", "0", "--gamma", "180")
        payload = json.loads(out)
        assert payload["omega"] == pytest.approx(math.pi, abs=1e-10)

    def test_two_sources_rejected(self, capsys):
        code, _, err = run_cli(capsys, "classify", "--q", "0.5", "--theta", "2.0")
        assert code == 2
        assert "parameter source" in err


class TestBuildC:
    def test_theta_one_is_j(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "build-c", "--theta", "1")
        payload = json.loads(out)
        c = np.array([[complex(re, im) for re, im in row] for row in payload["c_matrix"]])
        assert np.allclose(c, np.diag([1, -1, 1, -1]))
        assert all(v < 1e-12 for v in payload["residuals"].values())

    def test_norm_two(self, capsys):
        _, out, _ = run_cli(capsys, "--json", "build-c", "--theta", "2")
        payload = json.loads(out)
        assert payload["norm"] == pytest.approx(2.0, abs=1e-12)
        assert payload["jc_min_eigenvalue"] > 0

    def test_rejects_bad_theta(self, capsys):
        code, _, err = run_cli(capsys, "build-c", "--theta", "-3")
        assert code == 2


class TestTMatrix:
    def test_diagonal_case(self, capsys):
        _, out, _ = run_cli(capsys, "--json", "t-matrix", "--theta", "1",
                            "--phi", "0", "--xi", "0")
        payload = json.loads(out)
        t = np.array([[complex(*v) for v in row] for row in payload["t_closed_form"]])
        assert abs(t[0, 1]) == 0 and abs(t[1, 0]) == 0
        assert payload["max_difference"] < 1e-10

    def test_conjugation_structure(self, capsys):
        _, out, _ = run_cli(capsys, "--json", "t-matrix", "--theta", "2.7",
                            "--omega", "1.1", "--phi", "0.5", "--xi", "2.0")
        payload = json.loads(out)
        t = np.array([[complex(*v) for v in row] for row in payload["t_closed_form"]])
        assert abs(t[1, 0] + np.conj(t[0, 1])) < 1e-12
        assert payload["max_difference"] < 1e-10

    def test_singular_delta_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "t-matrix", "--theta", "1",
                               "--phi", str(math.pi / 2), "--xi", str(math.pi / 2))
        assert code == 3
        assert "singular" in err.lower()


class TestSpectrum:
    def test_dirichlet_reference(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "spectrum", "--model", "schrodinger",
                               "--q", "0", "--r", "1",
                               "--phi", str(math.pi / 2), "--xi", str(math.pi / 2))
        payload = json.loads(out)
        assert payload["essential"] == "[0,inf)"
        assert payload["discrete"] == []

    def test_family_parameters(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "spectrum", "--model", "schrodinger",
                               "--theta", "2", "--omega", "0.5", "--phi", "0", "--xi", "0")
        payload = json.loads(out)
        assert len(payload["discrete"]) == 1
        assert payload["discrete"][0]["z"] == pytest.approx(-0.5, abs=1e-9)

    def test_coupling_source(self, capsys):
        coupling = json.dumps([[[-2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]])
        code, out, _ = run_cli(capsys, "--json", "spectrum", "--model", "schrodinger",
                               "--coupling", coupling)
        payload = json.loads(out)
        assert payload["discrete"][0]["z"] == pytest.approx(-1.0, abs=1e-9)

    def test_dirac_reference(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "spectrum", "--model", "dirac",
                               "--q", "0", "--r", "1", "--phi", str(math.pi / 2),
                               "--xi", str(math.pi / 2), "--light-speed", "2")
        payload = json.loads(out)
        assert payload["discrete"] == []
        assert payload["essential_intervals"] == [[None, -2.0], [2.0, None]]

    def test_missing_model_rejected(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--theta", "2")
        assert code == 2


class TestSweep:
    def test_omega_sweep_constant_columns(self, tmp_path, capsys):
        csv = tmp_path / "sweep.csv"
        code, _, _ = run_cli(capsys, "--csv", str(csv), "spectrum",
                             "--model", "schrodinger", "--theta", "2", "--phi", "0",
                             "--xi", "0", "--sweep", "omega", "0", "6.28", "5")
        assert code == 0
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == "omega,eigenvalue_index,z"
        zs = [float(ln.split(",")[2]) for ln in lines[1:]]
        assert len(zs) == 5
        assert max(zs) - min(zs) < 1e-10

    def test_csv_precision(self, tmp_path, capsys):
        csv = tmp_path / "sweep.csv"
        run_cli(capsys, "--csv", str(csv), "spectrum", "--model", "schrodinger",
                "--theta", "2", "--phi", "0", "--xi", "0",
                "--sweep", "xi", "0", "0.4", "3")
        for ln in csv.read_text().strip().splitlines()[1:]:
            z = ln.split(",")[2]
            assert len(z.split(".")[-1].rstrip("0")) >= 8  # 15 significant digits kept

    def test_plot_rendered(self, tmp_path, capsys):
        csv, png = tmp_path / "s.csv", tmp_path / "s.png"
        code, _, _ = run_cli(capsys, "--csv", str(csv), "--plot", str(png), "spectrum",
                             "--model", "schrodinger", "--theta", "2", "--phi", "0",
                             "--xi", "0", "--sweep", "theta", "1.5", "4", "4")
        assert code == 0
        assert png.exists() and png.stat().st_size > 1000

    def test_bad_sweep_param(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--model", "schrodinger",
                               "--theta", "2", "--phi", "0", "--xi", "0",
                               "--sweep", "bogus", "0", "1", "3")
        assert code == 2


class TestResolvent:
    def test_csv_and_summary(self, tmp_path, capsys):
        csv = tmp_path / "res.csv"
        code, out, _ = run_cli(capsys, "--json", "--csv", str(csv),
                               "--grid-n", "400", "--grid-L", "20",
                               "resolvent", "--theta", "2", "--omega", "0.7",
                               "--phi", "0.4", "--xi", "0.9",
                               "--z-re", "1", "--z-im", "1")
        assert code == 0
        payload = json.loads(out)
        assert payload["bc_residual"] < 1e-6
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == "x,re,im"
        assert len(lines) == 801

    def test_plot_rendered(self, tmp_path, capsys):
        png = tmp_path / "res.png"
        code, _, _ = run_cli(capsys, "--plot", str(png), "--grid-n", "300",
                             "--grid-L", "20", "resolvent", "--theta", "2",
                             "--phi", "0.4", "--xi", "0.9", "--z-re", "-4")
        assert code == 0
        assert png.exists() and png.stat().st_size > 1000

    def test_missing_z_rejected(self, capsys):
        code, _, err = run_cli(capsys, "resolvent", "--theta", "2", "--phi", "0.4",
                               "--xi", "0.9")
        assert code == 2


class TestConfig:
    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": "schrodinger", "theta": 2.0, "phi": 0.0, "xi": 0.0,
            "json": True,
        }))
        code, out, _ = run_cli(capsys, "--config", str(cfg), "spectrum")
        assert code == 0
        assert json.loads(out)["discrete"][0]["z"] == pytest.approx(-0.5, abs=1e-9)
        # flag overrides the config value
        code, out, _ = run_cli(capsys, "--config", str(cfg), "spectrum",
                               "--xi", str(math.pi / 2))
        assert json.loads(out)["discrete"][0]["z"] == pytest.approx(-2.0, abs=1e-8)

    def test_unknown_field_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "schrodinger", "bogus": 1}))
        code, _, err = run_cli(capsys, "--config", str(cfg), "spectrum")
        assert code == 2
        assert "unknown config fields" in err


class TestVerifyCommand:
    def test_fault_injection_fails(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "verify", "--inject-fault")
        assert code == 1
        records = json.loads(out)
        failed = [r for r in records if not r["passed"]]
        assert [r["name"] for r in failed] == ["c_family_algebra"]

    def test_default_battery_passes(self, capsys):
        code, out, _ = run_cli(capsys, "--json", "verify")
        assert code == 0
        records = json.loads(out)
        assert all(r["passed"] for r in records)
        assert {"name", "passed", "residual", "threshold", "detail"} <= set(records[0])

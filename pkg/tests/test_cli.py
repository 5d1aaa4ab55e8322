import json
import subprocess
import sys

import numpy as np
import pytest

from svtkit.blockenc import matrix_to_json
from svtkit.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestPolyCommand:
    def test_sign_poly_json(self, capsys):
        code, out = run_cli(["poly", "--family", "sign", "--delta", "0.2",
                             "--eps", "0.01"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["poly"]["parity"] == "odd"
        assert obj["certificate"]["claimed_error"] == 0.01

    def test_deterministic_output(self, capsys):
        a = run_cli(["poly", "--family", "exp", "--beta", "2.0",
                     "--eps", "1e-5"], capsys)
        b = run_cli(["poly", "--family", "exp", "--beta", "2.0",
                     "--eps", "1e-5"], capsys)
        assert a == b


class TestPhasesCommand:
    def test_sign_phases_residual(self, capsys):
        code, out = run_cli(["phases", "--family", "sign", "--delta", "0.2",
                             "--eps", "1e-4"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["convention"] == "reflection"
        assert obj["reconstruction_residual"] <= 1e-5


class TestEncodeAndSvt:
    def test_encode_dilation(self, tmp_path, capsys):
        a = np.diag([0.5, -0.25])
        mfile = tmp_path / "m.json"
        mfile.write_text(json.dumps(matrix_to_json(a)))
        code, out = run_cli(["encode", "--matrix", str(mfile)], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["alpha"] == 1.0
        assert obj["ancillas"] == 1

    def test_svt_run(self, tmp_path, capsys):
        a = np.diag([0.5, 0.25])
        mfile = tmp_path / "m.json"
        mfile.write_text(json.dumps(matrix_to_json(a)))
        code, poly_out = run_cli(["poly", "--family", "sign", "--delta",
                                  "0.2", "--eps", "0.01"], capsys)
        pfile = tmp_path / "p.json"
        pfile.write_text(poly_out)
        code, out = run_cli(["svt", "--matrix", str(mfile), "--poly",
                             str(pfile), "--tol", "1e-6"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["measured_error_vs_oracle"] <= 1e-6
        assert obj["gate_ledger"]["u_uses"] > 0

    def test_dimension_cap(self, tmp_path, capsys):
        a = np.eye(300) * 0.5
        mfile = tmp_path / "big.json"
        mfile.write_text(json.dumps(matrix_to_json(a)))
        code, out = run_cli(["encode", "--matrix", str(mfile)], capsys)
        assert code == 2


class TestAppsCommand:
    def test_hamsim_report(self, capsys):
        code, out = run_cli(["apps", "hamsim", "--dim", "4", "--t", "3",
                             "--eps", "1e-6", "--robust"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["ledger"]["uses"] <= obj["claimed_bound"]
        assert obj["measured"] <= 1e-6


class TestSweep:
    def test_inverse_degree_monotone(self, capsys):
        code, out = run_cli(["sweep", "--family", "inverse", "--range",
                             "2..16", "--steps", "5", "--eps", "1e-4"],
                            capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "param,degree,claimed_error"
        degrees = [int(l.split(",")[1]) for l in lines[1:]]
        assert degrees == sorted(degrees)

    def test_validation_error_code(self, capsys):
        code, _ = run_cli(["sweep", "--family", "nosuch", "--range", "1..2"],
                          capsys)
        assert code == 2


def test_installed_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "svtkit.cli", "poly", "--family", "window",
         "--n", "6", "--eps", "1e-3"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    obj = json.loads(proc.stdout)
    assert obj["certificate"]["degree"] == 6


class TestSchemas:
    @staticmethod
    def _schema(name):
        import pathlib
        import svtkit
        root = pathlib.Path(svtkit.__file__).parent / "schemas"
        return json.loads((root / name).read_text())

    def test_poly_output_validates(self, capsys):
        import jsonschema
        _, out = run_cli(["poly", "--family", "sign", "--delta", "0.3",
                          "--eps", "0.05"], capsys)
        jsonschema.validate(json.loads(out), self._schema("poly.schema.json"))

    def test_phases_output_validates(self, capsys):
        import jsonschema
        _, out = run_cli(["phases", "--family", "sign", "--delta", "0.3",
                          "--eps", "0.05"], capsys)
        jsonschema.validate(json.loads(out),
                            self._schema("phases.schema.json"))

    def test_encode_output_validates(self, tmp_path, capsys):
        import jsonschema
        a = np.diag([0.5, -0.25])
        mfile = tmp_path / "m.json"
        mfile.write_text(json.dumps(matrix_to_json(a)))
        _, out = run_cli(["encode", "--matrix", str(mfile)], capsys)
        jsonschema.validate(json.loads(out),
                            self._schema("matrix.schema.json"))

    def test_apps_report_validates(self, capsys):
        import jsonschema
        _, out = run_cli(["apps", "pinv", "--dim", "3", "--delta", "0.3",
                          "--eps", "1e-3"], capsys)
        jsonschema.validate(json.loads(out),
                            self._schema("report.schema.json"))

import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from gkfrac import cli

LINEAR_CONFIG = """\
# linear decay problem in weighted coordinates
[problem]
alpha = 0.7
beta = 0.5          # type parameter
rho = 1.5
a = 1.0
x_a = 1.0
f = -x
M = 2.0
k = -0.15           # gamma_w - 1
A = 1.0
ball_radius = 1.0
horizon_h = 1.0

[solver]
N = 256
grading_r = 3.0
tol = 1e-8
max_iter = 40

[output]
format = csv
path = {path}
"""


def write_config(tmp_path, text=None, **overrides):
    out = tmp_path / "series.csv"
    body = (text or LINEAR_CONFIG).format(path=out)
    for key, value in overrides.items():
        body = body.replace(f"{key} = ", f"{key} = REPLACED", 1)
        lines = []
        for line in body.splitlines():
            if line.startswith(f"{key} = REPLACED"):
                lines.append(f"{key} = {value}")
            else:
                lines.append(line)
        body = "\n".join(lines) + "\n"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(body, encoding="utf-8")
    return cfg, out


def load_schema():
    with resources.files("gkfrac.schemas").joinpath("report.schema.json").open() as fh:
        return json.load(fh)


class TestSolveCommand:
    def test_converged_run(self, tmp_path, capsys):
        cfg, out = write_config(tmp_path)
        assert cli.main(["solve", str(cfg)]) == 0
        assert out.exists()
        report = json.loads(cli.report_path_for(out).read_text())
        assert report["converged"] is True
        assert report["residual_sup"] <= 1e-3
        assert set(report.keys()) == {
            "l", "L", "iterations", "final_increment", "residual_sup",
            "apriori_terms", "ratio_sequence", "converged",
        }

    def test_report_validates_against_schema(self, tmp_path):
        cfg, out = write_config(tmp_path)
        cli.main(["solve", str(cfg)])
        report = json.loads(cli.report_path_for(out).read_text())
        jsonschema.validate(report, load_schema())

    def test_byte_identical_outputs(self, tmp_path):
        cfg, out = write_config(tmp_path)
        assert cli.main(["solve", str(cfg)]) == 0
        first_csv = out.read_bytes()
        first_report = cli.report_path_for(out).read_bytes()
        assert cli.main(["solve", str(cfg)]) == 0
        assert out.read_bytes() == first_csv
        assert cli.report_path_for(out).read_bytes() == first_report

    def test_csv_shape_and_precision(self, tmp_path):
        cfg, out = write_config(tmp_path)
        cli.main(["solve", str(cfg)])
        text = out.read_text()
        lines = text.splitlines()
        assert lines[0] == "t,u,w,x"
        assert "\r" not in text
        # gamma_w < 1: unweighted x is blank at u = 0
        first = lines[1].split(",")
        assert first[3] == ""
        assert float(first[1]) == 0.0
        assert float(first[2]) == 1.0  # w starts exactly at x_a
        # 17-significant-digit floats round-trip
        row = lines[100].split(",")
        for cell in row:
            assert cell == cli._fmt(float(cell))

    def test_x_column_present_at_node0_for_type1(self, tmp_path):
        cfg, out = write_config(tmp_path, beta="1.0", k="0.0")
        assert cli.main(["solve", str(cfg)]) == 0
        first = out.read_text().splitlines()[1].split(",")
        assert first[3] != ""

    def test_constant_solution(self, tmp_path):
        cfg, out = write_config(tmp_path, f="0", M="0.0")
        assert cli.main(["solve", str(cfg)]) == 0
        w = [float(line.split(",")[2]) for line in out.read_text().splitlines()[1:]]
        assert all(v == 1.0 for v in w)

    def test_json_series_format(self, tmp_path):
        cfg, out = write_config(tmp_path, format="json")
        assert cli.main(["solve", str(cfg)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc.keys()) == {"t", "u", "w", "x"}
        assert doc["x"][0] is None
        assert doc["w"][0] == 1.0

    def test_emit_iterates(self, tmp_path):
        text = LINEAR_CONFIG + "emit_iterates = true\n"
        cfg, out = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 0
        iterates = cli.iterates_path_for(out)
        assert iterates.exists()
        header = iterates.read_text().splitlines()[0].split(",")
        assert header[0] == "u" and header[1] == "w0"

    def test_emit_bounds_off_empties_arrays(self, tmp_path):
        text = LINEAR_CONFIG + "emit_bounds = false\n"
        cfg, out = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 0
        report = json.loads(cli.report_path_for(out).read_text())
        assert report["apriori_terms"] == []
        assert report["ratio_sequence"] == []
        jsonschema.validate(report, load_schema())


class TestSolveErrors:
    def test_alpha_out_of_range(self, tmp_path, capsys):
        cfg, _ = write_config(tmp_path, alpha="1.5")
        assert cli.main(["solve", str(cfg)]) == 1
        message = capsys.readouterr().err
        assert "between 0 and 1" in message
        assert "line 3" in message

    def test_missing_key(self, tmp_path, capsys):
        text = LINEAR_CONFIG.replace("x_a = 1.0\n", "")
        cfg, _ = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 1
        assert "x_a" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        text = LINEAR_CONFIG + "mystery = 1\n"
        cfg, _ = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "mystery" in err and "line" in err

    def test_unparseable_value(self, tmp_path, capsys):
        cfg, _ = write_config(tmp_path, tol="soon")
        assert cli.main(["solve", str(cfg)]) == 1
        assert "tol" in capsys.readouterr().err

    def test_bad_expression(self, tmp_path, capsys):
        cfg, _ = write_config(tmp_path, f="x +")
        assert cli.main(["solve", str(cfg)]) == 1
        assert "syntax error" in capsys.readouterr().err

    def test_duplicate_key(self, tmp_path, capsys):
        text = LINEAR_CONFIG.replace("rho = 1.5", "rho = 1.5\nrho = 2.0")
        cfg, _ = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 1
        assert "duplicate" in capsys.readouterr().err

    def test_unknown_section(self, tmp_path, capsys):
        text = LINEAR_CONFIG + "[extras]\nfoo = 1\n"
        cfg, _ = write_config(tmp_path, text=text)
        assert cli.main(["solve", str(cfg)]) == 1
        assert "section" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert cli.main(["solve", "/nonexistent/run.cfg"]) == 1

    def test_non_convergence_exit_code(self, tmp_path):
        cfg, out = write_config(tmp_path, max_iter="2", tol="1e-14")
        assert cli.main(["solve", str(cfg)]) == 2
        report = json.loads(cli.report_path_for(out).read_text())
        assert report["converged"] is False


class TestOperatorCommands:
    def run(self, capsys, *argv):
        code = cli.main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out

    def parse_csv(self, out):
        lines = out.strip().splitlines()
        assert lines[0] == "u,value"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        return np.array(rows)

    def test_integral_of_one(self, capsys):
        code, out = self.run(
            capsys, "integral", "--alpha", "0.5", "--expr", "1", "--L", "1", "--N", "512"
        )
        assert code == 0
        rows = self.parse_csv(out)
        assert rows[-1, 0] == 1.0
        assert rows[-1, 1] == pytest.approx(1.1283791670955126, rel=1e-8)

    def test_derivative_annihilates_kernel_power(self, capsys):
        code, out = self.run(
            capsys, "derivative", "--alpha", "0.5", "--expr", "u^(-0.5)",
            "--L", "2", "--N", "1024",
        )
        assert code == 0
        rows = self.parse_csv(out)
        window = rows[:, 0] >= 0.5
        assert np.max(np.abs(rows[window, 1])) <= 1e-2

    def test_generalized_type0_matches_derivative_byte_for_byte(self, capsys):
        flags = ["--alpha", "0.5", "--expr", "u^2", "--L", "1", "--N", "256", "--r", "3"]
        code_d, out_d = self.run(capsys, "derivative", *flags)
        code_g, out_g = self.run(capsys, "generalized", "--beta", "0", *flags)
        assert code_d == code_g == 0
        assert out_g == out_d

    def test_generalized_type1_matches_integral_of_derivative(self, capsys):
        code, out = self.run(
            capsys, "generalized", "--beta", "1", "--alpha", "0.5",
            "--expr", "u", "--L", "1", "--N", "1024",
        )
        assert code == 0
        rows = self.parse_csv(out)
        u = rows[:, 0]
        exact = u**0.5 / math.gamma(1.5)
        window = u >= 0.05
        err = np.max(np.abs(rows[window, 1] - exact[window]))
        assert err <= 1e-3 * np.max(exact)

    def test_integral_accepts_order_one(self, capsys):
        code, out = self.run(
            capsys, "integral", "--alpha", "1", "--expr", "1", "--L", "1", "--N", "64"
        )
        assert code == 0
        rows = self.parse_csv(out)
        assert rows[-1, 1] == pytest.approx(1.0, rel=1e-12)

    def test_derivative_rejects_order_one(self, capsys):
        code = cli.main(["derivative", "--alpha", "1", "--expr", "1", "--L", "1"])
        assert code == 1

    def test_bad_flag_exits_one(self, capsys):
        assert cli.main(["integral", "--badflag", "1"]) == 1

    def test_bad_expression_exits_one(self, capsys):
        assert cli.main(["integral", "--alpha", "0.5", "--expr", "u +", "--L", "1"]) == 1

    def test_x_not_available_in_operator_expressions(self, capsys):
        code = cli.main(["integral", "--alpha", "0.5", "--expr", "x", "--L", "1"])
        assert code == 1

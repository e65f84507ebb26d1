import json

import pytest

from invparam import cli
from invparam.report import EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, EXIT_USAGE, CaseResult, SuiteReport, merge
from invparam.suites import CheckFileError, check_suite, read_check_file
from invparam.symcore.zero import ZeroVerdict

VORT = """[equation]
left = zeta_t + psi_x*zeta_y - psi_y*zeta_x
principal = psi_tyy
"""


def _report(*verdicts):
    return SuiteReport("demo", [CaseResult("c%d" % i, "g", v) for i, v in enumerate(verdicts)])


class TestReport:
    def test_status_and_exit(self):
        assert _report("symbolic-zero").exit_code == EXIT_PASS
        assert _report("symbolic-zero", "numeric-zero").exit_code == EXIT_NUMERIC
        assert _report("numeric-zero", "nonzero").exit_code == EXIT_FAIL
        assert _report("error").status == "fail"

    def test_unknown_verdict(self):
        with pytest.raises(ValueError):
            CaseResult("c", "g", "maybe")

    def test_json_round_trip(self):
        rep = _report("symbolic-zero", "numeric-zero", "nonzero")
        rep.cases[2].detail = "residual x"
        back = SuiteReport.from_json(rep.to_json())
        assert back == rep
        assert json.loads(rep.to_json())["status"] == "fail"

    def test_text(self):
        rep = _report("symbolic-zero", "numeric-zero")
        rep.cases[0].generator = "G" * 80
        lines = rep.to_text().splitlines()
        assert lines[0] == "== demo =="
        assert lines[2].startswith("*")
        assert "..." in lines[1] and "G" * 80 not in lines[1]
        assert lines[3].startswith("PASS-NUMERIC: 2 cases, 1 symbolic-zero, 1 numeric-zero")

    def test_from_verdict(self):
        c = CaseResult.from_verdict("c", "g", ZeroVerdict("UnknownSymbolic", (1e-40,), "numeric"))
        assert c.verdict == "numeric-zero" and c.detail == "numeric"

    def test_merge(self):
        m = merge("all", [_report("symbolic-zero"), _report("nonzero")])
        assert [c.case for c in m.cases] == ["demo/c0", "demo/c0"] and m.status == "fail"


class TestCheckFile:
    def test_parse_sections(self):
        cp = read_check_file(VORT + "[algebra]\nnames = g0, j\n")
        assert cp.sections() == ["equation", "algebra"]

    def test_unknown_section(self):
        with pytest.raises(CheckFileError):
            read_check_file("[equations]\nleft = psi\n")

    def test_symmetry_of_vorticity(self):
        rep = check_suite(VORT, ["x: -t*y; y: t*x; psi: (x**2 + y**2)/2"])
        assert rep.status == "pass"

    def test_explicit_space_breaks_translation(self):
        text = VORT.replace("psi_y*zeta_x", "psi_y*zeta_x - x")
        rep = check_suite(text, ["x: 1"])
        assert rep.status == "fail"

    def test_invariants_section(self):
        rep = check_suite("[algebra]\nj\n[invariants]\nI = x*psi_y - y*psi_x\n")
        assert rep.status == "pass" and len(rep.cases) == 4

    def test_nonlinear_principal(self):
        with pytest.raises(CheckFileError):
            check_suite("[equation]\nleft = psi_tyy**2\nprincipal = psi_tyy\n", ["x: 1"])

    def test_unknown_algebra(self):
        with pytest.raises(CheckFileError):
            check_suite("[algebra]\nnames = g7\n[invariants]\nI = t\n")


class TestCli:
    def test_g0(self, capsys):
        assert cli.main(["verify-g0"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert out.splitlines()[-1].startswith("PASS: 8 cases, 8 symbolic-zero")

    def test_json(self, capsys):
        assert cli.main(["verify-g0", "--json", "--suite", "g0"]) == EXIT_PASS
        d = json.loads(capsys.readouterr().out)
        assert d["status"] == "pass" and len(d["cases"]) == 8

    def test_check_file(self, tmp_path, capsys):
        p = tmp_path / "vort.eq"
        p.write_text(VORT)
        assert cli.main(["check", "--file", str(p), "--generator", "x: 1"]) == EXIT_PASS
        bad = tmp_path / "xdep.eq"
        bad.write_text(VORT.replace("psi_y*zeta_x", "psi_y*zeta_x - x"))
        assert cli.main(["check", "--file", str(bad), "--generator", "x: 1"]) == EXIT_FAIL

    @pytest.mark.parametrize("argv", [
        ["verify-everything"],
        ["verify-g0", "--max-order", "2"],
        ["verify-g0", "--numeric-precision", "10"],
        ["verify-g0", "--workers", "0"],
        ["verify-g0", "--file", "x.eq"],
        ["verify-g0", "--table", "2"],
        ["verify-tables", "--table", "5"],
        ["verify-g0", "--suite", "nothing"],
        ["check"],
        ["check", "--file", "/nonexistent/file.eq"],
        ["check", "--generator", "w: 1"],
        ["verify-equivalence", "--suite", "bogus"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert cli.main(argv) == EXIT_USAGE
        assert "invparam: error" in capsys.readouterr().err

    def test_seed_determinism(self, capsys):
        runs = []
        for _ in range(2):
            assert cli.main(["verify-equivalence", "--json", "--seed", "5", "--suite", "vorticity"]) == EXIT_PASS
            d = json.loads(capsys.readouterr().out)
            runs.append([(c["case"], c["generator"], c["verdict"]) for c in d["cases"]])
        assert runs[0] == runs[1] and len(runs[0]) == 4

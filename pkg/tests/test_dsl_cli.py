import json
import subprocess
import sys

import pytest

from formlab import DifferentialForm, parse_script, run_script
from formlab.cli import main
from formlab.dsl import SCHEMA, _Runner
from formlab.errors import DegreeOutOfRange, ScriptSyntaxError, UndeclaredName

THERMO = """chart (T,V) params (R,c_v)
form w = c_v*dT + (R*T/V)*dV
closed w
"""


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParse:
    def test_thermo_script(self):
        s = parse_script(THERMO)
        assert len(s.declarations) == 2 and len(s.commands) == 1
        assert s.commands[0].verb == "closed"

    def test_form_before_chart(self):
        with pytest.raises(UndeclaredName) as info:
            parse_script("form w = dT on (T,V)")
        assert info.value.line == 1

    def test_wedge_overflow(self):
        text = "chart (x,y)\nform a = dx^dy\nwedge a a\n"
        with pytest.raises(DegreeOutOfRange) as info:
            parse_script(text)
        assert info.value.line == 3 and info.value.column >= 1

    def test_unknown_symbol_in_form(self):
        with pytest.raises(UndeclaredName):
            parse_script("chart (x,y)\nform a = q*dx\n")

    def test_syntax(self):
        with pytest.raises(ScriptSyntaxError):
            parse_script("chart (x,y)\nfrobnicate a\n")
        with pytest.raises(ScriptSyntaxError):
            parse_script("chart (x,y)\nform a = (dx\n")

    def test_duplicate_name(self):
        with pytest.raises(ScriptSyntaxError):
            parse_script("chart (x,y)\nform a = dx\nform a = dy\n")

    def test_comments_and_blank_lines(self):
        s = parse_script("# header\n\nchart (x,y)  # plane\n")
        assert len(s.declarations) == 1


class TestRun:
    def test_thermo_fails_closed(self):
        rep = run_script(THERMO)
        assert rep.exit_code == 1
        r = rep.results[0]
        assert r.status == "fail" and "R/V*dT^dV" in r.text

    def test_empty(self):
        rep = run_script("")
        assert rep.exit_code == 0 and rep.results == [] and rep.to_json_lines() == ""

    def test_pipeline(self):
        text = """chart (T,V) params (R,c_v)
form w = c_v*dT + (R*T/V)*dV
intfactor w
d w as dw
form ddw = d(dw)
closed ddw
form q = (1/T)*w
closed q
classify w
"""
        rep = run_script(text)
        assert rep.exit_code == 0, rep.to_text()
        by_verb = {r.verb: r for r in rep.results}
        assert by_verb["intfactor"].result["mu"] == "1/T"
        assert by_verb["classify"].result["status"] == "Nonidentical"

    def test_torsion_commutator(self):
        text = """chart (x,y)
connection G on (x,y): (x,x,y) = 1
form w = y*dx
commutator w with G
"""
        rep = run_script(text)
        assert rep.results[0].result["components"][0]["value"] == "-y - 1"

    def test_descend(self):
        text = """chart (x,y,z,w)
form a = x*dy^dz^dw
descend a where x = 1; y = 1; z = 1
"""
        rep = run_script(text)
        assert rep.exit_code == 0
        assert rep.results[0].result["final_degree"] == 0

    def test_metric_report(self):
        text = """chart (th,ph)
metric g: diag(1, sin(th)^2)
connection L = christoffel(g)
metric-report metric g connection L
"""
        rep = run_script(text)
        assert rep.results[0].result == {"metric_symmetric": "Zero", "torsion_zero": "Zero",
                                         "curvature_zero": "NonZero"}

    def test_execution_error_exits_2(self):
        rep = run_script("chart (x,y)\nform a = x*dy\npotential a\nd a\n")
        assert rep.exit_code == 2
        assert len(rep.results) == 1 and rep.results[0].status == "error"

    def test_json_lines_schema(self):
        rep = run_script(THERMO)
        for line in rep.to_json_lines().splitlines():
            obj = json.loads(line)
            assert obj["schema"] == SCHEMA and obj["verb"] == "closed"

    def test_round_trip_printed_forms(self):
        text = """chart (x,y,z) params (k)
form a = (x + k)*dx - y^2*dy + dz
form b = z*dx^dy - (1/2)*dy^dz
wedge a b as c
d b as e
"""
        rep = run_script(text)
        script = parse_script(text)
        chart = script.declarations[0].value
        for r in rep.results:
            assert r.result["text"] != "0"
            printed = r.result["text"]
            again = run_script(f"chart (x,y,z) params (k)\nform r = {printed}\nd r\n")
            assert again.exit_code == 0
            original = DifferentialForm.from_json(chart, r.result["form"])
            reparsed = parse_script(f"chart (x,y,z) params (k)\nform r = {printed}\n")
            from formlab.dsl import _Runner
            runner = _Runner()
            for decl in reparsed.declarations:
                runner.declare(decl)
            assert runner.forms["r"] == original


class TestCLI:
    def test_run_file(self, tmp_path, capsys):
        p = tmp_path / "t.fl"
        p.write_text(THERMO)
        code, out, _ = run_cli(["run", str(p)], capsys)
        assert code == 1 and "FAIL" in out

    def test_eval_and_json(self, capsys):
        code, out, _ = run_cli(["run", "--eval", "chart (x,y)\nform a = dx^dy\nclosed a",
                                "--json"], capsys)
        assert code == 0
        assert json.loads(out)["result"]["verdict"] == "Zero"

    def test_parse_error_json(self, capsys):
        code, out, _ = run_cli(["run", "--eval", "form w = dT on (T,V)", "--json"], capsys)
        obj = json.loads(out)
        assert code == 2 and obj["error"] == "UndeclaredName" and obj["line"] == 1

    def test_parse_error_text(self, capsys):
        code, _, err = run_cli(["run", "--eval", "chart (x,y)\nwedge a a"], capsys)
        assert code == 2 and err.startswith("error: UndeclaredName: line 2")

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_cli(["run", str(tmp_path / "missing.fl")], capsys)
        assert code == 2 and "error" in err

    def test_corpus(self, capsys):
        code, out, _ = run_cli(["corpus", "run", "all"], capsys)
        assert code == 0 and out.count("PASS") == 3

    def test_corpus_out(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        assert run_cli(["corpus", "run", "thermo", "--json", "--out", str(path)], capsys)[0] == 0
        obj = json.loads(path.read_text())
        assert obj["status"] == "ok" and obj["cases"][0]["case"] == "thermo"

    def test_char(self, tmp_path, capsys):
        pde = tmp_path / "h.fl"
        pde.write_text("pde H = p_t + (p_x^2 + x^2)/2 vars (t,x)\n")
        csv = tmp_path / "traj.csv"
        code, out, _ = run_cli(["char", "--pde", str(pde), "--init", "0,0,-0.5,1,0",
                                "--h", "0.001", "--s-end", "6.283185307179586",
                                "--csv", str(csv)], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["residuals"]["F"] < 1e-8 and obj["residuals"]["theta"] < 1e-8
        assert obj["system"]["dx"] == ["1", "p_x"] and obj["samples_path"] == str(csv)
        assert csv.read_text().startswith("s,t,x,p_t,p_x,u\n")

    def test_char_params_and_text(self, tmp_path, capsys):
        pde = tmp_path / "t.fl"
        pde.write_text("pde A = p_t + v*p_x vars (t,x) params (v)\n")
        code, out, _ = run_cli(["char", "--pde", str(pde), "--init", "0,0,-2,1,0", "--h", "0.1",
                                "--s-end", "1", "--param", "v=2", "--text"], capsys)
        assert code == 0 and "max |F|" in out

    def test_char_bad_init(self, tmp_path, capsys):
        pde = tmp_path / "h.fl"
        pde.write_text("pde H = p_t + (p_x^2 + x^2)/2 vars (t,x)\n")
        code, out, _ = run_cli(["char", "--pde", str(pde), "--init", "0,0", "--h", "0.1",
                                "--s-end", "1"], capsys)
        assert code == 2 and json.loads(out)["status"] == "error"


def _subprocess(args, **env):
    import os
    full = {**os.environ, **env}
    return subprocess.run([sys.executable, "-m", "formlab", *args], capture_output=True,
                          text=True, env=full)


def test_corpus_json_deterministic():
    a = _subprocess(["corpus", "run", "all", "--json"], PYTHONHASHSEED="1")
    b = _subprocess(["corpus", "run", "all", "--json"], PYTHONHASHSEED="2")
    assert a.returncode == 0 and a.stdout == b.stdout


def test_color_env():
    colored = _subprocess(["corpus", "run", "em"], FORMLAB_COLOR="1")
    plain = _subprocess(["corpus", "run", "em"], FORMLAB_COLOR="0")
    assert "\x1b[" in colored.stdout and "\x1b[" not in plain.stdout

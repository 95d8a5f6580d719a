import json
import logging
import re

import pytest

from hrgcheck.cli import EXIT_ERROR, EXIT_FALSE, EXIT_OK, main
from hrgcheck.grammar_file import load_grammar


@pytest.fixture(autouse=True)
def workspace(tmp_path, monkeypatch):
    """Run every command from an empty folder, logs included."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("hrgcheck.utils.config.VERBOSE", False)
    yield tmp_path
    logger = logging.getLogger("hrgcheck")
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            handler.close()
            logger.removeHandler(handler)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestCheck:
    def test_universal_until_fails(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "--formula", "A(red U blue)", "--mode", "all")
        assert code == EXIT_FALSE
        assert "sat=0 fal=INF" in out
        assert "Not all members satisfy A (red U blue)" in out
        assert "Falsifying witness: R3(e1=R1)" in out

    def test_reachability_holds(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "E F blue")
        assert code == EXIT_OK
        assert out.startswith("sat=INF fal=0\n")

    def test_empty_language_has_no_member(self, capsys):
        code, out = run(capsys, "check", "empty.hrg", "--formula", "true", "--mode", "some")
        assert code == EXIT_FALSE
        assert "sat=0 fal=0" in out

    def test_count_mode(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "E F blue", "--mode", "count")
        assert code == EXIT_OK
        assert (
            "Satisfying members: INF, falsifying members: 0, finitely many violations: True."
            in out
        )

    def test_json_report(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "A(red U blue)", "--json")
        report = json.loads(out)
        assert code == EXIT_FALSE
        assert report["verdict"] is False
        assert (report["sat"], report["fal"]) == ("0", "INF")
        assert report["fal_witness"] == "R3(e1=R1)"
        assert report["registry"][report["color"]] == "A (red U blue)"

    def test_witnesses_use_the_file_rule_names(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "E X E X blue", "--json")
        report = json.loads(out)
        assert code == EXIT_FALSE
        for witness in (report["sat_witness"], report["fal_witness"]):
            assert set(re.findall(r"R[0-9.]+", witness)) <= {"R1", "R2", "R3"}
        assert report["sat_witness"] == "R3(e1=R1)"

    def test_verbose_prints_the_color(self, capsys):
        code, out = run(capsys, "-v", "check", "dll.hrg", "-f", "A F blue")
        assert code == EXIT_FALSE
        assert "Loaded dll.hrg: 2 nonterminals, 3 rules." in out
        assert "Formula color: @phi" in out

    def test_logs_are_written(self, capsys, workspace):
        run(capsys, "check", "dll.hrg", "-f", "E F blue")
        assert list(workspace.joinpath("logs").glob("hrgcheck_*.log"))


class TestErrors:
    def test_bad_formula(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "red &")
        assert code == EXIT_ERROR
        assert out.startswith("Error: ")
        assert "Check the logs for details." in out

    def test_unknown_color(self, capsys):
        code, out = run(capsys, "check", "dll.hrg", "-f", "E F purple")
        assert code == EXIT_ERROR

    def test_missing_file(self, capsys):
        code, _ = run(capsys, "check", "nowhere.hrg", "-f", "true")
        assert code == EXIT_ERROR

    def test_invalid_grammar(self, capsys, workspace):
        workspace.joinpath("bad.hrg").write_text(
            "nt S/0;\nnt A/1;\nstart S;\nrule R1 : S { node u; he e1 = A(u, u); }\n",
            encoding="utf-8",
        )
        code, out = run(capsys, "check", "bad.hrg", "-f", "true")
        assert code == EXIT_ERROR
        assert out.startswith("The grammar is not valid:")

    def test_usage_error(self, capsys):
        assert main(["check", "dll.hrg"]) == EXIT_ERROR

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert "hrgcheck 1.0.0" in capsys.readouterr().out


class TestRecolor:
    def test_writes_the_grammar(self, capsys, workspace):
        code, out = run(capsys, "recolor", "dll.hrg", "-f", "F blue", "--out", "dll_f.hrg")
        assert code == EXIT_OK
        assert "@phi1 = A (F blue)" in out
        assert "Written to dll_f.hrg." in out
        recolored = load_grammar(workspace.joinpath("dll_f.hrg"))
        assert recolored.registry == {"@phi1": "A (F blue)"}

    def test_prints_the_grammar(self, capsys):
        code, out = run(capsys, "recolor", "dll.hrg", "-f", "E X blue")
        assert code == EXIT_OK
        assert 'color @phi2 = "E (X blue)";' in out

    def test_json(self, capsys):
        code, out = run(capsys, "recolor", "dll.hrg", "-f", "A F blue", "--json")
        report = json.loads(out)
        assert code == EXIT_OK
        assert report["color"] == "@phi1"
        assert [step["formula"] for step in report["steps"]] == ["A (F blue)"]
        assert report["grammar"]["registry"] == {"@phi1": "A (F blue)"}


class TestDump:
    def test_text(self, capsys):
        code, out = run(capsys, "dump", "dll.hrg")
        assert code == EXIT_OK
        assert out.startswith("colors blue init red;")

    def test_grammar_dot(self, capsys, workspace):
        code, out = run(capsys, "dump", "dll.hrg", "--dot", "grammar", "--out", "dll.dot")
        assert code == EXIT_OK
        assert "Written to dll.dot." in out
        assert workspace.joinpath("dll.dot").read_text(encoding="utf-8").startswith("digraph grammar {")

    def test_refined_dot(self, capsys):
        code, out = run(capsys, "dump", "dll.hrg", "--dot", "refined", "-f", "F blue")
        assert code == EXIT_OK
        assert out.startswith("digraph refined {")

    def test_behaviours_dot(self, capsys):
        code, out = run(capsys, "dump", "dll.hrg", "--dot", "behaviours", "-f", "F blue")
        assert code == EXIT_OK
        assert out.count("digraph ") == 11

    def test_refined_needs_formula(self, capsys):
        code, out = run(capsys, "dump", "dll.hrg", "--dot", "refined")
        assert code == EXIT_ERROR
        assert "--dot refined needs a --formula." in out

    def test_refined_needs_ltl(self, capsys):
        code, _ = run(capsys, "dump", "dll.hrg", "--dot", "refined", "-f", "A F E X blue")
        assert code == EXIT_ERROR


class TestOracleAndBench:
    def test_oracle(self, capsys):
        code, out = run(capsys, "oracle", "dll.hrg", "-f", "A F blue", "--depth", "3")
        assert code == EXIT_OK
        assert "0 mismatches, 2 members checked (7 nodes)." in out

    def test_oracle_json(self, capsys):
        code, out = run(capsys, "oracle", "dll.hrg", "-f", "E X red", "-d", "3", "--json")
        assert code == EXIT_OK
        assert json.loads(out)["ok"] is True

    def test_bench(self, capsys):
        code, out = run(capsys, "bench", "--only", "dll.hrg", "--json")
        assert code == EXIT_OK
        assert out.rstrip().endswith("5 of 5 rows match their expected verdicts.")

    def test_bench_without_rows(self, capsys):
        code, out = run(capsys, "bench", "--only", "missing.hrg")
        assert code == EXIT_ERROR
        assert "No benchmark rows found" in out

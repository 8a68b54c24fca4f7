"""
Tests for the command line entry point.
"""
import json
from pathlib import Path

import pytest

from run_cfrac import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main

CORPUS_DIR = Path(__file__).parent.parent / "corpus"


@pytest.fixture
def problem_file(tmp_path):
    def write(name, **fields):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps({"name": name, "kind": "ode", **fields}), encoding="utf-8")
        return str(path)

    return write


class TestParser:
    def test_common_options_after_subcommand(self):
        args = build_parser().parse_args(["run", "p.json", "--terms", "24", "--format", "text"])
        assert (args.command, args.problem, args.terms, args.format) == ("run", "p.json", 24, "text")

    def test_common_options_before_subcommand(self):
        args = build_parser().parse_args(["--terms", "24", "corpus", "tan"])
        assert (args.command, args.selector, args.terms, args.format) == ("corpus", "tan", 24, "json")


class TestMain:
    """Exit codes and outputs."""

    def test_no_command(self):
        assert main([]) == EXIT_USAGE

    def test_run_and_check(self, tmp_path):
        certificate = tmp_path / "tan.certificate.json"
        assert main(["run", str(CORPUS_DIR / "tan.json"), "--out", str(certificate)]) == EXIT_OK
        assert json.loads(certificate.read_text())["verdict"]["status"] == "proven"
        assert main(["--check", str(certificate)]) == EXIT_OK

    def test_tampered_certificate(self, tmp_path):
        certificate = tmp_path / "tan.certificate.json"
        main(["run", str(CORPUS_DIR / "tan.json"), "--out", str(certificate)])
        doc = json.loads(certificate.read_text())
        doc["verdict"]["gain"] = 5
        certificate.write_text(json.dumps(doc))
        assert main(["--check", str(certificate)]) == EXIT_FAILED

    def test_text_output(self, capsys):
        assert main(["run", str(CORPUS_DIR / "tan.json"), "--format", "text"]) == EXIT_OK
        assert "val H(k) >= 2*k" in capsys.readouterr().out

    def test_failure_report(self, problem_file, capsys):
        path = problem_file("cubic", equation="y' = 1 + y^2 + y^3")
        assert main(["run", path]) == EXIT_FAILED
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "failed" and report["stage"] == "guess"

    def test_syntax_error(self, problem_file):
        assert main(["run", problem_file("typo", equation="y' = 2y")]) == EXIT_USAGE

    def test_missing_problem(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.json")]) == EXIT_USAGE

    def test_unknown_selector(self):
        assert main(["corpus", "nothing*"]) == EXIT_USAGE

    def test_malformed_certificate(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{}")
        assert main(["--check", str(path)]) == EXIT_USAGE

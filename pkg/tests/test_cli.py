"""Golden tests for the command-line front end: exit codes and output."""

import argparse
import io

from conftest import PROGRAMS
from coresolve.cli import TRACE_HEADER, main, repl


def lp(name: str) -> str:
    return str(PROGRAMS / f"{name}.lp")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRun:
    def test_nats_cos_answer(self, capsys):
        code, out, err = run(capsys, "run", lp("nats"), "-q", "nats(X)")
        assert code == 0
        assert out == "X = scons(0,X)\n"

    def test_unfold_depth(self, capsys):
        code, out, _ = run(
            capsys, "run", lp("nats"), "-q", "nats(X)", "--unfold-depth", "4"
        )
        assert code == 0
        assert "X ~ scons(0,scons(0,scons(0,scons(◇,◇))))" in out

    def test_ground_sld_true(self, capsys):
        code, out, _ = run(capsys, "run", lp("nat"), "-q", "nat(s(0))", "--mode", "sld")
        assert code == 0
        assert out == "true\n"

    def test_finite_failure(self, capsys):
        code, _, _ = run(capsys, "run", lp("nat"), "-q", "nat(f(0))", "--mode", "sld")
        assert code == 1

    def test_fibs_limit_exceeded(self, capsys):
        code, _, err = run(
            capsys, "run", lp("fibs"), "-q", "fibs(0,s(0),F)", "--max-steps", "500"
        )
        assert code == 2
        assert "not universal" in err

    def test_strict_refusal(self, capsys):
        code, _, err = run(
            capsys, "run", lp("fibs"), "-q", "fibs(0,s(0),F)", "--strict"
        )
        assert code == 4
        assert "refusing" in err

    def test_query_parse_error(self, capsys):
        code, _, err = run(capsys, "run", lp("nat"), "-q", "nat(")
        assert code == 3
        assert "parse error" in err

    def test_trace_header(self, capsys):
        code, out, _ = run(
            capsys, "run", lp("nat"), "-q", "nat(0)", "--mode", "sld", "--trace", "text"
        )
        assert code == 0
        assert out.splitlines()[0] == TRACE_HEADER

    def test_structured_trace_loop_record(self, capsys):
        code, out, _ = run(
            capsys, "run", lp("nats"), "-q", "nats(X)", "--trace", "structured"
        )
        assert code == 0
        assert '"kind": "loop"' in out or '"ancestor"' in out

    def test_deterministic_output(self, capsys):
        argv = ["run", lp("server"), "-q", "resource(X,Y), zeros(Y)"]
        code1 = main(list(argv))
        first = capsys.readouterr().out
        code2 = main(list(argv))
        second = capsys.readouterr().out
        assert code1 == code2 == 0
        assert first == second
        assert first.splitlines() == ["X = cons(get(0),X)", "Y = cons(0,Y)"]


class TestCheck:
    def test_fibs_universal_violation(self, capsys):
        code, out, _ = run(capsys, "check", lp("fibs"), "--universal")
        assert code == 4
        assert "{Z}" in out

    def test_bad_productive_witness(self, capsys):
        code, out, _ = run(capsys, "check", lp("bad"), "--productive")
        assert code == 4
        assert "rewriting loop witness" in out
        assert "bad(f(" in out

    def test_nats_both_checks_clean(self, capsys):
        code, out, _ = run(capsys, "check", lp("nats"), "--universal", "--productive")
        assert code == 0
        assert "universal" in out and "no rewriting loop" in out

    def test_requires_a_flag(self, capsys):
        code, _, err = run(capsys, "check", lp("nats"))
        assert code == 3
        assert "at least one" in err


class TestValidate:
    def test_r_program_agrees(self, capsys):
        code, out, _ = run(capsys, "validate", lp("r"), "-q", "r(X,Y)")
        assert code == 0
        assert "MISMATCH" not in out
        assert out.count("ok") >= 6

    def test_server_agrees(self, capsys):
        code, out, _ = run(
            capsys, "validate", lp("server"), "-q", "resource(X,Y), zeros(Y)"
        )
        assert code == 0

    def test_ex51_refused(self, capsys):
        code, _, err = run(capsys, "validate", lp("ex51"), "-q", "p(X,s(X))")
        assert code == 3
        assert "refused" in err


class TestOracle:
    def test_nat_cap5_sorted(self, capsys):
        code, out, _ = run(capsys, "oracle", lp("nat"), "--cap", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines == sorted(lines)
        assert "nat(0)" in lines and "nat(s(s(s(s(0)))))" in lines
        assert len(lines) == 5


class TestUsage:
    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "run", "no-such-file.lp", "-q", "p(X)")
        assert code == 3

    def test_nonpositive_bound(self, capsys):
        code, _, err = run(capsys, "run", lp("nat"), "-q", "nat(0)", "--max-steps", "0")
        assert code == 3
        assert "positive" in err


class TestRepl:
    def test_query_set_and_check(self):
        inp = io.StringIO(
            "?- nats(X).\n"
            ":set mode sld\n"
            "nats(X).\n"
            ":check productive\n"
            ":quit\n"
        )
        out, err = io.StringIO(), io.StringIO()
        args = argparse.Namespace(file=lp("nats"))
        code = repl(args, out, err, inp)
        assert code == 0
        text = out.getvalue()
        assert "X = scons(0,X)" in text
        assert "limit exceeded" in text
        assert "no rewriting loop" in text

"""Program parsing, printing, and the universality check."""

import pytest

from conftest import load
from coresolve.program import (
    ParseError,
    check_universal,
    clause_instance,
    parse_program,
    parse_query,
    program_to_text,
)
from coresolve.terms import FreshVars, Struct, Symbol, variables_of


class TestParse:
    def test_two_clauses(self):
        p = parse_program("nat(0). nat(s(X)) :- nat(X).")
        assert len(p.clauses) == 2
        assert p.clauses[0].head == Struct(Symbol("nat", 1), (Struct(Symbol("0", 0)),))
        assert p.clauses[1].body[0].symbol == Symbol("nat", 1)

    def test_empty(self):
        assert parse_program("").clauses == ()

    def test_unclosed_paren(self):
        with pytest.raises(ParseError):
            parse_program("p(X) :- q(X")

    def test_arity_conflict(self):
        with pytest.raises(ParseError) as exc:
            parse_program("p(a). p(a,b).")
        assert "arity" in str(exc.value)

    def test_reserved_symbol_rejected(self):
        with pytest.raises(ParseError):
            parse_program("p(◇).")

    def test_list_sugar(self):
        p = parse_program("q([a,b]). r([H|T]) :- r(T).")
        cons = Symbol("cons", 2)
        nil = Struct(Symbol("nil", 0))
        a = Struct(Symbol("a", 0))
        b = Struct(Symbol("b", 0))
        assert p.clauses[0].head.args[0] == Struct(cons, (a, Struct(cons, (b, nil))))
        assert p.clauses[1].head.args[0].symbol == cons

    def test_comments_and_head_var_rejected(self):
        p = parse_program("% a comment\nnat(0). % trailing\n")
        assert len(p.clauses) == 1
        with pytest.raises(ParseError):
            parse_program("X :- p(X).")

    def test_nullary_warning(self):
        p = parse_program("bad(f(X)) :- bad(f(X)).")
        assert any("nullary" in w for w in p.warnings)

    def test_round_trip(self):
        text = "nat(0).\nnat(s(X)) :- nat(X).\nnats(scons(X,Y)) :- nat(X),nats(Y).\n"
        p1 = parse_program(text)
        p2 = parse_program(program_to_text(p1))
        assert program_to_text(p1) == program_to_text(p2)
        assert len(p1.clauses) == len(p2.clauses)

    def test_query_conjunction(self):
        atoms = parse_query("resource(X,Y), zeros(Y)")
        assert len(atoms) == 2
        assert variables_of(atoms[0]) >= variables_of(atoms[1])


class TestCheckUniversal:
    def test_existential_variable_flagged(self):
        p = parse_program("p(Y) :- nats(X).")
        report = check_universal(p)
        assert not report.universal
        (_, _, extras), = report.violations
        assert [v.hint for v in extras] == ["X"]

    def test_fibs_violation(self):
        p, _ = load("fibs")
        report = check_universal(p)
        assert len(report.violations) == 1
        i, _, extras = report.violations[0]
        assert i == 2
        assert [v.hint for v in extras] == ["Z"]

    def test_nats_universal(self):
        p, _ = load("nats")
        assert check_universal(p).universal

    def test_matches_set_containment_oracle(self):
        p = parse_program(
            "p(X) :- q(X,Y). q(X,X). r(f(A,B)) :- r(A), s(B). t(X) :- t(s(X))."
        )
        report = check_universal(p)
        flagged = {i for i, _, _ in report.violations}
        for i, c in enumerate(p.clauses):
            body_vars = set().union(*[variables_of(b) for b in c.body], set())
            assert (i in flagged) == (not body_vars <= variables_of(c.head))


class TestClauseInstance:
    def test_fresh_variant(self):
        p = parse_program("p(X,Y) :- q(X), r(Y).")
        fresh = FreshVars(1000)
        c2 = clause_instance(p.clauses[0], fresh)
        orig_vars = set(p.clauses[0].variables())
        assert variables_of(c2.head).isdisjoint(orig_vars)

    def test_successive_instances_disjoint(self):
        p = parse_program("p(X,Y) :- q(X).")
        fresh = FreshVars(1000)
        a = clause_instance(p.clauses[0], fresh)
        b = clause_instance(p.clauses[0], fresh)
        assert variables_of(a.head).isdisjoint(variables_of(b.head))

    def test_ground_clause_unchanged(self):
        p = parse_program("nat(0).")
        fresh = FreshVars(1000)
        assert clause_instance(p.clauses[0], fresh).head == p.clauses[0].head

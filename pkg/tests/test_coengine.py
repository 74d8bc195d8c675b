"""Co-S-resolution: ancestor bookkeeping, loop detection in both modes,
and the full search."""

from conftest import load_query
from coresolve.coengine import (
    LoopFailReason,
    LoopFailure,
    annotate,
    co_refute,
    co_replay,
    co_rewrite,
    co_s_compound,
    co_subst,
    colp_loop,
    preflight_warnings,
    restricted_loop,
)
from coresolve.derivation import Limits, Status, StepKind
from coresolve.program import parse_program, parse_query
from coresolve.terms import FreshVars, Var, is_variant, mk, term_to_text


def setup(text, query):
    fresh = FreshVars()
    p = parse_program(text, fresh)
    q = parse_query(query, fresh)
    return p, annotate(q), fresh


def answers_text(result):
    return [
        {v.display: term_to_text(t) for v, t in a.solved.items()}
        for _, a in result.answers
    ]


class TestCoRewrite:
    def test_body_inherits_grown_ancestors(self):
        p, g, fresh = setup("r(f(A,B,C),s(B)) :- r(A,B).", "r(f(A1,B1,C1),s(B1))")
        got = co_rewrite(p, g, 0, 0, fresh)
        assert got is not None
        g2, st = got
        assert len(g2) == 1
        assert g2[0].ancestors == (g[0].atom,)
        assert is_variant(g2[0].atom, mk("r", Var(90, "A"), Var(91, "B")))

    def test_fact_use_empties_entry(self):
        p, g, fresh = setup("nat(0).", "nat(0)")
        g2, _ = co_rewrite(p, g, 0, 0, fresh)
        assert g2 == ()

    def test_rest_of_goal_untouched(self):
        p, g, fresh = setup(
            "p(s(X1),X2,Y1,Y2) :- q(X2,X2,Y1,Y2). q(X1,X2,s(Y1),Y2) :- p(X1,X2,Y2,Y2).",
            "p(s(X),s(Y),s(Z),s(W)), other(X)",
        )
        got = co_rewrite(p, g, 0, 0, fresh)
        assert got is not None
        g2, _ = got
        assert g2[0].atom.symbol.name == "q"
        assert g2[1] == g[1]


class TestCoSubst:
    def test_ancestors_instantiated_in_lockstep(self):
        p, g, fresh = setup("p(X,s(X)) :- q(X). q(s(X)) :- p(X,X).", "q(X)")
        # Give the entry an ancestor mentioning X by rewriting first.
        from coresolve.coengine import Entry

        x = g[0].atom.args[0]
        g = (Entry(g[0].atom, (mk("p", x, mk("s", x)),)),)
        got = co_subst(p, g, 0, 1, fresh)
        assert got is not None
        g2, st = got
        img = st.subst.get(x)
        assert img is not None and img.symbol.name == "s"
        # The ancestor saw the same substitution as the atom.
        assert g2[0].ancestors[0].args[0] == img

    def test_matcher_classified_out(self):
        p, g, fresh = setup("nat(0).", "nat(0)")
        assert co_subst(p, g, 0, 0, fresh) is None


class TestColpLoop:
    def test_circular_unifier_closes_goal(self):
        p, g, fresh = setup("x(0).", "nats(Yp)")
        from coresolve.coengine import Entry

        yp = g[0].atom.args[0]
        ancestor = mk("nats", mk("scons", mk("0"), yp))
        g = (Entry(g[0].atom, (ancestor,)),)
        got = colp_loop(g, 0, ancestor)
        assert got is not None
        rest, theta = got
        assert rest == ()
        assert theta.get(yp) == mk("scons", mk("0"), yp)
        assert theta.circular

    def test_clash_fails(self):
        from coresolve.coengine import Entry

        atom = mk("p", mk("a"))
        ancestor = mk("p", mk("b"))
        g = (Entry(atom, (ancestor,)),)
        assert colp_loop(g, 0, ancestor) is None


class TestRestrictedLoop:
    def test_accepts_instance_with_circular_unifier(self):
        from coresolve.coengine import Entry

        a1, b1, c1 = Var(1, "A1"), Var(2, "B1"), Var(3, "C1")
        atom = mk("r", a1, b1)
        ancestor = mk("r", mk("f", a1, b1, c1), mk("s", b1))
        g = (Entry(atom, (ancestor,)),)
        got = restricted_loop(g, 0, ancestor)
        assert not isinstance(got, LoopFailure)
        rest, theta = got
        assert rest == ()
        assert theta.get(a1) == mk("f", a1, b1, c1)
        assert theta.get(b1) == mk("s", b1)

    def test_rejects_non_instance(self):
        from coresolve.coengine import Entry

        x1 = Var(1, "X1")
        atom = mk("p", x1, x1)
        ancestor = mk("p", mk("s", x1), mk("s", mk("s", x1)))
        g = (Entry(atom, (ancestor,)),)
        got = restricted_loop(g, 0, ancestor)
        assert isinstance(got, LoopFailure)
        assert got.reason is LoopFailReason.NOT_AN_INSTANCE

    def test_rejects_trivial_unifier(self):
        from coresolve.coengine import Entry

        x, y = Var(1, "X"), Var(2, "Y")
        atom = mk("q", x, y)
        ancestor = mk("q", x, y)
        g = (Entry(atom, (ancestor,)),)
        got = restricted_loop(g, 0, ancestor)
        assert isinstance(got, LoopFailure)
        assert got.reason is LoopFailReason.TRIVIAL_UNIFIER

    def test_theta_not_applied_to_rest(self):
        from coresolve.coengine import Entry

        a1, b1, c1 = Var(1, "A1"), Var(2, "B1"), Var(3, "C1")
        atom = mk("r", a1, b1)
        ancestor = mk("r", mk("f", a1, b1, c1), mk("s", b1))
        other = Entry(mk("w", a1), ())
        g = (Entry(atom, (ancestor,)), other)
        got = restricted_loop(g, 0, ancestor)
        rest, _ = got
        assert rest == (other,)  # untouched, per the displayed rule


class TestCoRefute:
    def test_nats_circular_answer(self):
        p, q, fresh = load_query("nats", "nats(X)")
        result = co_refute(p, q, "restricted", Limits(), fresh, preflight=False)
        assert result.status is Status.REFUTED
        assert answers_text(result) == [{"X": "scons(0,X)"}]

    def test_ex51_colp_succeeds_restricted_fails(self):
        p, q, fresh = load_query("ex51", "p(X,s(X))")
        colp = co_refute(p, q, "colp", Limits(), fresh, preflight=False)
        assert colp.status is Status.REFUTED
        assert answers_text(colp) == [{"X": "s(X)"}]
        p, q, fresh = load_query("ex51", "p(X,s(X))")
        restricted = co_refute(p, q, "restricted", Limits(), fresh, preflight=False)
        assert restricted.status is Status.FAILED
        reasons = {f.reason for f in restricted.loop_failures}
        assert LoopFailReason.NOT_AN_INSTANCE in reasons

    def test_r_program_restricted_answer(self):
        p, q, fresh = load_query("r", "r(X,Y)")
        result = co_refute(p, q, "restricted", Limits(), fresh, preflight=False)
        assert result.status is Status.REFUTED
        (answer,) = [a for _, a in result.answers]
        assert len(answer.loop_uses) == 1
        text = {v.display: term_to_text(t) for v, t in answer.solved.items()}
        assert text == {"X": "f(X,Y,C)", "Y": "s(Y)"}

    def test_trace_replay_and_ancestor_discipline(self):
        p, q, fresh = load_query("server", "resource(X,Y), zeros(Y)")
        result = co_refute(p, q, "restricted", Limits(), fresh, preflight=False)
        trace, _ = result.answers[0]
        goals = co_replay(trace.initial, trace.steps, "restricted")
        assert goals[-1] == ()
        # Every ancestor entered the list as the selected atom of an
        # earlier rewriting step on that entry's chain.
        for k, st in enumerate(trace.steps):
            if st.kind is StepKind.REWRITE:
                entry = goals[k][st.atom_index]
                replayed = goals[k + 1]
                for e in replayed:
                    if e.ancestors and e.ancestors[-1] == entry.atom:
                        assert e.ancestors[: len(entry.ancestors)] == entry.ancestors

    def test_mode_refinement(self):
        # Wherever the restricted rule fires, the colp rule fires too.
        from coresolve.coengine import Entry

        cases = [
            (mk("r", Var(1, "A"), Var(2, "B")),
             mk("r", mk("f", Var(1, "A"), Var(2, "B"), Var(3, "C")), mk("s", Var(2, "B")))),
            (mk("nats", Var(4, "Y")), mk("nats", mk("scons", mk("0"), Var(4, "Y")))),
        ]
        for atom, ancestor in cases:
            g = (Entry(atom, (ancestor,)),)
            restricted = restricted_loop(g, 0, ancestor)
            if not isinstance(restricted, LoopFailure):
                assert colp_loop(g, 0, ancestor) is not None

    def test_preflight_warnings(self):
        p, q, _ = load_query("fibs", "fibs(0,s(0),F)")
        warnings = preflight_warnings(p)
        assert any("universal" in w for w in warnings)
        p, q, _ = load_query("bad", "bad(f(X))")
        warnings = preflight_warnings(p)
        assert any("rewriting loop" in w for w in warnings)
        p, q, _ = load_query("nats", "nats(X)")
        assert preflight_warnings(p) == []

"""Value graphs for rational trees: bisimulation, unfolding, solved answers."""

from coresolve.rational import (
    build_node,
    nodes_bisimilar,
    rational_equal,
    solved_answer,
    unfold,
)
from coresolve.terms import TRUNCATED, Substitution, Var, const, mk, term_to_text

X, Y, Z = Var(1, "X"), Var(2, "Y"), Var(3, "Z")
zero = const("0")


def s_(t):
    return mk("s", t)


class TestBisimulation:
    def test_same_circular_value_different_bindings(self):
        # X = s(X) and Y = s(s(Y)) denote the same rational tree.
        sx = Substitution({X: s_(X)})
        syy = Substitution({Y: s_(s_(Y))})
        a = build_node(X, [sx])
        b = build_node(Y, [syy])
        assert nodes_bisimilar(a, b)

    def test_different_values_distinguished(self):
        sx = Substitution({X: s_(X)})
        sy = Substitution({Y: mk("f", Y)})
        assert not nodes_bisimilar(build_node(X, [sx]), build_node(Y, [sy]))

    def test_rational_equal_on_finite_terms(self):
        assert rational_equal(s_(zero), s_(zero))
        assert not rational_equal(s_(zero), s_(s_(zero)))

    def test_free_variables_by_identity(self):
        assert rational_equal(mk("p", X, X), mk("p", X, X))
        assert not rational_equal(mk("p", X, X), mk("p", X, Y))


class TestUnfold:
    def test_circular_binding(self):
        sigma = Substitution({X: mk("scons", zero, X)})
        got = unfold(sigma, mk("nats", X), 4)
        assert term_to_text(got) == "nats(scons(0,scons(0,scons(◇,◇))))"

    def test_depth_zero(self):
        assert unfold(Substitution(), zero, 0) is TRUNCATED

    def test_keeps_free_variables(self):
        sigma = Substitution({X: mk("f", X, Y)})
        got = unfold(sigma, X, 3)
        assert term_to_text(got) == "f(f(f(◇,◇),Y),Y)"

    def test_substitution_sequence_stratified(self):
        # X resolves through the first substitution; variables it leaves
        # free advance to the next one.
        first = Substitution({X: mk("scons", Y, X)})
        second = Substitution({Y: zero})
        got = unfold([first, second], X, 3)
        assert term_to_text(got) == "scons(0,scons(0,scons(◇,◇)))"


class TestSolvedAnswer:
    def test_single_circular_query_var(self):
        seq = [Substitution({X: mk("scons", Y, X)}), Substitution({Y: zero})]
        solved = solved_answer([X, Y], seq)
        assert solved.get(X) == mk("scons", zero, X)
        assert solved.get(Y) == zero

    def test_reuses_query_variable_names(self):
        theta = Substitution({X: mk("f", X, Y, Z), Y: s_(Y)})
        solved = solved_answer([X, Y], [theta])
        assert solved.get(X) == mk("f", X, Y, Z)
        assert solved.get(Y) == s_(Y)

    def test_plain_variable_aliasing(self):
        solved = solved_answer([X, Y], [Substitution({Y: X})])
        assert solved.get(Y) == X
        assert solved.get(X) is None

    def test_non_circular_sequence_collapses(self):
        seq = [Substitution({X: s_(Y)}), Substitution({Y: zero})]
        solved = solved_answer([X], seq)
        assert solved.get(X) == s_(zero)
        assert not solved.circular

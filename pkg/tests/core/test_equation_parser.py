"""
Tests for the equation grammar and problem files.
"""
import json

import pytest

from core.algebra import AlgebraContext, render, same
from core.equation_parser import (
    build_context,
    build_equation,
    parse_equation,
    parse_expression,
    parse_problem,
    render_problem,
    tokenize,
)
from core.exceptions import EquationSyntaxError, ProblemSpecError
from core.models import EquationKind, ProblemSpec


@pytest.fixture
def ctx():
    return AlgebraContext(("a", "b", "c"), "z")


def spec(equation, kind="ode", **fields):
    return ProblemSpec(kind=kind, equation=equation, **fields)


class TestTokenizer:
    """Token stream and lexical errors."""

    def test_positions(self):
        """Tokens carry their offsets in the source."""
        tokens = list(tokenize("y' = 1 + y^2"))
        assert [t.type for t in tokens] == ["name", "'", "=", "num", "+", "name", "^", "num"]
        assert tokens[2].position == 3

    def test_double_star_is_power(self):
        """** is read as ^."""
        assert [t.type for t in tokenize("z**2")] == ["name", "^", "num"]

    def test_bad_character(self):
        """An unknown character is reported at its position."""
        with pytest.raises(EquationSyntaxError) as info:
            list(tokenize("y' = 1 $ y"))
        assert info.value.position == 7


class TestExpressions:
    """Precedence, associativity and exact values."""

    def test_arithmetic(self, ctx):
        """Integer arithmetic with the usual precedence."""
        assert same(parse_expression("2*3+4", ctx), ctx.element(10))
        assert same(parse_expression("(1+2)*3", ctx), ctx.element(9))
        assert same(parse_expression("1/2/2", ctx), ctx.element("1/4"))

    def test_power_binds_tightest(self, ctx):
        """-2^2 is -(2^2) and ^ is right-associative."""
        assert same(parse_expression("-2^2", ctx), ctx.element(-4))
        assert same(parse_expression("2^3^2", ctx), ctx.element(512))

    def test_negative_power(self, ctx):
        """Negative integer powers of nonzero constants."""
        z = ctx.x
        assert same(parse_expression("(z+1)^(-2)", ctx), 1 / (z + 1) ** 2)

    def test_index_symbols(self, ctx):
        """n is visible to expressions (certificate strings use it)."""
        n = ctx.n
        assert same(parse_expression("(2*n+1)^2", ctx), (2 * n + 1) ** 2)

    def test_render_round_trip(self, ctx):
        """Canonical strings parse back to the same element."""
        a, c, z, n = ctx.gen("a"), ctx.gen("c"), ctx.x, ctx.n
        f = (a * z - c) / (2 * c**2 - 4 * a) + n**2 * z / 3
        assert same(parse_expression(render(ctx, f), ctx), f)

    def test_render_round_trip_inverted(self):
        """Difference contexts render and parse in the user's variable."""
        ctx = AlgebraContext((), "s", inverted=True)
        t = ctx.x
        f = t / (1 + 2 * t) ** 2
        assert same(parse_expression(render(ctx, f), ctx), f)

    def test_implicit_multiplication(self, ctx):
        """2z, 2(z) and (a)(b) are syntax errors."""
        for source in ("2z", "2(z)", "(a)(b)", "a b"):
            with pytest.raises(EquationSyntaxError):
                parse_expression(source, ctx)

    def test_position_of_implicit_multiplication(self, ctx):
        """The error points at the second factor."""
        with pytest.raises(EquationSyntaxError) as info:
            parse_expression("3*a b", ctx)
        assert info.value.position == 4
        assert "^" in info.value.render()

    def test_unbalanced(self, ctx):
        """Missing closing parenthesis and dangling operators."""
        for source in ("(a+b", "a+", "a)"):
            with pytest.raises(EquationSyntaxError):
                parse_expression(source, ctx)

    def test_undeclared_name(self, ctx):
        """Unknown names are semantic errors, not syntax errors."""
        with pytest.raises(ProblemSpecError) as info:
            parse_expression("a + w", ctx)
        assert not isinstance(info.value, EquationSyntaxError)
        assert "'w'" in str(info.value)

    def test_non_integer_exponent(self, ctx):
        """Exponents must be integer constants."""
        with pytest.raises(ProblemSpecError):
            parse_expression("z^(1/2)", ctx)
        with pytest.raises(ProblemSpecError):
            parse_expression("z^a", ctx)

    def test_division_by_zero(self, ctx):
        with pytest.raises(ProblemSpecError):
            parse_expression("a/(b-b)", ctx)


class TestEquations:
    """Equations as polynomials in the two evaluations of the unknown."""

    def test_tangent(self):
        """y' = 1 + y^2 moves everything to the left."""
        problem = spec("y' = 1 + y^2")
        ctx = build_context(problem)
        terms = parse_equation(problem, ctx)
        assert set(terms) == {(0, 1), (0, 0), (2, 0)}
        assert same(terms[(0, 1)], ctx.one)
        assert same(terms[(0, 0)], -ctx.one)
        assert same(terms[(2, 0)], -ctx.one)

    def test_call_syntax_for_ode(self):
        """y(z) and y'(z) are accepted in ode problems."""
        problem = spec("y'(z) = y(z)")
        terms = parse_equation(problem, build_context(problem))
        assert set(terms) == {(0, 1), (1, 0)}

    def test_gauss(self):
        """The Gauss equation with three parameters."""
        problem = spec(
            "c*z*(z-1)*y' = a*(c-b)*z + (c*(a-b)*z + c^2)*y + c^2*y^2",
            parameters=["a", "b", "c"],
        )
        ctx = build_context(problem)
        terms = parse_equation(problem, ctx)
        a, b, c, z = ctx.gen("a"), ctx.gen("b"), ctx.gen("c"), ctx.x
        assert same(terms[(0, 1)], c * z * (z - 1))
        assert same(terms[(2, 0)], -(c**2))
        assert same(terms[(0, 0)], -a * (c - b) * z)

    def test_brouncker(self):
        """y(s)*y(s+2) = 16/(s+1)^2 in series coordinates t = 1/s."""
        problem = spec("y(s)*y(s+2) = 16/(s+1)^2", kind="diff", variable="s", step=2, leading="4")
        ctx = build_context(problem)
        terms = parse_equation(problem, ctx)
        t = ctx.x
        assert set(terms) == {(1, 1), (0, 0)}
        assert same(terms[(0, 0)], -16 * t**2 / (1 + t) ** 2)

    def test_heine(self):
        """q-difference equation with evaluations at z and q*z."""
        problem = spec(
            "(1-c)^2*y(z)*y(q*z) + (1-c)*(b*z-c)*y(q*z) + (1-c)*(1-a*z)*y(z) - z*(a-1)*(b-c) = 0",
            kind="qdiff",
            parameters=["a", "b", "c", "q"],
        )
        terms = parse_equation(problem, build_context(problem))
        assert set(terms) == {(1, 1), (0, 1), (1, 0), (0, 0)}

    def test_wrong_shift(self):
        """Difference problems must use the declared step."""
        problem = spec("y(s)*y(s+1) = 1", kind="diff", variable="s", step=2)
        with pytest.raises(ProblemSpecError):
            parse_equation(problem, build_context(problem))

    def test_derivative_outside_ode(self):
        """y' is rejected in q-difference problems."""
        problem = spec("y' - y(q*z) = 0", kind="qdiff", parameters=["q"])
        with pytest.raises(ProblemSpecError):
            parse_equation(problem, build_context(problem))

    def test_ode_evaluated_elsewhere(self):
        """ode unknowns are only evaluated at the variable."""
        problem = spec("y' = y(2*z)")
        with pytest.raises(ProblemSpecError):
            parse_equation(problem, build_context(problem))

    def test_division_by_unknown(self):
        problem = spec("y' = 1/y")
        with pytest.raises(ProblemSpecError):
            parse_equation(problem, build_context(problem))

    def test_second_equals(self):
        problem = spec("y' = 1 = y")
        with pytest.raises(EquationSyntaxError):
            parse_equation(problem, build_context(problem))

    def test_model_shifted_by_initial_value(self):
        """exp: y' = y with y(0) = 1 becomes Y' = 1 + Y."""
        eq = build_equation(spec("y' = y", initial="1"))
        assert eq.kind == EquationKind.DIFFERENTIAL
        assert same(eq.initial_value, eq.context.one)
        rhs = eq.rhs()
        assert same(rhs[0], eq.context.one) and same(rhs[1], eq.context.one)

    def test_ode_must_be_linear_in_derivative(self):
        with pytest.raises(ProblemSpecError):
            build_equation(spec("y'*y = 1"))


class TestProblemFiles:
    """JSON problem documents."""

    def test_round_trip(self):
        """Rendering and re-parsing yields an identical spec."""
        text = json.dumps({
            "name": "heine",
            "kind": "qdiff",
            "parameters": ["a", "b", "c", "q"],
            "equation": "(1-c)^2*y(z)*y(q*z) + (1-c)*(b*z-c)*y(q*z) + (1-c)*(1-a*z)*y(z) - z*(a-1)*(b-c) = 0",
            "options": {"terms": 28},
        })
        problem = parse_problem(text)
        assert problem.q == "q"
        assert parse_problem(render_problem(problem)) == problem

    def test_unknown_field(self):
        """Extra keys are rejected."""
        with pytest.raises(ProblemSpecError):
            parse_problem(json.dumps({"kind": "ode", "equation": "y' = y", "colour": "red"}))

    def test_undeclared_q(self):
        with pytest.raises(ProblemSpecError):
            parse_problem(json.dumps({"kind": "qdiff", "equation": "y(q*z) = y(z)"}))

    def test_syntax_error_surfaces(self):
        """parse_problem also parses the equation."""
        with pytest.raises(EquationSyntaxError):
            parse_problem(json.dumps({"kind": "ode", "equation": "y' = 2y"}))

    def test_reserved_parameter(self):
        """n is the index symbol and cannot be a parameter."""
        with pytest.raises(ProblemSpecError):
            parse_problem(json.dumps({"kind": "ode", "parameters": ["n"], "equation": "y' = n"}))

    def test_bundled_problems_parse(self, corpus_problem):
        for name in ("tan", "exp", "gauss", "khovanskii", "airy", "qexp", "heine", "brouncker"):
            assert corpus_problem(name).name == name

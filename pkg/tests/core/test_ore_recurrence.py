"""
Tests for recurrence operators: products, right division, gcrd, unfolding
and the singularity bookkeeping of quotients.
"""
import random
from fractions import Fraction

import pytest

from core.algebra import AlgebraContext, same
from core.exceptions import InsufficientInitialConditionsError
from core.ore_recurrence import (
    RecOp,
    SeqDef,
    denominator_singularities,
    mandatory_indices,
    op_apply,
    op_gcrd,
    op_mul,
    op_rightdiv,
    seq_unfold,
)


@pytest.fixture
def ctx():
    """Context of the tangent example."""
    return AlgebraContext((), "z")


@pytest.fixture
def tan_h_values(ctx):
    """The first six remainder polynomials of the tangent fraction."""
    z = ctx.x
    return [-ctx.one, -(z**2), -(z**4) / 9, -(z**6) / 225, -(z**8) / 11025, -(z**10) / 893025]


@pytest.fixture
def big_op(ctx):
    """The order-4 recurrence satisfied by every tangent H sequence."""
    z, n = ctx.x, ctx.n
    lc = (2 * n + 5) ** 2 * (2 * n + 1) ** 2 * (2 * n + 7) ** 2 * (2 * n + 3) ** 3
    return RecOp.from_coefficients(ctx, [
        (2 * n + 7) * z**8,
        -(z**4) * (2 * n + 7) * (2 * n + 3) ** 2 * (2 * n + 1) ** 2,
        2 * z**2 * (2 * n + 5) * (2 * n + 3) ** 2 * (2 * n + 1) ** 2 * (4 * n**2 - z**2 + 20 * n + 21),
        -lc,
        lc,
    ])


@pytest.fixture
def small_op(ctx):
    """(2n+1)^2 S - z^2."""
    z, n = ctx.x, ctx.n
    return RecOp.from_coefficients(ctx, [-(z**2), (2 * n + 1) ** 2])


def random_op(ctx, rng, order):
    """Operator with small integer polynomial coefficients in n and z."""
    n, z = ctx.n, ctx.x
    coeffs = []
    for i in range(order + 1):
        c = ctx.zero
        for dn in range(2):
            for dz in range(2):
                c += rng.randint(-3, 3) * n**dn * z**dz
        if i == order and not c:
            c = n + 1
        coeffs.append(c)
    return RecOp(ctx, tuple(coeffs))


class TestOperatorBasics:
    """Construction, canonical form and application."""

    def test_trailing_zeros_stripped(self, ctx):
        """The order ignores vanishing top coefficients."""
        op = RecOp.from_coefficients(ctx, [1, 2, 0, 0])
        assert op.order == 1

    def test_canonical_clears_denominators(self, ctx):
        """Fractions, content and sign are normalized away."""
        n, z = ctx.n, ctx.x
        op = RecOp.from_coefficients(ctx, [z**2 / (2 * n + 1), -(2 * n + 1) / 3])
        canonical = op.canonical()
        assert canonical == RecOp.from_coefficients(ctx, [-3 * z**2, (2 * n + 1) ** 2])

    def test_canonical_unique_up_to_left_factor(self, ctx, small_op):
        """Left multiples by field elements share the canonical form."""
        n, z = ctx.n, ctx.x
        factor = (n - z) / (3 * n + 7)
        scaled = RecOp(ctx, tuple(factor * c for c in small_op.coefficients))
        assert scaled.canonical() == small_op.canonical()
        assert scaled.equivalent(small_op)

    def test_apply_small(self, small_op, tan_h_values):
        """(2n+1)^2 H_{n+1} - z^2 H_n vanishes on the tangent H values."""
        for k in range(5):
            assert not op_apply(small_op, tan_h_values[k:k + 2], k)

    def test_apply_kills_constants(self, ctx):
        """S - 1 annihilates constant sequences."""
        op = RecOp.from_coefficients(ctx, [-1, 1])
        c = ctx.element(Fraction(7, 3))
        assert not op_apply(op, [c, c], 4)

    def test_apply_big(self, big_op, tan_h_values):
        """The order-4 recurrence vanishes at n = 0 and n = 1."""
        assert not op_apply(big_op, tan_h_values[0:5], 0)
        assert not op_apply(big_op, tan_h_values[1:6], 1)

    def test_big_op_is_canonical(self, big_op):
        """The printed order-4 recurrence is already primitive with positive leading coefficient."""
        assert big_op.canonical() == big_op


class TestOreProducts:
    """Multiplication honoring S p(n) = p(n+1) S."""

    def test_square(self, ctx):
        """(S - 1)^2 = S^2 - 2S + 1."""
        op = RecOp.from_coefficients(ctx, [-1, 1])
        assert op_mul(op, op) == RecOp.from_coefficients(ctx, [1, -2, 1])

    def test_commutation(self, ctx):
        """S * n = (n + 1) S."""
        S = RecOp.shift_power(ctx)
        n = RecOp.scalar(ctx, ctx.n)
        assert op_mul(S, n) == RecOp.shift_power(ctx, 1, ctx.n + 1)

    def test_q_commutation(self):
        """In the q-case S * Q = qQ S."""
        ctx = AlgebraContext(("q",), "z", q_parameter="q")
        product = RecOp.shift_power(ctx) * RecOp.scalar(ctx, ctx.Q)
        assert product == RecOp.shift_power(ctx, 1, ctx.q * ctx.Q)
        assert product.shift_action == {"Q": "q*Q"}


class TestRightDivision:
    """Right Euclidean division and gcrd."""

    def test_big_by_small(self, big_op, small_op):
        """The order-4 recurrence is a left multiple of the order-1 one."""
        quotient, remainder = op_rightdiv(big_op, small_op)
        assert remainder.is_zero
        assert op_mul(quotient, small_op) == big_op

    def test_self_division(self, small_op):
        """A / A = 1."""
        quotient, remainder = op_rightdiv(small_op, small_op)
        assert remainder.is_zero
        assert quotient == RecOp.scalar(small_op.context, 1)

    def test_telescoping(self, ctx):
        """S^2 - 1 = (S + 1)(S - 1)."""
        A = RecOp.from_coefficients(ctx, [-1, 0, 1])
        C = RecOp.from_coefficients(ctx, [-1, 1])
        quotient, remainder = op_rightdiv(A, C)
        assert remainder.is_zero
        assert quotient == RecOp.from_coefficients(ctx, [1, 1])

    def test_division_identity_random(self, ctx):
        """quotient * C + remainder = A on random small operators."""
        rng = random.Random(20240601)
        for _ in range(200):
            A = random_op(ctx, rng, rng.randint(1, 3))
            C = random_op(ctx, rng, rng.randint(1, 2))
            quotient, remainder = op_rightdiv(A, C)
            assert remainder.order < C.order
            assert op_mul(quotient, C) + remainder == A

    def test_gcrd_big_small(self, big_op, small_op):
        """gcrd of the two tangent recurrences is the small one."""
        assert op_gcrd(big_op, small_op) == small_op.canonical()

    def test_gcrd_self(self, small_op):
        """gcrd(A, A) = A."""
        assert op_gcrd(small_op, small_op) == small_op.canonical()

    def test_gcrd_trivial(self, ctx):
        """S - 1 and S + 1 share no right factor."""
        g = op_gcrd(RecOp.from_coefficients(ctx, [-1, 1]), RecOp.from_coefficients(ctx, [1, 1]))
        assert g.order == 0
        assert g == RecOp.scalar(ctx, 1)

    def test_gcrd_divides_random(self, ctx):
        """The gcrd right-divides both inputs."""
        rng = random.Random(7)
        for _ in range(200):
            G = random_op(ctx, rng, 1)
            A = op_mul(random_op(ctx, rng, 1), G)
            B = op_mul(random_op(ctx, rng, 1), G)
            g = op_gcrd(A, B)
            assert g.order >= 1
            assert op_rightdiv(A, g)[1].is_zero
            assert op_rightdiv(B, g)[1].is_zero


class TestSequences:
    """Sequence definitions and unfolding."""

    def test_unfold_small(self, small_op, tan_h_values):
        """The order-1 recurrence with H_0 = -1 reproduces the H list."""
        d = SeqDef(small_op, {0: tan_h_values[0]}, frozenset({0}))
        values = seq_unfold(d, 6)
        assert all(same(u, v) for u, v in zip(values, tan_h_values))

    def test_unfold_constant(self, ctx):
        """S - 1 with u_0 = 5 is constant."""
        d = SeqDef(RecOp.from_coefficients(ctx, [-1, 1]), {0: ctx.element(5)})
        assert all(same(v, ctx.element(5)) for v in seq_unfold(d, 6))

    def test_mandatory_indices(self, ctx):
        """Roots of the leading coefficient add initial conditions."""
        n = ctx.n
        op = RecOp.from_coefficients(ctx, [1, n - 3])
        assert mandatory_indices(op) == frozenset({0, 4})

    def test_missing_initial_value(self, ctx):
        """An index set without a mandatory index is rejected."""
        n = ctx.n
        op = RecOp.from_coefficients(ctx, [1, n - 3])
        with pytest.raises(InsufficientInitialConditionsError):
            SeqDef(op, {0: ctx.one})

    def test_unfold_through_singularity(self, ctx):
        """Values at singular indices come from the initial data."""
        n = ctx.n
        op = RecOp.from_coefficients(ctx, [-1, n - 3])
        d = SeqDef(op, {0: ctx.one, 4: ctx.element(10)})
        values = seq_unfold(d, 6)
        assert same(values[1], ctx.element(Fraction(-1, 3)))
        assert same(values[4], ctx.element(10))
        assert same(values[5], ctx.element(10))


class TestDenominatorSingularities:
    """Sumset bookkeeping for quotients of right division."""

    def test_tangent_quotient(self, big_op, small_op):
        """Dividing the tangent recurrences introduces no nonnegative singularity."""
        quotient, _ = op_rightdiv(big_op, small_op)
        assert denominator_singularities(quotient, small_op) == frozenset()

    def test_sumset(self, ctx):
        """lc = n - 2 and ord B = 1 give {2, 1}."""
        n = ctx.n
        B = RecOp.from_coefficients(ctx, [1, 1])
        C = RecOp.from_coefficients(ctx, [1, n - 2])
        assert denominator_singularities(B, C) == frozenset({1, 2})

    def test_constant_leading_coefficient(self, ctx):
        """A constant leading coefficient gives the empty set."""
        B = RecOp.from_coefficients(ctx, [1, 1])
        C = RecOp.from_coefficients(ctx, [ctx.n, 1])
        assert denominator_singularities(B, C) == frozenset()

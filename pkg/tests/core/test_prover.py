"""
Tests for the proof engine: remainder sequences, their recurrences,
reduction of order and the valuation verdict.
"""
from pathlib import Path

import pytest

from core.algebra import AlgebraContext, same
from core.continued_fraction import series_to_cfrac
from core.equation_parser import build_equation, load_problem
from core.exceptions import RecurrenceSearchError
from core.guessing import guess_cfrac_formula
from core.models import GuessConfig, HRecurrenceSource, ProofStatus
from core.ore_recurrence import RecOp, SeqDef, op_rightdiv, seq_unfold
from core.prover import (
    DU0,
    U0,
    AtomForm,
    Verdict,
    annihilates,
    build_H_initials,
    comparison_window,
    find_H_recurrence,
    h_values_through,
    h_recurrence,
    prove,
    reduce_order,
    riccati_h_recurrence,
    valuation_verdict,
)
from core.series_solver import solve_series

CORPUS_DIR = Path(__file__).parent.parent.parent / "corpus"


def guessed(name, truncation):
    eq = build_equation(load_problem(CORPUS_DIR / f"{name}.json"))
    cfg = GuessConfig()
    form = guess_cfrac_formula(series_to_cfrac(solve_series(eq, truncation), cfg.N), cfg)
    return eq, form


@pytest.fixture(scope="module")
def tan():
    return guessed("tan", 42)


@pytest.fixture(scope="module")
def exp():
    return guessed("exp", 24)


@pytest.fixture(scope="module")
def tan_certificate(tan):
    eq, form = tan
    return prove(eq, form, GuessConfig())


def tangent_big_recurrence(ctx):
    """The order-4 recurrence of the tangent remainders."""
    z, n = ctx.x, ctx.n
    lc = (2 * n + 5) ** 2 * (2 * n + 1) ** 2 * (2 * n + 7) ** 2 * (2 * n + 3) ** 3
    return RecOp.from_coefficients(ctx, [
        (2 * n + 7) * z**8,
        -(z**4) * (2 * n + 7) * (2 * n + 3) ** 2 * (2 * n + 1) ** 2,
        2 * z**2 * (2 * n + 5) * (2 * n + 3) ** 2 * (2 * n + 1) ** 2 * (4 * n**2 - z**2 + 20 * n + 21),
        -lc,
        lc,
    ])


class TestRemainders:
    """H_k from the convergents."""

    def test_tangent_initials(self, tan):
        eq, form = tan
        z = eq.context.x
        initials = build_H_initials(eq, form, 6, 1, 0)
        expected = [-eq.context.one, -(z**2), -(z**4) / 9, -(z**6) / 225, -(z**8) / 11025, -(z**10) / 893025]
        assert len(initials) == 6
        assert all(same(h, e) for h, e in zip(initials.values, expected))

    def test_exponential_even_remainders(self, exp):
        """H_0 = -1 and H_1 = z^2/4 for the even convergents."""
        eq, form = exp
        z = eq.context.x
        initials = build_H_initials(eq, form, 3, form.period, form.offset)
        assert initials.stride == 2 and initials.offset == 0
        assert same(initials[0], -eq.context.one)
        assert same(initials[1], z**2 / 4)

    def test_annihilates_needs_enough_values(self, tan):
        eq, _ = tan
        assert not annihilates(tangent_big_recurrence(eq.context), [eq.context.one] * 4)


class TestHRecurrence:
    """The big recurrence, explicit and eliminated."""

    def test_riccati_formula(self, tan):
        eq, form = tan
        initials = build_H_initials(eq, form, 8, 1, 0)
        op, source = h_recurrence(eq, form, initials, 12)
        assert source == HRecurrenceSource.RICCATI
        assert op.order == 4
        assert annihilates(op, initials.values)
        assert op.equivalent(tangent_big_recurrence(eq.context))

    def test_elimination_agrees(self, tan):
        eq, form = tan
        op = find_H_recurrence(eq, form, 1, 0, 8)
        assert op.equivalent(tangent_big_recurrence(eq.context))

    def test_elimination_order_cap(self, tan):
        eq, form = tan
        with pytest.raises(RecurrenceSearchError):
            find_H_recurrence(eq, form, 1, 0, 3)

    def test_constant_partial_numerators(self, tan):
        ctx = tan[0].context
        with pytest.raises(RecurrenceSearchError):
            riccati_h_recurrence(ctx, 1 / (ctx.n + 1))

    def test_riccati_formula_is_an_identity(self):
        """
        With a_k = z (p k + r)/(k + s), H = W - (A Q^2 + B PQ + C P^2) and
        W = P'Q - PQ', the order-4 recurrence vanishes for every A, B, C.
        """
        ctx = AlgebraContext(("p", "r", "s", "A", "B", "C"), "z")
        p, r, s, A, B, C = (ctx.gen(name) for name in ("p", "r", "s", "A", "B", "C"))
        z, n = ctx.x, ctx.n
        a = z * (p * n + r) / (n + s)
        P, Q = [ctx.one, ctx.zero], [ctx.zero, ctx.one]
        for k in range(1, 7):
            ak = ctx.at_index(a, k)
            P.append(P[-1] + ak * P[-2])
            Q.append(Q[-1] + ak * Q[-2])
        P, Q = P[1:], Q[1:]
        W = [ctx.derivative(u) * v - u * ctx.derivative(v) for u, v in zip(P, Q)]
        op = riccati_h_recurrence(ctx, a)
        for part in (W, [v * v for v in Q], [u * v for u, v in zip(P, Q)], [u * u for u in P]):
            assert annihilates(op, part)
        H = [w - (A * v * v + B * u * v + C * u * u) for w, u, v in zip(W, P, Q)]
        assert annihilates(op, H)


class TestAtomForm:
    def test_product_rule(self, tan):
        ctx = tan[0].context
        z = ctx.x
        f = AtomForm.linear(ctx, [(U0, z)]).derivative()
        assert set(f.terms) == {(U0,), (DU0,)}
        assert same(f.terms[(DU0,)], z)

    def test_second_derivative_rejected(self, tan):
        ctx = tan[0].context
        with pytest.raises(RecurrenceSearchError):
            AtomForm.linear(ctx, [(DU0, ctx.one)]).derivative()


class TestReduction:
    """Reduction of order to a certified right factor."""

    def test_tangent_reduces_to_first_order(self, tan):
        eq, form = tan
        ctx = eq.context
        z, n = ctx.x, ctx.n
        initials = build_H_initials(eq, form, 8, 1, 0)
        reduction = reduce_order(tangent_big_recurrence(ctx), initials.values, GuessConfig())
        assert reduction is not None
        assert reduction.operator.equivalent(RecOp.from_coefficients(ctx, [-(z**2), (2 * n + 1) ** 2]))
        assert reduction.index_set == frozenset({0, 1, 2, 3})
        assert reduction.operator.render() == ["-z^2", "4*n^2 + 4*n + 1"]

    def test_first_order_is_not_reduced(self, tan):
        ctx = tan[0].context
        op = RecOp.from_coefficients(ctx, [-(ctx.x**2), (2 * ctx.n + 1) ** 2])
        assert reduce_order(op, [ctx.one] * 8, GuessConfig()) is None

    def test_comparison_window(self, tan):
        ctx = tan[0].context
        A = tangent_big_recurrence(ctx)
        R = RecOp.from_coefficients(ctx, [-(ctx.x**2), (2 * ctx.n + 1) ** 2])
        assert comparison_window(A, R, {0, 1, 2, 3}, set()) == (1, 2, 3, 4, 5, 6)
        assert comparison_window(A, R, {0}, {9}) == (1, 2, 3, 10, 11, 12)

    @pytest.mark.parametrize("name", ["tan", "exp"])
    def test_reduction_holds_past_the_window(self, tan, exp, name):
        """R annihilates 2N unfolded terms of the big recurrence, and both definitions agree there."""
        eq, form = {"tan": tan, "exp": exp}[name]
        cert = prove(eq, form, GuessConfig())
        reduction = cert.reduction
        assert reduction is not None
        length = 2 * cert.config.N
        big = seq_unfold(SeqDef.from_values(cert.h_recurrence, cert.initials.values), length)
        small = seq_unfold(SeqDef(reduction.operator, reduction.initial_values, reduction.index_set), length)
        assert annihilates(reduction.operator, big)
        assert all(same(u, v) for u, v in zip(big, small))
        assert op_rightdiv(cert.h_recurrence, reduction.operator)[1].is_zero
        values = h_values_through(cert.h_recurrence, cert.initials, reduction.operator, reduction.index_set)
        assert annihilates(reduction.operator, values)


class TestVerdict:
    """Valuation growth of the reduced recurrence."""

    def test_tangent_gain(self, tan):
        ctx = tan[0].context
        z, n = ctx.x, ctx.n
        R = RecOp.from_coefficients(ctx, [-(z**2), (2 * n + 1) ** 2])
        hseq = [-ctx.one, -(z**2), -(z**4) / 9]
        verdict = valuation_verdict(R, hseq, {0})
        assert verdict.status == ProofStatus.PROVEN
        assert verdict.gain == 2 and verdict.base == 0

    def test_higher_order_is_inconclusive(self, tan):
        ctx = tan[0].context
        verdict = valuation_verdict(tangent_big_recurrence(ctx), [ctx.one] * 6, {0, 1, 2, 3})
        assert verdict.status == ProofStatus.INCONCLUSIVE
        assert "order 4" in verdict.reason

    def test_no_gain_is_inconclusive(self, tan):
        ctx = tan[0].context
        z = ctx.x
        for p0, p1 in ((-1, 1), (-1, z)):
            R = RecOp.from_coefficients(ctx, [p0, p1])
            assert valuation_verdict(R, [ctx.one] * 3, {0}).status == ProofStatus.INCONCLUSIVE

    def test_window_past_lowest_coefficient_roots(self, tan):
        """(n - 2) S - z: the initial window runs to index 3."""
        ctx = tan[0].context
        z, n = ctx.x, ctx.n
        R = RecOp.from_coefficients(ctx, [-z, n - 2])
        assert valuation_verdict(R, [ctx.one] * 3, {0}).status == ProofStatus.INCONCLUSIVE
        hseq = [ctx.one, z, ctx.zero, z**5]
        verdict = valuation_verdict(R, hseq, {0})
        assert verdict.status == ProofStatus.PROVEN
        assert verdict.gain == 1 and verdict.base == 0

    def test_bound_strings(self):
        assert Verdict(ProofStatus.PROVEN, gain=2, base=0).bound(1, 0) == "val H(k) >= 2*k"
        assert Verdict(ProofStatus.PROVEN, gain=2, base=-1).bound(2, 1) == "val H(2*k+1) >= 2*k - 1"
        assert Verdict(ProofStatus.PROVEN, gain=1, base=3).bound(2, 0) == "val H(2*k) >= 1*k + 3"
        assert Verdict(ProofStatus.INCONCLUSIVE, reason="x").bound(1, 0) is None


class TestProve:
    """All stages together."""

    def test_tangent(self, tan_certificate):
        cert = tan_certificate
        assert cert.proven
        assert cert.h_source == HRecurrenceSource.RICCATI
        assert cert.reduced.render() == ["-z^2", "4*n^2 + 4*n + 1"]
        assert cert.verdict.bound(cert.stride, cert.offset) == "val H(k) >= 2*k"
        assert cert.index_set == frozenset({0, 1, 2, 3})
        assert len(cert.subsequence_operators) == 1

    def test_exponential(self, exp):
        eq, form = exp
        ctx = eq.context
        cert = prove(eq, form, GuessConfig())
        assert cert.proven
        assert cert.stride == 2 and cert.offset == 0
        assert cert.reduced.equivalent(RecOp.from_coefficients(ctx, [ctx.x**2, 4 * (2 * ctx.n + 1) ** 2]))
        assert cert.verdict.bound(cert.stride, cert.offset) == "val H(2*k) >= 2*k"
        assert len(cert.subsequence_operators) == 2

    def test_stages_are_wrapped(self, tan):
        eq, form = tan
        seen = []

        class Recorder:
            def __init__(self, name):
                self.name = name

            def __enter__(self):
                seen.append(self.name)

            def __exit__(self, *exc):
                return False

        prove(eq, form, GuessConfig(), stage=Recorder)
        assert seen == ["h_initials", "h_recurrence", "reduce", "verdict", "certify"]

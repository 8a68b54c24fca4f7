"""
C-fractions: conversion from series, convergents, closed forms and
contraction of interleaved coefficient families.

A C-fraction is a0 + a_1/(1 + a_2/(1 + ...)) with monomial partial numerators
a_k = c_k * x^e_k, e_k >= 1. Its convergents P_k/Q_k satisfy

    P_k = P_{k-1} + a_k P_{k-2},   (P_{-1}, P_0) = (1, a0),   (Q_{-1}, Q_0) = (0, 1).
"""

from dataclasses import dataclass
from typing import Callable, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger
from sympy.polys.fields import FracElement

from .algebra import AlgebraContext, Scalar, TruncSeries, nonneg_integer_roots, render, series_val
from .exceptions import AlgebraError, ContractionError, DegenerateRootSearchError, DivisionByZeroError
from .ore_recurrence import RecOp


@dataclass(frozen=True)
class Monomial:
    """c * x^e with c free of x."""

    coefficient: FracElement
    exponent: int

    def value(self, ctx: AlgebraContext) -> FracElement:
        return self.coefficient * ctx.x**self.exponent

    def render(self, ctx: AlgebraContext) -> str:
        return render(ctx, self.value(ctx))


@dataclass(frozen=True)
class CFracTerms:
    """
    The first partial numerators of a C-fraction.

    ``terminated`` marks a remainder that vanished within the truncation (the
    fraction is finite as far as the data goes); ``exhausted`` marks a
    truncation that ran out before the requested number of terms.
    """

    context: AlgebraContext
    a0: FracElement
    terms: Tuple[Monomial, ...]
    terminated: bool = False
    exhausted: bool = False

    def __post_init__(self):
        for t in self.terms:
            if t.exponent < 1 or not t.coefficient:
                raise AlgebraError("partial numerators must be nonconstant monomials")

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, k: int) -> FracElement:
        """a_k for 1 <= k <= len(self)."""
        return self.terms[k - 1].value(self.context)

    @property
    def available(self) -> int:
        return len(self.terms)

    def render(self) -> List[str]:
        ctx = self.context
        return [render(ctx, self.a0)] + [t.render(ctx) for t in self.terms]


@dataclass(frozen=True)
class TailFormula:
    """Coefficient of a_{period*j + r} as a rational function of j (or Q = q^j)."""

    coefficient: FracElement
    exponent: int


@dataclass(frozen=True)
class CFracForm:
    """
    Closed form of a C-fraction: an explicit prefix a_1..a_p, then for k > p
    a_k = tail[r](j) * x^e_r with k = period*j + r, 0 <= r < period.
    """

    context: AlgebraContext
    a0: FracElement
    prefix: Tuple[Monomial, ...]
    period: int
    tail: Tuple[TailFormula, ...]

    def __post_init__(self):
        if self.period < 1 or len(self.tail) != self.period:
            raise AlgebraError("a closed form needs one tail formula per residue class")
        for r, formula in enumerate(self.tail):
            if formula.exponent < 1:
                raise AlgebraError("tail exponents must be positive")
            pole = self.tail_pole(r)
            if pole is not None:
                raise AlgebraError(f"tail formula of class {r} has a pole at k = {pole}")

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    @property
    def offset(self) -> int:
        """First index j0 whose subsequence recurrence only uses tail formulas."""
        return max(0, self.prefix_length - 1)

    def tail_pole(self, r: int) -> Optional[int]:
        """Smallest k > p in class r where the tail coefficient has a pole."""
        ctx = self.context
        denominator = self.tail[r].coefficient.denom
        try:
            roots = nonneg_integer_roots(ctx, ctx.from_poly(denominator))
        except DegenerateRootSearchError:
            return None
        bad = sorted(self.period * j + r for j in roots if self.period * j + r > self.prefix_length)
        return bad[0] if bad else None

    def coefficient(self, k: int) -> FracElement:
        if k < 1:
            raise IndexError("partial numerators start at k = 1")
        if k <= self.prefix_length:
            return self.prefix[k - 1].coefficient
        r = k % self.period
        return self.context.at_index(self.tail[r].coefficient, k // self.period)

    def exponent(self, k: int) -> int:
        if k <= self.prefix_length:
            return self.prefix[k - 1].exponent
        return self.tail[k % self.period].exponent

    def term(self, k: int) -> FracElement:
        """a_k as a field element."""
        return self.coefficient(k) * self.context.x ** self.exponent(k)

    def symbolic_term(self, r: int, shift: int = 0) -> FracElement:
        """a_{period*(n + shift) + r} as a rational function of n and x."""
        ctx = self.context
        formula = self.tail[r]
        return ctx.shift_index(formula.coefficient, shift) * ctx.x**formula.exponent

    def terms(self, count: int) -> CFracTerms:
        """前 ``count`` 个部分分子（显式单项式）"""
        values = tuple(Monomial(self.coefficient(k), self.exponent(k)) for k in range(1, count + 1))
        return CFracTerms(self.context, self.a0, values)

    def specialize(self, values: Mapping[str, Scalar]) -> "CFracForm":
        ctx = self.context
        return CFracForm(
            ctx,
            ctx.specialize(self.a0, values),
            tuple(Monomial(ctx.specialize(m.coefficient, values), m.exponent) for m in self.prefix),
            self.period,
            tuple(TailFormula(ctx.specialize(t.coefficient, values), t.exponent) for t in self.tail),
        )

    def describe(self) -> str:
        """报告中使用的单行摘要"""
        ctx = self.context
        parts = [f"a_{k}={m.render(ctx)}" for k, m in enumerate(self.prefix, start=1)]
        for r, formula in enumerate(self.tail):
            parts.append(f"a_({self.period}n+{r})=" + render(ctx, self.symbolic_term(r)))
        return "; ".join(parts)


@dataclass(frozen=True)
class ConvergentPair:
    P: FracElement
    Q: FracElement
    index: int


# 级数转连分式

def series_to_cfrac(s: TruncSeries, max_terms: int) -> CFracTerms:
    """
    Expand the remainder of ``s`` as a ratio U/V of series with V(0) = 1.

    U = c x^v W with W(0) = 1 gives a = c x^v, and the next remainder is
    (V - W)/W. No series is inverted; each step costs O(T) and consumes v
    known orders of the truncation.
    """
    ctx = s.context
    a0 = s[0]
    U = s - a0
    V = TruncSeries(ctx, (ctx.one,) + (ctx.zero,) * (s.order - 1))
    terms: List[Monomial] = []
    while len(terms) < max_terms:
        v = series_val(U)
        if not v.exact:
            if U.order >= 2:
                return CFracTerms(ctx, a0, tuple(terms), terminated=True)
            return CFracTerms(ctx, a0, tuple(terms), exhausted=True)
        c = U[v.value]
        terms.append(Monomial(c, v.value))
        if len(terms) == max_terms:
            break
        W = U.divide_by_x(v.value) / c
        if W.order < 2:
            return CFracTerms(ctx, a0, tuple(terms), exhausted=True)
        U, V = V - W, W
    return CFracTerms(ctx, a0, tuple(terms))


# 渐近分式

def convergents(cf: Union[CFracTerms, CFracForm], upto: int) -> List[ConvergentPair]:
    """
    (P_k, Q_k) for k = 0..upto by the three-term recurrence.

    A finite CFracTerms stops at its last term.
    """
    if upto < 0:
        raise ValueError("upto must be nonnegative")
    ctx = cf.context
    if isinstance(cf, CFracTerms):
        upto = min(upto, len(cf))
    P_prev, P = ctx.one, cf.a0
    Q_prev, Q = ctx.zero, ctx.one
    out = [ConvergentPair(P, Q, 0)]
    for k in range(1, upto + 1):
        a = cf.term(k)
        P_prev, P = P, P + a * P_prev
        Q_prev, Q = Q, Q + a * Q_prev
        out.append(ConvergentPair(P, Q, k))
    return out


def general_convergents(
    ctx: AlgebraContext, a: Sequence[FracElement], b: Sequence[FracElement], b0: Optional[FracElement] = None
) -> List[ConvergentPair]:
    """
    Convergents of b0 + a_1/(b_1 + a_2/(b_2 + ...)).

    P_k = b_k P_{k-1} + a_k P_{k-2}; ``a`` and ``b`` hold a_1.. and b_1..
    """
    P_prev, P = ctx.one, ctx.zero if b0 is None else b0
    Q_prev, Q = ctx.zero, ctx.one
    out = [ConvergentPair(P, Q, 0)]
    for k, (ak, bk) in enumerate(zip(a, b), start=1):
        P_prev, P = P, bk * P + ak * P_prev
        Q_prev, Q = Q, bk * Q + ak * Q_prev
        out.append(ConvergentPair(P, Q, k))
    return out


# 部分分母

def normalize_bk(
    ctx: AlgebraContext, a: FracElement, b: FracElement
) -> Tuple[FracElement, FracElement]:
    """
    Unit-denominator equivalent of the fraction with a_k = a(k), b_k = b(k).

    Returns (a~_1, a~(n)) with a~_1 = a_1/b_1 and a~_k = a_k/(b_k b_{k-1}) for
    k >= 2. The convergents are related by P~_k = P_k/(b_1...b_k), likewise Q.
    """
    if not b:
        raise DivisionByZeroError("partial denominators vanish identically")
    first = ctx.at_index(a, 1) / ctx.at_index(b, 1)
    general = a / (b * ctx.shift_index(b, -1))
    return first, general


def normalize_bk_values(
    a: Sequence[FracElement], b: Sequence[FracElement]
) -> List[FracElement]:
    """The same transformation on explicit lists a_1.., b_1.."""
    out: List[FracElement] = []
    for k, (ak, bk) in enumerate(zip(a, b)):
        if not bk:
            raise DivisionByZeroError(f"b_{k + 1} vanishes")
        out.append(ak / bk if k == 0 else ak / (bk * b[k - 1]))
    return out


# 收缩

LinearForm = Tuple[FracElement, FracElement]


def contract_subsequence(form: CFracForm, j: int) -> RecOp:
    """
    Order-2 recurrence U_{k+2} = A(k) U_{k+1} + B(k) U_k of U_k = P_{l*k + j}.

    Every P_i near m = l*k + j is written over the basis X = P_{m+l},
    Y = P_{m+l-1}: forward with P_i = P_{i-1} + a_i P_{i-2} up to P_{m+2l},
    backward with P_{i-2} = (P_i - P_{i-1})/a_i down to P_m. Eliminating Y
    between the two gives A and B. The operator is returned monic,
    [-B, -A, 1]; it holds for every solution of the three-term recurrence,
    so for P and Q alike, at all k >= 0 once j >= form.offset.
    """
    ctx = form.context
    period = form.period
    if j < 0:
        raise ContractionError("subsequence offset must be nonnegative")

    def a(t: int) -> FracElement:
        # a_{m + t} as a function of k.
        r = (j + t) % period
        return form.symbolic_term(r, (j + t) // period)

    one, zero = ctx.one, ctx.zero
    X: LinearForm = (one, zero)
    Y: LinearForm = (zero, one)

    older, newer = Y, X
    for t in range(period + 1, 2 * period + 1):
        at = a(t)
        older, newer = newer, _combine(newer, one, older, at)
    alpha, beta = newer

    upper, lower = X, Y
    for t in range(period, 1, -1):
        at = a(t)
        if not at:
            raise ContractionError(f"partial numerator a_(m+{t}) vanishes identically")
        inv = 1 / at
        upper, lower = lower, _combine(upper, inv, lower, -inv)
    gamma, delta = lower

    if not delta:
        raise ContractionError("elimination pivot vanishes identically")
    A = alpha - beta * gamma / delta
    B = beta / delta
    logger.debug(f"收缩 周期 {period} 偏移 {j}: A={A.as_expr()}, B={B.as_expr()}")
    return RecOp(ctx, (-B, -A, one))


def _combine(u: LinearForm, cu: FracElement, v: LinearForm, cv: FracElement) -> LinearForm:
    return (u[0] * cu + v[0] * cv, u[1] * cu + v[1] * cv)


def subsequence_coefficients(op: RecOp) -> Tuple[FracElement, FracElement]:
    """(A, B) of U_{k+2} = A U_{k+1} + B U_k from a contracted operator."""
    monic = op.monic()
    if monic.order != 2:
        raise ContractionError("expected an order-2 operator")
    return -monic[1], -monic[0]


def unfold_subsequence(
    form: CFracForm, pick: Callable[[ConvergentPair], FracElement], j: int, count: int
) -> List[FracElement]:
    """pick(convergent) at indices j, j + l, ..., j + (count-1) l."""
    pairs = convergents(form, j + (count - 1) * form.period)
    return [pick(pairs[j + i * form.period]) for i in range(count)]

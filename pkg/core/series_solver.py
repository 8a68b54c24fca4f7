"""
Truncated series solutions and residuals of first-order equations.

An equation is stored as a polynomial E in two evaluations of the unknown,
with coefficients in the problem field written in series coordinates:

  - ode:   E(Y, Y') = A*Y' + sum B_i*Y^i
  - diff:  E(Y(s), Y(s+step)), series in t = 1/s
  - qdiff: E(Y(z), Y(qz))

Coefficients are cleared of denominators in the user's variable, and the
unknown is already shifted by the initial value so that series solutions
have zero constant term.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from loguru import logger
from sympy.polys.fields import FracElement

from .algebra import (
    AlgebraContext,
    TruncSeries,
    Valuation,
    expand_rational,
    power,
    same,
    series_integrate,
    series_val,
)
from .exceptions import (
    BranchingSolutionError,
    NoFormalSolutionError,
    ProblemSpecError,
    SingularEquationError,
)
from .models import EquationKind

Terms = Dict[Tuple[int, int], FracElement]


def _binomial_shift(terms: Mapping[Tuple[int, int], FracElement], a: FracElement, shift_second: bool) -> Terms:
    """Rewrite E(Y0, Y1) as E(a + Y0, a + Y1) (or E(a + Y0, Y1))."""
    out: Terms = {}

    def add(key, value):
        if value:
            out[key] = out.get(key, 0 * value) + value
            if not out[key]:
                del out[key]

    for (i, j), c in terms.items():
        for p in range(i + 1):
            cp = c * _binom(i, p) * power(a, i - p)
            if not shift_second:
                add((p, j), cp)
                continue
            for r in range(j + 1):
                add((p, r), cp * _binom(j, r) * power(a, j - r))
    return out


def _binom(n: int, k: int) -> int:
    result = 1
    for i in range(k):
        result = result * (n - i) // (i + 1)
    return result


@dataclass(frozen=True)
class EquationModel:
    """
    A first-order equation ready for series solving and residual evaluation.

    ``terms`` maps (i, j) to the coefficient of Y0^i * Y1^j, where Y1 is Y'
    (ode), Y(s + step) (diff) or Y(qz) (qdiff).
    """

    kind: EquationKind
    context: AlgebraContext
    terms: Mapping[Tuple[int, int], FracElement]
    initial_value: FracElement
    step: int = 1
    leading: Optional[FracElement] = None
    source: str = ""
    _cache: Dict[str, object] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(
        cls,
        kind: EquationKind,
        context: AlgebraContext,
        terms: Mapping[Tuple[int, int], FracElement],
        initial_value: FracElement,
        *,
        step: int = 1,
        leading: Optional[FracElement] = None,
        source: str = "",
    ) -> "EquationModel":
        """Shift the unknown by the initial value and clear denominators."""
        terms = {k: v for k, v in terms.items() if v}
        if not terms:
            raise ProblemSpecError("the equation is identically zero")
        if kind == EquationKind.DIFFERENTIAL:
            if any(j > 1 for _, j in terms) or any(i > 0 and j == 1 for i, j in terms):
                raise ProblemSpecError("an ode must be linear in y' with a coefficient free of y")
            if (0, 1) not in terms:
                raise ProblemSpecError("the equation does not involve y'")
        elif all(j == 0 for _, j in terms) or all(i == 0 for i, _ in terms):
            raise ProblemSpecError("the equation must involve both evaluations of the unknown")
        if initial_value:
            terms = _binomial_shift(terms, initial_value, kind != EquationKind.DIFFERENTIAL)

        # Clear denominators in the user's variable, then drop common content.
        user = {k: context.to_user(v) for k, v in terms.items()}
        denominator = reduce(lambda a, b: a.lcm(b), (v.denom for v in user.values()))
        cleared = {k: v.numer * denominator.exquo(v.denom) for k, v in user.items()}
        common = reduce(lambda a, b: a.gcd(b), cleared.values())
        terms = {k: context.to_user(context.from_poly(p.exquo(common))) for k, p in cleared.items()}
        return cls(kind, context, terms, initial_value, step, leading, source)

    # 形状

    @property
    def degree0(self) -> int:
        return max(i for i, _ in self.terms)

    @property
    def degree1(self) -> int:
        return max(j for _, j in self.terms)

    @property
    def degree(self) -> int:
        """Degree d of F in Y' = F(z, Y) (ode) or total degree (other kinds)."""
        if self.kind == EquationKind.DIFFERENTIAL:
            return max(i for i, j in self.terms if j == 0) if any(j == 0 for _, j in self.terms) else 0
        return max(i + j for i, j in self.terms)

    @property
    def is_riccati(self) -> bool:
        """F has degree at most 2 in Y (linear equations included)."""
        return self.kind == EquationKind.DIFFERENTIAL and self.degree <= 2

    def coefficient(self, i: int, j: int) -> FracElement:
        return self.terms.get((i, j), self.context.zero)

    def rhs(self) -> Dict[int, FracElement]:
        """F in Y' = F(z, Y) for the ode kind: f_i = -B_i / A."""
        if self.kind != EquationKind.DIFFERENTIAL:
            raise ProblemSpecError("only ode problems have a solved form")
        A = self.coefficient(0, 1)
        return {i: -c / A for (i, j), c in self.terms.items() if j == 0}

    # 第二个求值的作用

    def sigma(self, f: FracElement) -> FracElement:
        """Y1 as a function of Y0 on rational functions (diff and qdiff kinds)."""
        ctx = self.context
        if self.kind == EquationKind.Q_DIFFERENCE:
            return ctx.dilate_x(f, ctx.q)
        if self.kind == EquationKind.DIFFERENCE:
            return ctx.moebius_x(f, self.step)
        raise ProblemSpecError("ode problems have no shift")

    def sigma_series(self, s: TruncSeries) -> TruncSeries:
        ctx = self.context
        if self.kind == EquationKind.Q_DIFFERENCE:
            return s.dilate(ctx.q)
        inner = expand_rational(ctx, ctx.x / (1 + self.step * ctx.x), s.order)
        return s.compose(inner)

    def evaluate(self, f0: FracElement, f1: FracElement) -> FracElement:
        """E(f0, f1) as a field element."""
        acc = self.context.zero
        for (i, j), c in self.terms.items():
            acc += c * power(f0, i) * power(f1, j)
        return acc


# 级数求解

def solve_series(eq: EquationModel, T: int) -> TruncSeries:
    """
    The series solution with zero constant term, known modulo x^T.

    ode with a regular y' coefficient: exactly T fixed-point iterations of
    Y <- integral F(z, Y). ode with y' coefficient vanishing at 0 and the
    other kinds: undetermined coefficients, order by order.
    """
    if T < 1:
        raise ValueError("truncation order must be positive")
    if eq.kind == EquationKind.DIFFERENTIAL:
        ctx = eq.context
        A = eq.coefficient(0, 1)
        if ctx.valuation(A) == 0:
            return _fixed_point(eq, T)
        return _briot_bouquet(eq, T)
    return _linearized(eq, T)


def _fixed_point(eq: EquationModel, T: int) -> TruncSeries:
    ctx = eq.context
    F = eq.rhs()
    expansions = {}
    for i, f in F.items():
        v = ctx.valuation(f)
        if v is not None and v < 0:
            raise SingularEquationError("equation singular at origin: F has a pole at 0")
        expansions[i] = expand_rational(ctx, f, T)
    top = max(expansions)
    Y = TruncSeries.zero(ctx, T)
    previous = Y
    for iteration in range(T):
        value = TruncSeries.zero(ctx, T)
        for i in range(top, -1, -1):
            value = value * Y
            if i in expansions:
                value = value + expansions[i]
        Y = series_integrate(value).truncate(T)
        logger.trace(f"不动点迭代 {iteration}: val(Y_i+1 - Y_i) = {series_val(Y - previous)}")
        previous = Y
    return Y


def _briot_bouquet(eq: EquationModel, T: int) -> TruncSeries:
    """A*Y' + sum B_i Y^i = 0 with A(0) = 0: y_n from the coefficient of x^n."""
    ctx = eq.context
    A = expand_rational(ctx, eq.coefficient(0, 1), T + 1)
    B = {i: expand_rational(ctx, c, T + 1) for (i, j), c in eq.terms.items() if j == 0}
    zero = ctx.zero
    B1 = B.get(1)
    A1 = A[1] if A.order > 1 else zero
    B10 = B1[0] if B1 is not None else zero
    if not A1 and not B10:
        raise SingularEquationError(
            "equation singular at origin: y_n does not enter at order n"
        )
    if 0 in B and B[0][0]:
        raise NoFormalSolutionError(
            "no formal power series solution with the given initial value (order 0 residual)"
        )
    d = max(B)
    powers: Dict[int, List[FracElement]] = {i: [zero] * T for i in range(1, d + 1)}
    y = powers[1]
    for n in range(1, T):
        for i in range(2, d + 1):
            acc = zero
            for m in range(1, n):
                if y[m] and powers[i - 1][n - m]:
                    acc += y[m] * powers[i - 1][n - m]
            powers[i][n] = acc
        residual = B[0][n] if 0 in B else zero
        for k in range(2, n + 1):
            if A[k] and y[n - k + 1]:
                residual += A[k] * (n - k + 1) * y[n - k + 1]
        for i, Bi in B.items():
            if i == 0:
                continue
            lo = 1 if i == 1 else 0
            for k in range(lo, n + 1):
                if Bi[k] and powers[i][n - k]:
                    residual += Bi[k] * powers[i][n - k]
        pivot = n * A1 + B10
        if not pivot:
            raise NoFormalSolutionError(f"no formal solution: coefficient of y_{n} vanishes at order {n}")
        y[n] = -residual / pivot
    return TruncSeries(ctx, tuple(y))


def _evaluate_series(eq: EquationModel, Y0: TruncSeries, Y1: TruncSeries, coeffs: Mapping) -> TruncSeries:
    """sum c_ij Y0^i Y1^j for coefficient series ``coeffs``, at the order of Y0."""
    ctx = eq.context
    T = Y0.order
    acc = TruncSeries.zero(ctx, T)
    p0 = {0: TruncSeries.from_coefficients(ctx, [1] + [0] * (T - 1))}
    p1 = dict(p0)
    for i in range(1, eq.degree0 + 1):
        p0[i] = p0[i - 1] * Y0
    for j in range(1, eq.degree1 + 1):
        p1[j] = p1[j - 1] * Y1
    for (i, j), c in coeffs.items():
        if not c.is_zero():
            acc = acc + c.truncate(T) * p0[i] * p1[j]
    return acc


def _linearized(eq: EquationModel, T: int) -> TruncSeries:
    """
    Order-by-order solution of E(Y, sigma Y) = 0.

    The coefficient of y_n is read off the linearization of E at the current
    approximation; y_n enters first at order w = n + v with v its valuation,
    and only linearly as long as w < 2n.
    """
    ctx = eq.context
    vals = [ctx.valuation(c) for c in eq.terms.values()]
    shift = max(0, -min(vals))
    x_shift = ctx.x**shift
    work = 2 * T
    coeffs = {k: expand_rational(ctx, c * x_shift, work) for k, c in eq.terms.items()}
    d_coeffs0 = {(i - 1, j): c * i for (i, j), c in coeffs.items() if i}
    d_coeffs1 = {(i, j - 1): c * j for (i, j), c in coeffs.items() if j}

    y = [ctx.zero] * work
    for n in range(1, T):
        # Valuations v >= n are inadmissible, so order n suffices here.
        Y0 = TruncSeries(ctx, tuple(y[:n]))
        Y1 = eq.sigma_series(Y0)
        lin = _evaluate_series(eq, Y0, Y1, d_coeffs0)
        lin = lin + _evaluate_series(eq, Y0, Y1, d_coeffs1) * _rho(eq, n, n)
        v = series_val(lin)
        if not v.exact:
            if n == 1 and eq.leading is not None:
                y[1] = eq.leading
                continue
            if n == 1:
                raise BranchingSolutionError(
                    "the leading coefficient is not determined linearly; supply 'leading'"
                )
            raise SingularEquationError(f"y_{n} does not enter linearly below order {2 * n}")
        w = n + v.value
        Y0 = TruncSeries(ctx, tuple(y[:w + 1]))
        residual = _evaluate_series(eq, Y0, eq.sigma_series(Y0), coeffs)
        if any(residual[k] for k in range(w)):
            raise NoFormalSolutionError(f"no formal solution: residual nonzero below order {w}")
        value = -residual[w] / lin[v.value]
        if n == 1 and eq.leading is not None and not same(value, eq.leading):
            raise NoFormalSolutionError("supplied leading coefficient contradicts the equation")
        y[n] = value
    return TruncSeries(ctx, tuple(y[:T]))


def _rho(eq: EquationModel, n: int, order: int) -> TruncSeries:
    """sigma(x^n) / x^n."""
    ctx = eq.context
    if eq.kind == EquationKind.Q_DIFFERENCE:
        return TruncSeries(ctx, (ctx.q**n,) + (ctx.zero,) * (order - 1))
    return expand_rational(ctx, (1 + eq.step * ctx.x) ** (-n), order)


# 残差

def residual(eq: EquationModel, f: FracElement) -> FracElement:
    """f' - F(f) (ode) or E(f, sigma f) as an exact rational function."""
    ctx = eq.context
    v = ctx.valuation(f)
    if v is not None and v < 0:
        raise SingularEquationError("f has a pole at the expansion point")
    if eq.kind == EquationKind.DIFFERENTIAL:
        acc = ctx.derivative(f)
        for i, c in eq.rhs().items():
            acc -= c * power(f, i)
        return acc
    return eq.evaluate(f, eq.sigma(f))


def residual_valuation(eq: EquationModel, f: FracElement, order: int = 64) -> Valuation:
    """Valuation of the residual; '>= order' when it vanishes identically."""
    r = residual(eq, f)
    if not r:
        return Valuation(order, exact=False)
    return Valuation(eq.context.valuation(r))


def residual_numerator(eq: EquationModel, P: FracElement, Q: FracElement) -> FracElement:
    """
    The remainder H of the convergent P/Q.

    ode: L * (Q^(D-2) (P'Q - PQ') - sum f_i P^i Q^(D-i)) with D = max(2, d)
    and L the lcm of the denominators of the f_i. Other kinds: the cleared
    equation evaluated at (P, Q) and (sigma P, sigma Q), homogenized.
    """
    ctx = eq.context
    return residual_form(eq, P, Q, ctx.derivative, eq.sigma, ctx.zero)


def residual_form(
    eq: EquationModel,
    P: Any,
    Q: Any,
    derivative: Callable[[Any], Any],
    sigma: Callable[[Any], Any],
    zero: Any,
) -> Any:
    """
    The remainder expression for any P, Q supporting ring arithmetic.

    Field elements only ever multiply from the right, so P and Q may also be
    symbolic forms over the field. Q must be nonzero; P may vanish.
    """
    unit = Q**0

    def pw(x: Any, e: int) -> Any:
        return x**e if e else unit

    if eq.kind == EquationKind.DIFFERENTIAL:
        F, L = _cleared_rhs(eq)
        D = max(2, eq.degree)
        acc = pw(Q, D - 2) * (derivative(P) * Q - P * derivative(Q)) * L
        for i, c in F.items():
            acc = acc - pw(P, i) * pw(Q, D - i) * c
        return acc
    sP, sQ = sigma(P), sigma(Q)
    d0, d1 = eq.degree0, eq.degree1
    acc = zero
    for (i, j), c in eq.terms.items():
        acc = acc + pw(P, i) * pw(Q, d0 - i) * pw(sP, j) * pw(sQ, d1 - j) * c
    return acc


def _cleared_rhs(eq: EquationModel) -> Tuple[Dict[int, FracElement], FracElement]:
    """L * f_i and L, cached on the model."""
    cached = eq._cache.get("rhs")
    if cached is None:
        ctx = eq.context
        F = eq.rhs()
        L = ctx.from_poly(reduce(lambda a, b: a.lcm(b), (c.denom for c in F.values())))
        cached = ({i: c * L for i, c in F.items()}, L)
        eq._cache["rhs"] = cached
    return cached

"""
Exact arithmetic kernel.

Every quantity of one problem lives in a single sympy rational function field
over QQ (lexicographic order). Its generators are, in this order: the declared
parameters, the series variable, the index symbol ``n`` and, for q-difference
problems, ``Q`` which stands for ``q^n``. Parameter fractions, polynomials and
rational functions in the series variable are all elements of that field, so
normalization (gcd cancellation, positive leading denominator coefficient) is
done by sympy on every operation.

Truncated power series are tuples of elements free of the series variable.
For difference equations the series variable is ``t = 1/s``; rendering and
parsing translate back to the user's ``s``.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import QQ, Symbol, divisors
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from .exceptions import (
    AlgebraError,
    DegenerateRootSearchError,
    DivisionByZeroError,
    SingularEquationError,
)

# Type names used throughout the engine. ParamRat, RatZ and PolyZ are views of
# one field element type; the distinction is which generators occur.
BigRat = type(QQ(1))
ParamRat = FracElement
RatZ = FracElement
PolyZ = FracElement

Scalar = Union[int, Fraction, str, FracElement]

INDEX_NAME = "n"
Q_INDEX_NAME = "Q"
RESERVED_NAMES = frozenset({INDEX_NAME, Q_INDEX_NAME})


def big_rat(value: Union[int, Fraction, str]) -> BigRat:
    """Convert an int, Fraction or 'p/q' string to a QQ element."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    return QQ(int(value))


class AlgebraContext:
    """
    The variable/parameter context shared by every object of one problem.

    Args:
        parameters: Declared parameter names, in declaration order
        variable: The user's variable name (z, or s for difference equations)
        q_parameter: Name of the q parameter; adds the ``Q`` generator
        inverted: Series variable is ``1/variable`` (difference equations)
    """

    def __init__(
        self,
        parameters: Sequence[str] = (),
        variable: str = "z",
        *,
        q_parameter: Optional[str] = None,
        inverted: bool = False,
    ):
        self.parameters = tuple(parameters)
        self.variable = variable
        self.q_parameter = q_parameter
        self.inverted = inverted

        taken = set(self.parameters) | {variable}
        clash = taken & RESERVED_NAMES
        if clash:
            raise AlgebraError(f"reserved name used as parameter or variable: {sorted(clash)}")
        if len(set(self.parameters)) != len(self.parameters) or variable in self.parameters:
            raise AlgebraError("parameter and variable names must be distinct")
        if q_parameter is not None and q_parameter not in self.parameters:
            raise AlgebraError(f"q parameter '{q_parameter}' is not declared")

        self.series_name = _fresh_name("t", taken) if inverted else variable
        names: List[str] = [*self.parameters, self.series_name, INDEX_NAME]
        if q_parameter is not None:
            names.append(Q_INDEX_NAME)
        self.names = tuple(names)

        self.field: FracField = FracField(tuple(Symbol(s) for s in names), QQ, lex)
        self.ring: PolyRing = self.field.ring
        self._position = {name: i for i, name in enumerate(names)}

    # 生成元及其位置

    def position(self, name: str) -> int:
        return self._position[name]

    @property
    def x_index(self) -> int:
        return self._position[self.series_name]

    @property
    def n_index(self) -> int:
        return self._position[INDEX_NAME]

    @property
    def Q_index(self) -> Optional[int]:
        return self._position.get(Q_INDEX_NAME)

    @property
    def q_index(self) -> Optional[int]:
        return None if self.q_parameter is None else self._position[self.q_parameter]

    @property
    def is_q_case(self) -> bool:
        return self.q_parameter is not None

    def gen(self, name: str) -> FracElement:
        return self.field.gens[self._position[name]]

    @property
    def x(self) -> FracElement:
        return self.field.gens[self.x_index]

    @property
    def n(self) -> FracElement:
        return self.field.gens[self.n_index]

    @property
    def Q(self) -> FracElement:
        if self.Q_index is None:
            raise AlgebraError("Q only exists for q-difference problems")
        return self.field.gens[self.Q_index]

    @property
    def q(self) -> FracElement:
        if self.q_parameter is None:
            raise AlgebraError("no q parameter declared")
        return self.gen(self.q_parameter)

    @property
    def index_variable(self) -> FracElement:
        """The symbol interpolation and recurrence ansatzes are polynomial in."""
        return self.Q if self.is_q_case else self.n

    @property
    def zero(self) -> FracElement:
        return self.field.zero

    @property
    def one(self) -> FracElement:
        return self.field.one

    def __repr__(self) -> str:
        return f"AlgebraContext({', '.join(self.names)})"

    def __getstate__(self):
        return {
            "parameters": self.parameters,
            "variable": self.variable,
            "q_parameter": self.q_parameter,
            "inverted": self.inverted,
        }

    def __setstate__(self, state):
        self.__init__(
            state["parameters"],
            state["variable"],
            q_parameter=state["q_parameter"],
            inverted=state["inverted"],
        )

    # 构造

    def element(self, value: Scalar) -> FracElement:
        """Lift an int, Fraction, 'p/q' string or field element into the field."""
        if isinstance(value, FracElement):
            if value.field != self.field:
                raise AlgebraError("element belongs to a different context")
            return value
        return self.field.ground_new(big_rat(value))

    def from_poly(self, poly: PolyElement) -> FracElement:
        return self.field.new(poly)

    def symbol_table(self) -> Dict[str, FracElement]:
        """Names visible to the parser, mapped to field elements."""
        table = {name: self.gen(name) for name in self.parameters}
        table[self.variable] = 1 / self.x if self.inverted else self.x
        table[INDEX_NAME] = self.n
        if self.is_q_case:
            table[Q_INDEX_NAME] = self.Q
        return table

    # 谓词

    def depends_on(self, f: FracElement, index: int) -> bool:
        return _poly_depends(f.numer, index) or _poly_depends(f.denom, index)

    def is_x_free(self, f: FracElement) -> bool:
        return not self.depends_on(f, self.x_index)

    def is_index_free(self, f: FracElement) -> bool:
        if self.depends_on(f, self.n_index):
            return False
        return self.Q_index is None or not self.depends_on(f, self.Q_index)

    # 关于级数变量的赋值

    def valuation(self, f: FracElement) -> Optional[int]:
        """Order of ``f`` at the expansion point; None for zero."""
        if not f:
            return None
        i = self.x_index
        return f.numer.tail_degree(i) - f.denom.tail_degree(i)

    # 代换

    def substitute(
        self, f: FracElement, index: int, numer: PolyElement, denom: Optional[PolyElement] = None
    ) -> FracElement:
        """Substitute generator ``index`` by ``numer/denom`` in ``f``."""
        denom = self.ring.one if denom is None else denom
        a, b = _substitute_poly(f.numer, index, numer, denom)
        c, d = _substitute_poly(f.denom, index, numer, denom)
        if not c:
            raise DivisionByZeroError("substitution makes the denominator vanish")
        return self.field.new(a * d, b * c)

    def shift_index(self, f: FracElement, s: int = 1) -> FracElement:
        """Action of S^s: n -> n + s and Q -> q^s Q."""
        if s == 0:
            return f
        ring = self.ring
        ni = self.n_index
        result = f
        if self.depends_on(f, ni):
            result = self.substitute(result, ni, ring.gens[ni] + s)
        Qi = self.Q_index
        if Qi is not None and self.depends_on(result, Qi):
            qpoly = ring.gens[self.q_index]
            if s > 0:
                result = self.substitute(result, Qi, ring.gens[Qi] * qpoly**s)
            else:
                result = self.substitute(result, Qi, ring.gens[Qi], qpoly ** (-s))
        return result

    def at_index(self, f: FracElement, k: int) -> FracElement:
        """Specialize the index: n -> k and Q -> q^k."""
        ring = self.ring
        result = f
        Qi = self.Q_index
        if Qi is not None and self.depends_on(result, Qi):
            qpoly = ring.gens[self.q_index]
            if k >= 0:
                result = self.substitute(result, Qi, qpoly**k)
            else:
                result = self.substitute(result, Qi, ring.one, qpoly ** (-k))
        ni = self.n_index
        if self.depends_on(result, ni):
            numer = result.numer.subs(ni, k)
            denom = result.denom.subs(ni, k)
            if not denom:
                raise DivisionByZeroError(f"denominator vanishes at index {k}")
            result = self.field.new(numer, denom)
        return result

    def dilate_x(self, f: FracElement, factor: FracElement) -> FracElement:
        """x -> factor * x, with ``factor`` a polynomial free of x."""
        if not self.depends_on(f, self.x_index):
            return f
        i = self.x_index
        return self.substitute(f, i, self.ring.gens[i] * factor.numer, factor.denom)

    def moebius_x(self, f: FracElement, step: int) -> FracElement:
        """x -> x/(1 + step*x): the shift s -> s + step written in t = 1/s."""
        if not self.depends_on(f, self.x_index):
            return f
        i = self.x_index
        xpoly = self.ring.gens[i]
        return self.substitute(f, i, xpoly, self.ring.one + step * xpoly)

    def invert_x(self, f: FracElement) -> FracElement:
        """x -> 1/x; converts between series coordinates and the user's variable."""
        if not self.depends_on(f, self.x_index):
            return f
        return self.substitute(f, self.x_index, self.ring.one, self.ring.gens[self.x_index])

    def to_user(self, f: FracElement) -> FracElement:
        return self.invert_x(f) if self.inverted else f

    def derivative(self, f: FracElement) -> FracElement:
        return f.diff(self.x)

    def specialize(self, f: FracElement, values: Mapping[str, Scalar]) -> FracElement:
        """Substitute numbers for parameters (never root-solving)."""
        numer, denom = f.numer, f.denom
        for name, value in values.items():
            if name not in self.parameters:
                raise AlgebraError(f"cannot specialize undeclared parameter '{name}'")
            i = self._position[name]
            v = big_rat(value) if not isinstance(value, FracElement) else value
            numer = numer.subs(i, v)
            denom = denom.subs(i, v)
        if not denom:
            raise DivisionByZeroError(f"specialization {dict(values)} hits a pole")
        return self.field.new(numer, denom)

    def q_limit(self, f: FracElement, depth: int = 10) -> FracElement:
        """
        Limit of ``f`` as q -> 1 with Q = q^n.

        Numerator and denominator are expanded in eps with q = 1 + eps and
        Q = (1 + eps)^n; the ratio of the lowest nonzero orders is the limit.
        """
        if not self.is_q_case:
            raise AlgebraError("q_limit needs a q-difference context")
        num = self._eps_expansion(f.numer, depth)
        den = self._eps_expansion(f.denom, depth)
        j = next((k for k, c in enumerate(den) if c), None)
        if j is None:
            raise AlgebraError(f"denominator vanishes to order >= {depth} at q = 1")
        i = next((k for k, c in enumerate(num) if c), None)
        if i is None or i > j:
            return self.zero
        if i < j:
            raise AlgebraError("formula has a pole at q = 1")
        return num[i] / den[j]

    def _eps_expansion(self, poly: PolyElement, depth: int) -> List[FracElement]:
        qi, Qi = self.q_index, self.Q_index
        n = self.n
        out = [self.zero] * depth
        for monom, coeff in poly.iterterms():
            a, b = monom[qi], monom[Qi]
            rest = list(monom)
            rest[qi] = rest[Qi] = 0
            base = self.from_poly(self.ring.term_new(tuple(rest), coeff))
            exponent = n * b + a
            binom = self.one
            for m in range(depth):
                out[m] += base * binom
                binom = binom * (exponent - m) / (m + 1)
        return out

    # 按级数变量的幂拆分多项式

    def split_x(self, poly: PolyElement) -> Dict[int, PolyElement]:
        """Coefficients of ``poly`` as a polynomial in x (x-free ring elements)."""
        i = self.x_index
        parts: Dict[int, Dict[Tuple[int, ...], BigRat]] = {}
        for monom, coeff in poly.iterterms():
            e = monom[i]
            rest = monom[:i] + (0,) + monom[i + 1:]
            parts.setdefault(e, {})[rest] = coeff
        return {e: self.ring.from_dict(terms) for e, terms in parts.items()}

    def x_coefficients(self, f: FracElement) -> Dict[int, FracElement]:
        """Coefficients in x of an element whose denominator is free of x."""
        if _poly_depends(f.denom, self.x_index):
            raise AlgebraError("expected a polynomial in the series variable")
        den = self.field.new(f.denom)
        return {e: self.from_poly(p) / den for e, p in self.split_x(f.numer).items()}

    def lowest_x_coefficient(self, f: FracElement) -> FracElement:
        """Coefficient of the lowest power of x in a polynomial-in-x element."""
        coeffs = self.x_coefficients(f)
        return coeffs[min(coeffs)] if coeffs else self.zero


def _fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken) | RESERVED_NAMES
    name = base
    while name in taken:
        name += "_"
    return name


def _poly_depends(poly: PolyElement, index: int) -> bool:
    return any(monom[index] for monom in poly.itermonoms())


def _substitute_poly(
    poly: PolyElement, index: int, numer: PolyElement, denom: PolyElement
) -> Tuple[PolyElement, PolyElement]:
    """poly(numer/denom) as a (numerator, denominator) pair, homogenized."""
    ring = poly.ring
    if not poly:
        return ring.zero, ring.one
    d = poly.degree(index)
    if d <= 0:
        return poly, ring.one
    parts: Dict[int, Dict[Tuple[int, ...], BigRat]] = {}
    for monom, coeff in poly.iterterms():
        e = monom[index]
        rest = monom[:index] + (0,) + monom[index + 1:]
        parts.setdefault(e, {})[rest] = coeff
    numer_powers = [ring.one]
    denom_powers = [ring.one]
    for _ in range(d):
        numer_powers.append(numer_powers[-1] * numer)
        denom_powers.append(denom_powers[-1] * denom)
    result = ring.zero
    for e, terms in parts.items():
        result += ring.from_dict(terms) * numer_powers[e] * denom_powers[d - e]
    return result, denom_powers[d]


# 环运算辅助函数

def normalize(f: FracElement) -> FracElement:
    """Canonical form of ``f`` (gcd-reduced, positive leading denominator coefficient)."""
    return f.field.new(f.numer, f.denom)


def divide(f: FracElement, g: FracElement) -> FracElement:
    if not g:
        raise DivisionByZeroError("division by zero")
    return f / g


def power(f: FracElement, e: int) -> FracElement:
    """f**e with f**0 = 1 for every f; sympy rejects 0**0."""
    return f**e if e else f.field.one


def same(f: FracElement, g: FracElement) -> bool:
    """Exact equality of two field elements."""
    return not (f - g)


# 截断幂级数

@dataclass(frozen=True, eq=False)
class Valuation:
    """Valuation of a series or rational function; ``exact=False`` means '>= value'."""

    value: int
    exact: bool = True

    def at_least(self, k: int) -> bool:
        return self.value >= k

    def __eq__(self, other) -> bool:
        if isinstance(other, Valuation):
            return (self.value, self.exact) == (other.value, other.exact)
        if isinstance(other, int):
            return self.exact and self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.exact))

    def __str__(self) -> str:
        return str(self.value) if self.exact else f">= {self.value}"


@dataclass(frozen=True, eq=False)
class TruncSeries:
    """
    Power series known modulo x^T.

    Coefficients are field elements free of the series variable; ``order`` is
    the truncation order T (number of known coefficients).
    """

    context: AlgebraContext
    coefficients: Tuple[FracElement, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise AlgebraError("a truncated series needs at least one known coefficient")

    # 构造

    @classmethod
    def zero(cls, context: AlgebraContext, order: int) -> "TruncSeries":
        return cls(context, (context.zero,) * order)

    @classmethod
    def from_coefficients(cls, context: AlgebraContext, values: Iterable[Scalar]) -> "TruncSeries":
        return cls(context, tuple(context.element(v) for v in values))

    @classmethod
    def from_rational(cls, context: AlgebraContext, f: FracElement, order: int) -> "TruncSeries":
        return expand_rational(context, f, order)

    # 访问器

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, i: int) -> FracElement:
        return self.coefficients[i]

    def __iter__(self) -> Iterator[FracElement]:
        return iter(self.coefficients)

    @property
    def known_valuation(self) -> Valuation:
        return series_val(self)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def to_polynomial(self) -> FracElement:
        """Sum of the known terms as a polynomial in the series variable."""
        x = self.context.x
        result = self.context.zero
        for c in reversed(self.coefficients):
            result = result * x + c
        return result

    # 运算

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise AlgebraError(f"cannot extend a series known to order {self.order} to {order}")
        return TruncSeries(self.context, self.coefficients[:order])

    def _coerce(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            return other
        value = self.context.element(other)
        if not self.context.is_x_free(value):
            return expand_rational(self.context, value, self.order)
        return TruncSeries(self.context, (value,) + (self.context.zero,) * (self.order - 1))

    def __add__(self, other) -> "TruncSeries":
        other = self._coerce(other)
        T = min(self.order, other.order)
        return TruncSeries(self.context, tuple(self[i] + other[i] for i in range(T)))

    __radd__ = __add__

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.context, tuple(-c for c in self.coefficients))

    def __sub__(self, other) -> "TruncSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncSeries":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TruncSeries":
        if isinstance(other, (int, Fraction)) or (
            isinstance(other, FracElement) and self.context.is_x_free(other)
        ):
            c = self.context.element(other)
            return TruncSeries(self.context, tuple(c * a for a in self.coefficients))
        other = self._coerce(other)
        T = min(self.order, other.order)
        zero = self.context.zero
        out = []
        for k in range(T):
            acc = zero
            for i in range(k + 1):
                a = self[i]
                if a:
                    b = other[k - i]
                    if b:
                        acc += a * b
            out.append(acc)
        return TruncSeries(self.context, tuple(out))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "TruncSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = self._coerce(1)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries) or other.order != self.order:
            return False
        return all(same(a, b) for a, b in zip(self, other))

    __hash__ = None  # type: ignore[assignment]

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by x^k (k >= 0); the truncation order grows by k."""
        if k < 0:
            return self.divide_by_x(-k)
        return TruncSeries(self.context, (self.context.zero,) * k + self.coefficients)

    def divide_by_x(self, k: int) -> "TruncSeries":
        """Divide by x^k; the first k coefficients must vanish."""
        if any(self.coefficients[:k]):
            raise AlgebraError(f"series is not divisible by x^{k}")
        if k >= self.order:
            raise AlgebraError("division by x exhausts the truncation")
        return TruncSeries(self.context, self.coefficients[k:])

    def derivative(self) -> "TruncSeries":
        if self.order == 1:
            return TruncSeries(self.context, (self.context.zero,))
        return TruncSeries(
            self.context, tuple(i * self[i] for i in range(1, self.order))
        )

    def integrate(self) -> "TruncSeries":
        return series_integrate(self)

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse; needs a nonzero constant term."""
        c0 = self[0]
        if not c0:
            raise DivisionByZeroError("series with zero constant term is not invertible")
        inv0 = 1 / c0
        out = [inv0]
        for k in range(1, self.order):
            acc = self.context.zero
            for i in range(1, k + 1):
                a = self[i]
                if a:
                    acc += a * out[k - i]
            out.append(-acc * inv0)
        return TruncSeries(self.context, tuple(out))

    def __truediv__(self, other) -> "TruncSeries":
        if isinstance(other, (int, Fraction)) or (
            isinstance(other, FracElement) and self.context.is_x_free(other)
        ):
            c = self.context.element(other)
            if not c:
                raise DivisionByZeroError("division of a series by zero")
            return self * (1 / c)
        return self * self._coerce(other).inverse()

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """self(inner) for ``inner`` with zero constant term."""
        if inner[0]:
            raise AlgebraError("composition needs an inner series without constant term")
        T = min(self.order, inner.order)
        result = TruncSeries.zero(self.context, T)
        for c in reversed(self.coefficients[:T]):
            result = result * inner.truncate(T) + c
        return result

    def dilate(self, factor: FracElement) -> "TruncSeries":
        """Coefficient-wise x -> factor * x."""
        power = self.context.one
        out = []
        for c in self.coefficients:
            out.append(c * power)
            power = power * factor
        return TruncSeries(self.context, tuple(out))

    def __repr__(self) -> str:
        shown = ", ".join(str(c.as_expr()) for c in self.coefficients[:6])
        more = ", ..." if self.order > 6 else ""
        return f"TruncSeries([{shown}{more}], T={self.order})"


def series_val(s: TruncSeries) -> Valuation:
    """Index of the first nonzero coefficient, or '>= T' for a zero series."""
    for i, c in enumerate(s.coefficients):
        if c:
            return Valuation(i)
    return Valuation(s.order, exact=False)


def series_integrate(s: TruncSeries) -> TruncSeries:
    """Termwise antiderivative with zero constant term; order grows by one."""
    ctx = s.context
    return TruncSeries(ctx, (ctx.zero,) + tuple(c / (i + 1) for i, c in enumerate(s.coefficients)))


def expand_rational(ctx: AlgebraContext, f: FracElement, order: int) -> TruncSeries:
    """Taylor expansion of a rational function in x regular at the origin."""
    if ctx.is_x_free(f):
        return TruncSeries(ctx, (f,) + (ctx.zero,) * (order - 1))
    numer = ctx.split_x(f.numer)
    denom = ctx.split_x(f.denom)
    if 0 not in denom:
        raise SingularEquationError("equation singular at origin: denominator vanishes at 0")
    d_parts = {e: ctx.from_poly(p) for e, p in denom.items()}
    d0 = d_parts.pop(0)
    inv0 = 1 / d0
    out: List[FracElement] = []
    for i in range(order):
        acc = ctx.from_poly(numer[i]) if i in numer else ctx.zero
        for j, dj in d_parts.items():
            if j <= i:
                acc -= dj * out[i - j]
        out.append(acc * inv0)
    return TruncSeries(ctx, tuple(out))


def poly_eval_at_series(
    F: Mapping[int, FracElement], s: TruncSeries
) -> TruncSeries:
    """
    Evaluate F(Y) = sum F[i] Y^i at Y = s.

    Coefficients F[i] are rational functions in x; each must be regular at 0.
    """
    ctx = s.context
    T = s.order
    if not F:
        return TruncSeries.zero(ctx, T)
    result = TruncSeries.zero(ctx, T)
    for i in range(max(F), -1, -1):
        coeff = F.get(i)
        result = result * s
        if coeff:
            result = result + expand_rational(ctx, coeff, T)
    return result


def nonneg_integer_roots(ctx: AlgebraContext, p: FracElement) -> frozenset:
    """
    Nonnegative integers k with p(k) = 0 identically in every other symbol.

    In the q-case p may involve Q = q^n; p(k) then means Q -> q^k.
    """
    poly = p.numer if isinstance(p, FracElement) else p
    if not poly:
        raise DegenerateRootSearchError("zero polynomial: every index is a root")
    Qi = ctx.Q_index
    if Qi is not None and _poly_depends(poly, Qi):
        return _q_integer_roots(ctx, poly)
    return _integer_roots(poly, ctx.n_index)


def _integer_roots(poly: PolyElement, index: int) -> frozenset:
    if not _poly_depends(poly, index):
        return frozenset()
    groups: Dict[Tuple[int, ...], Dict[int, BigRat]] = {}
    for monom, coeff in poly.iterterms():
        rest = monom[:index] + monom[index + 1:]
        groups.setdefault(rest, {})[monom[index]] = coeff
    univariate = PolyRing((Symbol(INDEX_NAME),), QQ, lex)
    g = univariate.zero
    for terms in groups.values():
        g = g.gcd(univariate.from_dict({(e,): c for e, c in terms.items()}))
    if g.degree(0) <= 0:
        return frozenset()
    _, g = g.clear_denoms()
    roots = set()
    low = g.tail_degree(0)
    if low > 0:
        roots.add(0)
    c0 = abs(int(QQ.numer(g[(low,)])))
    for d in divisors(c0):
        if not g(d):
            roots.add(int(d))
    return frozenset(roots)


def _q_integer_roots(ctx: AlgebraContext, poly: PolyElement) -> frozenset:
    ring = ctx.ring
    Qi, qi, ni = ctx.Q_index, ctx.q_index, ctx.n_index
    bound = max(poly.degree(qi), poly.degree(Qi), 0)
    roots = set()
    for k in range(bound + 1):
        value = poly.compose(ring.gens[Qi], ring.gens[qi] ** k)
        if _poly_depends(value, ni):
            value = value.subs(ni, k)
        if not value:
            roots.add(k)
    # Beyond the q-degree the q-exponent ranges of the Q-coefficients of
    # p(k, q^k) are disjoint, so each coefficient must vanish at n = k.
    for rho in _integer_roots(poly, ni):
        if rho > bound:
            roots.add(rho)
    return frozenset(roots)


# 渲染

def render(ctx: AlgebraContext, f: FracElement) -> str:
    """
    Canonical string of a field element.

    Expanded polynomials, terms in decreasing lexicographic order, ``^`` for
    powers, explicit ``*``; fractions as ``(num)/(den)``. For difference
    problems the series variable is shown back in the user's variable.
    """
    f = ctx.to_user(f)
    names = list(ctx.names)
    names[ctx.x_index] = ctx.variable
    numer = render_poly(f.numer, names)
    if f.denom == ctx.ring.one:
        return numer
    return f"({numer})/({render_poly(f.denom, names)})"


def render_poly(poly: PolyElement, names: Sequence[str]) -> str:
    if not poly:
        return "0"
    pieces: List[str] = []
    for monom, coeff in poly.terms():
        factors = [
            name if e == 1 else f"{name}^{e}" for name, e in zip(names, monom) if e
        ]
        c = Fraction(int(QQ.numer(coeff)), int(QQ.denom(coeff)))
        if not factors:
            term = str(c)
        elif c == 1:
            term = "*".join(factors)
        elif c == -1:
            term = "-" + "*".join(factors)
        else:
            term = f"{c}*" + "*".join(factors)
        pieces.append(term)
    out = pieces[0]
    for term in pieces[1:]:
        out += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
    return out

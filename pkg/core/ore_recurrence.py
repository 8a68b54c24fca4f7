"""
Linear recurrence operators in the shift S: n -> n + 1.

An operator p_0 + p_1 S + ... + p_r S^r acts on sequences by
(A u)(n) = sum p_i(n) u(n + i). Coefficients are elements of the problem's
field; S commutes with everything except the index symbols, on which it acts
by n -> n + 1 and, in the q-case, Q -> q Q.
"""

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, FrozenSet, List, Mapping, Sequence, Tuple, Union

from loguru import logger
from sympy import QQ
from sympy.polys.fields import FracElement

from .algebra import AlgebraContext, Scalar, nonneg_integer_roots, render, same
from .exceptions import (
    DivisionByZeroError,
    InsufficientInitialConditionsError,
    InternalConsistencyError,
    OperatorError,
)


@dataclass(frozen=True, eq=False)
class RecOp:
    """
    Recurrence operator with coefficients p_0..p_r (p_r != 0).

    Coefficients may be rational in n while an operator is being divided;
    ``canonical()`` returns the polynomial normal form used for comparisons
    and certificates.
    """

    context: AlgebraContext
    coefficients: Tuple[FracElement, ...]

    def __post_init__(self):
        coeffs = list(self.coefficients)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    # 构造

    @classmethod
    def from_coefficients(cls, context: AlgebraContext, coeffs: Sequence[Scalar]) -> "RecOp":
        return cls(context, tuple(context.element(c) for c in coeffs))

    @classmethod
    def zero(cls, context: AlgebraContext) -> "RecOp":
        return cls(context, ())

    @classmethod
    def scalar(cls, context: AlgebraContext, c: Scalar) -> "RecOp":
        return cls(context, (context.element(c),))

    @classmethod
    def shift_power(cls, context: AlgebraContext, k: int = 1, c: Scalar = 1) -> "RecOp":
        """c * S^k."""
        return cls(context, (context.zero,) * k + (context.element(c),))

    # 访问器

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def leading_coefficient(self) -> FracElement:
        if self.is_zero:
            raise OperatorError("the zero operator has no leading coefficient")
        return self.coefficients[-1]

    @property
    def shift_action(self) -> Dict[str, str]:
        """Extra symbol substitutions applied by S besides n -> n + 1."""
        ctx = self.context
        return {"Q": f"{ctx.q_parameter}*Q"} if ctx.is_q_case else {}

    def __getitem__(self, i: int) -> FracElement:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else self.context.zero

    # 运算

    def _lift(self, other: Union["RecOp", Scalar]) -> "RecOp":
        if isinstance(other, RecOp):
            return other
        return RecOp.scalar(self.context, other)

    def __add__(self, other) -> "RecOp":
        other = self._lift(other)
        size = max(len(self.coefficients), len(other.coefficients))
        return RecOp(self.context, tuple(self[i] + other[i] for i in range(size)))

    __radd__ = __add__

    def __neg__(self) -> "RecOp":
        return RecOp(self.context, tuple(-c for c in self.coefficients))

    def __sub__(self, other) -> "RecOp":
        return self + (-self._lift(other))

    def __mul__(self, other) -> "RecOp":
        return op_mul(self, self._lift(other))

    def __rmul__(self, other) -> "RecOp":
        return op_mul(self._lift(other), self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RecOp) or other.order != self.order:
            return False
        return all(same(a, b) for a, b in zip(self.coefficients, other.coefficients))

    __hash__ = None  # type: ignore[assignment]

    # 规范形式

    def canonical(self) -> "RecOp":
        """
        Denominators cleared, common polynomial factor and integer content
        removed, leading coefficient of p_r positive in the lex order.
        """
        if self.is_zero:
            return self
        ctx = self.context
        denominator = reduce(lambda a, b: a.lcm(b), (c.denom for c in self.coefficients))
        polys = [c.numer * denominator.exquo(c.denom) for c in self.coefficients]
        common = reduce(lambda a, b: a.gcd(b), (p for p in polys if p))
        polys = [p.exquo(common) if p else p for p in polys]

        den, num = 1, 0
        for p in polys:
            for c in p.itercoeffs():
                den = math.lcm(den, int(QQ.denom(c)))
        for p in polys:
            for c in p.itercoeffs():
                num = math.gcd(num, int(QQ.numer(c * den)))
        scale = QQ(den, num)
        if polys[-1].LC < 0:
            scale = -scale
        return RecOp(ctx, tuple(ctx.from_poly(p.mul_ground(scale)) for p in polys))

    def monic(self) -> "RecOp":
        lc = self.leading_coefficient
        return RecOp(self.context, tuple(c / lc for c in self.coefficients))

    def equivalent(self, other: "RecOp") -> bool:
        """Equal up to a nonzero left factor from the coefficient field."""
        return self.canonical() == other.canonical()

    # 求值

    def apply(self, window: Sequence[FracElement], at: int) -> FracElement:
        return op_apply(self, window, at)

    def at_index(self, k: int) -> List[FracElement]:
        return [self.context.at_index(c, k) for c in self.coefficients]

    def specialize(self, values: Mapping[str, Scalar]) -> "RecOp":
        ctx = self.context
        return RecOp(ctx, tuple(ctx.specialize(c, values) for c in self.coefficients))

    # 渲染

    def render(self) -> List[str]:
        """Canonical strings of p_0..p_r."""
        return [render(self.context, c) for c in self.coefficients]

    def display(self) -> str:
        if self.is_zero:
            return "0"
        pieces = []
        for i, c in enumerate(self.coefficients):
            if not c:
                continue
            shift = "" if i == 0 else ("*S" if i == 1 else f"*S^{i}")
            pieces.append(f"({render(self.context, c)}){shift}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"RecOp({self.display()})"


def op_apply(A: RecOp, window: Sequence[FracElement], at: int) -> FracElement:
    """(A u)(at) for a window u_at .. u_{at + ord A}."""
    if len(window) < A.order + 1:
        raise OperatorError(f"window of {len(window)} values is too short for order {A.order}")
    ctx = A.context
    acc = ctx.zero
    for c, u in zip(A.coefficients, window):
        if c and u:
            acc += ctx.at_index(c, at) * u
    return acc


def op_mul(B: RecOp, C: RecOp) -> RecOp:
    """Ore product: S * p(n) = p(n + 1) * S."""
    ctx = B.context
    if B.is_zero or C.is_zero:
        return RecOp.zero(ctx)
    out = [ctx.zero] * (B.order + C.order + 1)
    for i, b in enumerate(B.coefficients):
        if not b:
            continue
        for j, c in enumerate(C.coefficients):
            if c:
                out[i + j] += b * ctx.shift_index(c, i)
    return RecOp(ctx, tuple(out))


def op_rightdiv(A: RecOp, C: RecOp) -> Tuple[RecOp, RecOp]:
    """
    Right Euclidean division: A = quotient * C + remainder, ord remainder < ord C.

    Quotient coefficients live in the coefficient field (rational in n).
    """
    if C.is_zero:
        raise DivisionByZeroError("right division by the zero operator")
    ctx = A.context
    quotient = RecOp.zero(ctx)
    remainder = A
    shifted_lc: Dict[int, FracElement] = {}
    while not remainder.is_zero and remainder.order >= C.order:
        d = remainder.order - C.order
        if d not in shifted_lc:
            shifted_lc[d] = ctx.shift_index(C.leading_coefficient, d)
        term = RecOp.shift_power(ctx, d, remainder.leading_coefficient / shifted_lc[d])
        quotient = quotient + term
        previous = remainder.order
        remainder = remainder - op_mul(term, C)
        if not remainder.is_zero and remainder.order >= previous:
            raise InternalConsistencyError("leading term did not cancel in right division")
    return quotient, remainder


def op_gcrd(A: RecOp, G: RecOp) -> RecOp:
    """Greatest common right divisor in canonical form (order 0 means 1)."""
    if A.is_zero:
        return G.canonical()
    if G.is_zero:
        return A.canonical()
    r0, r1 = (A, G) if A.order >= G.order else (G, A)
    r0, r1 = r0.canonical(), r1.canonical()
    while not r1.is_zero:
        _, remainder = op_rightdiv(r0, r1)
        r0, r1 = r1, remainder.canonical()
    return r0.canonical()


def mandatory_indices(op: RecOp) -> FrozenSet[int]:
    """{0..r-1} together with rho + r for every nonnegative integer root rho of lc."""
    r = op.order
    roots = nonneg_integer_roots(op.context, op.leading_coefficient.numer)
    return frozenset(range(r)) | frozenset(rho + r for rho in roots)


@dataclass(frozen=True)
class SeqDef:
    """A sequence defined by an operator and values on the index set."""

    op: RecOp
    initial_values: Mapping[int, FracElement]
    index_set: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        index_set = frozenset(self.index_set) or frozenset(self.initial_values)
        object.__setattr__(self, "index_set", index_set)
        missing_from_set = mandatory_indices(self.op) - index_set
        if missing_from_set:
            raise InsufficientInitialConditionsError(
                f"insufficient initial conditions: index set lacks {sorted(missing_from_set)}"
            )
        missing_values = index_set - set(self.initial_values)
        if missing_values:
            raise InsufficientInitialConditionsError(
                f"insufficient initial conditions: no value at {sorted(missing_values)}"
            )

    @classmethod
    def from_values(cls, op: RecOp, values: Sequence[FracElement]) -> "SeqDef":
        """Take the mandatory initial values from a list of known terms."""
        index_set = mandatory_indices(op)
        if max(index_set, default=-1) >= len(values):
            raise InsufficientInitialConditionsError(
                f"insufficient initial conditions: need {max(index_set) + 1} values, got {len(values)}"
            )
        return cls(op, {i: values[i] for i in index_set}, index_set)


def seq_unfold(d: SeqDef, upto: int) -> List[FracElement]:
    """The first ``upto`` terms of the sequence defined by ``d``."""
    op = d.op
    ctx = op.context
    r = op.order
    values: List[FracElement] = []
    for idx in range(upto):
        if idx in d.index_set:
            values.append(ctx.element(d.initial_values[idx]))
            continue
        m = idx - r
        coeffs = op.at_index(m)
        lc = coeffs[-1]
        if not lc:
            raise InsufficientInitialConditionsError(
                f"insufficient initial conditions: leading coefficient vanishes at {m}"
            )
        acc = ctx.zero
        for c, u in zip(coeffs[:-1], values[m:idx]):
            if c and u:
                acc += c * u
        values.append(-acc / lc)
    return values


def denominator_singularities(B: RecOp, C: RecOp) -> FrozenSet[int]:
    """
    Integer singularities a quotient B of a division by C may introduce.

    Returns the sumset (roots of lc C) + {0, -1, .., -ord B} restricted to
    nonnegative integers, after checking that every nonnegative integer root
    of a denominator of B lies in it.
    """
    ctx = B.context
    found = set()
    for c in B.coefficients:
        if c and not ctx.is_index_free(ctx.from_poly(c.denom)):
            found |= nonneg_integer_roots(ctx, c.denom)
    lc_roots = nonneg_integer_roots(ctx, C.leading_coefficient.numer)
    sumset = frozenset(
        rho - i for rho in lc_roots for i in range(max(B.order, 0) + 1) if rho - i >= 0
    )
    if not found <= sumset:
        logger.error(f"❌ 分母根 {sorted(found)} 不在和集 {sorted(sumset)} 内")
        raise InternalConsistencyError(
            f"denominator roots {sorted(found - sumset)} not covered by the leading coefficient of the divisor"
        )
    return sumset

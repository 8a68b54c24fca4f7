"""
证明引擎

H_k is the remainder of the k-th convergent of the subsequence
U_k = P_(stride*k + offset), V_k = Q_(stride*k + offset). A linear recurrence
for H is found either from the explicit order-4 formula for Riccati
equations or by elimination over a finite basis of products of U, V and
their derivatives (or shifts), then reduced to a right factor certified by
gcrd and initial-condition comparison. The fraction is proven when the
reduced recurrence has order one and raises the valuation at every step.
"""

from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Callable, ContextManager, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger
from sympy.polys.fields import FracElement

from .algebra import AlgebraContext, BigRat, nonneg_integer_roots, same
from .continued_fraction import CFracForm, contract_subsequence, convergents, subsequence_coefficients
from .exceptions import (
    CFracError,
    ContractionError,
    DegenerateRootSearchError,
    DivisionByZeroError,
    RecurrenceSearchError,
)
from .guessing import guessrec, numeric_value, sample_point
from .linear_algebra import independent_rows, kernel_vector, rational_nullspace
from .models import GuessConfig, HRecurrenceSource, ProofStatus
from .ore_recurrence import (
    RecOp,
    SeqDef,
    denominator_singularities,
    mandatory_indices,
    op_apply,
    op_gcrd,
    op_rightdiv,
    seq_unfold,
)
from .series_solver import EquationModel, residual_form, residual_numerator


@dataclass(frozen=True)
class HSequence:
    """H at indices offset, offset + stride, offset + 2*stride, ..."""

    values: Tuple[FracElement, ...]
    stride: int
    offset: int

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> FracElement:
        return self.values[k]


def build_H_initials(eq: EquationModel, form: CFracForm, count: int, stride: int, offset: int) -> HSequence:
    """渐近分式 offset + i*stride（i < count）的余项"""
    pairs = convergents(form, offset + (count - 1) * stride)
    values = tuple(
        residual_numerator(eq, pairs[offset + i * stride].P, pairs[offset + i * stride].Q)
        for i in range(count)
    )
    return HSequence(values, stride, offset)


def annihilates(op: RecOp, values: Sequence[FracElement]) -> bool:
    """op 在数据允许的每个下标上作用结果都恰为零"""
    if len(values) <= op.order:
        return False
    return all(not op_apply(op, values[m:m + op.order + 1], m) for m in range(len(values) - op.order))


# Riccati 方程

def riccati_h_recurrence(
    ctx: AlgebraContext, a: FracElement, b: Optional[FracElement] = None
) -> RecOp:
    """
    The order-4 recurrence of H for u_(n+2) = b(n+2) u_(n+1) + a(n+2) u_n.

    Valid for every Riccati equation; only the partial numerators enter.
    With partial denominators the fraction is first brought to unit
    denominators, a~(n) = a(n)/(b(n) b(n-1)), and the coefficient of
    H_(n+i) is divided by (b(n+1) ... b(n+i))^2.
    """
    unit_b = b is None or same(b, ctx.one)
    a_t = a if unit_b else a / (b * ctx.shift_index(b, -1))
    da = ctx.derivative(a_t)
    if not da:
        raise RecurrenceSearchError("partial numerators are constant in the series variable")

    a_prev = ctx.shift_index(a_t, 2)
    a_k = ctx.shift_index(a_t, 3)
    a_next = ctx.shift_index(a_t, 4)
    d_k = ctx.shift_index(da, 3)
    d_next = ctx.shift_index(da, 4)

    c4 = 1 / d_next
    c3 = a_k / d_k - (a_next + 1) / d_next
    c2 = -(a_k * (a_k + 1) / d_k + a_next * (a_next + 1) / d_next)
    c1 = -((a_k + 1) / d_k - a_next / d_next) * a_k**2
    c0 = a_prev**2 * a_k**2 / d_k
    coefficients = [c0, c1, c2, c3, c4]

    if not unit_b:
        scale = ctx.one
        for i in range(1, 5):
            scale = scale * ctx.shift_index(b, i)
            coefficients[i] = coefficients[i] / scale**2
    return RecOp(ctx, tuple(coefficients)).canonical()


# 消元

# Atoms: U_k, U_(k+1), their images under d/dx or sigma, then the same for V.
U0, U1, DU0, DU1, V0, V1, DV0, DV1 = range(8)
ATOM_IMAGE = {U0: DU0, U1: DU1, V0: DV0, V1: DV1}

Monom = Tuple[int, ...]


class AtomForm:
    """
    Polynomial in the atoms with coefficients in the problem field.

    Field elements multiply from the right only.
    """

    __slots__ = ("context", "terms")

    def __init__(self, context: AlgebraContext, terms: Optional[Dict[Monom, FracElement]] = None):
        self.context = context
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def linear(cls, context: AlgebraContext, pairs: Iterable[Tuple[int, FracElement]]) -> "AtomForm":
        terms: Dict[Monom, FracElement] = {}
        for atom, c in pairs:
            terms[(atom,)] = terms.get((atom,), context.zero) + c
        return cls(context, terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "AtomForm") -> "AtomForm":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, self.context.zero) + c
        return AtomForm(self.context, out)

    def __neg__(self) -> "AtomForm":
        return AtomForm(self.context, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "AtomForm") -> "AtomForm":
        return self + (-other)

    def __mul__(self, other) -> "AtomForm":
        if isinstance(other, AtomForm):
            out: Dict[Monom, FracElement] = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = tuple(sorted(m1 + m2))
                    out[m] = out.get(m, self.context.zero) + c1 * c2
            return AtomForm(self.context, out)
        return AtomForm(self.context, {m: c * other for m, c in self.terms.items()})

    def __pow__(self, e: int) -> "AtomForm":
        result = AtomForm(self.context, {(): self.context.one})
        for _ in range(e):
            result = result * self
        return result

    def derivative(self) -> "AtomForm":
        ctx = self.context
        out: Dict[Monom, FracElement] = {}
        for m, c in self.terms.items():
            dc = ctx.derivative(c)
            if dc:
                out[m] = out.get(m, ctx.zero) + dc
            for pos, atom in enumerate(m):
                if atom not in ATOM_IMAGE:
                    raise RecurrenceSearchError("second derivatives are outside the atom basis")
                image = tuple(sorted(m[:pos] + (ATOM_IMAGE[atom],) + m[pos + 1:]))
                out[image] = out.get(image, ctx.zero) + c
        return AtomForm(ctx, out)

    def substitute(self, sigma) -> "AtomForm":
        """Apply sigma to the coefficients and to every atom."""
        out: Dict[Monom, FracElement] = {}
        for m, c in self.terms.items():
            if any(atom not in ATOM_IMAGE for atom in m):
                raise RecurrenceSearchError("iterated shifts are outside the atom basis")
            image = tuple(sorted(ATOM_IMAGE[atom] for atom in m))
            out[image] = out.get(image, self.context.zero) + sigma(c)
        return AtomForm(self.context, out)


def iter_h_terms(eq: EquationModel, op: RecOp) -> Iterator[AtomForm]:
    """
    H_k, H_(k+1), ... written over the atom basis, using
    U_(k+i) = alpha_i U_(k+1) + beta_i U_k from the subsequence recurrence.
    """
    ctx = eq.context
    A, B = subsequence_coefficients(op)
    zero = AtomForm(ctx)
    alpha = [ctx.zero, ctx.one]
    beta = [ctx.one, ctx.zero]
    i = 0
    while True:
        if i >= 2:
            Ai, Bi = ctx.shift_index(A, i - 2), ctx.shift_index(B, i - 2)
            alpha.append(Ai * alpha[-1] + Bi * alpha[-2])
            beta.append(Ai * beta[-1] + Bi * beta[-2])
        P = AtomForm.linear(ctx, [(U1, alpha[i]), (U0, beta[i])])
        Q = AtomForm.linear(ctx, [(V1, alpha[i]), (V0, beta[i])])
        yield residual_form(eq, P, Q, AtomForm.derivative, lambda f: f.substitute(eq.sigma), zero)
        i += 1


def _numeric_rows(ctx: AlgebraContext, rows: List[List[FracElement]]) -> Optional[List[List[BigRat]]]:
    """样本点处的数值行；遇到极点时返回 None"""
    point = sample_point(ctx, with_index=True)
    try:
        return [[numeric_value(ctx, c, point) for c in row] for row in rows]
    except DivisionByZeroError:
        return None


def _dependency(
    ctx: AlgebraContext,
    rows: List[List[FracElement]],
    numeric: Optional[List[List[BigRat]]],
    ncols: int,
) -> Optional[List[FracElement]]:
    """
    Kernel vector of the rows, solved on the numerically independent rows
    and checked against all of them; the full system only if the check fails.
    """
    if numeric is not None:
        pick = independent_rows(numeric, ncols)
        vector = kernel_vector(ctx, [rows[i] for i in pick], ncols)
        if vector is not None and vector[-1] and all(
            not sum((c * v for c, v in zip(row, vector)), ctx.zero) for row in rows
        ):
            return vector
        logger.debug("方阵子系统未得到依赖关系，改为求解全部行")
    return kernel_vector(ctx, rows, ncols)


def find_H_recurrence(
    eq: EquationModel, form: CFracForm, stride: int, offset: int, max_order: int
) -> RecOp:
    """
    First linear dependency among H_k, H_(k+1), ... over the field of
    rational functions in the parameters, x and k, by increasing order.
    """
    ctx = eq.context
    if stride != form.period:
        raise ContractionError(f"stride {stride} does not match the period {form.period}")
    op = contract_subsequence(form, offset)
    terms = iter_h_terms(eq, op)
    H = [next(terms)]
    for r in range(1, max_order + 1):
        H.append(next(terms))
        monoms = sorted({m for h in H for m in h.terms})
        rows = [[h.terms.get(m, ctx.zero) for h in H] for m in monoms]
        numeric = _numeric_rows(ctx, rows)
        if numeric is not None and not rational_nullspace(numeric, r + 1):
            continue
        vector = _dependency(ctx, rows, numeric, r + 1)
        if vector is None or not vector[-1]:
            continue
        logger.debug(f"H 的 {r} 阶依赖，共 {len(monoms)} 个单项")
        return RecOp(ctx, tuple(vector)).canonical()
    raise RecurrenceSearchError(f"no linear dependency among H values up to order {max_order}")


def h_recurrence(
    eq: EquationModel,
    form: CFracForm,
    initials: HSequence,
    max_order: int,
    diagnostics: Optional[List[str]] = None,
) -> Tuple[RecOp, HRecurrenceSource]:
    """
    The big recurrence of H: the Riccati formula when it applies and
    annihilates the computed values, elimination otherwise.
    """
    notes = diagnostics if diagnostics is not None else []
    ctx = eq.context
    stride, offset = initials.stride, initials.offset
    if eq.is_riccati:
        try:
            A, B = subsequence_coefficients(contract_subsequence(form, offset))
            a = ctx.shift_index(B, -2)
            b = None if same(A, ctx.one) else ctx.shift_index(A, -2)
            op = riccati_h_recurrence(ctx, a, b)
            if annihilates(op, initials.values):
                return op, HRecurrenceSource.RICCATI
            notes.append("explicit Riccati recurrence does not annihilate the computed H values")
        except (CFracError, ZeroDivisionError) as e:
            notes.append(f"explicit Riccati recurrence unavailable: {e}")
        logger.info("🔁 显式 Riccati 递推未通过，改用消元求 H 递推")
    op = find_H_recurrence(eq, form, stride, offset, max_order)
    if not annihilates(op, initials.values):
        raise RecurrenceSearchError("eliminated recurrence does not annihilate the computed H values")
    return op, HRecurrenceSource.ELIMINATION


# 降阶

@dataclass(frozen=True)
class Reduction:
    """A right factor R of the big recurrence with its own initial data."""

    operator: RecOp
    index_set: frozenset
    initial_values: Dict[int, FracElement]
    window: Tuple[int, ...]
    quotient: RecOp
    terms_used: int


def comparison_window(A: RecOp, R: RecOp, J: Iterable[int], singular: Iterable[int]) -> Tuple[int, ...]:
    """(J and the quotient's singular indices) + {1, .., ord A - ord R}."""
    base = set(J) | set(singular)
    return tuple(sorted({j + t for j in base for t in range(1, A.order - R.order + 1)}))


def reduce_order(
    A: RecOp,
    values: Sequence[FracElement],
    cfg: GuessConfig,
    max_terms: int = 32,
    diagnostics: Optional[List[str]] = None,
) -> Optional[Reduction]:
    """
    Unfold N = 4, 8, 16, ... terms of the sequence defined by A and its
    mandatory initial values, guess a recurrence, take the gcrd R with A and
    keep it when the two definitions agree on the comparison window.
    Returns None when no reduction is certified.
    """
    notes = diagnostics if diagnostics is not None else []
    ctx = A.context
    if A.order <= 1:
        return None
    big = SeqDef.from_values(A, values)
    N = 4
    while N <= max_terms:
        u = list(values[:N]) if N <= len(values) else seq_unfold(big, N)
        G = guessrec(ctx, u, cfg, max_order=min(cfg.rec_max_order, A.order - 1))
        if G is not None:
            R = op_gcrd(A, G)
            if R.order == 0:
                notes.append(f"gcrd of the big recurrence and the guess from {N} terms is trivial")
                logger.info("⚠️ gcrd 阶为 0，保留原递推")
            elif R.order < A.order:
                reduction = _certify_factor(A, R, big, N)
                if reduction is not None:
                    return reduction
                notes.append(f"window comparison rejected the order-{R.order} factor from {N} terms")
        N *= 2
    return None


def _certify_factor(A: RecOp, R: RecOp, big: SeqDef, N: int) -> Optional[Reduction]:
    quotient, remainder = op_rightdiv(A, R)
    if not remainder.is_zero:
        return None
    J = frozenset(big.index_set) | mandatory_indices(R)
    singular = denominator_singularities(quotient, R)
    window = comparison_window(A, R, J, singular)
    upto = max(max(window, default=0), max(J)) + 1
    reference = seq_unfold(big, upto)
    small = SeqDef(R, {j: reference[j] for j in J}, J)
    candidate = seq_unfold(small, upto)
    if not all(same(reference[i], candidate[i]) for i in window):
        return None
    return Reduction(R, J, {j: reference[j] for j in J}, window, quotient, N)


# 结论

@dataclass(frozen=True)
class Verdict:
    status: ProofStatus
    gain: Optional[int] = None
    base: Optional[int] = None
    reason: Optional[str] = None

    def bound(self, stride: int, offset: int) -> Optional[str]:
        if self.status != ProofStatus.PROVEN:
            return None
        index = "k" if (stride, offset) == (1, 0) else f"{stride}*k+{offset}" if offset else f"{stride}*k"
        rhs = f"{self.gain}*k"
        if self.base:
            rhs += f" + {self.base}" if self.base > 0 else f" - {-self.base}"
        return f"val H({index}) >= {rhs}"


def valuation_verdict(R: RecOp, hseq: Sequence[FracElement], index_set: Iterable[int]) -> Verdict:
    """
    PROVEN when R = p1(n) S + p0(n) has p0 of higher x-valuation than p1.

    With e = val p0 - val p1 >= 1, val H_(k+1) >= val H_k + e wherever the
    lowest x-coefficient of p1 does not vanish at k; below the last such
    root and on the initial window the valuations are read off the values.
    """
    ctx = R.context
    if R.order != 1:
        return Verdict(ProofStatus.INCONCLUSIVE, reason=f"reduced recurrence has order {R.order}")
    p0, p1 = R[0], R[1]
    if not p0:
        return Verdict(ProofStatus.INCONCLUSIVE, reason="reduced recurrence is a pure shift")
    e = ctx.valuation(p0) - ctx.valuation(p1)
    if e < 1:
        return Verdict(ProofStatus.INCONCLUSIVE, reason=f"valuation gain {e} per step")
    try:
        roots = nonneg_integer_roots(ctx, ctx.lowest_x_coefficient(p1))
    except DegenerateRootSearchError:
        return Verdict(ProofStatus.INCONCLUSIVE, reason="lowest coefficient of p1 vanishes")
    last = max(set(index_set) | {rho + 1 for rho in roots}, default=0)
    if last >= len(hseq):
        return Verdict(ProofStatus.INCONCLUSIVE, reason=f"need H values up to index {last}")
    offsets = [ctx.valuation(hseq[k]) - e * k for k in range(last + 1) if hseq[k]]
    base = min(offsets) if offsets else 0
    return Verdict(ProofStatus.PROVEN, gain=e, base=base)


# 证书

@dataclass
class Certificate:
    """Every artifact of one proof."""

    equation: EquationModel
    form: CFracForm
    config: GuessConfig
    stride: int
    offset: int
    subsequence_operators: List[RecOp]
    h_recurrence: RecOp
    h_source: HRecurrenceSource
    initials: HSequence
    index_set: frozenset
    reduction: Optional[Reduction]
    verdict: Verdict
    diagnostics: List[str] = field(default_factory=list)

    @property
    def reduced(self) -> RecOp:
        return self.reduction.operator if self.reduction else self.h_recurrence

    @property
    def proven(self) -> bool:
        return self.verdict.status == ProofStatus.PROVEN


def certify(
    eq: EquationModel,
    form: CFracForm,
    config: GuessConfig,
    initials: HSequence,
    big: RecOp,
    source: HRecurrenceSource,
    reduction: Optional[Reduction],
    verdict: Verdict,
    diagnostics: Optional[List[str]] = None,
) -> Certificate:
    """Bundle the artifacts; the subsequence operators are recomputed per residue class."""
    operators = [contract_subsequence(form, initials.offset + r) for r in range(form.period)]
    return Certificate(
        equation=eq,
        form=form,
        config=config,
        stride=initials.stride,
        offset=initials.offset,
        subsequence_operators=operators,
        h_recurrence=big,
        h_source=source,
        initials=initials,
        index_set=mandatory_indices(big),
        reduction=reduction,
        verdict=verdict,
        diagnostics=list(diagnostics or []),
    )


def _untimed(name: str) -> ContextManager:
    return nullcontext()


def prove(
    eq: EquationModel,
    form: CFracForm,
    config: GuessConfig,
    h_count: int = 8,
    max_order: int = 12,
    max_terms: int = 32,
    stage: Callable[[str], ContextManager] = _untimed,
    diagnostics: Optional[List[str]] = None,
) -> Certificate:
    """
    All proof stages in sequence. ``stage(name)`` wraps each one; the
    pipeline passes a timer that also names the stage on failure.
    """
    notes = diagnostics if diagnostics is not None else []
    stride, offset = form.period, form.offset
    with stage("h_initials"):
        initials = build_H_initials(eq, form, h_count, stride, offset)
    with stage("h_recurrence"):
        big, source = h_recurrence(eq, form, initials, max_order, notes)
        needed = max(max(mandatory_indices(big)) + 1, big.order + 4)
        if needed > len(initials):
            initials = build_H_initials(eq, form, needed, stride, offset)
            if not annihilates(big, initials.values):
                raise RecurrenceSearchError("H recurrence fails on additional values")
    with stage("reduce"):
        reduction = reduce_order(big, initials.values, config, max_terms, notes)
    with stage("verdict"):
        R = reduction.operator if reduction else big
        J = reduction.index_set if reduction else mandatory_indices(big)
        values = h_values_through(big, initials, R, J)
        verdict = valuation_verdict(R, values, J)
    with stage("certify"):
        return certify(eq, form, config, initials, big, source, reduction, verdict, notes)


def h_values_through(big: RecOp, initials: HSequence, R: RecOp, J: Iterable[int]) -> List[FracElement]:
    """计算足够多的 H 值以覆盖结论的初始窗口"""
    ctx = big.context
    last = max(J, default=0)
    if R.order == 1:
        try:
            roots = nonneg_integer_roots(ctx, ctx.lowest_x_coefficient(R[1]))
        except DegenerateRootSearchError:
            roots = frozenset()
        last = max([last] + [rho + 1 for rho in roots])
    if last < len(initials):
        return list(initials.values)
    return seq_unfold(SeqDef.from_values(big, initials.values), last + 1)

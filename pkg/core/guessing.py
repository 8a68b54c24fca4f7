"""
猜测器：部分分子系数的有理插值、带周期检测的连分式闭式猜测，以及由序列项猜测线性递推。

Guessers: rational interpolation of partial-numerator coefficients, closed
forms of C-fractions with period detection, and linear recurrences from
sequence terms.

Every guesser returns None when nothing within its caps matches all the data.
Candidates are tried in a fixed ascending order, and the degrees are screened
first on a numeric specialization of all symbols so that the symbolic solve
runs once or twice instead of once per candidate.
"""

from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger
from sympy import QQ
from sympy.polys.fields import FracElement

from .algebra import AlgebraContext, BigRat, Scalar, render
from .continued_fraction import CFracForm, CFracTerms, TailFormula
from .exceptions import AlgebraError, DivisionByZeroError
from .linear_algebra import kernel_vector, rational_nullspace
from .models import GuessConfig
from .ore_recurrence import RecOp, op_apply

# 数值筛选次数时各符号的取值
SAMPLE_VALUES = (
    QQ(37, 11), QQ(41, 13), QQ(43, 17), QQ(47, 19), QQ(53, 23), QQ(59, 29), QQ(61, 31), QQ(67, 37),
)

Point = Tuple[int, FracElement]


# 数值特化

def sample_point(ctx: AlgebraContext, with_index: bool = False) -> Dict[int, BigRat]:
    """Generator index -> sample value for the parameters, the series variable and optionally n, Q."""
    indices = [ctx.position(name) for name in ctx.parameters] + [ctx.x_index]
    if with_index:
        indices.append(ctx.n_index)
        if ctx.Q_index is not None:
            indices.append(ctx.Q_index)
    return {i: SAMPLE_VALUES[k % len(SAMPLE_VALUES)] for k, i in enumerate(indices)}


def numeric_value(ctx: AlgebraContext, f: FracElement, point: Dict[int, BigRat]) -> BigRat:
    """f at a sample point that fixes every generator occurring in f."""
    numer, denom = f.numer, f.denom
    for i, v in point.items():
        numer = numer.subs(i, v)
        denom = denom.subs(i, v)
    zero_monom = ctx.ring.zero_monom
    d = denom.get(zero_monom, QQ.zero)
    if not d:
        raise DivisionByZeroError("sample point hits a pole")
    return QQ(numer.get(zero_monom, QQ.zero)) / QQ(d)


def _numeric_node(ctx: AlgebraContext, k: int, point: Dict[int, BigRat]) -> BigRat:
    if ctx.is_q_case:
        return point[ctx.q_index] ** k
    return QQ(k)


def _node(ctx: AlgebraContext, k: int) -> FracElement:
    return ctx.q**k if ctx.is_q_case else ctx.element(k)


def _powers(x, degree: int, one) -> List:
    out = [one]
    for _ in range(degree):
        out.append(out[-1] * x)
    return out


# 有理插值

def _rational_candidates(count: int, cfg: GuessConfig) -> List[Tuple[int, int]]:
    """按总次数升序排列 (num_deg, den_deg)，分母次数小者优先"""
    fit = count - cfg.verify_margin
    out = []
    for total in range(cfg.max_num_deg + cfg.max_den_deg + 1):
        for dd in range(min(total, cfg.max_den_deg) + 1):
            dn = total - dd
            if dn <= cfg.max_num_deg and dn + dd + 1 <= fit:
                out.append((dn, dd))
    return out


def _rational_rows(nodes, values, dn: int, dd: int, one) -> List[List]:
    rows = []
    for x, v in zip(nodes, values):
        px = _powers(x, max(dn, dd), one)
        rows.append(px[: dn + 1] + [-v * p for p in px[: dd + 1]])
    return rows


def _poly_value(coeffs: Sequence, x):
    acc = coeffs[-1] * 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _screen_rational(
    ctx: AlgebraContext, points: Sequence[Point], candidates: List[Tuple[int, int]], fit: int
) -> Optional[int]:
    """第一个符合数值特化的候选的下标"""
    point = sample_point(ctx)
    try:
        nodes = [_numeric_node(ctx, k, point) for k, _ in points]
        values = [numeric_value(ctx, v, point) for _, v in points]
    except DivisionByZeroError:
        return 0
    for idx, (dn, dd) in enumerate(candidates):
        rows = _rational_rows(nodes[:fit], values[:fit], dn, dd, QQ.one)
        for vector in reversed(rational_nullspace(rows, dn + dd + 2)):
            p, q = vector[: dn + 1], vector[dn + 1:]
            if not any(q):
                continue
            if all(
                _poly_value(q, x) and _poly_value(p, x) == v * _poly_value(q, x)
                for x, v in zip(nodes, values)
            ):
                return idx
    return None


def guess_rational(
    ctx: AlgebraContext, points: Sequence[Tuple[int, Scalar]], cfg: GuessConfig
) -> Optional[FracElement]:
    """
    A rational function f of the index (n, or Q in the q-case) with
    f(k) = v for every (k, v), within the degree caps.

    The ansatz p(k) - v q(k) = 0 is solved on all but ``cfg.verify_margin``
    points; the result must match every point.
    """
    if len(points) < 3:
        return None
    ks = [k for k, _ in points]
    if len(set(ks)) != len(ks):
        raise ValueError("interpolation nodes must be distinct")
    pts = [(k, ctx.element(v)) for k, v in points]
    fit = len(pts) - cfg.verify_margin
    candidates = _rational_candidates(len(pts), cfg)
    if not candidates:
        return None
    start = _screen_rational(ctx, pts, candidates, fit)
    if start is None:
        return None

    nodes = [_node(ctx, k) for k, _ in pts]
    values = [v for _, v in pts]
    X = ctx.index_variable
    for dn, dd in candidates[start:]:
        rows = _rational_rows(nodes[:fit], values[:fit], dn, dd, ctx.one)
        vector = kernel_vector(ctx, rows, dn + dd + 2)
        if vector is None:
            continue
        p, q = vector[: dn + 1], vector[dn + 1:]
        if not any(q):
            continue
        f = _poly_value(p, X) / _poly_value(q, X)
        if _matches(ctx, f, pts):
            logger.debug(f"有理插值 次数 {dn}/{dd}: {render(ctx, f)}")
            return f
    return None


def _matches(ctx: AlgebraContext, f: FracElement, points: Sequence[Tuple[int, FracElement]]) -> bool:
    try:
        return all(not (ctx.at_index(f, k) - v) for k, v in points)
    except DivisionByZeroError:
        return False


# C-分式的闭式

def guess_cfrac_formula(
    terms: CFracTerms, cfg: GuessConfig, diagnostics: Optional[List[str]] = None
) -> Optional[CFracForm]:
    """
    Periods 1..L in turn; for each, prefixes 0..max_prefix. Every residue
    class of the remaining terms needs a constant exponent and a rational
    coefficient formula in its subsequence index.
    """
    ctx = terms.context
    notes = diagnostics if diagnostics is not None else []
    N = min(len(terms), cfg.N)
    for period in range(1, cfg.L + 1):
        for p in range(min(cfg.max_prefix, N - 1) + 1):
            form, reason = _try_form(terms, N, period, p, cfg)
            if form is not None:
                logger.info(f"🎯 找到闭式: 周期 {period}, 前缀 {p}")
                return form
            logger.debug(f"周期 {period}, 前缀 {p}: {reason}")
        notes.append(f"no closed form of period {period}")
    return None


def _try_form(
    terms: CFracTerms, N: int, period: int, p: int, cfg: GuessConfig
) -> Tuple[Optional[CFracForm], str]:
    ctx = terms.context
    tail: List[TailFormula] = []
    for r in range(period):
        ks = [k for k in range(p + 1, N + 1) if k % period == r]
        if len(ks) < 3:
            return None, f"class {r} has {len(ks)} terms"
        exponents = {terms.terms[k - 1].exponent for k in ks}
        if len(exponents) != 1:
            return None, f"class {r} mixes exponents {sorted(exponents)}"
        points = [(k // period, terms.terms[k - 1].coefficient) for k in ks]
        f = guess_rational(ctx, points, cfg)
        if f is None:
            return None, f"class {r} has no rational formula"
        tail.append(TailFormula(f, exponents.pop()))
    prefix = tuple(terms.terms[:p])
    try:
        form = CFracForm(ctx, terms.a0, prefix, period, tuple(tail))
    except AlgebraError as e:
        return None, str(e)
    return form, ""


# 递推

def _recurrence_candidates(count: int, cfg: GuessConfig, max_order: int) -> List[Tuple[int, int]]:
    out = []
    for r in range(1, max_order + 1):
        rows = count - cfg.verify_margin - r
        for deg in range(cfg.rec_max_deg + 1):
            if (r + 1) * (deg + 1) - 1 > rows:
                break
            out.append((r, deg))
    return out


def _recurrence_rows(nodes, values, r: int, deg: int, rows: int, one) -> List[List]:
    out = []
    for m in range(rows):
        scale = 1 / values[m] if values[m] else one
        px = _powers(nodes[m], deg, one)
        out.append([px[d] * values[m + i] * scale for i in range(r + 1) for d in range(deg + 1)])
    return out


def _screen_recurrence(
    ctx: AlgebraContext, values: Sequence[FracElement], candidates: List[Tuple[int, int]], cfg: GuessConfig
) -> Optional[int]:
    point = sample_point(ctx)
    try:
        nums = [numeric_value(ctx, v, point) for v in values]
    except DivisionByZeroError:
        return 0
    nodes = [_numeric_node(ctx, m, point) for m in range(len(values))]
    for idx, (r, deg) in enumerate(candidates):
        fit = len(values) - cfg.verify_margin - r
        rows = _recurrence_rows(nodes, nums, r, deg, fit, QQ.one)
        for vector in reversed(rational_nullspace(rows, (r + 1) * (deg + 1))):
            if not any(vector[r * (deg + 1):]):
                continue
            if all(
                not sum(
                    _poly_value(vector[i * (deg + 1):(i + 1) * (deg + 1)], nodes[m]) * nums[m + i]
                    for i in range(r + 1)
                )
                for m in range(len(values) - r)
            ):
                return idx
    return None


def guessrec(
    ctx: AlgebraContext,
    values: Sequence[FracElement],
    cfg: GuessConfig,
    max_order: Optional[int] = None,
) -> Optional[RecOp]:
    """
    Smallest-order operator sum p_i(n) S^i annihilating ``values``.

    Orders ascend and, within an order, coefficient degrees ascend while the
    ansatz has no more unknowns than fitted equations plus one. The ansatz is
    fitted on all but the last ``cfg.verify_margin`` equations and checked on
    all of them.
    """
    if len(values) < 4:
        return None
    max_order = cfg.rec_max_order if max_order is None else max_order
    candidates = _recurrence_candidates(len(values), cfg, max_order)
    if not candidates:
        return None
    start = _screen_recurrence(ctx, values, candidates, cfg)
    if start is None:
        return None

    nodes = [_node(ctx, m) for m in range(len(values))]
    X = ctx.index_variable
    for r, deg in candidates[start:]:
        fit = len(values) - cfg.verify_margin - r
        rows = _recurrence_rows(nodes, values, r, deg, fit, ctx.one)
        vector = kernel_vector(ctx, rows, (r + 1) * (deg + 1))
        if vector is None:
            continue
        coefficients = tuple(
            _poly_value(vector[i * (deg + 1):(i + 1) * (deg + 1)], X) for i in range(r + 1)
        )
        if not coefficients[-1]:
            continue
        op = RecOp(ctx, coefficients)
        if all(not op_apply(op, values[m:m + r + 1], m) for m in range(len(values) - r)):
            logger.debug(f"阶 {r}、次数 {deg} 的递推拟合 {len(values)} 项")
            return op.canonical()
    return None


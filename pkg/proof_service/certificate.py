"""
证书文档：证明的序列化与复核

复核仅依据文档本身重建所有对象（规范字符串由方程解析器解析回来），并重放四步：

  i    the big recurrence annihilates the recomputed H initials
  ii   the reduced operator right-divides the big one with zero remainder
  iii  the comparison window agrees under both definitions
  iv   the verdict follows from the reduced operator and the H values
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import sympy
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table
from sympy.polys.fields import FracElement

from config.logging import problem_logger
from config.settings import get_settings
from core.algebra import AlgebraContext, render, same
from core.continued_fraction import CFracForm, Monomial, TailFormula, contract_subsequence
from core.equation_parser import build_equation, parse_expression
from core.exceptions import CertificateError, CFracError
from core.models import (
    CFracDocument,
    CertificateDocument,
    OperatorDocument,
    ProblemSpec,
    ProofStatus,
    RecheckReport,
    TailDocument,
    VerdictDocument,
)
from core.ore_recurrence import (
    RecOp,
    SeqDef,
    denominator_singularities,
    mandatory_indices,
    op_rightdiv,
    seq_unfold,
)
from core.prover import (
    Certificate,
    HSequence,
    annihilates,
    build_H_initials,
    comparison_window,
    h_values_through,
    valuation_verdict,
)

RECHECK_STEPS = {
    "i": "big recurrence annihilates the recomputed H initials",
    "ii": "reduced operator right-divides the big recurrence",
    "iii": "comparison window agrees under both definitions",
    "iv": "verdict follows from the reduced operator",
}


# 序列化

def operator_document(op: RecOp) -> OperatorDocument:
    return OperatorDocument(coefficients=op.render(), order=op.order, shift_action=op.shift_action)


def to_document(
    spec: ProblemSpec, cert: Certificate, timings: Optional[Dict[str, float]] = None
) -> CertificateDocument:
    """把证明的所有产物渲染为规范字符串"""
    ctx = cert.equation.context
    form = cert.form
    reduction = cert.reduction
    settings = get_settings()
    return CertificateDocument(
        problem=spec,
        shift=render(ctx, cert.equation.initial_value),
        cfrac=CFracDocument(
            a0=render(ctx, form.a0),
            prefix=[m.render(ctx) for m in form.prefix],
            period=form.period,
            tail=[
                TailDocument(residue=r, coefficient=render(ctx, t.coefficient), exponent=t.exponent)
                for r, t in enumerate(form.tail)
            ],
        ),
        guess_config=cert.config,
        subsequence_operators=[operator_document(op) for op in cert.subsequence_operators],
        stride=cert.stride,
        offset=cert.offset,
        h_recurrence=operator_document(cert.h_recurrence),
        h_recurrence_source=cert.h_source,
        h_initials=[render(ctx, h) for h in cert.initials.values],
        index_set=sorted(cert.index_set),
        reduced=operator_document(cert.reduced),
        reduced_index_set=sorted(reduction.index_set if reduction else cert.index_set),
        window=list(reduction.window) if reduction else [],
        division_quotient=operator_document(reduction.quotient) if reduction else None,
        verdict=VerdictDocument(
            status=cert.verdict.status,
            gain=cert.verdict.gain,
            base=cert.verdict.base,
            bound=cert.verdict.bound(cert.stride, cert.offset),
            reason=cert.verdict.reason,
        ),
        diagnostics=list(cert.diagnostics),
        timings=dict(timings or {}),
        provenance={
            "engine": settings.app_name,
            "engine_version": settings.app_version,
            "sympy_version": sympy.__version__,
            "reduction_terms": reduction.terms_used if reduction else None,
        },
    )


def dump_certificate(doc: CertificateDocument) -> str:
    return doc.model_dump_json(indent=2)


def load_certificate(source: Union[str, Path]) -> CertificateDocument:
    """从路径或 JSON 文本读取证书"""
    text = source
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise CertificateError(f"cannot read certificate {source}: {e}") from e
    try:
        return CertificateDocument.model_validate_json(text)
    except ValidationError as e:
        raise CertificateError(f"malformed certificate: {e}") from e


# 重建对象

def parse_operator(doc: OperatorDocument, ctx: AlgebraContext) -> RecOp:
    op = RecOp(ctx, tuple(parse_expression(c, ctx) for c in doc.coefficients))
    if op.order != doc.order:
        raise CertificateError(f"operator declares order {doc.order} but has order {op.order}")
    return op


def _monomial(source: str, ctx: AlgebraContext) -> Monomial:
    value = parse_expression(source, ctx)
    e = ctx.valuation(value)
    if e is None or e < 1:
        raise CertificateError(f"'{source}' is not a monomial of positive degree")
    coefficient = value / ctx.x**e
    if not ctx.is_x_free(coefficient):
        raise CertificateError(f"'{source}' is not a monomial")
    return Monomial(coefficient, e)


def parse_form(doc: CFracDocument, ctx: AlgebraContext) -> CFracForm:
    tail = sorted(doc.tail, key=lambda t: t.residue)
    if [t.residue for t in tail] != list(range(doc.period)):
        raise CertificateError("tail formulas must cover every residue class once")
    return CFracForm(
        ctx,
        parse_expression(doc.a0, ctx),
        tuple(_monomial(m, ctx) for m in doc.prefix),
        doc.period,
        tuple(TailFormula(parse_expression(t.coefficient, ctx), t.exponent) for t in tail),
    )


# 复核

class _Replay:
    """由文档重建的对象，供各复核步骤共用"""

    def __init__(self, doc: CertificateDocument):
        self.doc = doc
        self.equation = build_equation(doc.problem)
        ctx = self.context = self.equation.context
        if render(ctx, self.equation.initial_value) != doc.shift:
            raise CertificateError(f"shift '{doc.shift}' does not match the initial value")
        self.form = parse_form(doc.cfrac, ctx)
        if (self.form.period, self.form.offset) != (doc.stride, doc.offset):
            raise CertificateError("stride and offset do not match the closed form")
        self.stated: List[FracElement] = [parse_expression(h, ctx) for h in doc.h_initials]
        self.big = parse_operator(doc.h_recurrence, ctx)
        self.reduced = parse_operator(doc.reduced, ctx)
        self.recomputed: List[FracElement] = []
        self.quotient: Optional[RecOp] = None

    @property
    def is_reduced(self) -> bool:
        return self.reduced.order < self.big.order

    def step_i(self) -> None:
        doc = self.doc
        initials = build_H_initials(self.equation, self.form, len(self.stated), doc.stride, doc.offset)
        self.recomputed = list(initials.values)
        if not all(same(a, b) for a, b in zip(self.stated, self.recomputed)):
            raise CertificateError("stated H initials differ from the recomputed ones")
        if len(doc.subsequence_operators) != self.form.period:
            raise CertificateError("one subsequence operator per residue class expected")
        for r, op_doc in enumerate(doc.subsequence_operators):
            stated = parse_operator(op_doc, self.context)
            if stated != contract_subsequence(self.form, doc.offset + r):
                raise CertificateError(f"subsequence operator {r} does not match the closed form")
        if not annihilates(self.big, self.recomputed):
            raise CertificateError("big recurrence does not annihilate the H initials")
        if frozenset(doc.index_set) != mandatory_indices(self.big):
            raise CertificateError("index set is not the mandatory set of the big recurrence")
        if max(doc.index_set) >= len(self.recomputed):
            raise CertificateError("H initials do not cover the index set")

    def step_ii(self) -> None:
        if not self.is_reduced:
            if not self.reduced.equivalent(self.big):
                raise CertificateError("unreduced certificate must restate the big recurrence")
            return
        quotient, remainder = op_rightdiv(self.big, self.reduced)
        if not remainder.is_zero:
            raise CertificateError("division of the big recurrence leaves a nonzero remainder")
        if self.doc.division_quotient is not None:
            if parse_operator(self.doc.division_quotient, self.context) != quotient:
                raise CertificateError("stated division quotient differs from the recomputed one")
        self.quotient = quotient

    def step_iii(self) -> None:
        doc = self.doc
        if not self.is_reduced:
            if doc.window:
                raise CertificateError("unreduced certificate states a comparison window")
            return
        J = frozenset(doc.reduced_index_set)
        if not (frozenset(doc.index_set) | mandatory_indices(self.reduced)) <= J:
            raise CertificateError("reduced index set misses mandatory indices")
        singular = denominator_singularities(self.quotient, self.reduced)
        window = comparison_window(self.big, self.reduced, J, singular)
        if list(window) != doc.window:
            raise CertificateError(f"comparison window should be {list(window)}")
        big = SeqDef(self.big, {i: self.recomputed[i] for i in doc.index_set}, frozenset(doc.index_set))
        upto = max(max(window, default=0), max(J)) + 1
        reference = seq_unfold(big, upto)
        small = SeqDef(self.reduced, {j: reference[j] for j in J}, J)
        candidate = seq_unfold(small, upto)
        for i in window:
            if not same(reference[i], candidate[i]):
                raise CertificateError(f"the two definitions differ at index {i}")

    def step_iv(self) -> None:
        doc = self.doc
        J = frozenset(doc.reduced_index_set)
        initials = HSequence(tuple(self.recomputed), doc.stride, doc.offset)
        values = h_values_through(self.big, initials, self.reduced, J)
        verdict = valuation_verdict(self.reduced, values, J)
        stated = doc.verdict
        if verdict.status != stated.status:
            raise CertificateError(f"verdict is {verdict.status.value}, certificate says {stated.status.value}")
        if stated.status == ProofStatus.PROVEN and (verdict.gain, verdict.base) != (stated.gain, stated.base):
            raise CertificateError(
                f"valuation bound is gain {verdict.gain}, base {verdict.base}; "
                f"certificate says gain {stated.gain}, base {stated.base}"
            )


def recheck(doc: CertificateDocument) -> RecheckReport:
    """重放 i-iv 步；报告给出第一个失败的步骤"""
    name = doc.problem.name
    steps: Dict[str, bool] = {}
    log = problem_logger(name, "recheck")

    def failed(step: str, reason: str) -> RecheckReport:
        log.warning(f"❌ 步骤 {step} 失败: {reason}")
        steps[step] = False
        return RecheckReport(problem=name, valid=False, failed_step=step, reason=reason, steps=steps)

    try:
        replay = _Replay(doc)
    except CFracError as e:
        return failed("rebuild", str(e))

    checks: Dict[str, Callable[[], None]] = {
        "i": replay.step_i,
        "ii": replay.step_ii,
        "iii": replay.step_iii,
        "iv": replay.step_iv,
    }
    for step, check in checks.items():
        try:
            check()
        except (CFracError, ZeroDivisionError) as e:
            return failed(step, str(e))
        steps[step] = True
        log.debug(f"步骤 {step} 通过: {RECHECK_STEPS[step]}")
    return RecheckReport(problem=name, valid=True, steps=steps)


# 文本输出

def render_text(doc: CertificateDocument) -> str:
    """证书的可读摘要"""
    console = Console(record=True, width=120, color_system=None)
    table = Table(title=f"{doc.problem.name}: {doc.verdict.status.value}", show_header=False)
    table.add_column("field", style="bold")
    table.add_column("value")
    table.add_row("equation", f"{doc.problem.kind.value}: {doc.problem.equation}")
    table.add_row("shift", doc.shift)
    for k, m in enumerate(doc.cfrac.prefix, start=1):
        table.add_row(f"a_{k}", m)
    for t in doc.cfrac.tail:
        table.add_row(
            f"a_({doc.cfrac.period}n+{t.residue})",
            f"({t.coefficient})*{doc.problem.variable}^{t.exponent}",
        )
    table.add_row("H recurrence", f"order {doc.h_recurrence.order} ({doc.h_recurrence_source.value})")
    table.add_row("reduced", _display(doc.reduced))
    table.add_row("index set", str(doc.reduced_index_set))
    if doc.verdict.bound:
        table.add_row("bound", doc.verdict.bound)
    if doc.verdict.reason:
        table.add_row("reason", doc.verdict.reason)
    for note in doc.diagnostics:
        table.add_row("note", note)
    console.print(table)
    return console.export_text()


def _display(op: OperatorDocument) -> str:
    pieces = []
    for i, c in enumerate(op.coefficients):
        if c == "0":
            continue
        pieces.append(f"({c})" + ("" if i == 0 else "*S" if i == 1 else f"*S^{i}"))
    return " + ".join(pieces)

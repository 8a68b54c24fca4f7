"""
单个问题的猜测-证明流水线

阶段：parse、series、guess、h_initials、h_recurrence、reduce、verdict、certify。
每个阶段单独计时；第一个失败的阶段结束运行，并生成注明该阶段的 FailReport。
结论不确定时仍会生成证书，但不会标记为已证明。
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Union

from pydantic import ValidationError

from config.logging import LogExecutionTime, LoggingMixin, problem_logger
from config.settings import Settings, get_settings
from core.continued_fraction import CFracTerms, series_to_cfrac
from core.equation_parser import build_equation
from core.exceptions import CFracError, ProblemSpecError, StageFailure
from core.guessing import guess_cfrac_formula
from core.models import CertificateDocument, FailReport, GuessConfig, ProblemSpec, ProofStatus
from core.prover import Certificate, prove
from core.series_solver import EquationModel, solve_series

from .certificate import to_document

# 猜测器至少需要的部分分子个数
MIN_TERMS = 6


def next_truncation(T: int, terms: CFracTerms, N: int) -> int:
    """
    按已知各项消耗的阶数外推，估计得到 N 项所需的截断阶；
    尚无任何项时加倍。返回值总是大于 T。
    """
    if not len(terms):
        return 2 * T
    used = sum(m.exponent for m in terms.terms)
    estimate = -(-used * N // len(terms)) + 3
    return max(estimate, T + 2)


@dataclass
class ProofOutcome:
    """一次流水线运行的结果：证书文档或失败报告"""

    spec: ProblemSpec
    document: Optional[CertificateDocument] = None
    failure: Optional[FailReport] = None
    certificate: Optional[Certificate] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def status(self) -> ProofStatus:
        if self.document is None:
            return ProofStatus.FAILED
        return self.document.verdict.status

    @property
    def proven(self) -> bool:
        return self.status == ProofStatus.PROVEN

    @property
    def report(self) -> Union[CertificateDocument, FailReport]:
        return self.document if self.document is not None else self.failure


class ProofPipeline(LoggingMixin):
    """
    使用同一组引擎默认值，让问题依次经过所有阶段

    Args:
        terms: 覆盖 C-分式项数 (N)
        period_max: 覆盖最大周期 (L)
        h_count: 覆盖直接计算的 H 值个数
        settings: 读取默认值的配置（默认使用全局配置）
    """

    def __init__(
        self,
        terms: Optional[int] = None,
        period_max: Optional[int] = None,
        h_count: Optional[int] = None,
        settings: Optional[Settings] = None,
    ):
        self.settings = settings or get_settings()
        self.terms = terms
        self.period_max = period_max
        self.h_count = h_count

    def guess_config(self, spec: ProblemSpec) -> GuessConfig:
        """优先级：全局配置 < 问题文件 options < 流水线参数"""
        overrides: Dict[str, Any] = spec.options.guess_overrides()
        if self.terms is not None:
            overrides["N"] = self.terms
        if self.period_max is not None:
            overrides["L"] = self.period_max
        try:
            return GuessConfig.from_settings(**overrides)
        except ValidationError as e:
            raise ProblemSpecError(f"invalid guessing configuration: {e}") from e

    def run(self, spec: ProblemSpec) -> ProofOutcome:
        timings: Dict[str, float] = {}
        diagnostics: List[str] = []
        stage = self._stage_factory(spec, timings)
        log = self.logger.bind(problem=spec.name)
        log.info(f"🚀 开始证明 ({spec.kind.value})")
        try:
            with stage("parse"):
                eq = build_equation(spec)
                config = self.guess_config(spec)
            with stage("series"):
                terms = self.expand(eq, spec, config, diagnostics)
            with stage("guess"):
                form = guess_cfrac_formula(terms, config, diagnostics)
                if form is None:
                    raise StageFailure(
                        "guess",
                        f"no closed form of period <= {config.L} fits {min(len(terms), config.N)} terms",
                    )
                log.info(f"🔍 猜测结果: {form.describe()}")
            certificate = prove(
                eq,
                form,
                config,
                h_count=self._h_count(spec),
                max_order=self.settings.h_recurrence_max_order,
                max_terms=self.settings.reduce_max_terms,
                stage=stage,
                diagnostics=diagnostics,
            )
            with stage("certify"):
                document = to_document(spec, certificate, timings)
        except StageFailure as e:
            log.warning(f"❌ {e}")
            failure = FailReport(
                problem=spec.name,
                stage=e.stage,
                reason=e.reason,
                diagnostics=diagnostics,
                timings=timings,
            )
            return ProofOutcome(spec, failure=failure, timings=timings)

        document.timings = dict(timings)
        icon = "✅" if document.verdict.status == ProofStatus.PROVEN else "⚠️"
        log.info(
            f"{icon} {document.verdict.status.value}"
            + (f": {document.verdict.bound}" if document.verdict.bound else "")
        )
        return ProofOutcome(spec, document=document, certificate=certificate, timings=timings)

    def expand(
        self, eq: EquationModel, spec: ProblemSpec, config: GuessConfig, diagnostics: List[str]
    ) -> CFracTerms:
        """
        求截断阶为 T 的级数解并转为连分数；不足 N 项时增大 T，
        直到得到 N 个部分分子或达到截断上限
        """
        cap = self.settings.series_max_truncation
        T = min(spec.options.truncation or config.N + 2, cap)
        while True:
            series = solve_series(eq, T)
            terms = series_to_cfrac(series, config.N)
            if len(terms) >= config.N or terms.terminated or T >= cap:
                break
            T = min(next_truncation(T, terms, config.N), cap)
            problem_logger(spec.name, "series").debug(f"仅得到 {len(terms)} 项，改用截断阶 {T} 重试")
        if terms.terminated:
            diagnostics.append(f"the fraction terminates after {len(terms)} terms")
        if len(terms) < config.N:
            diagnostics.append(f"only {len(terms)} of {config.N} terms from truncation {T}")
        if len(terms) < MIN_TERMS:
            raise StageFailure("series", f"only {len(terms)} partial numerators available")
        return terms

    def _h_count(self, spec: ProblemSpec) -> int:
        if self.h_count is not None:
            return self.h_count
        return spec.options.h_count or self.settings.h_count

    def _stage_factory(self, spec: ProblemSpec, timings: Dict[str, float]):
        @contextmanager
        def stage(name: str) -> Iterator[None]:
            log = self.logger.bind(problem=spec.name, stage=name)
            timer = LogExecutionTime(f"stage {name}", log)
            try:
                with timer:
                    yield
            except StageFailure:
                raise
            except (CFracError, ZeroDivisionError) as e:
                raise StageFailure(name, f"{type(e).__name__}: {e}") from e
            except Exception as e:
                log.opt(exception=e).error(f"❌ 阶段 {name} 出现意外异常 {type(e).__name__}")
                raise StageFailure(name, f"{type(e).__name__}: {e}") from e
            finally:
                timings[name] = round(timings.get(name, 0.0) + timer.duration, 6)

        return stage


def run_pipeline(spec: ProblemSpec, **overrides: Any) -> Union[CertificateDocument, FailReport]:
    """已证明或结论不确定时返回证书文档，否则返回 FailReport"""
    return ProofPipeline(**overrides).run(spec).report

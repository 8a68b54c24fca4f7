"""
内置语料运行器

问题文件以 ``<name>.json`` 存放在语料目录中。各条目互相独立，配置多个工作进程时
并行运行；结果行始终按问题名排序。
"""

import fnmatch
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger
from rich.table import Table

from config.settings import get_settings
from core.equation_parser import load_problem
from core.exceptions import ProblemSpecError
from core.models import CorpusRow, ProblemSpec, ProofStatus

from .pipeline import ProofPipeline

STATUS_STYLE = {
    ProofStatus.PROVEN: "green",
    ProofStatus.INCONCLUSIVE: "yellow",
    ProofStatus.FAILED: "red",
}


def corpus_directory(directory: Optional[Union[str, Path]] = None) -> Path:
    return Path(directory or get_settings().corpus_dir)


def load_corpus(
    selector: Optional[str] = None, directory: Optional[Union[str, Path]] = None
) -> List[ProblemSpec]:
    """
    按名称排序的语料问题。``selector`` 为问题名或 shell 风格通配符，
    必须至少匹配一个问题。
    """
    root = corpus_directory(directory)
    if not root.is_dir():
        raise ProblemSpecError(f"corpus directory {root} does not exist")
    specs = sorted((load_problem(path) for path in root.glob("*.json")), key=lambda s: s.name)
    if selector is None:
        return specs
    chosen = [s for s in specs if fnmatch.fnmatchcase(s.name, selector)]
    if not chosen:
        raise ProblemSpecError(f"no corpus problem matches '{selector}'")
    return chosen


def run_entry(spec: ProblemSpec, overrides: Dict[str, Any]) -> CorpusRow:
    """运行一个语料条目（模块级函数，供工作进程调用）"""
    started = time.perf_counter()
    outcome = ProofPipeline(**overrides).run(spec)
    seconds = round(time.perf_counter() - started, 3)
    if outcome.document is None:
        return CorpusRow(
            name=spec.name,
            status=ProofStatus.FAILED,
            stage=outcome.failure.stage,
            seconds=seconds,
        )
    cert = outcome.certificate
    return CorpusRow(
        name=spec.name,
        status=outcome.status,
        guessed=cert.form.describe(),
        reduced=cert.reduced.display(),
        bound=outcome.document.verdict.bound,
        seconds=seconds,
    )


def run_corpus(
    selector: Optional[str] = None,
    workers: Optional[int] = None,
    directory: Optional[Union[str, Path]] = None,
    **overrides: Any,
) -> List[CorpusRow]:
    """运行选中的问题；流水线参数对每个条目生效"""
    specs = load_corpus(selector, directory)
    workers = workers or get_settings().corpus_workers
    logger.info(f"🗂️ 运行 {len(specs)} 个语料问题，工作进程数 {workers}")
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_entry, specs, [overrides] * len(specs)))
    else:
        rows = [run_entry(spec, overrides) for spec in specs]
    return sorted(rows, key=lambda row: row.name)


def all_proven(rows: List[CorpusRow]) -> bool:
    return bool(rows) and all(row.status == ProofStatus.PROVEN for row in rows)


def corpus_table(rows: List[CorpusRow]) -> Table:
    table = Table(title="Corpus")
    table.add_column("problem", style="bold")
    table.add_column("status")
    table.add_column("guessed form", overflow="fold")
    table.add_column("reduced recurrence", overflow="fold")
    table.add_column("bound")
    table.add_column("seconds", justify="right")
    for row in rows:
        style = STATUS_STYLE[row.status]
        status = row.status.value if row.stage is None else f"{row.status.value} ({row.stage})"
        table.add_row(
            row.name,
            f"[{style}]{status}[/{style}]",
            row.guessed or "",
            row.reduced or "",
            row.bound or "",
            f"{row.seconds:.2f}",
        )
    proven = sum(row.status == ProofStatus.PROVEN for row in rows)
    table.caption = f"{proven}/{len(rows)} proven"
    return table

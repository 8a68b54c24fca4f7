#!/usr/bin/env python3
"""
连分式猜测与证明引擎的命令行入口

    run_cfrac.py run corpus/tan.json --format text
    run_cfrac.py corpus            # every bundled problem
    run_cfrac.py corpus "gauss*"   # a selection
    run_cfrac.py --check tan.certificate.json

退出码：0 已证明或复核通过；1 失败、结论不确定或复核失败；
2 用法、解析或问题文件错误。
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from rich.console import Console

from config.logging import setup_logging
from core.equation_parser import load_problem
from core.exceptions import CertificateError, EquationSyntaxError, ProblemSpecError
from proof_service import (
    ProofPipeline,
    all_proven,
    corpus_table,
    dump_certificate,
    load_certificate,
    recheck,
    render_text,
    run_corpus,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"📄 已写入 {out}")
    else:
        print(text)


def _overrides(args: argparse.Namespace) -> dict:
    return {"terms": args.terms, "period_max": args.period_max, "h_count": args.h_count}


def command_run(args: argparse.Namespace) -> int:
    spec = load_problem(args.problem)
    outcome = ProofPipeline(**_overrides(args)).run(spec)
    if outcome.document is None:
        if args.format == "text":
            _emit(f"{spec.name}: FAIL at stage {outcome.failure.stage}: {outcome.failure.reason}", args.out)
        else:
            _emit(outcome.failure.model_dump_json(indent=2), args.out)
        return EXIT_FAILED
    if args.format == "text":
        _emit(render_text(outcome.document), args.out)
    else:
        _emit(dump_certificate(outcome.document), args.out)
    return EXIT_OK if outcome.proven else EXIT_FAILED


def command_corpus(args: argparse.Namespace) -> int:
    rows = run_corpus(args.selector, workers=args.workers, **_overrides(args))
    if args.format == "text":
        console = Console(record=bool(args.out))
        console.print(corpus_table(rows))
        if args.out:
            Path(args.out).write_text(console.export_text(), encoding="utf-8")
    else:
        payload = "[\n" + ",\n".join(row.model_dump_json(indent=2) for row in rows) + "\n]"
        _emit(payload, args.out)
    return EXIT_OK if all_proven(rows) else EXIT_FAILED


def command_check(args: argparse.Namespace) -> int:
    doc = load_certificate(Path(args.check))
    report = recheck(doc)
    if args.format == "text":
        verdict = "valid" if report.valid else f"invalid at step {report.failed_step}: {report.reason}"
        _emit(f"{report.problem}: certificate {verdict}", args.out)
    else:
        _emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK if report.valid else EXIT_FAILED


def _add_common(parser: argparse.ArgumentParser, default=None) -> None:
    """子命令前后都可使用的选项"""
    parser.add_argument("--terms", type=int, default=default, help="Number of C-fraction terms (N)")
    parser.add_argument("--period-max", type=int, default=default, help="Maximum period (L)")
    parser.add_argument("--h-count", type=int, default=default, help="Number of H values computed directly")
    parser.add_argument(
        "--format", choices=["json", "text"], default=default or "json", help="Output format"
    )
    parser.add_argument("--out", default=default, help="Write the output to this file instead of stdout")
    parser.add_argument("--debug", action="store_true", default=default or False, help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Guess and prove C-fraction expansions of solutions of functional equations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run_cfrac.py run corpus/tan.json
  python run_cfrac.py corpus --format text
  python run_cfrac.py --check tan.json
        """,
    )
    parser.add_argument("--check", metavar="CERTIFICATE", help="Recheck a certificate and exit")
    _add_common(parser)

    commands = parser.add_subparsers(dest="command")
    run = commands.add_parser("run", help="Guess and prove one problem file")
    run.add_argument("problem", help="Path of a JSON problem file")
    _add_common(run, argparse.SUPPRESS)
    corpus = commands.add_parser("corpus", help="Run the bundled corpus")
    corpus.add_argument("selector", nargs="?", help="Problem name or shell-style pattern")
    corpus.add_argument("--workers", type=int, help="Worker processes")
    _add_common(corpus, argparse.SUPPRESS)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level="DEBUG" if args.debug else None)

    if args.check is None and args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.check is not None:
            return command_check(args)
        if args.command == "run":
            return command_run(args)
        return command_corpus(args)
    except EquationSyntaxError as e:
        logger.error(f"❌ 方程语法错误\n{e.render()}")
        return EXIT_USAGE
    except (ProblemSpecError, CertificateError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

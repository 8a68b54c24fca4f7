"""
Orchestration around the engine: the staged pipeline, certificate
serialization and recheck, and the corpus runner.
"""

from .certificate import dump_certificate, load_certificate, recheck, render_text, to_document
from .corpus import all_proven, corpus_table, load_corpus, run_corpus
from .pipeline import ProofOutcome, ProofPipeline, run_pipeline

__all__ = [
    "ProofOutcome",
    "ProofPipeline",
    "all_proven",
    "corpus_table",
    "dump_certificate",
    "load_certificate",
    "load_corpus",
    "recheck",
    "render_text",
    "run_corpus",
    "run_pipeline",
    "to_document",
]

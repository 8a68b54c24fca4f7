"""
Shared fixtures: bundled problems, their equation models and contexts.
"""
from pathlib import Path

import pytest

from config.settings import get_settings
from core.equation_parser import build_equation, load_problem
from core.models import GuessConfig

PROJECT_ROOT = Path(__file__).parent.parent
CORPUS_DIR = PROJECT_ROOT / "corpus"
VARIANTS_DIR = CORPUS_DIR / "variants"


@pytest.fixture(autouse=True, scope="session")
def no_file_logging():
    """Keep test runs from writing rotating log files."""
    settings = get_settings()
    previous = settings.log_to_file
    settings.log_to_file = False
    yield
    settings.log_to_file = previous


@pytest.fixture
def corpus_problem():
    """Load a bundled problem (or a numeric variant) by name."""

    def load(name):
        path = CORPUS_DIR / f"{name}.json"
        if not path.exists():
            path = VARIANTS_DIR / f"{name}.json"
        return load_problem(path)

    return load


@pytest.fixture
def corpus_equation(corpus_problem):
    """Equation model of a bundled problem."""

    def build(name):
        return build_equation(corpus_problem(name))

    return build


@pytest.fixture
def guess_config():
    """Engine defaults: N = 20, L = 2, caps 4/4."""
    return GuessConfig()

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
ROOT = TESTS.parent
sys.path.insert(0, str(TESTS))

from dddkit import frontend  # noqa: E402

TUTORIAL = ROOT / "models" / "ordering.ddd"
CORPUS = ROOT / "corpus"


@pytest.fixture
def tutorial_text() -> str:
    return TUTORIAL.read_text()


@pytest.fixture
def tutorial(tutorial_text):
    return frontend.parse(tutorial_text, str(TUTORIAL))

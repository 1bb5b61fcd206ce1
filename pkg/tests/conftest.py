import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import (
    CAR_DOCS,
    CAR_RULES,
    MOVIE_DOCS,
    NAPOLEON_DOCS,
    NAPOLEON_RULES,
    PLANE_DOCS,
    PLANE_RULES,
    build_corpus,
)
from ruleseek.rules import RuleBase


@pytest.fixture
def napoleon_corpus():
    return build_corpus(NAPOLEON_DOCS)


@pytest.fixture
def napoleon_rules():
    return RuleBase.from_text(NAPOLEON_RULES)


@pytest.fixture
def plane_corpus():
    return build_corpus(PLANE_DOCS)


@pytest.fixture
def plane_rules():
    return RuleBase.from_text(PLANE_RULES)


@pytest.fixture
def car_corpus():
    return build_corpus(CAR_DOCS)


@pytest.fixture
def car_rules():
    return RuleBase.from_text(CAR_RULES)


@pytest.fixture
def movie_corpus():
    return build_corpus(MOVIE_DOCS)

import pytest

from contextalg import Interpretation, Lexicon, Universe, build_aspect_language
from contextalg.logic import Formula, parse_formula


@pytest.fixture
def toy_universe():
    return Universe(tuple(parse_formula(t) for t in ("true", "false", "p", "q", "p & q")), ("p", "q"))


@pytest.fixture
def toy_interp(toy_universe):
    return Interpretation(("s1", "s2"), {"s1": "p", "s2": "q", "s1 s2": "p & q"}, toy_universe)


@pytest.fixture
def toy_language(toy_interp):
    return build_aspect_language(toy_interp)


@pytest.fixture
def toy_lexicon():
    return Lexicon({"w1": {"s1": 1.0}, "w2": {"s2": 1.0}})

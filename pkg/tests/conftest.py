import pytest

from purify import parse_and_elaborate
from purify.check import TypeEnv, typecheck
from purify.terms import SRC

TWO_FETCHES = """
prim concat : Str -> Str -> Str
effect fetch : Str -> Eff Str
purify { (fetch("foo")!, fetch("bar")!) }
"""

TWO_CHAINS = """
prim concat : Str -> Str -> Str
prim urlXX : Str
prim urlYY : Str
effect fetch : Str -> Eff Str
purify { fetch(fetch(urlXX)!)! ++ fetch(fetch(urlYY)!)! }
"""


def load(text):
    sig, body = parse_and_elaborate(text)
    typecheck(body, SRC, TypeEnv(sig))
    return sig, body


@pytest.fixture
def two_fetches():
    return load(TWO_FETCHES)


@pytest.fixture
def two_chains():
    return load(TWO_CHAINS)

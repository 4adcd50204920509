"""Shared fixtures: cached catalog classifications and a random expression generator."""
from __future__ import annotations

import functools

import numpy as np
import pytest

from robinson.catalog import get_entry
from robinson.classify import classify
from robinson.torsion import components_of

# criterion number -> (passed, detail); filled by test_acceptance and printed at the end
ACCEPTANCE_RESULTS = {}


@functools.lru_cache(maxsize=None)
def entry_run(name: str, count: int = 8, seed: int = 0):
    """(entry, samples, components, classification) for a catalog entry."""
    e = get_entry(name)
    s = e.samples(count, seed)
    c = components_of(e.coframe, s)
    return e, s, c, classify(c)


# ---------------------------------------------------------------------------
# random expressions over two or three variables, well defined on [-1, 1]^k
# ---------------------------------------------------------------------------

def _leaf(rng, names):
    r = rng.random()
    if r < 0.55:
        return str(rng.choice(names))
    if r < 0.8:
        return f"{rng.integers(1, 6)}"
    if r < 0.9:
        return f"{rng.integers(1, 5)}/{rng.integers(2, 7)}"
    return "i"


def random_expression(rng: np.random.Generator, names, depth: int = 3) -> str:
    """Random infix source text that stays finite for arguments in [-1, 1]."""
    if depth <= 0:
        return _leaf(rng, names)
    sub = lambda: random_expression(rng, names, depth - 1)  # noqa: E731
    k = rng.integers(0, 11)
    if k == 0:
        return f"({sub()})+({sub()})"
    if k == 1:
        return f"({sub()})-({sub()})"
    if k in (2, 3):
        return f"({sub()})*({sub()})"
    if k == 4:
        return f"({sub()})/(3+sin({sub()})^2)"
    if k == 5:
        return f"({sub()})^{rng.integers(2, 4)}"
    if k == 6:
        return f"{rng.choice(['sin', 'cos'])}({sub()})"
    if k == 7:
        return f"exp(({sub()})/4)"
    if k == 8:
        return f"ln(2+cos({sub()}))"
    if k == 9:
        return f"sqrt(5+sin({sub()}))"
    return f"(4+{rng.choice(names)}^2)^(-1/2)*({sub()})"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

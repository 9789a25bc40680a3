import random
from fractions import Fraction

import hypothesis
import hypothesis.strategies as st
import pytest

from pivotal import make_population

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.load_profile("default")

# clustered population used as the worked example (already one unit per cluster)
EXAMPLE_PHI = ("0.5", "0.8", "0.4", "0.7", "0.6")
# eight-unit population in five clusters {1,2} {3} {4} {5} {6,7,8}; cross-border units 3 and 5
EIGHT_UNIT_PI = ("0.3", "0.3", "0.7", "0.3", "0.7", "0.2", "0.3", "0.2")


@pytest.fixture
def example_pop():
    return make_population(EXAMPLE_PHI)


@pytest.fixture
def eight_unit_pop():
    return make_population(EIGHT_UNIT_PI)


def _repair(m, target, den):
    m = list(m)
    while sum(m) > target:
        i = max(range(len(m)), key=lambda j: m[j])
        m[i] -= 1
    while sum(m) < target:
        i = min(range(len(m)), key=lambda j: m[j])
        m[i] += 1
    assert all(1 <= x <= den for x in m)
    return m


@st.composite
def populations(draw, max_N=8, max_n=4, dens=(2, 3, 4, 5, 8, 10, 20)):
    """Exact populations whose probabilities lie on a random grid ``1/den``."""
    N = draw(st.integers(1, max_N))
    n = draw(st.integers(1, min(N, max_n)))
    den = draw(st.sampled_from([d for d in dens if n * d >= N]))
    m = draw(st.lists(st.integers(1, den), min_size=N, max_size=N))
    m = _repair(m, n * den, den)
    return make_population([Fraction(x, den) for x in m])


def random_population(rng: random.Random, max_N=8, max_n=4, dens=(2, 3, 4, 5, 8, 10, 20)):
    """Plain-``random`` counterpart of :func:`populations` for fixed-seed batteries."""
    N = rng.randint(1, max_N)
    n = rng.randint(1, min(N, max_n))
    den = rng.choice([d for d in dens if n * d >= N])
    m = _repair([rng.randint(1, den) for _ in range(N)], n * den, den)
    return make_population([Fraction(x, den) for x in m])


def random_y(rng: random.Random, N: int, lo=-10, hi=10):
    return [rng.randint(lo, hi) for _ in range(N)]


# (criterion, passed, detail) rows filled in by the acceptance suite
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

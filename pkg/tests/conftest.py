import numpy as np
import pytest
from hypothesis import strategies as st

from lapmoments.generators import random_connected
from lapmoments.graph import Graph


def rgraph(seed: int, n: int, p: float | None = None) -> Graph:
    return random_connected(n, np.random.default_rng(seed), p)


@st.composite
def connected_graphs(draw, min_n=2, max_n=14):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.sampled_from([None, 0.3, 0.6]))
    return rgraph(seed, n, p)


@st.composite
def any_graphs(draw, max_n=12):
    """Simple graphs with no connectivity requirement."""
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


@pytest.fixture
def k3():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def k4():
    return Graph(4, [(i, j) for i in range(4) for j in range(i)])


@pytest.fixture
def path3():
    return Graph(3, [(0, 1), (1, 2)])

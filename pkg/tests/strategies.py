"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from qlock.qlinalg import random_density, random_povm, random_pure_state

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


@st.composite
def distributions(draw, min_size=1, max_size=16):
    n = draw(st.integers(min_value=min_size, max_value=max_size))
    w = np.asarray(draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)))
    if w.sum() <= 1e-6:
        w = np.ones(n)
    return w / w.sum()


@st.composite
def joints(draw, max_rows=6, max_cols=6):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    p = draw(distributions(min_size=r * c, max_size=r * c))
    return p.reshape(r, c)


@st.composite
def densities(draw, dim=None):
    d = draw(dims) if dim is None else dim
    rng = np.random.default_rng(draw(seeds))
    return random_density(d, rng)


@st.composite
def ensembles_with_povm(draw, max_dim=4):
    """(weights, states, povm elements) on a common dimension."""
    d = draw(st.integers(2, max_dim))
    n = draw(st.integers(1, 5))
    k = draw(st.integers(d, 6))
    rng = np.random.default_rng(draw(seeds))
    w = rng.dirichlet(np.ones(n))
    if draw(st.booleans()):
        states = np.stack([np.outer(v, v.conj()) for v in (random_pure_state(d, rng) for _ in range(n))])
    else:
        states = np.stack([random_density(d, rng) for _ in range(n)])
    return w, states, random_povm(d, k, rng)

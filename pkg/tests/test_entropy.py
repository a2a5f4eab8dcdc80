from __future__ import annotations

import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlock.channels import (
    WiretapChannel,
    build_mub_example,
    build_schur_multiplier,
    build_symmetric_channel,
    mub_pair_povm,
    product_input,
)
from qlock.config import Budget, BudgetExceeded, ValidationError
from qlock.entropy import (
    Ensemble,
    auto_delta,
    binary_entropy,
    coherent_information,
    conditional_entropy,
    conditional_min_entropy,
    high_order_bound,
    holevo_chi,
    joint_entropy,
    min_entropy,
    mutual_information,
    renyi_conditional_entropy,
    renyi_entropy,
    rw_bound,
    shannon_entropy,
    smooth_conditional_min_entropy,
    smooth_min_entropy,
    tomamichel_bound,
    tomamichel_window,
    von_neumann_entropy,
)
from qlock.qlinalg import ket, proj, random_density, random_pure_state

from .strategies import distributions, ensembles_with_povm, joints, seeds

PLUS = np.array([1, 1]) / np.sqrt(2)
CORR = np.array([[3 / 8, 1 / 8], [1 / 8, 3 / 8]])


def smoothing_oracle(table, eps):
    """Independent convex program: max H_min(I|J) over the trace-distance ball."""
    t = np.atleast_2d(np.asarray(table, dtype=float))
    q = cp.Variable(t.shape, nonneg=True)
    caps = cp.Variable(t.shape[1])
    cons = [cp.sum(q) == 1, 0.5 * cp.sum(cp.abs(q - t)) <= eps, q <= np.ones((t.shape[0], 1)) @ caps[None, :]]
    prob = cp.Problem(cp.Minimize(cp.sum(caps)), cons)
    prob.solve(solver=cp.CLARABEL)
    return -math.log2(prob.value)


def mub_joint(d):
    spec = build_mub_example(d)
    e = Ensemble(np.full(2 * d, 1 / (2 * d)), spec.stacked())
    return e.joint(mub_pair_povm(d))


def test_shannon_examples():
    assert shannon_entropy(np.full(4, 0.25)) == pytest.approx(2.0)
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(ValidationError):
        shannon_entropy([1.2, -0.2])


def test_von_neumann_examples(rng):
    assert von_neumann_entropy(proj(random_pure_state(3, rng))) == pytest.approx(0.0, abs=1e-9)
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.811278, abs=1e-6)


def test_renyi_examples():
    for alpha in (0.5, 2.0, 7.0):
        assert renyi_entropy(np.full(5, 0.2), alpha) == pytest.approx(math.log2(5))
    assert renyi_entropy([0.75, 0.25], 100) == pytest.approx(-math.log2(0.75), abs=0.01)
    assert renyi_entropy([0.5, 0.5], 2) == pytest.approx(1.0)
    assert renyi_entropy(np.diag([0.5, 0.5]), 3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        renyi_entropy([0.5, 0.5], 1)
    with pytest.raises(ValueError):
        renyi_entropy([0.5, 0.5], 0)


@given(distributions())
def test_renyi_continuity_at_one(p):
    h = shannon_entropy(p)
    assert renyi_entropy(p, 1 + 1e-4) == pytest.approx(h, abs=1e-3)
    assert renyi_entropy(p, 1 - 1e-4) == pytest.approx(h, abs=1e-3)


def test_renyi_continuity_tight():
    p = np.array([0.5, 0.3, 0.2])
    h = shannon_entropy(p)
    assert abs(renyi_entropy(p, 1 + 1e-4) - h) < 1e-4
    assert abs(renyi_entropy(p, 1 - 1e-4) - h) < 1e-4
    # inside the switching threshold the Shannon value is returned exactly
    assert renyi_entropy(p, 1 + 1e-7) == h


@given(distributions(), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_renyi_monotone_in_alpha(p, a, b):
    if abs(a - 1) < 1e-3 or abs(b - 1) < 1e-3:
        return
    lo, hi = sorted((a, b))
    assert renyi_entropy(p, hi) <= renyi_entropy(p, lo) + 1e-9


def test_conditional_entropy_examples():
    assert conditional_entropy(np.full((2, 2), 0.25)) == pytest.approx(1.0)
    assert conditional_entropy(np.eye(2) / 2) == pytest.approx(0.0)
    assert conditional_entropy(mub_joint(2)) == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        conditional_entropy(np.ones(4) / 4)


def test_mutual_information_examples():
    assert mutual_information(np.eye(2) / 2) == pytest.approx(1.0)
    assert mutual_information(np.full((2, 2), 0.25)) == pytest.approx(0.0)
    assert mutual_information(mub_joint(2)) == pytest.approx(0.5)


@given(joints())
def test_chain_rule(t):
    assert joint_entropy(t) == pytest.approx(shannon_entropy(t.sum(axis=0)) + conditional_entropy(t), abs=1e-10)
    assert mutual_information(t) >= 0


@given(joints())
def test_pinsker_direction(t):
    prod = np.outer(t.sum(axis=1), t.sum(axis=0))
    assert np.abs(t - prod).sum() <= math.sqrt(2 * math.log(2) * mutual_information(t)) + 1e-9


def test_holevo_examples():
    zero, one = proj(ket(0, 2)), proj(ket(1, 2))
    assert holevo_chi(Ensemble([0.5, 0.5], [zero, zero])) == pytest.approx(0.0, abs=1e-12)
    assert holevo_chi(Ensemble([0.5, 0.5], [zero, one])) == pytest.approx(1.0)
    val = holevo_chi(Ensemble([0.5, 0.5], [zero, proj(PLUS)]))
    assert val == pytest.approx(binary_entropy(math.cos(math.pi / 8) ** 2))
    assert val == pytest.approx(0.6009, abs=1e-4)


@given(ensembles_with_povm())
def test_holevo_bound(pair):
    w, states, povm = pair
    e = Ensemble(w, states)
    chi = holevo_chi(e)
    assert -1e-12 <= chi <= math.log2(e.dim) + 1e-9
    assert mutual_information(e.joint(povm)) <= chi + 1e-9


def test_min_entropy_examples():
    assert min_entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    assert min_entropy([1.0, 0.0, 0.0]) == 0.0
    assert min_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.0)


def test_smooth_min_entropy_examples():
    p = np.array([0.5, 0.25, 0.25])
    assert smooth_min_entropy(p, 0.0) == min_entropy(p)
    oracle = smoothing_oracle(p[:, None], 0.125)
    assert oracle == pytest.approx(-math.log2(0.375), abs=1e-6)
    assert smooth_min_entropy(p, 0.125) == pytest.approx(oracle, abs=1e-6)
    assert smooth_min_entropy(p, 0.125) == pytest.approx(1.415, abs=1e-3)
    for eps in (0.0, 0.3, 0.9):
        assert smooth_min_entropy(np.full(6, 1 / 6), eps) == pytest.approx(math.log2(6))
    with pytest.raises(ValueError):
        smooth_min_entropy(p, 1.0)


@given(distributions(max_size=8), st.floats(0.0, 0.9))
def test_smooth_min_entropy_matches_oracle(p, eps):
    assert smooth_min_entropy(p, eps) == pytest.approx(smoothing_oracle(p[:, None], eps), abs=1e-5)


@given(distributions(), st.floats(0.0, 0.45), st.floats(0.0, 0.45))
def test_smoothing_monotone(p, a, b):
    lo, hi = sorted((a, b))
    assert smooth_min_entropy(p, lo) <= smooth_min_entropy(p, hi) + 1e-12
    assert smooth_min_entropy(p, lo) >= min_entropy(p) - 1e-12


def test_conditional_min_entropy_examples():
    assert conditional_min_entropy(np.full((2, 2), 0.25)) == pytest.approx(1.0)
    assert conditional_min_entropy(np.eye(2) / 2) == pytest.approx(0.0)
    assert conditional_min_entropy(CORR) == pytest.approx(-math.log2(0.75))


def test_smooth_conditional_examples():
    assert smooth_conditional_min_entropy(CORR, 0.0) == pytest.approx(conditional_min_entropy(CORR))
    col = np.array([[0.5], [0.3], [0.2]])
    assert smooth_conditional_min_entropy(col, 0.1) == pytest.approx(smooth_min_entropy(col.ravel(), 0.1))
    oracle = smoothing_oracle(CORR, 0.125)
    # frozen value of the oracle: caps 5/16 per column
    assert oracle == pytest.approx(-math.log2(0.625), abs=1e-6)
    for method in ("greedy", "lp"):
        got = smooth_conditional_min_entropy(CORR, 0.125, method=method)
        assert got == pytest.approx(oracle, abs=1e-6)
        assert conditional_min_entropy(CORR) <= got <= 1.0


@given(joints(max_rows=4, max_cols=4), st.floats(0.0, 0.6))
def test_smooth_conditional_matches_oracle(t, eps):
    oracle = smoothing_oracle(t, eps)
    assert smooth_conditional_min_entropy(t, eps) == pytest.approx(oracle, abs=1e-5)
    assert smooth_conditional_min_entropy(t, eps, method="lp") == pytest.approx(oracle, abs=1e-5)


def test_smooth_conditional_size_limit():
    t = np.full((65, 64), 1 / (65 * 64))
    with pytest.raises(BudgetExceeded):
        smooth_conditional_min_entropy(t, 0.1, method="lp")
    with pytest.raises(BudgetExceeded):
        smooth_conditional_min_entropy(t, 0.1, budget=Budget(max_atoms=100))


def test_rw_bound_examples():
    assert rw_bound(3, 2, 0.5) == pytest.approx(2.0)
    assert rw_bound(3, 2, 1.0) == pytest.approx(3.0)
    assert rw_bound(4, 1.5, 0.25) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        rw_bound(1, 1.0, 0.5)
    with pytest.raises(ValueError):
        rw_bound(1, 2.0, 0.0)


def test_tomamichel_examples():
    assert tomamichel_bound(1.0, 1 + 1e-9, 2) == pytest.approx(1.0, abs=1e-6)
    assert tomamichel_bound(1.0, 1.01, 2) == pytest.approx(0.84)
    assert tomamichel_window(2) - 1 == pytest.approx(0.0990, abs=1e-4)
    with pytest.raises(ValueError):
        tomamichel_bound(1.0, 1.2, 2)


@given(distributions(max_size=16), st.floats(0.01, 0.99), st.floats(0.001, 0.999))
def test_renyi_smoothing_chain(p, frac, eps):
    d = max(len(p), 2)
    alpha = 1 + frac * (tomamichel_window(d) - 1)
    h_alpha = renyi_entropy(p, alpha)
    assert smooth_min_entropy(p, eps) >= rw_bound(h_alpha, alpha, eps) - 1e-9
    assert h_alpha >= tomamichel_bound(shannon_entropy(p), alpha, d) - 1e-9


def test_high_order_bound_examples():
    assert high_order_bound(1.5, 100, 2, 2**-10, 0.1) == pytest.approx(-1460.0)
    n, eps = 1000, 0.01
    want = 1.5 * n - 8 * math.sqrt(n * math.log2(1 / eps))
    assert high_order_bound(1.5, n, 2, eps) == pytest.approx(want)
    delta = auto_delta(n, 2, eps)
    assert high_order_bound(1.5, n, 2, eps, delta) == pytest.approx(want)
    assert high_order_bound(1.5, 10, 2, 1 - 1e-12) == pytest.approx(15.0, abs=1e-4)
    with pytest.raises(ValueError):
        high_order_bound(1.5, 10, 2, 0.0)
    with pytest.raises(ValueError):
        high_order_bound(1.5, 10, 2, 0.1, 1.5)


def test_coherent_information_examples(rng):
    ch = WiretapChannel(np.eye(3, dtype=complex), 3, 3, 1)
    rho = random_density(3, rng)
    assert coherent_information(ch, rho) == pytest.approx(von_neumann_entropy(rho))
    sym = build_symmetric_channel(2)
    assert coherent_information(sym, product_input(sym, random_pure_state(2, rng))) == pytest.approx(0, abs=1e-9)
    assert coherent_information(sym, random_density(3, rng)) == pytest.approx(0, abs=1e-9)
    mub = build_schur_multiplier(build_mub_example(2))
    assert coherent_information(mub, np.eye(4) / 4) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValidationError):
        coherent_information(mub, np.eye(2) / 2)


@given(joints())
def test_arimoto_conditional_entropy_limits(t):
    h = conditional_entropy(t)
    assert renyi_conditional_entropy(t, 1 + 1e-7) == pytest.approx(h)
    assert renyi_conditional_entropy(t, 200) == pytest.approx(conditional_min_entropy(t), abs=0.05)
    assert renyi_conditional_entropy(t, 2) <= renyi_conditional_entropy(t, 1.5) + 1e-9


def test_arimoto_large_alpha_keeps_small_columns():
    # a column whose only entry underflows when raised to a large power directly
    t = np.array([[0.6, 0.0], [0.38, 0.02]])
    want = -math.log2(0.6 + 0.02)
    for alpha in (200, 1000, 1e6):
        oracle = alpha / (1 - alpha) * math.log2(sum(
            math.exp(np.logaddexp.reduce(alpha * np.log(col[col > 0])) / alpha) for col in t.T))
        assert renyi_conditional_entropy(t, alpha) == pytest.approx(oracle, abs=1e-12)
    assert renyi_conditional_entropy(t, 1e6) == pytest.approx(want, abs=1e-5)


@given(seeds)
def test_ensemble_joint_is_normalized(seed):
    rng = np.random.default_rng(seed)
    states = np.stack([random_density(2, rng) for _ in range(3)])
    e = Ensemble([0.2, 0.3, 0.5], states)
    t = e.joint(mub_pair_povm(2))
    assert t.sum() == pytest.approx(1.0)
    assert np.allclose(t.sum(axis=1), [0.2, 0.3, 0.5])

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlock.channels import (
    CqChannelSpec,
    WiretapChannel,
    build_mub_example,
    build_schur_multiplier,
    build_symmetric_channel,
    mub_pair_povm,
)
from qlock.config import ValidationError
from qlock.entropy import Ensemble, conditional_entropy, holevo_chi, renyi_conditional_entropy, shannon_entropy
from qlock.optimize import (
    OptimizerConfig,
    _sphere_objective,
    _table_objective,
    arimoto_grad,
    accessible_equivocation,
    accessible_information,
    additivity_probe,
    constrained_min_output_entropy,
    direct_povm_search,
    lw_upper_bound,
    max_accessible_equivocation,
    maximize_coherent_information,
    min_output_entropy,
    minimax_check,
    povm_from_ensemble,
    product_povm,
    project_simplex,
)
from qlock.qlinalg import Povm, ket, proj, random_density, random_pure_state, random_unitary, support_projector

from .strategies import seeds

CFG = OptimizerConfig(restarts=3)
PLUS = np.array([1, 1]) / np.sqrt(2)


def mub_ensemble(d):
    spec = build_mub_example(d)
    return Ensemble(np.full(2 * d, 1 / (2 * d)), spec.stacked())


def random_spec(rng, n_states=2, d=2, pure=True):
    if pure:
        return CqChannelSpec(tuple(proj(random_pure_state(d, rng)) for _ in range(n_states)))
    return CqChannelSpec(tuple(random_density(d, rng) for _ in range(n_states)))


def great_circle_oracle(states, weights, grid=20001):
    """Max mutual information over real projective qubit measurements."""
    best = 0.0
    for theta in np.linspace(0, np.pi, grid):
        v = np.array([np.cos(theta), np.sin(theta)])
        q0 = np.outer(v, v)
        povm = np.stack([q0, np.eye(2) - q0])
        t = Ensemble(weights, states).joint(povm)
        best = max(best, shannon_entropy(weights) - conditional_entropy(t))
    return best


def test_config_validation():
    with pytest.raises(ValidationError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(step_tolerance=0)


@given(seeds)
def test_project_simplex(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(5) * 3
    p = project_simplex(v)
    assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
    # optimality: no other simplex point is closer
    for _ in range(20):
        q = rng.dirichlet(np.ones(5))
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-12


@given(seeds, st.sampled_from([None, 2.0, 0.5]))
def test_table_gradient_matches_finite_differences(seed, alpha):
    rng = np.random.default_rng(seed)
    b = np.stack([w * random_density(2, rng) for w in rng.dirichlet(np.ones(3))])
    fun = _table_objective(b, alpha)
    u = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    du = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    _, g = fun(u)
    t = 1e-6
    fd = (fun(u + t * du)[0] - fun(u - t * du)[0]) / (2 * t)
    assert fd == pytest.approx(np.real(np.sum(g.conj() * du)), rel=1e-4, abs=1e-6)


@given(seeds, st.sampled_from([0.5, 2.0, 50.0, 400.0]))
def test_arimoto_grad_matches_value_and_finite_differences(seed, alpha):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(12)).reshape(3, 4)
    a[0, 0] = 1e-4  # an entry whose large power underflows
    a /= a.sum()
    val, g = arimoto_grad(a, alpha)
    assert val == pytest.approx(renyi_conditional_entropy(a, alpha), abs=1e-10)
    da = rng.standard_normal(a.shape)
    t = 1e-7
    fd = (arimoto_grad(a + t * da, alpha)[0] - arimoto_grad(a - t * da, alpha)[0]) / (2 * t)
    assert fd == pytest.approx(np.sum(g * da), rel=1e-4, abs=1e-6)


@given(seeds)
def test_sphere_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    fun = _sphere_objective(mub_pair_povm(2).elements)
    u = random_pure_state(2, rng)[:, None]
    du = (rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))) * 0.1
    _, g = fun(u)
    t = 1e-6
    fd = (fun(u + t * du)[0] - fun(u - t * du)[0]) / (2 * t)
    assert fd == pytest.approx(np.real(np.sum(g.conj() * du)), rel=1e-4, abs=1e-6)


def test_povm_from_ensemble_examples(rng):
    basis = random_unitary(3, rng)
    e = Ensemble(np.full(3, 1 / 3), np.stack([proj(basis[:, i]) for i in range(3)]))
    m = povm_from_ensemble(e)
    assert np.allclose(m.elements, e.states)
    # two orthonormal states in dimension 3 leave a kernel outcome
    e2 = Ensemble([0.5, 0.5], e.states[:2])
    m2 = povm_from_ensemble(e2)
    assert m2.num_outcomes == 3
    assert np.allclose(m2.elements[2], e.states[2])
    m3 = povm_from_ensemble(mub_ensemble(2))
    assert np.allclose(m3.elements, 0.5 * mub_ensemble(2).states)


@given(seeds)
def test_povm_from_ensemble_completeness_and_factorization(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    e = Ensemble(rng.dirichlet(np.ones(n)), np.stack([random_density(3, rng, rank=1) for _ in range(n)]))
    m = povm_from_ensemble(e)
    m.validate()
    assert np.allclose(m.elements.sum(axis=0), np.eye(3), atol=1e-9)
    # p_i tr(rho_i Q_j) = tr(sigma^{1/2} M_i sigma^{1/2} ...) : the PGM joint is symmetric
    t = e.joint(m)[:, :n]
    assert np.allclose(t, t.T, atol=1e-9)
    assert np.allclose(support_projector(e.average()) + (m.elements[n] if m.num_outcomes > n else 0),
                       np.eye(3), atol=1e-9)


def test_min_output_entropy_examples():
    assert min_output_entropy(Povm.computational(3), CFG).value == pytest.approx(0.0, abs=1e-9)
    for d, want in ((2, 1.5), (4, 2.0)):
        res = min_output_entropy(mub_pair_povm(d), CFG)
        assert res.value == pytest.approx(want, abs=1e-6)
        assert np.linalg.norm(res.argument) == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_min_output_entropy_respects_uncertainty_bound(d):
    res = min_output_entropy(mub_pair_povm(d), OptimizerConfig(restarts=2))
    bound = 1 + 0.5 * math.log2(d)
    assert res.value >= bound - 1e-6
    assert res.value <= bound + 1e-3


def test_constrained_min_output_entropy_examples(rng):
    psi = random_pure_state(2, rng)
    m = mub_pair_povm(2)
    want = shannon_entropy(m.probabilities(proj(psi)))
    assert constrained_min_output_entropy(m, proj(psi), CFG).value == pytest.approx(want, abs=1e-9)
    for d in (2, 3):
        res = constrained_min_output_entropy(mub_pair_povm(d), np.eye(d) / d, CFG)
        assert res.value == pytest.approx(1 + 0.5 * math.log2(d), abs=1e-4)
        assert np.allclose(res.argument.average(), np.eye(d) / d, atol=1e-9)
    sigma = random_density(3, rng)
    res = constrained_min_output_entropy(Povm.computational(3), sigma, CFG)
    assert res.value <= shannon_entropy(np.diag(sigma).real) + 1e-9
    w, v = np.linalg.eigh(sigma)
    eig_value = sum(wi * shannon_entropy(np.abs(v[:, i]) ** 2) for i, wi in enumerate(w))
    assert res.value <= eig_value + 1e-9


def test_accessible_equivocation_examples(rng):
    basis = random_unitary(2, rng)
    ortho = Ensemble([0.3, 0.7], np.stack([proj(basis[:, 0]), proj(basis[:, 1])]))
    assert accessible_equivocation(ortho, CFG).value == pytest.approx(0.0, abs=1e-6)
    res = accessible_equivocation(mub_ensemble(2), CFG)
    assert res.value == pytest.approx(1.5, abs=1e-4)
    assert res.converged
    single = Ensemble([1.0], random_density(2, rng)[None])
    assert accessible_equivocation(single, CFG).value == 0.0


@settings(max_examples=20)
@given(seeds, st.integers(2, 3), st.integers(2, 4))
def test_accessible_equivocation_routes_agree(seed, d, n):
    rng = np.random.default_rng(seed)
    e = Ensemble(rng.dirichlet(np.ones(n)), np.stack([random_density(d, rng) for _ in range(n)]))
    res = accessible_equivocation(e, CFG)
    assert res.details["route_gap"] <= 1e-2
    # the reported POVM attains the reported value
    assert conditional_entropy(e.joint(res.argument)) == pytest.approx(res.value, abs=1e-6)


def test_accessible_information_two_states_matches_grid_oracle():
    states = np.stack([proj(ket(0, 2)), proj(PLUS)])
    w = np.array([0.5, 0.5])
    oracle = great_circle_oracle(states, w)
    assert oracle == pytest.approx(0.3991, abs=1e-4)
    res = accessible_information(Ensemble(w, states), CFG)
    assert res.value == pytest.approx(oracle, abs=1e-3)


def test_accessible_information_examples(rng):
    basis = random_unitary(3, rng)
    w = np.array([0.2, 0.3, 0.5])
    e = Ensemble(w, np.stack([proj(basis[:, i]) for i in range(3)]))
    assert accessible_information(e, CFG).value == pytest.approx(shannon_entropy(w), abs=1e-6)
    assert accessible_information(Ensemble([1.0], random_density(2, rng)[None]), CFG).value == 0.0


@settings(max_examples=15)
@given(seeds)
def test_accessible_information_below_holevo(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    e = Ensemble(rng.dirichlet(np.ones(n)), np.stack([random_density(2, rng) for _ in range(n)]))
    res = accessible_information(e, OptimizerConfig(restarts=2))
    assert res.value <= holevo_chi(e) + 1e-9


def test_max_accessible_equivocation_examples(rng):
    rho = random_density(2, rng)
    same = CqChannelSpec((rho, rho, rho))
    assert max_accessible_equivocation(same, CFG).value == pytest.approx(math.log2(3), abs=1e-4)
    res = max_accessible_equivocation(build_mub_example(2), CFG)
    assert res.value == pytest.approx(1.5, abs=1e-3)
    assert np.allclose(res.argument, 0.25, atol=2e-2)
    ortho = CqChannelSpec((proj(ket(0, 2)), proj(ket(1, 2))))
    assert max_accessible_equivocation(ortho, CFG).value == pytest.approx(0.0, abs=1e-6)


def test_minimax_examples():
    lo, hi, _, _ = minimax_check(build_mub_example(2), CFG)
    assert lo == pytest.approx(1.5, abs=1e-2) and hi == pytest.approx(1.5, abs=1e-2)
    ortho = CqChannelSpec((proj(ket(0, 2)), proj(ket(1, 2))))
    lo, hi, _, _ = minimax_check(ortho, CFG)
    assert abs(lo) < 1e-6 and abs(hi) < 1e-6


def test_minimax_random_two_state_spec():
    spec = random_spec(np.random.default_rng(17))
    lo, hi, _, _ = minimax_check(spec, CFG)
    assert abs(lo - hi) < 1e-2
    assert lo <= hi + 1e-6


def test_lw_upper_bound_examples(rng):
    ch = build_schur_multiplier(build_mub_example(2))
    e = Ensemble(np.full(4, 0.25), np.stack([proj(ket(i, 4)) for i in range(4)]))
    assert lw_upper_bound(e, ch, CFG) == pytest.approx(1.5, abs=1e-3)
    ident = WiretapChannel(np.eye(2, dtype=complex), 2, 2, 1)
    e2 = Ensemble([0.5, 0.5], np.stack([random_density(2, rng) for _ in range(2)]))
    assert lw_upper_bound(e2, ident, CFG) == pytest.approx(holevo_chi(e2), abs=1e-9)
    const = WiretapChannel(np.eye(2, dtype=complex), 2, 1, 2)
    assert lw_upper_bound(e2, const, CFG) <= 1e-9
    with pytest.raises(ValidationError):
        lw_upper_bound(Ensemble([1.0], np.eye(3)[None] / 3), ch, CFG)


def test_coherent_information_maximization_examples():
    for d in (2, 3):
        ch = build_schur_multiplier(build_mub_example(d))
        assert maximize_coherent_information(ch, CFG).value == pytest.approx(1.0, abs=1e-3)
    assert maximize_coherent_information(build_symmetric_channel(2), CFG).value == pytest.approx(0.0, abs=1e-6)
    ident = WiretapChannel(np.eye(3, dtype=complex), 3, 3, 1)
    assert maximize_coherent_information(ident, CFG).value == pytest.approx(math.log2(3), abs=1e-6)


def test_additivity_probe_examples(rng):
    m = mub_pair_povm(2)
    sigma = np.eye(2) / 2
    near_one = additivity_probe(m, sigma, m, sigma, 1.001, CFG)
    assert abs(near_one.gap) <= 1e-2
    trivial = additivity_probe(Povm.trivial(2), random_density(2, rng), m, sigma, 2.0, CFG)
    assert abs(trivial.gap) <= 1e-6
    two = additivity_probe(m, sigma, m, sigma, 2.0, CFG)
    assert two.gap >= -1e-9
    assert abs(two.gap) <= 1e-2


def test_product_povm_structure(rng):
    a, b = mub_pair_povm(2), Povm.computational(2)
    p = product_povm(a, b)
    p.validate()
    r1, r2 = random_density(2, rng), random_density(2, rng)
    assert np.allclose(p.probabilities(np.kron(r1, r2)), np.outer(a.probabilities(r1), b.probabilities(r2)).ravel())


def test_product_measurement_never_beats_joint_optimum():
    spec = build_mub_example(2)
    e = mub_ensemble(2)
    joint_e = Ensemble(np.kron(e.weights, e.weights), np.stack([np.kron(x, y) for x in e.states for y in e.states]))
    best = direct_povm_search(joint_e, OptimizerConfig(restarts=1, seesaw_iters=0)).value
    prod = conditional_entropy(joint_e.joint(product_povm(mub_pair_povm(2), mub_pair_povm(2))))
    assert prod >= best - 1e-6
    assert prod == pytest.approx(3.0, abs=1e-9)
    assert spec.num_inputs == 4


def test_determinism():
    a = min_output_entropy(mub_pair_povm(3), OptimizerConfig(restarts=2, rng_seed=9))
    b = min_output_entropy(mub_pair_povm(3), OptimizerConfig(restarts=2, rng_seed=9))
    assert a.value == b.value and np.array_equal(a.argument, b.argument)
    assert a.best_trace == b.best_trace

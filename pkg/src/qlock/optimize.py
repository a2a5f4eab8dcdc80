"""Variational quantities over states, ensembles and measurements.

Every minimization here is nonconvex, so results are best-found values over
several starts.  Each restart draws from its own generator seeded by
``(rng_seed, restart)``; the lowest value wins and ties go to the earliest
restart.

Most objectives are functions of a joint table ``a[i, j]`` whose entries
have the form ``a[i, j] = u_j B_i u_j^H`` for the rows ``u_j`` of a matrix
with orthonormal columns.  Two cases share this form:

* rank-one POVMs ``Q_j = u_j^H u_j`` acting on weighted states ``B_i = p_i rho_i``;
* pure-state decompositions of a fixed ``sigma`` acting on a POVM sandwiched
  by ``sqrt(sigma)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .channels import CqChannelSpec, WiretapChannel
from .config import DEFAULT_TOL, ValidationError
from .entropy import Ensemble, holevo_chi, shannon_entropy
from .manifold import polar, random_stiefel, stiefel_descent
from .qlinalg import Povm, dag, eig_hermitian, psd_power, random_pure_state

LN2 = math.log(2.0)
TINY = 1e-300


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 6
    max_iters: int = 400
    step_tolerance: float = 1e-7
    value_tolerance: float = 1e-9
    rng_seed: int = 0
    cross_check_tolerance: float = 1e-2
    outer_iters: int = 40
    seesaw_iters: int = 15

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.outer_iters < 1:
            raise ValidationError("restart and iteration counts must be positive")
        if self.step_tolerance <= 0 or self.value_tolerance <= 0:
            raise ValidationError("tolerances must be positive")

    def rng(self, restart: int, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, restart, stream])


@dataclass
class OptimizationResult:
    value: float
    argument: Any
    converged: bool
    restarts_used: int
    best_trace: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# joint-table objectives


def row_table(u: np.ndarray, b: np.ndarray):
    """``a[i, j] = u_j B_i u_j^H`` together with ``u_j B_i`` for gradients."""
    ub = np.einsum("jk,ikl->ijl", u, b)
    a = np.einsum("ijl,jl->ij", ub, u.conj()).real
    return np.clip(a, 0.0, None), ub


def cond_entropy_grad(a: np.ndarray):
    """``H(I|J)`` of an unnormalized-safe table and ``dH/da``."""
    q = a.sum(axis=0)
    la = np.log2(np.maximum(a, TINY))
    lq = np.log2(np.maximum(q, TINY))
    h = float(-(a * la).sum() + (q * lq).sum())
    return h, -(la - lq[None, :])


def arimoto_grad(a: np.ndarray, alpha: float):
    """Arimoto conditional entropy ``alpha/(1-alpha) log sum_j ||a[:, j]||_alpha`` and its gradient."""
    if abs(alpha - 1.0) < 1e-6:
        return cond_entropy_grad(a)
    a = np.maximum(a, 0.0)
    mx = a.max(axis=0)
    live = mx > 0
    # column norms scaled by the column max so large alpha cannot underflow
    norms = np.zeros(a.shape[1])
    norms[live] = mx[live] * np.sum((a[:, live] / mx[live]) ** alpha, axis=0) ** (1.0 / alpha)
    s = norms.sum()
    val = alpha / (1.0 - alpha) * math.log2(s)
    # d||a_j||_alpha / d a_ij = (a_ij / ||a_j||_alpha)^(alpha - 1)
    dn = np.zeros_like(a)
    dn[:, live] = (np.maximum(a[:, live], TINY) / norms[live]) ** (alpha - 1.0)
    grad = alpha / ((1.0 - alpha) * s * LN2) * dn
    return float(val), grad


def _table_objective(b: np.ndarray, alpha: float | None):
    def fun(u):
        a, ub = row_table(u, b)
        val, c = cond_entropy_grad(a) if alpha is None else arimoto_grad(a, alpha)
        return val, 2.0 * np.einsum("ij,ijl->jl", c, ub)

    return fun


def _best_of(runs):
    """Lowest value wins; ties within 1e-12 go to the earliest run."""
    best = None
    for idx, run in enumerate(runs):
        if best is None or run[1] < best[1][1] - 1e-12:
            best = (idx, run)
    return best


def _descend_all(fun, starts, cfg: OptimizerConfig):
    runs = []
    for u0 in starts:
        u, f, tr = stiefel_descent(fun, u0, cfg.max_iters, cfg.step_tolerance, cfg.value_tolerance)
        runs.append((u, f, tr))
    return runs


def project_simplex(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


# ---------------------------------------------------------------------------
# switching between ensembles and measurements


def povm_from_ensemble(e: Ensemble, tol=DEFAULT_TOL) -> Povm:
    """Pretty-good-measurement style POVM ``rho^{-1/2} p_i rho_i rho^{-1/2}``.

    If the average state is singular the kernel projector is appended as an
    extra outcome that no state in the ensemble can trigger.
    """
    e.validate(tol)
    avg = e.average()
    inv_sqrt = psd_power(avg, -0.5, tol)
    els = np.einsum("ab,i,ibc,cd->iad", inv_sqrt, e.weights, e.states, inv_sqrt)
    els = (els + dag(els)) / 2
    support = psd_power(avg, 0.0, tol)
    kernel = np.eye(e.dim) - support
    if np.linalg.norm(kernel) > 1e-9:
        els = np.concatenate([els, kernel[None]], axis=0)
    return Povm(els)


def povm_table(e: Ensemble, povm) -> np.ndarray:
    """Conditional outcome law ``P(j | i) = tr(rho_i Q_j)``."""
    elements = getattr(povm, "elements", povm)
    return np.clip(np.einsum("iab,jba->ij", e.states, elements).real, 0.0, None)


# ---------------------------------------------------------------------------
# minimum output entropy


def _sphere_objective(elements: np.ndarray):
    def fun(u):
        psi = u[:, 0]
        qpsi = np.einsum("jab,b->ja", elements, psi)
        p = np.clip(np.einsum("a,ja->j", psi.conj(), qpsi).real, 0.0, None)
        lp = np.log2(np.maximum(p, TINY))
        val = float(-(p * lp).sum())
        c = -lp - 1.0 / LN2
        return val, (2.0 * np.einsum("j,ja->a", c, qpsi))[:, None]

    return fun


def min_output_entropy(povm: Povm, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationResult:
    """Best-found ``min_psi H(M(psi))`` over pure inputs."""
    povm.validate()
    d = povm.dim
    starts = []
    for q in povm.elements:
        w, v = eig_hermitian(q)
        starts.append(v[:, :1])
    for r in range(cfg.restarts):
        starts.append(random_pure_state(d, cfg.rng(r))[:, None])
    fun = _sphere_objective(povm.elements)
    runs = _descend_all(fun, starts, cfg)
    idx, (u, val, tr) = _best_of(runs)
    psi = u[:, 0] / np.linalg.norm(u[:, 0])
    return OptimizationResult(val, psi, tr.converged, len(runs), tr.values,
                              {"grad_norm": tr.grad_norm, "start_index": idx})


# ---------------------------------------------------------------------------
# constrained minimum output entropy


@dataclass(frozen=True)
class Decomposition:
    """Pure-state decomposition ``sigma = sum_j q_j |psi_j><psi_j|``."""

    weights: np.ndarray
    vectors: np.ndarray  # rows are normalized psi_j

    def unnormalized(self) -> np.ndarray:
        return np.sqrt(self.weights)[:, None] * self.vectors

    def average(self) -> np.ndarray:
        v = self.unnormalized()
        return v.T @ v.conj()


def _sigma_frame(sigma, tol=DEFAULT_TOL):
    w, e = eig_hermitian(sigma)
    keep = w > tol.support_cutoff * max(w.max(), 0.0)
    return np.clip(w[keep], 0.0, None), e[:, keep]


def _vectors_to_rows(vectors: np.ndarray, lam: np.ndarray, frame: np.ndarray, k: int) -> np.ndarray:
    """Isometry rows ``u_j`` representing unnormalized components ``vectors[j]``."""
    x = (frame.conj().T @ vectors.T) / np.sqrt(lam)[:, None]  # (r, count)
    u = x.conj().T
    if u.shape[0] < k:
        u = np.vstack([u, np.zeros((k - u.shape[0], u.shape[1]), dtype=complex)])
    return u[:k]


def constrained_min_output_entropy(
    povm: Povm,
    sigma,
    cfg: OptimizerConfig = OptimizerConfig(),
    alpha: float | None = None,
    starts: Sequence[np.ndarray] = (),
) -> OptimizationResult:
    """Best-found ``min sum_j q_j H(M(psi_j))`` over decompositions of ``sigma``.

    With ``alpha`` given the objective is the Arimoto conditional entropy of
    order ``alpha`` of the (outcome, component) table instead.  ``starts`` are
    extra initial decompositions given as rows of unnormalized vectors.
    """
    povm.validate()
    lam, frame = _sigma_frame(sigma)
    r = len(lam)
    k = r * r
    root = np.sqrt(lam)
    b = np.einsum("k,ak,jab,bl,l->jkl", root, frame.conj(), povm.elements, frame, root)
    fun = _table_objective(b, alpha)
    u_starts = [np.vstack([np.eye(r, dtype=complex), np.zeros((k - r, r), dtype=complex)])]
    for vecs in starts:
        u_starts.append(_vectors_to_rows(np.asarray(vecs, dtype=complex), lam, frame, k))
    for rs in range(cfg.restarts):
        u_starts.append(random_stiefel(k, r, cfg.rng(rs, 1)))
    runs = _descend_all(fun, u_starts, cfg)
    idx, (u, val, tr) = _best_of(runs)
    comp = (frame * root) @ u.conj().T  # columns are unnormalized psi_j
    comp = comp.T
    weights = np.einsum("ja,ja->j", comp, comp.conj()).real
    keep = weights > 1e-14
    vecs = comp[keep] / np.sqrt(weights[keep])[:, None]
    dec = Decomposition(weights[keep] / weights[keep].sum(), vecs)
    return OptimizationResult(val, dec, tr.converged, len(runs), tr.values,
                              {"grad_norm": tr.grad_norm, "start_index": idx, "rows": u,
                               "unnormalized": comp})


def decomposition_povm(e: Ensemble, unnormalized: np.ndarray) -> np.ndarray:
    """POVM ``rho^{-1/2} |w_j><w_j| rho^{-1/2}`` induced by a decomposition of the average.

    The kernel projector of the average state is added to the first element.
    """
    avg = e.average()
    inv_sqrt = psd_power(avg, -0.5)
    w = unnormalized @ inv_sqrt.T  # rows: (rho^{-1/2} w_j)^T
    els = np.einsum("ja,jb->jab", w, w.conj())
    els[0] += np.eye(e.dim) - psd_power(avg, 0.0)
    return els


# ---------------------------------------------------------------------------
# direct measurement search


def _rank_one_elements(rows: np.ndarray) -> np.ndarray:
    v = rows.conj()
    return np.einsum("ja,jb->jab", v, v.conj())


def _eigenbasis_rows(e: Ensemble) -> np.ndarray:
    """Equal mixture of the distinct eigenbasis measurements of the states."""
    bases = []
    for s in e.states:
        _, v = eig_hermitian(s)
        projs = np.einsum("ak,bk->kab", v, v.conj())
        if not any(_same_basis(projs, b) for b in bases):
            bases.append(projs)
    rows = []
    for projs in bases:
        for p in projs:
            w, v = np.linalg.eigh(p)
            rows.append(v[:, -1].conj() / np.sqrt(len(bases)))
    return np.array(rows)


def _same_basis(a: np.ndarray, b: np.ndarray) -> bool:
    for p in a:
        if not any(np.allclose(p, q, atol=1e-9) for q in b):
            return False
    return True


def _pad_rows(rows: np.ndarray, k: int) -> np.ndarray:
    if rows.shape[0] >= k:
        return rows
    return np.vstack([rows, np.zeros((k - rows.shape[0], rows.shape[1]), dtype=complex)])


def _seesaw_polish(b: np.ndarray, elements: np.ndarray, iters: int, tol: float):
    """Majorize-minimize on ``H(I|J)``, concave in the POVM.

    Each step minimizes the linearization ``sum_j tr(Q_j G_j)`` over all POVMs
    with the same number of outcomes, which can only lower the entropy.
    """
    import cvxpy as cp

    d = b.shape[1]
    k = elements.shape[0]
    cur = elements
    a = np.clip(np.einsum("iab,jba->ij", b, cur).real, 0.0, None)
    val, c = cond_entropy_grad(a)
    history = [val]
    for _ in range(iters):
        g = np.einsum("ij,iab->jab", c, b)
        g = (g + dag(g)) / 2
        qs = [cp.Variable((d, d), hermitian=True) for _ in range(k)]
        cons = [q >> 0 for q in qs] + [sum(qs) == np.eye(d)]
        obj = cp.Minimize(sum(cp.real(cp.trace(q @ gj)) for q, gj in zip(qs, g)))
        prob = cp.Problem(obj, cons)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver=cp.CLARABEL)
        except cp.SolverError:
            break
        if prob.status not in ("optimal", "optimal_inaccurate"):
            break
        new = np.stack([(q.value + q.value.conj().T) / 2 for q in qs])
        # restore exact completeness lost to solver precision
        tot = new.sum(axis=0)
        fix = psd_power(tot, -0.5)
        new = np.einsum("ab,jbc,cd->jad", fix, new, fix)
        a_new = np.clip(np.einsum("iab,jba->ij", b, new).real, 0.0, None)
        v_new, c_new = cond_entropy_grad(a_new)
        if v_new >= val - tol:
            if v_new < val:
                cur, val = new, v_new
                history.append(val)
            break
        cur, val, c = new, v_new, c_new
        history.append(val)
    return cur, val, history


def direct_povm_search(
    e: Ensemble,
    cfg: OptimizerConfig = OptimizerConfig(),
    starts: Sequence[np.ndarray] = (),
    polish: bool = True,
    random_starts: int | None = None,
) -> OptimizationResult:
    """Best-found ``min H(I|J)`` over POVMs measured directly on the ensemble.

    Rank-one POVMs with ``dim^2`` outcomes (more if a start has more rows) are
    searched by Stiefel descent from the eigenbasis mixture, any supplied
    starts (rows ``u_j`` with ``Q_j = u_j^H u_j``) and random starts; the best
    is then polished by an SDP see-saw over general POVMs.
    """
    d = e.dim
    b = e.weights[:, None, None] * e.states
    eig_rows = _eigenbasis_rows(e)
    k = max(d * d, eig_rows.shape[0], *(np.asarray(s).shape[0] for s in starts)) if starts else max(d * d, eig_rows.shape[0])
    fun = _table_objective(b, None)
    u_starts = [_pad_rows(eig_rows, k)] + [_pad_rows(np.asarray(s, dtype=complex), k) for s in starts]
    n_rand = cfg.restarts if random_starts is None else random_starts
    for rs in range(n_rand):
        u_starts.append(random_stiefel(k, d, cfg.rng(rs, 2)))
    runs = _descend_all(fun, u_starts, cfg)
    idx, (u, val, tr) = _best_of(runs)
    elements = _rank_one_elements(u)
    history = list(tr.values)
    if polish and cfg.seesaw_iters > 0:
        elements, val2, hist2 = _seesaw_polish(b, elements, cfg.seesaw_iters, cfg.value_tolerance)
        history += hist2[1:]
        val = min(val, val2)
    return OptimizationResult(val, Povm(elements), tr.converged, len(runs), history,
                              {"rows": u, "start_index": idx})


# ---------------------------------------------------------------------------
# accessible equivocation and information


def accessible_equivocation(
    e: Ensemble,
    cfg: OptimizerConfig = OptimizerConfig(),
    cross_check: bool = True,
    decomposition_starts: Sequence[np.ndarray] = (),
    povm_starts: Sequence[np.ndarray] = (),
) -> OptimizationResult:
    """Best-found ``min_Q H(I|J)`` for the ensemble.

    Primary route: the constrained minimum output entropy of the ensemble's
    own POVM relative to the average state.  Cross-check route: direct POVM
    search.  Disagreement beyond ``cfg.cross_check_tolerance`` clears the
    ``converged`` flag; the reported value is the lower of the two.
    """
    e.validate()
    if len(e) == 1 or np.count_nonzero(e.weights > 0) <= 1:
        return OptimizationResult(0.0, Povm.trivial(e.dim), True, 0, [0.0], {"route": "trivial"})
    mpovm = povm_from_ensemble(e)
    res_a = constrained_min_output_entropy(mpovm, e.average(), cfg, starts=decomposition_starts)
    details = {"route_a": res_a.value}
    value, converged = res_a.value, res_a.converged
    elements = decomposition_povm(e, res_a.details["unnormalized"])
    if cross_check:
        res_b = direct_povm_search(e, cfg, starts=povm_starts)
        details["route_b"] = res_b.value
        details["route_gap"] = abs(res_a.value - res_b.value)
        if res_b.value < value:
            value, elements = res_b.value, res_b.argument.elements
        converged = converged and details["route_gap"] <= cfg.cross_check_tolerance
    return OptimizationResult(value, Povm(elements), converged, res_a.restarts_used, res_a.best_trace, details)


def accessible_information(e: Ensemble, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationResult:
    """Best-found ``max_Q I(I:J)``; never exceeds the Holevo quantity."""
    e.validate()
    h = shannon_entropy(e.weights)
    if h == 0:
        return OptimizationResult(0.0, Povm.trivial(e.dim), True, 0, [0.0])
    res = direct_povm_search(e, cfg)
    value = max(h - res.value, 0.0)
    chi = holevo_chi(e)
    if value > chi + 1e-9:
        raise AssertionError(f"accessible information {value} exceeds Holevo quantity {chi}")
    return OptimizationResult(value, res.argument, res.converged, res.restarts_used,
                              [h - v for v in res.best_trace], {"holevo": chi})


def _supergradient(e: Ensemble, elements: np.ndarray) -> np.ndarray:
    """``d H(I|J) / d p_i`` for a fixed POVM."""
    cond = povm_table(e, elements)
    joint = e.weights[:, None] * cond
    q = joint.sum(axis=0)
    ratio = np.log2(np.maximum(joint, TINY)) - np.log2(np.maximum(q, TINY))[None, :]
    ratio = np.where(cond > 0, ratio, 0.0)
    # for p_i = 0 use the limit of the log ratio
    zero = e.weights <= 0
    if zero.any():
        lc = np.log2(np.maximum(cond, TINY)) - np.log2(np.maximum(q, TINY))[None, :]
        ratio[zero] = np.where(cond[zero] > 0, lc[zero] + np.log2(TINY), 0.0)
    return -(cond * ratio).sum(axis=1)


def max_accessible_equivocation(
    spec: CqChannelSpec,
    cfg: OptimizerConfig = OptimizerConfig(),
    p_starts: Sequence[np.ndarray] = (),
    povm_starts: Sequence[np.ndarray] = (),
    random_p_starts: int = 1,
    cross_check: bool = True,
) -> OptimizationResult:
    """Best-found ``max_p S_acc(I|E)`` by projected supergradient ascent.

    The value is concave in ``p``.  Inner minimizations are warm-started from
    the previous measurement; the final point is re-solved with full restarts
    and both routes.
    """
    spec.validate()
    states = spec.stacked()
    n = spec.num_inputs
    d = spec.dim_e
    starts = [np.full(n, 1.0 / n)] + [project_simplex(np.asarray(p, dtype=float)) for p in p_starts]
    for rs in range(random_p_starts):
        starts.append(cfg.rng(rs, 3).dirichlet(np.ones(n)))
    light = OptimizerConfig(restarts=1, max_iters=cfg.max_iters, step_tolerance=cfg.step_tolerance,
                            value_tolerance=cfg.value_tolerance, rng_seed=cfg.rng_seed, seesaw_iters=0)

    def inner(p, warm):
        e = Ensemble(p, states)
        if np.count_nonzero(p > 1e-15) <= 1:
            return 0.0, np.eye(d, dtype=complex)[None], None
        res_b = direct_povm_search(e, light, starts=warm, polish=False, random_starts=1)
        res_a = constrained_min_output_entropy(povm_from_ensemble(e), e.average(), light)
        if res_a.value < res_b.value:
            els = decomposition_povm(e, res_a.details["unnormalized"])
            return res_a.value, els, res_b.details["rows"]
        return res_b.value, res_b.argument.elements, res_b.details["rows"]

    candidates = []
    trace = []
    for p0 in starts:
        p = p0
        warm = list(povm_starts)
        val, els, rows = inner(p, warm)
        if rows is not None:
            warm = [rows] + list(povm_starts)
        candidates.append((p0, warm))
        step = 0.5
        for _ in range(cfg.outer_iters):
            g = _supergradient(Ensemble(p, states), els)
            g = g - g.mean()
            gn = np.linalg.norm(g)
            if gn < 1e-10:
                break
            improved = False
            while step > 1e-6:
                cand = project_simplex(p + step * g / gn)
                if np.linalg.norm(cand - p) < 1e-12:
                    step *= 0.5
                    continue
                cval, cels, crows = inner(cand, warm)
                if cval > val + cfg.value_tolerance:
                    # re-check the current point with the candidate's measurement
                    if crows is not None:
                        rval, rels, _ = inner(p, [crows] + warm)
                        if rval < val:
                            val, els = rval, rels
                    if cval > val + cfg.value_tolerance:
                        p, val, els = cand, cval, cels
                        if crows is not None:
                            warm = [crows] + list(povm_starts)
                        improved = True
                        step *= 1.5
                        break
                step *= 0.5
            trace.append(val)
            if not improved:
                break
        candidates.append((p, warm))
    final, p = None, None
    for cand_p, warm in candidates:
        res = accessible_equivocation(Ensemble(cand_p, states), cfg, cross_check=cross_check, povm_starts=warm)
        if final is None or res.value > final.value + 1e-12:
            final, p = res, cand_p
    value = final.value
    details = dict(final.details)
    details.update({"measurement": final.argument})
    return OptimizationResult(value, p, final.converged, len(starts), trace, details)


# ---------------------------------------------------------------------------
# minimax


def _inner_max_p(states: np.ndarray, elements: np.ndarray, z0: np.ndarray | None = None):
    """``max_p H(I|J)`` for fixed POVM (concave), via softmax and L-BFGS."""
    cond = np.clip(np.einsum("iab,jba->ij", states, elements).real, 0.0, None)
    n = len(states)

    def neg(z):
        z = z - z.max()
        p = np.exp(z)
        p /= p.sum()
        joint = p[:, None] * cond
        h, c = cond_entropy_grad(joint)
        gp = (c * cond).sum(axis=1)
        gz = p * (gp - p @ gp)
        return -h, -gz

    z0 = np.zeros(n) if z0 is None else z0
    res = minimize(neg, z0, jac=True, method="L-BFGS-B", options={"maxiter": 500, "gtol": 1e-12, "ftol": 1e-15})
    z = res.x - res.x.max()
    p = np.exp(z)
    p /= p.sum()
    return -res.fun, p, res.x


def minimax_value(spec: CqChannelSpec, cfg: OptimizerConfig = OptimizerConfig(),
                  starts: Sequence[np.ndarray] = ()) -> OptimizationResult:
    """Best-found ``min_Q max_p H(I|J)`` over rank-one POVMs."""
    spec.validate()
    states = spec.stacked()
    d = spec.dim_e
    n = spec.num_inputs
    e_uniform = Ensemble(np.full(n, 1.0 / n), states)
    eig_rows = _eigenbasis_rows(e_uniform)
    k = max(d * d, eig_rows.shape[0], *(np.asarray(s).shape[0] for s in starts)) if starts else max(d * d, eig_rows.shape[0])
    memo = {"z": None}

    def fun(u):
        elements = _rank_one_elements(u)
        val, p, z = _inner_max_p(states, elements, memo["z"])
        memo["z"] = z
        b = p[:, None, None] * states
        a, ub = row_table(u, b)
        _, c = cond_entropy_grad(a)
        return val, 2.0 * np.einsum("ij,ijl->jl", c, ub)

    u_starts = [_pad_rows(eig_rows, k)] + [_pad_rows(np.asarray(s, dtype=complex), k) for s in starts]
    for rs in range(cfg.restarts):
        u_starts.append(random_stiefel(k, d, cfg.rng(rs, 4)))
    runs = []
    for u0 in u_starts:
        memo["z"] = None
        runs.append(stiefel_descent(fun, u0, cfg.max_iters, cfg.step_tolerance, cfg.value_tolerance))
    idx, (u, val, tr) = _best_of(runs)
    elements = _rank_one_elements(u)
    _, p, _ = _inner_max_p(states, elements)
    return OptimizationResult(val, Povm(elements), tr.converged, len(runs), tr.values,
                              {"p": p, "start_index": idx})


def minimax_check(spec: CqChannelSpec, cfg: OptimizerConfig = OptimizerConfig()):
    """Return ``(maxmin, minmax, maxmin_result, minmax_result)``."""
    lo = max_accessible_equivocation(spec, cfg)
    hi = minimax_value(spec, cfg)
    return lo.value, hi.value, lo, hi


# ---------------------------------------------------------------------------
# capacities and bounds


def maximize_coherent_information(ch: WiretapChannel, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationResult:
    """Best-found ``max_rho S(N(rho)) - S(N^c(rho))`` with ``rho = T T^dagger / tr``."""
    d = ch.dim_a

    def spec_log(m):
        w, v = np.linalg.eigh((m + dag(m)) / 2)
        w = np.clip(w, 0.0, None)
        s = float(-(w[w > 0] * np.log2(w[w > 0])).sum())
        lg = (v * np.log2(np.maximum(w, 1e-300))) @ dag(v)
        return s, lg

    def neg(x):
        t = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        tt = t @ dag(t)
        tr = np.trace(tt).real
        rho = tt / tr
        sb, lb = spec_log(ch.main(rho))
        se, le = spec_log(ch.complementary(rho))
        gr = ch.main_adjoint(-lb) - ch.complementary_adjoint(-le)
        gr = (gr + dag(gr)) / 2
        dz = (gr @ t - np.trace(gr @ rho).real * t) / tr  # d f / d conj(T)
        g = 2.0 * dz
        return -(sb - se), -np.concatenate([g.real.ravel(), g.imag.ravel()])

    starts = [np.concatenate([np.eye(d).ravel(), np.zeros(d * d)])]
    for rs in range(cfg.restarts):
        rng = cfg.rng(rs, 5)
        starts.append(rng.standard_normal(2 * d * d))
    runs = []
    for x0 in starts:
        res = minimize(neg, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": cfg.max_iters, "gtol": cfg.step_tolerance, "ftol": 1e-15})
        runs.append((res.x, res.fun, res))
    best_idx, best_run = None, None
    for idx, run in enumerate(runs):
        if best_run is None or run[1] < best_run[1] - 1e-12:
            best_idx, best_run = idx, run
    x, fval, res = best_run
    t = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
    rho = t @ dag(t)
    rho /= np.trace(rho).real
    return OptimizationResult(-fval, rho, bool(res.success), len(runs), [-r[1] for r in runs],
                              {"start_index": best_idx, "message": str(res.message)})


def lw_upper_bound(e: Ensemble, ch: WiretapChannel, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    """``I(X:B) - I_acc(X:E)`` evaluated at the input ensemble ``e``."""
    if e.dim != ch.dim_a:
        raise ValidationError(f"ensemble dim {e.dim} != channel input dim {ch.dim_a}")
    bob = Ensemble(e.weights, np.stack([ch.main(s) for s in e.states]))
    eve = Ensemble(e.weights, np.stack([ch.complementary(s) for s in e.states]))
    return holevo_chi(bob) - accessible_information(eve, cfg).value


def product_spec(a: CqChannelSpec, b: CqChannelSpec) -> CqChannelSpec:
    """States ``rho_i (x) rho'_k`` on input label ``(i, k)``, ``i`` major."""
    states = tuple(np.kron(x, y) for x in a.eve_states for y in b.eve_states)
    return CqChannelSpec(states, name=f"({a.name})x({b.name})")


def product_povm(a: Povm, b: Povm) -> Povm:
    return Povm(np.einsum("iab,jcd->ijacbd", a.elements, b.elements).reshape(
        a.num_outcomes * b.num_outcomes, a.dim * b.dim, a.dim * b.dim))


@dataclass
class AdditivityProbe:
    joint: float
    sum: float
    gap: float
    factor_a: OptimizationResult
    factor_b: OptimizationResult
    joint_result: OptimizationResult


def additivity_probe(povm_a: Povm, sigma_a, povm_b: Povm, sigma_b, alpha: float,
                     cfg: OptimizerConfig = OptimizerConfig()) -> AdditivityProbe:
    """Compare the order-``alpha`` constrained minimum on a product with the factor sum.

    The joint search starts from the product of the factor optima, so the
    gap ``sum - joint`` cannot be negative beyond round-off; a positive gap
    is a candidate non-additivity, not a proof of one.
    """
    ra = constrained_min_output_entropy(povm_a, sigma_a, cfg, alpha=alpha)
    rb = constrained_min_output_entropy(povm_b, sigma_b, cfg, alpha=alpha)
    va = ra.details["unnormalized"]
    vb = rb.details["unnormalized"]
    prod = np.einsum("ja,kb->jkab", va, vb).reshape(va.shape[0] * vb.shape[0], -1)
    joint = constrained_min_output_entropy(
        product_povm(povm_a, povm_b), np.kron(np.asarray(sigma_a), np.asarray(sigma_b)), cfg,
        alpha=alpha, starts=[prod])
    total = ra.value + rb.value
    return AdditivityProbe(joint.value, total, total - joint.value, ra, rb, joint)


__all__ = [
    "AdditivityProbe",
    "Decomposition",
    "OptimizationResult",
    "OptimizerConfig",
    "accessible_equivocation",
    "accessible_information",
    "additivity_probe",
    "arimoto_grad",
    "cond_entropy_grad",
    "constrained_min_output_entropy",
    "decomposition_povm",
    "direct_povm_search",
    "lw_upper_bound",
    "max_accessible_equivocation",
    "maximize_coherent_information",
    "min_output_entropy",
    "minimax_check",
    "minimax_value",
    "povm_from_ensemble",
    "povm_table",
    "product_povm",
    "product_spec",
    "project_simplex",
    "row_table",
]

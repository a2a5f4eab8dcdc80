"""Scalar information measures, all in bits.

Classical inputs are probability vectors (``numpy`` 1-d arrays) and joint
laws are 2-d tables indexed ``[i, j]`` with ``i`` the hidden variable
(message or input label) and ``j`` the observation.  Zero-probability
atoms are dropped before taking logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_BUDGET, DEFAULT_TOL, Budget, BudgetExceeded, Tolerances, ValidationError
from .qlinalg import check_density, eig_hermitian

ALPHA_ONE_THRESHOLD = 1e-6


def check_distribution(p, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ValidationError("distribution is empty or has non-finite entries")
    if p.min() < -tol.state:
        raise ValidationError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > tol.state:
        raise ValidationError(f"probabilities sum to {p.sum()!r}")
    return np.clip(p, 0.0, None)


def check_joint(table, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    if t.ndim != 2:
        raise ValidationError(f"joint table must be 2-d, got shape {t.shape}")
    check_distribution(t.ravel(), tol)
    return np.clip(t, 0.0, None)


@dataclass(frozen=True)
class Ensemble:
    """Weighted family ``{p_x, sigma_x}`` of density operators."""

    weights: np.ndarray
    states: np.ndarray  # (n, d, d)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        s = np.asarray(self.states, dtype=complex)
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise ValidationError(f"states must have shape (n, d, d), got {s.shape}")
        if len(w) != len(s):
            raise ValidationError(f"{len(w)} weights for {len(s)} states")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", s)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    def average(self) -> np.ndarray:
        return np.einsum("i,iab->ab", self.weights, self.states)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "Ensemble":
        check_distribution(self.weights, tol)
        for i, s in enumerate(self.states):
            check_density(s, tol, name=f"ensemble state {i}")
        return self

    def joint(self, povm) -> np.ndarray:
        """``Pr{I=i, J=j} = p_i tr(rho_i Q_j)``."""
        elements = getattr(povm, "elements", povm)
        t = np.einsum("i,iab,jba->ij", self.weights, self.states, elements).real
        return np.clip(t, 0.0, None)


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def shannon_entropy(p) -> float:
    return _h(check_distribution(p))


def binary_entropy(x: float) -> float:
    return _h(np.array([x, 1.0 - x]))


def spectrum(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho) -> float:
    return _h(spectrum(check_density(rho)))


def _as_probs(x) -> np.ndarray:
    a = np.asarray(x)
    if a.ndim == 2:
        return spectrum(check_density(a))
    return check_distribution(a)


def renyi_entropy(x, alpha: float) -> float:
    """Renyi entropy of a distribution or of the spectrum of a density operator."""
    if alpha <= 0:
        raise ValueError("renyi_entropy: alpha must be positive")
    if alpha == 1:
        raise ValueError("renyi_entropy: alpha = 1 is the Shannon/von Neumann entropy")
    p = _as_probs(x)
    p = p[p > 0]
    if abs(alpha - 1.0) < ALPHA_ONE_THRESHOLD:
        return _h(p)
    if math.isinf(alpha):
        return float(-np.log2(p.max()))
    # log-sum-exp keeps large alpha stable
    logs = alpha * np.log2(p)
    mx = logs.max()
    return float((mx + np.log2(np.sum(2.0 ** (logs - mx)))) / (1.0 - alpha))


def joint_entropy(table) -> float:
    return _h(check_joint(table).ravel())


def conditional_entropy(table) -> float:
    """``H(I|J) = H(I,J) - H(J)`` for a table indexed ``[i, j]``."""
    t = check_joint(table)
    return _h(t.ravel()) - _h(t.sum(axis=0))


def mutual_information(table) -> float:
    t = check_joint(table)
    return max(_h(t.sum(axis=1)) - (_h(t.ravel()) - _h(t.sum(axis=0))), 0.0)


def holevo_chi(e: Ensemble) -> float:
    e.validate()
    avg = _h(spectrum(e.average()))
    return max(avg - sum(w * _h(spectrum(s)) for w, s in zip(e.weights, e.states) if w > 0), 0.0)


def min_entropy(p) -> float:
    return float(-np.log2(check_distribution(p).max()))


def _cap_column_greedy(table: np.ndarray, eps: float) -> float:
    """Minimal ``sum_j t_j`` over joints within trace distance ``eps``.

    Lowering column cap ``t_j`` through the segment between its k-th and
    (k+1)-th largest entries removes mass at rate k per unit of cap.  The
    removal budget is ``eps`` and the caps must leave room to put the removed
    mass back (``rows * sum_j t_j >= 1``).  Both constraints are separable
    and convex, so taking segments in order of increasing rate is optimal.
    """
    rows, cols = table.shape
    caps = table.max(axis=0)
    total = float(caps.sum())
    floor = 1.0 / rows
    if eps <= 0 or total <= floor:
        return max(total, floor)
    srt = -np.sort(-table, axis=0)
    nxt = np.vstack([srt[1:], np.zeros((1, cols))])
    lengths = (srt - nxt).ravel()
    rates = np.repeat(np.arange(1, rows + 1), cols).astype(float)
    keep = lengths > 0
    lengths, rates = lengths[keep], rates[keep]
    order = np.argsort(rates, kind="stable")
    lengths, rates = lengths[order], rates[order]
    budget = eps
    reducible = total - floor
    for length, rate in zip(lengths, rates):
        step = min(length, budget / rate, reducible)
        total -= step
        reducible -= step
        budget -= step * rate
        if budget <= 0 or reducible <= 0:
            break
    return max(total, floor)


def smooth_min_entropy(p, eps: float) -> float:
    """Max of ``H_min(p')`` over normalized ``p'`` within trace distance ``eps``."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    p = check_distribution(p)
    return float(-np.log2(_cap_column_greedy(p[:, None], eps)))


def conditional_min_entropy(table) -> float:
    t = check_joint(table)
    return float(-np.log2(t.max(axis=0).sum()))


def guessing_probability(table) -> float:
    return float(check_joint(table).max(axis=0).sum())


def smooth_conditional_min_entropy(table, eps: float, method: str = "greedy",
                                   budget: Budget = DEFAULT_BUDGET) -> float:
    """Trace-distance smoothed conditional min-entropy of a classical joint.

    ``method="greedy"`` is exact for any size up to ``budget.max_atoms``;
    ``method="lp"`` solves the epigraph linear program directly and is capped
    at ``budget.max_lp_cells``.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    t = check_joint(table)
    if method == "lp":
        if t.size > budget.max_lp_cells:
            raise BudgetExceeded("smoothing LP cells", t.size, budget.max_lp_cells)
        return float(-np.log2(_cap_lp(t, eps)))
    if method != "greedy":
        raise ValueError(f"unknown method {method!r}")
    if t.size > budget.max_atoms:
        raise BudgetExceeded("smoothing table cells", t.size, budget.max_atoms)
    return float(-np.log2(_cap_column_greedy(t, eps)))


def _cap_lp(table: np.ndarray, eps: float) -> float:
    """Epigraph LP: min sum_j t_j s.t. P' <= t_j, P' >= 0, sum P' = 1, |P - P'|_1 <= 2 eps."""
    from scipy.optimize import linprog

    rows, cols = table.shape
    n = rows * cols
    p = table.ravel()
    # variables: P' (n), slack s (n) with s >= |P - P'|, caps t (cols)
    nv = 2 * n + cols
    c = np.zeros(nv)
    c[2 * n:] = 1.0
    a_ub, b_ub = [], []
    eye = np.eye(n)
    col_of = np.tile(np.arange(cols), rows)
    cap_sel = np.zeros((n, cols))
    cap_sel[np.arange(n), col_of] = 1.0
    a_ub.append(np.hstack([eye, np.zeros((n, n)), -cap_sel]))
    b_ub.append(np.zeros(n))
    a_ub.append(np.hstack([eye, -eye, np.zeros((n, cols))]))
    b_ub.append(p)
    a_ub.append(np.hstack([-eye, -eye, np.zeros((n, cols))]))
    b_ub.append(-p)
    a_ub.append(np.hstack([np.zeros(n), np.ones(n), np.zeros(cols)])[None])
    b_ub.append(np.array([2 * eps]))
    a_eq = np.hstack([np.ones(n), np.zeros(n + cols)])[None]
    res = linprog(c, A_ub=np.vstack(a_ub), b_ub=np.concatenate(b_ub), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * nv, method="highs")
    if res.status != 0:
        raise RuntimeError(f"smoothing LP failed: {res.message}")
    return float(res.fun)


def rw_bound(h_alpha: float, alpha: float, eps: float) -> float:
    """Smooth min-entropy lower bound from a Renyi entropy of order ``alpha > 1``."""
    if not alpha > 1:
        raise ValueError("rw_bound: alpha must exceed 1")
    if not 0 < eps <= 1:
        raise ValueError("rw_bound: eps must lie in (0, 1]")
    return h_alpha - math.log2(1.0 / eps) / (alpha - 1.0)


def tomamichel_window(d: int) -> float:
    """Upper end of the admissible alpha range, ``1 + log 3 / (16 log d)``."""
    return 1.0 + math.log(3) / (16 * math.log(d))


def tomamichel_bound(h: float, alpha: float, d: int) -> float:
    """Renyi entropy lower bound ``H - 16 (alpha - 1) (log d)^2``."""
    if d < 2:
        raise ValueError("tomamichel_bound: d must be at least 2")
    if not 1 < alpha < tomamichel_window(d):
        raise ValueError(
            f"tomamichel_bound: alpha={alpha} outside (1, {tomamichel_window(d):.6f}) for d={d}"
        )
    return h - 16 * (alpha - 1) * math.log2(d) ** 2


def high_order_bound(h_hat: float, n: int, d: int, eps: float, delta: float | None = None) -> float:
    """Lower bound on the smooth min-entropy of ``n`` outcomes of a measurement.

    With ``delta`` given: ``n (h_hat - delta) - 16 (log d)^2 log(1/eps) / delta``.
    With ``delta=None`` the correction is optimized, giving
    ``n h_hat - 8 log d sqrt(n log(1/eps))``.
    """
    if not 0 < eps < 1:
        raise ValueError("high_order_bound: eps must lie in (0, 1)")
    if d < 2 or n < 1:
        raise ValueError("high_order_bound: need d >= 2 and n >= 1")
    log_d = math.log2(d)
    log_inv_eps = math.log2(1.0 / eps)
    if delta is None:
        return n * h_hat - 8 * log_d * math.sqrt(n * log_inv_eps)
    if not 0 < delta < 1:
        raise ValueError("high_order_bound: delta must lie in (0, 1)")
    return n * (h_hat - delta) - 16 * log_d**2 * log_inv_eps / delta


def auto_delta(n: int, d: int, eps: float) -> float:
    """The delta that balances the two correction terms."""
    return math.sqrt(16 * math.log2(d) ** 2 * math.log2(1.0 / eps) / n)


def coherent_information(ch, rho) -> float:
    rho = check_density(rho)
    return _h(spectrum(ch.main(rho))) - _h(spectrum(ch.complementary(rho)))


def renyi_conditional_entropy(table, alpha: float) -> float:
    """Arimoto conditional entropy ``-alpha/(alpha-1) log sum_j ||P(., j)||_alpha``."""
    t = check_joint(table)
    if alpha <= 0 or alpha == 1:
        raise ValueError("renyi_conditional_entropy: alpha must be positive and != 1")
    if abs(alpha - 1) < ALPHA_ONE_THRESHOLD:
        return conditional_entropy(t)
    # scale each column by its max so large alpha cannot underflow
    mx = t.max(axis=0)
    live = mx > 0
    ratio = t[:, live] / mx[live]
    norms = mx[live] * np.sum(ratio**alpha, axis=0) ** (1.0 / alpha)
    return float(alpha / (1.0 - alpha) * np.log2(norms.sum()))


__all__ = [
    "Ensemble",
    "auto_delta",
    "binary_entropy",
    "check_distribution",
    "check_joint",
    "coherent_information",
    "conditional_entropy",
    "conditional_min_entropy",
    "guessing_probability",
    "high_order_bound",
    "holevo_chi",
    "joint_entropy",
    "min_entropy",
    "mutual_information",
    "renyi_conditional_entropy",
    "renyi_entropy",
    "rw_bound",
    "shannon_entropy",
    "smooth_conditional_min_entropy",
    "smooth_min_entropy",
    "tomamichel_bound",
    "tomamichel_window",
    "von_neumann_entropy",
    "eig_hermitian",
]

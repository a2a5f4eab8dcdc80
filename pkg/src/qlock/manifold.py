"""Riemannian descent on complex Stiefel manifolds ``{U : U^H U = I}``.

The objective supplies ``f(U)`` and the Euclidean gradient ``G = 2 df/dconj(U)``
so that a first-order change is ``Re tr(G^H dU)``.  Steps are taken along the
projected gradient with a polar retraction and Armijo backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class DescentTrace:
    values: list = field(default_factory=list)
    grad_norm: float = np.inf
    iterations: int = 0
    converged: bool = False


def polar(x: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(x, full_matrices=False)
    return w @ vh


def tangent(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space at ``u``."""
    a = u.conj().T @ g
    return g - u @ ((a + a.conj().T) / 2)


def random_stiefel(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return polar(z)


def stiefel_descent(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    u0: np.ndarray,
    max_iters: int = 500,
    grad_tol: float = 1e-7,
    value_tol: float = 1e-12,
    step0: float = 0.5,
) -> tuple[np.ndarray, float, DescentTrace]:
    u = polar(np.asarray(u0, dtype=complex))
    f, g = fun(u)
    trace = DescentTrace(values=[f])
    step = step0
    stall = 0
    for it in range(max_iters):
        xi = tangent(u, g)
        gn2 = float(np.vdot(xi, xi).real)
        trace.grad_norm = np.sqrt(gn2)
        if trace.grad_norm < grad_tol:
            trace.converged = True
            break
        accepted = False
        for _ in range(40):
            cand = polar(u - step * xi)
            fc, gc = fun(cand)
            if fc <= f - 1e-4 * step * gn2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            trace.converged = True  # no descent available at working precision
            break
        decrease = f - fc
        u, f, g = cand, fc, gc
        trace.values.append(f)
        step = min(step * 2.0, 1e3)
        stall = stall + 1 if decrease < value_tol * max(1.0, abs(f)) else 0
        if stall >= 5:
            trace.converged = True
            break
    trace.iterations = len(trace.values) - 1
    return u, f, trace


__all__ = ["DescentTrace", "polar", "random_stiefel", "stiefel_descent", "tangent"]

"""Dense complex linear algebra on finite-dimensional state spaces.

States, operators and isometries are plain ``numpy`` arrays of dtype
``complex128``.  The few structured objects (POVMs) are frozen dataclasses
wrapping such arrays.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances, ValidationError


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def is_hermitian(m: np.ndarray, atol: float = DEFAULT_TOL.hermitian) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.allclose(m, dag(m), atol=atol, rtol=0)


def check_pure_state(vec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    if not np.all(np.isfinite(v)):
        raise ValidationError("state vector has non-finite entries")
    if abs(np.vdot(v, v).real - 1.0) > tol.state:
        raise ValidationError(f"state vector not normalized: norm^2 = {np.vdot(v, v).real}")
    return v


def check_density(rho, tol: Tolerances = DEFAULT_TOL, name: str = "state") -> np.ndarray:
    """Validate a density operator and return it as a complex array."""
    r = as_matrix(rho)
    if r.shape[0] != r.shape[1]:
        raise ValidationError(f"{name}: not square, shape {r.shape}")
    if not np.allclose(r, dag(r), atol=tol.state, rtol=0):
        raise ValidationError(f"{name}: not Hermitian")
    ev = np.linalg.eigvalsh((r + dag(r)) / 2)
    if ev.min() < -tol.state:
        raise ValidationError(f"{name}: negative eigenvalue {ev.min():.3e}")
    if abs(np.trace(r).real - 1.0) > tol.state:
        raise ValidationError(f"{name}: trace {np.trace(r).real!r} != 1")
    return r


def is_density(rho, tol: Tolerances = DEFAULT_TOL) -> bool:
    try:
        check_density(rho, tol)
    except ValidationError:
        return False
    return True


def check_isometry(v, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    v = as_matrix(v)
    out_dim, in_dim = v.shape
    if out_dim < in_dim:
        raise ValidationError(f"isometry must have outDim >= inDim, got {v.shape}")
    if not np.allclose(dag(v) @ v, np.eye(in_dim), atol=tol.isometry, rtol=0):
        raise ValidationError("V^dagger V != identity")
    return v


@dataclass(frozen=True)
class Povm:
    """A finite POVM; ``elements`` has shape (outcomes, dim, dim)."""

    elements: np.ndarray

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1] != els.shape[2]:
            raise ValidationError(f"POVM elements must have shape (k, d, d), got {els.shape}")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def num_outcomes(self) -> int:
        return self.elements.shape[0]

    def __len__(self) -> int:
        return self.num_outcomes

    def __iter__(self):
        return iter(self.elements)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """Born-rule outcome law ``tr(rho Q_j)``."""
        p = np.einsum("jab,ba->j", self.elements, rho).real
        return np.clip(p, 0.0, None)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "Povm":
        for j, q in enumerate(self.elements):
            if not np.allclose(q, dag(q), atol=tol.povm, rtol=0):
                raise ValidationError(f"POVM element {j} not Hermitian")
            if np.linalg.eigvalsh((q + dag(q)) / 2).min() < -tol.state:
                raise ValidationError(f"POVM element {j} not positive semidefinite")
        if not np.allclose(self.elements.sum(axis=0), np.eye(self.dim), atol=tol.povm, rtol=0):
            raise ValidationError("POVM elements do not sum to the identity")
        return self

    @classmethod
    def from_vectors(cls, vectors) -> "Povm":
        """Rank-one POVM ``|v_j><v_j|`` from the rows of ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        return cls(np.einsum("ja,jb->jab", v, v.conj()))

    @classmethod
    def computational(cls, dim: int) -> "Povm":
        return cls.from_vectors(np.eye(dim))

    @classmethod
    def trivial(cls, dim: int) -> "Povm":
        return cls(np.eye(dim, dtype=complex)[None])


def tensor_product(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    if not ops:
        raise ValueError("tensor_product needs at least one factor")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep`` (in their original order)."""
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValidationError(f"dims {dims} do not match operator shape {rho.shape}")
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract traced subsystems pairwise, highest index first so positions stay valid
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            out[:, c] = col / ph
    return out


def eig_hermitian(m, atol: float = DEFAULT_TOL.hermitian):
    """Eigen-decomposition with descending eigenvalues.

    Each eigenvector is rephased so that its first non-negligible entry is
    real and positive, which makes the output reproducible.
    """
    m = as_matrix(m)
    if not is_hermitian(m, atol):
        raise ValidationError("eig_hermitian: matrix is not Hermitian")
    w, v = np.linalg.eigh((m + dag(m)) / 2)
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_phase(v[:, order])


def psd_power(m, exponent: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Matrix power of a PSD operator, taken on its support.

    Eigenvalues below ``tol.support_cutoff`` times the largest eigenvalue are
    treated as exact zeros, so negative exponents give pseudo-inverse powers.
    """
    w, v = eig_hermitian(m)
    scale = max(w.max(initial=0.0), 0.0)
    if w.min(initial=0.0) < -max(tol.state, 1e-9 * scale):
        raise ValidationError(f"psd_power: negative eigenvalue {w.min():.3e}")
    support = w > tol.support_cutoff * scale if scale > 0 else np.zeros_like(w, dtype=bool)
    f = np.zeros_like(w)
    f[support] = w[support] ** exponent
    return (v * f) @ dag(v)


def support_projector(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    return psd_power(m, 0.0, tol)


def psd_log2(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """log2 on the support of a PSD operator (zero on the kernel)."""
    w, v = eig_hermitian(m)
    scale = max(w.max(initial=0.0), 0.0)
    support = w > tol.support_cutoff * scale
    f = np.zeros_like(w)
    f[support] = np.log2(w[support])
    return (v * f) @ dag(v)


def trace_norm(m) -> float:
    return float(np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False).sum())


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValidationError(f"trace_distance: shapes {a.shape} and {b.shape} differ")
    return 0.5 * trace_norm(a - b)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isometry(out_dim: int, in_dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the induced (Ginibre) measure."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> Povm:
    """Random rank-one POVM from the rows of a Haar-like isometry."""
    v = random_isometry(outcomes, dim, rng)
    return Povm.from_vectors(v.conj())


def fourier_matrix(d: int) -> np.ndarray:
    """Columns are the generalized-X eigenvectors ``omega^{ij}/sqrt(d)``."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)

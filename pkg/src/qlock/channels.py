"""Wiretap channels given by Stinespring isometries.

A :class:`WiretapChannel` stores an isometry ``V: A -> B (x) E`` whose output
factor order is Bob first, then Eve.  Main and complementary outputs are the
two partial traces of ``V rho V^dagger``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_BUDGET, DEFAULT_TOL, Budget, BudgetExceeded, Tolerances, ValidationError
from .qlinalg import (
    Povm,
    as_matrix,
    check_density,
    check_isometry,
    dag,
    eig_hermitian,
    fourier_matrix,
    partial_trace,
    proj,
)


@dataclass(frozen=True)
class WiretapChannel:
    isometry: np.ndarray
    dim_a: int
    dim_b: int
    dim_e: int
    name: str = field(default="channel", compare=False)

    def __post_init__(self):
        v = check_isometry(self.isometry)
        if v.shape != (self.dim_b * self.dim_e, self.dim_a):
            raise ValidationError(
                f"isometry shape {v.shape} inconsistent with dims A={self.dim_a}, "
                f"B={self.dim_b}, E={self.dim_e}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "isometry", v)

    def _joint(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape != (self.dim_a, self.dim_a):
            raise ValidationError(f"input has shape {rho.shape}, channel expects dim {self.dim_a}")
        return self.isometry @ rho @ dag(self.isometry)

    def main(self, rho) -> np.ndarray:
        return partial_trace(self._joint(rho), [self.dim_b, self.dim_e], [0])

    def complementary(self, rho) -> np.ndarray:
        return partial_trace(self._joint(rho), [self.dim_b, self.dim_e], [1])

    def kraus_main(self) -> np.ndarray:
        """Kraus operators of the main channel, shape (dim_e, dim_b, dim_a)."""
        t = self.isometry.reshape(self.dim_b, self.dim_e, self.dim_a)
        return np.transpose(t, (1, 0, 2))

    def kraus_complementary(self) -> np.ndarray:
        """Kraus operators of the complementary channel, shape (dim_b, dim_e, dim_a)."""
        return self.isometry.reshape(self.dim_b, self.dim_e, self.dim_a)

    def main_adjoint(self, x) -> np.ndarray:
        k = self.kraus_main()
        return np.einsum("eba,bc,ecd->ad", k.conj(), x, k)

    def complementary_adjoint(self, x) -> np.ndarray:
        k = self.kraus_complementary()
        return np.einsum("bea,ec,bcd->ad", k.conj(), x, k)


def apply_main(ch: WiretapChannel, rho) -> np.ndarray:
    return ch.main(rho)


def apply_complementary(ch: WiretapChannel, rho) -> np.ndarray:
    return ch.complementary(rho)


@dataclass(frozen=True)
class CqChannelSpec:
    """Eve's output states ``rho_i`` for each computational input label ``i``."""

    eve_states: tuple
    name: str = field(default="custom-cq", compare=False)

    def __post_init__(self):
        states = tuple(np.asarray(s, dtype=complex) for s in self.eve_states)
        if not states:
            raise ValidationError("cq-spec needs at least one state")
        object.__setattr__(self, "eve_states", states)

    @property
    def dim_e(self) -> int:
        return self.eve_states[0].shape[0]

    @property
    def num_inputs(self) -> int:
        return len(self.eve_states)

    def stacked(self) -> np.ndarray:
        return np.stack(self.eve_states)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "CqChannelSpec":
        d = self.dim_e
        for i, s in enumerate(self.eve_states):
            if s.shape != (d, d):
                raise ValidationError(f"state {i}: shape {s.shape}, expected {(d, d)}")
            check_density(s, tol, name=f"state {i}")
        return self


def _purification_vectors(spec: CqChannelSpec, tol: Tolerances):
    """Spectral purifications sqrt(l_k)|k>_B' |f_k>_E with a common B' dimension."""
    decomps = []
    for s in spec.eve_states:
        w, v = eig_hermitian(s)
        keep = w > tol.support_cutoff * max(w.max(), 0.0)
        decomps.append((np.clip(w[keep], 0, None), v[:, keep]))
    dim_bp = max(len(w) for w, _ in decomps)
    vecs = []
    for w, v in decomps:
        psi = np.zeros((dim_bp, spec.dim_e), dtype=complex)
        psi[: len(w)] = (np.sqrt(w)[:, None] * v.T)
        psi /= np.linalg.norm(psi)
        vecs.append(psi.ravel())
    return dim_bp, vecs


def build_schur_multiplier(spec: CqChannelSpec, tol: Tolerances = DEFAULT_TOL) -> WiretapChannel:
    """Hadamard channel whose complement sends ``|i><i'|`` to ``delta_ii' rho_i``.

    ``V|i> = |i>_B1 (x) |psi_i>_{B2 E}`` with ``|psi_i>`` the spectral
    purification of ``rho_i``; Bob's space is ``B1 (x) B2``.
    """
    spec.validate(tol)
    n = spec.num_inputs
    dim_e = spec.dim_e
    dim_bp, psis = _purification_vectors(spec, tol)
    v = np.zeros((n * dim_bp * dim_e, n), dtype=complex)
    for i, psi in enumerate(psis):
        col = np.zeros(n, dtype=complex)
        col[i] = 1.0
        v[:, i] = np.kron(col, psi)
    return WiretapChannel(v, n, n * dim_bp, dim_e, name=spec.name)


def build_qc_channel(povm: Povm, tol: Tolerances = DEFAULT_TOL) -> WiretapChannel:
    """Measurement channel ``rho -> sum_j tr(rho Q_j)|j><j|``.

    Dilation ``V|phi> = sum_j |j>_B |j>_E1 sqrt(Q_j)|phi>_E2``.
    """
    povm.validate(tol)
    k, d = povm.num_outcomes, povm.dim
    roots = np.stack([_psd_sqrt(q) for q in povm.elements])
    v = np.zeros((k, k, d, d), dtype=complex)
    for j in range(k):
        v[j, j] = roots[j]
    return WiretapChannel(v.reshape(k * k * d, d), d, k, k * d, name="qc")


def _psd_sqrt(q):
    w, u = np.linalg.eigh((q + dag(q)) / 2)
    return (u * np.sqrt(np.clip(w, 0, None))) @ dag(u)


def mub_vectors(d: int) -> np.ndarray:
    """Rows: the d computational vectors followed by the d Fourier vectors."""
    return np.vstack([np.eye(d, dtype=complex), fourier_matrix(d).T])


def build_mub_example(d: int) -> CqChannelSpec:
    """Cq-spec whose 2d outputs are the generalized Z and X eigenstates."""
    if d < 2:
        raise ValidationError("mub example needs d >= 2")
    return CqChannelSpec(tuple(proj(v) for v in mub_vectors(d)), name=f"mub d={d}")


def mub_pair_povm(d: int) -> Povm:
    """Random choice of the Z or X basis: ``{1/2 |v><v|}`` over both bases."""
    return Povm(0.5 * Povm.from_vectors(mub_vectors(d).conj()).elements)


@dataclass(frozen=True)
class SymmetricChannelSpec:
    d: int

    @property
    def in_dim(self) -> int:
        return self.d * (self.d + 1) // 2


def symmetric_basis(d: int) -> np.ndarray:
    """Columns: ``|ii>`` then ``(|ij>+|ji>)/sqrt2`` for i<j, in lexicographic order."""
    cols = []
    pairs = [(i, i) for i in range(d)] + [(i, j) for i in range(d) for j in range(i + 1, d)]
    for i, j in pairs:
        v = np.zeros(d * d, dtype=complex)
        if i == j:
            v[i * d + i] = 1.0
        else:
            v[i * d + j] = v[j * d + i] = 1 / np.sqrt(2)
        cols.append(v)
    return np.stack(cols, axis=1)


def build_symmetric_channel(spec: SymmetricChannelSpec | int) -> WiretapChannel:
    d = spec.d if isinstance(spec, SymmetricChannelSpec) else int(spec)
    if d < 2:
        raise ValidationError("symmetric channel needs d >= 2")
    return WiretapChannel(symmetric_basis(d), d * (d + 1) // 2, d, d, name=f"symmetric d={d}")


def symmetric_input(ch: WiretapChannel, vec) -> np.ndarray:
    """Coordinates on the symmetric subspace of a symmetric vector in C^d (x) C^d."""
    v = np.asarray(vec, dtype=complex).ravel()
    c = dag(ch.isometry) @ v
    if not np.allclose(ch.isometry @ c, v, atol=1e-10):
        raise ValidationError("vector is not in the symmetric subspace")
    return c


def product_input(ch: WiretapChannel, psi) -> np.ndarray:
    """Density operator on Sym^2 for the doubled pure state ``|psi>|psi>``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return proj(symmetric_input(ch, np.kron(psi, psi)))


def tensor_power(ch: WiretapChannel, n: int, budget: Budget = DEFAULT_BUDGET) -> WiretapChannel:
    """Stinespring isometry of ``ch^{(x)n}`` with all B factors before all E factors."""
    if n < 1:
        raise ValidationError("tensor_power needs n >= 1")
    if n == 1:
        return ch
    da, db, de = ch.dim_a, ch.dim_b, ch.dim_e
    entries = (db * de) ** n * da**n
    if entries > budget.max_entries:
        raise BudgetExceeded("tensor_power isometry entries", entries, budget.max_entries)
    t = ch.isometry.reshape(db, de, da)
    full = t
    for _ in range(n - 1):
        # full: (b..., e..., a...) grouped per copy; build by outer product then permute at end
        full = np.multiply.outer(full, t)
    # axes are (b1,e1,a1,b2,e2,a2,...)
    order = [3 * k for k in range(n)] + [3 * k + 1 for k in range(n)] + [3 * k + 2 for k in range(n)]
    full = np.transpose(full, order)
    v = full.reshape(db**n * de**n, da**n)
    return WiretapChannel(v, da**n, db**n, de**n, name=f"{ch.name}^{n}")


def cq_complement_output(spec: CqChannelSpec, labels) -> np.ndarray:
    """Eve's state for a sequence of basis inputs: ``rho_{i1} (x) ... (x) rho_{in}``."""
    from .qlinalg import tensor_product

    return tensor_product([spec.eve_states[i] for i in labels])

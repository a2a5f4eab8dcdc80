"""Weak-locking codes built from key generation plus backward encoding.

A code sends ``n`` symbols.  Each symbol is a label ``x`` with a known
per-symbol picture: Eve's state, Bob's decoding law and the channel input
state.  Alice draws the symbol string from the source law conditioned on
``extract(string, seed) = message`` with a pre-shared uniform seed, and Bob
decodes by re-extracting.

Symbol strings are packed into integers with a fixed number of bits per
symbol (first symbol most significant).  Codes beyond the alphabet carry no
mass.  All metrics use the message-averaged constant as reference point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channels import (
    CqChannelSpec,
    WiretapChannel,
    build_schur_multiplier,
    build_symmetric_channel,
    product_input,
)
from .config import DEFAULT_BUDGET, Budget, BudgetExceeded, ValidationError
from .entropy import check_distribution, conditional_min_entropy
from .extractor import (
    ExtractorSpec,
    ZeroFiberError,
    bits_per_symbol,
    iid_source_law,
    leftover_hash_bound,
    seed_columns,
    seed_rows,
)
from .qlinalg import Povm, fourier_matrix, proj, trace_norm

SEED_CHUNK = 512


@dataclass(frozen=True)
class SymbolModel:
    """Per-symbol data of a scheme, indexed by symbol label."""

    eve_states: np.ndarray  # (X, De, De)
    bob_table: np.ndarray  # (X, X) law of Bob's decoded label given the sent one
    input_states: np.ndarray  # (X, Da, Da) channel input (averaged over key bits)
    uses: int = 1  # channel uses per symbol

    @property
    def alphabet(self) -> int:
        return self.eve_states.shape[0]

    @property
    def dim_e(self) -> int:
        return self.eve_states.shape[1]


@dataclass
class LockingCode:
    name: str
    symbol: SymbolModel
    source: np.ndarray  # per-symbol law
    n_symbols: int
    extractor: ExtractorSpec
    width: int
    seeds: np.ndarray  # valid seed integers
    input_law: np.ndarray  # (N, 2^n_in): law of the sent string for each message
    source_law: np.ndarray  # (2^n_in,) forward i.i.d. law
    key_budget_bits: float
    rng_seed: int
    extra_key_bits: int = 0

    @property
    def message_count(self) -> int:
        return self.extractor.num_keys

    @property
    def block_length(self) -> int:
        return self.n_symbols * self.symbol.uses

    @property
    def message_rate(self) -> float:
        return self.extractor.m / self.block_length

    @property
    def key_rate(self) -> float:
        return self.key_budget_bits / self.block_length

    def hashes(self, seeds) -> np.ndarray:
        return _kernels.hash_inputs(seed_columns(self.extractor, seeds), self.extractor.n_in)

    def encode(self, message: int, seed: int, rng: np.random.Generator) -> int:
        """Sample a packed symbol string from the source conditioned on the fiber."""
        h = self.hashes([seed])[0]
        w = np.where(h == message, self.source_law, 0.0)
        total = w.sum()
        if total <= 0:
            raise ZeroFiberError(f"message {message} has an empty fiber under seed {seed}")
        return int(rng.choice(len(w), p=w / total))

    def decode(self, received: int, seed: int) -> int:
        return int(self.hashes([seed])[0][received])

    def unpack(self, packed: int) -> list[int]:
        mask = (1 << self.width) - 1
        return [(packed >> (self.width * (self.n_symbols - 1 - t))) & mask for t in range(self.n_symbols)]

    def pack(self, labels) -> int:
        out = 0
        for x in labels:
            out = (out << self.width) | int(x)
        return out


# ---------------------------------------------------------------------------
# construction


def _padded(arr: np.ndarray, rows: int) -> np.ndarray:
    out = np.zeros((rows,) + arr.shape[1:], dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


def _build(name: str, symbol: SymbolModel, p, n_symbols: int, m: int, extra_key_bits: int,
           rng_seed: int, budget: Budget) -> LockingCode:
    p = check_distribution(p)
    if len(p) != symbol.alphabet:
        raise ValidationError(f"source law has {len(p)} symbols, scheme has {symbol.alphabet}")
    law, width = iid_source_law(p, n_symbols, budget)
    spec = ExtractorSpec(n_symbols * width, m)
    work = spec.num_seeds * spec.num_inputs
    if work > budget.max_enumeration:
        raise BudgetExceeded("seed x input enumeration", work, budget.max_enumeration)
    acc = np.zeros((spec.num_keys, spec.num_inputs))
    valid_seeds = []
    for lo in range(0, spec.num_seeds, SEED_CHUNK):
        seeds = np.arange(lo, min(lo + SEED_CHUNK, spec.num_seeds))
        h = _kernels.hash_inputs(seed_columns(spec, seeds), spec.n_in)
        part, _, valid = _kernels.accumulate_law(h, law, spec.num_keys)
        acc += part
        valid_seeds.append(seeds[valid.astype(bool)])
    seeds = np.concatenate(valid_seeds)
    if len(seeds) == 0:
        raise ZeroFiberError("no seed gives every message a nonempty fiber under this source")
    key_bits = math.log2(len(seeds)) + extra_key_bits
    return LockingCode(name, symbol, p, n_symbols, spec, width, seeds, acc / len(seeds), law,
                       key_bits, rng_seed, extra_key_bits)


def schur_symbol_model(ch: WiretapChannel, num_inputs: int) -> SymbolModel:
    """Symbols are the computational inputs of a Schur multiplier; Bob reads the first B register."""
    dim_bp = ch.dim_b // num_inputs
    eve, bob, inputs = [], [], []
    for x in range(num_inputs):
        rho = np.zeros((ch.dim_a, ch.dim_a), dtype=complex)
        rho[x, x] = 1.0
        eve.append(ch.complementary(rho))
        out = ch.main(rho).reshape(num_inputs, dim_bp, num_inputs, dim_bp)
        bob.append(np.einsum("abab->a", out).real)
        inputs.append(rho)
    return SymbolModel(np.stack(eve), np.clip(np.stack(bob), 0, None), np.stack(inputs), 1)


def build_theorem1_code(spec: CqChannelSpec, p, n: int, m: int, rng_seed: int = 0,
                        budget: Budget = DEFAULT_BUDGET) -> LockingCode:
    """Key generation from i.i.d. basis inputs, turned into a code by backward encoding."""
    ch = build_schur_multiplier(spec)
    symbol = schur_symbol_model(ch, spec.num_inputs)
    return _build(f"keygen[{spec.name}]", symbol, p, n, m, 0, rng_seed, budget)


def mub_block_vectors(d: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows: the ``d^k`` product Z-basis vectors and product Fourier vectors."""
    z = np.eye(d, dtype=complex)
    x = fourier_matrix(d).T
    zs, xs = z, x
    for _ in range(k - 1):
        zs = np.einsum("ia,jb->ijab", zs, z).reshape(zs.shape[0] * d, -1)
        xs = np.einsum("ia,jb->ijab", xs, x).reshape(xs.shape[0] * d, -1)
    return zs, xs


def symmetric_symbol_model(d: int, k: int) -> SymbolModel:
    """Blocks of ``k`` uses of the symmetric channel; one secret basis bit per block."""
    ch = build_symmetric_channel(d)
    bases = [np.eye(d, dtype=complex), fourier_matrix(d).T]
    per_use = []  # per basis: (inputs, eve, bob table)
    for basis in bases:
        ins = np.stack([product_input(ch, v) for v in basis])
        eve = np.stack([ch.complementary(r) for r in ins])
        bob = np.array([[np.vdot(w, ch.main(r) @ w).real for w in basis] for r in ins])
        per_use.append((ins, eve, bob))
    size = d**k
    eve_blk = 0
    in_blk = 0
    bob_blk = 0
    for ins, eve, bob in per_use:
        e_b, i_b, b_b = eve, ins, bob
        for _ in range(k - 1):
            e_b = np.einsum("xab,ycd->xyacbd", e_b, eve).reshape(e_b.shape[0] * d, e_b.shape[1] * d, -1)
            i_b = np.einsum("xab,ycd->xyacbd", i_b, ins).reshape(i_b.shape[0] * d, i_b.shape[1] * ins.shape[1], -1)
            b_b = np.kron(b_b, bob)
        eve_blk = eve_blk + 0.5 * e_b
        in_blk = in_blk + 0.5 * i_b
        bob_blk = bob_blk + 0.5 * b_b
    assert eve_blk.shape[0] == size
    return SymbolModel(eve_blk, np.clip(bob_blk, 0, None), in_blk, k)


def build_symmetric_code(d: int, n: int, k: int, m: int, rng_seed: int = 0,
                         budget: Budget = DEFAULT_BUDGET) -> LockingCode:
    """Basis-hiding scheme over the symmetric-subspace channel with a uniform block source."""
    if n < 1 or k < 1 or n % k:
        raise ValidationError(f"block size {k} must divide n={n}")
    symbol = symmetric_symbol_model(d, k)
    p = np.full(symbol.alphabet, 1.0 / symbol.alphabet)
    return _build(f"symmetric[d={d},k={k}]", symbol, p, n // k, m, n // k, rng_seed, budget)


# ---------------------------------------------------------------------------
# products over symbols


def _string_states(weights: np.ndarray, per_symbol: np.ndarray, n: int, width: int) -> np.ndarray:
    """``sum_x weights[r, x] (x) per_symbol[x_t]`` for each row ``r``."""
    rows = weights.shape[0]
    s = _padded(per_symbol, 1 << width)
    dim = per_symbol.shape[1]
    x = weights.reshape((rows,) + (1 << width,) * n).astype(complex)
    for _ in range(n):
        x = np.tensordot(x, s, axes=([1], [0]))
    # axes now (rows, a1, b1, ..., an, bn)
    order = [0] + [1 + 2 * t for t in range(n)] + [2 + 2 * t for t in range(n)]
    return np.transpose(x, order).reshape(rows, dim**n, dim**n)


def _joint_povm_table(elements: np.ndarray, per_symbol: np.ndarray, n: int, width: int) -> np.ndarray:
    """``tr((x)_t rho_{x_t} Q_j)`` for a joint POVM, shape (2^(n w), J)."""
    s = _padded(per_symbol, 1 << width)
    dim = per_symbol.shape[1]
    nj = elements.shape[0]
    z = elements.reshape((nj,) + (dim,) * (2 * n))
    for t in range(n):
        rem = n - t
        z = np.tensordot(z, s, axes=([1, 1 + rem], [2, 1]))
    return np.clip(z.real.reshape(nj, -1).T, 0.0, None)


def _kron_all(mats: list) -> np.ndarray:
    out = mats[0]
    for m_ in mats[1:]:
        out = np.kron(out, m_)
    return out


# ---------------------------------------------------------------------------
# strategies and metrics
#
# The Toeplitz seed is part of the key budget, but all security metrics are
# computed with the seed known to Eve: each metric is evaluated for the code
# obtained by fixing the seed and then averaged over seeds.  This is the
# strong-extractor setting; only the remaining key material stays hidden.


@dataclass(frozen=True)
class EveStrategy:
    kind: str
    label: str
    povm: Povm | None = None
    table: np.ndarray | None = None
    restarts: int = 8

    @classmethod
    def product(cls, povm: Povm, label: str) -> "EveStrategy":
        return cls("product", label, povm=povm)

    @classmethod
    def explicit(cls, povm: Povm, label: str) -> "EveStrategy":
        return cls("explicit", label, povm=povm)

    @classmethod
    def seesaw(cls, label: str = "seesaw", restarts: int = 8) -> "EveStrategy":
        return cls("seesaw", label, restarts=restarts)

    @classmethod
    def side_info(cls, label: str = "key-aware", table: np.ndarray | None = None) -> "EveStrategy":
        """Eve also holds all key material and sees labels through per-symbol law ``table``."""
        return cls("side_info", label, table=table)


@dataclass
class StrategyOutcome:
    label: str
    weak_delta: float
    eta: float = float("nan")
    chain_lhs: float = float("nan")
    hmin: float = float("nan")
    best_found: bool = False
    outcomes: int = 0
    joint: np.ndarray | None = field(default=None, repr=False)


def seed_conditionals(code: LockingCode, seeds=None, atoms: int = 1 << 22):
    """Yield ``(seeds, hashes, cond)`` with ``cond[s, m, i] = P(i | m, s)`` in seed chunks."""
    seeds = code.seeds if seeds is None else np.asarray(seeds, dtype=np.int64)
    nk, ni = code.message_count, code.extractor.num_inputs
    chunk = max(1, atoms // (nk * ni))
    for lo in range(0, len(seeds), chunk):
        part = seeds[lo : lo + chunk]
        h = code.hashes(part).astype(np.int64)
        offsets = (np.arange(len(h)) * nk)[:, None]
        masses = np.bincount((h + offsets).ravel(), weights=np.broadcast_to(code.source_law, h.shape).ravel(),
                             minlength=len(h) * nk).reshape(len(h), nk)
        if np.any(masses <= 0):
            raise ZeroFiberError("seed with an empty fiber in the valid seed set")
        cond = np.zeros((len(h), nk, ni))
        s_idx, i_idx = np.meshgrid(np.arange(len(h)), np.arange(ni), indexing="ij")
        cond[s_idx, h, i_idx] = code.source_law[None, :] / np.take_along_axis(masses, h, axis=1)
        yield part, h, cond


def eve_message_states(code: LockingCode, budget: Budget = DEFAULT_BUDGET, seed: int | None = None) -> np.ndarray:
    """Eve's state per message, for a fixed seed or averaged over seeds (``seed=None``)."""
    dim = code.symbol.dim_e**code.n_symbols
    entries = code.message_count * dim * dim
    if entries > budget.max_entries:
        raise BudgetExceeded("Eve message states", entries, budget.max_entries)
    law = code.input_law if seed is None else next(seed_conditionals(code, [seed]))[2][0]
    return _string_states(law, code.symbol.eve_states, code.n_symbols, code.width)


def _seed_state_stack(code: LockingCode, budget: Budget) -> np.ndarray:
    """Per-seed message states, shape (S, N, D, D), or seed-averaged (1, N, D, D) beyond budget."""
    dim = code.symbol.dim_e**code.n_symbols
    entries = len(code.seeds) * code.message_count * dim * dim
    if entries > budget.max_entries:
        return eve_message_states(code, budget)[None]
    out = []
    for _, _, cond in seed_conditionals(code):
        flat = cond.reshape(-1, cond.shape[2])
        st = _string_states(flat, code.symbol.eve_states, code.n_symbols, code.width)
        out.append(st.reshape(cond.shape[0], cond.shape[1], dim, dim))
    return np.concatenate(out)


def seesaw_adversary(states: np.ndarray, restarts: int, rng_seed: int) -> Povm:
    """Two-outcome measurement maximizing ``sum_g sum_m |tr((rho_gm - avg_g) P)|``.

    ``states`` has shape (G, N, D, D) (or (N, D, D) for one group).  The
    iteration alternates between the sign pattern and the positive-part
    projector of the signed deviation sum; neither half-step lowers the
    objective.
    """
    states = np.asarray(states)
    if states.ndim == 3:
        states = states[None]
    dev = states - states.mean(axis=1, keepdims=True)
    dev = dev.reshape(-1, dev.shape[2], dev.shape[3])
    n, dim = dev.shape[0], dev.shape[1]
    best_val, best_p = -1.0, np.zeros((dim, dim), dtype=complex)
    for r in range(restarts):
        rng = np.random.default_rng([rng_seed, r, 7])
        signs = rng.choice([-1.0, 1.0], size=n) if r else np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        prev, p = -1.0, best_p
        for _ in range(200):
            w, v = np.linalg.eigh(np.einsum("m,mab->ab", signs, dev))
            pos = v[:, w > 0]
            p = pos @ pos.conj().T
            vals = np.einsum("mab,ba->m", dev, p).real
            obj = float(np.abs(vals).sum())
            new_signs = np.where(vals >= 0, 1.0, -1.0)
            if obj <= prev + 1e-13 and np.array_equal(new_signs, signs):
                break
            prev, signs = obj, new_signs
        if prev > best_val + 1e-12:
            best_val, best_p = prev, p
    return Povm(np.stack([best_p, np.eye(dim) - best_p]))


def _per_symbol_table(states: np.ndarray, povm: Povm) -> np.ndarray:
    return np.clip(np.einsum("xab,jba->xj", states, povm.elements).real, 0, None)


def resolve_strategy(code: LockingCode, strategy: EveStrategy, budget: Budget = DEFAULT_BUDGET) -> EveStrategy:
    """Replace a see-saw strategy by the explicit measurement it finds."""
    if strategy.kind != "seesaw":
        return strategy
    povm = seesaw_adversary(_seed_state_stack(code, budget), strategy.restarts, code.rng_seed)
    return EveStrategy("explicit", strategy.label, povm=povm)


def strategy_table(code: LockingCode, strategy: EveStrategy, budget: Budget = DEFAULT_BUDGET) -> np.ndarray:
    """``P(j | packed string)`` of a measurement strategy."""
    n, w = code.n_symbols, code.width
    strategy = resolve_strategy(code, strategy, budget)
    if strategy.kind == "product":
        t1 = _per_symbol_table(code.symbol.eve_states, strategy.povm)
        size = (1 << (n * w)) * t1.shape[1] ** n
        if size > budget.max_atoms:
            raise BudgetExceeded("strategy table atoms", size, budget.max_atoms)
        return _kron_all([_padded(t1, 1 << w)] * n)
    if strategy.kind == "explicit":
        return _joint_povm_table(strategy.povm.elements, code.symbol.eve_states, n, w)
    raise ValidationError(f"strategy kind {strategy.kind!r} has no fixed outcome table")


def weak_locking_from_law(cond: np.ndarray) -> float:
    """``(1/N) sum_m sum_j |P(j|m) - Omega_j|`` with ``Omega`` the message average."""
    omega = cond.mean(axis=-2, keepdims=True)
    return float(np.abs(cond - omega).sum(axis=-1).mean())


def _hadamard(bits: int) -> np.ndarray:
    h = np.ones((1, 1))
    for _ in range(bits):
        h = np.block([[h, h], [h, -h]])
    return h


def _fwht_rows(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    n = a.shape[0]
    h = 1
    while h < n:
        a = a.reshape(n // (2 * h), 2, h, -1)
        x = a[:, 0].copy()
        a[:, 0] += a[:, 1]
        a[:, 1] = x - a[:, 1]
        a = a.reshape(n, -1)
        h *= 2
    return a


def _forward_transform(code: LockingCode, strategy: EveStrategy, table: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform over inputs of the forward joint ``P(i, j)``."""
    n, w = code.n_symbols, code.width
    if strategy.kind == "product":
        t1 = _per_symbol_table(code.symbol.eve_states, strategy.povm)
        p1 = _padded(code.source, 1 << w)
        return _kron_all([_hadamard(w) @ (p1[:, None] * _padded(t1, 1 << w))] * n)
    return _fwht_rows(code.source_law[:, None] * table)


def _character_index(spec: ExtractorSpec, seeds: np.ndarray) -> np.ndarray:
    """``idx[s, v]``: the input-space character ``T_s^T v`` as a packed integer."""
    rows = seed_rows(spec, seeds)
    idx = np.zeros((len(seeds), spec.num_keys), dtype=np.int64)
    for v in range(spec.num_keys):
        for r in range(spec.m):
            if (v >> (spec.m - 1 - r)) & 1:
                idx[:, v] ^= rows[:, r]
    return idx


def extractor_distance(code: LockingCode, transform: np.ndarray, pj: np.ndarray) -> float:
    """``|| P(J, K, S) - P(J) (x) U_K (x) U_S ||_1`` over the code's seed set."""
    total = 0.0
    for lo in range(0, len(code.seeds), SEED_CHUNK):
        idx = _character_index(code.extractor, code.seeds[lo : lo + SEED_CHUNK])
        total += _kernels.eta_sweep(transform, idx, pj).sum()
    return total / len(code.seeds)


def seed_known_delta(code: LockingCode, table: np.ndarray | None = None, table1: np.ndarray | None = None) -> float:
    """Seed-averaged weak-locking functional of the law ``P(j | m, s)``.

    Give either a full table over packed strings or a per-symbol table applied
    to every symbol; with neither, Eve sees the strings themselves.  The
    message-conditional laws are read off the Walsh-Hadamard transform of the
    forward joint, one seed at a time.
    """
    n, w = code.n_symbols, code.width
    if table is not None:
        transform = _fwht_rows(code.source_law[:, None] * table)
    else:
        t1 = np.eye(code.symbol.alphabet) if table1 is None else np.asarray(table1, dtype=float)
        p1 = _padded(code.source, 1 << w)
        transform = _kron_all([_hadamard(w) @ (p1[:, None] * _padded(t1, 1 << w))] * n)
    total = 0.0
    for lo in range(0, len(code.seeds), SEED_CHUNK):
        idx = _character_index(code.extractor, code.seeds[lo : lo + SEED_CHUNK])
        total += _kernels.locking_sweep(transform, idx).sum()
    return total / len(code.seeds)


def evaluate_strategy(code: LockingCode, strategy: EveStrategy, budget: Budget = DEFAULT_BUDGET,
                      with_delta: bool = True, with_chain: bool = True) -> StrategyOutcome:
    """Weak-locking delta and, for measurement strategies, the extractor chain quantities.

    ``chain_lhs`` is ``|| P(J, M) - P(J) (x) U_M ||_1`` of the code and
    ``eta`` the extractor distance of the forward scheme under the same
    measurement; ``hmin`` is ``H_min(I^n | J)`` of the forward source.
    """
    if strategy.kind == "side_info":
        return StrategyOutcome(strategy.label, seed_known_delta(code, table1=strategy.table))
    best_found = strategy.kind == "seesaw"
    strategy = resolve_strategy(code, strategy, budget)
    table = strategy_table(code, strategy, budget)
    out = StrategyOutcome(strategy.label, float("nan"), best_found=best_found, outcomes=table.shape[1])
    if with_delta:
        if strategy.kind == "product":
            out.weak_delta = seed_known_delta(code, table1=_per_symbol_table(code.symbol.eve_states, strategy.povm))
        else:
            out.weak_delta = seed_known_delta(code, table=table)
    joint = code.source_law[:, None] * table
    out.hmin = conditional_min_entropy(joint)
    out.joint = joint
    if with_chain:
        pj = joint.sum(axis=0)
        cond = code.input_law @ table
        out.eta = extractor_distance(code, _forward_transform(code, strategy, table), pj)
        out.chain_lhs = float(np.abs(cond - pj[None, :]).sum() / code.message_count)
    return out


def evaluate_weak_locking(code: LockingCode, strategy: EveStrategy, budget: Budget = DEFAULT_BUDGET) -> float:
    return evaluate_strategy(code, strategy, budget, with_chain=False).weak_delta


def evaluate_privacy(code: LockingCode, budget: Budget = DEFAULT_BUDGET, samples: int = 256) -> tuple[float, float]:
    """``(1/N) sum_m || rho_m - avg ||_1`` on Eve's side, averaged over seeds.

    Returns ``(value, standard error)``.  All seeds are enumerated when the
    eigenvalue work fits ``budget.max_enumeration``; otherwise ``samples``
    seeds are drawn uniformly and the standard error is reported.
    """
    dim = code.symbol.dim_e**code.n_symbols
    if code.message_count * dim * dim > budget.max_entries:
        raise BudgetExceeded("Eve message states", code.message_count * dim * dim, budget.max_entries)
    per_seed_work = code.message_count * dim**3
    exhaustive = len(code.seeds) * per_seed_work <= budget.max_enumeration
    if exhaustive:
        seeds = code.seeds
    else:
        rng = np.random.default_rng([code.rng_seed, 2])
        seeds = rng.choice(code.seeds, size=min(samples, len(code.seeds)), replace=False)
    atoms = max(code.message_count * code.extractor.num_inputs, (1 << 22) // max(1, dim * dim))
    vals = []
    for part, _, cond in seed_conditionals(code, seeds, atoms):
        st = _string_states(cond.reshape(-1, cond.shape[2]), code.symbol.eve_states, code.n_symbols, code.width)
        st = st.reshape(len(part), code.message_count, dim, dim)
        dev = st - st.mean(axis=1, keepdims=True)
        norms = np.abs(np.linalg.eigvalsh(dev)).sum(axis=-1)
        vals.extend(norms.mean(axis=1))
    vals = np.asarray(vals)
    se = 0.0 if exhaustive else float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
    return float(vals.mean()), se


def evaluate_strong_locking(code: LockingCode, povm: Povm | None = None) -> float:
    """Weak-locking functional with Eve holding the channel inputs.

    ``povm`` acts on one symbol's input space and is applied to every symbol;
    by default it is the measurement induced by the uniform input ensemble.
    """
    from .entropy import Ensemble
    from .optimize import povm_from_ensemble

    ins = code.symbol.input_states
    if povm is None:
        povm = povm_from_ensemble(Ensemble(np.full(len(ins), 1.0 / len(ins)), ins))
    return seed_known_delta(code, table1=_per_symbol_table(ins, povm))


def evaluate_error(code: LockingCode, exact: bool = True, trials: int = 1000,
                   budget: Budget = DEFAULT_BUDGET) -> tuple[float, float]:
    """Average decoding error ``(value, standard error)``.

    Exact mode enumerates messages, seeds and strings; it needs Bob's
    per-symbol law to be noiseless or the string space to be small.
    """
    bob = code.symbol.bob_table
    noiseless = np.allclose(bob, np.eye(len(bob)), atol=1e-12)
    if exact:
        n_in = code.extractor.num_inputs
        full = None
        if not noiseless:
            if n_in * n_in > budget.max_atoms:
                raise BudgetExceeded("exact error enumeration", n_in * n_in, budget.max_atoms)
            b1 = np.zeros((1 << code.width, 1 << code.width))
            b1[: len(bob), : len(bob)] = bob
            full = _kron_all([b1] * code.n_symbols)
        success = 0.0
        for part, h, cond in seed_conditionals(code):
            if noiseless:
                # Bob receives the sent string and re-extracts its message
                p_ok = np.ones(h.shape)
            else:
                # mass of received strings that decode to the sent string's message
                p_ok = np.stack([(full * (row[None, :] == row[:, None])).sum(axis=1) for row in h])
            ok = np.take_along_axis(cond, h[:, None, :], axis=1)[:, 0, :] * p_ok
            success += ok.sum() / code.message_count
        return max(0.0, 1.0 - success / len(code.seeds)), 0.0
    rng = np.random.default_rng([code.rng_seed, 1])
    errors = 0
    for _ in range(trials):
        msg = int(rng.integers(code.message_count))
        seed = int(code.seeds[rng.integers(len(code.seeds))])
        sent = code.unpack(code.encode(msg, seed, rng))
        got = [int(rng.choice(len(bob), p=bob[x] / bob[x].sum())) for x in sent]
        errors += code.decode(code.pack(got), seed) != msg
    rate = errors / trials
    return rate, math.sqrt(max(rate * (1 - rate), 0.0) / trials)


# ---------------------------------------------------------------------------
# reports


@dataclass
class SimulationReport:
    code: str
    err_prob: float
    err_stderr: float
    privacy_delta: float
    privacy_stderr: float
    weak: dict
    strong_delta: float
    key_rate: float
    message_rate: float
    key_budget_bits: float
    message_bits: int
    block_length: int
    trial_count: int
    rng_seed: int

    CSV_FIELDS = ("code", "strategy", "weak_delta", "eta", "chain_lhs", "hmin", "lhl_bound", "best_found",
                  "err_prob", "err_stderr", "privacy_delta", "privacy_stderr", "strong_delta", "key_rate",
                  "message_rate", "key_budget_bits", "block_length", "trial_count", "rng_seed")

    def rows(self):
        base = {
            "code": self.code,
            "err_prob": self.err_prob,
            "err_stderr": self.err_stderr,
            "privacy_delta": self.privacy_delta,
            "privacy_stderr": self.privacy_stderr,
            "strong_delta": self.strong_delta,
            "key_rate": self.key_rate,
            "message_rate": self.message_rate,
            "key_budget_bits": self.key_budget_bits,
            "block_length": self.block_length,
            "trial_count": self.trial_count,
            "rng_seed": self.rng_seed,
        }
        for label, o in self.weak.items():
            lhl = leftover_hash_bound(max(o.hmin, 0.0), self.message_bits) if np.isfinite(o.hmin) else float("nan")
            yield {**base, "strategy": label, "weak_delta": o.weak_delta, "eta": o.eta, "chain_lhs": o.chain_lhs,
                   "hmin": o.hmin, "lhl_bound": lhl, "best_found": int(o.best_found)}

    def text(self) -> str:
        lines = [
            f"code            {self.code}",
            f"block length    {self.block_length} channel uses, {self.message_bits} message bits",
            f"key budget      {self.key_budget_bits:.4f} bits (rate {self.key_rate:.4f})",
            f"error           {self.err_prob:.3e} (stderr {self.err_stderr:.1e}, trials {self.trial_count})",
            f"privacy delta   {self.privacy_delta:.6f} (stderr {self.privacy_stderr:.1e})",
            f"strong delta    {self.strong_delta:.6f}",
            "deltas are seed-known averages with the message-averaged reference",
            "(within a factor 2 of the best constant)",
        ]
        for label, o in self.weak.items():
            tag = " (best-found adversary)" if o.best_found else ""
            lines.append(f"weak[{label}]{tag} delta={o.weak_delta:.6f} eta={o.eta:.6f} chain={o.chain_lhs:.6f}")
        return "\n".join(lines)


def run_report(code: LockingCode, strategies, budget: Budget = DEFAULT_BUDGET, exact: bool = True,
               trials: int = 0, with_chain: bool = True) -> SimulationReport:
    err, se = evaluate_error(code, exact=exact, trials=trials, budget=budget)
    privacy, privacy_se = evaluate_privacy(code, budget)
    weak = {s.label: evaluate_strategy(code, s, budget, with_chain=with_chain) for s in strategies}
    strong = evaluate_strong_locking(code)
    return SimulationReport(code.name, err, se, privacy, privacy_se, weak, strong, code.key_rate,
                            code.message_rate, code.key_budget_bits, code.extractor.m, code.block_length,
                            0 if exact else trials, code.rng_seed)


def forward_extractor_distance(spec: CqChannelSpec, p, n: int, m: int, strategy: EveStrategy) -> float:
    """``|| P(J, K, S) - P(J) (x) U_K (x) U_S ||_1`` of the forward key generation, all seeds."""
    ch = build_schur_multiplier(spec)
    symbol = schur_symbol_model(ch, spec.num_inputs)
    law, width = iid_source_law(check_distribution(p), n)
    ext = ExtractorSpec(n * width, m)
    code = LockingCode("forward", symbol, check_distribution(p), n, ext, width, np.arange(ext.num_seeds),
                       np.zeros((ext.num_keys, ext.num_inputs)), law, float(ext.seed_bits), 0)
    table = strategy_table(code, strategy)
    joint = law[:, None] * table
    return extractor_distance(code, _forward_transform(code, strategy, table), joint.sum(axis=0))


def mub_product_strategies(d: int) -> list[EveStrategy]:
    """Per-symbol Z-basis, X-basis and random-basis measurements."""
    z = Povm.computational(d)
    x = Povm.from_vectors(fourier_matrix(d).T)
    from .channels import mub_pair_povm

    return [EveStrategy.product(z, "Z"), EveStrategy.product(x, "X"), EveStrategy.product(mub_pair_povm(d), "ZX")]


def block_mub_povm(d: int, k: int) -> Povm:
    zs, xs = mub_block_vectors(d, k)
    return Povm(0.5 * Povm.from_vectors(np.vstack([zs, xs]).conj()).elements)


__all__ = [
    "EveStrategy",
    "LockingCode",
    "SimulationReport",
    "StrategyOutcome",
    "SymbolModel",
    "block_mub_povm",
    "build_symmetric_code",
    "build_theorem1_code",
    "evaluate_error",
    "evaluate_privacy",
    "evaluate_strategy",
    "evaluate_strong_locking",
    "evaluate_weak_locking",
    "eve_message_states",
    "resolve_strategy",
    "seed_conditionals",
    "seed_known_delta",
    "extractor_distance",
    "forward_extractor_distance",
    "mub_block_vectors",
    "mub_product_strategies",
    "run_report",
    "schur_symbol_model",
    "seesaw_adversary",
    "strategy_table",
    "symmetric_symbol_model",
    "weak_locking_from_law",
]

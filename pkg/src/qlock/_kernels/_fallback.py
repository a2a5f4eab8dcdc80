"""Vectorized numpy versions of the enumeration kernels."""

from __future__ import annotations

import numpy as np


def hash_inputs(cols: np.ndarray, n_in: int) -> np.ndarray:
    """Keys of all ``2^n_in`` inputs for each seed, shape (S, 2^n_in).

    ``cols[s, c]`` is Toeplitz column ``c`` packed as an integer; input bit
    ``c`` has weight ``2^(n_in - 1 - c)``.
    """
    cols = np.asarray(cols, dtype=np.int64)
    out = np.zeros((cols.shape[0], 1), dtype=np.int32)
    for c in range(n_in - 1, -1, -1):
        out = np.concatenate([out, out ^ cols[:, c : c + 1].astype(np.int32)], axis=1)
    return out


def accumulate_law(hashes: np.ndarray, p: np.ndarray, n_keys: int):
    """Fiber masses and the seed-summed conditional input law.

    Returns ``(law, masses, valid)``: ``masses[s, k]`` is the source mass of
    fiber ``k`` under seed ``s``; ``valid[s]`` marks seeds whose fibers all
    carry mass; ``law[k, i]`` sums ``P(i | k, s)`` over valid seeds.
    """
    hashes = np.asarray(hashes, dtype=np.int64)
    p = np.asarray(p, dtype=float)
    n_seeds, n_inputs = hashes.shape
    offsets = (np.arange(n_seeds) * n_keys)[:, None]
    masses = np.bincount((hashes + offsets).ravel(), weights=np.broadcast_to(p, hashes.shape).ravel(),
                         minlength=n_seeds * n_keys).reshape(n_seeds, n_keys)
    valid = np.all(masses > 0, axis=1)
    law = np.zeros((n_keys, n_inputs))
    if valid.any():
        hv = hashes[valid]
        inv = 1.0 / masses[valid]
        w = p[None, :] * np.take_along_axis(inv, hv, axis=1)
        flat = (hv * n_inputs + np.arange(n_inputs)[None, :]).ravel()
        law = np.bincount(flat, weights=w.ravel(), minlength=n_keys * n_inputs).reshape(n_keys, n_inputs)
    return law, masses, valid.astype(np.uint8)


def _fwht_axis1(a: np.ndarray) -> np.ndarray:
    n = a.shape[1]
    h = 1
    while h < n:
        a = a.reshape(a.shape[0], n // (2 * h), 2, h, *a.shape[2:])
        x = a[:, :, 0].copy()
        y = a[:, :, 1]
        a[:, :, 0] += y
        a[:, :, 1] = x - y
        a = a.reshape(a.shape[0], n, *a.shape[4:])
        h *= 2
    return a


def eta_sweep(F: np.ndarray, idx: np.ndarray, pj: np.ndarray) -> np.ndarray:
    """Per-seed ``sum_{k,j} |P_s(k, j) - P(j)/K|``.

    ``F`` is the Walsh-Hadamard transform over inputs of the joint ``P(i, j)``;
    ``idx[s, v]`` is the input-space character ``T_s^T v``.
    """
    F = np.asarray(F, dtype=float)
    idx = np.asarray(idx, dtype=np.int64)
    n_seeds, n_keys = idx.shape
    target = np.asarray(pj, dtype=float)[None, None, :] / n_keys
    out = np.empty(n_seeds)
    step = max(1, (1 << 22) // max(1, n_keys * F.shape[1]))
    for lo in range(0, n_seeds, step):
        g = F[idx[lo : lo + step]]
        g = _fwht_axis1(g) / n_keys
        out[lo : lo + step] = np.abs(g - target).sum(axis=(1, 2))
    return out


def locking_sweep(F: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Per-seed ``(1/K) sum_{k,j} |P_s(j|k) - Omega_j|`` with ``Omega`` the key average.

    Same inputs as :func:`eta_sweep`; the conditional law is normalized by
    the fiber masses read off the transformed rows.
    """
    F = np.asarray(F, dtype=float)
    idx = np.asarray(idx, dtype=np.int64)
    n_seeds, n_keys = idx.shape
    out = np.empty(n_seeds)
    step = max(1, (1 << 22) // max(1, n_keys * F.shape[1]))
    for lo in range(0, n_seeds, step):
        g = _fwht_axis1(F[idx[lo : lo + step]])
        g /= g.sum(axis=2, keepdims=True)
        omega = g.mean(axis=1, keepdims=True)
        out[lo : lo + step] = np.abs(g - omega).sum(axis=(1, 2)) / n_keys
    return out

"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --n-in 12 --m 4 --seeds 256
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qlock._kernels import _fallback
from qlock.extractor import ExtractorSpec, seed_columns, seed_rows

try:
    from qlock._kernels import _ext
except ImportError:
    _ext = None


def fwht(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    h = 1
    while h < len(a):
        a = a.reshape(-1, 2, h, *a.shape[1:])
        a = np.concatenate([a[:, :1] + a[:, 1:], a[:, :1] - a[:, 1:]], axis=1).reshape(-1, *a.shape[3:])
        h *= 2
    return a


def problem(n_in: int, m: int, n_seeds: int, n_out: int, rng: np.random.Generator):
    spec = ExtractorSpec(n_in, m)
    seeds = rng.choice(spec.num_seeds, size=min(n_seeds, spec.num_seeds), replace=False)
    cols = seed_columns(spec, seeds)
    rows = seed_rows(spec, seeds)
    idx = np.zeros((len(seeds), spec.num_keys), dtype=np.int64)
    for v in range(spec.num_keys):
        for r in range(m):
            if (v >> (m - 1 - r)) & 1:
                idx[:, v] ^= rows[:, r]
    p = rng.dirichlet(np.ones(spec.num_inputs))
    joint = p[:, None] * rng.dirichlet(np.ones(n_out), size=spec.num_inputs)
    return spec, cols, idx, p, joint


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-in", type=int, default=12)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--seeds", type=int, default=256)
    ap.add_argument("--outcomes", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    spec, cols, idx, p, joint = problem(args.n_in, args.m, args.seeds, args.outcomes, rng)
    F = fwht(joint)
    pj = joint.sum(axis=0)
    h = np.asarray(_fallback.hash_inputs(cols, spec.n_in))

    impls = {"python": _fallback}
    if _ext is not None:
        impls["cython"] = _ext
    cases = {
        "hash_inputs": lambda k: k.hash_inputs(cols, spec.n_in),
        "accumulate_law": lambda k: k.accumulate_law(h, p, spec.num_keys),
        "eta_sweep": lambda k: k.eta_sweep(F, idx, pj),
        "locking_sweep": lambda k: k.locking_sweep(F, idx),
    }
    print(f"n_in={spec.n_in} m={spec.m} seeds={len(cols)} outcomes={args.outcomes}")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in impls) + ("     speedup" if _ext else ""))
    for label, fn in cases.items():
        times = {name: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for name, k in impls.items()}
        line = f"{label:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if _ext is not None:
            line += f"{times['python'] / times['cython']:>11.1f}x"
        print(line)
    if _ext is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()

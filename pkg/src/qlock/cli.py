"""Command-line front end.

Commands print a short text summary and write CSV tables.  CSV goes to
``--out`` when given, otherwise to stdout; the first line of every table is
the schema tag ``#qlock-csv-v1``.

Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 an optimizer
did not meet its convergence or cross-check tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import fields, replace

import numpy as np

from .channels import (
    CqChannelSpec,
    build_symmetric_channel,
    mub_pair_povm,
    mub_vectors,
    product_input,
    tensor_power,
)
from .config import DEFAULT_BUDGET, DEFAULT_TOL, Budget, BudgetExceeded, Tolerances, ValidationError
from .entropy import (
    Ensemble,
    conditional_entropy,
    conditional_min_entropy,
    min_entropy,
    renyi_entropy,
    shannon_entropy,
    smooth_conditional_min_entropy,
    smooth_min_entropy,
)
from .extractor import ZeroFiberError
from .optimize import (
    OptimizerConfig,
    additivity_probe,
    lw_upper_bound,
    max_accessible_equivocation,
    maximize_coherent_information,
    min_output_entropy,
    povm_from_ensemble,
)
from .protocol import (
    EveStrategy,
    SimulationReport,
    block_mub_povm,
    build_symmetric_code,
    build_theorem1_code,
    mub_block_vectors,
    mub_product_strategies,
    run_report,
)
from .qlinalg import Povm, proj, random_density, random_povm, random_pure_state, trace_distance
from .specfile import ChannelSpecFile, load_spec

CSV_TAG = "#qlock-csv-v1"
EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_CONVERGENCE = 0, 2, 3, 4

BOUNDS_FIELDS = ("spec", "builder", "d", "uses", "P_lower", "S_acc_max", "L_W_lower", "L_W_upper_eval", "converged")
PROBE_FIELDS = ("instance", "alpha", "sum", "joint", "gap", "converged")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.12g}"
    return str(x)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_TAG + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(args, columns, rows, out=None) -> None:
    text = render_csv(columns, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (out or sys.stdout).write(text)


def _key_values(items, record, what: str):
    overrides = {}
    names = {f.name: f.type for f in fields(record)}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or key not in names:
            raise ValidationError(f"bad {what} override {item!r}; known keys: {', '.join(names)}")
        try:
            overrides[key] = int(value) if isinstance(getattr(record, key), int) else float(value)
        except ValueError as exc:
            raise ValidationError(f"bad {what} value {item!r}") from exc
        if overrides[key] <= 0:
            raise ValidationError(f"{what} {key} must be positive")
    return replace(record, **overrides)


def _settings(args) -> tuple[Tolerances, Budget, OptimizerConfig]:
    tol = _key_values(args.tol, DEFAULT_TOL, "tolerance")
    budget = _key_values(args.budget, DEFAULT_BUDGET, "budget")
    cfg = OptimizerConfig(restarts=args.restarts, rng_seed=args.seed)
    return tol, budget, cfg


def _say(args, text: str) -> None:
    # keep stdout clean for CSV when no output file is given
    print(text, file=sys.stdout if args.out else sys.stderr)


# ---------------------------------------------------------------------------
# channel-info


def _cq_structure_error(spec: ChannelSpecFile, tol: Tolerances) -> float:
    """Largest deviation of the complement from ``|i><i'| -> delta_ii' rho_i``."""
    ch = spec.channel(tol)
    n = spec.cq.num_inputs
    worst = 0.0
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            target = spec.cq.eve_states[i] if i == j else 0.0
            worst = max(worst, float(np.abs(ch.complementary(e) - target).max()))
    return worst


def cmd_channel_info(args) -> int:
    tol, _, _ = _settings(args)
    spec = load_spec(args.spec)
    ch = spec.channel(tol)
    lines = [f"spec        {spec.name} (builder {spec.builder})",
             f"dims        A={ch.dim_a} B={ch.dim_b} E={ch.dim_e}"]
    if spec.cq is not None:
        lines.append(f"inputs      {spec.cq.num_inputs} symbols, dimE {spec.cq.dim_e}")
        err = _cq_structure_error(spec, tol)
        lines.append(f"cq check    {'pass' if err <= tol.hermitian else 'FAIL'} (max deviation {err:.2e})")
    if spec.builder == "mub":
        v = mub_vectors(spec.d)
        overlaps = np.abs(v[: spec.d] @ v[spec.d :].conj().T) ** 2
        dev = float(np.abs(overlaps - 1.0 / spec.d).max())
        lines.append(f"mub overlap {'pass' if dev <= 1e-12 else 'FAIL'} (max |<z|x>|^2 - 1/d = {dev:.2e})")
    if spec.builder == "symmetric":
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(args.samples):
            psi = random_pure_state(spec.d, rng)
            rho = product_input(ch, psi)
            worst = max(worst, trace_distance(ch.main(rho), ch.complementary(rho)))
        lines.append(f"symmetric   {'pass' if worst <= 1e-12 else 'FAIL'} "
                     f"(max Bob/Eve trace distance {worst:.2e} over {args.samples} product inputs)")
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def _uniform_ensemble(states) -> Ensemble:
    states = np.asarray(states)
    return Ensemble(np.full(len(states), 1.0 / len(states)), states)


def bounds_row(spec: ChannelSpecFile, cfg: OptimizerConfig, tol: Tolerances = DEFAULT_TOL,
               budget: Budget = DEFAULT_BUDGET) -> dict:
    """One row of capacity-bound estimates for a spec.

    For symmetric specs the locking quantities refer to a block of ``k``
    channel uses (column ``uses``); ``P_lower`` is always per use.  There the
    basis bit of each block is pre-shared key, so it is removed from the
    minimum output entropy before reporting ``L_W_lower``.
    """
    key_bits = 0.0
    if spec.builder == "symmetric":
        ch1 = build_symmetric_channel(spec.symmetric)
        ch = tensor_power(ch1, spec.k, budget)
        vecs = np.vstack(mub_block_vectors(spec.d, spec.k))
        cq = CqChannelSpec(tuple(proj(v) for v in vecs), name=f"{spec.name} basis outputs")
        povm = block_mub_povm(spec.d, spec.k)
        # product inputs |v>|v> per use; Eve's output is |v><v|
        per_use = [np.eye(spec.d, dtype=complex), mub_vectors(spec.d)[spec.d :]]
        inputs = []
        for basis in per_use:
            ins = [product_input(ch1, v) for v in basis]
            block = ins
            for _ in range(spec.k - 1):
                block = [np.kron(a, b) for a in block for b in ins]
            inputs.extend(block)
        p_res = maximize_coherent_information(ch1, cfg)
        key_bits = 1.0
    else:
        cq = spec.cq
        ch = spec.channel(tol)
        povm = povm_from_ensemble(_uniform_ensemble(cq.stacked()))
        inputs = [np.diag(np.eye(cq.num_inputs)[i]).astype(complex) for i in range(cq.num_inputs)]
        p_res = maximize_coherent_information(ch, cfg)
    s_res = max_accessible_equivocation(cq, cfg)
    h_res = min_output_entropy(povm, cfg)
    upper = lw_upper_bound(_uniform_ensemble(inputs), ch, cfg)
    return {
        "spec": spec.name,
        "builder": spec.builder,
        "d": spec.d,
        "uses": spec.k if spec.builder == "symmetric" else 1,
        "P_lower": p_res.value,
        "S_acc_max": s_res.value,
        "L_W_lower": h_res.value - key_bits,
        "L_W_upper_eval": upper,
        "converged": bool(p_res.converged and s_res.converged and h_res.converged),
    }


def cmd_bounds(args) -> int:
    tol, budget, cfg = _settings(args)
    rows = []
    for path in args.spec:
        spec = load_spec(path)
        if args.k is not None and spec.builder == "symmetric":
            spec = replace(spec, k=args.k)
        row = bounds_row(spec, cfg, tol, budget)
        rows.append(row)
        _say(args, " ".join(f"{c}={_fmt(row[c])}" for c in BOUNDS_FIELDS))
    _emit(args, BOUNDS_FIELDS, rows)
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_CONVERGENCE


# ---------------------------------------------------------------------------
# simulate


def _strategies(spec: ChannelSpecFile, names, k: int) -> list[EveStrategy]:
    out = []
    for name in names:
        if name == "seesaw":
            out.append(EveStrategy.seesaw())
        elif name == "aligned":
            out.append(EveStrategy.side_info("aligned"))
        elif spec.builder == "symmetric" and name == "mub":
            out.append(EveStrategy.product(block_mub_povm(spec.d, k), "mub"))
        elif spec.builder == "mub" and name in ("z", "x", "zx"):
            by_label = {s.label.lower(): s for s in mub_product_strategies(spec.d)}
            out.append(by_label[name])
        elif spec.builder == "custom-cq" and name == "pgm":
            out.append(EveStrategy.product(povm_from_ensemble(_uniform_ensemble(spec.cq.stacked())), "pgm"))
        else:
            raise ValidationError(f"strategy {name!r} is not available for builder {spec.builder}")
    return out


DEFAULT_STRATEGIES = {"mub": "z,x,zx,seesaw", "symmetric": "mub,seesaw,aligned", "custom-cq": "pgm,seesaw"}


def cmd_simulate(args) -> int:
    _, budget, _ = _settings(args)
    spec = load_spec(args.spec)
    if spec.builder == "symmetric":
        k = args.k or spec.k
        code = build_symmetric_code(spec.d, args.n, k, args.m, args.seed, budget)
    else:
        k = 1
        p = np.full(spec.cq.num_inputs, 1.0 / spec.cq.num_inputs) if args.p is None else np.array(args.p)
        code = build_theorem1_code(spec.cq, p, args.n, args.m, args.seed, budget)
    names = (args.strategies or DEFAULT_STRATEGIES[spec.builder]).lower().split(",")
    report = run_report(code, _strategies(spec, names, k), budget, exact=args.trials == 0, trials=args.trials)
    _say(args, report.text())
    _emit(args, SimulationReport.CSV_FIELDS, list(report.rows()))
    return EXIT_OK


# ---------------------------------------------------------------------------
# additivity-probe


def probe_rows(alphas, instances: int, cfg: OptimizerConfig, outcomes: int = 3) -> list[dict]:
    """Gaps of the order-alpha constrained minimum on random products and the MUB pair."""
    rng = np.random.default_rng([cfg.rng_seed, 11])
    cases = [("mub-d2", mub_pair_povm(2), np.eye(2) / 2, mub_pair_povm(2), np.eye(2) / 2),
             ("trivial-factor", mub_pair_povm(2), np.eye(2) / 2, Povm.trivial(2), np.eye(2) / 2)]
    for t in range(instances):
        cases.append((f"random-{t}", random_povm(2, outcomes, rng), random_density(2, rng),
                      random_povm(2, outcomes, rng), random_density(2, rng)))
    rows = []
    for alpha in alphas:
        for name, pa, sa, pb, sb in cases:
            res = additivity_probe(pa, sa, pb, sb, alpha, cfg)
            rows.append({"instance": name, "alpha": alpha, "sum": res.sum, "joint": res.joint, "gap": res.gap,
                         "converged": res.joint_result.converged})
    return rows


def cmd_additivity_probe(args) -> int:
    _, _, cfg = _settings(args)
    rows = probe_rows(args.alpha, args.instances, cfg)
    for a in args.alpha:
        gaps = [r["gap"] for r in rows if r["alpha"] == a]
        _say(args, f"alpha={_fmt(a)} instances={len(gaps)} max_gap={_fmt(max(gaps))} min_gap={_fmt(min(gaps))}")
    _emit(args, PROBE_FIELDS, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entropy


def _parse_table(text: str) -> np.ndarray:
    try:
        return np.array([[float(x) for x in row.split(",")] for row in text.split(";")])
    except ValueError as exc:
        raise ValidationError(f"bad joint table {text!r}; use rows 'a,b;c,d'") from exc


def cmd_entropy(args) -> int:
    items = []
    if args.p is not None:
        p = np.array(args.p)
        items += [("shannon", shannon_entropy(p)), ("min", min_entropy(p))]
        if args.alpha is not None:
            items.append((f"renyi(alpha={_fmt(args.alpha)})", renyi_entropy(p, args.alpha)))
        if args.eps is not None:
            items.append((f"smooth-min(eps={_fmt(args.eps)})", smooth_min_entropy(p, args.eps)))
    if args.joint is not None:
        t = _parse_table(args.joint)
        items += [("H(I|J)", conditional_entropy(t)), ("Hmin(I|J)", conditional_min_entropy(t))]
        if args.eps is not None:
            items.append((f"smooth Hmin(I|J)(eps={_fmt(args.eps)})",
                          smooth_conditional_min_entropy(t, args.eps, method="lp")))
    if not items:
        raise ValidationError("give --p and/or --joint")
    width = max(len(k) for k, _ in items) + 2
    print("\n".join(f"{k:<{width}}{_fmt(v)}" for k, v in items))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="rng seed for every randomized step")
    common.add_argument("--out", help="CSV output path (default stdout)")
    common.add_argument("--restarts", type=int, default=OptimizerConfig.restarts)
    common.add_argument("--budget", action="append", metavar="KEY=VALUE",
                        help="size cap override, e.g. max_atoms=1000000 (repeatable)")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="tolerance override, e.g. state=1e-9 (repeatable)")

    parser = argparse.ArgumentParser(prog="qlock", description="Weak-locking capacity toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel-info", parents=[common], help="validate a spec and print its structure")
    p.add_argument("--spec", required=True)
    p.add_argument("--samples", type=int, default=100, help="random inputs for the symmetric witness")
    p.set_defaults(func=cmd_channel_info)

    p = sub.add_parser("bounds", parents=[common], help="capacity bounds for one or more specs")
    p.add_argument("--spec", required=True, nargs="+")
    p.add_argument("--k", type=int, help="block size for symmetric specs")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", parents=[common], help="build and grade a locking code")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True, help="channel symbols (uses for symmetric specs)")
    p.add_argument("--m", type=int, required=True, help="message bits")
    p.add_argument("--k", type=int, help="block size for symmetric specs")
    p.add_argument("--p", type=_floats, help="source law over input symbols (default uniform)")
    p.add_argument("--strategies", help="comma-separated: z,x,zx (mub), mub (symmetric), pgm (custom-cq), "
                                        "seesaw, aligned")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials for the error (0 = exact)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("additivity-probe", parents=[common], help="order-alpha additivity gaps")
    p.add_argument("--alpha", type=float, nargs="+", default=[1.001, 2.0])
    p.add_argument("--instances", type=int, default=3)
    p.set_defaults(func=cmd_additivity_probe)

    p = sub.add_parser("entropy", parents=[common], help="entropies of a distribution or joint table")
    p.add_argument("--p", type=_floats)
    p.add_argument("--joint", help="joint table rows 'a,b;c,d' (rows are I, columns J)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"qlock: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValidationError, ZeroFiberError, ValueError) as exc:
        print(f"qlock: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

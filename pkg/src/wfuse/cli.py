"""Command-line front end.

Subcommands: fuse (enumerate one fusion's outcome tree), verify (dense
cross-check sweep), plan (cost tables), error (readout operating point),
campaign (Monte-Carlo seed consumption).  Exit codes: 0 on success, 1 when
verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .homodyne import discrimination_report
from .optics import ProbeConfig
from .oracle import (
    DenseState,
    MAX_QUBITS,
    brute_force_pipeline,
    embed_register_state,
    expand_symbolic,
    fidelity,
    make_w_state,
)
from .planner import (
    compare_schemes,
    cost_tables_csv,
    plot_data,
    qlf_scheme,
    run_campaign,
)
from .protocol import LeafKind, run_fusion

DEFAULT_ALPHA = 90000.0
DEFAULT_THETA = 0.01
SEED_ENV_VAR = "WFUSE_SEED"
FIDELITY_TOL = 1e-10


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _print_doc(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_fuse(args) -> int:
    if args.n < 2 or args.m < 2:
        _err("n and m must be >= 2")
        return 2
    tree = run_fusion(args.n, args.m)
    if args.format == "json":
        _print_doc(tree.to_json_obj())
    else:
        print("class,sizes,cumProb")
        for leaf in tree.to_json_obj()["leaves"]:
            sizes = "+".join(str(s) for s in leaf["sizes"])
            print(f"{leaf['class']},{sizes},{leaf['cumProb']:.12g}")
    return 0


def _verify_case(n: int, m: int, inject_fault: bool):
    tree = run_fusion(n, m)
    dense = brute_force_pipeline(n, m)
    q = n + m

    success_vec = expand_symbolic(tree.leaf(LeafKind.SUCCESS).state)
    if inject_fault:
        corrupted = success_vec.amplitudes.copy()
        hot = int(np.argmax(np.abs(corrupted)))
        corrupted[hot] = -corrupted[hot]
        success_vec = DenseState(q, corrupted)
    fid_success = min(
        fidelity(success_vec, make_w_state(q)).value,
        fidelity(success_vec, dense.success_state).value,
    )

    pair_vec = expand_symbolic(tree.leaf(LeafKind.RECYCLABLE_PAIR).state)
    fid_pair = fidelity(pair_vec, dense.pair_state).value

    merged_vec = expand_symbolic(tree.leaf(LeafKind.RECYCLABLE_MERGED).state)
    expected_merged = embed_register_state(
        dense.merged_kept_state.amplitudes, n, m, True, True
    )
    fid_merged = fidelity(merged_vec, expected_merged).value

    dprob = max(
        abs(tree.leaf(LeafKind.SUCCESS).probability - dense.success_probability),
        abs(tree.leaf(LeafKind.RECYCLABLE_PAIR).probability - dense.pair_probability),
        abs(
            tree.leaf(LeafKind.RECYCLABLE_MERGED).probability
            - dense.merged_probability
        ),
    )
    ok = (
        fid_success >= 1.0 - FIDELITY_TOL
        and fid_pair >= 1.0 - FIDELITY_TOL
        and fid_merged >= 1.0 - FIDELITY_TOL
        and dprob <= FIDELITY_TOL
    )
    return ok, fid_success, fid_pair, fid_merged, dprob


def cmd_verify(args) -> int:
    if not 4 <= args.max <= MAX_QUBITS:
        _err(f"--max must be in 4..{MAX_QUBITS} total photons")
        return 2
    cases = [
        (n, m)
        for n in range(2, args.max - 1)
        for m in range(2, args.max - 1)
        if n + m <= args.max
    ]
    failures = 0
    first = True
    for n, m in cases:
        inject = args.inject_fault and first
        first = False
        ok, fs, fp, fm, dp = _verify_case(n, m, inject)
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(
            f"n={n} m={m} success={fs:.12f} pair={fp:.12f} "
            f"merged={fm:.12f} dprob={dp:.3e} {status}"
        )
    if failures:
        print(f"verified {len(cases)} cases: {failures} FAILED")
        return 1
    print(f"verified {len(cases)} cases: all PASS")
    return 0


def cmd_plan(args) -> int:
    seeds = args.seed if args.seed else [2]
    if any(s < 2 for s in seeds):
        _err("seed sizes must be >= 2")
        return 2
    if args.seed_cost <= 0:
        _err("seed cost must be positive")
        return 2
    if args.max < 2:
        _err("--max must be >= 2")
        return 2
    schemes = [qlf_scheme()]
    tables = compare_schemes(schemes, [(s, args.seed_cost) for s in seeds], args.max)
    for table in tables:
        if not table.entries:
            print(
                f"note: no sizes reachable from seed {table.seed_size} "
                f"within max {args.max}",
                file=sys.stderr,
            )
    csv_text = cost_tables_csv(tables)
    sys.stdout.write(csv_text)
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        out.with_suffix(".dat").write_text(plot_data(tables))
    return 0


def cmd_error(args) -> int:
    try:
        probe = ProbeConfig(args.alpha, args.theta)
    except ValueError as exc:
        _err(str(exc))
        return 2
    report = discrimination_report(probe)
    _print_doc(report.to_json_obj())
    return 0


def cmd_campaign(args) -> int:
    if args.target < 2:
        _err("--target must be >= 2")
        return 2
    if args.seed_size < 2:
        _err("--seed-size must be >= 2")
        return 2
    if args.trials < 1:
        _err("--trials must be >= 1")
        return 2
    try:
        result = run_campaign(
            args.target, args.seed_size, args.trials, args.recycling, args.rng
        )
    except ValueError as exc:
        _err(str(exc))
        return 2
    _print_doc(result.to_json_obj())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfuse",
        description="simulate and plan loss-free fusion of polarization W states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fuse = sub.add_parser("fuse", help="enumerate one fusion's outcome tree")
    p_fuse.add_argument("-n", type=int, required=True, help="size of the first W state")
    p_fuse.add_argument("-m", type=int, required=True, help="size of the second W state")
    p_fuse.add_argument("--format", choices=["json", "csv"], default="json")
    p_fuse.set_defaults(func=cmd_fuse)

    p_verify = sub.add_parser("verify", help="dense cross-check sweep")
    p_verify.add_argument(
        "--max", type=int, default=8, help="largest total photon number to check"
    )
    p_verify.add_argument(
        "--inject-fault", action="store_true", help=argparse.SUPPRESS
    )
    p_verify.set_defaults(func=cmd_verify)

    p_plan = sub.add_parser("plan", help="optimal cost tables")
    p_plan.add_argument("--scheme", choices=["qlf"], default="qlf")
    p_plan.add_argument(
        "--seed", type=int, action="append", help="seed size (repeatable)"
    )
    p_plan.add_argument("--seed-cost", type=float, default=1.0)
    p_plan.add_argument("--max", type=int, default=50)
    p_plan.add_argument("--out", help="write CSV here and plot data alongside")
    p_plan.set_defaults(func=cmd_plan)

    p_error = sub.add_parser("error", help="readout operating point")
    p_error.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p_error.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p_error.set_defaults(func=cmd_error)

    p_campaign = sub.add_parser("campaign", help="Monte-Carlo seed consumption")
    p_campaign.add_argument("--target", type=int, required=True)
    p_campaign.add_argument("--seed-size", type=int, default=2)
    p_campaign.add_argument("--trials", type=int, default=10000)
    p_campaign.add_argument("--recycling", action="store_true")
    p_campaign.add_argument(
        "--rng",
        type=int,
        default=int(os.environ.get(SEED_ENV_VAR, "0")),
        help=f"rng seed (default from ${SEED_ENV_VAR} or 0)",
    )
    p_campaign.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    return args.func(args)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

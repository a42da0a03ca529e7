"""Command-line front end: single attacks and hyperparameter sweeps.

Exit codes: 0 = attack succeeded, 2 = attack ran but did not reach a
boundary sample within budget, 1 = usage or operational errors.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from pathlib import Path

from .attack import AttackConfig, run_with_restarts
from .baseline import BaselineConfig, run_boundary_attack
from .errors import HardLabelError
from .fileio import read_image, write_image, write_raw, write_report
from .oracles import ExternalOracle, load_centroid, load_linear, load_mlp


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for "attack failed"
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _float_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    if not values:
        raise ValueError("empty value list")
    return values


def _int_list(text: str) -> list[int]:
    values = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    if not values:
        raise ValueError("empty value list")
    return values


def _parse_mode(text: str) -> tuple[str, int | None]:
    if text == "untargeted":
        return "untargeted", None
    if text.startswith("targeted:"):
        try:
            return "targeted", int(text.split(":", 1)[1])
        except ValueError as e:
            raise ValueError(f"bad target class in mode {text!r}") from e
    raise ValueError(f"mode must be 'untargeted' or 'targeted:CLASS', got {text!r}")


def make_oracle(spec: str):
    """Instantiate an oracle from its SPEC string (linear:|centroid:|mlp:|exec:)."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise ValueError(f"oracle spec must look like kind:target, got {spec!r}")
    if kind == "linear":
        return load_linear(rest)
    if kind == "centroid":
        return load_centroid(rest)
    if kind == "mlp":
        return load_mlp(rest)
    if kind == "exec":
        return ExternalOracle(rest)
    raise ValueError(f"unknown oracle kind {kind!r} (use linear:|centroid:|mlp:|exec:)")


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("RED_ATTACK_SEED")
    if env is not None:
        return int(env)
    return 0


def _add_common_flags(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--source", required=True, help="clean image to attack (PGM/PPM/raw)")
    p.add_argument("--reference", required=True, action="append",
                   help="adversarial-side image; repeat for multiple restarts")
    p.add_argument("--oracle", required=True,
                   help="classifier spec: linear:PATH | centroid:PATH | mlp:PATH | exec:COMMAND")
    if sweep:
        p.add_argument("--delta-min", type=_float_list, default=[0.01],
                       help="comma-separated boundary tolerances (default 0.01)")
        p.add_argument("--n-pixels", type=_int_list, default=[20],
                       help="comma-separated probe pixel counts (default 20)")
        p.add_argument("--theta", type=_float_list, default=[0.0196],
                       help="comma-separated probe magnitudes (default 0.0196)")
    else:
        p.add_argument("--delta-min", type=float, default=0.01,
                       help="boundary tolerance (default 0.01)")
        p.add_argument("--n-pixels", type=int, default=20,
                       help="pixels perturbed per probe (default 20)")
        p.add_argument("--theta", type=float, default=0.0196,
                       help="probe magnitude as a fraction of the range (default 0.0196)")
    p.add_argument("--max-jump", type=float, default=1.0,
                   help="initial update step in probe-direction multiples (default 1.0)")
    p.add_argument("--max-queries", type=int, default=1000,
                   help="query budget per attack (default 1000)")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: $RED_ATTACK_SEED, then 0)")
    p.add_argument("--mode", default="untargeted",
                   help="untargeted | targeted:CLASS (default untargeted)")
    p.add_argument("--algorithm", choices=("red", "boundary"), default="red",
                   help="attack to run (default red)")
    p.add_argument("--range", type=float, default=1.0,
                   help="dynamic range L of the input images (default 1.0)")
    p.add_argument("--restarts", type=int, default=None,
                   help="attack attempts (references are cycled; default: one per reference)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hardlabel",
                     description="Query-limited label-only adversarial attacks")
    sub = parser.add_subparsers(dest="command", required=True)
    attack = sub.add_parser("attack", help="attack one image")
    _add_common_flags(attack, sweep=False)
    attack.add_argument("--out", required=True,
                        help="adversarial image output (.pgm/.ppm, or .redf for lossless)")
    attack.add_argument("--report", required=True,
                        help="JSON report path; trace CSV lands beside it")
    attack.set_defaults(func=cmd_attack)
    sweep = sub.add_parser("sweep", help="grid over delta-min/n-pixels/theta")
    _add_common_flags(sweep, sweep=True)
    sweep.add_argument("--out", required=True,
                       help="output directory for per-cell reports/traces and summary.csv")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def _load_inputs(args):
    source = read_image(args.source, args.range)
    references = [read_image(p, args.range) for p in args.reference]
    if args.restarts is not None:
        if args.restarts < 1:
            raise ValueError("--restarts must be >= 1")
        references = [references[i % len(references)] for i in range(args.restarts)]
    return source, references


def _run_one(source, references, oracle, args, mode, target, delta_min, n, theta):
    if args.algorithm == "boundary":
        if mode != "untargeted":
            raise ValueError("the boundary-walk baseline only runs untargeted")
        config = BaselineConfig(q_max=args.max_queries, seed=_resolve_seed(args.seed))
        return run_boundary_attack(source, references[0], oracle, config), config
    config = AttackConfig(
        delta_min=delta_min, n=n, theta=theta, j=args.max_jump,
        q_max=args.max_queries, seed=_resolve_seed(args.seed), mode=mode,
        target_class=target, restarts=len(references),
    )
    return run_with_restarts(source, references, oracle, config), config


def cmd_attack(args) -> int:
    mode, target = _parse_mode(args.mode)
    source, references = _load_inputs(args)
    oracle = make_oracle(args.oracle)
    try:
        result, config = _run_one(source, references, oracle, args, mode, target,
                                  args.delta_min, args.n_pixels, args.theta)
    finally:
        if hasattr(oracle, "close"):
            oracle.close()
    if str(args.out).endswith(".redf"):
        write_raw(args.out, result.best_adversarial)
    else:
        write_image(args.out, result.best_adversarial)
    write_report(args.report, result, config)
    return 0 if result.succeeded else 2


def cmd_sweep(args) -> int:
    mode, target = _parse_mode(args.mode)
    source, references = _load_inputs(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    oracle = make_oracle(args.oracle)
    rows = []
    all_succeeded = True
    try:
        for delta_min, n, theta in itertools.product(args.delta_min, args.n_pixels,
                                                     args.theta):
            result, config = _run_one(source, references, oracle, args, mode, target,
                                      delta_min, n, theta)
            write_report(out_dir / f"cell_d{delta_min}_n{n}_t{theta}.json", result, config)
            rows.append((delta_min, n, theta, result.metrics.pert_norm,
                         result.metrics.ssim, result.metrics.cc, result.queries_used))
            all_succeeded = all_succeeded and result.succeeded
    finally:
        if hasattr(oracle, "close"):
            oracle.close()
    with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("delta_min,n,theta,final_norm,ssim,cc,queries_used\n")
        for delta_min, n, theta, norm, sim, cc, used in rows:
            fh.write(f"{delta_min!r},{n},{theta!r},{norm!r},{sim!r},{cc!r},{used}\n")
    return 0 if all_succeeded else 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HardLabelError, OSError, ValueError) as e:
        print(f"hardlabel: error: {e}", file=sys.stderr)
        return 1

"""Command-line entry point: ``layered-entropy <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Every command builds its whole output in memory before writing, so a
failure never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .channels import region_sample
from .io import ParseError, dumps, fmt, read_joint, read_pmf
from .pmf import DEFAULT_ALPHAS, InvalidPmfError, entropy_report, layered_entropy, shannon_entropy
from .sfrl import DEFAULT_TAIL_TOL, bound_chain, curve_csv
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _eta(text: str) -> float | str:
    if text in ("loge", "sqrt", "opt"):
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"eta must be loge, sqrt, opt or a positive number, got {text!r}")
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("numeric eta must be positive and finite")
    return v


def _alphas(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            a = math.inf if part in ("inf", "infinity") else float(part)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad alpha {part!r}")
        if a < 0 or a != a:
            raise argparse.ArgumentTypeError(f"alpha must be >= 0, got {part!r}")
        out.append(a)
    return out


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}")
        return v

    return parse


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write here instead of stdout")
    common.add_argument("--seed", type=_seed, default=0, help="SplitMix64 seed, 0..2**64-1")
    common.add_argument("--trials", type=_count(1), default=200, help="random instances to draw")
    common.add_argument("--tol", type=_positive_float, default=1e-9, help="inequality tolerance")
    common.add_argument("--eta", type=_eta, default="loge", help="loge, sqrt, opt or a positive number")

    parser = argparse.ArgumentParser(prog="layered-entropy", description="Layered entropy toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="entropy report for a pmf file")
    p.add_argument("pmf", type=Path, help="JSON array or CSV prob[,label] file")
    p.add_argument("--alpha", type=_alphas, default=list(DEFAULT_ALPHAS), help="comma-separated Renyi orders, inf allowed")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--normalize", action="store_true", help="rescale inputs that do not sum to 1")

    p = sub.add_parser("simplex-grid", parents=[common], help="H and layered entropy over the 3-simplex")
    p.add_argument("--resolution", type=_count(2), default=30, help="grid steps per edge")

    p = sub.add_parser("region", parents=[common], help="sample (H(X|Y), H(X minus Y)) points")
    p.add_argument("pmf", type=Path)

    p = sub.add_parser("sfrl", parents=[common], help="bound chain for a joint, or the bound curves")
    p.add_argument("joint", type=Path, nargs="?", help="joint pmf matrix, rows x and columns y")
    p.add_argument("--curve", action="store_true", help="emit bound curves over an I grid")
    p.add_argument("--i-min", type=float, default=0.0)
    p.add_argument("--i-max", type=float, default=4.0)
    p.add_argument("--points", type=_count(2), default=81, help="grid points for --curve")
    p.add_argument("--tail-tol", type=_positive_float, default=DEFAULT_TAIL_TOL)

    p = sub.add_parser("verify", parents=[common], help="run a seeded property suite")
    p.add_argument("suite", help=f"one of {', '.join(SUITES + ('all',))}")
    p.add_argument("--tail-tol", type=_positive_float, default=DEFAULT_TAIL_TOL)
    return parser


def _entropy_csv(report: dict) -> str:
    lines = ["quantity,alpha,value"]
    for key in ("shannon", "layered", "min_entropy", "one_to_one_length", "h_upper_bound"):
        lines.append(f"{key},,{fmt(report[key])}")
    for row in report["renyi"]:
        a = "inf" if math.isinf(row["alpha"]) else fmt(row["alpha"])
        lines.append(f"renyi,{a},{fmt(row['renyi'])}")
        lines.append(f"renyi_layered,{a},{fmt(row['renyi_layered'])}")
    return "\n".join(lines) + "\n"


def cmd_entropy(args) -> tuple[str, int]:
    report = entropy_report(read_pmf(args.pmf, args.normalize), args.alpha, args.eta).as_dict()
    if args.format == "csv":
        return _entropy_csv(report), EXIT_OK
    for row in report["renyi"]:
        if math.isinf(row["alpha"]):
            row["alpha"] = "inf"
    return dumps(report), EXIT_OK


def simplex_grid_csv(resolution: int) -> str:
    """Rows (p1, p2, p3, H, Lambda) on the barycentric grid with step 1/resolution."""
    lines = ["p1,p2,p3,H,Lambda"]
    for i in range(resolution, -1, -1):
        for j in range(resolution - i, -1, -1):
            k = resolution - i - j
            p = np.array([i, j, k], dtype=float) / resolution
            lines.append(",".join(fmt(v) for v in (*p, shannon_entropy(p), layered_entropy(p))))
    return "\n".join(lines) + "\n"


def cmd_simplex_grid(args) -> tuple[str, int]:
    return simplex_grid_csv(args.resolution), EXIT_OK


def cmd_region(args) -> tuple[str, int]:
    return region_sample(read_pmf(args.pmf), args.trials, args.seed).to_csv(), EXIT_OK


def cmd_sfrl(args) -> tuple[str, int]:
    if args.curve:
        if args.joint is not None:
            raise UsageError("curve mode takes no joint file")
        if not 0 <= args.i_min < args.i_max:
            raise UsageError("need 0 <= --i-min < --i-max")
        return curve_csv(np.linspace(args.i_min, args.i_max, args.points)), EXIT_OK
    if args.joint is None:
        raise UsageError("give a joint file or --curve")
    chain = bound_chain(read_joint(args.joint), args.tail_tol)
    out = chain.as_dict()
    out["h_bound"] = chain.h_bound(args.eta)
    out["tail_tol"] = args.tail_tol
    return dumps(out), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    rep = run_suite(args.suite, args.trials, args.seed, args.tol, args.tail_tol)
    return dumps(rep.as_dict()), EXIT_OK if rep.ok else EXIT_FAIL


COMMANDS = {
    "entropy": cmd_entropy,
    "simplex-grid": cmd_simplex_grid,
    "region": cmd_region,
    "sfrl": cmd_sfrl,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (ParseError, InvalidPmfError, UsageError, OSError) as exc:
        print(f"layered-entropy {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

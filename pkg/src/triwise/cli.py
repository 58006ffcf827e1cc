"""Command-line interface: gen / test / factorize / bench / selfcheck.

Single-test results are emitted as one JSON object on stdout; bench sweeps
write CSV.  Exit code 0 means the requested computation completed
(regardless of the test decision); nonzero means a usage or computation
error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bench import BENCH_TESTS, BenchConfig, run_bench, write_rows
from .inference import (
    FACTORIZATION_HYPOTHESES,
    factorization_test,
    permutation_test,
)
from .io_csv import parse_columns, read_sample, write_sample
from .kernels import KernelSpec, resolved_bandwidth
from .selfcheck import run_selfcheck
from .stats import HypothesisKind
from .synthetic import Sample, gen_counterexample, gen_dataset_a, gen_dataset_b, gen_null

_HYPOTHESIS_FLAGS = ("xy_z", "xz_y", "yz_x", "dx", "dy", "dz")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text!r}")
    return value


def _dims(text: str) -> tuple[int, ...]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("dims must be LO:HI or LO:HI:STEP")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from None
    if lo < 1 or hi < lo or step < 1:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}")
    return tuple(range(lo, hi + 1, step))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triwise",
        description="Kernel tests for three-variable interaction and total independence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    gen.add_argument("--dataset", required=True, choices=("a", "b", "counterexample", "null"))
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--p", type=_positive_int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    test = sub.add_parser("test", help="run one permutation test, JSON on stdout")
    test.add_argument("--input", required=True)
    test.add_argument("--vars", required=True, help="column spec, e.g. x:1-3,y:4-6,z:7-9")
    test.add_argument(
        "--test", required=True, dest="statistic",
        choices=("lancaster", "total3", "totald", "hsic", "hyp"),
    )
    test.add_argument("--hypothesis", choices=_HYPOTHESIS_FLAGS)
    test.add_argument("--kernel", default="gaussian", choices=("gaussian", "linear"))
    test.add_argument("--bandwidth", default="median")
    test.add_argument("--permutations", type=_positive_int, default=500)
    test.add_argument("--alpha", type=_alpha, default=0.05)
    test.add_argument("--seed", type=int, default=0)

    fact = sub.add_parser("factorize", help="composite factorization test, JSON on stdout")
    fact.add_argument("--input", required=True)
    fact.add_argument("--vars", required=True)
    fact.add_argument("--method", default="lancaster", choices=("lancaster", "pairwise"))
    fact.add_argument("--permutations", type=_positive_int, default=500)
    fact.add_argument("--alpha", type=_alpha, default=0.05)
    fact.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="power sweep over a dimension grid, CSV output")
    bench.add_argument("--dataset", required=True, choices=("a", "b", "null"))
    bench.add_argument("--dims", type=_dims, required=True, help="LO:HI[:STEP]")
    bench.add_argument("--n", type=_positive_int, default=500)
    bench.add_argument("--trials", type=_positive_int, default=100)
    bench.add_argument("--permutations", type=_positive_int, default=300)
    bench.add_argument("--alpha", type=_alpha, default=0.05)
    bench.add_argument("--tests", required=True, help=f"comma list from: {','.join(BENCH_TESTS)}")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True)

    sub.add_parser("selfcheck", help="run the built-in verification suites")
    return parser


def _kernel_spec(args) -> KernelSpec:
    if args.kernel == "linear":
        return KernelSpec("linear")
    if args.bandwidth == "median":
        return KernelSpec("gaussian", "median")
    try:
        width = float(args.bandwidth)
    except ValueError:
        raise SystemExit(f"error: --bandwidth must be 'median' or a number, got {args.bandwidth!r}")
    return KernelSpec("gaussian", width)


def _resolve_test(args, sample: Sample) -> tuple[HypothesisKind, str, str]:
    """Map CLI flags to (hypothesis, statistic name, test label)."""
    statistic = args.statistic
    hyp = args.hypothesis
    n_vars = len(sample.names)
    by_flag = {
        "xy_z": HypothesisKind.JOINT_PAIR_XY_Z,
        "xz_y": HypothesisKind.JOINT_PAIR_XZ_Y,
        "yz_x": HypothesisKind.JOINT_PAIR_YZ_X,
        "dx": HypothesisKind.INCOMPLETE_X,
        "dy": HypothesisKind.INCOMPLETE_Y,
        "dz": HypothesisKind.INCOMPLETE_Z,
    }
    if statistic == "lancaster":
        h = by_flag[hyp] if hyp else HypothesisKind.TOTAL_INDEP3
    elif statistic == "total3":
        if hyp:
            raise SystemExit("error: --test total3 tests total independence; drop --hypothesis")
        h = HypothesisKind.TOTAL_INDEP3
    elif statistic == "totald":
        if hyp:
            raise SystemExit("error: --test totald tests total independence; drop --hypothesis")
        h = HypothesisKind.TOTAL_INDEP_D
    elif statistic == "hsic":
        if n_vars == 2:
            if hyp:
                raise SystemExit("error: two-variable hsic takes no --hypothesis")
            h = HypothesisKind.PAIRWISE_XY
        else:
            if hyp not in ("xy_z", "xz_y", "yz_x"):
                raise SystemExit(
                    "error: three-variable hsic needs --hypothesis xy_z|xz_y|yz_x "
                    "(declare two variables for a pairwise test)"
                )
            h = by_flag[hyp]
    else:  # hyp
        if not hyp:
            raise SystemExit("error: --test hyp requires --hypothesis")
        h = by_flag[hyp]
    label = f"{statistic}[{h.value}]" if h.value != statistic else statistic
    return h, statistic, label


def _clamped(value: float, null_samples: np.ndarray) -> float:
    # Reporting-layer clamp: squared norms may come out as tiny negatives.
    scale = max(1.0, float(np.abs(null_samples).max()) if null_samples.size else 1.0)
    if -1e-9 * scale <= value < 0.0:
        return 0.0
    return value


def _cmd_gen(args) -> int:
    if args.dataset == "a":
        sample = gen_dataset_a(args.n, args.p, args.seed)
    elif args.dataset == "b":
        sample = gen_dataset_b(args.n, args.p, args.seed)
    elif args.dataset == "counterexample":
        if args.p != 1:
            raise SystemExit("error: counterexample dataset is univariate (p must be 1)")
        sample = gen_counterexample(args.n, args.seed)
    else:
        sample = gen_null(args.n, args.p, args.seed)
    write_sample(sample, args.out)
    return 0


def _bandwidths(sample: Sample, spec: KernelSpec) -> dict[str, float | None]:
    return {name: resolved_bandwidth(spec, sample.block(name)) for name in sample.names}


def _cmd_test(args) -> int:
    sample = read_sample(args.input, parse_columns(args.vars))
    spec = _kernel_spec(args)
    h, statistic, label = _resolve_test(args, sample)
    start = time.perf_counter()
    result = permutation_test(
        sample, h, spec,
        B=args.permutations, alpha=args.alpha, seed=args.seed,
        statistic=statistic, keep_null=True,
    )
    runtime_ms = (time.perf_counter() - start) * 1000.0
    payload = {
        "test": label,
        "statistic": _clamped(result.statistic, result.null_samples),
        "p_value": result.p_value,
        "permutations": result.permutations,
        "alpha": result.alpha,
        "reject": result.reject,
        "seed": result.seed,
        "bandwidths": _bandwidths(sample, spec),
        "n": sample.n,
        "runtime_ms": runtime_ms,
    }
    print(json.dumps(payload))
    return 0


def _cmd_factorize(args) -> int:
    sample = read_sample(args.input, parse_columns(args.vars))
    start = time.perf_counter()
    composite = factorization_test(
        sample, method=args.method,
        B=args.permutations, alpha=args.alpha, seed=args.seed,
    )
    runtime_ms = (time.perf_counter() - start) * 1000.0
    payload = {
        "method": args.method,
        "hypotheses": [
            {
                "hypothesis": h.value,
                "statistic": t.statistic,
                "p_value": t.p_value,
                "rejected": rejected,
            }
            for h, t, rejected in zip(FACTORIZATION_HYPOTHESES, composite.tests, composite.rejected)
        ],
        "sorted_p_values": list(composite.sorted_p_values),
        "factorization_rejected": composite.factorization_rejected,
        "permutations": args.permutations,
        "alpha": args.alpha,
        "seed": args.seed,
        "n": sample.n,
        "runtime_ms": runtime_ms,
    }
    print(json.dumps(payload))
    return 0


def _cmd_bench(args) -> int:
    config = BenchConfig(
        dataset=args.dataset,
        dims=args.dims,
        n=args.n,
        trials=args.trials,
        permutations=args.permutations,
        alpha=args.alpha,
        tests=tuple(t.strip() for t in args.tests.split(",") if t.strip()),
        seed=args.seed,
    )
    rows = run_bench(config)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_rows(rows, fh)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "test":
            return _cmd_test(args)
        if args.command == "factorize":
            return _cmd_factorize(args)
        if args.command == "bench":
            return _cmd_bench(args)
        report = run_selfcheck()
        return 0 if report.failed == 0 else 1
    except SystemExit:
        raise
    except (ValueError, FileNotFoundError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

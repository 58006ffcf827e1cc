"""Power-curve harness: repeated tests over dimension grids, CSV output.

Each (dimension, test) cell draws ``trials`` fresh samples, runs one
permutation test per sample, and reports the rejection count, the
acceptance rate, and a Wilson 95% interval for it.  Trial seeds derive
from the master seed, the dimension, the test id, and the trial index, so
a sweep is reproducible row by row.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .inference import factorization_test, permutation_test
from .kernels import KernelSpec
from .stats import HypothesisKind
from .synthetic import Sample, gen_counterexample, gen_dataset_a, gen_dataset_b, gen_null

DATASETS = ("a", "b", "counterexample", "null")

_BENCH_DOMAIN = 37

# Atomic bench tests: id -> (hypothesis, statistic).
_ATOMIC_TESTS: dict[str, tuple[HypothesisKind, str]] = {
    "lancaster-xy_z": (HypothesisKind.JOINT_PAIR_XY_Z, "lancaster"),
    "lancaster-xz_y": (HypothesisKind.JOINT_PAIR_XZ_Y, "lancaster"),
    "lancaster-yz_x": (HypothesisKind.JOINT_PAIR_YZ_X, "lancaster"),
    "lancaster-total": (HypothesisKind.TOTAL_INDEP3, "lancaster"),
    "total3": (HypothesisKind.TOTAL_INDEP3, "total3"),
    "hsic-xy": (HypothesisKind.PAIRWISE_XY, "hsic"),
    "hsic-xz": (HypothesisKind.PAIRWISE_XZ, "hsic"),
    "hsic-yz": (HypothesisKind.PAIRWISE_YZ, "hsic"),
    "hsic-xy_z": (HypothesisKind.JOINT_PAIR_XY_Z, "hsic"),
    "hsic-xz_y": (HypothesisKind.JOINT_PAIR_XZ_Y, "hsic"),
    "hsic-yz_x": (HypothesisKind.JOINT_PAIR_YZ_X, "hsic"),
    "hyp-dx": (HypothesisKind.INCOMPLETE_X, "hyp"),
    "hyp-dy": (HypothesisKind.INCOMPLETE_Y, "hyp"),
    "hyp-dz": (HypothesisKind.INCOMPLETE_Z, "hyp"),
}

_COMPOSITE_TESTS = ("factorize-lancaster", "factorize-pairwise")

BENCH_TESTS: tuple[str, ...] = tuple(_ATOMIC_TESTS) + _COMPOSITE_TESTS


@dataclass(frozen=True)
class BenchConfig:
    dataset: str
    dims: tuple[int, ...]
    n: int
    trials: int
    permutations: int
    alpha: float
    tests: tuple[str, ...]
    seed: int

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ValueError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if not self.dims or any(p < 1 for p in self.dims):
            raise ValueError("dimension grid must be nonempty and positive")
        if self.n < 2 or self.trials < 1 or self.permutations < 1:
            raise ValueError("n, trials, and permutations must be positive (n >= 2)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        unknown = [t for t in self.tests if t not in BENCH_TESTS]
        if unknown:
            raise ValueError(f"unknown bench tests {unknown}; known: {sorted(BENCH_TESTS)}")
        if not self.tests:
            raise ValueError("need at least one test")


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    p: int
    test: str
    n: int
    permutations: int
    alpha: float
    trials: int
    rejections: int
    acceptance_rate: float
    wilson_low: float
    wilson_high: float
    wall_time_seconds: float
    seed: int


CSV_HEADER = (
    "dataset,p,test,n,permutations,alpha,trials,rejections,"
    "acceptance_rate,wilson_low,wilson_high,wall_time_seconds,seed"
)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = phat + z * z / (2 * trials)
    half = z * np.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials))
    return float((centre - half) / denom), float((centre + half) / denom)


def _make_sample(dataset: str, n: int, p: int, seed: int) -> Sample:
    if dataset == "a":
        return gen_dataset_a(n, p, seed)
    if dataset == "b":
        return gen_dataset_b(n, p, seed)
    if dataset == "counterexample":
        if p != 1:
            raise ValueError("counterexample dataset is univariate (p must be 1)")
        return gen_counterexample(n, seed)
    return gen_null(n, p, seed)


def _trial_seeds(master: int, p: int, test_index: int, trial: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(
        entropy=int(master), spawn_key=(_BENCH_DOMAIN, int(p), int(test_index), int(trial))
    )
    data_seed, test_seed = ss.generate_state(2, np.uint64)
    return int(data_seed), int(test_seed)


def _run_one(test_id: str, sample: Sample, B: int, alpha: float, seed: int) -> bool:
    """True when the test rejects its null."""
    if test_id in _ATOMIC_TESTS:
        h, statistic = _ATOMIC_TESTS[test_id]
        result = permutation_test(
            sample, h, KernelSpec(), B=B, alpha=alpha, seed=seed, statistic=statistic
        )
        return result.reject
    method = test_id.split("-", 1)[1]
    composite = factorization_test(sample, method=method, B=B, alpha=alpha, seed=seed)
    return composite.factorization_rejected


def run_bench(config: BenchConfig) -> list[BenchRow]:
    """Run every (dimension, test) cell of the sweep; row order follows config."""
    rows: list[BenchRow] = []
    for p in config.dims:
        for test_index, test_id in enumerate(config.tests):
            start = time.perf_counter()
            rejections = 0
            for trial in range(config.trials):
                data_seed, test_seed = _trial_seeds(config.seed, p, test_index, trial)
                sample = _make_sample(config.dataset, config.n, p, data_seed)
                if _run_one(test_id, sample, config.permutations, config.alpha, test_seed):
                    rejections += 1
            elapsed = time.perf_counter() - start
            acceptances = config.trials - rejections
            lo, hi = wilson_interval(acceptances, config.trials)
            rows.append(
                BenchRow(
                    dataset=config.dataset,
                    p=p,
                    test=test_id,
                    n=config.n,
                    permutations=config.permutations,
                    alpha=config.alpha,
                    trials=config.trials,
                    rejections=rejections,
                    acceptance_rate=acceptances / config.trials,
                    wilson_low=lo,
                    wilson_high=hi,
                    wall_time_seconds=elapsed,
                    seed=config.seed,
                )
            )
    return rows


def write_rows(rows: Sequence[BenchRow], fh: TextIO) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in rows:
        fh.write(
            f"{r.dataset},{r.p},{r.test},{r.n},{r.permutations},"
            f"{format(r.alpha, '.17g')},{r.trials},{r.rejections},"
            f"{format(r.acceptance_rate, '.17g')},{format(r.wilson_low, '.17g')},"
            f"{format(r.wilson_high, '.17g')},{format(r.wall_time_seconds, '.17g')},"
            f"{r.seed}\n"
        )

"""End-to-end self-verification of the estimator algebra.

Runs three suites against independent oracles on fixed-seed random
instances: the matrix-identity suite (centering and Hadamard-sum
identities), the inner-product table against brute-force nested index
sums, and the exact discrete counterexample (zero interaction norm with
no bivariate factorization).  Prints one status line per check.

``center_fn`` exists as a fault-injection hook: substituting a corrupted
centering implementation must make the identity suite fail.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from itertools import product
from typing import Callable, TextIO

import numpy as np

from .gram import GramMatrix, center_values, sum_all, sum_hadamard2
from .stats import Measure, inner_products_3var
from .synthetic import DiscreteJoint, counterexample_table, population_norm_discrete


@dataclass
class CheckReport:
    passed: int = 0
    failed: int = 0
    lines: list[str] = None

    def __post_init__(self):
        if self.lines is None:
            self.lines = []

    @property
    def total(self) -> int:
        return self.passed + self.failed

    def record(self, name: str, ok: bool) -> None:
        self.lines.append(f"{'ok  ' if ok else 'FAIL'} {name}")
        if ok:
            self.passed += 1
        else:
            self.failed += 1


def _close(a: float, b: float, rtol: float = 1e-10) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def _sym(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def _identity_checks(report: CheckReport, center_fn: Callable[[np.ndarray], np.ndarray]) -> None:
    rng = np.random.default_rng(1879)
    n = 9
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    k = _sym(rng, n)
    l = _sym(rng, n)
    ones = np.ones((n, n))
    kp = np.tile(k.sum(axis=0), (n, 1))  # [K_+]_ij = K_{+j}

    report.record("sum of all-ones matrix equals n^2", _close(sum_all(ones), n * n))
    report.record(
        "(A 11^T B)_++ = A_++ B_++",
        _close(sum_all(a @ ones @ b), sum_all(a) * sum_all(b)),
    )
    report.record(
        "entry sums are linear",
        _close(sum_all(2.5 * a - 0.5 * b), 2.5 * sum_all(a) - 0.5 * sum_all(b)),
    )
    report.record("Hadamard unit: A o 11^T = A", bool(np.array_equal(a * ones, a)))
    report.record("(I o A)_++ = tr(A)", _close(sum_hadamard2(np.eye(n), a), float(np.trace(a))))
    report.record(
        "(A o B)_++ = tr(A B^T)", _close(sum_hadamard2(a, b), float(np.trace(a @ b.T)))
    )
    report.record(
        "(A o K_+)_++ = (AK)_++ for symmetric K", _close(sum_hadamard2(a, kp), sum_all(a @ k))
    )
    report.record(
        "(A o K_+^T)_++ = (KA)_++ for symmetric K",
        _close(sum_hadamard2(a, kp.T), sum_all(k @ a)),
    )
    lp = np.tile(l.sum(axis=0), (n, 1))
    report.record(
        "(K_+ o L_+)_++ = n (KL)_++", _close(sum_hadamard2(kp, lp), n * sum_all(k @ l))
    )
    report.record(
        "(K_+ o L_+^T)_++ = K_++ L_++", _close(sum_hadamard2(kp, lp.T), sum_all(k) * sum_all(l))
    )

    h = np.eye(n) - ones / n
    kc = center_fn(k)
    report.record(
        "centering matches the explicit H K H product",
        bool(np.allclose(kc, h @ k @ h, rtol=0.0, atol=1e-10 * max(1.0, np.abs(k).max()))),
    )
    report.record("centered matrix sums to zero", abs(sum_all(kc)) <= 1e-9 * n * n * np.abs(k).max())
    report.record(
        "centering is idempotent",
        bool(np.allclose(center_fn(kc), kc, rtol=0.0, atol=1e-10 * max(1.0, np.abs(kc).max()))),
    )
    report.record(
        "(K o HLH)_++ = (K o L)_++ - (2/n)(KL)_++ + (1/n^2) K_++ L_++",
        _close(
            sum_hadamard2(k, center_fn(l)),
            sum_hadamard2(k, l) - 2.0 / n * sum_all(k @ l) + sum_all(k) * sum_all(l) / n**2,
        ),
    )
    report.record(
        "tr(HLH) = tr(L) - L_++ / n",
        _close(float(np.trace(center_fn(l))), float(np.trace(l)) - sum_all(l) / n),
    )


_BRUTE_FORCE_LOOPS = {
    (Measure.JOINT, Measure.JOINT): (2, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[1]] * M[i[0], i[1]]),
    (Measure.JOINT, Measure.XY_Z): (3, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[1]] * M[i[0], i[2]]),
    (Measure.JOINT, Measure.XZ_Y): (3, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[2]] * M[i[0], i[1]]),
    (Measure.JOINT, Measure.YZ_X): (3, lambda K, L, M, i: K[i[0], i[2]] * L[i[0], i[1]] * M[i[0], i[1]]),
    (Measure.JOINT, Measure.PRODUCT): (4, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[2]] * M[i[0], i[3]]),
    (Measure.XY_Z, Measure.XY_Z): (4, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[1]] * M[i[2], i[3]]),
    (Measure.XY_Z, Measure.XZ_Y): (4, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[2]] * M[i[3], i[1]]),
    (Measure.XY_Z, Measure.YZ_X): (4, lambda K, L, M, i: K[i[0], i[2]] * L[i[0], i[1]] * M[i[3], i[1]]),
    (Measure.XY_Z, Measure.PRODUCT): (5, lambda K, L, M, i: K[i[0], i[1]] * L[i[0], i[2]] * M[i[3], i[4]]),
    (Measure.XZ_Y, Measure.XZ_Y): (4, lambda K, L, M, i: K[i[0], i[1]] * L[i[2], i[3]] * M[i[0], i[1]]),
    (Measure.XZ_Y, Measure.YZ_X): (4, lambda K, L, M, i: K[i[0], i[2]] * L[i[3], i[1]] * M[i[0], i[1]]),
    (Measure.XZ_Y, Measure.PRODUCT): (5, lambda K, L, M, i: K[i[0], i[1]] * L[i[2], i[3]] * M[i[0], i[4]]),
    (Measure.YZ_X, Measure.YZ_X): (4, lambda K, L, M, i: K[i[2], i[3]] * L[i[0], i[1]] * M[i[0], i[1]]),
    (Measure.YZ_X, Measure.PRODUCT): (5, lambda K, L, M, i: K[i[2], i[3]] * L[i[0], i[1]] * M[i[0], i[4]]),
    (Measure.PRODUCT, Measure.PRODUCT): (6, lambda K, L, M, i: K[i[0], i[1]] * L[i[2], i[3]] * M[i[4], i[5]]),
}


def brute_force_inner_product(
    pair: tuple[Measure, Measure], K: np.ndarray, L: np.ndarray, M: np.ndarray
) -> float:
    """Literal nested index sum for one measure pair (oracle path)."""
    n = K.shape[0]
    loops, term = _BRUTE_FORCE_LOOPS[pair]
    total = 0.0
    for idx in product(range(n), repeat=loops):
        total += term(K, L, M, idx)
    return total / float(n) ** loops


def _table_checks(report: CheckReport) -> None:
    rng = np.random.default_rng(5417)
    n = 5
    pts = [rng.standard_normal((n, 2)) for _ in range(3)]
    mats = []
    for p in pts:
        sq = ((p[:, None, :] - p[None, :, :]) ** 2).sum(axis=2)
        mats.append(np.exp(-sq / 2.0))
    K, L, M = mats
    table = inner_products_3var(GramMatrix(K), GramMatrix(L), GramMatrix(M))
    for pair in _BRUTE_FORCE_LOOPS:
        expected = brute_force_inner_product(pair, K, L, M)
        got = table.ip(*pair)
        report.record(
            f"inner product <{pair[0].value}, {pair[1].value}> matches nested sums",
            _close(got, expected, rtol=1e-9),
        )


def _counterexample_checks(report: CheckReport) -> None:
    joint = counterexample_table()
    lanc = population_norm_discrete(joint, measure="lancaster")
    report.record("counterexample interaction norm vanishes", abs(lanc) <= 1e-12)
    for split in ("xy_z", "xz_y", "yz_x"):
        norm = np.sqrt(max(population_norm_discrete(joint, measure=split), 0.0))
        report.record(f"counterexample has no {split} factorization", norm > 1e-3)
    px = joint.probs.sum(axis=(1, 2))
    py = joint.probs.sum(axis=(0, 2))
    pz = joint.probs.sum(axis=(0, 1))
    prod = px[:, None, None] * py[None, :, None] * pz[None, None, :]
    factorized = DiscreteJoint(joint.x_atoms, joint.y_atoms, joint.z_atoms, prod)
    report.record(
        "product distribution has zero interaction and total norms",
        abs(population_norm_discrete(factorized, measure="lancaster")) <= 1e-12
        and abs(population_norm_discrete(factorized, measure="total3")) <= 1e-12,
    )


def run_selfcheck(
    center_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    out: TextIO = sys.stdout,
) -> CheckReport:
    """Run all suites; returns the report (``failed == 0`` means a clean pass)."""
    report = CheckReport()
    _identity_checks(report, center_fn or center_values)
    _table_checks(report)
    _counterexample_checks(report)
    for line in report.lines:
        out.write(line + "\n")
    out.write(f"{report.total} checks, {report.passed} passed, {report.failed} failed\n")
    return report

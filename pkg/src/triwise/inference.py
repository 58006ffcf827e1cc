"""Permutation-based inference: p-values, Holm correction, composite tests.

A permutation test draws B independent permutation replicates of the
statistic and reports the add-one p-value

    p = (1 + #{replicates >= observed}) / (B + 1),

with ties counted as exceedances, so p is valid and never zero.  Which
variables get permuted is dictated by the null:

  * total independence: the first variable stays fixed and the other
    variables are permuted by independent permutations;
  * a single factorization hypothesis such as (Y,Z) indep X: only the
    singled-out variable (X) is permuted;
  * a pairwise hypothesis: the second variable of the pair is permuted;
  * an incomplete-interaction null (``dx``/``dy``/``dz``): the next
    variable cyclically after the uncentered one is permuted, which makes
    the corresponding interaction measure vanish under the permuted law.

Gram matrices are computed once on the original sample (the median
heuristic is unaffected by permutation, since the interpoint distance
multiset is) and replicates act on them by row/column index gather;
kernels are never re-evaluated.  Each replicate derives its own RNG from
the master seed and the replicate index, so results are independent of
evaluation order and parallelism degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .gram import GramMatrix, center
from .kernels import KernelSpec, gram
from .stats import HypothesisKind
from .synthetic import Sample

# spawn_key domains separating the replicate streams from other derived seeds
_PERM_DOMAIN = 11
_FACTOR_DOMAIN = 23

STATISTICS = ("hsic", "hyp", "lancaster", "total3", "totald")

_COMPATIBLE: dict[HypothesisKind, tuple[str, ...]] = {
    HypothesisKind.PAIRWISE_XY: ("hsic",),
    HypothesisKind.PAIRWISE_XZ: ("hsic",),
    HypothesisKind.PAIRWISE_YZ: ("hsic",),
    HypothesisKind.JOINT_PAIR_XY_Z: ("hsic", "hyp", "lancaster"),
    HypothesisKind.JOINT_PAIR_XZ_Y: ("hsic", "hyp", "lancaster"),
    HypothesisKind.JOINT_PAIR_YZ_X: ("hsic", "hyp", "lancaster"),
    HypothesisKind.INCOMPLETE_X: ("hyp",),
    HypothesisKind.INCOMPLETE_Y: ("hyp",),
    HypothesisKind.INCOMPLETE_Z: ("hyp",),
    HypothesisKind.LANCASTER: ("lancaster",),
    HypothesisKind.TOTAL_INDEP3: ("total3", "lancaster", "totald"),
    HypothesisKind.TOTAL_INDEP_D: ("totald",),
}

_DEFAULT_STATISTIC: dict[HypothesisKind, str] = {
    HypothesisKind.PAIRWISE_XY: "hsic",
    HypothesisKind.PAIRWISE_XZ: "hsic",
    HypothesisKind.PAIRWISE_YZ: "hsic",
    HypothesisKind.JOINT_PAIR_XY_Z: "hsic",
    HypothesisKind.JOINT_PAIR_XZ_Y: "hsic",
    HypothesisKind.JOINT_PAIR_YZ_X: "hsic",
    HypothesisKind.INCOMPLETE_X: "hyp",
    HypothesisKind.INCOMPLETE_Y: "hyp",
    HypothesisKind.INCOMPLETE_Z: "hyp",
    HypothesisKind.LANCASTER: "lancaster",
    HypothesisKind.TOTAL_INDEP3: "total3",
    HypothesisKind.TOTAL_INDEP_D: "totald",
}


@dataclass(frozen=True)
class PermutationScheme:
    """Variables permuted under the null, each by its own permutation."""

    permuted: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class TestResult:
    """Outcome of one permutation test; the reproducibility record."""

    hypothesis: HypothesisKind
    statistic_name: str
    statistic: float
    p_value: float
    permutations: int
    alpha: float
    reject: bool
    seed: int
    null_samples: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class CompositeResult:
    """Three sub-hypothesis results with Holm-corrected decisions.

    The factorization null is rejected if and only if all three
    sub-hypotheses are rejected.
    """

    tests: tuple[TestResult, TestResult, TestResult]
    sorted_p_values: tuple[float, float, float]
    rejected: tuple[bool, bool, bool]
    factorization_rejected: bool


def derive_scheme(h: HypothesisKind, names: Sequence[str]) -> PermutationScheme:
    """Permutation scheme implied by a hypothesis for variables ``names``."""
    names = tuple(names)
    K = HypothesisKind
    if h is K.TOTAL_INDEP_D:
        if len(names) < 2:
            raise ValueError("D-variable total independence needs at least two variables")
        return PermutationScheme(names[1:])
    if h in (K.PAIRWISE_XY,):
        return PermutationScheme((names[1],))
    if h in (K.PAIRWISE_XZ, K.PAIRWISE_YZ):
        return PermutationScheme((names[2],))
    if h is K.JOINT_PAIR_XY_Z:
        return PermutationScheme((names[2],))
    if h is K.JOINT_PAIR_XZ_Y:
        return PermutationScheme((names[1],))
    if h is K.JOINT_PAIR_YZ_X:
        return PermutationScheme((names[0],))
    if h is K.INCOMPLETE_X:
        return PermutationScheme((names[1],))
    if h is K.INCOMPLETE_Y:
        return PermutationScheme((names[2],))
    if h is K.INCOMPLETE_Z:
        return PermutationScheme((names[0],))
    if h in (K.LANCASTER, K.TOTAL_INDEP3):
        return PermutationScheme((names[1], names[2]))
    raise ValueError(f"no permutation scheme for composite hypothesis {h.value!r}")


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_PERM_DOMAIN, int(index)))
    return np.random.Generator(np.random.Philox(ss))


def derived_seed(seed: int, index: int) -> int:
    """A 64-bit child seed for sub-test ``index`` of a composite run."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_FACTOR_DOMAIN, int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _gather(values: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return values[np.ix_(idx, idx)]


class _HadamardStatistic:
    """sum of an entrywise product of factor matrices, divided by n^2.

    Factors whose variable is never permuted are pre-multiplied into one
    fixed matrix; each replicate then gathers and multiplies only the
    moving factors.
    """

    def __init__(self, factors: Sequence[tuple[str, np.ndarray]], permuted: Sequence[str]):
        permuted = set(permuted)
        fixed = None
        moving: list[tuple[str, np.ndarray]] = []
        for var, vals in factors:
            if var in permuted:
                moving.append((var, vals))
            elif fixed is None:
                fixed = np.array(vals, copy=True)
            else:
                fixed = fixed * vals
        self._fixed = fixed
        self._moving = moving
        n = factors[0][1].shape[0]
        self._inv_n2 = 1.0 / float(n) ** 2

    def value(self, perms: Mapping[str, np.ndarray] | None) -> float:
        acc = self._fixed
        for var, vals in self._moving:
            g = vals if perms is None else _gather(vals, perms[var])
            acc = np.array(g, copy=True) if acc is None else acc * g
        return float(acc.sum()) * self._inv_n2


class _TotalIndependenceStatistic:
    """Three-term total-independence statistic under index permutation.

    Only the first term needs full matrix gathers; row sums permute as
    vectors and the total sums are permutation invariant.
    """

    def __init__(self, items: Sequence[tuple[str, np.ndarray]], permuted: Sequence[str]):
        self._permuted = set(permuted)
        self._items = [(var, vals, vals.sum(axis=1)) for var, vals in items]
        n = self._items[0][1].shape[0]
        d = len(self._items)
        self._inv_n2 = 1.0 / float(n) ** 2
        self._two_inv_nd1 = 2.0 / float(n) ** (d + 1)
        totals = 1.0
        for _, _, rows in self._items:
            totals *= float(rows.sum())
        self._t3 = totals / float(n) ** (2 * d)

    def value(self, perms: Mapping[str, np.ndarray] | None) -> float:
        prod = None
        rowprod = None
        for var, vals, rows in self._items:
            if perms is not None and var in self._permuted:
                idx = perms[var]
                v = _gather(vals, idx)
                r = rows[idx]
            else:
                v, r = vals, rows
            prod = np.array(v, copy=True) if prod is None else prod * v
            rowprod = np.array(r, copy=True) if rowprod is None else rowprod * r
        t1 = float(prod.sum()) * self._inv_n2
        t2 = float(rowprod.sum()) * self._two_inv_nd1
        return t1 - t2 + self._t3


def _pattern_factors(
    statistic: str, h: HypothesisKind, names: Sequence[str]
) -> list[tuple[str, bool]]:
    """(variable, centered?) factors of the Hadamard-pattern statistics."""
    K = HypothesisKind
    x = names[0]
    y = names[1]
    z = names[2] if len(names) > 2 else None
    if statistic == "lancaster":
        return [(x, True), (y, True), (z, True)]
    if statistic == "hsic":
        pairs = {
            K.PAIRWISE_XY: [(x, False), (y, True)],
            K.PAIRWISE_XZ: [(x, False), (z, True)],
            K.PAIRWISE_YZ: [(y, False), (z, True)],
            K.JOINT_PAIR_XY_Z: [(x, False), (y, False), (z, True)],
            K.JOINT_PAIR_XZ_Y: [(x, False), (z, False), (y, True)],
            K.JOINT_PAIR_YZ_X: [(y, False), (z, False), (x, True)],
        }
        return pairs[h]
    if statistic == "hyp":
        patterns = {
            K.JOINT_PAIR_XY_Z: [(x, False), (y, False), (z, True)],
            K.JOINT_PAIR_XZ_Y: [(x, False), (y, True), (z, False)],
            K.JOINT_PAIR_YZ_X: [(x, True), (y, False), (z, False)],
            K.INCOMPLETE_X: [(x, False), (y, True), (z, True)],
            K.INCOMPLETE_Y: [(x, True), (y, False), (z, True)],
            K.INCOMPLETE_Z: [(x, True), (y, True), (z, False)],
            K.LANCASTER: [(x, True), (y, True), (z, True)],
        }
        return patterns[h]
    raise ValueError(f"statistic {statistic!r} is not a Hadamard pattern")


def _build_evaluator(
    grams: Mapping[str, GramMatrix],
    statistic: str,
    h: HypothesisKind,
    names: Sequence[str],
    permuted: Sequence[str],
):
    if statistic in ("lancaster", "hsic", "hyp"):
        factors = []
        for var, centered in _pattern_factors(statistic, h, names):
            g = grams[var]
            factors.append((var, center(g).values if centered else g.values))
        return _HadamardStatistic(factors, permuted)
    if statistic == "total3":
        items = [(v, grams[v].values) for v in names[:3]]
        return _TotalIndependenceStatistic(items, permuted)
    if statistic == "totald":
        items = [(v, grams[v].values) for v in names]
        return _TotalIndependenceStatistic(items, permuted)
    raise ValueError(f"unknown statistic {statistic!r}")


def _as_spec_map(
    specs: KernelSpec | Mapping[str, KernelSpec] | None, names: Sequence[str]
) -> dict[str, KernelSpec]:
    if specs is None:
        specs = KernelSpec()
    if isinstance(specs, KernelSpec):
        return {name: specs for name in names}
    missing = [name for name in names if name not in specs]
    if missing:
        raise ValueError(f"no kernel spec for variables {missing}")
    return {name: specs[name] for name in names}


def build_grams(
    sample: Sample, specs: KernelSpec | Mapping[str, KernelSpec] | None = None
) -> dict[str, GramMatrix]:
    """One uncentered Gram matrix per variable block."""
    spec_map = _as_spec_map(specs, sample.names)
    return {name: gram(spec_map[name], sample.block(name)) for name in sample.names}


def _validate_test_args(B: int, alpha: float) -> None:
    if int(B) != B or B < 1:
        raise ValueError("permutation count must be a positive integer")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")


def _required_variables(h: HypothesisKind) -> int:
    if h is HypothesisKind.PAIRWISE_XY:
        return 2
    if h is HypothesisKind.TOTAL_INDEP_D:
        return 2
    return 3


def permutation_test_grams(
    grams: Mapping[str, GramMatrix],
    names: Sequence[str],
    h: HypothesisKind,
    B: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
    statistic: str | None = None,
    keep_null: bool = False,
) -> TestResult:
    """Permutation test on precomputed Gram matrices (see permutation_test)."""
    _validate_test_args(B, alpha)
    if h.composite:
        raise ValueError("composite hypotheses require factorization_test")
    names = tuple(names)
    if len(names) < _required_variables(h):
        raise ValueError(
            f"hypothesis {h.value!r} needs at least {_required_variables(h)} variables, "
            f"got {len(names)}"
        )
    if statistic is None:
        statistic = _DEFAULT_STATISTIC[h]
    if statistic not in _COMPATIBLE[h]:
        raise ValueError(
            f"statistic {statistic!r} cannot test hypothesis {h.value!r}; "
            f"valid choices: {_COMPATIBLE[h]}"
        )
    scheme = derive_scheme(h, names)
    evaluator = _build_evaluator(grams, statistic, h, names, scheme.permuted)
    n = grams[names[0]].n

    observed = evaluator.value(None)
    null = np.empty(B)
    for i in range(B):
        rng = _replicate_rng(seed, i)
        perms = {var: rng.permutation(n) for var in scheme.permuted}
        null[i] = evaluator.value(perms)

    exceed = int(np.sum(null >= observed))
    p_value = (1.0 + exceed) / (B + 1.0)
    return TestResult(
        hypothesis=h,
        statistic_name=statistic,
        statistic=observed,
        p_value=p_value,
        permutations=B,
        alpha=alpha,
        reject=p_value < alpha,
        seed=int(seed),
        null_samples=null if keep_null else None,
    )


def permutation_test(
    sample: Sample,
    h: HypothesisKind,
    specs: KernelSpec | Mapping[str, KernelSpec] | None = None,
    B: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
    statistic: str | None = None,
    keep_null: bool = False,
) -> TestResult:
    """Test hypothesis ``h`` on a sample with B permutation replicates.

    Kernel bandwidths resolve on the original sample and Gram matrices are
    built once; replicates permute them by index.
    """
    grams = build_grams(sample, specs)
    return permutation_test_grams(
        grams, sample.names, h, B=B, alpha=alpha, seed=seed, statistic=statistic,
        keep_null=keep_null,
    )


def holm_bonferroni(p_values: Sequence[float], alpha: float) -> np.ndarray:
    """Holm's sequentially rejective correction.

    The l-th smallest p-value is compared against alpha / (m + 1 - l);
    rejection stops at the first failure.  Returns boolean flags in the
    original order.  With m = 1 this is exactly p < alpha.
    """
    p = np.asarray(p_values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a nonempty 1-D sequence of p-values")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if np.any(p <= 0.0) or np.any(p > 1.0):
        raise ValueError("p-values must lie in (0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    reject = np.zeros(m, dtype=bool)
    for rank, idx in enumerate(order):
        if p[idx] < alpha / (m - rank):
            reject[idx] = True
        else:
            break
    return reject

# Sub-hypotheses of the factorization null, in reporting order.
FACTORIZATION_HYPOTHESES = (
    HypothesisKind.JOINT_PAIR_YZ_X,
    HypothesisKind.JOINT_PAIR_XZ_Y,
    HypothesisKind.JOINT_PAIR_XY_Z,
)

FACTORIZATION_METHODS = ("lancaster", "pairwise")


def factorization_test(
    sample: Sample,
    method: str = "lancaster",
    specs: KernelSpec | Mapping[str, KernelSpec] | None = None,
    B: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
    keep_null: bool = False,
) -> CompositeResult:
    """Composite test of (X,Y) indep Z or (X,Z) indep Y or (Y,Z) indep X.

    Runs one permutation test per sub-hypothesis (the interaction
    statistic under ``method="lancaster"``, the joint-pair two-variable
    statistics under ``method="pairwise"``), applies the Holm correction,
    and rejects the factorization null only when all three sub-hypotheses
    are rejected.  Gram matrices are shared across the three sub-tests.
    """
    if method not in FACTORIZATION_METHODS:
        raise ValueError(f"method must be one of {FACTORIZATION_METHODS}, got {method!r}")
    if len(sample.names) < 3:
        raise ValueError("factorization test needs three variables")
    statistic = "lancaster" if method == "lancaster" else "hsic"
    grams = build_grams(sample, specs)
    tests = tuple(
        permutation_test_grams(
            grams,
            sample.names,
            h,
            B=B,
            alpha=alpha,
            seed=derived_seed(seed, i),
            statistic=statistic,
            keep_null=keep_null,
        )
        for i, h in enumerate(FACTORIZATION_HYPOTHESES)
    )
    p_values = [t.p_value for t in tests]
    flags = holm_bonferroni(p_values, alpha)
    return CompositeResult(
        tests=tests,
        sorted_p_values=tuple(sorted(p_values)),
        rejected=tuple(bool(f) for f in flags),
        factorization_rejected=bool(flags.all()),
    )


def vstructure_detect(
    sample: Sample,
    method: str = "lancaster",
    specs: KernelSpec | Mapping[str, KernelSpec] | None = None,
    B: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
) -> tuple[bool, CompositeResult]:
    """Detect the collider x -> z <- y, assuming x and y are independent.

    Under that assumption, rejecting every bivariate factorization of the
    joint is equivalent to the presence of the V-structure, so the
    factorization decision doubles as the detection flag.
    """
    composite = factorization_test(sample, method=method, specs=specs, B=B, alpha=alpha, seed=seed)
    return composite.factorization_rejected, composite

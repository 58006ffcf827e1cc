"""V-statistic estimators for two- and three-variable interaction norms.

Every statistic is the squared RKHS norm of an embedded signed measure,
evaluated on uncentered Gram matrices K, L, M of a joint sample.  Writing
A~ for the double-centered HAH, the production estimators are

    hsic_v(K, L)              = (1/n^2) (K o L~)_++
    lancaster_v(K, L, M)      = (1/n^2) (K~ o L~ o M~)_++
    incomplete (uncentered Z) = (1/n^2) (K~ o L~ o M)_++
    total_indep3_v(K, L, M)   = (1/n^2) (K o L o M)_++
                                - (2/n^4) sum_a K_a+ L_a+ M_a+
                                + (1/n^6) K_++ L_++ M_++

together with the joint-pair patterns ((X,Y) indep Z uses K o L against
M~, and cyclically) and the D-variable total-independence statistic.

``inner_products_3var`` computes the full 15-entry table of pairwise
inner products between the five plug-in measures (joint, the three
pair-marginal products, and the product of marginals).  Any signed
combination of those measures then has its squared norm assembled by
``InnerProductTable3.signed_norm``; the production statistics above are
tested against exactly that expansion.  The table path costs a few dense
n x n matrix products and is intended for oracles, not hot loops.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .gram import (
    GramMatrix,
    _sorted_product3,
    center,
    sum_hadamard2,
    sum_hadamard3,
)


class Measure(enum.Enum):
    """The five plug-in measures entering three-variable statistics."""

    JOINT = "p_xyz"
    XY_Z = "p_xy.p_z"
    XZ_Y = "p_xz.p_y"
    YZ_X = "p_yz.p_x"
    PRODUCT = "p_x.p_y.p_z"


_MEASURE_ORDER = {m: i for i, m in enumerate(Measure)}


def _pair_key(a: Measure, b: Measure) -> tuple[Measure, Measure]:
    return (a, b) if _MEASURE_ORDER[a] <= _MEASURE_ORDER[b] else (b, a)


class HypothesisKind(enum.Enum):
    """Testable hypotheses about a (X, Y, Z) triple (plus D-variable kinds).

    ``dx``/``dy``/``dz`` are the incomplete-interaction nulls in which the
    named variable's Gram matrix stays uncentered; ``factorization`` is the
    composite disjunction of the three joint-pair hypotheses.
    """

    PAIRWISE_XY = "xy"
    PAIRWISE_XZ = "xz"
    PAIRWISE_YZ = "yz"
    JOINT_PAIR_XY_Z = "xy_z"
    JOINT_PAIR_XZ_Y = "xz_y"
    JOINT_PAIR_YZ_X = "yz_x"
    INCOMPLETE_X = "dx"
    INCOMPLETE_Y = "dy"
    INCOMPLETE_Z = "dz"
    LANCASTER = "lancaster"
    TOTAL_INDEP3 = "total3"
    TOTAL_INDEP_D = "totald"
    FACTORIZATION = "factorization"

    @property
    def composite(self) -> bool:
        return self is HypothesisKind.FACTORIZATION


# Signed-measure coefficients defining each statistic as a combination of
# the five plug-in measures; used by the expansion oracles.
LANCASTER_COEFFS: dict[Measure, float] = {
    Measure.JOINT: 1.0,
    Measure.XY_Z: -1.0,
    Measure.XZ_Y: -1.0,
    Measure.YZ_X: -1.0,
    Measure.PRODUCT: 2.0,
}

TOTAL3_COEFFS: dict[Measure, float] = {Measure.JOINT: 1.0, Measure.PRODUCT: -1.0}

# The incomplete measure keeping variable v uncentered subtracts the two
# pair-marginal products whose pair contains v.
INCOMPLETE_COEFFS: dict[str, dict[Measure, float]] = {
    "x": {Measure.JOINT: 1.0, Measure.PRODUCT: 1.0, Measure.XY_Z: -1.0, Measure.XZ_Y: -1.0},
    "y": {Measure.JOINT: 1.0, Measure.PRODUCT: 1.0, Measure.XY_Z: -1.0, Measure.YZ_X: -1.0},
    "z": {Measure.JOINT: 1.0, Measure.PRODUCT: 1.0, Measure.XZ_Y: -1.0, Measure.YZ_X: -1.0},
}

JOINT_PAIR_COEFFS: dict[HypothesisKind, dict[Measure, float]] = {
    HypothesisKind.JOINT_PAIR_XY_Z: {Measure.JOINT: 1.0, Measure.XY_Z: -1.0},
    HypothesisKind.JOINT_PAIR_XZ_Y: {Measure.JOINT: 1.0, Measure.XZ_Y: -1.0},
    HypothesisKind.JOINT_PAIR_YZ_X: {Measure.JOINT: 1.0, Measure.YZ_X: -1.0},
}


@dataclass(frozen=True)
class InnerProductTable3:
    """All 15 inner products between the five plug-in measures.

    Entries are the actual inner-product estimates (normalizations
    restored).  Diagonal entries are squared norms and must be nonnegative
    up to numerical slack when the inputs are genuine kernel matrices.
    """

    entries: Mapping[tuple[Measure, Measure], float] = field(repr=False)

    def __post_init__(self):
        keys = {_pair_key(a, b) for a in Measure for b in Measure}
        if set(self.entries) != keys:
            raise ValueError("inner-product table must contain all 15 measure pairs")
        scale = max(abs(v) for v in self.entries.values())
        slack = 1e-9 * max(1.0, scale)
        for m in Measure:
            if self.entries[(m, m)] < -slack:
                raise ValueError(f"negative squared norm for {m.value}: {self.entries[(m, m)]}")

    def ip(self, a: Measure, b: Measure) -> float:
        return self.entries[_pair_key(a, b)]

    def signed_norm(self, coeffs: Mapping[Measure, float]) -> float:
        """Squared norm of sum_m coeffs[m] * measure_m via bilinear expansion."""
        total = 0.0
        for a in Measure:
            ca = coeffs.get(a, 0.0)
            if ca == 0.0:
                continue
            for b in Measure:
                cb = coeffs.get(b, 0.0)
                if cb != 0.0:
                    total += ca * cb * self.ip(a, b)
        return total


def _check_grams(*grams: GramMatrix) -> int:
    n = grams[0].n
    for g in grams:
        if not isinstance(g, GramMatrix):
            raise TypeError("expected GramMatrix inputs")
        if g.n != n:
            raise ValueError(f"size mismatch: {n} vs {g.n}")
    return n


def hsic_v(k: GramMatrix, l: GramMatrix) -> float:
    """(1/n^2) (K o L~)_++, the squared norm of P_XY - P_X P_Y.

    Centering either or both matrices gives the same value, so only L is
    centered here (one pass after the centering).
    """
    n = _check_grams(k, l)
    return sum_hadamard2(k.values, center(l).values) / (n * n)


def inner_products_3var(k: GramMatrix, l: GramMatrix, m: GramMatrix) -> InnerProductTable3:
    """The 15-entry inner-product table for a three-variable sample.

    Uses the three dense products KL, KM, LM; everything else is an
    entrywise pass or a row-sum contraction.
    """
    n = _check_grams(k, l, m)
    K, L, M = k.values, l.values, m.values
    KL = K @ L
    KM = K @ M
    LM = L @ M
    rk, rl, rm = K.sum(axis=1), L.sum(axis=1), M.sum(axis=1)
    sk, sl, sm = rk.sum(), rl.sum(), rm.sum()

    J, XY, XZ, YZ, P = Measure.JOINT, Measure.XY_Z, Measure.XZ_Y, Measure.YZ_X, Measure.PRODUCT
    n2, n3, n4, n5, n6 = float(n) ** 2, float(n) ** 3, float(n) ** 4, float(n) ** 5, float(n) ** 6
    entries = {
        (J, J): float(np.sum(K * L * M)) / n2,
        (J, XY): float(np.sum((K * L) @ M)) / n3,
        (J, XZ): float(np.sum((K * M) @ L)) / n3,
        (J, YZ): float(np.sum((L * M) @ K)) / n3,
        (J, P): float(np.sum(rk * rl * rm)) / n4,
        (XY, XY): float(np.sum(K * L)) * float(sm) / n4,
        (XY, XZ): float(np.sum(M @ KL)) / n4,
        (XY, YZ): float(np.sum(KL @ M)) / n4,
        (XY, P): float(np.sum(KL)) * float(sm) / n5,
        (XZ, XZ): float(np.sum(K * M)) * float(sl) / n4,
        (XZ, YZ): float(np.sum(KM @ L)) / n4,
        (XZ, P): float(np.sum(KM)) * float(sl) / n5,
        (YZ, YZ): float(np.sum(L * M)) * float(sk) / n4,
        (YZ, P): float(np.sum(LM)) * float(sk) / n5,
        (P, P): float(sk) * float(sl) * float(sm) / n6,
    }
    return InnerProductTable3(entries)


def lancaster_v(k: GramMatrix, l: GramMatrix, m: GramMatrix) -> float:
    """(1/n^2) (K~ o L~ o M~)_++: squared norm of the interaction measure

    P_XYZ - P_XY P_Z - P_XZ P_Y - P_YZ P_X + 2 P_X P_Y P_Z.

    All three matrices are centered; the value is exactly invariant under
    any permutation of the argument roles.
    """
    n = _check_grams(k, l, m)
    return sum_hadamard3(center(k).values, center(l).values, center(m).values) / (n * n)


def incomplete_lancaster_v(k: GramMatrix, l: GramMatrix, m: GramMatrix, uncentered: str) -> float:
    """Incomplete interaction norm leaving one variable's matrix uncentered.

    ``uncentered="z"`` computes (1/n^2) (K~ o L~ o M)_++, the squared norm
    of P_XYZ + P_X P_Y P_Z - P_XZ P_Y - P_YZ P_X, which vanishes whenever
    X or Y separates from the other two (but not necessarily when Z does).
    ``"x"`` and ``"y"`` are the analogous patterns.
    """
    n = _check_grams(k, l, m)
    if uncentered not in ("x", "y", "z"):
        raise ValueError(f"uncentered must be one of 'x', 'y', 'z', got {uncentered!r}")
    kv = k.values if uncentered == "x" else center(k).values
    lv = l.values if uncentered == "y" else center(l).values
    mv = m.values if uncentered == "z" else center(m).values
    return sum_hadamard3(kv, lv, mv) / (n * n)


# Centering pattern per atomic three-variable hypothesis: True marks a
# matrix that gets centered.
_PATTERNS: dict[HypothesisKind, tuple[bool, bool, bool]] = {
    HypothesisKind.JOINT_PAIR_XY_Z: (False, False, True),
    HypothesisKind.JOINT_PAIR_XZ_Y: (False, True, False),
    HypothesisKind.JOINT_PAIR_YZ_X: (True, False, False),
    HypothesisKind.INCOMPLETE_X: (False, True, True),
    HypothesisKind.INCOMPLETE_Y: (True, False, True),
    HypothesisKind.INCOMPLETE_Z: (True, True, False),
    HypothesisKind.LANCASTER: (True, True, True),
}


def hypothesis_v(k: GramMatrix, l: GramMatrix, m: GramMatrix, h: HypothesisKind) -> float:
    """Dispatch an atomic hypothesis to its V-statistic.

    Joint-pair, incomplete, and full-interaction kinds apply the matching
    centering pattern; pairwise kinds reduce to the two-variable statistic
    of the named pair; total3 uses the three-term total-independence form.
    Composite and D-variable kinds are rejected.
    """
    if h.composite or h is HypothesisKind.TOTAL_INDEP_D:
        raise ValueError(f"hypothesis {h.value!r} has no single three-variable V-statistic")
    if h is HypothesisKind.PAIRWISE_XY:
        return hsic_v(k, l)
    if h is HypothesisKind.PAIRWISE_XZ:
        return hsic_v(k, m)
    if h is HypothesisKind.PAIRWISE_YZ:
        return hsic_v(l, m)
    if h is HypothesisKind.TOTAL_INDEP3:
        return total_indep3_v(k, l, m)
    n = _check_grams(k, l, m)
    ck, cl, cm = _PATTERNS[h]
    kv = center(k).values if ck else k.values
    lv = center(l).values if cl else l.values
    mv = center(m).values if cm else m.values
    return sum_hadamard3(kv, lv, mv) / (n * n)


def total_indep3_v(k: GramMatrix, l: GramMatrix, m: GramMatrix) -> float:
    """Squared norm of P_XYZ - P_X P_Y P_Z on three Gram matrices.

    (1/n^2)(K o L o M)_++ - (2/n^4) sum_a K_a+ L_a+ M_a+
    + (1/n^6) K_++ L_++ M_++, exactly role-symmetric.
    """
    n = _check_grams(k, l, m)
    K, L, M = k.values, l.values, m.values
    rk, rl, rm = K.sum(axis=1), L.sum(axis=1), M.sum(axis=1)
    t1 = sum_hadamard3(K, L, M) / float(n) ** 2
    t2 = 2.0 * float(np.sum(_sorted_product3(rk, rl, rm))) / float(n) ** 4
    t3 = float(_sorted_product3(rk.sum(), rl.sum(), rm.sum())) / float(n) ** 6
    return t1 - t2 + t3


def total_indep_d_v(grams: Sequence[GramMatrix]) -> float:
    """D-variable total-independence statistic in O(D n^2).

    (1/n^2) sum_ab prod_i K^(i)_ab - (2/n^(D+1)) sum_a prod_i K^(i)_a+
    + (1/n^(2D)) prod_i K^(i)_++.  Coincides with hsic_v at D = 2 and with
    total_indep3_v at D = 3.
    """
    grams = list(grams)
    if len(grams) < 2:
        raise ValueError("total independence needs at least two variables")
    n = _check_grams(*grams)
    d = len(grams)
    prod = np.array(grams[0].values, copy=True)
    rows = grams[0].values.sum(axis=1)
    rowprod = rows.copy()
    totals = float(rows.sum())
    for g in grams[1:]:
        prod *= g.values
        r = g.values.sum(axis=1)
        rowprod *= r
        totals *= float(r.sum())
    t1 = float(np.sum(prod)) / float(n) ** 2
    t2 = 2.0 * float(np.sum(rowprod)) / float(n) ** (d + 1)
    t3 = totals / float(n) ** (2 * d)
    return t1 - t2 + t3


def bias_estimate(k: GramMatrix, l: GramMatrix, m: GramMatrix) -> float:
    """(1/n^4) tr(K~) tr(L~) tr(M~), the leading V-statistic bias under
    total independence."""
    n = _check_grams(k, l, m)
    tk = float(np.trace(center(k).values))
    tl = float(np.trace(center(l).values))
    tm = float(np.trace(center(m).values))
    return tk * tl * tm / float(n) ** 4


def rkhs_normalize(k: GramMatrix, coeffs) -> np.ndarray:
    """Scale expansion coefficients so f = sum_i a_i k(., x_i) has unit norm."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] != k.n:
        raise ValueError(f"coefficient vector must have length {k.n}")
    norm2 = float(a @ (k.values @ a))
    if norm2 <= 0.0:
        raise ValueError("zero-norm function")
    return a / np.sqrt(norm2)


def three_way_cov_empirical(
    k: GramMatrix,
    l: GramMatrix,
    m: GramMatrix,
    a,
    b,
    c,
    normalize: bool = False,
) -> float:
    """Empirical centered three-way covariance of RKHS functions.

    The functions are f = sum_i a_i k(., x_i) (and likewise g, h), so their
    sample values are Ka, Lb, Mc.  Returns (1/n) sum_i f~(x_i) g~(y_i)
    h~(z_i) with f~ the mean-centered values.  With ``normalize=True`` the
    coefficient vectors are first scaled to unit RKHS norm, in which case
    |result| <= sqrt(lancaster_v(K, L, M)).
    """
    n = _check_grams(k, l, m)
    vals = []
    for g, coeffs in ((k, a), (l, b), (m, c)):
        v = np.asarray(coeffs, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != n:
            raise ValueError(f"coefficient vector must have length {n}")
        fv = g.values @ v
        norm2 = float(v @ fv)
        if norm2 <= 0.0:
            raise ValueError("zero-norm function")
        if normalize:
            fv = fv / np.sqrt(norm2)
        vals.append(fv - fv.mean())
    f, g_, h_ = vals
    return float(np.sum(f * g_ * h_) / n)

"""Dense symmetric-matrix primitives underlying the kernel V-statistics.

All operations are O(n^2) time and memory over plain float64 arrays.  The
centering map K -> HKH (H = I - (1/n) 1 1^T) is never computed through H;
it uses the row/column-sum form

    HKH = K - (1/n)(K_+ + K_+^T) + (1/n^2) K_++ 1 1^T,

where [K_+]_{ij} = K_{+j} is the column-sum matrix and K_++ is the total
sum.  Entry reductions go through numpy's pairwise summation, which keeps
the accumulated error of n^2-term sums near machine precision at the
matrix sizes used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Constructors symmetrize below this relative asymmetry and reject above it;
# kernel evaluation round-off lands comfortably under the threshold.
SYMMETRY_RTOL = 1e-12

# Row/total sums of a centered matrix must vanish to within this multiple
# of n^2 * max|entry| (error budget of an n^2-term float64 accumulation).
CENTERED_SUM_RTOL = 1e-9


def as_real_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting NaN/Inf entries."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, GramMatrix) else as_real_matrix(m)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """A symmetric n x n kernel evaluation matrix.

    ``centered`` records whether the entries are already HKH.  The
    constructor symmetrizes round-off-level asymmetry ((A + A^T)/2 when the
    maximal asymmetry is below ``SYMMETRY_RTOL`` relative to max|entry|)
    and rejects anything larger.
    """

    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        a = np.array(self.values, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("Gram matrix must be nonempty")
        if not np.isfinite(a).all():
            raise ValueError("Gram matrix contains non-finite entries")
        scale = np.abs(a).max()
        asym = np.abs(a - a.T).max()
        if asym > SYMMETRY_RTOL * max(scale, 1e-300):
            raise ValueError(
                f"matrix is not symmetric: max asymmetry {asym:.3e} "
                f"exceeds {SYMMETRY_RTOL:.0e} relative to max|entry| {scale:.3e}"
            )
        if asym != 0.0:
            a = (a + a.T) / 2.0
        if self.centered:
            n = a.shape[0]
            tol = CENTERED_SUM_RTOL * n * n * max(scale, 1e-300)
            rows = a.sum(axis=1)
            if np.abs(rows).max() > tol or abs(rows.sum()) > tol:
                raise ValueError("matrix flagged centered but its row sums do not vanish")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def sum_all(a) -> float:
    """A_++, the sum of all entries."""
    return float(np.sum(_values(a)))


def row_sums(a) -> np.ndarray:
    """The vector (A_{i+})_i of row sums."""
    return _values(a).sum(axis=1)


def center(k: GramMatrix) -> GramMatrix:
    """HKH via row/column-sum subtraction (no H materialized).

    Idempotent: centering an already-centered matrix returns it unchanged.
    The result's total sum vanishes identically (K_++ - 2 K_++ + K_++ = 0
    up to round-off).
    """
    if not isinstance(k, GramMatrix):
        raise TypeError("center expects a GramMatrix")
    if k.centered:
        return k
    a = k.values
    n = a.shape[0]
    rows = a.sum(axis=1)
    total = rows.sum()
    c = a - (rows[:, None] + rows[None, :]) / n + total / (n * n)
    return GramMatrix(c, centered=True)


def center_values(a: np.ndarray) -> np.ndarray:
    """Double-center a raw symmetric array (helper for hot paths)."""
    n = a.shape[0]
    rows = a.sum(axis=1)
    total = rows.sum()
    return a - (rows[:, None] + rows[None, :]) / n + total / (n * n)


def _check_same_shape(*arrays: np.ndarray) -> None:
    first = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != first:
            raise ValueError(f"shape mismatch: {first} vs {a.shape}")


def sum_hadamard2(a, b) -> float:
    """(A o B)_++ = tr(A B^T) in a single entrywise pass."""
    av, bv = _values(a), _values(b)
    _check_same_shape(av, bv)
    return float(np.sum(av * bv))


def _sorted_product3(a, b, c):
    """Entrywise product of three arrays, multiplied in value order.

    Sorting the operands per entry (3-element min/max network) makes the
    result bit-identical under any permutation of the argument roles, so
    statistics built on it are exactly role-symmetric.
    """
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    top = np.maximum(hi, c)
    mid = np.minimum(hi, c)
    low = np.minimum(lo, mid)
    mid = np.maximum(lo, mid)
    return (low * mid) * top


def sum_hadamard3(a, b, c) -> float:
    """(A o B o C)_++, exactly symmetric in its three arguments."""
    av, bv, cv = _values(a), _values(b), _values(c)
    _check_same_shape(av, bv, cv)
    return float(np.sum(_sorted_product3(av, bv, cv)))

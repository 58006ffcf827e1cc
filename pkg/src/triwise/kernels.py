"""Kernel functions, bandwidth selection, and Gram-matrix construction.

Two families are shipped: the Gaussian kernel

    k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))

with sigma either fixed or set by the median heuristic (the median of the
pairwise interpoint distances of the sample), and the linear kernel
k(x, x') = <x, x'>.  Each variable gets its own bandwidth; variables
measured on different scales must not share one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .gram import GramMatrix

FAMILIES = ("gaussian", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth policy.

    ``bandwidth`` is only meaningful for the Gaussian family: either the
    string ``"median"`` or a fixed positive float.  ``None`` selects the
    family default (median heuristic for Gaussian).
    """

    family: str = "gaussian"
    bandwidth: float | str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        bw = self.bandwidth
        if self.family == "linear":
            if bw is not None:
                raise ValueError("linear kernel takes no bandwidth")
            return
        if bw is None:
            object.__setattr__(self, "bandwidth", "median")
        elif isinstance(bw, str):
            if bw != "median":
                raise ValueError(f"unknown bandwidth policy {bw!r}")
        else:
            bw = float(bw)
            if not np.isfinite(bw) or bw <= 0.0:
                raise ValueError("fixed bandwidth must be a positive finite number")
            object.__setattr__(self, "bandwidth", bw)


def as_block(values, name: str = "block") -> np.ndarray:
    """Coerce observations to an (n, d) float64 array; 1-D input becomes a column."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 1- or 2-dimensional, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def median_heuristic(x) -> float:
    """Median of the n(n-1)/2 pairwise Euclidean distances (diagonal excluded).

    For an even number of distances the lower median is taken, so the
    result is always one of the observed distances and ties break
    deterministically.
    """
    b = as_block(x)
    n = b.shape[0]
    if n < 2:
        raise ValueError("median heuristic needs at least two observations")
    d = pdist(b)
    k = (d.size - 1) // 2
    med = float(np.partition(d, k)[k])
    if med <= 0.0:
        raise ValueError("degenerate sample: zero median distance")
    return med


def resolved_bandwidth(spec: KernelSpec, x) -> float | None:
    """The bandwidth gram() will use: a float for Gaussian, None for linear."""
    if spec.family == "linear":
        return None
    if spec.bandwidth == "median":
        return median_heuristic(x)
    return float(spec.bandwidth)


def gram(spec: KernelSpec, x) -> GramMatrix:
    """Uncentered Gram matrix of a sample under ``spec``.

    Gaussian entries lie in (0, 1] with an exactly-unit diagonal.
    """
    b = as_block(x)
    if spec.family == "linear":
        return GramMatrix(b @ b.T)
    sigma = resolved_bandwidth(spec, b)
    sq = squareform(pdist(b, "sqeuclidean"))
    return GramMatrix(np.exp(sq / (-2.0 * sigma * sigma)))


def equivalent_shift(k: GramMatrix, f) -> GramMatrix:
    """K + f 1^T + 1 f^T: a kernel matrix from the same equivalence class.

    The shift preserves the induced semimetric entrywise,
    K'_ii + K'_jj - 2 K'_ij = K_ii + K_jj - 2 K_ij, but need not be
    positive definite; it exists for invariance testing.
    """
    if k.centered:
        raise ValueError("equivalent_shift expects an uncentered Gram matrix")
    fv = np.asarray(f, dtype=np.float64)
    if fv.ndim != 1 or fv.shape[0] != k.n:
        raise ValueError(f"shift vector must have length {k.n}, got shape {fv.shape}")
    if not np.isfinite(fv).all():
        raise ValueError("shift vector contains non-finite entries")
    return GramMatrix(k.values + fv[:, None] + fv[None, :])

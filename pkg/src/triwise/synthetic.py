"""Benchmark distribution generators and an exact discrete-measure oracle.

Dataset A is the pairwise-independent, mutually dependent triple: X and Y
standard normal in R^p, W exponential with mean 1/sqrt(2) (so E[W^2] = 1
and Z_1 has unit variance), Z_1 = sign(X_1 Y_1) W, and the remaining Z
coordinates independent noise.  Dataset B makes the joint dependence
stronger than either marginal one: Z_1 is X_1^2, Y_1^2, or X_1 Y_1 (each
with probability 1/3 per row) plus N(0, 0.1^2) noise.

All generators are deterministic functions of (n, p, seed).  Randomness
comes from the counter-based Philox bit generator; independent substreams
are derived as SeedSequence(seed, spawn_key=(STREAM_TAG,)), one tag per
role (see ``_stream``), so e.g. dataset B's branch choices are
reproducible independently of its noise draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .kernels import KernelSpec, as_block, gram

# Substream tags (spawn_key values) per generator role.
_STREAM_X = 0
_STREAM_Y = 1
_STREAM_W = 2  # exponential magnitudes / branch choices / atom cells
_STREAM_EPS = 3
_STREAM_Z_NOISE = 4


def _stream(seed: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class Sample:
    """Named per-variable data blocks sharing a common row count.

    Block order is significant: the first three blocks play the x, y, z
    roles in three-variable statistics.
    """

    blocks: Mapping[str, np.ndarray]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("sample needs at least one variable block")
        clean: dict[str, np.ndarray] = {}
        n = None
        for name, values in self.blocks.items():
            b = as_block(values, name=name)
            b.setflags(write=False)
            if n is None:
                n = b.shape[0]
            elif b.shape[0] != n:
                raise ValueError(f"block {name!r} has {b.shape[0]} rows, expected {n}")
            clean[name] = b
        object.__setattr__(self, "blocks", clean)

    @property
    def n(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.blocks)

    def block(self, name: str) -> np.ndarray:
        return self.blocks[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.blocks)

    @property
    def x(self) -> np.ndarray:
        return self.blocks["x"]

    @property
    def y(self) -> np.ndarray:
        return self.blocks["y"]

    @property
    def z(self) -> np.ndarray:
        return self.blocks["z"]


def gen_dataset_a(n: int, p: int, seed: int) -> Sample:
    """Pairwise independent but mutually dependent triple on R^p x R^p x R^p."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    x = _stream(seed, _STREAM_X).standard_normal((n, p))
    y = _stream(seed, _STREAM_Y).standard_normal((n, p))
    w = _stream(seed, _STREAM_W).exponential(scale=1.0 / np.sqrt(2.0), size=n)
    z = np.empty((n, p))
    z[:, 0] = np.sign(x[:, 0] * y[:, 0]) * w
    if p > 1:
        z[:, 1:] = _stream(seed, _STREAM_Z_NOISE).standard_normal((n, p - 1))
    return Sample({"x": x, "y": y, "z": z})


def _dataset_b_branches(n: int, seed: int) -> np.ndarray:
    """Per-row mixture branch (0: X_1^2, 1: Y_1^2, 2: X_1 Y_1)."""
    return _stream(seed, _STREAM_W).integers(0, 3, size=n)


def gen_dataset_b(n: int, p: int, seed: int) -> Sample:
    """Triple whose joint dependence on (X, Y) is stronger than marginal ones."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    x = _stream(seed, _STREAM_X).standard_normal((n, p))
    y = _stream(seed, _STREAM_Y).standard_normal((n, p))
    branches = _dataset_b_branches(n, seed)
    eps = _stream(seed, _STREAM_EPS).normal(0.0, 0.1, size=n)
    x1, y1 = x[:, 0], y[:, 0]
    base = np.choose(branches, [x1 * x1, y1 * y1, x1 * y1])
    z = np.empty((n, p))
    z[:, 0] = base + eps
    if p > 1:
        z[:, 1:] = _stream(seed, _STREAM_Z_NOISE).standard_normal((n, p - 1))
    return Sample({"x": x, "y": y, "z": z})


def gen_null(n: int, p: int, seed: int) -> Sample:
    """Fully independent standard normal blocks (calibration data)."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    x = _stream(seed, _STREAM_X).standard_normal((n, p))
    y = _stream(seed, _STREAM_Y).standard_normal((n, p))
    z = _stream(seed, _STREAM_Z_NOISE).standard_normal((n, p))
    return Sample({"x": x, "y": y, "z": z})


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    """A finite three-variable joint distribution on atom grids.

    ``probs[i, j, k]`` is the mass on (x_atoms[i], y_atoms[j], z_atoms[k]).
    """

    x_atoms: np.ndarray
    y_atoms: np.ndarray
    z_atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        xa = as_block(self.x_atoms, name="x_atoms")
        ya = as_block(self.y_atoms, name="y_atoms")
        za = as_block(self.z_atoms, name="z_atoms")
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (xa.shape[0], ya.shape[0], za.shape[0]):
            raise ValueError(
                f"probs shape {p.shape} does not match atom counts "
                f"({xa.shape[0]}, {ya.shape[0]}, {za.shape[0]})"
            )
        if np.any(p < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {float(p.sum())!r}, not 1")
        for name, a in (("x_atoms", xa), ("y_atoms", ya), ("z_atoms", za), ("probs", p)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def counterexample_table() -> DiscreteJoint:
    """Binary 2x2x2 joint with vanishing three-way interaction yet no
    bivariate factorization: corner cells carry 0.2, the rest 0.1."""
    probs = np.full((2, 2, 2), 0.1)
    probs[0, 0, 0] = 0.2
    probs[1, 1, 1] = 0.2
    atoms = np.array([[0.0], [1.0]])
    return DiscreteJoint(atoms, atoms, atoms, probs)


def gen_counterexample(n: int, seed: int) -> Sample:
    """IID draws from the counterexample table via inverse-CDF cell lookup."""
    if n < 1:
        raise ValueError("n must be positive")
    joint = counterexample_table()
    flat = joint.probs.ravel()
    cum = np.cumsum(flat)
    cum[-1] = 1.0
    u = _stream(seed, _STREAM_W).random(n)
    cells = np.searchsorted(cum, u, side="right")
    ix, iy, iz = np.unravel_index(cells, joint.probs.shape)
    return Sample(
        {
            "x": joint.x_atoms[ix],
            "y": joint.y_atoms[iy],
            "z": joint.z_atoms[iz],
        }
    )


def empirical_table(sample: Sample, joint: DiscreteJoint) -> DiscreteJoint:
    """Cell frequencies of a sample supported on a joint's atom grid."""

    def atom_index(block: np.ndarray, atoms: np.ndarray, name: str) -> np.ndarray:
        dist = np.linalg.norm(block[:, None, :] - atoms[None, :, :], axis=2)
        idx = dist.argmin(axis=1)
        if dist[np.arange(block.shape[0]), idx].max() > 0.0:
            raise ValueError(f"sample block {name!r} contains values off the atom grid")
        return idx

    ix = atom_index(sample.x, joint.x_atoms, "x")
    iy = atom_index(sample.y, joint.y_atoms, "y")
    iz = atom_index(sample.z, joint.z_atoms, "z")
    shape = joint.probs.shape
    counts = np.zeros(shape)
    np.add.at(counts, (ix, iy, iz), 1.0)
    return DiscreteJoint(joint.x_atoms, joint.y_atoms, joint.z_atoms, counts / sample.n)


POPULATION_MEASURES = ("lancaster", "total3", "xy_z", "xz_y", "yz_x")

_DEFAULT_ATOM_KERNEL = KernelSpec("gaussian", 1.0)


def population_norm_discrete(
    joint: DiscreteJoint,
    specs: tuple[KernelSpec, KernelSpec, KernelSpec] = (
        _DEFAULT_ATOM_KERNEL,
        _DEFAULT_ATOM_KERNEL,
        _DEFAULT_ATOM_KERNEL,
    ),
    measure: str = "lancaster",
) -> float:
    """Exact squared RKHS norm of a signed measure built from ``joint``.

    Expands the measure over all atom-cell pairs (no sampling):

        ||D||^2 = sum_{u,u'} D(u) D(u') k(x_u, x_u') l(y_u, y_u') m(z_u, z_u').

    ``measure`` selects the full interaction measure, the total-independence
    difference, or one of the three bivariate-factorization differences
    P - P_ab P_c.
    """
    if measure not in POPULATION_MEASURES:
        raise ValueError(f"measure must be one of {POPULATION_MEASURES}, got {measure!r}")
    p = joint.probs
    px = p.sum(axis=(1, 2))
    py = p.sum(axis=(0, 2))
    pz = p.sum(axis=(0, 1))
    pxy = p.sum(axis=2)
    pxz = p.sum(axis=1)
    pyz = p.sum(axis=0)
    outer3 = px[:, None, None] * py[None, :, None] * pz[None, None, :]
    if measure == "lancaster":
        delta = (
            p
            - pxy[:, :, None] * pz[None, None, :]
            - pxz[:, None, :] * py[None, :, None]
            - pyz[None, :, :] * px[:, None, None]
            + 2.0 * outer3
        )
    elif measure == "total3":
        delta = p - outer3
    elif measure == "xy_z":
        delta = p - pxy[:, :, None] * pz[None, None, :]
    elif measure == "xz_y":
        delta = p - pxz[:, None, :] * py[None, :, None]
    else:  # yz_x
        delta = p - pyz[None, :, :] * px[:, None, None]

    kx = gram(specs[0], joint.x_atoms).values
    ky = gram(specs[1], joint.y_atoms).values
    kz = gram(specs[2], joint.z_atoms).values
    return float(np.einsum("abc,def,ad,be,cf->", delta, delta, kx, ky, kz, optimize=True))

"""Dense complex linear-algebra kernel shared by every scheme.

Channel convention: ``h_ij`` maps transmitter ``j`` to receiver ``i`` and has
shape ``(K * n_i, K * m_j)`` for a ``K``-symbol extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DefectiveMatrixError

RANK_TOL = 1e-9
DEFECTIVE_COND = 1e10

LINKS = ("11", "12", "21", "22")
EXTENSION_KINDS = ("none", "block_repeat", "per_slot_diagonal")


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts ``(M1, M2, N1, N2)``: transmit counts first."""

    m1: int
    m2: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("m1", "m2", "n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"antenna count {name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @classmethod
    def equal(cls, m: int) -> "AntennaConfig":
        return cls(m, m, m, m)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m1, self.m2, self.n1, self.n2)

    def scaled(self, kappa: int) -> "AntennaConfig":
        return AntennaConfig(*(kappa * v for v in self.as_tuple()))

    def rx(self, i: int) -> int:
        return self.n1 if i == 1 else self.n2

    def tx(self, j: int) -> int:
        return self.m1 if j == 1 else self.m2


@dataclass(frozen=True, eq=False)
class ChannelSet:
    config: AntennaConfig
    h11: np.ndarray
    h12: np.ndarray
    h21: np.ndarray
    h22: np.ndarray
    extension_factor: int = 1
    extension_kind: str = "none"
    # per-link base blocks for block_repeat sets (the unextended matrices)
    base: "ChannelSet | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        k = self.extension_factor
        if k < 1:
            raise ValueError("extension factor must be >= 1")
        if self.extension_kind not in EXTENSION_KINDS:
            raise ValueError(f"unknown extension kind {self.extension_kind!r}")
        cfg = self.config
        for link in LINKS:
            h = np.asarray(getattr(self, "h" + link), dtype=complex)
            h.setflags(write=False)
            object.__setattr__(self, "h" + link, h)
            i, j = int(link[0]), int(link[1])
            want = (k * cfg.rx(i), k * cfg.tx(j))
            if h.shape != want:
                raise ValueError(f"h{link} has shape {h.shape}, expected {want}")
            if not np.all(np.isfinite(h)):
                raise ValueError(f"h{link} has non-finite entries")
        if self.extension_kind == "per_slot_diagonal" and cfg.as_tuple() != (1, 1, 1, 1):
            raise ValueError("per-slot diagonal channels require single antennas")

    def h(self, i: int, j: int) -> np.ndarray:
        return getattr(self, f"h{i}{j}")

    def matrices(self) -> dict[str, np.ndarray]:
        return {link: getattr(self, "h" + link) for link in LINKS}

    def base_channels(self) -> "ChannelSet":
        """The unextended channel set this one was built from (itself if K=1)."""
        if self.extension_factor == 1:
            return self
        if self.base is None:
            raise ValueError("no base channel set recorded for this extension")
        return self.base


def child_seed(seed: int | np.random.SeedSequence, tag: int) -> np.random.SeedSequence:
    """Independent deterministic stream derived from a user seed."""
    if isinstance(seed, np.random.SeedSequence):
        # extend the spawn key rather than calling spawn(), which mutates the parent
        return np.random.SeedSequence(seed.entropy, spawn_key=(*seed.spawn_key, int(tag)))
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(tag)])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian entries with unit variance."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def random_channel_set(config: AntennaConfig, seed) -> ChannelSet:
    rng = _rng(seed)
    mats = {}
    for link in LINKS:
        i, j = int(link[0]), int(link[1])
        mats["h" + link] = complex_gaussian(rng, (config.rx(i), config.tx(j)))
    return ChannelSet(config=config, **mats)


def block_repeat(a: np.ndarray, k: int) -> np.ndarray:
    return np.kron(np.eye(k), a)


def extend(channels: ChannelSet, k: int) -> ChannelSet:
    """Block-diagonal ``k``-symbol extension of fixed channels."""
    if int(k) != k or k < 1:
        raise ValueError(f"extension factor must be a positive integer, got {k!r}")
    if channels.extension_factor != 1:
        raise ValueError("channels are already extended")
    if k == 1:
        return channels
    mats = {"h" + link: block_repeat(h, k) for link, h in channels.matrices().items()}
    return ChannelSet(
        config=channels.config,
        extension_factor=int(k),
        extension_kind="block_repeat",
        base=channels,
        **mats,
    )


def per_slot_channel_set(seed, k: int, varying: Iterable[str] | None = None) -> ChannelSet:
    """Single-antenna channels whose coefficients change over ``k`` slots.

    Links not listed in ``varying`` hold one coefficient for every slot. With
    ``k == 1`` the draw coincides with ``random_channel_set`` on ``(1,1,1,1)``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"slot count must be a positive integer, got {k!r}")
    varying = set(LINKS if varying is None else varying)
    unknown = varying - set(LINKS)
    if unknown:
        raise ValueError(f"unknown links {sorted(unknown)}")
    rng = _rng(seed)
    mats = {}
    for link in LINKS:
        n = k if link in varying else 1
        coeffs = complex_gaussian(rng, n)
        mats["h" + link] = np.diag(np.broadcast_to(coeffs, (k,)))
    if k == 1:
        return ChannelSet(config=AntennaConfig(1, 1, 1, 1), **mats)
    return ChannelSet(
        config=AntennaConfig(1, 1, 1, 1),
        extension_factor=int(k),
        extension_kind="per_slot_diagonal",
        **mats,
    )


def singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(a: np.ndarray, tol: float = RANK_TOL, floor: float = 0.0) -> int:
    """Number of singular values above ``tol * max(sigma_max, floor)``.

    ``floor`` supplies an absolute scale so that an all-but-vanishing matrix
    (e.g. zero-forced interference) is not promoted to full rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(a)
    if s.size == 0:
        return 0
    scale = max(s[0], floor)
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * scale))


def null_space(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``a``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    cols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.count_nonzero(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def range_basis(a: np.ndarray, tol: float = RANK_TOL, floor: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the column space of ``a`` at the rank tolerance."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    scale = max(s[0], floor) if s.size else 0.0
    rank = int(np.count_nonzero(s > tol * scale)) if scale > 0 else 0
    return u[:, :rank]


def orthogonal_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of an orthonormal ``basis``."""
    if basis.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    u, _, _ = np.linalg.svd(basis, full_matrices=True)
    return u[:, basis.shape[1]:]


def eig(a: np.ndarray, max_cond: float = DEFECTIVE_COND) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with a defectiveness check on the eigenvector matrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eig requires a square matrix")
    values, vectors = np.linalg.eig(a)
    cond = np.linalg.cond(vectors) if vectors.size else 1.0
    if not np.isfinite(cond) or cond > max_cond:
        raise DefectiveMatrixError(
            f"eigenvector matrix is numerically singular (cond={cond:.3g} > {max_cond:.0e}); "
            "matrix treated as defective"
        )
    return values, vectors


def unit_columns(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=0)
    if np.any(norms == 0):
        raise ValueError("cannot normalise a zero column")
    return v / norms


def random_orthonormal_extension(
    chosen: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    """``count`` isotropic random unit directions orthogonal to ``chosen``."""
    dim = chosen.shape[0]
    if count == 0:
        return np.zeros((dim, 0), dtype=complex)
    g = complex_gaussian(rng, (dim, count))
    if chosen.shape[1]:
        q, _ = np.linalg.qr(chosen)
        g = g - q @ (q.conj().T @ g)
    q2, _ = np.linalg.qr(g)
    return q2[:, :count]

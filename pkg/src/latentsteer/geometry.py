"""Latent-space geometry: vectors, hyperplanes, signed distances, unit directions.

A latent vector is a plain 1-D float64 ndarray. Everything here is a pure
function over immutable inputs; arrays handed back are marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, DimensionMismatchError

__all__ = [
    "Hyperplane",
    "DirectionMatrix",
    "as_latent",
    "sample_latents",
    "signed_distance",
    "unit_direction",
    "project_to_hyperplane",
    "cosine_similarity",
    "pairwise_cosines",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_latent(values, expected_dim: int | None = None) -> np.ndarray:
    """Coerce to a read-only float64 latent vector, checking shape and finiteness."""
    z = np.array(values, dtype=np.float64, copy=True)
    if z.ndim != 1:
        raise ValueError(f"latent vector must be 1-D, got shape {z.shape}")
    if z.size < 2:
        raise ValueError(f"latent dimension must be at least 2, got {z.size}")
    if not np.isfinite(z).all():
        raise ValueError("latent vector contains NaN or Inf entries")
    if expected_dim is not None and z.size != expected_dim:
        raise DimensionMismatchError(expected_dim, z.size, what="latent vector")
    return _frozen(z)


def sample_latents(count: int, dim: int, seed: int) -> np.ndarray:
    """Draw `count` latent vectors with i.i.d. standard-normal coordinates.

    Returns a read-only (count, dim) array; deterministic for a given seed.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    rng = np.random.default_rng(seed)
    return _frozen(rng.standard_normal((count, dim)))


@dataclass(frozen=True)
class Hyperplane:
    """Affine boundary {x : direction . x + intercept = 0}.

    Construction accepts any finite direction, including zero norm, so that
    degenerate fits remain representable; operations that need actual
    geometry (signed_distance, unit_direction) reject zero-norm directions.
    """

    direction: np.ndarray
    intercept: float

    def __post_init__(self):
        d = np.array(self.direction, dtype=np.float64, copy=True)
        if d.ndim != 1:
            raise ValueError(f"direction must be 1-D, got shape {d.shape}")
        if not np.isfinite(d).all():
            raise ValueError("direction contains NaN or Inf entries")
        object.__setattr__(self, "direction", _frozen(d))
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def dim(self) -> int:
        return self.direction.size

    def score(self, z: np.ndarray) -> float:
        """direction . z + intercept (positive on the direction side)."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.dim,):
            raise DimensionMismatchError(self.dim, z.size, what="latent vector")
        return float(self.direction @ z + self.intercept)


def signed_distance(z: np.ndarray, h: Hyperplane) -> float:
    """Signed distance from z to h, negative on the positive-score side."""
    norm = float(np.linalg.norm(h.direction))
    if norm == 0.0:
        raise DegenerateModelError("hyperplane direction has zero norm")
    return -h.score(z) / norm


def unit_direction(h: Hyperplane) -> np.ndarray:
    """Normal of h normalized to unit length (read-only)."""
    norm = float(np.linalg.norm(h.direction))
    if norm == 0.0:
        raise DegenerateModelError("hyperplane direction has zero norm")
    return _frozen(h.direction / norm)


def project_to_hyperplane(z: np.ndarray, h: Hyperplane) -> np.ndarray:
    """Move z along the unit normal by its signed distance, landing on h."""
    z = np.asarray(z, dtype=np.float64)
    return _frozen(z + signed_distance(z, h) * unit_direction(h))


def cosine_similarity(a, b) -> float:
    """a . b / (|a| |b|), clipped into [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(a.size, b.size, what="direction vector")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateModelError("cosine similarity of a zero vector is undefined")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def pairwise_cosines(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine matrix of the rows of `vectors`.

    Symmetrized, with the diagonal pinned to exactly 1.
    """
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError(f"expected a 2-D stack of vectors, got shape {v.shape}")
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateModelError("cosine matrix over a zero vector is undefined")
    unit = v / norms[:, None]
    m = unit @ unit.T
    m = np.clip((m + m.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(m, 1.0)
    return _frozen(m)


@dataclass(frozen=True)
class DirectionMatrix:
    """Stack of unit direction vectors, one row per attribute (or class)."""

    rows: np.ndarray
    kind: str  # "discrete" | "continuous"

    def __post_init__(self):
        if self.kind not in ("discrete", "continuous"):
            raise ValueError(f"kind must be 'discrete' or 'continuous', got {self.kind!r}")
        r = np.array(self.rows, dtype=np.float64, copy=True)
        if r.ndim != 2:
            raise ValueError(f"rows must be 2-D, got shape {r.shape}")
        norms = np.linalg.norm(r, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            worst = float(np.abs(norms - 1.0).max())
            raise ValueError(f"rows must be unit vectors within 1e-9 (worst deviation {worst:.3e})")
        object.__setattr__(self, "rows", _frozen(r))

    @classmethod
    def from_vectors(cls, vectors, kind: str) -> "DirectionMatrix":
        """Normalize a stack of direction vectors into a DirectionMatrix."""
        v = np.asarray(vectors, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"expected a 2-D stack of vectors, got shape {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateModelError("cannot normalize a zero direction vector")
        return cls(v / norms[:, None], kind)

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def combine(self, coefficients) -> np.ndarray:
        """Linear combination of the rows: coefficients @ rows."""
        c = np.asarray(coefficients, dtype=np.float64)
        if c.shape != (self.count,):
            raise DimensionMismatchError(self.count, c.size, what="coefficient vector")
        return c @ self.rows

"""Synthetic stand-in for a generator with known latent attribute structure.

A world owns one unit "ground truth" direction per binary/continuous
attribute and one per class of each multiclass attribute. The pairwise
cosines of those directions are dialed in exactly via a Cholesky factor of
the configured entanglement matrix, so tests can control how tangled the
attributes are.

Rendering is a strip of 8x8 blocks, one per attribute plus one texture
block: each attribute's value is encoded as its block's mean, and an oracle
reads the blocks back into labels (optionally flipping discrete labels with
a configured noise probability).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionMismatchError, LayoutError, WorldConfigError
from .models import BINARY, CONTINUOUS, MULTICLASS, AttributeSchema

__all__ = [
    "BLOCK_SIZE",
    "WorldConfig",
    "SyntheticWorld",
    "SyntheticImage",
    "AttributeLabels",
    "direction_slots",
    "build_world",
    "generate_image",
    "oracle_label",
]

BLOCK_SIZE = 8

PROFILE_LINEAR = "linear"
PROFILE_SIGMOID = "sigmoid"


@dataclass(frozen=True)
class WorldConfig:
    """Configuration of a synthetic world.

    entanglement is the target pairwise cosine matrix over all ground-truth
    directions (None means identity, i.e. fully disentangled attributes).
    label_noise is the probability of corrupting each discrete oracle label.
    """

    dim: int
    attributes: tuple[AttributeSchema, ...]
    entanglement: np.ndarray | None = None
    label_noise: float = 0.0
    continuous_profile: str = PROFILE_LINEAR
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise WorldConfigError(f"dim must be at least 2, got {self.dim}")
        attrs = tuple(self.attributes)
        if not attrs:
            raise WorldConfigError("a world needs at least one attribute")
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise WorldConfigError(f"duplicate attribute names: {names}")
        object.__setattr__(self, "attributes", attrs)
        if not (0.0 <= self.label_noise < 0.5):
            raise WorldConfigError(f"label_noise must lie in [0, 0.5), got {self.label_noise}")
        if self.continuous_profile not in (PROFILE_LINEAR, PROFILE_SIGMOID):
            raise WorldConfigError(
                f"continuous_profile must be 'linear' or 'sigmoid', got {self.continuous_profile!r}"
            )
        if self.entanglement is not None:
            e = np.array(self.entanglement, dtype=np.float64, copy=True)
            e.flags.writeable = False
            object.__setattr__(self, "entanglement", e)


def direction_slots(attributes: tuple[AttributeSchema, ...]) -> tuple[tuple[str, str | None], ...]:
    """(attribute name, class name or None) for every ground-truth direction."""
    slots: list[tuple[str, str | None]] = []
    for attr in attributes:
        if attr.kind == MULTICLASS:
            slots.extend((attr.name, c) for c in attr.classes)
        else:
            slots.append((attr.name, None))
    return tuple(slots)


@dataclass(frozen=True)
class SyntheticWorld:
    """Built world: realized ground-truth directions, intercepts, and layout."""

    config: WorldConfig
    directions: np.ndarray  # (n_slots, dim), unit rows
    intercepts: np.ndarray  # (n_slots,)
    slots: tuple[tuple[str, str | None], ...]

    def __post_init__(self):
        d = np.array(self.directions, dtype=np.float64, copy=True)
        c = np.array(self.intercepts, dtype=np.float64, copy=True)
        slots = tuple((str(a), None if k is None else str(k)) for a, k in self.slots)
        if d.shape != (len(slots), self.config.dim) or c.shape != (len(slots),):
            raise WorldConfigError("directions/intercepts do not match the slot layout")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise WorldConfigError("ground-truth directions must be unit norm")
        d.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "intercepts", c)
        object.__setattr__(self, "slots", slots)

    @property
    def latent_dim(self) -> int:
        return self.config.dim

    def slot_index(self, name: str, class_name: str | None = None) -> int:
        try:
            return self.slots.index((name, class_name))
        except ValueError:
            raise KeyError(f"no ground-truth direction for {(name, class_name)!r}") from None

    def direction_for(self, name: str, class_name: str | None = None) -> np.ndarray:
        return self.directions[self.slot_index(name, class_name)]

    def intercept_for(self, name: str, class_name: str | None = None) -> float:
        return float(self.intercepts[self.slot_index(name, class_name)])

    def realized_entanglement(self) -> np.ndarray:
        m = self.directions @ self.directions.T
        m.flags.writeable = False
        return m


@dataclass(frozen=True)
class SyntheticImage:
    """Horizontal strip of 8x8 blocks with pixel values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.array(self.pixels, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.shape[0] != BLOCK_SIZE or p.shape[1] % BLOCK_SIZE != 0:
            raise LayoutError(f"pixels must be ({BLOCK_SIZE}, {BLOCK_SIZE}*blocks), got {p.shape}")
        if p.min() < 0.0 or p.max() > 1.0:
            raise LayoutError("pixel values must lie in [0, 1]")
        p.flags.writeable = False
        object.__setattr__(self, "pixels", p)

    @property
    def block_count(self) -> int:
        return self.pixels.shape[1] // BLOCK_SIZE

    def block(self, i: int) -> np.ndarray:
        if not (0 <= i < self.block_count):
            raise LayoutError(f"block index {i} out of range for {self.block_count} blocks")
        return self.pixels[:, i * BLOCK_SIZE:(i + 1) * BLOCK_SIZE]

    def block_mean(self, i: int) -> float:
        return float(self.block(i).mean())


@dataclass(frozen=True)
class AttributeLabels:
    """Attribute readout: class name per discrete attribute, real per continuous."""

    discrete: Mapping[str, str] = field(default_factory=dict)
    continuous: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "discrete", dict(self.discrete))
        object.__setattr__(self, "continuous", dict(self.continuous))


def _orthonormal_basis(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic (count, dim) stack of orthonormal rows."""
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((dim, count))
    q, r = np.linalg.qr(m)
    # fix QR sign ambiguity so the basis is unique
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def build_world(cfg: WorldConfig) -> SyntheticWorld:
    """Realize ground-truth directions with the configured pairwise cosines.

    The Cholesky factor of the entanglement matrix is applied to a seeded
    orthonormal basis, which reproduces the target Gram matrix exactly (up
    to roundoff); rows are then re-normalized. Deterministic given cfg.seed.
    """
    slots = direction_slots(cfg.attributes)
    k = len(slots)
    if k > cfg.dim:
        raise WorldConfigError(
            f"{k} ground-truth directions need dim >= {k}, got dim={cfg.dim}"
        )
    if cfg.entanglement is None:
        ent = np.eye(k)
    else:
        ent = np.asarray(cfg.entanglement, dtype=np.float64)
    if ent.shape != (k, k):
        raise WorldConfigError(
            f"entanglement matrix must be {k}x{k} (one row per direction), got {ent.shape}"
        )
    if np.abs(ent - ent.T).max() > 1e-9:
        raise WorldConfigError("entanglement matrix must be symmetric")
    if np.abs(np.diag(ent) - 1.0).max() > 1e-9:
        raise WorldConfigError("entanglement matrix must have a unit diagonal")
    eigs = np.linalg.eigvalsh(ent)
    if eigs[0] < -1e-9:
        raise WorldConfigError(
            f"entanglement matrix is not positive semi-definite: eigenvalue {eigs[0]:.6g}"
        )
    try:
        chol = np.linalg.cholesky(ent)
    except np.linalg.LinAlgError:
        # PSD but singular at the boundary; a hair of jitter makes it factorable
        chol = np.linalg.cholesky(ent + 1e-12 * np.eye(k))

    basis = _orthonormal_basis(cfg.dim, k, cfg.seed)
    directions = chol @ basis
    directions /= np.linalg.norm(directions, axis=1)[:, None]

    realized = directions @ directions.T
    if np.abs(realized - ent).max() > 1e-6:
        raise WorldConfigError(
            "realized direction cosines deviate from the configured entanglement "
            f"by {np.abs(realized - ent).max():.3g}"
        )

    intercepts = np.zeros(k)
    for i, (name, class_name) in enumerate(slots):
        attr = next(a for a in cfg.attributes if a.name == name)
        if attr.kind == CONTINUOUS and cfg.continuous_profile == PROFILE_LINEAR:
            # center the raw value on the range midpoint
            intercepts[i] = 0.5 * (attr.lo + attr.hi)

    return SyntheticWorld(cfg, directions, intercepts, slots)


def _raw_score(world: SyntheticWorld, z: np.ndarray, slot: int) -> float:
    return float(world.directions[slot] @ z + world.intercepts[slot])


def _attribute_block_mean(world: SyntheticWorld, attr: AttributeSchema, z: np.ndarray) -> float:
    if attr.kind == BINARY:
        return 1.0 if _raw_score(world, z, world.slot_index(attr.name)) > 0.0 else 0.0
    if attr.kind == MULTICLASS:
        scores = [_raw_score(world, z, world.slot_index(attr.name, c)) for c in attr.classes]
        return float(np.argmax(scores)) / (len(attr.classes) - 1)
    raw = _raw_score(world, z, world.slot_index(attr.name))
    if world.config.continuous_profile == PROFILE_SIGMOID:
        return float(1.0 / (1.0 + np.exp(-raw)))
    value = min(max(raw, attr.lo), attr.hi)
    return (value - attr.lo) / (attr.hi - attr.lo)


def _texture_block(z: np.ndarray) -> np.ndarray:
    digest = hashlib.shake_256(z.tobytes()).digest(BLOCK_SIZE * BLOCK_SIZE)
    vals = np.frombuffer(digest, dtype=np.uint8).astype(np.float64) / 255.0
    return vals.reshape(BLOCK_SIZE, BLOCK_SIZE)


def generate_image(world: SyntheticWorld, z) -> SyntheticImage:
    """Render z: one constant block per attribute plus a hash-derived texture block."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.shape != (world.latent_dim,):
        raise DimensionMismatchError(world.latent_dim, z.size, what="latent vector")
    attrs = world.config.attributes
    pixels = np.empty((BLOCK_SIZE, BLOCK_SIZE * (len(attrs) + 1)))
    for i, attr in enumerate(attrs):
        pixels[:, i * BLOCK_SIZE:(i + 1) * BLOCK_SIZE] = _attribute_block_mean(world, attr, z)
    pixels[:, len(attrs) * BLOCK_SIZE:] = _texture_block(z)
    return SyntheticImage(pixels)


def oracle_label(world: SyntheticWorld, image: SyntheticImage, noise_seed: int,
                 label_noise: float | None = None) -> AttributeLabels:
    """Read block means back into labels, optionally corrupting discrete ones.

    With corruption probability p, each binary label is flipped and each
    multiclass label resampled uniformly among the other classes,
    independently per attribute, driven by noise_seed. Continuous values are
    returned as read. label_noise overrides the world's configured noise
    (pass 0.0 to judge noiselessly against a noisy world).
    """
    attrs = world.config.attributes
    if image.block_count != len(attrs) + 1:
        raise LayoutError(
            f"image has {image.block_count} blocks but the world renders {len(attrs) + 1}"
        )
    p = world.config.label_noise if label_noise is None else float(label_noise)
    rng = np.random.default_rng(noise_seed) if p > 0.0 else None

    discrete: dict[str, str] = {}
    continuous: dict[str, float] = {}
    for i, attr in enumerate(attrs):
        mean = image.block_mean(i)
        if attr.kind == BINARY:
            label = attr.classes[1] if mean > 0.5 else attr.classes[0]
            if rng is not None and rng.random() < p:
                label = attr.classes[0] if label == attr.classes[1] else attr.classes[1]
            discrete[attr.name] = label
        elif attr.kind == MULTICLASS:
            k = len(attr.classes)
            idx = int(np.clip(round(mean * (k - 1)), 0, k - 1))
            if rng is not None and rng.random() < p:
                others = [j for j in range(k) if j != idx]
                idx = others[int(rng.integers(len(others)))]
            discrete[attr.name] = attr.classes[idx]
        else:
            continuous[attr.name] = attr.lo + mean * (attr.hi - attr.lo)
    return AttributeLabels(discrete, continuous)

"""Single-step conditioning of latent vectors.

Given a latent vector, a set of desired attribute values, and a bundle of
fitted latent models, `condition` computes one combined update that moves
the vector into the desired attribute subspaces:

  * each mismatched binary attribute contributes a move along its
    hyperplane's unit normal that crosses the boundary and lands a margin
    `delta_margin` past it on the desired side;
  * each mismatched multiclass attribute contributes moves across pairwise
    class-difference hyperplanes toward the desired class, redirecting up to
    a bounded number of times when a third class captures the argmax;
  * each continuous attribute with a target contributes a move along the
    regression slope sized so the predicted value lands exactly on the
    target (in calibrated mode).

All contributions are summed and applied once. The "paper_literal" modes
preserve the uncorrected update formulas (negated crossing step, move length
not divided by the slope norm) so their failure to condition can be
measured against the corrected defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConditioningError, DegenerateModelError
from .geometry import DirectionMatrix, Hyperplane, as_latent, signed_distance, unit_direction
from .models import (
    BINARY,
    MULTICLASS,
    AttributeSchema,
    BinaryLatentClassifier,
    ModelBundle,
    MultiClassLatentClassifier,
)
from .world import AttributeLabels

__all__ = [
    "SIGN_CORRECTED",
    "SIGN_PAPER_LITERAL",
    "CAL_CALIBRATED",
    "CAL_PAPER_LITERAL",
    "ConditioningSpec",
    "ChooseVector",
    "DirectorConfig",
    "UpdateReport",
    "latent_labels",
    "choose_vector",
    "condition",
]

SIGN_CORRECTED = "corrected"
SIGN_PAPER_LITERAL = "paper_literal"
CAL_CALIBRATED = "calibrated"
CAL_PAPER_LITERAL = "paper_literal"


@dataclass(frozen=True)
class ConditioningSpec:
    """Desired attribute values; attributes absent from both maps are left alone."""

    discrete: Mapping[str, str] = field(default_factory=dict)
    continuous: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "discrete", {str(k): str(v) for k, v in self.discrete.items()})
        object.__setattr__(self, "continuous", {str(k): float(v) for k, v in self.continuous.items()})
        overlap = set(self.discrete) & set(self.continuous)
        if overlap:
            raise ConditioningError(f"attributes targeted as both discrete and continuous: {sorted(overlap)}")

    @property
    def empty(self) -> bool:
        return not self.discrete and not self.continuous


@dataclass(frozen=True)
class ChooseVector:
    """Indicator per discrete attribute: 1 where a specified target mismatches."""

    names: tuple[str, ...]
    bits: tuple[int, ...]

    def __post_init__(self):
        names = tuple(self.names)
        bits = tuple(int(b) for b in self.bits)
        if len(names) != len(bits):
            raise ValueError("names and bits must have equal length")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "bits", bits)

    @property
    def any_set(self) -> bool:
        return any(self.bits)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.names, self.bits))


@dataclass(frozen=True)
class DirectorConfig:
    """Knobs of the conditioning step.

    delta_margin is the overshoot past a crossed hyperplane, in
    signed-distance units. sign_convention selects the corrected crossing
    update or the literal (non-crossing) one for binary attributes.
    continuous_calibration selects whether continuous moves are divided by
    the slope norm (exact target landing) or used raw.
    """

    delta_margin: float = 0.5
    sign_convention: str = SIGN_CORRECTED
    continuous_calibration: str = CAL_CALIBRATED
    multiclass_max_redirects: int = 3

    def __post_init__(self):
        if not (self.delta_margin > 0 and np.isfinite(self.delta_margin)):
            raise ValueError(f"delta_margin must be positive, got {self.delta_margin}")
        if self.sign_convention not in (SIGN_CORRECTED, SIGN_PAPER_LITERAL):
            raise ValueError(f"unknown sign_convention {self.sign_convention!r}")
        if self.continuous_calibration not in (CAL_CALIBRATED, CAL_PAPER_LITERAL):
            raise ValueError(f"unknown continuous_calibration {self.continuous_calibration!r}")
        if self.multiclass_max_redirects < 1:
            raise ValueError("multiclass_max_redirects must be at least 1")


@dataclass(frozen=True)
class UpdateReport:
    """Everything about one conditioning step, before and after."""

    z: np.ndarray
    z_prime: np.ndarray
    labels_before: AttributeLabels
    labels_after: AttributeLabels
    choose: ChooseVector
    deltas: Mapping[str, float]
    distances_before: Mapping[str, float]
    distances_after: Mapping[str, float]
    multiclass_moves: Mapping[str, int]
    config: DirectorConfig

    def __post_init__(self):
        object.__setattr__(self, "deltas", dict(self.deltas))
        object.__setattr__(self, "distances_before", dict(self.distances_before))
        object.__setattr__(self, "distances_after", dict(self.distances_after))
        object.__setattr__(self, "multiclass_moves", dict(self.multiclass_moves))

    @property
    def moved(self) -> bool:
        return not np.array_equal(self.z, self.z_prime)


def latent_labels(bundle: ModelBundle, z) -> AttributeLabels:
    """Predicted class per discrete attribute and value per continuous one."""
    if bundle.schema:
        z = as_latent(z, bundle.latent_dim)
    discrete: dict[str, str] = {}
    continuous: dict[str, float] = {}
    for attr in bundle.schema:
        model = bundle.model_for(attr.name)
        if attr.is_discrete:
            discrete[attr.name] = model.predict(z)
        else:
            continuous[attr.name] = model.predict(z)
    return AttributeLabels(discrete, continuous)


def choose_vector(targets: Mapping[str, str], current: Mapping[str, str]) -> ChooseVector:
    """1 per attribute whose specified target differs from its current class."""
    unknown = sorted(set(targets) - set(current))
    if unknown:
        raise ConditioningError(
            f"targets name unknown attributes {unknown}; known: {sorted(current)}"
        )
    names = tuple(current)
    bits = tuple(
        1 if (name in targets and targets[name] != current[name]) else 0
        for name in names
    )
    return ChooseVector(names, bits)


def _validate_spec(spec: ConditioningSpec, schema: tuple[AttributeSchema, ...]) -> None:
    by_name = {a.name: a for a in schema}
    for name, cls in spec.discrete.items():
        attr = by_name.get(name)
        if attr is None:
            raise ConditioningError(
                f"unknown attribute {name!r}; legal attributes: {sorted(by_name)}"
            )
        if not attr.is_discrete:
            raise ConditioningError(f"attribute {name!r} is continuous; give it a numeric target")
        if cls not in attr.classes:
            raise ConditioningError(
                f"unknown class {cls!r} for attribute {name!r}; legal classes: {list(attr.classes)}"
            )
    for name, value in spec.continuous.items():
        attr = by_name.get(name)
        if attr is None:
            raise ConditioningError(
                f"unknown attribute {name!r}; legal attributes: {sorted(by_name)}"
            )
        if attr.is_discrete:
            raise ConditioningError(
                f"attribute {name!r} is discrete; legal classes: {list(attr.classes)}"
            )
        if not (attr.lo <= value <= attr.hi):
            raise ConditioningError(
                f"target {value} for attribute {name!r} outside its range [{attr.lo}, {attr.hi}]"
            )


def _binary_coefficient(z: np.ndarray, model: BinaryLatentClassifier, desired: str,
                        cfg: DirectorConfig) -> float:
    """Step length along the hyperplane's unit normal for a chosen binary attribute."""
    s = signed_distance(z, model.hyperplane)
    if cfg.sign_convention == SIGN_PAPER_LITERAL:
        return -(s + cfg.delta_margin)
    # crossing step: land delta_margin past the boundary on the desired side.
    # sigma equals sign(s) except exactly on the boundary, where the desired
    # side disambiguates.
    sigma = 1.0 if desired == model.positive_class else -1.0
    return s + sigma * cfg.delta_margin


def _multiclass_move(z: np.ndarray, model: MultiClassLatentClassifier, desired: str,
                     cfg: DirectorConfig) -> tuple[np.ndarray, int, float, Hyperplane]:
    """Accumulated move toward `desired`, the move count, and the first crossing geometry."""
    z_work = np.array(z, dtype=np.float64)
    moves = 0
    first_distance = 0.0
    first_plane: Hyperplane | None = None
    for _ in range(cfg.multiclass_max_redirects):
        current = model.predict(z_work)
        if current == desired:
            break
        h = model.pairwise_hyperplane(desired, current)
        if float(np.linalg.norm(h.direction)) == 0.0:
            raise DegenerateModelError(
                f"classes {desired!r} and {current!r} share identical weights"
            )
        s = signed_distance(z_work, h)
        if first_plane is None:
            first_plane = h
            first_distance = s
        # always toward the desired side; sign_convention only affects binary moves
        z_work = z_work + (s + cfg.delta_margin) * unit_direction(h)
        moves += 1
    if first_plane is None:
        first_plane = Hyperplane(np.ones(z.size), 0.0)  # unused: no move happened
    return z_work - z, moves, first_distance, first_plane


def condition(z, spec: ConditioningSpec, bundle: ModelBundle,
              cfg: DirectorConfig = DirectorConfig()) -> UpdateReport:
    """Apply one combined conditioning step to z.

    Computes current labels, selects mismatched discrete attributes via the
    choose vector, sizes one move per attribute, sums them, and applies the
    sum once. Unspecified attributes never contribute. Returns a report with
    labels, signed distances, and continuous deltas before and after.
    """
    if bundle.schema:
        z = as_latent(z, bundle.latent_dim)
    else:
        z = as_latent(z)
    _validate_spec(spec, bundle.schema)

    before = latent_labels(bundle, z)
    choose = choose_vector(spec.discrete, before.discrete)
    chosen = choose.as_dict()

    # the combined step is coeffs_d @ D_c + coeffs_r @ D_r (rows are unit
    # directions); multiclass moves, which may chain redirects, contribute
    # as whole vectors
    discrete_rows: list[np.ndarray] = []
    discrete_coeffs: list[float] = []
    continuous_rows: list[np.ndarray] = []
    continuous_coeffs: list[float] = []
    extra_moves: list[np.ndarray] = []
    deltas: dict[str, float] = {}
    dist_before: dict[str, float] = {}
    dist_after_planes: dict[str, Hyperplane] = {}
    mc_moves: dict[str, int] = {}

    for attr in bundle.schema:
        model = bundle.model_for(attr.name)
        if attr.kind == BINARY:
            dist_before[attr.name] = signed_distance(z, model.hyperplane)
            dist_after_planes[attr.name] = model.hyperplane
            if chosen.get(attr.name):
                discrete_rows.append(unit_direction(model.hyperplane))
                discrete_coeffs.append(
                    _binary_coefficient(z, model, spec.discrete[attr.name], cfg)
                )
        elif attr.kind == MULTICLASS:
            if chosen.get(attr.name):
                move, moves, s0, plane0 = _multiclass_move(
                    z, model, spec.discrete[attr.name], cfg
                )
                mc_moves[attr.name] = moves
                dist_before[attr.name] = s0
                dist_after_planes[attr.name] = plane0
                if moves:
                    extra_moves.append(move)
        else:
            if attr.name in spec.continuous:
                slope = model.line.direction
                norm = float(np.linalg.norm(slope))
                if norm == 0.0:
                    raise DegenerateModelError(
                        f"regressor for attribute {attr.name!r} has a zero slope"
                    )
                delta = spec.continuous[attr.name] - before.continuous[attr.name]
                deltas[attr.name] = delta
                if delta != 0.0:
                    continuous_rows.append(slope / norm)
                    continuous_coeffs.append(
                        delta / norm if cfg.continuous_calibration == CAL_CALIBRATED else delta
                    )

    update = np.zeros_like(z)
    moved = False
    if discrete_rows:
        d_c = DirectionMatrix(np.stack(discrete_rows), "discrete")
        update = update + d_c.combine(discrete_coeffs)
        moved = True
    if continuous_rows:
        d_r = DirectionMatrix(np.stack(continuous_rows), "continuous")
        update = update + d_r.combine(continuous_coeffs)
        moved = True
    for move in extra_moves:
        update = update + move
        moved = True

    if moved:
        z_prime = z + update
        z_prime.flags.writeable = False
    else:
        z_prime = z  # bit-exact no-op

    after = latent_labels(bundle, z_prime)
    dist_after = {
        name: signed_distance(z_prime, plane) for name, plane in dist_after_planes.items()
    }
    return UpdateReport(
        z=z,
        z_prime=z_prime,
        labels_before=before,
        labels_after=after,
        choose=choose,
        deltas=deltas,
        distances_before=dist_before,
        distances_after=dist_after,
        multiclass_moves=mc_moves,
        config=cfg,
    )

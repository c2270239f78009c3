"""Geometric supports, target specifications and envelope constructions.

All model types are immutable after construction and safe to share across
threads. Validation is probe-based (the density is an arbitrary expression,
so nothing is symbolic): a fixed-seed stream supplies the probe points, which
keeps every validation decision reproducible.

A bounded box is required even for targets whose support is unbounded; the
sampler then draws from the renormalized truncation of the density to the
box. ``validate_target(..., estimate_truncation=True)`` attaches a plain
Monte Carlo estimate of the mass lost to truncation (meaningful when the
field is a normalized density).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import expression
from .expression import Node, VarOrder
from .randomness import make_stream, uniform_box_block

__all__ = [
    "Box",
    "box_from_text",
    "ScalarField",
    "TargetSpec",
    "PiecewiseUniformProposal",
    "RunMetadata",
    "SampleBatch",
    "ModelValidationError",
    "EnvelopeViolation",
    "validate_target",
    "build_piecewise_proposal",
    "MAX_GRID_POINTS",
]

# fixed seed for validation probes: decisions must not vary run to run
_VALIDATION_SEED = 0x56414C4944415445

MAX_GRID_POINTS = 1 << 22


class ModelValidationError(ValueError):
    """A model input failed probe validation."""


class EnvelopeViolation(ModelValidationError):
    """The supplied envelope constant is below the field somewhere."""

    def __init__(self, point: np.ndarray, value: float, bound: float):
        self.point = np.asarray(point, dtype=np.float64)
        self.value = value
        self.bound = bound
        coords = ", ".join(repr(float(c)) for c in self.point)
        super().__init__(
            f"envelope constant {bound!r} violated: field value {value!r} at ({coords})"
        )


@dataclass(frozen=True)
class Box:
    """Axis-aligned hyper-rectangle with finite positive volume."""

    bounds: tuple[tuple[float, float], ...]

    def __init__(self, bounds: Sequence[Sequence[float]]):
        norm = tuple((float(lo), float(hi)) for lo, hi in bounds)
        object.__setattr__(self, "bounds", norm)
        if not norm:
            raise ValueError("box needs at least one dimension")
        for i, (lo, hi) in enumerate(norm):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"dimension {i}: bounds must be finite, got {lo}:{hi}")
            if not lo < hi:
                raise ValueError(f"dimension {i}: lower bound must be below upper, got {lo}:{hi}")

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds], dtype=np.float64)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds], dtype=np.float64)

    @cached_property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @cached_property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.bounds)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)


def box_from_text(text: str) -> Box:
    """Parse the CLI box syntax "lo:hi,lo:hi,..." (one pair per dimension)."""
    pairs = []
    for i, part in enumerate(text.split(",")):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ValueError(f"dimension {i}: expected lo:hi, got {part!r}")
        try:
            pairs.append((float(pieces[0]), float(pieces[1])))
        except ValueError:
            raise ValueError(f"dimension {i}: bounds must be numbers, got {part!r}") from None
    return Box(pairs)


@dataclass(frozen=True)
class ScalarField:
    """An expression together with the variable order that evaluates it."""

    expr: Node
    vars: VarOrder

    def __post_init__(self):
        loose = expression.free_vars(self.expr) - set(self.vars.names)
        if loose:
            raise ValueError(f"expression uses undeclared variables: {sorted(loose)}")

    @classmethod
    def from_text(cls, text: str, variables: VarOrder | Sequence[str]) -> "ScalarField":
        order = variables if isinstance(variables, VarOrder) else VarOrder(variables)
        return cls(expression.parse(text, order), order)

    @property
    def dims(self) -> int:
        return self.vars.dims

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return expression.evaluate_batch(self.expr, points)

    def at(self, point: Sequence[float]) -> float:
        return expression.evaluate(self.expr, point)

    def text(self) -> str:
        return expression.to_text(self.expr)


@dataclass(frozen=True)
class TargetSpec:
    """Everything a rejection sampler consumes: field, support, envelope."""

    field: ScalarField
    support: Box
    bound_c: float
    truncation_estimate: float | None = None

    def __post_init__(self):
        if self.field.dims != self.support.dims:
            raise ValueError(
                f"field has {self.field.dims} variables but box has {self.support.dims}"
            )
        if not (self.bound_c > 0.0 and math.isfinite(self.bound_c)):
            raise ValueError(f"envelope constant must be positive and finite: {self.bound_c!r}")


@dataclass(frozen=True)
class RunMetadata:
    """Provenance of one sampling run."""

    seed: int
    requested_n: int
    proposals_drawn: int
    accepted: int
    acceptance_rate: float
    wall_time_ms: float
    bound_c: float

    def __post_init__(self):
        if self.accepted > self.proposals_drawn:
            raise ValueError("accepted count cannot exceed proposals drawn")
        if not 0.0 <= self.acceptance_rate <= 1.0:
            raise ValueError(f"acceptance rate out of range: {self.acceptance_rate!r}")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Accepted draws (acceptance order) plus run provenance."""

    dims: int
    points: np.ndarray  # (accepted, dims) float64
    meta: RunMetadata

    def __post_init__(self):
        if self.points.shape != (self.meta.accepted, self.dims):
            raise ValueError(
                f"points shape {self.points.shape} inconsistent with "
                f"accepted={self.meta.accepted}, dims={self.dims}"
            )


def _default_grid(dims: int) -> int:
    """Largest odd per-dimension grid with at most ~2^18 total points,
    clamped to [5, 1025]. Odd counts place a point at the box center."""
    g = int((1 << 18) ** (1.0 / dims))
    if g % 2 == 0:
        g -= 1
    return max(5, min(g, 1025))


def validate_target(
    field: ScalarField,
    box: Box,
    bound_c: float | None = None,
    *,
    probes: int = 1000,
    safety: float = 1.2,
    estimate_truncation: bool = False,
) -> TargetSpec:
    """Probe-validate a target and fix its envelope constant.

    The field must be finite and nonnegative at every probe point. A supplied
    bound_c is checked against the probes (EnvelopeViolation reports the
    offending point and value); without one, a grid maximum with the given
    safety factor is estimated and stored.
    """
    if field.dims != box.dims:
        raise ValueError(f"field has {field.dims} variables but box has {box.dims}")
    stream = make_stream(_VALIDATION_SEED)
    pts = uniform_box_block(stream, box, probes)
    vals = field(pts)

    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ModelValidationError(
            f"field is not finite at probe point {pts[i].tolist()}: {vals[i]!r}"
        )
    neg = vals < 0.0
    if np.any(neg):
        i = int(np.argmax(neg))
        raise ModelValidationError(
            f"field is negative at probe point {pts[i].tolist()}: {vals[i]!r}"
        )

    if bound_c is None:
        from .samplers import estimate_bound

        bound_c = estimate_bound(field, box, _default_grid(box.dims), safety=safety)
        if not bound_c > 0.0:
            raise ModelValidationError(
                "estimated envelope is not positive; the field vanishes on the grid"
            )
    else:
        bound_c = float(bound_c)
        if not bound_c > 0.0:
            raise ModelValidationError(f"envelope constant must be positive: {bound_c!r}")
        over = vals > bound_c
        if np.any(over):
            i = int(np.argmax(over))
            raise EnvelopeViolation(pts[i], float(vals[i]), bound_c)

    truncation = None
    if estimate_truncation:
        # plain-MC mass inside the box; meaningful for normalized densities
        extra = uniform_box_block(stream, box, 100_000)
        inside = box.volume * float(np.mean(field(extra)))
        truncation = 1.0 - inside

    return TargetSpec(field, box, bound_c, truncation)


@dataclass(frozen=True, eq=False)
class PiecewiseUniformProposal:
    """Histogram-shaped envelope: constant height per cell of a regular
    partition. Cells with zero height are never proposed."""

    box: Box
    bins: tuple[int, ...]
    heights: np.ndarray  # shape == bins
    cell_volume: float
    total_mass: float
    # flat (C-order) tables over positive-mass cells, for inverse-CDF lookup
    positive_cells: np.ndarray = dataclass_field(repr=False, default=None)
    cumulative: np.ndarray = dataclass_field(repr=False, default=None)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.bins))

    @property
    def masses(self) -> np.ndarray:
        return self.heights * self.cell_volume

    def cell_lower(self, flat_index: np.ndarray) -> np.ndarray:
        """Lower corner of each flat (C-order) cell index; shape (k, dims)."""
        idx = np.unravel_index(np.asarray(flat_index), self.bins)
        steps = self.box.widths / np.asarray(self.bins, dtype=np.float64)
        return self.box.lower + np.stack(idx, axis=-1) * steps

    @property
    def cell_widths(self) -> np.ndarray:
        return self.box.widths / np.asarray(self.bins, dtype=np.float64)


def build_piecewise_proposal(
    field: ScalarField,
    box: Box,
    bins_per_dim: int | Sequence[int],
    *,
    refinement: int = 8,
    safety: float = 1.2,
) -> PiecewiseUniformProposal:
    """Histogram envelope from per-cell grid maxima.

    Each cell is refined ``refinement`` times per dimension (grid includes
    the cell corners) and its height is the grid maximum times ``safety``.
    Cells whose grid maximum is zero get height zero and are never proposed.
    """
    if field.dims != box.dims:
        raise ValueError(f"field has {field.dims} variables but box has {box.dims}")
    d = box.dims
    bins = (
        (int(bins_per_dim),) * d
        if isinstance(bins_per_dim, int)
        else tuple(int(b) for b in bins_per_dim)
    )
    if len(bins) != d:
        raise ValueError(f"need {d} bin counts, got {len(bins)}")
    if any(b < 1 for b in bins):
        raise ValueError(f"bins per dimension must be >= 1: {bins}")
    cells = math.prod(bins)
    if cells > MAX_GRID_POINTS:
        raise ValueError(f"partition has {cells} cells; limit is {MAX_GRID_POINTS}")

    # per-dimension refined coordinates, shaped (bins_i, refinement+1)
    axes = []
    for i, b in enumerate(bins):
        lo, hi = box.bounds[i]
        step = (hi - lo) / b
        offsets = np.arange(refinement + 1, dtype=np.float64) / refinement * step
        axes.append((lo + np.arange(b, dtype=np.float64)[:, None] * step + offsets).ravel())

    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = field(pts).reshape(tuple(b * (refinement + 1) for b in bins))
    shaped = vals.reshape(tuple(x for b in bins for x in (b, refinement + 1)))
    cell_max = shaped.max(axis=tuple(range(1, 2 * d, 2)))

    heights = np.where(cell_max > 0.0, cell_max * safety, 0.0)
    cell_volume = math.prod((hi - lo) / b for (lo, hi), b in zip(box.bounds, bins))
    masses_flat = heights.ravel() * cell_volume
    total = float(masses_flat.sum())
    if not total > 0.0:
        raise ModelValidationError("field vanishes on the whole partition grid")

    positive = np.nonzero(masses_flat > 0.0)[0]
    cum = np.cumsum(masses_flat[positive])
    cum /= cum[-1]
    cum[-1] = 1.0

    return PiecewiseUniformProposal(
        box=box,
        bins=bins,
        heights=heights,
        cell_volume=cell_volume,
        total_mass=total,
        positive_cells=positive,
        cumulative=cum,
    )

"""Discrete immersed shapes and their first order geometry.

A Shape is a sampled immersion of a curve (open chain or closed loop) or a surface patch (grid) in 2D or 3D.
Shapes are immutable: every transformation returns a new Shape.
"""
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from motioncast.general_utils.exceptions import (
    DegenerateShapeError,
    IncompatibleShapesError,
    UnsupportedTopologyError,
)
from motioncast.geometry.discrete_geometry import (
    MeshTopology,
    element_centers,
    element_volumes,
    mean_curvature,
    tangents,
    triangle_areas,
)

Topology = Literal["chain", "loop", "grid"]


@dataclass(frozen=True, eq=False)
class Shape:
    """Sampled immersion of a curve or surface patch.

    :param points: Array-like of shape (n, m) with m in {2, 3}.
    :param topology: "chain" (open curve), "loop" (closed curve) or "grid" (rows x cols surface patch).
    :param rows: Number of grid rows. Required for grids, ignored otherwise.
    :param cols: Number of grid columns. Required for grids, ignored otherwise.
    :param region_tags: Optional symbolic tag per point (e.g. "hands", "feet").
    """

    points: np.ndarray
    topology: Topology = "chain"
    rows: Optional[int] = None
    cols: Optional[int] = None
    region_tags: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise DegenerateShapeError(
                f"Points must have shape (n, 2) or (n, 3), got {points.shape}."
            )
        if not np.all(np.isfinite(points)):
            raise DegenerateShapeError("Points must be finite.")
        n = points.shape[0]
        if n < 3:
            raise DegenerateShapeError(f"A shape needs at least 3 points, got {n}.")
        if self.topology not in ("chain", "loop", "grid"):
            raise UnsupportedTopologyError(f"Unknown topology '{self.topology}'.")
        if self.topology == "grid":
            if self.rows is None or self.cols is None:
                raise DegenerateShapeError("Grid shapes need rows and cols.")
            if self.rows < 2 or self.cols < 2 or self.rows * self.cols != n:
                raise DegenerateShapeError(
                    f"Grid of {self.rows} x {self.cols} does not fit {n} points."
                )
        else:
            object.__setattr__(self, "rows", None)
            object.__setattr__(self, "cols", None)
        if self.region_tags is not None:
            tags = tuple(str(tag) for tag in self.region_tags)
            if len(tags) != n:
                raise DegenerateShapeError(
                    f"Expected {n} region tags, got {len(tags)}."
                )
            object.__setattr__(self, "region_tags", tags)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        self._check_adjacent_points()

    def _check_adjacent_points(self) -> None:
        if self.topology == "grid":
            grid = self.points.reshape(self.rows, self.cols, self.dim)
            gaps = np.concatenate(
                [
                    np.linalg.norm(np.diff(grid, axis=0), axis=-1).ravel(),
                    np.linalg.norm(np.diff(grid, axis=1), axis=-1).ravel(),
                ]
            )
        else:
            gaps = element_volumes(self.points[None], self.mesh)[0]
        if np.any(gaps <= 0):
            raise DegenerateShapeError("Adjacent sample points coincide.")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @cached_property
    def mesh(self) -> MeshTopology:
        return MeshTopology(self.topology, self.n, self.rows, self.cols)

    def with_points(self, points: np.ndarray) -> "Shape":
        """Return a shape with the same sampling topology and tags but new point positions."""
        return Shape(points, self.topology, self.rows, self.cols, self.region_tags)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"topology": self.topology}
        if self.topology == "grid":
            payload["rows"] = self.rows
            payload["cols"] = self.cols
        payload["points"] = self.points.tolist()
        if self.region_tags is not None:
            payload["region_tags"] = list(self.region_tags)
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Shape":
        return cls(
            points=np.asarray(payload["points"], dtype=float),
            topology=payload.get("topology", "chain"),
            rows=payload.get("rows"),
            cols=payload.get("cols"),
            region_tags=payload.get("region_tags"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Shape":
        return cls.from_dict(json.loads(text))


def check_compatible(a: Shape, b: Shape) -> None:
    """Raise unless both shapes can be compared point by point."""
    if a.topology != b.topology:
        raise IncompatibleShapesError(
            f"Topologies differ: {a.topology} vs {b.topology}."
        )
    if a.n != b.n or a.dim != b.dim:
        raise IncompatibleShapesError(
            f"Shapes have different sizes: {a.points.shape} vs {b.points.shape}."
        )
    if a.topology == "grid" and (a.rows, a.cols) != (b.rows, b.cols):
        raise IncompatibleShapesError("Grid dimensions differ.")


@dataclass(frozen=True)
class ShapeGeometry:
    """First order geometry of a shape.

    :param edge_or_cell_volumes: Edge lengths of curves or cell areas of grids, one per element.
    :param tangents: First difference vectors per point. Grids carry two per point (columns, rows).
    :param mean_curvature: Curvature estimate per point.
    :param total_volume: Sum of the element volumes.
    """

    edge_or_cell_volumes: np.ndarray
    tangents: np.ndarray
    mean_curvature: np.ndarray
    total_volume: float


def compute_geometry(shape: Shape) -> ShapeGeometry:
    batch = shape.points[None]
    volumes = element_volumes(batch, shape.mesh)[0]
    if np.any(volumes <= 0):
        raise DegenerateShapeError("Shape has an element of zero volume.")
    if shape.topology == "grid" and np.any(triangle_areas(batch, shape.mesh) <= 0):
        raise DegenerateShapeError("Grid has a degenerate triangle.")
    return ShapeGeometry(
        edge_or_cell_volumes=volumes,
        tangents=tangents(batch, shape.mesh)[0],
        mean_curvature=mean_curvature(batch, shape.mesh)[0],
        total_volume=float(volumes.sum()),
    )


def resample(shape: Shape, nb_points: int) -> Shape:
    """Resample a curve to points uniformly spaced by arc length.

    Region tags are carried over from the original point that is nearest in arc length.
    :param shape: Open chain or closed loop.
    :param nb_points: Number of output points, at least 3.
    :return: Resampled shape with the same topology.
    """
    if shape.topology == "grid":
        raise UnsupportedTopologyError("Only chains and loops can be resampled.")
    if nb_points < 3:
        raise DegenerateShapeError(f"Cannot resample to {nb_points} points.")

    points = shape.points
    closed = shape.topology == "loop"
    polyline = np.vstack([points, points[:1]]) if closed else points
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(polyline, axis=0), axis=1))])
    total = arc[-1]
    if closed:
        targets = np.arange(nb_points) * total / nb_points
    else:
        targets = np.linspace(0.0, total, nb_points)
    new_points = np.column_stack(
        [np.interp(targets, arc, polyline[:, axis]) for axis in range(shape.dim)]
    )

    tags = None
    if shape.region_tags is not None:
        vertex_arc = arc[: shape.n]
        gaps = np.abs(targets[:, None] - vertex_arc[None, :])
        if closed:
            gaps = np.minimum(gaps, total - gaps)
        nearest = np.argmin(gaps, axis=1)
        tags = tuple(shape.region_tags[i] for i in nearest)
    return Shape(new_points, shape.topology, region_tags=tags)


@dataclass(frozen=True)
class TransformRecord:
    """Translation followed by uniform scaling: y = (x + translation) * scale."""

    translation: np.ndarray
    scale: float = 1.0

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.translation == 0) and self.scale == 1.0)

    def apply_transform(self, shape: Shape) -> Shape:
        return shape.with_points((shape.points + self.translation) * self.scale)

    def invert_transform(self, shape: Shape) -> Shape:
        return shape.with_points(shape.points / self.scale - self.translation)


def centroid_and_total_volume(shape: Shape) -> Tuple[np.ndarray, float]:
    """Volume weighted centroid and total volume of a shape."""
    batch = shape.points[None]
    volumes = element_volumes(batch, shape.mesh)[0]
    total = float(volumes.sum())
    if total <= 0:
        raise DegenerateShapeError("Shape has zero total volume.")
    centers = element_centers(batch, shape.mesh)[0]
    return volumes @ centers / total, total


def centroid_and_scale_normalize(
    shape: Shape, normalize_translation: bool = True, normalize_scale: bool = True
) -> Tuple[Shape, TransformRecord]:
    """Move the volume weighted centroid to the origin and scale the shape to unit total volume.

    Shapes that are already normalized get an exact identity record, so normalizing twice equals normalizing once.
    """
    centroid, total = centroid_and_total_volume(shape)
    translation = np.zeros(shape.dim)
    if normalize_translation and np.max(np.abs(centroid)) > 1e-12:
        translation = -centroid
    scale = 1.0
    if normalize_scale and abs(total - 1.0) > 1e-12:
        scale = float(total ** (-1.0 / shape.mesh.volume_exponent))
    record = TransformRecord(translation=translation, scale=scale)
    if record.is_identity:
        return shape, record
    return record.apply_transform(shape), record


@dataclass(frozen=True)
class DeformationField:
    """Per point deformation vectors attached to a shape with n points."""

    vectors: np.ndarray
    n: Optional[int] = field(default=None)

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2:
            raise IncompatibleShapesError("Deformation vectors must have shape (n, m).")
        if self.n is not None and vectors.shape[0] != self.n:
            raise IncompatibleShapesError(
                f"Deformation field has {vectors.shape[0]} vectors, shape has {self.n} points."
            )
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "n", vectors.shape[0])


def stack_points(shapes: List[Shape]) -> np.ndarray:
    """Stack the points of compatible shapes into a (len(shapes), n, m) array."""
    for shape in shapes[1:]:
        check_compatible(shapes[0], shape)
    return np.stack([shape.points for shape in shapes])

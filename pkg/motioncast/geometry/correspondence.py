"""Quotient out similitudes and sampling reparameterizations before shapes are compared.

The alignment pipeline resamples curves to a common size, normalizes translation and scale, searches the
discrete reparameterizations of closed loops (cyclic shifts and orientation flips) and fits the optimal proper
rotation with the Kabsch algorithm.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from motioncast.config.geometry_config import AlignmentConfig
from motioncast.general_utils.exceptions import IncompatibleShapesError
from motioncast.geometry.shapes import (
    Shape,
    TransformRecord,
    centroid_and_scale_normalize,
    check_compatible,
    resample,
)

_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Reparameterization:
    """Discrete reparameterization of a sampled curve.

    Point order is first reversed (if flip is set) and then rolled by shift, so that point i of the result is
    point (i - shift) mod n of the (reversed) input.
    """

    shift: int = 0
    flip: bool = False

    @property
    def mode(self) -> str:
        if self.flip and self.shift:
            return "orientation-flip+cyclic-shift"
        if self.flip:
            return "orientation-flip"
        if self.shift:
            return "cyclic-shift"
        return "identity"

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.flip:
            values = values[::-1]
        return np.roll(values, self.shift, axis=0)

    def apply_to_shape(self, shape: Shape) -> Shape:
        if self.mode == "identity":
            return shape
        tags = None
        if shape.region_tags is not None:
            tags = tuple(self.apply(np.asarray(shape.region_tags, dtype=object)).tolist())
        return Shape(self.apply(shape.points), shape.topology, region_tags=tags)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "shift": self.shift, "flip": self.flip}


@dataclass(frozen=True)
class CorrespondenceResult:
    """Outcome of align.

    :param shape_a: Normalized first shape.
    :param shape_b: Normalized second shape, reparameterized and rotated onto shape_a.
    :param rotation: Proper rotation R with R a_i close to b_i; shape_b holds R^T applied to every point.
    :param reparam: Reparameterization applied to the second shape.
    :param residual: Mean pointwise distance after alignment.
    :param transform_a: Normalization applied to the first shape (after resampling).
    :param transform_b: Normalization applied to the second shape (after resampling).
    """

    shape_a: Shape
    shape_b: Shape
    rotation: np.ndarray
    reparam: Reparameterization
    residual: float
    transform_a: TransformRecord
    transform_b: TransformRecord


def _kabsch_batch(points_a: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Optimal proper rotations mapping points_a (n, m) onto every candidate (c, n, m)."""
    covariance = np.einsum("ni,cnj->cij", points_a, candidates)
    u, _, vt = np.linalg.svd(covariance)
    v = np.swapaxes(vt, -1, -2)
    signs = np.where(np.linalg.det(v @ np.swapaxes(u, -1, -2)) >= 0, 1.0, -1.0)
    correction = np.ones(candidates.shape[:1] + (points_a.shape[1],))
    correction[:, -1] = signs
    return (v * correction[:, None, :]) @ np.swapaxes(u, -1, -2)


def kabsch_rotation(a: Shape, b: Shape) -> np.ndarray:
    """Return the proper rotation R minimizing sum_i |R a_i - b_i|^2.

    Both shapes are expected to be centroid normalized already.
    """
    check_compatible(a, b)
    return _kabsch_batch(a.points, b.points[None])[0]


def rotate_onto(shape: Shape, rotation: np.ndarray) -> Shape:
    """Apply the inverse of a Kabsch rotation, bringing the rotated shape back onto the reference."""
    return shape.with_points(shape.points @ rotation)


def _prepare(shape: Shape, nb_points: int, config: AlignmentConfig) -> Tuple[Shape, TransformRecord]:
    if shape.topology != "grid" and shape.n != nb_points:
        shape = resample(shape, nb_points)
    return centroid_and_scale_normalize(
        shape, config.normalize_translation, config.normalize_scale
    )


def target_size(a: Shape, b: Shape) -> int:
    if a.topology != b.topology:
        raise IncompatibleShapesError(
            f"Cannot align a {a.topology} with a {b.topology}."
        )
    if a.topology == "grid":
        check_compatible(a, b)
        return a.n
    if a.dim != b.dim:
        raise IncompatibleShapesError("Shapes live in spaces of different dimension.")
    return max(a.n, b.n)


def align(a: Shape, b: Shape, config: Optional[AlignmentConfig] = None) -> CorrespondenceResult:
    """Bring b into correspondence with a.

    Curves are resampled to the larger point count (only the smaller one changes), both shapes are normalized,
    closed loops are searched over all cyclic shifts with and without orientation flip, and the rotation is
    fitted per candidate. The candidate with the smallest residual wins; ties prefer the lowest shift and then
    the unflipped orientation.
    """
    config = config or AlignmentConfig()
    nb_points = target_size(a, b)
    shape_a, transform_a = _prepare(a, nb_points, config)
    shape_b, transform_b = _prepare(b, nb_points, config)

    reparams = [Reparameterization()]
    if shape_b.topology == "loop" and config.search_reparameterizations:
        n = shape_b.n
        reparams = [
            Reparameterization(shift=shift, flip=flip)
            for flip in (False, True)
            for shift in range(n)
        ]
    candidates = np.stack([reparam.apply(shape_b.points) for reparam in reparams])
    rotations = _kabsch_batch(shape_a.points, candidates)
    aligned = candidates @ rotations
    residuals = np.linalg.norm(aligned - shape_a.points[None], axis=-1).mean(axis=1)
    best = int(np.flatnonzero(residuals <= residuals.min() + _TIE_TOLERANCE)[0])

    reparam = reparams[best]
    aligned_b = rotate_onto(reparam.apply_to_shape(shape_b), rotations[best])
    return CorrespondenceResult(
        shape_a=shape_a,
        shape_b=aligned_b,
        rotation=rotations[best],
        reparam=reparam,
        residual=float(residuals[best]),
        transform_a=transform_a,
        transform_b=transform_b,
    )


def apply_correspondence(
    shape: Shape,
    nb_points: int,
    reparam: Reparameterization,
    rotation: np.ndarray,
    config: Optional[AlignmentConfig] = None,
) -> Shape:
    """Resample, normalize and map a shape with a correspondence computed on another shape pair.

    Used to reuse one correspondence for all frames of a sequence.
    """
    config = config or AlignmentConfig()
    prepared, _ = _prepare(shape, nb_points, config)
    return rotate_onto(reparam.apply_to_shape(prepared), rotation)

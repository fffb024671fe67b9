"""Define the configuration of the shape metric, the geodesic solver and the shape correspondence.

Pydantic models are used so that configurations can be validated, loaded from JSON files and dumped into run
manifests. Default configurations can be loaded, adjusted and passed into the geometry and similarity functions.
"""
import math
from typing import Dict, Literal, Optional

from pydantic import BaseModel, field_validator, model_validator


class MetricConfig(BaseModel):
    """Define the weighting functions of the shape metric.

    The weight of a mesh element is w = a * (1 + log(1 + V)) + b * (1 + kappa^2) + c, where V is the total volume
    of the shape and kappa^2 the mean squared curvature of the element's vertices. The weight is multiplied by the
    mean region emphasis of the element's vertices.

    :param volume_weight: Weight a of the total volume term. Must be non-negative.
    :param curvature_weight: Weight b of the curvature term. Must be non-negative.
    :param position_weight: Weight c of the constant ambient position term. Must be non-negative.
    :param region_emphasis: Optional mapping from region tag to a non-negative multiplier. Tags that are not listed
        (and untagged points) get the multiplier 1.
    :param volume_density: "induced" uses the element volumes of the immersion itself. "uniform" uses fixed unit
        weights (each element gets 1 / number of elements), which turns the flat configuration (a=b=0) into a
        constant metric whose geodesics are straight lines.
    """

    volume_weight: float = 1.0
    curvature_weight: float = 1.0
    position_weight: float = 1.0
    region_emphasis: Optional[Dict[str, float]] = None
    volume_density: Literal["induced", "uniform"] = "induced"

    @field_validator("volume_weight", "curvature_weight", "position_weight")
    @classmethod
    def check_non_negative(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError("Metric weights must be finite and non-negative.")
        return value

    @field_validator("region_emphasis")
    @classmethod
    def check_region_emphasis(
        cls, value: Optional[Dict[str, float]]
    ) -> Optional[Dict[str, float]]:
        if value is None:
            return value
        for tag, multiplier in value.items():
            if not math.isfinite(multiplier) or multiplier < 0:
                raise ValueError(
                    f"Region multiplier for '{tag}' must be finite and non-negative, got {multiplier}."
                )
        return value

    @model_validator(mode="after")
    def check_weights_not_all_zero(self) -> "MetricConfig":
        if self.volume_weight + self.curvature_weight + self.position_weight <= 0:
            raise ValueError(
                "At least one of volume_weight, curvature_weight and position_weight must be positive."
            )
        return self


class GeodesicConfig(BaseModel):
    """Define the discretisation and the optimizer of the path straightening geodesic solver.

    :param nb_intervals: Number K of time intervals of the discrete path (K + 1 shapes).
    :param tol: Stop when the relative energy decrease of an iteration falls below this value.
    :param max_iters: Maximum number of straightening iterations.
    :param armijo_c: Sufficient decrease constant of the backtracking line search.
    :param shrink: Step shrink factor of the backtracking line search.
    :param max_backtracks: Number of step halvings before an iteration is declared stalled.
    :param precondition: Whether to precondition the gradient with the inverse time Laplacian (H1 gradient).
    :param energy_rule: Base point of the squared speed of a segment. "left" evaluates the metric at the segment's
        start shape. "trapezoid" averages both end shapes, which makes distances symmetric up to rounding.
    """

    nb_intervals: int = 16
    tol: float = 1e-8
    max_iters: int = 2000
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 40
    precondition: bool = True
    energy_rule: Literal["left", "trapezoid"] = "left"

    @field_validator("nb_intervals")
    @classmethod
    def check_nb_intervals(cls, value: int) -> int:
        if value < 1:
            raise ValueError("nb_intervals must be at least 1.")
        return value

    @field_validator("shrink")
    @classmethod
    def check_shrink(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("shrink must lie strictly between 0 and 1.")
        return value


class AlignmentConfig(BaseModel):
    """Define how shapes are brought into correspondence before the metric is evaluated.

    :param normalize_translation: Move the volume weighted centroid to the origin.
    :param normalize_scale: Scale every shape to unit total volume. Disable for position sensitive features.
    :param search_reparameterizations: Search all cyclic shifts and orientation flips for closed loops.
    :param strict_correspondence: For sequence comparisons, align every frame pair on its own instead of reusing
        the correspondence computed on the first frames of both sequences.
    """

    normalize_translation: bool = True
    normalize_scale: bool = True
    search_reparameterizations: bool = True
    strict_correspondence: bool = False

"""Pose-pose self-similarity matrices and sequence distances with dynamic time warping.

All frame pair geodesics of one call are collected first and straightened together in batches, which is what
keeps all pairs cost matrices affordable.
"""
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from motioncast.config.geometry_config import (
    AlignmentConfig,
    GeodesicConfig,
    MetricConfig,
)
from motioncast.general_utils.exceptions import MotionCastError, UnknownRegionError
from motioncast.general_utils.general_utils import logger
from motioncast.geometry.correspondence import (
    Reparameterization,
    align,
    apply_correspondence,
)
from motioncast.geometry.metric import corresponded_distances
from motioncast.geometry.shapes import Shape
from motioncast.similarity.motion_sequence import MotionSequence


@dataclass(frozen=True)
class SelfSimilarityMatrix:
    """Geodesic distances between all frames of one sequence.

    :param values: Symmetric T x T matrix with zero diagonal.
    :param region: Region tags the metric was restricted to, if any.
    """

    values: np.ndarray
    region: Optional[Tuple[str, ...]] = None

    def to_frame(self) -> pd.DataFrame:
        labels = [f"f{index:03d}" for index in range(self.values.shape[0])]
        return pd.DataFrame(self.values, index=labels, columns=labels)


@dataclass(frozen=True)
class AlignmentResult:
    """Monotone warping path between two sequences and its costs."""

    path: List[Tuple[int, int]]
    raw_cost: float
    normalized_cost: float


def region_metric_config(
    sequence: MotionSequence, region: Iterable[str], metric_config: MetricConfig
) -> MetricConfig:
    """Restrict the metric to a set of region tags: emphasis 1 on them, 0 on every other tag."""
    region = tuple(sorted(set(region)))
    tags = sequence.region_tags
    available = set(tags) if tags is not None else set()
    unknown = [tag for tag in region if tag not in available]
    if unknown:
        raise UnknownRegionError(
            f"Region tags {unknown} do not occur in sequence '{sequence.id}'. Available tags: {sorted(available)}."
        )
    emphasis = {tag: (1.0 if tag in region else 0.0) for tag in sorted(available)}
    return metric_config.model_copy(update={"region_emphasis": emphasis})


def _corresponded_frames(
    a: MotionSequence, b: MotionSequence, alignment_config: AlignmentConfig
) -> Tuple[List[Shape], List[Shape]]:
    """Map all frames of both sequences with the correspondence of their first frames."""
    reference = align(a.frames[0], b.frames[0], alignment_config)
    nb_points = reference.shape_a.n
    identity = np.eye(reference.shape_a.dim)
    frames_a = [
        apply_correspondence(frame, nb_points, Reparameterization(), identity, alignment_config)
        for frame in a.frames
    ]
    frames_b = [
        apply_correspondence(frame, nb_points, reference.reparam, reference.rotation, alignment_config)
        for frame in b.frames
    ]
    return frames_a, frames_b


def _frame_pairs(
    a: MotionSequence,
    b: MotionSequence,
    alignment_config: AlignmentConfig,
    index_pairs: Sequence[Tuple[int, int]],
) -> Tuple[List[Shape], List[Shape]]:
    if alignment_config.strict_correspondence:
        results = [align(a.frames[i], b.frames[j], alignment_config) for i, j in index_pairs]
        return [result.shape_a for result in results], [result.shape_b for result in results]
    frames_a, frames_b = _corresponded_frames(a, b, alignment_config)
    return [frames_a[i] for i, _ in index_pairs], [frames_b[j] for _, j in index_pairs]


def self_similarity(
    sequence: MotionSequence,
    metric_config: Optional[MetricConfig] = None,
    region: Optional[Iterable[str]] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> SelfSimilarityMatrix:
    """Geodesic distance between every pair of frames of one sequence.

    Every frame pair is aligned on its own. The upper triangle is computed and mirrored; the diagonal is zero.
    :param region: Optional region tags. The metric then only weighs elements touching these regions.
    """
    metric_config = metric_config or MetricConfig()
    alignment_config = alignment_config or AlignmentConfig()
    region_tuple = None
    if region is not None:
        region_tuple = tuple(sorted(set(region)))
        metric_config = region_metric_config(sequence, region_tuple, metric_config)
    nb_frames = sequence.nb_frames
    upper = [(i, j) for i in range(nb_frames) for j in range(i + 1, nb_frames)]
    strict = alignment_config.model_copy(update={"strict_correspondence": True})
    starts, ends = _frame_pairs(sequence, sequence, strict, upper)
    distances = corresponded_distances(starts, ends, metric_config, geodesic_config, n_jobs=n_jobs)
    values = np.zeros((nb_frames, nb_frames))
    for (i, j), value in zip(upper, distances):
        values[i, j] = value
        values[j, i] = value
    return SelfSimilarityMatrix(values=values, region=region_tuple)


def frame_cost_matrices(
    pairs: Sequence[Tuple[MotionSequence, MotionSequence]],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> List[np.ndarray]:
    """Frame cost matrices of many sequence pairs, with all frame geodesics straightened in shared batches."""
    alignment_config = alignment_config or AlignmentConfig()
    starts: List[Shape] = []
    ends: List[Shape] = []
    shapes = []
    for a, b in pairs:
        index_pairs = [(i, j) for i in range(a.nb_frames) for j in range(b.nb_frames)]
        pair_starts, pair_ends = _frame_pairs(a, b, alignment_config, index_pairs)
        starts.extend(pair_starts)
        ends.extend(pair_ends)
        shapes.append((a.nb_frames, b.nb_frames))
    distances = corresponded_distances(starts, ends, metric_config, geodesic_config, n_jobs=n_jobs)
    matrices = []
    offset = 0
    for rows, cols in shapes:
        matrices.append(distances[offset : offset + rows * cols].reshape(rows, cols))
        offset += rows * cols
    return matrices


def frame_cost_matrix(
    a: MotionSequence,
    b: MotionSequence,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> np.ndarray:
    """T_A x T_B matrix of geodesic distances between the frames of two sequences."""
    return frame_cost_matrices(
        [(a, b)], metric_config, geodesic_config, alignment_config, n_jobs=n_jobs
    )[0]


def dtw_align(cost: np.ndarray) -> AlignmentResult:
    """Dynamic time warping with steps (1, 1), (1, 0) and (0, 1) from (0, 0) to the last cell.

    Ties prefer the diagonal step, then (1, 0), then (0, 1).
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.size == 0:
        raise MotionCastError("DTW needs a non-empty cost matrix.")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise MotionCastError("DTW costs must be finite and non-negative.")
    rows, cols = cost.shape
    accumulated = np.full((rows, cols), np.inf)
    accumulated[0, 0] = cost[0, 0]
    for i in range(rows):
        for j in range(cols):
            if i == 0 and j == 0:
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = accumulated[i - 1, j - 1]
            if i > 0:
                best = min(best, accumulated[i - 1, j])
            if j > 0:
                best = min(best, accumulated[i, j - 1])
            accumulated[i, j] = cost[i, j] + best

    path = [(rows - 1, cols - 1)]
    i, j = rows - 1, cols - 1
    while (i, j) != (0, 0):
        candidates = []
        if i > 0 and j > 0:
            candidates.append((accumulated[i - 1, j - 1], (i - 1, j - 1)))
        if i > 0:
            candidates.append((accumulated[i - 1, j], (i - 1, j)))
        if j > 0:
            candidates.append((accumulated[i, j - 1], (i, j - 1)))
        # min keeps the first of equal values, which follows the tie preference
        _, (i, j) = min(candidates, key=lambda candidate: candidate[0])
        path.append((i, j))
    path.reverse()
    raw_cost = float(sum(cost[i, j] for i, j in path))
    return AlignmentResult(path=path, raw_cost=raw_cost, normalized_cost=raw_cost / len(path))


def sequence_distance(
    a: MotionSequence,
    b: MotionSequence,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> float:
    """Normalized DTW cost of the frame cost matrix of two sequences."""
    cost = frame_cost_matrix(a, b, metric_config, geodesic_config, alignment_config, n_jobs)
    return dtw_align(cost).normalized_cost


def cross_sequence_distances(
    queries: Sequence[MotionSequence],
    references: Sequence[MotionSequence],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """Sequence distances of every query to every reference, indexed by sequence ids."""
    pairs = [(query, reference) for query in queries for reference in references]
    costs = frame_cost_matrices(pairs, metric_config, geodesic_config, alignment_config, n_jobs)
    values = np.array([dtw_align(cost).normalized_cost for cost in costs]).reshape(
        len(queries), len(references)
    )
    return pd.DataFrame(
        values,
        index=[query.id for query in queries],
        columns=[reference.id for reference in references],
    )


def pairwise_sequence_distances(
    sequences: Sequence[MotionSequence],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """Symmetric all pairs sequence distance matrix with a zero diagonal.

    Only pairs (i, j) with i < j are computed; the result does not depend on n_jobs.
    """
    logger(
        f"{datetime.utcnow()}: Start computing {len(sequences)} x {len(sequences)} sequence distances."
    )
    upper = [(i, j) for i in range(len(sequences)) for j in range(i + 1, len(sequences))]
    costs = frame_cost_matrices(
        [(sequences[i], sequences[j]) for i, j in upper],
        metric_config,
        geodesic_config,
        alignment_config,
        n_jobs,
    )
    values = np.zeros((len(sequences), len(sequences)))
    for (i, j), cost in zip(upper, costs):
        values[i, j] = values[j, i] = dtw_align(cost).normalized_cost
    ids = [sequence.id for sequence in sequences]
    return pd.DataFrame(values, index=ids, columns=ids)

"""Weighted nearest neighbor label transfer with optional bootstrap aggregation."""
import math
from collections import Counter
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from motioncast.annotation.library import Annotation, PrimitiveLibrary
from motioncast.config.geometry_config import (
    AlignmentConfig,
    GeodesicConfig,
    MetricConfig,
)
from motioncast.config.training_config import AnnotationConfig
from motioncast.general_utils.exceptions import EmptyLibraryError
from motioncast.general_utils.general_utils import logger
from motioncast.similarity.motion_sequence import MotionSequence
from motioncast.similarity.sequence_similarity import cross_sequence_distances


def annotate_from_distances(
    distances: Sequence[float],
    labels: Sequence[str],
    motion_labels: Sequence[Sequence[str]],
    ids: Sequence[str],
    k: int,
    epsilon: float = 1e-9,
) -> Annotation:
    """Transfer labels from the k nearest candidates.

    Neighbors vote with weight 1 / (d + epsilon). The class with the largest weight mass wins; ties go to the class
    of the single nearest neighbor and then to the lexicographically smallest label. Motion labels are the tags that
    occur in at least half of the winning class's neighbors.
    :param distances: Distance of the query to every candidate.
    :param labels: Action label of every candidate.
    :param motion_labels: Motion labels of every candidate.
    :param ids: Id of every candidate. Candidates may repeat (bootstrap resamples).
    :param k: Number of neighbors, clipped to the number of candidates.
    :param epsilon: Guard against zero distances.
    """
    if len(distances) == 0:
        raise EmptyLibraryError("Cannot annotate against an empty library.")
    order = sorted(range(len(distances)), key=lambda i: (distances[i], ids[i], i))
    neighbors = order[: max(1, min(k, len(order)))]

    mass: Dict[str, float] = {}
    for i in neighbors:
        mass[labels[i]] = mass.get(labels[i], 0.0) + 1.0 / (distances[i] + epsilon)
    best = max(mass.values())
    tied = [label for label, value in mass.items() if math.isclose(value, best, rel_tol=1e-12)]
    if len(tied) == 1:
        winner = tied[0]
    elif labels[neighbors[0]] in tied:
        winner = labels[neighbors[0]]
    else:
        winner = min(tied)

    winning = [i for i in neighbors if labels[i] == winner]
    tag_counts = Counter(tag for i in winning for tag in set(motion_labels[i]))
    tags = tuple(sorted(tag for tag, count in tag_counts.items() if 2 * count >= len(winning)))
    return Annotation(
        action_label=winner,
        motion_labels=tags,
        confidence=mass[winner] / sum(mass.values()),
        neighbor_ids=tuple(ids[i] for i in neighbors),
        neighbor_distances=tuple(float(distances[i]) for i in neighbors),
    )


def query_distances(
    query: MotionSequence,
    library: PrimitiveLibrary,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> Dict[str, float]:
    """Sequence distance of the query to every library entry, keyed by entry id."""
    frame = cross_sequence_distances(
        [query], list(library.entries), metric_config, geodesic_config, alignment_config, n_jobs
    )
    return {entry_id: float(value) for entry_id, value in frame.iloc[0].items()}


def _library_columns(library: PrimitiveLibrary, distances: Mapping[str, float]):
    return (
        [distances[entry.id] for entry in library.entries],
        library.labels,
        [entry.motion_labels for entry in library.entries],
        library.ids,
    )


def knn_annotate(
    query: MotionSequence,
    library: PrimitiveLibrary,
    k: Optional[int] = None,
    annotation_config: Optional[AnnotationConfig] = None,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    distances: Optional[Mapping[str, float]] = None,
    n_jobs: int = 1,
) -> Annotation:
    """Annotate a query with the weighted k nearest neighbors of a library.

    :param k: Number of neighbors. Defaults to annotation_config.k.
    :param distances: Optional precomputed distances of the query to the library entries (id -> distance).
    """
    annotation_config = annotation_config or AnnotationConfig()
    k = k or annotation_config.k
    if distances is None:
        distances = query_distances(
            query, library, metric_config, geodesic_config, alignment_config, n_jobs
        )
    return annotate_from_distances(
        *_library_columns(library, distances), k=k, epsilon=annotation_config.epsilon
    )


def stratified_bootstrap(
    labels: Sequence[str], random_generator: np.random.Generator
) -> List[int]:
    """Draw a bootstrap resample of the same size as labels, separately within every class."""
    indices: List[int] = []
    for label in sorted(set(labels)):
        members = [index for index, value in enumerate(labels) if value == label]
        indices.extend(int(i) for i in random_generator.choice(members, size=len(members), replace=True))
    return indices


def bagged_from_distances(
    distances: Sequence[float],
    labels: Sequence[str],
    motion_labels: Sequence[Sequence[str]],
    ids: Sequence[str],
    k: int,
    nb_bags: int,
    random_state: int,
    epsilon: float = 1e-9,
    bootstrap: bool = True,
) -> Annotation:
    """Bootstrap aggregated label transfer.

    Falls back to plain nearest neighbors when any class has a single example. The action label is the majority
    vote over the bags (ties: lexicographic), the confidence the share of winning votes, and the motion labels
    the most frequent outcome among the winning bags.
    """
    counts = Counter(labels)
    if min(counts.values()) < 2:
        return annotate_from_distances(distances, labels, motion_labels, ids, k, epsilon)

    random_generator = np.random.default_rng(random_state)
    outcomes: List[Annotation] = []
    for _ in range(nb_bags):
        if bootstrap:
            bag = stratified_bootstrap(labels, random_generator)
        else:
            bag = list(range(len(labels)))
        outcomes.append(
            annotate_from_distances(
                [distances[i] for i in bag],
                [labels[i] for i in bag],
                [motion_labels[i] for i in bag],
                [ids[i] for i in bag],
                k,
                epsilon,
            )
        )
    votes = Counter(outcome.action_label for outcome in outcomes)
    top = max(votes.values())
    winner = min(label for label, count in votes.items() if count == top)
    winning = [outcome for outcome in outcomes if outcome.action_label == winner]
    tag_votes = Counter(outcome.motion_labels for outcome in winning)
    top_tags = max(tag_votes.values())
    tags = min(tags for tags, count in tag_votes.items() if count == top_tags)
    return Annotation(
        action_label=winner,
        motion_labels=tags,
        confidence=votes[winner] / nb_bags,
        neighbor_ids=winning[0].neighbor_ids,
        neighbor_distances=winning[0].neighbor_distances,
    )


def bagged_annotate(
    query: MotionSequence,
    library: PrimitiveLibrary,
    k: Optional[int] = None,
    nb_bags: Optional[int] = None,
    random_state: int = 0,
    annotation_config: Optional[AnnotationConfig] = None,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    distances: Optional[Mapping[str, float]] = None,
    bootstrap: bool = True,
    n_jobs: int = 1,
) -> Annotation:
    """Annotate a query by majority vote over class stratified bootstrap resamples of the library.

    :param nb_bags: Number of resamples. Defaults to annotation_config.nb_bags.
    :param random_state: Seed of the resampling.
    :param bootstrap: Draw resamples with replacement. When False every bag is the full library.
    """
    annotation_config = annotation_config or AnnotationConfig()
    k = k or annotation_config.k
    nb_bags = nb_bags or annotation_config.nb_bags
    if distances is None:
        distances = query_distances(
            query, library, metric_config, geodesic_config, alignment_config, n_jobs
        )
    if min(Counter(library.labels).values()) < 2:
        logger("Library has a class with a single example, bagging falls back to nearest neighbors.")
    return bagged_from_distances(
        *_library_columns(library, distances),
        k=k,
        nb_bags=nb_bags,
        random_state=random_state,
        epsilon=annotation_config.epsilon,
        bootstrap=bootstrap,
    )


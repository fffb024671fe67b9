"""Run fully configured motion annotation blueprint.

Customization via class attributes is possible. Configs can be instantiated and provided to change the metric, the
geodesic solver, the correspondence and the label transfer. The blueprint keeps the primitive library and the library
distance matrix, so repeated predictions and evaluations do not recompute library geodesics.
"""
import warnings
from collections import Counter
from datetime import datetime
from typing import List, Optional, Sequence

import pandas as pd

from motioncast.annotation.knn import (
    annotate_from_distances,
    bagged_from_distances,
    query_distances,
)
from motioncast.annotation.library import Annotation, PrimitiveLibrary
from motioncast.config.geometry_config import (
    AlignmentConfig,
    GeodesicConfig,
    MetricConfig,
)
from motioncast.config.training_config import AnnotationConfig, EvaluationConfig
from motioncast.evaluation.monte_carlo import EvaluationReport, evaluate
from motioncast.experimentation.tracking import ExperimentTracker
from motioncast.general_utils.general_utils import logger
from motioncast.similarity.motion_sequence import MotionSequence
from motioncast.similarity.sequence_similarity import (
    cross_sequence_distances,
    pairwise_sequence_distances,
)


class MotionAnnotator:
    """Annotate motion sequences against a labeled primitive library.

    :param conf_annotation: Takes an AnnotationConfig instance. Defaults to 5 nearest neighbors without bagging.
    :param conf_metric: Takes a MetricConfig instance.
    :param conf_geodesic: Takes a GeodesicConfig instance.
    :param conf_alignment: Takes an AlignmentConfig instance.
    :param experiment_tracker: Takes an instance of an ExperimentTracker class. If not provided this will be initialized
        automatically.
    :param n_jobs: Number of parallel jobs for geodesic batches.
    """

    def __init__(
        self,
        conf_annotation: Optional[AnnotationConfig] = None,
        conf_metric: Optional[MetricConfig] = None,
        conf_geodesic: Optional[GeodesicConfig] = None,
        conf_alignment: Optional[AlignmentConfig] = None,
        experiment_tracker: Optional[ExperimentTracker] = None,
        n_jobs: int = 1,
    ):
        self.conf_annotation = conf_annotation or AnnotationConfig()
        self.conf_metric = conf_metric or MetricConfig()
        self.conf_geodesic = conf_geodesic or GeodesicConfig()
        self.conf_alignment = conf_alignment or AlignmentConfig()
        self.n_jobs = n_jobs
        self.library: Optional[PrimitiveLibrary] = None
        self.library_distances: Optional[pd.DataFrame] = None
        self.eval_report: Optional[EvaluationReport] = None

        if experiment_tracker:
            self.experiment_tracker = experiment_tracker
        else:
            self.experiment_tracker = ExperimentTracker()

    def fit(self, library: PrimitiveLibrary) -> None:
        """Store the library. Bagging on a library with single example classes falls back to nearest neighbors."""
        logger(f"{datetime.utcnow()}: Start fitting MotionAnnotator on {len(library)} sequences.")
        if self.conf_annotation.use_bagging and min(Counter(library.labels).values()) < 2:
            message = """Bagging is enabled but the library contains classes with a single example. These predictions
            fall back to plain nearest neighbors."""
            warnings.warn(message, UserWarning, stacklevel=2)
        self.library = library
        self.library_distances = None

    def _check_fitted(self) -> PrimitiveLibrary:
        if self.library is None:
            raise ValueError("MotionAnnotator has not been fitted. Call fit first.")
        return self.library

    def _annotate(self, distances: dict, random_state: int) -> Annotation:
        library = self._check_fitted()
        columns = (
            [distances[entry_id] for entry_id in library.ids],
            library.labels,
            [entry.motion_labels for entry in library.entries],
            library.ids,
        )
        if self.conf_annotation.use_bagging:
            return bagged_from_distances(
                *columns,
                k=self.conf_annotation.k,
                nb_bags=self.conf_annotation.nb_bags,
                random_state=random_state,
                epsilon=self.conf_annotation.epsilon,
            )
        return annotate_from_distances(
            *columns, k=self.conf_annotation.k, epsilon=self.conf_annotation.epsilon
        )

    def predict(self, query: MotionSequence, random_state: int = 0) -> Annotation:
        library = self._check_fitted()
        distances = query_distances(
            query, library, self.conf_metric, self.conf_geodesic, self.conf_alignment, self.n_jobs
        )
        return self._annotate(distances, random_state)

    def predict_many(
        self, queries: Sequence[MotionSequence], random_state: int = 0
    ) -> List[Annotation]:
        """Annotate several queries with one batched distance computation."""
        library = self._check_fitted()
        logger(f"{datetime.utcnow()}: Start annotating {len(queries)} sequences.")
        frame = cross_sequence_distances(
            list(queries),
            list(library.entries),
            self.conf_metric,
            self.conf_geodesic,
            self.conf_alignment,
            self.n_jobs,
        )
        return [
            self._annotate(frame.iloc[position].to_dict(), random_state + position)
            for position in range(len(queries))
        ]

    def compute_library_distances(self) -> pd.DataFrame:
        library = self._check_fitted()
        if self.library_distances is None:
            self.library_distances = pairwise_sequence_distances(
                list(library.entries),
                self.conf_metric,
                self.conf_geodesic,
                self.conf_alignment,
                self.n_jobs,
            )
        return self.library_distances

    def fit_eval(
        self, library: PrimitiveLibrary, conf_evaluation: Optional[EvaluationConfig] = None
    ) -> EvaluationReport:
        """Fit on the library and run the Monte Carlo evaluation on it."""
        self.fit(library)
        self.eval_report = evaluate(
            library,
            evaluation_config=conf_evaluation,
            annotation_config=self.conf_annotation,
            distances=self.compute_library_distances(),
            experiment_tracker=self.experiment_tracker,
        )
        return self.eval_report

"""Monte Carlo evaluation of label transfer on a primitive library.

Every trial splits the library (stratified or one-shot), annotates the test entries against the train entries and
scores the result. The library distance matrix is computed once and shared by all trials.
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from motioncast.annotation.knn import annotate_from_distances, bagged_from_distances
from motioncast.annotation.library import PrimitiveLibrary
from motioncast.config.base_classes import BaseClassExperimentTracker
from motioncast.config.geometry_config import (
    AlignmentConfig,
    GeodesicConfig,
    MetricConfig,
)
from motioncast.config.training_config import AnnotationConfig, EvaluationConfig
from motioncast.evaluation.eval_metrics import eval_annotations, per_class_accuracy
from motioncast.general_utils.exceptions import ProtocolError
from motioncast.general_utils.general_utils import derive_seeds, logger
from motioncast.preprocessing.train_test_split import train_test_split
from motioncast.similarity.sequence_similarity import pairwise_sequence_distances


@dataclass
class EvaluationReport:
    """Aggregated Monte Carlo results.

    :param summary: Mean and standard deviation of the action accuracy, mean motion label exact-set accuracy and
        mean per tag F1 scores.
    :param confusion: Confusion matrix summed over all trials (rows: true class, columns: predicted class).
    :param per_class_accuracy: Accuracy per true class over all trials.
    :param trial_scores: One row per trial.
    """

    summary: Dict[str, Any]
    confusion: pd.DataFrame
    per_class_accuracy: Dict[str, Optional[float]]
    trial_scores: pd.DataFrame = field(default_factory=pd.DataFrame)

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.summary,
            "confusion_matrix": {
                "classes": [str(label) for label in self.confusion.index],
                "values": self.confusion.to_numpy().astype(int).tolist(),
            },
            "per_class_accuracy": self.per_class_accuracy,
            "trials": self.trial_scores.to_dict(orient="records"),
        }


def _annotate_trial(
    library: PrimitiveLibrary,
    distances: np.ndarray,
    train_idx: List[int],
    test_idx: List[int],
    annotation_config: AnnotationConfig,
    trial_seed: int,
):
    labels = library.labels
    motion_labels = [entry.motion_labels for entry in library.entries]
    ids = library.ids
    train_labels = [labels[i] for i in train_idx]
    train_tags = [motion_labels[i] for i in train_idx]
    train_ids = [ids[i] for i in train_idx]
    predictions = []
    for position, index in enumerate(test_idx):
        row = [float(distances[index, i]) for i in train_idx]
        if annotation_config.use_bagging:
            annotation = bagged_from_distances(
                row,
                train_labels,
                train_tags,
                train_ids,
                k=annotation_config.k,
                nb_bags=annotation_config.nb_bags,
                random_state=(trial_seed + position) % 2**32,
                epsilon=annotation_config.epsilon,
            )
        else:
            annotation = annotate_from_distances(
                row, train_labels, train_tags, train_ids, annotation_config.k, annotation_config.epsilon
            )
        predictions.append(annotation)
    return predictions


def evaluate(
    library: PrimitiveLibrary,
    evaluation_config: Optional[EvaluationConfig] = None,
    annotation_config: Optional[AnnotationConfig] = None,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    distances: Optional[pd.DataFrame] = None,
    n_jobs: int = 1,
    experiment_tracker: Optional[BaseClassExperimentTracker] = None,
) -> EvaluationReport:
    """Run the Monte Carlo annotation protocol.

    :param library: Labeled library. Under the split protocol every class needs at least two entries.
    :param distances: Optional precomputed library distance matrix indexed by entry ids. Computed when missing.
    :param experiment_tracker: Optional tracker receiving the accuracy of every trial.
    :return: EvaluationReport, deterministic given the configuration and the library.

    summary["per_tag_f1"] is computed per trial: the true and predicted motion labels of the test entries are
    binarized with a MultiLabelBinarizer fitted on the tags of that trial, and every tag gets its binary F1 score
    (zero_division=0). The reported value of a tag is the mean over the trials in which it occurred, as a true or a
    predicted tag.
    """
    evaluation_config = evaluation_config or EvaluationConfig()
    annotation_config = annotation_config or AnnotationConfig()
    labels = library.labels
    classes = library.classes
    if evaluation_config.protocol == "split":
        singletons = sorted(label for label in classes if labels.count(label) < 2)
        if singletons:
            raise ProtocolError(
                f"Classes {singletons} have a single entry. Use the one-shot protocol for such libraries."
            )
    if evaluation_config.protocol == "one-shot" and len(classes) == len(library):
        raise ProtocolError("One-shot evaluation needs at least one test entry.")
    if evaluation_config.trials < 1:
        raise ProtocolError("At least one trial is needed.")

    logger(
        f"{datetime.utcnow()}: Start {evaluation_config.trials} Monte Carlo trials with protocol "
        f"{evaluation_config.protocol}."
    )
    if distances is None:
        distances = pairwise_sequence_distances(
            list(library.entries), metric_config, geodesic_config, alignment_config, n_jobs
        )
    matrix = distances.loc[library.ids, library.ids].to_numpy()

    seeds = derive_seeds(evaluation_config.global_random_state, evaluation_config.trials)
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    rows = []
    per_tag_scores: Dict[str, List[float]] = {}
    for trial, seed in enumerate(seeds):
        train_idx, test_idx = train_test_split(
            labels,
            protocol=evaluation_config.protocol,
            train_size=evaluation_config.split_fraction,
            random_state=seed,
        )
        predictions = _annotate_trial(
            library, matrix, train_idx, test_idx, annotation_config, seed
        )
        scores = eval_annotations(
            [labels[i] for i in test_idx],
            [prediction.action_label for prediction in predictions],
            [library.entries[i].motion_labels for i in test_idx],
            [prediction.motion_labels for prediction in predictions],
            classes,
        )
        confusion += scores["confusion_matrix"]
        for tag, value in scores["per_tag_f1"].items():
            per_tag_scores.setdefault(tag, []).append(value)
        rows.append(
            {
                "trial": trial,
                "seed": seed,
                "nb_train": len(train_idx),
                "nb_test": len(test_idx),
                "accuracy": scores["accuracy"],
                "motion_accuracy": scores["motion_accuracy"],
            }
        )
        if experiment_tracker is not None:
            experiment_tracker.add_results(
                experiment_id=trial,
                score_category="monte_carlo_trial",
                config=evaluation_config,
                parameters={"seed": seed, "k": annotation_config.k},
                eval_scores=scores["accuracy"],
                metric_used="accuracy",
                metric_higher_is_better=True,
            )

    trial_scores = pd.DataFrame(rows)
    summary = {
        "protocol": evaluation_config.protocol,
        "trials": evaluation_config.trials,
        "k": annotation_config.k,
        "seed": evaluation_config.global_random_state,
        "accuracy_mean": float(trial_scores["accuracy"].mean()),
        "accuracy_std": float(trial_scores["accuracy"].std(ddof=0)),
        "motion_accuracy_mean": float(trial_scores["motion_accuracy"].mean()),
        "per_tag_f1": {tag: float(np.mean(values)) for tag, values in sorted(per_tag_scores.items())},
    }
    logger(f"The mean accuracy is {summary['accuracy_mean']}")
    return EvaluationReport(
        summary=summary,
        confusion=pd.DataFrame(confusion, index=classes, columns=classes),
        per_class_accuracy=per_class_accuracy(confusion, classes),
        trial_scores=trial_scores,
    )

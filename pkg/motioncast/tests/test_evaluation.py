import os

import numpy as np
import pandas as pd
import pytest

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.blueprints.annotator import MotionAnnotator
from motioncast.config.geometry_config import GeodesicConfig
from motioncast.config.training_config import AnnotationConfig, EvaluationConfig, SuiteConfig
from motioncast.evaluation.eval_metrics import (
    eval_annotations,
    per_class_accuracy,
    plot_learning_curves,
    plot_similarity_heatmap,
)
from motioncast.evaluation.monte_carlo import evaluate
from motioncast.experimentation.tracking import ExperimentTracker
from motioncast.general_utils.exceptions import ProtocolError
from motioncast.synthetic.generators import GeneratorSpec, generate, suite_specs
from motioncast.tests.make_data.create_data import create_block_distances, create_small_library


@pytest.fixture(scope="module")
def library():
    return create_small_library()


@pytest.fixture(scope="module")
def distances(library):
    return create_block_distances(library)


def test_split_protocol_on_separated_classes(library, distances):
    tracker = ExperimentTracker()
    report = evaluate(
        library,
        EvaluationConfig(protocol="split", trials=5),
        AnnotationConfig(k=3),
        distances=distances,
        experiment_tracker=tracker,
    )

    assert report.summary["accuracy_mean"] == 1.0
    assert report.summary["accuracy_std"] == 0.0
    assert report.per_class_accuracy == {"bend": 1.0, "jump": 1.0, "wave": 1.0}
    assert int(np.trace(report.confusion.to_numpy())) == report.confusion.to_numpy().sum()
    assert report.trial_scores["nb_test"].tolist() == [6] * 5
    assert len(tracker.experiment_id) == 5
    assert tracker.score_category == ["monte_carlo_trial"] * 5


def test_one_shot_protocol_on_separated_classes(library, distances):
    report = evaluate(
        library, EvaluationConfig(protocol="one-shot", trials=4), distances=distances
    )
    assert report.summary["accuracy_mean"] == 1.0
    assert report.trial_scores["nb_train"].tolist() == [3] * 4
    assert report.trial_scores["nb_test"].tolist() == [9] * 4


def test_bagging_on_separated_classes(library, distances):
    report = evaluate(
        library,
        EvaluationConfig(trials=3),
        AnnotationConfig(k=3, use_bagging=True, nb_bags=5),
        distances=distances,
    )
    assert report.summary["accuracy_mean"] == 1.0


def test_evaluation_is_deterministic(library, distances):
    config = EvaluationConfig(trials=4, global_random_state=21)
    first = evaluate(library, config, distances=distances)
    second = evaluate(library, config, distances=distances)

    assert first.trial_scores.equals(second.trial_scores)
    assert first.to_dict() == second.to_dict()


def test_report_to_dict(library, distances):
    payload = evaluate(library, EvaluationConfig(trials=2), distances=distances).to_dict()

    assert payload["confusion_matrix"]["classes"] == ["bend", "jump", "wave"]
    assert len(payload["trials"]) == 2
    assert {"accuracy_mean", "accuracy_std", "motion_accuracy_mean", "per_tag_f1"} <= set(payload)


def test_protocol_errors(library, distances):
    with pytest.raises(ProtocolError):
        evaluate(library.subset([0, 1, 4]), EvaluationConfig(protocol="split"), distances=distances)
    with pytest.raises(ProtocolError):
        evaluate(library.subset([0, 4, 8]), EvaluationConfig(protocol="one-shot"), distances=distances)


def test_eval_annotations():
    scores = eval_annotations(
        ["a", "a", "b"],
        ["a", "b", "b"],
        [("x",), ("x", "y"), ("z",)],
        [("x",), ("x",), ("z",)],
        classes=["a", "b"],
    )

    assert scores["accuracy"] == pytest.approx(2 / 3)
    assert scores["motion_accuracy"] == pytest.approx(2 / 3)
    assert scores["per_tag_f1"] == {"x": 1.0, "y": 0.0, "z": 1.0}
    assert scores["confusion_matrix"].tolist() == [[1, 1], [0, 1]]
    with pytest.raises(ValueError):
        eval_annotations(["a"], [], [()], [()], classes=["a"])


def test_per_class_accuracy_without_test_entries():
    confusion = np.array([[3, 1], [0, 0]])
    assert per_class_accuracy(confusion, ["a", "b"]) == {"a": 0.75, "b": None}


def test_plots_are_written(tmp_path, distances):
    heatmap_path = os.path.join(str(tmp_path), "heatmap.svg")
    curves_path = os.path.join(str(tmp_path), "curves.png")
    plot_similarity_heatmap(distances, heatmap_path)

    curve = pd.DataFrame({"episode": range(12), "reward": np.arange(12.0)})
    plot_learning_curves({"annotated": curve}, curves_path, window=3)

    assert os.path.getsize(heatmap_path) > 0
    assert os.path.getsize(curves_path) > 0


def test_annotator_predicts_the_motion_class():
    library = create_small_library(classes=("wave", "jump"), per_class=2)
    annotator = MotionAnnotator(
        conf_annotation=AnnotationConfig(k=1),
        conf_geodesic=GeodesicConfig(nb_intervals=2, max_iters=100),
    )
    annotator.fit(library)
    query = generate(GeneratorSpec(class_name="wave", duration_frames=8, seed=99))

    annotation = annotator.predict(query)
    assert annotation.action_label == "wave"
    assert len(annotation.neighbor_ids) == 1

    many = annotator.predict_many([query])
    assert many[0].action_label == "wave"
    assert many[0].neighbor_ids == annotation.neighbor_ids


def test_annotator_fit_eval():
    library = create_small_library(classes=("wave", "jump"), per_class=2)
    annotator = MotionAnnotator(
        conf_annotation=AnnotationConfig(k=1),
        conf_geodesic=GeodesicConfig(nb_intervals=1),
    )
    report = annotator.fit_eval(library, EvaluationConfig(trials=3))

    distances = annotator.compute_library_distances()
    assert distances is annotator.library_distances
    assert np.allclose(distances.values, distances.values.T)
    assert len(report.trial_scores) == 3
    assert len(annotator.experiment_tracker.experiment_id) == 3


def test_annotator_needs_fit():
    with pytest.raises(ValueError):
        MotionAnnotator().predict(create_small_library(per_class=2).entries[0])


def test_annotator_warns_about_bagging_singletons():
    library = create_small_library(per_class=2).subset([0, 1, 2])
    annotator = MotionAnnotator(conf_annotation=AnnotationConfig(use_bagging=True))
    with pytest.warns(UserWarning):
        annotator.fit(library)


def _right_handed_library(noise_sigma=0.0):
    suite = SuiteConfig(classes=["wave", "bend", "jump"], per_class=4, duration_frames=8, noise_sigma=noise_sigma)
    specs = [spec.model_copy(update={"mirror": False}) for spec in suite_specs(suite, random_state=5)]
    return PrimitiveLibrary(tuple(generate(spec) for spec in specs))


@pytest.mark.parametrize(
    "noise_sigma, protocol, minimum",
    [(0.0, "split", 0.95), (0.0, "one-shot", 0.9), (0.01, "split", 0.9)],
)
def test_geodesic_annotation_accuracy(noise_sigma, protocol, minimum):
    library = _right_handed_library(noise_sigma)
    report = evaluate(
        library,
        EvaluationConfig(protocol=protocol, trials=10, global_random_state=8),
        AnnotationConfig(k=1),
        geodesic_config=GeodesicConfig(nb_intervals=2, max_iters=50),
    )
    assert report.summary["accuracy_mean"] >= minimum

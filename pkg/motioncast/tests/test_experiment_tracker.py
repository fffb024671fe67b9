import pytest

from motioncast.config.training_config import EvaluationConfig, LearnConfig
from motioncast.experimentation.tracking import ExperimentTracker


@pytest.fixture
def experiment_tracker():
    return ExperimentTracker()


def test_add_results(experiment_tracker):
    evaluation_config = EvaluationConfig()
    parameters = {"trial": 0, "seed": 123}

    experiment_tracker.add_results(
        1, "monte_carlo_trial", evaluation_config, parameters, 0.95, "accuracy", True
    )

    assert experiment_tracker.experiment_id == [1]
    assert experiment_tracker.score_category == ["monte_carlo_trial"]
    assert experiment_tracker.configs == [evaluation_config.model_dump(mode="json")]
    assert experiment_tracker.parameters == [parameters]
    assert experiment_tracker.eval_scores == [0.95]
    assert experiment_tracker.metric_used == ["accuracy"]
    assert experiment_tracker.metric_higher_is_better == [True]
    assert len(experiment_tracker.created_at) == 1


def test_retrieve_results_as_df(experiment_tracker):
    experiment_tracker.add_results(
        1, "rl_run", LearnConfig(), {"mode": "annotated", "seed": 4}, 812.5, "final_reward", True
    )
    results_df = experiment_tracker.retrieve_results_as_df()

    assert results_df["experiment_id"].tolist() == [1]
    assert results_df["score_category"].tolist() == ["rl_run"]
    assert results_df["eval_scores"].tolist() == [812.5]
    assert results_df["mode"].tolist() == ["annotated"]
    assert results_df["gamma"].tolist() == [0.8]


def test_get_best_score_empty(experiment_tracker):
    with pytest.raises(ValueError, match="No results have been found in experiment tracker"):
        experiment_tracker.get_best_score(target_metric="accuracy")


def test_get_best_score_higher_is_better(experiment_tracker):
    for experiment_id, score in enumerate([0.5, 0.9, 0.7]):
        experiment_tracker.add_results(
            experiment_id, "monte_carlo_trial", EvaluationConfig(), {}, score, "accuracy", True
        )
    assert experiment_tracker.get_best_score(target_metric="accuracy") == 0.9


def test_get_best_score_lower_is_better(experiment_tracker):
    for experiment_id, score in enumerate([30, 12, 18]):
        experiment_tracker.add_results(
            experiment_id, "rl_eval", LearnConfig(), {}, score, "decisions", False
        )
    assert experiment_tracker.get_best_score(target_metric="decisions") == 12


def test_get_best_score_unknown_metric(experiment_tracker):
    experiment_tracker.add_results(0, "rl_run", LearnConfig(), {}, 1.0, "aulc", True)
    with pytest.raises(ValueError):
        experiment_tracker.get_best_score(target_metric="accuracy")

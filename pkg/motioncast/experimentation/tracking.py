import logging
from datetime import datetime
from typing import Any, Dict, List, Union

import pandas as pd
from pydantic import BaseModel

from motioncast.config.base_classes import BaseClassExperimentTracker, ScoreCategory


class ExperimentTracker(BaseClassExperimentTracker):
    """
    Default implementation of ExperimentTracker used by the evaluation harness and the reinforcement learning
    experiments. Every Monte Carlo trial and every training run adds one row. Custom trackers can subclass
    the base class from motioncast.config.base_classes.
    """

    def __init__(self):
        self.experiment_id: List[int] = []
        self.score_category: List[ScoreCategory] = []
        self.configs: List[Dict[str, Any]] = []
        self.parameters: List[Dict[Union[str, int, float, None], Any]] = []
        self.eval_scores: List[Union[float, int, None]] = []
        self.metric_used: List[str] = []
        self.metric_higher_is_better: List[bool] = []
        self.created_at: List[datetime] = []

    def add_results(
        self,
        experiment_id: int,
        score_category: ScoreCategory,
        config: BaseModel,
        parameters: Dict[Any, Any],
        eval_scores: Union[float, int, None],
        metric_used: str,
        metric_higher_is_better: bool,
    ) -> None:
        """
        Add an individual experiment result into the tracker.

        :param experiment_id: Sequential id. Make sure add an increment.
        :param score_category: Chose one of ["monte_carlo_trial", "rl_run", "rl_eval"].
        :param config: Pydantic configuration of the run (i.e. EvaluationConfig or LearnConfig).
        :param parameters: Dictionary with run specific parameters (i.e. seed, mode, corruption rate).
        :param eval_scores: The actual score of the experiment.
        :param metric_used: The name of the eval metric.
        :param metric_higher_is_better: True or False.
        """
        logging.info(f"{datetime.utcnow()}: Start adding results to ExperimentTracker.")
        self.experiment_id.append(experiment_id)
        self.score_category.append(score_category)
        try:
            self.configs.append(config.model_dump(mode="json"))
        except AttributeError:  # triggers for older Pydantic versions
            self.configs.append(config.dict())
        self.parameters.append(parameters)
        self.eval_scores.append(eval_scores)
        self.metric_used.append(metric_used)
        self.metric_higher_is_better.append(metric_higher_is_better)
        self.created_at.append(datetime.utcnow())

    def _scores_df(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "experiment_id": self.experiment_id,
                "score_category": self.score_category,
                "eval_scores": self.eval_scores,
                "metric_used": self.metric_used,
                "metric_higher_is_better": self.metric_higher_is_better,
            }
        )

    def retrieve_results_as_df(self) -> pd.DataFrame:
        """
        Convert ExperimentTracker information into a Pandas DataFrame.

        Contains the configuration, the run parameters, eval metric and score of every run.
        """
        parameters_df = pd.DataFrame(self.parameters)
        config_df = pd.DataFrame(self.configs)
        results_df = self._scores_df()
        results_df = results_df.merge(
            config_df, how="left", left_index=True, right_index=True
        )
        results_df = results_df.merge(
            parameters_df,
            how="left",
            left_index=True,
            right_index=True,
            suffixes=("", "_parameter"),
        )
        return results_df

    def get_best_score(self, target_metric: str) -> Union[int, float]:
        """Expects results in the tracker"""
        results_df = self._scores_df()
        if results_df.empty:
            raise ValueError("No results have been found in experiment tracker")

        scores = results_df.loc[results_df["metric_used"] == target_metric]
        if scores.empty:
            raise ValueError(f"No results for metric '{target_metric}' have been found.")
        if scores["metric_higher_is_better"].iloc[-1]:
            return scores["eval_scores"].max()
        return scores["eval_scores"].min()

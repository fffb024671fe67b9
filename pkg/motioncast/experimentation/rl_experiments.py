"""Multi-seed reinforcement learning experiments.

Every experiment trains one agent per derived seed and condition and reports medians over seeds. Runs are
independent, so they execute concurrently with joblib without changing the results.
"""
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import spearmanr

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.config.base_classes import BaseClassEnvironment
from motioncast.config.training_config import LearnConfig
from motioncast.experimentation.tracking import ExperimentTracker
from motioncast.general_utils.general_utils import derive_seeds, logger
from motioncast.rl.options import OptionSpec, duplicate_options, options_from_primitives
from motioncast.rl.q_learning import SelectionMode, TrainingResult, train
from motioncast.synthetic.generators import corrupt_labels


def _seeded(config: LearnConfig, seed: int) -> LearnConfig:
    return config.model_copy(update={"global_random_state": seed})


def run_seeds(
    env: BaseClassEnvironment,
    options: Optional[Sequence[OptionSpec]],
    config: LearnConfig,
    mode: SelectionMode,
    nb_seeds: int,
    n_jobs: int = 1,
) -> List[TrainingResult]:
    """Train one agent per seed derived from config.global_random_state."""
    seeds = derive_seeds(config.global_random_state, nb_seeds)
    return Parallel(n_jobs=n_jobs)(
        delayed(train)(env, options, _seeded(config, seed), mode) for seed in seeds
    )


def _summarize(results: Sequence[TrainingResult], window: int) -> Dict[str, float]:
    return {
        "final_reward": float(np.median([result.final_reward(window) for result in results])),
        "aulc": float(np.median([result.area_under_curve() for result in results])),
        "goal_rate": float(
            np.mean([bool(result.curve["reached_goal"].any()) for result in results])
            if results
            else 0.0
        ),
        "final_goal_rate": float(
            np.mean([bool(result.curve["reached_goal"].tail(window).any()) for result in results])
            if results
            else 0.0
        ),
    }


def compare_modes(
    env: BaseClassEnvironment,
    options: Sequence[OptionSpec],
    config: LearnConfig,
    modes: Sequence[SelectionMode] = ("annotated", "flat", "micro"),
    nb_seeds: int = 20,
    window: int = 100,
    n_jobs: int = 1,
    experiment_tracker: Optional[ExperimentTracker] = None,
) -> pd.DataFrame:
    """Median final reward, median area under the learning curve, the share of seeds that ever reached the goal and
    the share of seeds that still reached it within the final window, per selection mode. All modes share the same
    seeds."""
    logger(f"{datetime.utcnow()}: Start comparing modes {list(modes)} over {nb_seeds} seeds.")
    rows = []
    for position, mode in enumerate(modes):
        results = run_seeds(env, options, config, mode, nb_seeds, n_jobs)
        rows.append({"mode": mode, **_summarize(results, window)})
        if experiment_tracker is not None:
            experiment_tracker.add_results(
                experiment_id=position,
                score_category="rl_run",
                config=config,
                parameters={"mode": mode, "nb_seeds": nb_seeds},
                eval_scores=rows[-1]["final_reward"],
                metric_used="median_final_reward",
                metric_higher_is_better=True,
            )
    return pd.DataFrame(rows)


@dataclass
class SensitivityResult:
    """Median learning performance per corruption rate and its Spearman correlation with the rate."""

    table: pd.DataFrame
    spearman_rho: float
    p_value: float


def corruption_sensitivity(
    library: PrimitiveLibrary,
    env: BaseClassEnvironment,
    config: LearnConfig,
    rates: Sequence[float] = (0.0, 0.25, 0.5, 0.75),
    corruption_mode: str = "class-targeted",
    classes: Optional[Sequence[str]] = None,
    nb_seeds: int = 20,
    window: int = 100,
    n_jobs: int = 1,
) -> SensitivityResult:
    """Train annotated agents on option libraries whose class labels were corrupted at increasing rates.

    Options keep the micro actions of their true motion and move to the class of the corrupted label.
    """
    logger(
        f"{datetime.utcnow()}: Start {corruption_mode} corruption sensitivity over rates {list(rates)}."
    )
    rows = []
    for rate in rates:
        corrupted = corrupt_labels(
            library,
            rate,
            mode=corruption_mode,
            classes=classes,
            random_state=config.global_random_state,
        )
        results = run_seeds(
            env, options_from_primitives(corrupted.library), config, "annotated", nb_seeds, n_jobs
        )
        rows.append(
            {"rate": rate, "nb_corrupted": len(corrupted.corrupted_ids), **_summarize(results, window)}
        )
    table = pd.DataFrame(rows)
    if len(table) > 1 and table["aulc"].nunique() > 1:
        rho, p_value = spearmanr(table["rate"], table["aulc"])
    else:
        rho, p_value = 0.0, 1.0
    return SensitivityResult(table=table, spearman_rho=float(rho), p_value=float(p_value))


def class_removal_effect(
    library: PrimitiveLibrary,
    env: BaseClassEnvironment,
    config: LearnConfig,
    removed_classes: Sequence[str],
    nb_seeds: int = 20,
    window: int = 100,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """Compare annotated learning on the full library with learning after removing each class in turn."""
    logger(f"{datetime.utcnow()}: Start class removal experiment for {list(removed_classes)}.")
    rows = []
    results = run_seeds(env, options_from_primitives(library), config, "annotated", nb_seeds, n_jobs)
    rows.append({"removed": "", **_summarize(results, window)})
    for label in removed_classes:
        reduced = library.without_classes([label])
        results = run_seeds(env, options_from_primitives(reduced), config, "annotated", nb_seeds, n_jobs)
        rows.append({"removed": label, **_summarize(results, window)})
    return pd.DataFrame(rows)


def duplication_effect(
    options: Sequence[OptionSpec],
    env: BaseClassEnvironment,
    config: LearnConfig,
    copies: Sequence[int] = (1, 5, 10),
    nb_seeds: int = 20,
    window: int = 100,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """Median learning performance when every option is repeated within its class."""
    logger(f"{datetime.utcnow()}: Start duplication experiment for copies {list(copies)}.")
    rows = []
    for count in copies:
        results = run_seeds(
            env, duplicate_options(options, count), config, "annotated", nb_seeds, n_jobs
        )
        rows.append({"copies": count, **_summarize(results, window)})
    return pd.DataFrame(rows)

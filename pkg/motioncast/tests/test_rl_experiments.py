import numpy as np
import pytest

from motioncast.config.training_config import LearnConfig
from motioncast.experimentation.rl_experiments import (
    class_removal_effect,
    compare_modes,
    corruption_sensitivity,
    duplication_effect,
    run_seeds,
)
from motioncast.experimentation.tracking import ExperimentTracker
from motioncast.rl.environments import CrateEnvironment
from motioncast.rl.options import OptionSpec, default_option_library, options_from_primitives
from motioncast.tests.make_data.create_data import ChainEnvironment, create_small_library

SMALL = LearnConfig(episodes=6, max_decisions_per_episode=10, global_random_state=3)


@pytest.fixture(scope="module")
def library():
    return create_small_library()


@pytest.fixture
def chain_options():
    return [
        OptionSpec("fwd", "walk", ("move-forward",)),
        OptionSpec("wait", "jump", ("idle", "idle")),
    ]


def test_run_seeds_trains_one_agent_per_seed(chain_options):
    results = run_seeds(ChainEnvironment(), chain_options, SMALL, "flat", nb_seeds=3)
    again = run_seeds(ChainEnvironment(), chain_options, SMALL, "flat", nb_seeds=3)

    seeds = [result.config.global_random_state for result in results]
    assert len(set(seeds)) == 3
    assert SMALL.global_random_state not in seeds
    for first, second in zip(results, again):
        assert first.curve.equals(second.curve)


def test_compare_modes(chain_options):
    tracker = ExperimentTracker()
    table = compare_modes(
        ChainEnvironment(),
        chain_options,
        SMALL,
        nb_seeds=2,
        window=3,
        experiment_tracker=tracker,
    )

    assert list(table.columns) == ["mode", "final_reward", "aulc", "goal_rate", "final_goal_rate"]
    assert table["mode"].tolist() == ["annotated", "flat", "micro"]
    assert table["goal_rate"].between(0.0, 1.0).all()
    assert tracker.metric_used == ["median_final_reward"] * 3


def test_corruption_sensitivity(library):
    result = corruption_sensitivity(
        library,
        CrateEnvironment(max_steps=30),
        SMALL,
        rates=(0.0, 0.25, 0.5),
        classes=["wave", "bend", "jump"],
        nb_seeds=2,
        window=3,
    )

    assert result.table["rate"].tolist() == [0.0, 0.25, 0.5]
    assert result.table["nb_corrupted"].tolist() == [0, 3, 6]
    assert -1.0 <= result.spearman_rho <= 1.0
    assert 0.0 <= result.p_value <= 1.0 or np.isnan(result.p_value)


def test_class_removal_effect(library):
    table = class_removal_effect(
        library, CrateEnvironment(max_steps=30), SMALL, removed_classes=["wave"], nb_seeds=2, window=3
    )
    assert table["removed"].tolist() == ["", "wave"]
    assert list(table.columns) == ["removed", "final_reward", "aulc", "goal_rate", "final_goal_rate"]


def test_duplication_effect():
    table = duplication_effect(
        default_option_library(), CrateEnvironment(max_steps=30), SMALL, copies=(1, 2), nb_seeds=2, window=3
    )
    assert table["copies"].tolist() == [1, 2]
    assert np.isfinite(table["aulc"]).all()


def test_mode_ordering_under_random_exploration():
    # twelve cells to the goal, eleven decisions per episode: single micro actions can never get there
    env = ChainEnvironment(nb_states=13, goal_reward=200.0, start=0)
    options = [
        OptionSpec("walk_1", "walk", ("move-forward",) * 3),
        OptionSpec("wave_1", "wave", ("wipe-line",)),
        OptionSpec("wave_2", "wave", ("wipe-circular",)),
        OptionSpec("crouch_1", "crouch", ("idle",)),
        OptionSpec("crouch_2", "crouch", ("pick-sponge",)),
    ]
    config = LearnConfig(
        episodes=200, epsilon_start=1.0, epsilon_end=1.0, max_decisions_per_episode=11, global_random_state=2
    )
    table = compare_modes(env, options, config, nb_seeds=5, window=200).set_index("mode")

    assert table.loc["micro", "final_reward"] == -11.0
    assert table.loc["micro", "goal_rate"] == 0.0
    assert table.loc["flat", "final_reward"] > table.loc["micro", "final_reward"]
    assert table.loc["annotated", "final_reward"] > table.loc["flat", "final_reward"] + 50.0
    assert table.loc["annotated", "final_goal_rate"] == 1.0


SHORT_CORRIDOR = ChainEnvironment(nb_states=6, goal_reward=200.0, start=0)
EXPLORING = LearnConfig(
    episodes=200, epsilon_start=1.0, epsilon_end=1.0, max_decisions_per_episode=11, global_random_state=4
)


@pytest.fixture(scope="module")
def corridor_library():
    # walk primitives step forward, wave and crouch primitives never leave the cell
    return create_small_library(classes=("walk", "wave", "crouch"), per_class=2)


def test_removing_the_only_useful_class_blocks_the_goal(corridor_library):
    table = class_removal_effect(
        corridor_library, SHORT_CORRIDOR, EXPLORING, removed_classes=["walk"], nb_seeds=5, window=200
    ).set_index("removed")

    assert table.loc["walk", "goal_rate"] == 0.0
    assert table.loc["walk", "final_reward"] == -11.0
    assert table.loc["", "goal_rate"] == 1.0
    assert table.loc["", "final_reward"] > 100.0


def test_corrupting_the_useful_class_slows_learning(corridor_library):
    result = corruption_sensitivity(
        corridor_library,
        SHORT_CORRIDOR,
        EXPLORING,
        rates=(0.0, 1.0),
        classes=["walk"],
        nb_seeds=5,
        window=200,
    )

    assert result.table["nb_corrupted"].tolist() == [0, 2]
    assert result.table["aulc"].iloc[0] > result.table["aulc"].iloc[1]
    assert result.spearman_rho == pytest.approx(-1.0)


def test_duplicated_options_do_not_change_class_choice(corridor_library):
    options = options_from_primitives(corridor_library)
    table = duplication_effect(options, SHORT_CORRIDOR, EXPLORING, copies=(1, 5), nb_seeds=5, window=200)

    assert table["final_goal_rate"].tolist() == [1.0, 1.0]
    assert (table["final_reward"] > 100.0).all()

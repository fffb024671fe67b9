"""Define annotation, evaluation, reinforcement learning and data generation parameters.

Pydantic models are used to define the configuration parameters. This allows for type checking and validation of
the configuration parameters. Default configurations can be loaded, adjusted and passed into the blueprints, the
evaluation harness and the learners.
"""
from typing import List, Literal, Tuple

from pydantic import BaseModel, field_validator


class AnnotationConfig(BaseModel):
    """Define the nearest neighbor label transfer.

    :param k: Number of nearest neighbors. Clipped to the library size.
    :param epsilon: Guard added to every distance before inverting it into a vote weight.
    :param use_bagging: Whether to use bootstrap aggregation wherever the library allows it.
    :param nb_bags: Number of bootstrap resamples when bagging is used.
    """

    k: int = 5
    epsilon: float = 1e-9
    use_bagging: bool = False
    nb_bags: int = 25

    @field_validator("k", "nb_bags")
    @classmethod
    def check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("k and nb_bags must be at least 1.")
        return value


class EvaluationConfig(BaseModel):
    """Define the Monte Carlo evaluation protocol.

    :param protocol: "split" runs stratified random train-test splits, "one-shot" keeps a single random exemplar
        per class as training data.
    :param split_fraction: Share of each class used for training under the split protocol.
    :param trials: Number of Monte Carlo trials.
    :param global_random_state: Master seed. Every trial derives its own seed from it.
    """

    protocol: Literal["split", "one-shot"] = "split"
    split_fraction: float = 0.5
    trials: int = 100
    global_random_state: int = 10

    @field_validator("split_fraction")
    @classmethod
    def check_split_fraction(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("split_fraction must lie strictly between 0 and 1.")
        return value


class LearnConfig(BaseModel):
    """Define the semi-Markov Q-learning protocol.

    :param gamma: Discount factor per elementary time step.
    :param alpha_exponent: Exponent of the inverse polynomial learning rate (1 + t)^-exponent, t being the number of
        previous updates of the state-option pair.
    :param alpha_min: Lower clamp of the learning rate.
    :param alpha_max: Upper clamp of the learning rate.
    :param epsilon_start: Exploration rate of the first episode.
    :param epsilon_end: Exploration rate of the last episode. Decays linearly in between.
    :param episodes: Number of training episodes.
    :param max_decisions_per_episode: Number of option choices before the environment resets.
    :param prune_threshold: Classes whose tried options never left the state and earned a mean reward per micro action
        below this value are masked in annotated mode.
    :param prune_min_visits: Minimum number of visits of a class in a state before it can be masked.
    :param global_random_state: Seed of the training run.
    """

    gamma: float = 0.8
    alpha_exponent: float = 0.85
    alpha_min: float = 1e-4
    alpha_max: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    episodes: int = 500
    max_decisions_per_episode: int = 100
    prune_threshold: float = 0.0
    prune_min_visits: int = 3
    global_random_state: int = 10

    @field_validator("gamma")
    @classmethod
    def check_gamma(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("gamma must lie strictly between 0 and 1.")
        return value

    @field_validator("epsilon_start", "epsilon_end")
    @classmethod
    def check_epsilon(cls, value: float) -> float:
        if not 0 <= value <= 1:
            raise ValueError("Exploration rates must lie in [0, 1].")
        return value

    @field_validator("episodes")
    @classmethod
    def check_episodes(cls, value: int) -> int:
        if value < 0:
            raise ValueError("episodes must be non-negative.")
        return value


class CrateRewardConfig(BaseModel):
    """Define the rewards of the crate pushing task.

    :param closer: Reward for moving the crate one cell closer to the goal.
    :param away: Penalty for moving the crate away from the goal or for the agent walking away from the crate.
    :param per_action: Cost of every elementary action.
    :param goal: Reward for placing the crate on the goal.
    :param speed_bonus: Additional reward when the goal is reached within speed_bonus_steps elementary actions.
    :param speed_bonus_steps: Step budget of the speed bonus.
    """

    closer: float = 5.0
    away: float = -20.0
    per_action: float = -1.0
    goal: float = 1000.0
    speed_bonus: float = 1500.0
    speed_bonus_steps: int = 60


class WipeRewardConfig(BaseModel):
    """Define the rewards of the surface wiping task.

    :param find_sponge: Reward for picking up the sponge.
    :param wipe_area: Reward for every wiping pass on a dirty cell.
    :param hard_section: Reward for clearing a cell that needed more than one pass.
    :param per_action: Cost of every elementary action.
    :param move_away: Penalty for walking away from the dirty surface while holding the sponge.
    :param drop_sponge: Penalty for dropping the sponge.
    :param clear_all: Reward for clearing the whole surface.
    :param time_bonus: Additional reward when the surface is cleared within time_bonus_steps elementary actions.
    :param time_bonus_steps: Step budget of the time bonus.
    """

    find_sponge: float = 100.0
    wipe_area: float = 10.0
    hard_section: float = 150.0
    per_action: float = -1.0
    move_away: float = -50.0
    drop_sponge: float = -250.0
    clear_all: float = 1000.0
    time_bonus: float = 1500.0
    time_bonus_steps: int = 80


class SuiteConfig(BaseModel):
    """Define the synthetic motion suite.

    :param classes: Motion classes to generate.
    :param per_class: Number of sequences per class.
    :param duration_frames: Number of frames at speed factor 1.
    :param speed_range: Range of the uniformly drawn speed factors.
    :param scale_range: Range of the uniformly drawn actor scales.
    :param viewpoint_range: Range of the uniformly drawn in-plane viewpoint angles in radians.
    :param noise_sigma: Standard deviation of the per point Gaussian noise.
    """

    classes: List[str] = ["wave", "bend", "jump", "walk", "spin", "crouch"]
    per_class: int = 6
    duration_frames: int = 16
    speed_range: Tuple[float, float] = (0.85, 1.2)
    scale_range: Tuple[float, float] = (0.8, 1.25)
    viewpoint_range: Tuple[float, float] = (-0.6, 0.6)
    noise_sigma: float = 0.0

    @field_validator("per_class")
    @classmethod
    def check_per_class(cls, value: int) -> int:
        if value < 1:
            raise ValueError("per_class must be at least 1.")
        return value

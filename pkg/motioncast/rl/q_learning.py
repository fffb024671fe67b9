"""Semi-Markov Q-learning over options with flat or class-first (annotated) option selection.

An option that runs for tau micro actions and collects the discounted reward R updates
Q(s, o) <- Q(s, o) + alpha * (R + gamma^tau * max_o' Q(s', o') - Q(s, o)). With tau = 1 this is plain Q-learning.
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from motioncast.config.base_classes import BaseClassEnvironment, BaseClassExperimentTracker
from motioncast.config.training_config import LearnConfig
from motioncast.general_utils.exceptions import MotionCastError
from motioncast.general_utils.general_utils import logger
from motioncast.rl.options import OptionSpec, execute_option, micro_action_library

SelectionMode = Literal["annotated", "flat", "micro"]
StateKey = Tuple[int, ...]

CURVE_COLUMNS = ["episode", "reward", "epsilon", "alpha", "decisions", "steps", "reached_goal"]


class QTable:
    """Sparse table of option values. Missing entries read 0."""

    def __init__(self):
        self.values: Dict[Tuple[StateKey, str], float] = {}
        self.visits: Dict[Tuple[StateKey, str], int] = {}
        self.class_visits: Dict[Tuple[StateKey, str], int] = {}
        self.reward_rates: Dict[Tuple[StateKey, str], float] = {}
        self.moved: Set[Tuple[StateKey, str]] = set()

    def get(self, state_key: StateKey, option_id: str) -> float:
        return self.values.get((state_key, option_id), 0.0)

    def set(self, state_key: StateKey, option_id: str, value: float) -> None:
        if not np.isfinite(value):
            raise MotionCastError(f"Non-finite Q value for option '{option_id}'.")
        self.values[(state_key, option_id)] = float(value)

    def visit_count(self, state_key: StateKey, option_id: str) -> int:
        return self.visits.get((state_key, option_id), 0)

    def record_visit(
        self,
        state_key: StateKey,
        option: OptionSpec,
        next_state_key: Optional[StateKey] = None,
        reward_rate: float = 0.0,
    ) -> None:
        """Count a visit and keep the running mean reward per micro action and whether the option ever left the state.

        Without next_state_key the option counts as having left the state.
        """
        key = (state_key, option.id)
        count = self.visit_count(state_key, option.id)
        self.visits[key] = count + 1
        class_key = (state_key, option.class_label)
        self.class_visits[class_key] = self.class_visits.get(class_key, 0) + 1
        previous = self.reward_rates.get(key, 0.0)
        self.reward_rates[key] = previous + (reward_rate - previous) / (count + 1)
        if next_state_key is None or next_state_key != state_key:
            self.moved.add(key)

    def stalled(self, state_key: StateKey, option_id: str) -> bool:
        """The option was tried in this state and never led anywhere else."""
        return self.visit_count(state_key, option_id) > 0 and (state_key, option_id) not in self.moved

    def max_value(self, state_key: StateKey, option_ids: Iterable[str]) -> float:
        return max((self.get(state_key, option_id) for option_id in option_ids), default=0.0)

    def states(self) -> List[StateKey]:
        return sorted({state_key for state_key, _ in self.values})

    def __len__(self) -> int:
        return len(self.values)


def learning_rate(visits: int, config: LearnConfig) -> float:
    """Inverse polynomial decay (1 + visits)^-exponent clamped to [alpha_min, alpha_max]."""
    return float(np.clip((1.0 + visits) ** -config.alpha_exponent, config.alpha_min, config.alpha_max))


def smdp_update(
    q_table: QTable,
    state_key: StateKey,
    option_id: str,
    reward: float,
    duration: int,
    next_state_key: StateKey,
    next_option_ids: Iterable[str],
    alpha: float,
    gamma: float,
    terminal: bool = False,
) -> float:
    """Apply one semi-Markov Q-learning update and return the new value.

    :param reward: Discounted reward collected while the option ran.
    :param duration: Number of micro actions the option ran for.
    :param terminal: The episode ended inside the option. Terminal states are not bootstrapped.
    """
    if duration < 1:
        raise MotionCastError("Option durations must be at least 1.")
    bootstrap = 0.0 if terminal else gamma**duration * q_table.max_value(next_state_key, next_option_ids)
    current = q_table.get(state_key, option_id)
    value = current + alpha * (reward + bootstrap - current)
    q_table.set(state_key, option_id, value)
    return value


def _greedy(q_table: QTable, state_key: StateKey, options: Sequence[OptionSpec]) -> OptionSpec:
    # options are sorted by id, max keeps the first of equal values
    return max(options, key=lambda option: q_table.get(state_key, option.id))


def _epsilon_greedy(
    q_table: QTable,
    state_key: StateKey,
    options: Sequence[OptionSpec],
    epsilon: float,
    random_generator: np.random.Generator,
) -> OptionSpec:
    if random_generator.random() < epsilon:
        return options[int(random_generator.integers(len(options)))]
    return _greedy(q_table, state_key, options)


def class_values(
    q_table: QTable, state_key: StateKey, options: Sequence[OptionSpec]
) -> Dict[str, float]:
    """Best option value per class."""
    values: Dict[str, float] = {}
    for option in options:
        value = q_table.get(state_key, option.id)
        values[option.class_label] = max(values.get(option.class_label, value), value)
    return values


def pruned_classes(
    q_table: QTable, state_key: StateKey, options: Sequence[OptionSpec], config: LearnConfig
) -> Set[str]:
    """Classes tried at least prune_min_visits times in this state whose tried options all stalled there while
    earning less than prune_threshold per micro action.

    An option that ever changed the state keeps its class admissible whatever its value, so classes that only look
    bad before their payoff is propagated stay explorable. The class holding the greedy maximum is never pruned.
    """
    values = class_values(q_table, state_key, options)
    best_class = max(sorted(values), key=lambda label: values[label])
    pruned = set()
    for label in sorted(values):
        if label == best_class:
            continue
        if q_table.class_visits.get((state_key, label), 0) < config.prune_min_visits:
            continue
        tried = [
            option
            for option in options
            if option.class_label == label and q_table.visit_count(state_key, option.id) > 0
        ]
        if tried and all(
            q_table.stalled(state_key, option.id)
            and q_table.reward_rates.get((state_key, option.id), 0.0) < config.prune_threshold
            for option in tried
        ):
            pruned.add(label)
    return pruned


def select_option(
    q_table: QTable,
    state_key: StateKey,
    options: Sequence[OptionSpec],
    mode: SelectionMode,
    epsilon: float,
    random_generator: np.random.Generator,
    config: Optional[LearnConfig] = None,
    masked_classes: Optional[Iterable[str]] = None,
) -> OptionSpec:
    """Choose the next option epsilon-greedily.

    Flat and micro mode run epsilon-greedy over all options. Annotated mode first chooses a class epsilon-greedily
    by its best option value among the admissible classes, then an option of that class. Classes in masked_classes
    and pruned classes are not admissible unless no class would remain. Ties go to the lowest option id (lowest
    class label at class level).
    """
    if not options:
        raise MotionCastError("Option selection needs at least one option.")
    ordered = sorted(options, key=lambda option: option.id)
    if mode in ("flat", "micro"):
        return _epsilon_greedy(q_table, state_key, ordered, epsilon, random_generator)
    if mode != "annotated":
        raise MotionCastError(f"Unknown selection mode '{mode}'.")

    config = config or LearnConfig()
    values = class_values(q_table, state_key, ordered)
    excluded = set(masked_classes or ()) | pruned_classes(q_table, state_key, ordered, config)
    admissible = [label for label in sorted(values) if label not in excluded] or sorted(values)
    if random_generator.random() < epsilon:
        chosen_class = admissible[int(random_generator.integers(len(admissible)))]
    else:
        chosen_class = max(admissible, key=lambda label: values[label])
    members = [option for option in ordered if option.class_label == chosen_class]
    return _epsilon_greedy(q_table, state_key, members, epsilon, random_generator)


def greedy_policy(q_table: QTable, options: Sequence[OptionSpec]) -> Dict[str, str]:
    """Map every state key seen during training ("dx,dy,...") to the id of its best option."""
    ordered = sorted(options, key=lambda option: option.id)
    return {
        ",".join(str(part) for part in state_key): _greedy(q_table, state_key, ordered).id
        for state_key in q_table.states()
    }


@dataclass
class TrainingResult:
    """Outcome of one training run.

    :param curve: One row per episode with columns episode, reward, epsilon, alpha, decisions, steps, reached_goal.
    :param policy: Greedy policy snapshot, state key -> option id.
    :param step_rewards: Undiscounted reward of every micro action, per episode.
    """

    curve: pd.DataFrame
    q_table: QTable
    policy: Dict[str, str]
    options: List[OptionSpec]
    mode: SelectionMode
    config: LearnConfig
    environment: str = "environment"
    step_rewards: List[List[float]] = field(default_factory=list)

    def final_reward(self, window: int = 100) -> float:
        """Mean reward of the last window episodes."""
        if self.curve.empty:
            return 0.0
        return float(self.curve["reward"].tail(window).mean())

    def area_under_curve(self) -> float:
        """Mean episode reward over the whole run."""
        if self.curve.empty:
            return 0.0
        return float(self.curve["reward"].mean())


def _epsilon(config: LearnConfig, episode: int) -> float:
    if config.episodes <= 1:
        return config.epsilon_start
    share = episode / (config.episodes - 1)
    return config.epsilon_start + share * (config.epsilon_end - config.epsilon_start)


def run_episode(
    env: BaseClassEnvironment,
    options: Sequence[OptionSpec],
    q_table: QTable,
    config: LearnConfig,
    mode: SelectionMode,
    epsilon: float,
    random_generator: np.random.Generator,
    learn: bool = True,
    masked_classes: Optional[Iterable[str]] = None,
) -> Dict[str, Any]:
    """Run one episode of at most max_decisions_per_episode options, updating q_table when learn is set."""
    state = env.reset(random_generator)
    option_ids = [option.id for option in options]
    rewards: List[float] = []
    decisions = 0
    alpha = config.alpha_max
    for decisions in range(1, config.max_decisions_per_episode + 1):
        state_key = env.state_key(state)
        option = select_option(
            q_table, state_key, options, mode, epsilon, random_generator, config, masked_classes
        )
        outcome = execute_option(env, state, option, config.gamma)
        rewards.extend(outcome.rewards)
        if learn:
            next_state_key = env.state_key(outcome.state)
            alpha = learning_rate(q_table.visit_count(state_key, option.id), config)
            # a step cap only truncates the episode, the state it stops in keeps its value
            smdp_update(
                q_table,
                state_key,
                option.id,
                outcome.reward,
                outcome.duration,
                next_state_key,
                option_ids,
                alpha,
                config.gamma,
                terminal=outcome.done and bool(env.solved(outcome.state)),
            )
            q_table.record_visit(
                state_key, option, next_state_key, float(np.mean(outcome.rewards))
            )
        state = outcome.state
        if outcome.done:
            break
    return {
        "reward": float(np.sum(rewards)),
        "alpha": alpha,
        "decisions": decisions,
        "steps": len(rewards),
        "reached_goal": bool(env.solved(state)),
        "step_rewards": rewards,
    }


def train(
    env: BaseClassEnvironment,
    options: Optional[Sequence[OptionSpec]],
    config: Optional[LearnConfig] = None,
    mode: SelectionMode = "annotated",
    masked_classes: Optional[Iterable[str]] = None,
    experiment_tracker: Optional[BaseClassExperimentTracker] = None,
    experiment_id: int = 0,
) -> TrainingResult:
    """Train a semi-Markov Q-learner.

    :param env: Task environment.
    :param options: Option library. Micro mode ignores it and uses one option per micro action.
    :param config: Takes a LearnConfig instance. Its global_random_state makes the run deterministic.
    :param mode: "annotated" selects a class first, "flat" and "micro" select among all options.
    :param masked_classes: Classes excluded from annotated selection.
    :param experiment_tracker: Optional tracker receiving the final reward of the run.
    :return: TrainingResult with the learning curve and the greedy policy.
    """
    config = config or LearnConfig()
    options = micro_action_library() if mode == "micro" else list(options or [])
    if not options:
        raise MotionCastError("Training needs at least one option.")
    masked = list(masked_classes or ())
    logger(
        f"{datetime.utcnow()}: Start training on {env.name} in {mode} mode for {config.episodes} episodes "
        f"with {len(options)} options."
    )
    random_generator = np.random.default_rng(config.global_random_state)
    q_table = QTable()
    rows = []
    step_rewards = []
    for episode in range(config.episodes):
        epsilon = _epsilon(config, episode)
        stats = run_episode(
            env, options, q_table, config, mode, epsilon, random_generator, True, masked
        )
        step_rewards.append(stats.pop("step_rewards"))
        rows.append({"episode": episode, "epsilon": epsilon, **stats})

    result = TrainingResult(
        curve=pd.DataFrame(rows, columns=CURVE_COLUMNS),
        q_table=q_table,
        policy=greedy_policy(q_table, options),
        options=list(options),
        mode=mode,
        config=config,
        environment=env.name,
        step_rewards=step_rewards,
    )
    if experiment_tracker is not None:
        experiment_tracker.add_results(
            experiment_id=experiment_id,
            score_category="rl_run",
            config=config,
            parameters={"mode": mode, "environment": env.name, "seed": config.global_random_state},
            eval_scores=result.final_reward(),
            metric_used="final_reward",
            metric_higher_is_better=True,
        )
    return result


def evaluate_policy(
    env: BaseClassEnvironment,
    result: TrainingResult,
    episodes: int = 20,
    random_state: int = 0,
) -> pd.DataFrame:
    """Roll out the greedy policy of a trained agent without further learning."""
    logger(f"{datetime.utcnow()}: Start evaluating the {result.mode} policy for {episodes} episodes.")
    random_generator = np.random.default_rng(random_state)
    rows = []
    for episode in range(episodes):
        stats = run_episode(
            env, result.options, result.q_table, result.config, result.mode, 0.0, random_generator, False
        )
        stats.pop("step_rewards")
        stats.pop("alpha")
        rows.append({"episode": episode, **stats})
    return pd.DataFrame(rows, columns=["episode", "reward", "decisions", "steps", "reached_goal"])

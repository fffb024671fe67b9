"""Options (macro actions) built from motion primitives and their execution."""
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.config.base_classes import BaseClassEnvironment
from motioncast.general_utils.exceptions import MotionCastError

MICRO_ACTIONS = (
    "move-forward",
    "turn-left",
    "turn-right",
    "push",
    "wipe-circular",
    "wipe-line",
    "pick-sponge",
    "idle",
)


@dataclass(frozen=True)
class OptionSpec:
    """Fixed sequence of micro actions executed as one decision.

    :param id: Unique option id.
    :param class_label: Action class the option is grouped under in annotated selection.
    :param micro_actions: Micro actions run in order.
    """

    id: str
    class_label: str
    micro_actions: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "micro_actions", tuple(self.micro_actions))
        if not self.micro_actions:
            raise MotionCastError(f"Option '{self.id}' needs at least one micro action.")
        unknown = sorted(set(self.micro_actions) - set(MICRO_ACTIONS))
        if unknown:
            raise MotionCastError(f"Option '{self.id}' uses unknown micro actions {unknown}.")
        if not self.class_label:
            raise MotionCastError(f"Option '{self.id}' has no class label.")

    @property
    def duration(self) -> int:
        return len(self.micro_actions)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "class_label": self.class_label, "micro_actions": list(self.micro_actions)}


@dataclass(frozen=True)
class OptionOutcome:
    """Result of running an option.

    :param reward: Discounted reward sum over the executed micro actions.
    :param duration: Number of executed micro actions. Smaller than the option length when the episode ended early.
    :param rewards: Undiscounted reward of every executed micro action.
    """

    state: Any
    reward: float
    duration: int
    done: bool
    rewards: Tuple[float, ...]


def execute_option(
    env: BaseClassEnvironment, state: Any, option: OptionSpec, gamma: float
) -> OptionOutcome:
    discounted = 0.0
    rewards = []
    done = False
    for position, action in enumerate(option.micro_actions):
        state, reward, done = env.step(state, action)
        rewards.append(reward)
        discounted += gamma**position * reward
        if done:
            break
    return OptionOutcome(
        state=state, reward=discounted, duration=len(rewards), done=done, rewards=tuple(rewards)
    )


def micro_action_library(actions: Sequence[str] = MICRO_ACTIONS) -> List[OptionSpec]:
    """One single step option per micro action, all in one class."""
    return [OptionSpec(id=action, class_label="micro", micro_actions=(action,)) for action in actions]


def _option(class_label: str, index: int, *actions: str) -> OptionSpec:
    return OptionSpec(id=f"{class_label}_{index}", class_label=class_label, micro_actions=actions)


def default_option_library() -> List[OptionSpec]:
    """Hand-labeled library with two or three primitives per motion class."""
    return [
        _option("walk", 1, "move-forward"),
        _option("walk", 2, "move-forward", "move-forward"),
        _option("walk", 3, "move-forward", "move-forward", "move-forward"),
        _option("spin", 1, "turn-left"),
        _option("spin", 2, "turn-right"),
        _option("spin", 3, "turn-left", "turn-left"),
        _option("bend", 1, "push"),
        _option("bend", 2, "push", "push"),
        _option("bend", 3, "push", "push", "push"),
        _option("wave", 1, "wipe-circular", "wipe-circular"),
        _option("wave", 2, "wipe-line"),
        _option("crouch", 1, "pick-sponge"),
        _option("crouch", 2, "idle", "pick-sponge"),
        _option("jump", 1, "move-forward", "idle"),
        _option("jump", 2, "idle", "idle"),
    ]


def _primitive_body(motion_class: str, motion_labels: Sequence[str], repeats: int) -> Tuple[str, ...]:
    left_sided = any("left" in label for label in motion_labels)
    if motion_class == "walk":
        return ("move-forward",) * repeats
    if motion_class == "spin":
        return ("turn-left" if left_sided else "turn-right",) * repeats
    if motion_class == "bend":
        return ("push",) * repeats
    if motion_class == "wave":
        return ("wipe-line" if left_sided else "wipe-circular",) * repeats
    if motion_class == "crouch":
        return ("pick-sponge",) + ("idle",) * (repeats - 1)
    if motion_class == "jump":
        return ("move-forward",) + ("idle",) * repeats
    if motion_class == "reach":
        return ("pick-sponge",) + ("wipe-circular",) * (repeats - 1)
    raise MotionCastError(f"No micro action body is defined for motion class '{motion_class}'.")


def options_from_primitives(
    library: PrimitiveLibrary, frames_per_action: int = 8
) -> List[OptionSpec]:
    """Turn every library entry into an option.

    The option body follows what the primitive really shows (its ground truth class, its left or right side and its
    length, one repetition per frames_per_action frames clipped to [1, 3]). The option is grouped under the entry's
    action label, which may come from an annotation and may be wrong.
    """
    options = []
    for entry in library.entries:
        motion_class = entry.ground_truth_label or entry.action_label
        repeats = int(np.clip(round(entry.nb_frames / frames_per_action), 1, 3))
        options.append(
            OptionSpec(
                id=entry.id,
                class_label=entry.action_label,
                micro_actions=_primitive_body(motion_class, entry.motion_labels, repeats),
            )
        )
    return options


def duplicate_options(options: Sequence[OptionSpec], copies: int) -> List[OptionSpec]:
    """Repeat every option copies times within its class. Copies get the suffix '#<n>'."""
    if copies < 1:
        raise MotionCastError("copies must be at least 1.")
    duplicated = list(options)
    for copy in range(1, copies):
        duplicated.extend(
            OptionSpec(id=f"{option.id}#{copy}", class_label=option.class_label, micro_actions=option.micro_actions)
            for option in options
        )
    return duplicated


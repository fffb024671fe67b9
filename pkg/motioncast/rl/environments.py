"""Deterministic grid world tasks solved with motion primitives.

Cells are (x, y) tuples, y grows to the north. Headings are 0 north, 1 east, 2 south and 3 west. Both tasks charge
the per action cost for every micro action, including actions that have no effect in the current state.
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from motioncast.config.base_classes import BaseClassEnvironment
from motioncast.config.training_config import CrateRewardConfig, WipeRewardConfig

Cell = Tuple[int, int]

HEADINGS = ((0, 1), (1, 0), (0, -1), (-1, 0))


def _ahead(cell: Cell, heading: int) -> Cell:
    dx, dy = HEADINGS[heading]
    return cell[0] + dx, cell[1] + dy


def _manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _clip(value: int, bound: int = 3) -> int:
    return int(np.clip(value, -bound, bound))


def _turn(heading: int, action: str) -> int:
    if action == "turn-left":
        return (heading - 1) % 4
    return (heading + 1) % 4


@dataclass(frozen=True)
class CrateState:
    """State of the crate task.

    :param crate_shift: Change of the crate's goal distance caused by the last micro action (-1, 0 or +1).
    :param steps: Number of micro actions taken in the episode.
    """

    agent: Cell
    heading: int
    crate: Cell
    goal: Cell
    hands_on_crate: bool = False
    crate_shift: int = 0
    steps: int = 0


class CrateEnvironment(BaseClassEnvironment):
    """Push a heavy crate from a random interior cell onto the goal corner.

    :param size: Side length of the square grid. The goal is the north east corner.
    :param rewards: Takes a CrateRewardConfig instance.
    :param max_steps: Episodes end after this number of micro actions.
    """

    name = "crate"

    def __init__(
        self, size: int = 6, rewards: Optional[CrateRewardConfig] = None, max_steps: int = 300
    ):
        if size < 3:
            raise ValueError("The crate grid needs a side length of at least 3.")
        self.size = size
        self.rewards = rewards or CrateRewardConfig()
        self.max_steps = max_steps
        self.goal = (size - 1, size - 1)

    def inside(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.size and 0 <= cell[1] < self.size

    def reset(self, random_generator: np.random.Generator) -> CrateState:
        interior = [(x, y) for x in range(1, self.size - 1) for y in range(1, self.size - 1)]
        crate = interior[int(random_generator.integers(len(interior)))]
        free = [
            (x, y)
            for x in range(self.size)
            for y in range(self.size)
            if (x, y) != crate and (x, y) != self.goal
        ]
        agent = free[int(random_generator.integers(len(free)))]
        heading = int(random_generator.integers(4))
        return CrateState(
            agent=agent,
            heading=heading,
            crate=crate,
            goal=self.goal,
            hands_on_crate=_ahead(agent, heading) == crate,
        )

    def step(self, state: CrateState, action: str) -> Tuple[CrateState, float, bool]:
        reward = self.rewards.per_action
        agent, heading, crate = state.agent, state.heading, state.crate
        crate_shift = 0
        solved = False

        if action in ("turn-left", "turn-right"):
            heading = _turn(heading, action)
        elif action == "move-forward":
            target = _ahead(agent, heading)
            if self.inside(target) and target != crate:
                if _manhattan(target, crate) > _manhattan(agent, crate):
                    reward += self.rewards.away
                agent = target
        elif action == "push":
            front = _ahead(agent, heading)
            beyond = _ahead(front, heading)
            if front == crate and self.inside(beyond):
                crate_shift = _manhattan(beyond, state.goal) - _manhattan(crate, state.goal)
                reward += self.rewards.closer if crate_shift < 0 else self.rewards.away
                agent, crate = front, beyond
                if crate == state.goal:
                    solved = True
                    reward += self.rewards.goal
                    if state.steps + 1 <= self.rewards.speed_bonus_steps:
                        reward += self.rewards.speed_bonus

        steps = state.steps + 1
        next_state = CrateState(
            agent=agent,
            heading=heading,
            crate=crate,
            goal=state.goal,
            hands_on_crate=_ahead(agent, heading) == crate,
            crate_shift=crate_shift,
            steps=steps,
        )
        return next_state, reward, solved or steps >= self.max_steps

    def state_key(self, state: CrateState) -> Tuple[int, ...]:
        """Crate offset from the agent, heading, goal offset from the crate (offsets clipped to 3), contact and the
        change of the crate goal distance caused by the last micro action."""
        return (
            _clip(state.crate[0] - state.agent[0]),
            _clip(state.crate[1] - state.agent[1]),
            state.heading,
            _clip(state.goal[0] - state.crate[0]),
            _clip(state.goal[1] - state.crate[1]),
            int(state.hands_on_crate),
            state.crate_shift,
        )

    def solved(self, state: CrateState) -> bool:
        return state.crate == state.goal


@dataclass(frozen=True)
class WipeState:
    """State of the wiping task.

    :param sponge: Cell of the sponge. Follows the agent while the sponge is held.
    :param dirt: Dirt level of every cell of the wall row, west to east.
    :param initial_dirt: Dirt levels at the start of the episode.
    """

    agent: Cell
    heading: int
    sponge_held: bool
    sponge: Cell
    dirt: Tuple[int, ...]
    initial_dirt: Tuple[int, ...]
    steps: int = 0


class WipeEnvironment(BaseClassEnvironment):
    """Find the sponge and wipe every dirty section of the wall.

    The wall occupies the northern row. The agent walks on the rows below it and wipes the wall cell in front of it
    while facing north from the row next to the wall.

    :param width: Number of wall sections.
    :param height: Number of rows including the wall row.
    :param rewards: Takes a WipeRewardConfig instance.
    :param max_steps: Episodes end after this number of micro actions.
    """

    name = "wipe"
    max_dirt = 3

    def __init__(
        self,
        width: int = 6,
        height: int = 4,
        rewards: Optional[WipeRewardConfig] = None,
        max_steps: int = 300,
    ):
        if width < 2 or height < 2:
            raise ValueError("The wipe grid needs at least two columns and two rows.")
        self.width = width
        self.height = height
        self.rewards = rewards or WipeRewardConfig()
        self.max_steps = max_steps
        self.wall_row = height - 1

    def walkable(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.wall_row

    def reset(self, random_generator: np.random.Generator) -> WipeState:
        dirt = random_generator.integers(0, self.max_dirt + 1, size=self.width)
        if not dirt.any():
            dirt[int(random_generator.integers(self.width))] = 1
        cells = [(x, y) for x in range(self.width) for y in range(self.wall_row)]
        agent = cells[int(random_generator.integers(len(cells)))]
        sponge = cells[int(random_generator.integers(len(cells)))]
        dirt_levels = tuple(int(level) for level in dirt)
        return WipeState(
            agent=agent,
            heading=int(random_generator.integers(4)),
            sponge_held=False,
            sponge=sponge,
            dirt=dirt_levels,
            initial_dirt=dirt_levels,
        )

    def _faced_sections(self, state: WipeState, action: str) -> Tuple[int, ...]:
        if not state.sponge_held or state.heading != 0 or state.agent[1] != self.wall_row - 1:
            return ()
        x = state.agent[0]
        if action == "wipe-line" and x + 1 < self.width:
            return x, x + 1
        return (x,)

    def step(self, state: WipeState, action: str) -> Tuple[WipeState, float, bool]:
        reward = self.rewards.per_action
        solved = False
        next_state = state

        if action in ("turn-left", "turn-right"):
            next_state = replace(state, heading=_turn(state.heading, action))
        elif action == "move-forward":
            target = _ahead(state.agent, state.heading)
            if self.walkable(target):
                if state.sponge_held and target[1] < state.agent[1]:
                    reward += self.rewards.move_away
                next_state = replace(
                    state, agent=target, sponge=target if state.sponge_held else state.sponge
                )
        elif action == "pick-sponge":
            if state.sponge_held:
                reward += self.rewards.drop_sponge
                next_state = replace(state, sponge_held=False, sponge=state.agent)
            elif state.sponge == state.agent:
                reward += self.rewards.find_sponge
                next_state = replace(state, sponge_held=True)
        elif action in ("wipe-circular", "wipe-line"):
            dirt = list(state.dirt)
            for section in self._faced_sections(state, action):
                if dirt[section] > 0:
                    dirt[section] -= 1
                    reward += self.rewards.wipe_area
                    if dirt[section] == 0 and state.initial_dirt[section] >= 2:
                        reward += self.rewards.hard_section
            if tuple(dirt) != state.dirt:
                next_state = replace(state, dirt=tuple(dirt))
                if not any(dirt):
                    solved = True
                    reward += self.rewards.clear_all
                    if state.steps + 1 <= self.rewards.time_bonus_steps:
                        reward += self.rewards.time_bonus

        steps = state.steps + 1
        next_state = replace(next_state, steps=steps)
        return next_state, reward, solved or steps >= self.max_steps

    def state_key(self, state: WipeState) -> Tuple[int, ...]:
        """Sponge flag and offset, heading, column, wall contact, dirt in front and number of dirty sections."""
        x = state.agent[0]
        at_wall = state.agent[1] == self.wall_row - 1
        return (
            int(state.sponge_held),
            0 if state.sponge_held else _clip(state.sponge[0] - x),
            0 if state.sponge_held else _clip(state.sponge[1] - state.agent[1]),
            state.heading,
            x,
            int(at_wall),
            state.dirt[x],
            state.dirt[x + 1] if x + 1 < self.width else -1,
            min(sum(1 for level in state.dirt if level), 3),
        )

    def solved(self, state: WipeState) -> bool:
        return not any(state.dirt)

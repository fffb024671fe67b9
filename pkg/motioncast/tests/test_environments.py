import numpy as np
import pytest

from motioncast.rl.environments import (
    CrateEnvironment,
    CrateState,
    WipeEnvironment,
    WipeState,
)
from motioncast.rl.options import OptionSpec, execute_option


@pytest.fixture
def crate_env():
    return CrateEnvironment()


@pytest.fixture
def wipe_env():
    return WipeEnvironment()


def _crate(agent, heading, crate, steps=0):
    return CrateState(agent=agent, heading=heading, crate=crate, goal=(5, 5), steps=steps)


def _wipe(dirt=(0, 0, 2, 1, 0, 0), held=False, agent=(2, 2), heading=0):
    return WipeState(
        agent=agent,
        heading=heading,
        sponge_held=held,
        sponge=agent,
        dirt=dirt,
        initial_dirt=dirt,
    )


def test_push_towards_goal(crate_env):
    state, reward, done = crate_env.step(_crate((2, 2), 1, (3, 2)), "push")

    assert reward == 4.0
    assert not done
    assert state.agent == (3, 2)
    assert state.crate == (4, 2)
    assert state.crate_shift == -1
    assert state.hands_on_crate


def test_push_onto_goal_with_speed_bonus(crate_env):
    state, reward, done = crate_env.step(_crate((5, 3), 0, (5, 4)), "push")

    assert reward == 2504.0
    assert done
    assert crate_env.solved(state)


def test_late_push_onto_goal(crate_env):
    _, reward, done = crate_env.step(_crate((5, 3), 0, (5, 4), steps=60), "push")
    assert reward == 1004.0
    assert done


def test_push_away_from_goal(crate_env):
    state, reward, _ = crate_env.step(_crate((3, 2), 3, (2, 2)), "push")
    assert reward == -21.0
    assert state.crate == (1, 2)
    assert state.crate_shift == 1


def test_push_against_the_border(crate_env):
    start = _crate((4, 2), 1, (5, 2))
    state, reward, _ = crate_env.step(start, "push")
    assert reward == -1.0
    assert (state.agent, state.crate) == (start.agent, start.crate)


def test_cannot_walk_into_the_crate(crate_env):
    state, reward, _ = crate_env.step(_crate((2, 2), 1, (3, 2)), "move-forward")
    assert reward == -1.0
    assert state.agent == (2, 2)


def test_walking_away_from_the_crate(crate_env):
    state, reward, _ = crate_env.step(_crate((2, 2), 3, (3, 2)), "move-forward")
    assert reward == -21.0
    assert state.agent == (1, 2)


def test_idle_and_turns(crate_env):
    start = _crate((2, 2), 0, (3, 3))
    state, reward, _ = crate_env.step(start, "idle")
    assert reward == -1.0
    assert state.steps == 1
    assert crate_env.step(start, "turn-left")[0].heading == 3
    assert crate_env.step(start, "turn-right")[0].heading == 1


def test_crate_episode_ends_after_max_steps():
    env = CrateEnvironment(max_steps=2)
    state, _, done = env.step(_crate((2, 2), 0, (3, 3)), "idle")
    assert not done
    _, _, done = env.step(state, "idle")
    assert done


def test_crate_reset(crate_env):
    random_generator = np.random.default_rng(0)
    for _ in range(50):
        state = crate_env.reset(random_generator)
        assert 1 <= state.crate[0] <= 4 and 1 <= state.crate[1] <= 4
        assert state.agent not in (state.crate, state.goal)
        assert state.steps == 0
        assert state.hands_on_crate == (
            (state.agent[0] + (0, 1, 0, -1)[state.heading], state.agent[1] + (1, 0, -1, 0)[state.heading])
            == state.crate
        )
    with pytest.raises(ValueError):
        CrateEnvironment(size=2)


def test_crate_state_key_clips_offsets(crate_env):
    state = _crate((0, 0), 2, (5, 1))
    assert crate_env.state_key(state) == (3, 1, 2, 0, 3, 0, 0)


def test_crate_state_key_remembers_the_last_push(crate_env):
    pushed, _, _ = crate_env.step(_crate((2, 2), 0, (2, 3)), "push")
    assert crate_env.state_key(pushed) == (0, 1, 0, 3, 1, 1, -1)

    rested, _, _ = crate_env.step(pushed, "idle")
    assert crate_env.state_key(rested)[-1] == 0
    assert crate_env.state_key(rested)[:-1] == crate_env.state_key(pushed)[:-1]


def test_execute_option_discounts_rewards(crate_env):
    start = _crate((2, 2), 0, (4, 4))
    single = execute_option(crate_env, start, OptionSpec("wait", "jump", ("idle",)), gamma=0.8)
    double = execute_option(crate_env, start, OptionSpec("wait2", "jump", ("idle", "idle")), gamma=0.8)

    assert (single.reward, single.duration) == (-1.0, 1)
    assert double.reward == pytest.approx(-1.8)
    assert double.duration == 2
    assert double.rewards == (-1.0, -1.0)
    assert double.state.steps == 2


def test_walk_option_reaches_the_crate(crate_env):
    walk = OptionSpec("walk_3", "walk", ("move-forward",) * 3)
    outcome = execute_option(crate_env, _crate((2, 0), 0, (2, 4)), walk, gamma=0.8)

    assert outcome.state.agent == (2, 3)
    assert outcome.state.hands_on_crate
    assert outcome.rewards == (-1.0, -1.0, -1.0)


def test_option_stops_when_the_episode_ends():
    env = CrateEnvironment(max_steps=1)
    option = OptionSpec("wait2", "jump", ("idle", "idle"))
    outcome = execute_option(env, _crate((2, 2), 0, (3, 3)), option, gamma=0.8)
    assert outcome.done
    assert outcome.duration == 1


def test_pick_and_wipe(wipe_env):
    state, reward, _ = wipe_env.step(_wipe(), "pick-sponge")
    assert reward == 99.0
    assert state.sponge_held

    state, reward, _ = wipe_env.step(state, "wipe-circular")
    assert reward == 9.0
    assert state.dirt == (0, 0, 1, 1, 0, 0)

    state, reward, done = wipe_env.step(state, "wipe-circular")
    assert reward == 159.0
    assert state.dirt == (0, 0, 0, 1, 0, 0)
    assert not done


def test_wipe_line_clears_the_wall(wipe_env):
    state, reward, done = wipe_env.step(_wipe(dirt=(0, 0, 1, 1, 0, 0), held=True), "wipe-line")

    assert reward == 2519.0
    assert done
    assert wipe_env.solved(state)


def test_dropping_the_sponge(wipe_env):
    state, reward, _ = wipe_env.step(_wipe(held=True), "pick-sponge")
    assert reward == -251.0
    assert not state.sponge_held
    assert state.sponge == (2, 2)


def test_moving_away_from_the_wall_with_the_sponge(wipe_env):
    state, reward, _ = wipe_env.step(_wipe(held=True, heading=2), "move-forward")
    assert reward == -51.0
    assert state.agent == (2, 1)
    assert state.sponge == (2, 1)


def test_wall_blocks_and_wiping_needs_the_sponge(wipe_env):
    state, reward, _ = wipe_env.step(_wipe(), "move-forward")
    assert reward == -1.0
    assert state.agent == (2, 2)

    state, reward, _ = wipe_env.step(_wipe(), "wipe-circular")
    assert reward == -1.0
    assert state.dirt == (0, 0, 2, 1, 0, 0)


def test_wipe_reset_and_state_key(wipe_env):
    random_generator = np.random.default_rng(1)
    for _ in range(50):
        state = wipe_env.reset(random_generator)
        assert any(state.dirt)
        assert state.dirt == state.initial_dirt
        assert wipe_env.walkable(state.agent)
        assert wipe_env.walkable(state.sponge)
        assert len(wipe_env.state_key(state)) == 9

    assert wipe_env.state_key(_wipe(held=True)) == (1, 0, 0, 0, 2, 1, 2, 1, 2)

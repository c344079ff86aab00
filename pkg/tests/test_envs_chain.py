"""Chain-walk transition rules and episode bookkeeping."""

import numpy as np
import pytest

from coordrl.envs import ChainEnv, chain_step, coordination_map


def test_coordination_map_truth_table():
    # a2 = 1 copies player 1, a2 = 0 plays the opposite
    assert coordination_map(0, 1) == (0, 0)
    assert coordination_map(1, 1) == (1, 1)
    assert coordination_map(0, 0) == (0, 1)
    assert coordination_map(1, 0) == (1, 0)


def test_matching_actions_move_the_pair():
    nxt, rewards, done = chain_step(2, 0, 0, 5, coordinated=False)
    assert (nxt, rewards, done) == (3, (-1, -1), False)
    nxt, _, _ = chain_step(2, 1, 1, 5, coordinated=False)
    assert nxt == 1


def test_mismatched_actions_stall():
    for position in range(5):
        nxt, rewards, done = chain_step(position, 0, 1, 5, coordinated=False)
        assert nxt == position
        assert rewards == (-1, -1)
        assert not done


def test_left_moves_clamp_at_origin():
    nxt, _, done = chain_step(0, 1, 1, 5, coordinated=False)
    assert nxt == 0
    assert not done


def test_terminal_cell_sets_done():
    nxt, _, done = chain_step(4, 0, 0, 5, coordinated=False)
    assert nxt == 5
    assert done


def test_coordinated_channel_inverts_agreement():
    # under the remap, a2 = 1 (agree) moves and a2 = 0 (disagree) stalls
    assert chain_step(2, 0, 1, 5, coordinated=True)[0] == 3
    assert chain_step(2, 0, 0, 5, coordinated=True)[0] == 2
    assert chain_step(2, 1, 1, 5, coordinated=True)[0] == 1


def test_rejects_bad_actions_and_positions():
    with pytest.raises(ValueError):
        chain_step(0, 2, 0, 5, coordinated=False)
    with pytest.raises(ValueError):
        chain_step(0, 0, -1, 5, coordinated=False)
    with pytest.raises(ValueError):
        chain_step(6, 0, 0, 5, coordinated=False)


def test_env_optimal_rollout():
    env = ChainEnv(length=5)
    assert env.reset(np.random.default_rng(0)) == 0
    total = 0
    done = False
    while not done:
        _, rewards, done = env.step(0, 0)
        total += rewards[0]
    assert env.position == 5
    assert total == env.optimal_return == -5.0
    assert env.steps == 5


def test_env_caps_stalled_episodes():
    env = ChainEnv(length=3)
    env.reset()
    steps = 0
    done = False
    while not done:
        _, _, done = env.step(0, 1)
        steps += 1
    assert steps == env.max_steps == 30
    assert env.position == 0


def test_env_shape_properties():
    env = ChainEnv(length=4)
    assert env.n_states == 5
    assert env.n_agents == 2
    assert env.n_actions == 2
    with pytest.raises(ValueError):
        ChainEnv(length=0)

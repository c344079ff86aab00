"""Episode CSV layout and round-tripping."""

import numpy as np
import pytest

from coordrl.csvio import read_rows, write_rows
from coordrl.envs import SpreadEnv
from coordrl.envs.recording import (
    episode_header,
    read_episode_csv,
    record_episode,
    write_episode_csv,
)


def test_episode_header_layout():
    header = episode_header(3, 2)
    assert header == [
        "step", "agent_id",
        "obs_0", "obs_1", "obs_2",
        "act_0", "act_1",
        "reward", "mask_id",
    ]


def test_record_episode_shape_and_masks():
    env = SpreadEnv(3, max_steps=5)

    def act(agent, obs):
        return np.zeros(2), agent % 2

    rows = record_episode(env, act, np.random.default_rng(0))
    assert len(rows) == 5 * 3
    assert [r[:2] for r in rows[:3]] == [[0, 0], [0, 1], [0, 2]]
    assert all(r[-1] == (r[1] % 2) for r in rows)


def test_episode_csv_roundtrip(tmp_path):
    env = SpreadEnv(3, max_steps=7)
    rng = np.random.default_rng(5)
    act_rng = np.random.default_rng(11)

    def act(agent, obs):
        return act_rng.uniform(-1, 1, size=2), None if agent == 0 else agent

    rows = record_episode(env, act, rng)
    path = tmp_path / "episode.csv"
    write_episode_csv(path, rows, env.obs_dims[0], env.act_dims[0], "f00dcafe")

    masks, reward_sums, obs_dim, act_dim = read_episode_csv(path)
    assert obs_dim == 14 and act_dim == 2
    assert masks[0] == [-1] * 7  # None recorded as the unmasked sentinel
    assert masks[1] == [1] * 7
    assert masks[2] == [2] * 7
    expected = [sum(r[-2] for r in rows if r[1] == a) for a in range(3)]
    np.testing.assert_allclose(reward_sums, expected, rtol=0, atol=0)

    _, _, config_hash = read_rows(path)
    assert config_hash == "f00dcafe"


def test_reward_sums_roundtrip_exactly(tmp_path):
    # repr-formatted floats must survive the trip bit for bit
    header = episode_header(1, 1)
    rows = [[0, 0, 0.1, 0.2, 1.0 / 3.0, -1], [1, 0, 0.1, 0.2, 0.1 + 0.2, -1]]
    path = tmp_path / "tiny.csv"
    write_rows(path, header, rows, "00")
    _, sums, _, _ = read_episode_csv(path)
    assert sums[0] == 1.0 / 3.0 + (0.1 + 0.2)


def test_read_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    write_rows(path, ["a", "b"], [[1, 2]], "00")
    with pytest.raises(ValueError):
        read_episode_csv(path)

"""Flat per-step episode recordings, the interchange format for analysis."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..csvio import read_rows, write_rows


def episode_header(obs_dim: int, act_dim: int) -> list[str]:
    return (
        ["step", "agent_id"]
        + [f"obs_{k}" for k in range(obs_dim)]
        + [f"act_{k}" for k in range(act_dim)]
        + ["reward", "mask_id"]
    )


def record_episode(env, act_fn, rng: np.random.Generator) -> list[list]:
    """Roll one episode; act_fn(agent, obs) -> (action, mask_id or None).

    Returns rows in the episode CSV layout, one per (step, agent).  Ragged
    observation widths across agents are not supported by the flat layout.
    """
    if len(set(env.obs_dims)) != 1 or len(set(env.act_dims)) != 1:
        raise ValueError("episode recording needs homogeneous agent dimensions")
    rows: list[list] = []
    obs = env.reset(rng)
    done = False
    step = 0
    while not done:
        decisions = [act_fn(i, obs[i]) for i in range(env.n_agents)]
        actions = [d[0] for d in decisions]
        next_obs, rewards, done = env.step(actions)
        for i in range(env.n_agents):
            mask_id = decisions[i][1]
            rows.append(
                [step, i]
                + [float(v) for v in obs[i]]
                + [float(v) for v in actions[i]]
                + [float(rewards[i]), -1 if mask_id is None else int(mask_id)]
            )
        obs = next_obs
        step += 1
    return rows


def write_episode_csv(path: str | Path, rows: list[list], obs_dim: int, act_dim: int, config_hash: str) -> None:
    write_rows(path, episode_header(obs_dim, act_dim), rows, config_hash)


def read_episode_csv(path: str | Path):
    """Returns (per-agent mask sequences, per-agent reward sums, obs_dim, act_dim)."""
    header, rows, _ = read_rows(path)
    if not header[:2] == ["step", "agent_id"] or header[-2:] != ["reward", "mask_id"]:
        raise ValueError(f"{path} is not an episode recording")
    obs_dim = sum(1 for h in header if h.startswith("obs_"))
    act_dim = sum(1 for h in header if h.startswith("act_"))
    masks: dict[int, list[int]] = {}
    rewards: dict[int, float] = {}
    for row in rows:
        agent = int(row[1])
        masks.setdefault(agent, []).append(int(row[-1]))
        rewards[agent] = rewards.get(agent, 0.0) + float(row[-2])
    agents = sorted(masks)
    return [masks[a] for a in agents], [rewards[a] for a in agents], obs_dim, act_dim

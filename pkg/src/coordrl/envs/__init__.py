"""Environments: the chain walk and the particle-world tasks."""

from __future__ import annotations

from .chain import ChainEnv, chain_step, coordination_map
from .particle import (
    BounceEnv,
    ChaseEnv,
    CompromiseEnv,
    ParticleEnv,
    SpreadEnv,
    World,
    integrate,
    observe,
    overlapping,
)

PARTICLE_TASKS = ("spread", "bounce", "compromise", "chase")


def make_env(name: str, n_agents: int | None = None, max_steps: int = 100):
    """Build a particle task by name; n_agents only varies for spread."""
    if name == "spread":
        return SpreadEnv(n_agents=n_agents or 3, max_steps=max_steps)
    if n_agents not in (None, 2):
        raise ValueError(f"{name} is a fixed two-agent task")
    if name == "bounce":
        return BounceEnv(max_steps=max_steps)
    if name == "compromise":
        return CompromiseEnv(max_steps=max_steps)
    if name == "chase":
        return ChaseEnv(max_steps=max_steps)
    raise ValueError(f"unknown environment {name!r}; choose from {PARTICLE_TASKS}")


__all__ = [
    "BounceEnv",
    "ChainEnv",
    "ChaseEnv",
    "CompromiseEnv",
    "PARTICLE_TASKS",
    "ParticleEnv",
    "SpreadEnv",
    "World",
    "chain_step",
    "coordination_map",
    "integrate",
    "make_env",
    "observe",
    "overlapping",
]

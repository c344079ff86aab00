"""Two-player chain walk whose transition requires matching actions.

Positions run 0..length with the terminal cell at the far right.  Action 0
pushes right, action 1 pushes left, and the pair only moves when both
(possibly remapped) actions agree.  Both players pay -1 every step, so the
optimal joint return is -length each.

The optional coordination channel reinterprets player 2's action relative to
player 1's: a2 = 1 means "agree" (copy a1) and a2 = 0 means "disagree" (play
the opposite), which hands player 2 full control over whether the pair moves
at all.
"""

from __future__ import annotations

import numpy as np


def coordination_map(a1: int, a2: int) -> tuple[int, int]:
    """Remap player 2's primitive to agree/disagree with player 1."""
    return a1, a1 * a2 + (1 - a1) * (1 - a2)


def chain_step(position: int, a1: int, a2: int, length: int, coordinated: bool) -> tuple[int, tuple[int, int], bool]:
    """Advance one step; returns (next position, rewards, done)."""
    for a in (a1, a2):
        if a not in (0, 1):
            raise ValueError(f"actions must be 0 or 1, got {a}")
    if not 0 <= position <= length:
        raise ValueError(f"position {position} outside chain of length {length}")
    e1, e2 = coordination_map(a1, a2) if coordinated else (a1, a2)
    nxt = position
    if e1 == e2:
        nxt = min(position + 1, length) if e1 == 0 else max(position - 1, 0)
    return nxt, (-1, -1), nxt == length


class ChainEnv:
    """Episode wrapper around chain_step with a step cap."""

    n_agents = 2
    n_actions = 2

    def __init__(self, length: int = 5, coordinated: bool = False, max_steps: int | None = None):
        if length < 1:
            raise ValueError("chain length must be positive")
        self.length = length
        self.coordinated = coordinated
        self.max_steps = max_steps if max_steps is not None else 10 * length
        self.position = 0
        self.steps = 0

    @property
    def n_states(self) -> int:
        return self.length + 1

    @property
    def optimal_return(self) -> float:
        return -float(self.length)

    def reset(self, rng: np.random.Generator | None = None) -> int:
        self.position = 0
        self.steps = 0
        return self.position

    def step(self, a1: int, a2: int) -> tuple[int, tuple[int, int], bool]:
        self.position, rewards, done = chain_step(self.position, a1, a2, self.length, self.coordinated)
        self.steps += 1
        if self.steps >= self.max_steps:
            done = True
        return self.position, rewards, done

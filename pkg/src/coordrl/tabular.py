"""Independent Boltzmann Q-learners on the chain walk.

The point of the exercise: with raw actions each learner's transitions are
randomized by its teammate's dithering, while the agree/disagree channel
gives player 2 one action ("disagree") whose outcome never depends on player
1 at all, cutting the variance of its Q-updates.  The experiment tracks the
greedy policy's return after every learning episode, for both encodings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs import ChainEnv
from .harness.seeding import child_rng

TOY_LEARNING_RATE = 0.05
TOY_DISCOUNT = 0.99
TOY_TEMPERATURE = 1.0
TOY_EVAL_EPISODES = 10
TOY_EPISODE_BUDGET = 150
TOY_SEEDS = 20
TOY_EFFICIENCY = 0.9


def boltzmann_probs(q_row: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Softmax of action values at the given temperature."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    z = np.asarray(q_row, dtype=np.float64) / temperature
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def boltzmann_sample(q_row: np.ndarray, temperature: float, rng: np.random.Generator) -> int:
    return int(rng.choice(len(q_row), p=boltzmann_probs(q_row, temperature)))


def greedy_action(q_row: np.ndarray, rng: np.random.Generator) -> int:
    """Argmax with ties broken uniformly; zero-initialized tables start unbiased."""
    q_row = np.asarray(q_row)
    best = np.flatnonzero(q_row == q_row.max())
    return int(best[0] if len(best) == 1 else rng.choice(best))


def q_update(q: np.ndarray, s: int, a: int, reward: float, s_next: int, terminal: bool,
             lr: float = TOY_LEARNING_RATE, gamma: float = TOY_DISCOUNT) -> None:
    """One tabular TD(0) backup; only true terminal entry stops the bootstrap.

    Episodes cut off by the step cap must keep bootstrapping or the learners
    conclude that stalling out the clock ends the per-step penalty.
    """
    bootstrap = 0.0 if terminal else gamma * float(q[s_next].max())
    q[s, a] += lr * (reward + bootstrap - q[s, a])


def greedy_return(q1: np.ndarray, q2: np.ndarray, env: ChainEnv, rng: np.random.Generator) -> float:
    """Return of one greedy rollout (random tie-breaks, no learning)."""
    s = env.reset()
    total = 0.0
    done = False
    while not done:
        s, rewards, done = env.step(greedy_action(q1[s], rng), greedy_action(q2[s], rng))
        total += rewards[0]
    return total


@dataclass
class ToyCurves:
    """Greedy-return curves for one action encoding, one row per seed."""

    length: int
    coordinated: bool
    returns: np.ndarray  # (n_seeds, episode budget)

    @property
    def mean_curve(self) -> np.ndarray:
        return self.returns.mean(axis=0)

    @property
    def stderr_curve(self) -> np.ndarray:
        return self.returns.std(axis=0, ddof=1) / np.sqrt(self.returns.shape[0])

    @property
    def threshold(self) -> float:
        return -self.length / TOY_EFFICIENCY

    def episodes_to_threshold(self) -> int:
        """First episode (1-based) where the seed-mean curve clears the bar."""
        hit = np.flatnonzero(self.mean_curve >= self.threshold)
        return int(hit[0]) + 1 if len(hit) else self.returns.shape[1] + 1


def train_toy_seed(length: int, coordinated: bool, rng: np.random.Generator,
                   budget: int = TOY_EPISODE_BUDGET,
                   lr: float = TOY_LEARNING_RATE,
                   gamma: float = TOY_DISCOUNT,
                   temperature: float = TOY_TEMPERATURE,
                   eval_episodes: int = TOY_EVAL_EPISODES) -> np.ndarray:
    """Alternate learning episodes with greedy evaluations; returns the curve."""
    env = ChainEnv(length=length, coordinated=coordinated)
    q1 = np.zeros((env.n_states, env.n_actions))
    q2 = np.zeros((env.n_states, env.n_actions))
    curve = np.empty(budget)
    for episode in range(budget):
        s = env.reset()
        done = False
        while not done:
            a1 = boltzmann_sample(q1[s], temperature, rng)
            a2 = boltzmann_sample(q2[s], temperature, rng)
            s_next, rewards, done = env.step(a1, a2)
            terminal = s_next == env.length
            q_update(q1, s, a1, rewards[0], s_next, terminal, lr, gamma)
            q_update(q2, s, a2, rewards[1], s_next, terminal, lr, gamma)
            s = s_next
        curve[episode] = np.mean(
            [greedy_return(q1, q2, env, rng) for _ in range(eval_episodes)]
        )
    return curve


def run_toy_experiment(length: int = 5, coordinated: bool = False,
                       n_seeds: int = TOY_SEEDS, master_seed: int = 0,
                       budget: int = TOY_EPISODE_BUDGET) -> ToyCurves:
    """Greedy-return curves over matched seed streams for one encoding."""
    variant = "coordinated" if coordinated else "baseline"
    rows = [
        train_toy_seed(length, coordinated, child_rng(master_seed, f"toy/{variant}/{i}"), budget)
        for i in range(n_seeds)
    ]
    return ToyCurves(length=length, coordinated=coordinated, returns=np.stack(rows))

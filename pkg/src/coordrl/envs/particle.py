"""Bounded 2-D particle world and the cooperative tasks built on it.

All tasks share one integrator: velocities are damped, driven by per-entity
forces, capped at a per-role speed limit, and positions are clamped so every
disc stays inside the [-1, 1]^2 arena.  Task-specific constants live at the
top of this module; the handful left open by the task definitions (prey
speed and lookahead, spring and contact stiffness, ball speed) were chosen to
satisfy the tested properties: landmarks reachable well inside an episode,
the prey uncatchable by a lone pursuer, the ball interceptable after
mid-episode.
"""

from __future__ import annotations

import numpy as np

DT = 0.1
DAMPING = 0.25
ARENA_HALF_WIDTH = 1.0

AGENT_RADIUS = 0.05
LANDMARK_RADIUS = 0.08
AGENT_ACCEL = 5.0
AGENT_MAX_SPEED = 1.0

PREY_RADIUS = 0.05
PREY_ACCEL = 8.0
PREY_MAX_SPEED = 1.3
PREY_LOOKAHEAD = 16
PREY_DANGER_HORIZON = 5
PREY_DANGER_RADIUS = 0.13
PREY_WALL_BONUS = 0.3
PREY_WALL_MARGIN_CAP = 0.3
PREY_SPAWN_SEPARATION = 0.5

_PREY_ANGLES = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
PREY_HEADINGS = np.stack([np.cos(_PREY_ANGLES), np.sin(_PREY_ANGLES)], axis=1)

SPRING_STIFFNESS = 0.75
SPRING_REST_LENGTH = 0.4
CONTACT_STIFFNESS = 5.0

BALL_RADIUS = 0.04
BALL_SPEED = 0.5
BALL_DROP_STEP = 50
BALL_SPAWN_Y = 0.95
TARGET_RADIUS = 0.1
TARGET_Y = 0.55

SPAWN_HALF_WIDTH = 0.9

REWARD_BOUNCE_SIDE = 0.1
REWARD_BOUNCE_TOP = 0.2
REWARD_BOUNCE_TARGET = 10.0
REWARD_LANDMARK = 10.0


class World:
    """Flat arrays describing every entity's kinematic state."""

    def __init__(self, radius, movable, accel, max_speed):
        n = len(radius)
        self.pos = np.zeros((n, 2))
        self.vel = np.zeros((n, 2))
        self.radius = np.asarray(radius, dtype=np.float64)
        self.movable = np.asarray(movable, dtype=bool)
        self.accel = np.asarray(accel, dtype=np.float64)
        self.max_speed = np.asarray(max_speed, dtype=np.float64)

    @property
    def n_entities(self) -> int:
        return len(self.radius)


def integrate(world: World, forces: np.ndarray) -> None:
    """One damped Euler step for all movable entities.

    Forces must be finite with every component in [-1, 1]; velocities are
    capped at each entity's speed limit and positions clamped so discs stay
    inside the arena, zeroing the outward velocity component on wall contact.
    """
    forces = np.asarray(forces, dtype=np.float64)
    if forces.shape != world.pos.shape:
        raise ValueError(f"forces shape {forces.shape} != {world.pos.shape}")
    if not np.all(np.isfinite(forces)):
        raise ValueError("forces must be finite")
    if np.any(np.abs(forces) > 1.0 + 1e-9):
        raise ValueError("force components must lie in [-1, 1]")

    m = world.movable
    vel = world.vel[m] * (1.0 - DAMPING) + forces[m] * DT * world.accel[m, None]
    speed = np.sqrt((vel ** 2).sum(axis=1))
    cap = world.max_speed[m]
    over = speed > cap
    if np.any(over):
        vel[over] *= (cap[over] / speed[over])[:, None]
    world.vel[m] = vel
    world.pos[m] += vel * DT

    lo = -ARENA_HALF_WIDTH + world.radius[m, None]
    hi = ARENA_HALF_WIDTH - world.radius[m, None]
    pos = world.pos[m]
    vel = world.vel[m]
    at_lo = pos < lo
    at_hi = pos > hi
    vel[at_lo & (vel < 0)] = 0.0
    vel[at_hi & (vel > 0)] = 0.0
    world.pos[m] = np.clip(pos, lo, hi)
    world.vel[m] = vel


def overlapping(pos_a, radius_a: float, pos_b, radius_b: float) -> bool:
    """Strict disc overlap: center distance below the sum of radii."""
    return float(np.linalg.norm(np.asarray(pos_a) - np.asarray(pos_b))) < radius_a + radius_b


def spring_force(pos_a, pos_b, rest=SPRING_REST_LENGTH, stiffness=SPRING_STIFFNESS):
    """Equal/opposite pull on two endpoints once stretched past rest length."""
    delta = np.asarray(pos_b) - np.asarray(pos_a)
    dist = float(np.linalg.norm(delta))
    if dist <= rest or dist == 0.0:
        zero = np.zeros(2)
        return zero, zero
    direction = delta / dist
    magnitude = stiffness * (dist - rest)
    return magnitude * direction, -magnitude * direction


def contact_forces(world: World, solid: list[int]) -> np.ndarray:
    """Linear penalty push-apart between overlapping solid entities."""
    forces = np.zeros_like(world.pos)
    for idx, a in enumerate(solid):
        for b in solid[idx + 1:]:
            delta = world.pos[a] - world.pos[b]
            dist = float(np.linalg.norm(delta))
            pen = world.radius[a] + world.radius[b] - dist
            if pen <= 0.0:
                continue
            direction = delta / dist if dist > 0 else np.array([1.0, 0.0])
            push = CONTACT_STIFFNESS * pen * direction
            forces[a] += push
            forces[b] -= push
    return forces


def observe(world: World, agent: int, others: list[int]) -> np.ndarray:
    """[own position, own velocity, relative position of each listed entity]."""
    parts = [world.pos[agent], world.vel[agent]]
    parts.extend(world.pos[o] - world.pos[agent] for o in others)
    return np.concatenate(parts)


def _segments_intersect(p0, p1, a, b):
    """Intersection point of segments [p0,p1] and [a,b], or None."""
    r = p1 - p0
    s = b - a
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return None
    q = a - p0
    t = (q[0] * s[1] - q[1] * s[0]) / denom
    u = (q[0] * r[1] - q[1] * r[0]) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return p0 + t * r
    return None


def reflect(velocity, segment_a, segment_b):
    """Specular reflection of `velocity` about the segment's normal."""
    tangent = np.asarray(segment_b) - np.asarray(segment_a)
    norm = np.linalg.norm(tangent)
    if norm == 0.0:
        return np.asarray(velocity, dtype=np.float64).copy()
    tangent = tangent / norm
    normal = np.array([-tangent[1], tangent[0]])
    v = np.asarray(velocity, dtype=np.float64)
    return v - 2.0 * float(v @ normal) * normal


def classify_bounce(origin, velocity, target_pos) -> float:
    """Reward for a reflected ball ray: target disc, top edge, or side."""
    origin = np.asarray(origin, dtype=np.float64)
    v = np.asarray(velocity, dtype=np.float64)
    speed2 = float(v @ v)
    if speed2 > 0.0:
        to_target = np.asarray(target_pos) - origin
        t_star = float(to_target @ v) / speed2
        if t_star > 0.0:
            closest = origin + t_star * v
            if np.linalg.norm(closest - np.asarray(target_pos)) < TARGET_RADIUS + BALL_RADIUS:
                return REWARD_BOUNCE_TARGET
    exits = []
    for axis, bound in ((0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)):
        if v[axis] == 0.0:
            continue
        t = (bound - origin[axis]) / v[axis]
        if t > 1e-12:
            exits.append((t, axis, bound))
    if not exits:
        return REWARD_BOUNCE_SIDE
    _, axis, bound = min(exits)
    if axis == 1 and bound == 1.0:
        return REWARD_BOUNCE_TOP
    return REWARD_BOUNCE_SIDE


class ParticleEnv:
    """Shared episode machinery; subclasses define entities, rewards, layout."""

    def __init__(self, n_agents: int, max_steps: int = 100):
        self.n_agents = n_agents
        self.max_steps = max_steps
        self.act_dims = [2] * n_agents
        self.world: World | None = None
        self.steps = 0
        self._rng: np.random.Generator | None = None

    discrete = False

    @property
    def obs_dims(self) -> list[int]:
        return [4 + 2 * len(self._observed_by(i)) for i in range(self.n_agents)]

    # subclass hooks -----------------------------------------------------

    def _build_world(self) -> World:
        raise NotImplementedError

    def _spawn(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def _observed_by(self, agent: int) -> list[int]:
        raise NotImplementedError

    def _internal_forces(self) -> np.ndarray:
        return np.zeros_like(self.world.pos)

    def _solid(self) -> list[int]:
        return list(range(self.n_agents))

    def _after_move(self) -> tuple[np.ndarray, bool]:
        raise NotImplementedError

    # episode API ---------------------------------------------------------

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        self._rng = rng
        self.world = self._build_world()
        self.steps = 0
        self._spawn(rng)
        return self._observations()

    def step(self, actions) -> tuple[list[np.ndarray], np.ndarray, bool]:
        if self.world is None:
            raise RuntimeError("reset() must be called before step()")
        actions = [np.asarray(a, dtype=np.float64) for a in actions]
        if len(actions) != self.n_agents:
            raise ValueError(f"expected {self.n_agents} actions, got {len(actions)}")
        for a in actions:
            if a.shape != (2,):
                raise ValueError(f"actions are 2-d forces, got shape {a.shape}")
            if not np.all(np.isfinite(a)) or np.any(np.abs(a) > 1.0 + 1e-9):
                raise ValueError("action components must be finite and lie in [-1, 1]")

        forces = self._internal_forces()
        forces += contact_forces(self.world, self._solid())
        for i, a in enumerate(actions):
            forces[i] += a
        np.clip(forces, -1.0, 1.0, out=forces)
        integrate(self.world, forces)

        rewards, done = self._after_move()
        self.steps += 1
        if self.steps >= self.max_steps:
            done = True
        return self._observations(), rewards, done

    def _observations(self) -> list[np.ndarray]:
        return [observe(self.world, i, self._observed_by(i)) for i in range(self.n_agents)]

    def _uniform_positions(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(-SPAWN_HALF_WIDTH, SPAWN_HALF_WIDTH, size=(count, 2))


class SpreadEnv(ParticleEnv):
    """N agents cover N landmarks; team reward is coverage minus collisions."""

    name = "spread"

    def __init__(self, n_agents: int = 3, max_steps: int = 100):
        if n_agents < 2:
            raise ValueError("spread needs at least two agents")
        super().__init__(n_agents, max_steps)
        self.n_landmarks = n_agents

    def _build_world(self) -> World:
        n = self.n_agents
        return World(
            radius=[AGENT_RADIUS] * n + [LANDMARK_RADIUS] * n,
            movable=[True] * n + [False] * n,
            accel=[AGENT_ACCEL] * n + [0.0] * n,
            max_speed=[AGENT_MAX_SPEED] * n + [0.0] * n,
        )

    def _spawn(self, rng):
        self.world.pos[:] = self._uniform_positions(rng, self.world.n_entities)
        self.world.vel[:] = 0.0

    def _observed_by(self, agent):
        others = [j for j in range(self.n_agents) if j != agent]
        return others + list(range(self.n_agents, self.n_agents + self.n_landmarks))

    def _after_move(self):
        w = self.world
        occupied = 0
        for lm in range(self.n_agents, self.n_agents + self.n_landmarks):
            if any(
                overlapping(w.pos[i], w.radius[i], w.pos[lm], w.radius[lm])
                for i in range(self.n_agents)
            ):
                occupied += 1
        collisions = 0
        for i in range(self.n_agents):
            for j in range(i + 1, self.n_agents):
                if overlapping(w.pos[i], w.radius[i], w.pos[j], w.radius[j]):
                    collisions += 1
        team = float(occupied - collisions)
        return np.full(self.n_agents, team), False


class BounceEnv(ParticleEnv):
    """Two spring-linked agents bat a falling ball toward a fixed target."""

    name = "bounce"
    BALL = 2
    TARGET = 3

    def __init__(self, max_steps: int = 100):
        super().__init__(2, max_steps)
        self.ball_active = False

    def _build_world(self) -> World:
        return World(
            radius=[AGENT_RADIUS, AGENT_RADIUS, BALL_RADIUS, TARGET_RADIUS],
            movable=[True, True, False, False],
            accel=[AGENT_ACCEL, AGENT_ACCEL, 0.0, 0.0],
            max_speed=[AGENT_MAX_SPEED, AGENT_MAX_SPEED, 0.0, 0.0],
        )

    def _spawn(self, rng):
        w = self.world
        w.pos[:2] = self._uniform_positions(rng, 2)
        w.pos[self.BALL] = (rng.uniform(-0.8, 0.8), BALL_SPAWN_Y)
        w.pos[self.TARGET] = (rng.uniform(-0.8, 0.8), TARGET_Y)
        w.vel[:] = 0.0
        self.ball_active = False
        self._ball_vel = np.array([0.0, -BALL_SPEED])

    def _observed_by(self, agent):
        return [1 - agent, self.BALL, self.TARGET]

    def _internal_forces(self):
        forces = np.zeros_like(self.world.pos)
        f0, f1 = spring_force(self.world.pos[0], self.world.pos[1])
        forces[0] += f0
        forces[1] += f1
        return forces

    def _after_move(self):
        w = self.world
        rewards = np.zeros(2)
        if self.steps >= BALL_DROP_STEP:
            self.ball_active = True
        if self.ball_active:
            before = w.pos[self.BALL].copy()
            after = before + self._ball_vel * DT
            hit = _segments_intersect(before, after, w.pos[0], w.pos[1])
            if hit is not None:
                reflected = reflect(self._ball_vel, w.pos[0], w.pos[1])
                w.pos[self.BALL] = hit
                self._ball_vel = reflected
                reward = classify_bounce(hit, reflected, w.pos[self.TARGET])
                return np.full(2, reward), True
            w.pos[self.BALL] = after
        return rewards, False


class CompromiseEnv(ParticleEnv):
    """Spring-linked agents chase their own (relocating) landmarks."""

    name = "compromise"

    def __init__(self, max_steps: int = 100):
        super().__init__(2, max_steps)

    def _build_world(self) -> World:
        return World(
            radius=[AGENT_RADIUS, AGENT_RADIUS, LANDMARK_RADIUS, LANDMARK_RADIUS],
            movable=[True, True, False, False],
            accel=[AGENT_ACCEL, AGENT_ACCEL, 0.0, 0.0],
            max_speed=[AGENT_MAX_SPEED, AGENT_MAX_SPEED, 0.0, 0.0],
        )

    def _spawn(self, rng):
        self.world.pos[:] = self._uniform_positions(rng, 4)
        self.world.vel[:] = 0.0

    def _observed_by(self, agent):
        own_landmark = 2 + agent
        other_landmark = 2 + (1 - agent)
        return [1 - agent, own_landmark, other_landmark]

    def _internal_forces(self):
        forces = np.zeros_like(self.world.pos)
        f0, f1 = spring_force(self.world.pos[0], self.world.pos[1])
        forces[0] += f0
        forces[1] += f1
        return forces

    def _after_move(self):
        w = self.world
        rewards = np.zeros(2)
        for i in range(2):
            lm = 2 + i
            if overlapping(w.pos[i], w.radius[i], w.pos[lm], w.radius[lm]):
                rewards[i] = REWARD_LANDMARK
                w.pos[lm] = self._rng.uniform(-SPAWN_HALF_WIDTH, SPAWN_HALF_WIDTH, size=2)
        return rewards, False


class ChaseEnv(ParticleEnv):
    """Two predators herd a faster scripted prey; reward counts touches."""

    name = "chase"
    PREY = 2

    def __init__(self, max_steps: int = 100):
        super().__init__(2, max_steps)

    def _build_world(self) -> World:
        return World(
            radius=[AGENT_RADIUS, AGENT_RADIUS, PREY_RADIUS],
            movable=[True, True, True],
            accel=[AGENT_ACCEL, AGENT_ACCEL, PREY_ACCEL],
            max_speed=[AGENT_MAX_SPEED, AGENT_MAX_SPEED, PREY_MAX_SPEED],
        )

    def _spawn(self, rng):
        self.world.pos[:2] = self._uniform_positions(rng, 2)
        # prey starts clear of both predators so flight always has headroom
        while True:
            candidate = rng.uniform(-SPAWN_HALF_WIDTH, SPAWN_HALF_WIDTH, size=2)
            gap = min(np.linalg.norm(candidate - self.world.pos[i]) for i in range(2))
            if gap > PREY_SPAWN_SEPARATION:
                break
        self.world.pos[self.PREY] = candidate
        self.world.vel[:] = 0.0

    def _observed_by(self, agent):
        return [1 - agent, self.PREY]

    def _solid(self):
        return [0, 1, self.PREY]

    def prey_force(self) -> np.ndarray:
        """Pick the escape heading whose simulated rollout keeps the most room.

        Each candidate heading is held fixed while the prey integrates its own
        dynamics and every predator runs straight at it at full speed.  A
        heading is ruled out when that rollout brings a predator within
        touching range inside the danger window; the survivors are ranked by
        final separation plus a bonus for ending away from the walls, so the
        prey slides along walls instead of pressing into corners.
        """
        w = self.world
        k = self.PREY
        n = len(PREY_HEADINGS)
        wall = ARENA_HALF_WIDTH - w.radius[k]
        pos = np.repeat(w.pos[k][None, :], n, axis=0)
        vel = np.repeat(w.vel[k][None, :], n, axis=0)
        preds = np.repeat(w.pos[: self.n_agents][None], n, axis=0)
        pred_step = w.max_speed[: self.n_agents, None] * DT
        cap = w.max_speed[k]
        danger = np.full(n, np.inf)
        for t in range(PREY_LOOKAHEAD):
            vel = (1.0 - DAMPING) * vel + PREY_HEADINGS * (w.accel[k] * DT)
            speed = np.linalg.norm(vel, axis=1, keepdims=True)
            vel *= cap / np.maximum(speed, cap)
            pos = np.clip(pos + vel * DT, -wall, wall)
            toward = pos[:, None, :] - preds
            gap = np.linalg.norm(toward, axis=2, keepdims=True)
            preds = preds + toward / np.maximum(gap, 1e-8) * pred_step
            if t < PREY_DANGER_HORIZON:
                closest = np.linalg.norm(pos[:, None, :] - preds, axis=2).min(axis=1)
                danger = np.minimum(danger, closest)
        end_gap = np.linalg.norm(pos[:, None, :] - preds, axis=2).min(axis=1)
        margin = np.minimum(wall - np.abs(pos), PREY_WALL_MARGIN_CAP).sum(axis=1)
        score = end_gap + PREY_WALL_BONUS * margin
        score = np.where(danger < PREY_DANGER_RADIUS, -100.0 + danger, score)
        return PREY_HEADINGS[int(np.argmax(score))].copy()

    def _internal_forces(self):
        forces = np.zeros_like(self.world.pos)
        forces[self.PREY] = self.prey_force()
        return forces

    def _after_move(self):
        w = self.world
        touching = sum(
            overlapping(w.pos[i], w.radius[i], w.pos[self.PREY], w.radius[self.PREY])
            for i in range(self.n_agents)
        )
        return np.full(self.n_agents, float(touching)), False

"""A small seeded racing simulator with rule-based styled drivers.

The car moves along a looped 1-D track with a lateral offset. A style is a
target speed plus Gaussian noise on the two action channels (steer, accel).
Each frame shows a perspective road strip on top and a speed bar below; an
observation stacks the four most recent frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ActionSpace, PlayDataset, sample_subset
from .errors import SizeError

# (steer std, accel std) per noise level; level 0 is noise-free
NOISE_LEVELS = {
    0: (0.0, 0.0),
    1: (0.01, 0.005),
    2: (0.02, 0.01),
    3: (0.03, 0.015),
    4: (0.04, 0.02),
    5: (0.05, 0.025),
}
DEFAULT_SPEEDS = (60.0, 65.0, 70.0, 75.0, 80.0)
ACTION_SPACE = ActionSpace.continuous(2)

GRASS, ROAD, BAR = 60.0, 200.0, 255.0


@dataclass(frozen=True)
class SimConfig:
    track_length: float = 1000.0
    segment_curvature: tuple = (0.0, 1.0, 0.0, -1.0, 0.0, 1.0, -1.0, 0.0)
    v_max: float = 100.0
    dt: float = 0.05
    accel_gain: float = 2.0
    drag: float = 0.001
    speed_gain: float = 0.02  # keeps accel unsaturated for most speeds, so styles differ in every state
    steer_gain: float = 0.1
    lateral_drift: float = 0.0004
    offset_gain: float = 2.0
    frames: int = 4
    height: int = 32
    width: int = 32
    road_rows: int = 24
    bar_rows: tuple = (25, 31)
    bar_min_speed: float = 40.0
    episode_steps: int = 256

    def __post_init__(self):
        if self.track_length <= 0 or self.v_max <= 0 or self.episode_steps <= 0:
            raise ValueError("track length, v_max and episode length must be positive")

    @property
    def obs_shape(self):
        return (self.frames, self.height, self.width)

    def curvature(self, x):
        seg = self.track_length / len(self.segment_curvature)
        idx = int((x % self.track_length) // seg) % len(self.segment_curvature)
        return self.segment_curvature[idx]


@dataclass(frozen=True)
class StyleSpec:
    target_speed: float
    noise: tuple = (0.0, 0.0)
    level: int | None = None

    def __post_init__(self):
        if self.target_speed <= 0:
            raise ValueError("target speed must be positive")
        if min(self.noise) < 0:
            raise ValueError("noise standard deviations must be non-negative")

    @classmethod
    def from_level(cls, speed, level):
        return cls(float(speed), NOISE_LEVELS[int(level)], int(level))

    @property
    def id(self):
        lvl = f"n{self.level}" if self.level is not None else f"n{self.noise[0]:g}-{self.noise[1]:g}"
        return f"s{self.target_speed:g}_{lvl}"


@dataclass
class CarState:
    x: float
    v: float
    y: float


def render_frame(state: CarState, cfg: SimConfig = SimConfig()) -> np.ndarray:
    """Rasterize one (height, width) frame; values are rounded to uint8."""
    h, w = cfg.height, cfg.width
    frame = np.zeros((h, w), dtype=np.float64)
    rows = np.arange(cfg.road_rows)
    depth = (cfg.road_rows - 1 - rows) / max(cfg.road_rows - 1, 1)
    ahead = np.array([cfg.curvature(state.x + 90.0 * d) for d in depth])
    centre = w / 2 - 6.0 * state.y + 10.0 * ahead * depth**2
    half = 3.0 + 9.0 * (1.0 - depth)
    left, right = (centre - half)[:, None], (centre + half)[:, None]
    cols = np.arange(w)[None, :]
    cover = np.clip(np.minimum(cols + 1, right) - np.maximum(cols, left), 0.0, 1.0)
    frame[: cfg.road_rows] = GRASS + (ROAD - GRASS) * cover
    span = cfg.v_max - cfg.bar_min_speed
    length = w * min(max((state.v - cfg.bar_min_speed) / span, 0.0), 1.0)
    bar = np.clip(length - np.arange(w), 0.0, 1.0) * BAR
    r0, r1 = cfg.bar_rows
    frame[r0:r1] = bar
    return np.rint(frame).astype(np.uint8)


class FrameStack:
    """Keeps the most recent frames; the earliest is repeated until full."""

    def __init__(self, frames):
        self.frames = frames
        self._buf: list = []

    def push(self, frame):
        if not self._buf:
            self._buf = [frame] * self.frames
        else:
            self._buf = self._buf[1:] + [frame]
        return np.stack(self._buf)


def render_observation(history, cfg: SimConfig = SimConfig()) -> np.ndarray:
    """Stack renders of the most recent car states (oldest first)."""
    stack = FrameStack(cfg.frames)
    obs = None
    for state in list(history)[-cfg.frames :]:
        obs = stack.push(render_frame(state, cfg))
    return obs


def controller(state: CarState, style: StyleSpec, cfg: SimConfig):
    """Noise-free (steer, accel) of the rule-based driver."""
    accel = min(max(cfg.speed_gain * (style.target_speed - state.v), -1.0), 1.0)
    feedforward = cfg.lateral_drift / cfg.steer_gain * cfg.curvature(state.x) * state.v
    steer = min(max(feedforward - cfg.offset_gain * state.y, -1.0), 1.0)
    return steer, accel


def step(state: CarState, steer: float, accel: float, cfg: SimConfig) -> CarState:
    v = min(max(state.v + cfg.accel_gain * accel - cfg.drag * state.v, 0.0), cfg.v_max)
    y = state.y + cfg.steer_gain * steer - cfg.lateral_drift * cfg.curvature(state.x) * state.v
    y = min(max(y, -1.5), 1.5)
    x = (state.x + v * cfg.dt) % cfg.track_length
    return CarState(x, v, y)


def run_episode(cfg: SimConfig, style: StyleSpec, seed, steps: int | None = None, initial: CarState | None = None):
    """Simulate one episode; returns (observations uint8, actions float32, speeds)."""
    rng = np.random.default_rng(seed)
    steps = cfg.episode_steps if steps is None else steps
    if initial is None:
        initial = CarState(rng.uniform(0, cfg.track_length), rng.uniform(0, cfg.v_max), rng.uniform(-0.5, 0.5))
    state = initial
    stack = FrameStack(cfg.frames)
    obs = np.empty((steps, *cfg.obs_shape), dtype=np.uint8)
    actions = np.empty((steps, 2), dtype=np.float32)
    speeds = np.empty(steps)
    s_steer, s_accel = style.noise
    for t in range(steps):
        obs[t] = stack.push(render_frame(state, cfg))
        steer, accel = controller(state, style, cfg)
        steer += s_steer * rng.standard_normal()
        accel += s_accel * rng.standard_normal()
        actions[t] = (steer, accel)
        speeds[t] = state.v
        state = step(state, float(actions[t, 0]), float(actions[t, 1]), cfg)
    return obs, actions, speeds


def episode_dataset(cfg, style, seed, steps=None, id=None) -> PlayDataset:
    obs, actions, _ = run_episode(cfg, style, seed, steps)
    return PlayDataset(ACTION_SPACE, cfg.obs_shape, obs, actions, id or style.id)


_ROLES = {"candidates": 0, "targets": 1, "train": 2}


def dataset_seed(seed, style: StyleSpec, role="candidates", trial=0):
    key = [int(seed), _ROLES[role], int(round(style.target_speed * 1000)), int(round(style.noise[0] * 1e6)),
           int(round(style.noise[1] * 1e6)), int(trial)]
    return np.random.SeedSequence(key)


def style_dataset(style: StyleSpec, samples: int, seed=0, role="candidates", trial=0,
                  cfg: SimConfig = SimConfig(), episodes: int | None = None) -> PlayDataset:
    """Concatenate seeded episodes of one style, then subsample."""
    if samples < 1:
        raise SizeError("samples per dataset must be >= 1")
    if episodes is None:
        episodes = math.ceil(1.25 * samples / cfg.episode_steps)
    if episodes * cfg.episode_steps < samples:
        raise SizeError(f"{episodes} episodes of {cfg.episode_steps} steps cannot supply {samples} samples")
    ss = dataset_seed(seed, style, role, trial)
    children = ss.spawn(episodes + 1)
    obs, acts = [], []
    for child in children[:episodes]:
        o, a, _ = run_episode(cfg, style, child)
        obs.append(o)
        acts.append(a)
    pool = PlayDataset(ACTION_SPACE, cfg.obs_shape, np.concatenate(obs), np.concatenate(acts), style.id)
    sub_seed = int(children[-1].generate_state(1)[0])
    return sample_subset(pool, samples, sub_seed, id=style.id)


def style_grid(speeds, noise_levels):
    if not speeds or not noise_levels:
        raise ValueError("speeds and noise levels must be non-empty")
    return [StyleSpec.from_level(s, n) for s in speeds for n in noise_levels]


def generate_style_grid(speeds, noise_levels, samples_per_dataset: int, seed=0, role="candidates", trial=0,
                        cfg: SimConfig = SimConfig()) -> dict:
    """One dataset per (speed, noise level) pair, keyed by StyleSpec."""
    return {
        style: style_dataset(style, samples_per_dataset, seed, role, trial, cfg)
        for style in style_grid(speeds, noise_levels)
    }

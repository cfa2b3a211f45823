"""Observation-action datasets and the ``.psty`` recording format.

A dataset keeps its observations as one uint8 array of shape
``(n, *obs_shape)`` and its actions as either a uint32 vector (discrete
action space) or a float32 ``(n, dim)`` matrix (continuous). Samples are an
ordered multiset: duplicates are kept and counted.

File layout (all integers little-endian)::

    b"PSTY" | u16 version=1 | u8 obs rank | u32 dim * rank
    | u8 action tag (0 discrete, 1 continuous) | u32 action size
    | u64 sample count | records...

Each record is the row-major uint8 observation followed by either a u32
action index or ``size`` float32 values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CorruptionError, FormatError, ShapeError, SizeError

MAGIC = b"PSTY"
VERSION = 1

DISCRETE = "discrete"
CONTINUOUS = "continuous"
_TAGS = {DISCRETE: 0, CONTINUOUS: 1}


@dataclass(frozen=True)
class ActionSpace:
    """``kind`` is ``"discrete"`` (``size`` = action count) or ``"continuous"`` (``size`` = dim)."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in _TAGS:
            raise ValueError(f"unknown action space kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("action space size must be >= 1")

    @classmethod
    def discrete(cls, n):
        return cls(DISCRETE, int(n))

    @classmethod
    def continuous(cls, dim):
        return cls(CONTINUOUS, int(dim))

    @property
    def is_discrete(self):
        return self.kind == DISCRETE


class PlaySample(NamedTuple):
    observation: np.ndarray
    action: int | np.ndarray


def _check_actions(space: ActionSpace, actions, n):
    if space.is_discrete:
        actions = np.asarray(actions)
        if actions.shape != (n,):
            raise ShapeError(f"expected {n} discrete actions, got shape {actions.shape}")
        if n and (actions.min() < 0 or actions.max() >= space.size):
            raise ShapeError(f"discrete action outside [0, {space.size})")
        return actions.astype(np.uint32)
    actions = np.asarray(actions, dtype=np.float32)
    if actions.shape != (n, space.size):
        raise ShapeError(f"expected actions of shape {(n, space.size)}, got {actions.shape}")
    return actions


@dataclass(eq=False)
class PlayDataset:
    action_space: ActionSpace
    obs_shape: tuple
    observations: np.ndarray
    actions: np.ndarray
    id: str = field(default="")

    def __post_init__(self):
        self.obs_shape = tuple(int(d) for d in self.obs_shape)
        obs = np.asarray(self.observations)
        if obs.size and (obs.min() < 0 or obs.max() > 255):
            raise ShapeError("observation intensities must lie in [0, 255]")
        obs = obs.astype(np.uint8, copy=False)
        if obs.ndim == len(self.obs_shape) and len(obs) == 0 and obs.shape != (0, *self.obs_shape):
            obs = obs.reshape((0, *self.obs_shape))
        if obs.shape[1:] != self.obs_shape:
            raise ShapeError(f"observations of shape {obs.shape[1:]} do not match header {self.obs_shape}")
        self.observations = obs
        self.actions = _check_actions(self.action_space, self.actions, len(obs))

    @classmethod
    def empty(cls, action_space, obs_shape, id=""):
        obs_shape = tuple(obs_shape)
        if action_space.is_discrete:
            actions = np.zeros(0, dtype=np.uint32)
        else:
            actions = np.zeros((0, action_space.size), dtype=np.float32)
        return cls(action_space, obs_shape, np.zeros((0, *obs_shape), np.uint8), actions, id)

    @classmethod
    def from_samples(cls, samples: Sequence[PlaySample], action_space, obs_shape, id=""):
        if not samples:
            return cls.empty(action_space, obs_shape, id)
        obs = np.stack([np.asarray(s.observation) for s in samples])
        acts = np.array([s.action for s in samples])
        return cls(action_space, obs_shape, obs, acts, id)

    def __len__(self):
        return len(self.observations)

    def __getitem__(self, i) -> PlaySample:
        return PlaySample(self.observations[i], self.actions[i])

    def __iter__(self) -> Iterator[PlaySample]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        # the id is a label, not content
        if not isinstance(other, PlayDataset):
            return NotImplemented
        return (
            self.action_space == other.action_space
            and self.obs_shape == other.obs_shape
            and np.array_equal(self.observations, other.observations)
            and np.array_equal(self.actions, other.actions)
        )

    def take(self, indices, id=None):
        indices = np.asarray(indices, dtype=np.intp)
        return PlayDataset(
            self.action_space,
            self.obs_shape,
            self.observations[indices],
            self.actions[indices],
            self.id if id is None else id,
        )

    def concat(self, other, id=None):
        if other.action_space != self.action_space or other.obs_shape != self.obs_shape:
            raise ShapeError("cannot concatenate datasets with different headers")
        return PlayDataset(
            self.action_space,
            self.obs_shape,
            np.concatenate([self.observations, other.observations]),
            np.concatenate([self.actions, other.actions]),
            self.id if id is None else id,
        )


def _record_dtype(obs_shape, space: ActionSpace):
    if space.is_discrete:
        act = ("action", "<u4")
    else:
        act = ("action", "<f4", (space.size,))
    return np.dtype([("obs", "u1", tuple(obs_shape)), act])


def _header(ds: PlayDataset) -> bytes:
    parts = [MAGIC, struct.pack("<HB", VERSION, len(ds.obs_shape))]
    parts.append(struct.pack(f"<{len(ds.obs_shape)}I", *ds.obs_shape))
    parts.append(struct.pack("<BIQ", _TAGS[ds.action_space.kind], ds.action_space.size, len(ds)))
    return b"".join(parts)


def dumps_dataset(ds: PlayDataset) -> bytes:
    rec = np.empty(len(ds), dtype=_record_dtype(ds.obs_shape, ds.action_space))
    rec["obs"] = ds.observations
    rec["action"] = ds.actions
    return _header(ds) + rec.tobytes()


def save_dataset(ds: PlayDataset, path) -> None:
    path = Path(path)
    data = dumps_dataset(ds)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write dataset to {path}: {exc}") from exc


def loads_dataset(data: bytes, id: str = "") -> PlayDataset:
    view = memoryview(data)
    if len(view) < 7 or bytes(view[:4]) != MAGIC:
        raise FormatError("missing PSTY magic bytes")
    version, rank = struct.unpack_from("<HB", view, 4)
    if version != VERSION:
        raise FormatError(f"unsupported .psty version {version}")
    off = 7
    try:
        dims = struct.unpack_from(f"<{rank}I", view, off)
        off += 4 * rank
        tag, size, count = struct.unpack_from("<BIQ", view, off)
    except struct.error as exc:
        raise CorruptionError("truncated header") from exc
    off += 13
    kinds = {v: k for k, v in _TAGS.items()}
    if tag not in kinds:
        raise FormatError(f"unknown action tag {tag}")
    space = ActionSpace(kinds[tag], size)
    dtype = _record_dtype(dims, space)
    payload = view[off:]
    complete = len(payload) // dtype.itemsize
    if complete < count:
        raise CorruptionError(
            f"declared {count} records but record {complete} is truncated or missing", record=complete
        )
    rec = np.frombuffer(payload, dtype=dtype, count=count)
    return PlayDataset(space, dims, rec["obs"].copy(), rec["action"].copy(), id)


def load_dataset(path, id: str | None = None) -> PlayDataset:
    """Read a ``.psty`` file; the id defaults to the file stem."""
    path = Path(path)
    return loads_dataset(path.read_bytes(), path.stem if id is None else id)


def sample_subset(ds: PlayDataset, n: int, seed: int, id=None) -> PlayDataset:
    """Draw ``n`` samples without replacement, deterministically per seed."""
    if n < 0 or n > len(ds):
        raise SizeError(f"cannot draw {n} samples from a dataset of {len(ds)}")
    rng = np.random.default_rng(seed)
    return ds.take(rng.choice(len(ds), size=n, replace=False), id=id)

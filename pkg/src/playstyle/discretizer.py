"""State mapping functions and per-dataset state tables.

A mapper turns a batch of observations into a matrix of integer codes, one
row per observation. Rows become :class:`DiscreteState` keys carrying a
stable 64-bit FNV-1a digest; dictionary lookups compare the full code on a
digest match, so colliding digests never merge distinct states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dataset import PlayDataset
from .errors import ShapeError, SizeError


class DiscreteState:
    __slots__ = ("code", "itemsize", "digest")

    def __init__(self, code: bytes, itemsize: int = 1, digest: int | None = None):
        self.code = bytes(code)
        self.itemsize = int(itemsize)
        if digest is None:
            digest = int(kernels.fnv1a_rows(np.frombuffer(self.code, np.uint8)[None])[0])
        self.digest = int(digest)

    @classmethod
    def from_symbols(cls, symbols, itemsize: int = 1):
        codes = np.asarray(symbols)[None].astype(f"<u{itemsize}")
        return _states_from_codes(codes)[0]

    @property
    def symbols(self) -> np.ndarray:
        return np.frombuffer(self.code, dtype=f"<u{self.itemsize}")

    def __len__(self):
        return len(self.code) // self.itemsize

    def __hash__(self):
        return hash(self.digest)

    def __eq__(self, other):
        if not isinstance(other, DiscreteState):
            return NotImplemented
        return self.digest == other.digest and self.itemsize == other.itemsize and self.code == other.code

    def __repr__(self):
        head = ",".join(str(s) for s in self.symbols[:8])
        more = ",..." if len(self) > 8 else ""
        return f"DiscreteState(len={len(self)}, digest={self.digest:016x}, [{head}{more}])"


def symbol_dtype(alphabet: int) -> np.dtype:
    """Smallest little-endian unsigned dtype holding symbols below ``alphabet``."""
    for bits in (8, 16, 32):
        if alphabet <= 2**bits:
            return np.dtype(f"<u{bits // 8}")
    return np.dtype("<u8")


def _as_code_matrix(codes: np.ndarray, dtype) -> np.ndarray:
    codes = np.asarray(codes)
    return np.ascontiguousarray(codes.reshape(len(codes), -1), dtype=dtype)


def _states_from_codes(codes: np.ndarray) -> list[DiscreteState]:
    digests = kernels.fnv1a_rows(codes)
    size = codes.dtype.itemsize
    return [DiscreteState(row.tobytes(), size, int(d)) for row, d in zip(codes, digests)]


class StateMapper:
    """Pure mapping from observations to discrete states."""

    kind = "abstract"
    alphabet = 256

    def codes(self, observations: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def states(self, observations) -> list[DiscreteState]:
        return _states_from_codes(_as_code_matrix(self.codes(np.asarray(observations)), symbol_dtype(self.alphabet)))

    def __call__(self, observation) -> DiscreteState:
        return self.states(np.asarray(observation)[None])[0]

    def describe(self) -> str:
        return self.kind


class PixelMapper(StateMapper):
    kind = "pixel"

    def codes(self, observations):
        observations = np.asarray(observations, dtype=np.uint8)
        return observations.reshape(len(observations), -1)


def bilinear_resize(image, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a 2-D grid with half-pixel-centre alignment."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D grid, got shape {image.shape}")
    if image.size == 0:
        raise SizeError("cannot resize an empty image")
    if out_h < 1 or out_w < 1:
        raise SizeError("output dimensions must be >= 1")
    return kernels.resize_bilinear(image[None], out_h, out_w)[0]


class LRDMapper(StateMapper):
    """Low-resolution downsampling: per-frame bilinear resize, then floor division."""

    kind = "lrd"

    def __init__(self, out_hw=(8, 8), intensity_div: int = 16):
        if intensity_div < 1:
            raise ValueError("intensity_div must be >= 1")
        self.out_hw = (int(out_hw[0]), int(out_hw[1]))
        self.intensity_div = int(intensity_div)
        self.alphabet = 255 // self.intensity_div + 1

    def codes(self, observations):
        obs = np.asarray(observations)
        if obs.ndim < 3:
            raise ShapeError("LRD expects observations shaped (..., height, width)")
        if obs.shape[-1] == 0 or obs.shape[-2] == 0:
            raise SizeError("cannot resize an empty frame")
        h, w = obs.shape[-2:]
        frames = obs.reshape(-1, h, w)
        small = kernels.resize_bilinear(frames, *self.out_hw)
        symbols = np.floor(small).astype(np.int64) // self.intensity_div
        return symbols.reshape(len(obs), -1)

    def describe(self):
        return f"lrd({self.out_hw[0]},{self.out_hw[1]},{self.intensity_div})"


class HSDMapper(StateMapper):
    """Codes from a trained hierarchical discretizer at one hierarchy level."""

    kind = "hsd"

    def __init__(self, model, hierarchy: int = 1, batch_size: int = 512):
        self.model = model
        self.hierarchy = int(hierarchy)
        self.batch_size = batch_size
        self.alphabet = model.config.codebook_size(self.hierarchy)

    def codes(self, observations):
        obs = np.asarray(observations)
        parts = [
            self.model.codes(obs[i : i + self.batch_size], self.hierarchy)
            for i in range(0, len(obs), self.batch_size)
        ]
        if not parts:
            return np.zeros((0, self.model.config.cells(self.hierarchy)), dtype=np.int64)
        return np.concatenate(parts)

    def describe(self):
        return f"hsd(h={self.hierarchy})"


def pixel_map(obs) -> DiscreteState:
    return PixelMapper()(obs)


def lrd_map(obs, out_hw=(8, 8), intensity_div: int = 16) -> DiscreteState:
    return LRDMapper(out_hw, intensity_div)(obs)


def hsd_map(model, obs, hierarchy: int = 1) -> DiscreteState:
    return HSDMapper(model, hierarchy)(obs)


def quantize(z_e, codebook):
    """Nearest-neighbour vector quantization of ``B`` cells.

    Parameters
    ----------
    z_e : array (..., B, d)
    codebook : array (K, d)

    Returns
    -------
    code : int array (..., B), lowest index on ties
    z_q : array shaped like ``z_e`` holding the selected codebook rows
    """
    z_e = np.asarray(z_e)
    codebook = np.asarray(codebook)
    if codebook.ndim != 2 or len(codebook) == 0:
        raise ShapeError("codebook must be a non-empty (K, d) array")
    if z_e.shape[-1] != codebook.shape[1]:
        raise ShapeError(f"cell dim {z_e.shape[-1]} does not match codebook dim {codebook.shape[1]}")
    flat = z_e.reshape(-1, z_e.shape[-1])
    code = kernels.nearest_codes(flat, codebook).reshape(z_e.shape[:-1])
    return code, codebook[code]


@dataclass
class StateEntry:
    count: int
    actions: np.ndarray
    _fits: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass
class StateTable:
    """Visit counts and observed actions per discrete state of one dataset."""

    action_space: object
    entries: dict = field(default_factory=dict)
    total: int = 0
    mapper: str = ""

    def __len__(self):
        return len(self.entries)

    def __contains__(self, state):
        return state in self.entries

    def __getitem__(self, state) -> StateEntry:
        return self.entries[state]

    def count(self, state) -> int:
        entry = self.entries.get(state)
        return 0 if entry is None else entry.count

    def merge(self, other: "StateTable") -> "StateTable":
        merged = {s: StateEntry(e.count, e.actions) for s, e in self.entries.items()}
        for s, e in other.entries.items():
            if s in merged:
                cur = merged[s]
                merged[s] = StateEntry(cur.count + e.count, np.concatenate([cur.actions, e.actions]))
            else:
                merged[s] = StateEntry(e.count, e.actions)
        return StateTable(self.action_space, merged, self.total + other.total, self.mapper)


def table_from_states(states, actions, action_space, mapper="") -> StateTable:
    groups: dict = {}
    for i, s in enumerate(states):
        groups.setdefault(s, []).append(i)
    actions = np.asarray(actions)
    entries = {s: StateEntry(len(idx), actions[np.asarray(idx)]) for s, idx in groups.items()}
    return StateTable(action_space, entries, len(states), mapper)


def build_state_table(mapper: StateMapper, ds: PlayDataset) -> StateTable:
    """Group a dataset's actions by the state of their observation."""
    if len(ds) == 0:
        return StateTable(ds.action_space, {}, 0, mapper.describe())
    return table_from_states(mapper.states(ds.observations), ds.actions, ds.action_space, mapper.describe())

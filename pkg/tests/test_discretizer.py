import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from playstyle.dataset import ActionSpace, PlayDataset
from playstyle.discretizer import (
    DiscreteState,
    LRDMapper,
    PixelMapper,
    StateTable,
    bilinear_resize,
    build_state_table,
    lrd_map,
    pixel_map,
    quantize,
)
from playstyle.errors import ShapeError, SizeError
from playstyle.fixtures import worked_example_datasets, worked_example_states

from conftest import random_dataset


def test_pixel_map(rng):
    obs = rng.integers(0, 256, size=(4, 64, 64), dtype=np.uint8)
    assert pixel_map(obs) == pixel_map(obs.copy())
    other = obs.copy()
    other[2, 10, 10] ^= 1
    assert pixel_map(other) != pixel_map(obs)
    assert len(pixel_map(obs)) == 16384


def test_state_equality_needs_full_code():
    a = DiscreteState(b"\x01\x02", 1, digest=7)
    b = DiscreteState(b"\x01\x03", 1, digest=7)  # forced digest collision
    assert a != b
    assert len({a, b}) == 2
    assert DiscreteState(b"\x01\x02", 1, digest=7) == a


def test_digest_is_stable():
    # fixed value: FNV-1a over the code bytes, independent of the process
    assert DiscreteState.from_symbols([1, 2, 3]).digest == 0xD0AA6218672CF5AB


def test_resize_constant_and_identity(rng):
    const = np.full((17, 9), 100.0)
    for h, w in [(1, 1), (4, 3), (30, 40)]:
        np.testing.assert_array_equal(bilinear_resize(const, h, w), np.full((h, w), 100.0))
    img = rng.integers(0, 256, size=(12, 7)).astype(float)
    np.testing.assert_array_equal(bilinear_resize(img, 12, 7), img)


def test_resize_errors():
    with pytest.raises(SizeError):
        bilinear_resize(np.zeros((0, 4)), 2, 2)
    with pytest.raises(SizeError):
        bilinear_resize(np.zeros((4, 4)), 0, 2)


def test_resize_half_pixel_alignment():
    # 4 -> 2: output centres land at input coordinates 0.5 and 2.5
    img = np.array([[0.0, 10.0, 20.0, 30.0]])
    np.testing.assert_allclose(bilinear_resize(img, 1, 2), [[5.0, 25.0]])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_resize_range_bounded(seed):
    img = np.random.default_rng(seed).integers(0, 256, size=(64, 64)).astype(float)
    out = bilinear_resize(img, 8, 8)
    assert out.min() >= img.min() and out.max() <= img.max()


def test_lrd_symbols():
    full = np.full((4, 64, 64), 255, np.uint8)
    s = lrd_map(full, (8, 8), 16)
    assert len(s) == 256 and set(s.symbols) == {15}
    assert set(lrd_map(np.full((4, 64, 64), 16, np.uint8), (8, 8), 16).symbols) == {1}
    assert set(lrd_map(np.full((4, 64, 64), 15, np.uint8), (8, 8), 16).symbols) == {0}


def test_lrd_alphabet(rng):
    m = LRDMapper((8, 8), 16)
    obs = rng.integers(0, 256, size=(20, 4, 32, 32), dtype=np.uint8)
    for s in m.states(obs):
        assert len(s) == 256
        assert s.symbols.max() < 16


def test_quantize_examples():
    cb = np.array([[0.0, 0.0], [1.0, 1.0]])
    code, zq = quantize(np.array([[0.1, 0.2]]), cb)
    assert code.tolist() == [0] and zq.tolist() == [[0.0, 0.0]]
    code, zq = quantize(np.array([[1.0, 1.0]]), cb)
    assert code.tolist() == [1] and np.array_equal(zq, [[1.0, 1.0]])
    code, _ = quantize(np.array([[0.5, 0.5]]), cb)
    assert code.tolist() == [0]
    with pytest.raises(ShapeError):
        quantize(np.zeros((3, 4)), cb)
    with pytest.raises(ShapeError):
        quantize(np.zeros((3, 2)), np.zeros((0, 2)))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(1, 9), d=st.integers(1, 6))
def test_quantize_optimal(seed, k, d):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(5, 3, d))
    cb = rng.normal(size=(k, d))
    code, zq = quantize(z, cb)
    assert code.shape == (5, 3)
    best = np.linalg.norm(z - zq, axis=-1)
    for j in range(k):
        assert np.all(best <= np.linalg.norm(z - cb[j], axis=-1) + 1e-12)
    # rows copied bitwise from the codebook
    assert all(any(np.array_equal(row, e) for e in cb) for row in zq.reshape(-1, d))


def test_table_single_state():
    obs = np.zeros((7, 1, 2, 2), np.uint8)
    ds = PlayDataset(ActionSpace.discrete(2), (1, 2, 2), obs, [0, 1, 1, 0, 1, 1, 1])
    table = build_state_table(PixelMapper(), ds)
    assert len(table) == 1 and table.total == 7
    (entry,) = table.entries.values()
    assert entry.count == 7 and len(entry.actions) == 7


def test_table_worked_example_counts():
    a, b = worked_example_datasets()
    s1, s2, s3 = worked_example_states()
    ta, tb = build_state_table(PixelMapper(), a), build_state_table(PixelMapper(), b)
    assert [ta.count(s) for s in (s1, s2, s3)] == [3, 2, 1]
    assert [tb.count(s) for s in (s1, s2, s3)] == [2, 1, 2]


def test_table_empty():
    ds = PlayDataset.empty(ActionSpace.discrete(2), (1, 2, 2))
    table = build_state_table(PixelMapper(), ds)
    assert len(table) == 0 and table.total == 0


def test_table_conservation_and_merge(rng):
    ds = random_dataset(rng, 300, obs_shape=(1, 2, 2))
    ds = PlayDataset(ds.action_space, ds.obs_shape, ds.observations // 128, ds.actions)
    mapper = PixelMapper()
    full = build_state_table(mapper, ds)
    assert sum(e.count for e in full.entries.values()) == 300
    assert all(e.count == len(e.actions) for e in full.entries.values())
    merged = build_state_table(mapper, ds.take(range(100))).merge(build_state_table(mapper, ds.take(range(100, 300))))
    assert merged.total == full.total
    assert {s: e.count for s, e in merged.entries.items()} == {s: e.count for s, e in full.entries.items()}
    for s, e in full.entries.items():
        assert sorted(e.actions) == sorted(merged[s].actions)


def test_mappers_are_pure(rng):
    obs = rng.integers(0, 256, size=(10, 4, 32, 32), dtype=np.uint8)
    for m in (PixelMapper(), LRDMapper()):
        assert m.states(obs) == m.states(obs.copy())
        assert [m(o) for o in obs] == m.states(obs)

from dataclasses import replace

import numpy as np
import pytest

from playstyle.dataset import ActionSpace, PlayDataset
from playstyle.discretizer import HSDMapper, hsd_map
from playstyle.errors import ConfigError, DomainError, FormatError, ShapeError, StateError
from playstyle.hsd import (
    COMPONENTS,
    HSDConfig,
    backward,
    codebook_usage,
    forward,
    init_model,
    load_model,
    save_model,
    train,
)

SMALL = dict(obs_shape=(2, 8, 8), patch=4, enc0_hidden=6, cell_dim0=3, codebook0=5, fc_hidden=10,
             latent1=12, cells1=4, codebook1=2, dec1_hidden=7, rec_hidden=9, pi_hidden=5, seed=3)
ALPHA = 0.37


def small_setup(kind, n=16, seed=0):
    size = 3 if kind == "discrete" else 2
    cfg = HSDConfig(action_kind=kind, action_size=size, **SMALL)
    model = init_model(cfg, np.float64)
    rng = np.random.default_rng(seed)
    # spread the codebooks so nearest-code assignments are far from ties
    model.params["embed0"] = rng.normal(size=model.params["embed0"].shape)
    model.params["embed1"] = rng.normal(size=model.params["embed1"].shape)
    obs = rng.integers(0, 256, (n, *cfg.obs_shape)).astype(np.uint8)
    acts = rng.integers(0, 3, n) if kind == "discrete" else rng.normal(size=(n, 2))
    return model, (obs, acts)


def finite_diff(model, batch, name, loss_fn, frozen, h=1e-6):
    p = model.params[name]
    out = np.zeros_like(p)
    for i in np.ndindex(p.shape):
        orig = p[i]
        p[i] = orig + h
        up = loss_fn(forward(model, batch, ALPHA, frozen=frozen))
        p[i] = orig - h
        down = loss_fn(forward(model, batch, ALPHA, frozen=frozen))
        p[i] = orig
        out[i] = (up - down) / (2 * h)
    return out


def rel_err(x, y):
    return np.linalg.norm(x - y) / max(np.linalg.norm(x), np.linalg.norm(y), 1e-30)


def task_loss(t):
    return t.losses["rec"] + t.losses["pi"]


@pytest.mark.parametrize("kind", ["discrete", "continuous"])
def test_gradients_match_finite_differences(kind):
    model, batch = small_setup(kind)
    trace = forward(model, batch, ALPHA)
    grads = backward(model, trace, batch)
    frozen = dict(code0=trace.code0, code1=trace.code1)
    checks = [
        ("rec", lambda t: t.losses["rec"]),
        ("pi", lambda t: t.losses["pi"]),
        ("dec1", task_loss),
        ("embed0", lambda t: t.losses["vq0"]),
        ("embed1", lambda t: t.losses["vq1"]),
    ]
    for comp, loss_fn in checks:
        for name in COMPONENTS[comp]:
            assert rel_err(grads[name], finite_diff(model, batch, name, loss_fn, frozen)) < 1e-3, name


@pytest.mark.parametrize("kind", ["discrete", "continuous"])
def test_encoder_gradient_is_copied_task_plus_scaled_vq(kind):
    model, batch = small_setup(kind)
    trace = forward(model, batch, ALPHA)
    grads = backward(model, trace, batch)
    frozen = dict(code0=trace.code0, code1=trace.code1)
    straight = dict(frozen, offset0=trace.z_q0 - trace.z_e0, offset1=trace.z_q1 - trace.z_e1)
    beta = model.config.beta
    for comp, h in (("enc0", 0), ("enc1", 1)):
        for name in COMPONENTS[comp]:
            task = finite_diff(model, batch, name, task_loss, straight)
            vq = finite_diff(model, batch, name, lambda t: t.losses[f"vq{h}"], frozen)
            assert rel_err(grads[name], task + beta * vq) < 1e-3, name


def test_encoder_vq_path_linear_in_beta():
    model, batch = small_setup("continuous")
    grads = []
    for beta in (0.25, 0.5, 0.75, 1.25):
        m = model.copy()
        m.config = replace(m.config, beta=beta)
        grads.append(backward(m, forward(m, batch, ALPHA), batch))
    enc = COMPONENTS["enc0"] + COMPONENTS["enc1"]
    for name in enc:
        g1, g2, g3, g5 = (g[name] for g in grads)
        step = g2 - g1
        assert np.abs(step).max() > 0
        np.testing.assert_allclose(g3 - g1, 2 * step, rtol=1e-7, atol=1e-12)
        np.testing.assert_allclose(g5 - g1, 4 * step, rtol=1e-7, atol=1e-12)
    for name in set(grads[0]) - set(enc):
        np.testing.assert_array_equal(grads[0][name], grads[3][name])


def test_unselected_codebook_rows_get_no_gradient():
    model, batch = small_setup("discrete")
    model.params["embed0"] = np.vstack([model.params["embed0"], np.full((1, 3), 1e3)])
    model = replace_config(model, codebook0=6)
    trace = forward(model, batch, ALPHA)
    assert 5 not in trace.code0
    grads = backward(model, trace, batch)
    np.testing.assert_array_equal(grads["embed0"][5], 0.0)


def replace_config(model, **kw):
    out = model.copy()
    out.config = replace(out.config, **kw)
    return out


def test_alpha_domain_and_endpoints():
    model, batch = small_setup("discrete")
    with pytest.raises(DomainError):
        forward(model, batch, 1.5)
    with pytest.raises(DomainError):
        forward(model, batch, -0.1)
    # alpha=1 ignores the hierarchy-1 path, so dec1 gets no task gradient
    g1 = backward(model, forward(model, batch, 1.0), batch)
    for name in COMPONENTS["dec1"]:
        np.testing.assert_array_equal(g1[name], 0.0)
    # alpha=0 routes everything through hierarchy 1
    g0 = backward(model, forward(model, batch, 0.0), batch)
    assert all(np.abs(g0[n]).max() > 0 for n in COMPONENTS["dec1"])


def test_stale_trace_rejected():
    model, batch = small_setup("discrete")
    trace = forward(model, batch, ALPHA)
    other = (batch[0][::-1].copy(), batch[1])
    with pytest.raises(StateError):
        backward(model, trace, other)
    model.version += 1
    with pytest.raises(StateError):
        backward(model, trace, batch)


def test_default_config_state_space_and_init():
    cfg = HSDConfig()
    assert cfg.state_space(1) == 2**20
    assert cfg.cells(1) == 20 and cfg.cell_dim(1) == 25
    model = init_model(cfg)
    assert model.codebook(1).shape == (2, 25)
    for h in (0, 1):
        assert np.abs(model.codebook(h)).max() <= 0.04
    with pytest.raises(DomainError):
        cfg.cells(2)


def test_config_validation():
    with pytest.raises(ConfigError):
        HSDConfig(latent1=501)
    with pytest.raises(ConfigError):
        HSDConfig(codebook1=0)


def test_hsd_map_gives_binary_cells(rng):
    model = init_model(HSDConfig())
    obs = rng.integers(0, 256, (4, 32, 32), dtype=np.uint8)
    state = hsd_map(model, obs)
    assert len(state) == 20 and set(state.symbols) <= {0, 1}
    assert hsd_map(model, obs) == state
    with pytest.raises(ShapeError):
        hsd_map(model, obs[:2])


def tiny_dataset(rng, n=40):
    obs = rng.integers(0, 256, (n, 2, 8, 8), dtype=np.uint8)
    return PlayDataset(ActionSpace.continuous(2), (2, 8, 8), obs, rng.normal(size=(n, 2)).astype(np.float32))


def tiny_config(**kw):
    base = dict(SMALL, action_kind="continuous", action_size=2, batch_size=16, epochs=2)
    return HSDConfig(**{**base, **kw})


def test_training_deterministic_and_reduces_reconstruction(rng):
    ds = tiny_dataset(rng)
    cfg = tiny_config(epochs=30, learning_rate=3e-3)
    m1, log1 = train(init_model(cfg), ds)
    m2, log2 = train(init_model(cfg), ds)
    assert m1 == m2 and log1 == log2
    assert len(log1) == 30 * 3 and len(log1[0]) == 5
    assert np.mean([r[1] for r in log1[-3:]]) < np.mean([r[1] for r in log1[:3]])
    m3, _ = train(init_model(tiny_config(epochs=30, learning_rate=3e-3, seed=4)), ds)
    assert m3 != m1


def test_zero_epochs_returns_init(rng):
    cfg = tiny_config(epochs=0)
    init = init_model(cfg)
    model, log = train(init, tiny_dataset(rng))
    assert model == init and log == []


def test_save_load_round_trip(tmp_path, rng):
    model, _ = train(init_model(tiny_config()), tiny_dataset(rng))
    path = tmp_path / "m.hsdm"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded == model
    obs = tiny_dataset(rng).observations
    np.testing.assert_array_equal(loaded.codes(obs), model.codes(obs))
    bad = tmp_path / "bad.hsdm"
    bad.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(FormatError):
        load_model(bad)
    wrong = bytearray(path.read_bytes())
    wrong[4] = 9
    bad.write_bytes(bytes(wrong))
    with pytest.raises(FormatError):
        load_model(bad)


def test_codebook_usage_bounds(rng):
    ds = tiny_dataset(rng)
    model = init_model(tiny_config())
    used = codebook_usage(model, ds, 1)
    assert 1 <= used <= min(len(ds), model.config.state_space(1))
    assert codebook_usage(model, ds.take([]), 1) == 0
    assert HSDMapper(model).alphabet == 2

"""Hierarchical state discretization: a two-level stacked VQ autoencoder.

Architecture at desk scale::

    obs/255 -> patch encoder (one small MLP per patch) -> z_e0 (C cells x d0)
            -> quantize(codebook0) -> z_q0
            -> fully-connected encoder -> z_e1 (B cells x d1)
            -> quantize(codebook1) -> z_q1
            -> fully-connected decoder -> r1 (same shape as z_q0)
    u = alpha * z_q0 + (1 - alpha) * r1
    u -> observation decoder -> o'       (Huber against obs/255)
    u -> policy decoder -> logits | mean (cross entropy | Huber)

Gradients are written out by hand. The nearest-neighbour step has no
derivative; the gradient arriving at a decoder input ``z_q`` is copied to the
encoder output ``z_e`` of the same level, and each encoder additionally
receives ``beta`` times the gradient of its own VQ loss. Codebooks are updated
by the gradient of the VQ loss alone.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import ActionSpace, PlayDataset
from .discretizer import quantize
from .errors import ConfigError, DomainError, FormatError, ShapeError, StateError, TrainingError

MAGIC = b"HSDM"
VERSION = 1

COMPONENTS = {
    "enc0": ("enc0.w1", "enc0.b1", "enc0.w2", "enc0.b2"),
    "enc1": ("enc1.w1", "enc1.b1", "enc1.w2", "enc1.b2"),
    "embed0": ("embed0",),
    "embed1": ("embed1",),
    "dec1": ("dec1.w1", "dec1.b1", "dec1.w2", "dec1.b2"),
    "rec": ("rec.w1", "rec.b1", "rec.w2", "rec.b2"),
    "pi": ("pi.w1", "pi.b1", "pi.w2", "pi.b2"),
}


@dataclass(frozen=True)
class HSDConfig:
    obs_shape: tuple = (4, 32, 32)
    action_kind: str = "continuous"
    action_size: int = 2
    patch: int = 8
    enc0_hidden: int = 64
    cell_dim0: int = 16
    codebook0: int = 32
    fc_hidden: int = 256
    latent1: int = 500
    cells1: int = 20
    codebook1: int = 2
    dec1_hidden: int = 256
    rec_hidden: int = 256
    pi_hidden: int = 128
    beta: float = 0.25
    huber_delta: float = 1.0
    learning_rate: float = 3e-4
    batch_size: int = 64
    epochs: int = 10
    seed: int = 0
    pixel_noise: float = 4.0
    init_std: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "obs_shape", tuple(int(d) for d in self.obs_shape))
        self.validate()

    def validate(self):
        if len(self.obs_shape) != 3:
            raise ConfigError("obs_shape must be (frames, height, width)")
        _, h, w = self.obs_shape
        if self.patch < 1 or h % self.patch or w % self.patch:
            raise ConfigError(f"patch size {self.patch} must divide the frame size {h}x{w}")
        if min(self.codebook0, self.codebook1, self.cells1, self.cell_dim0) < 1:
            raise ConfigError("codebook sizes, cell counts and cell dims must be >= 1")
        if self.latent1 % self.cells1:
            raise ConfigError(f"latent width {self.latent1} is not divisible by {self.cells1} cells")
        if self.beta <= 0:
            raise ConfigError("beta must be > 0")
        if self.action_kind not in ("discrete", "continuous"):
            raise ConfigError(f"unknown action kind {self.action_kind!r}")

    @classmethod
    def for_dataset(cls, ds: PlayDataset, **kw):
        return cls(obs_shape=ds.obs_shape, action_kind=ds.action_space.kind, action_size=ds.action_space.size, **kw)

    @property
    def action_space(self):
        return ActionSpace(self.action_kind, self.action_size)

    def cells(self, hierarchy):
        if hierarchy == 0:
            _, h, w = self.obs_shape
            return (h // self.patch) * (w // self.patch)
        if hierarchy == 1:
            return self.cells1
        raise DomainError(f"hierarchy must be 0 or 1, got {hierarchy}")

    def cell_dim(self, hierarchy):
        return self.cell_dim0 if hierarchy == 0 else self.latent1 // self.cells(1)

    def codebook_size(self, hierarchy):
        self.cells(hierarchy)
        return self.codebook0 if hierarchy == 0 else self.codebook1

    def state_space(self, hierarchy=1):
        return self.codebook_size(hierarchy) ** self.cells(hierarchy)

    @property
    def patch_inputs(self):
        return self.obs_shape[0] * self.patch * self.patch

    @property
    def obs_size(self):
        f, h, w = self.obs_shape
        return f * h * w

    def to_json(self):
        d = asdict(self)
        d["obs_shape"] = list(self.obs_shape)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _truncated_normal(rng, std, shape):
    out = rng.normal(0.0, std, size=shape)
    bad = np.abs(out) > 2 * std
    while bad.any():
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
        bad = np.abs(out) > 2 * std
    return out


@dataclass(eq=False)
class HSDModel:
    config: HSDConfig
    params: dict
    version: int = field(default=0, compare=False)

    def copy(self):
        return HSDModel(self.config, {k: v.copy() for k, v in self.params.items()}, self.version)

    def astype(self, dtype):
        return HSDModel(self.config, {k: v.astype(dtype) for k, v in self.params.items()}, self.version)

    def __eq__(self, other):
        if not isinstance(other, HSDModel):
            return NotImplemented
        return (
            self.config == other.config
            and self.params.keys() == other.params.keys()
            and all(np.array_equal(v, other.params[k]) for k, v in self.params.items())
        )

    def codebook(self, hierarchy):
        return self.params[f"embed{hierarchy}"]

    def codes(self, observations, hierarchy=1):
        """Deterministic discrete codes (no noise, no alpha) for a batch."""
        obs = _check_obs(self.config, observations)
        x = obs.astype(self.params["rec.w2"].dtype) / 255.0
        ze0 = _encode0(self.params, self.config, x)[2]
        code0, zq0 = quantize(ze0, self.params["embed0"])
        if hierarchy == 0:
            return code0
        ze1 = _encode1(self.params, zq0.reshape(len(obs), -1))[2]
        code1, _ = quantize(ze1.reshape(len(obs), self.config.cells1, -1), self.params["embed1"])
        return code1

    def features(self, observations):
        """Pre-quantization hierarchy-1 latents, flattened (N, latent1)."""
        obs = _check_obs(self.config, observations)
        x = obs.astype(self.params["rec.w2"].dtype) / 255.0
        ze0 = _encode0(self.params, self.config, x)[2]
        _, zq0 = quantize(ze0, self.params["embed0"])
        return _encode1(self.params, zq0.reshape(len(obs), -1))[2]


def init_model(cfg: HSDConfig, dtype=np.float32) -> HSDModel:
    """Fan-in-scaled weights, zero biases, truncated-normal codebooks."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    c, d0 = cfg.cells(0), cfg.cell_dim0
    flat0 = c * d0
    n_out = cfg.action_size
    p = {}

    def layer(name, fan_in, shape, gain):
        p[name] = rng.normal(0.0, math.sqrt(gain / fan_in), size=shape)

    # ReLU inputs get gain 2, linear outputs gain 1
    layer("enc0.w1", cfg.patch_inputs, (c, cfg.patch_inputs, cfg.enc0_hidden), 2.0)
    p["enc0.b1"] = np.zeros((c, cfg.enc0_hidden))
    layer("enc0.w2", cfg.enc0_hidden, (c, cfg.enc0_hidden, d0), 1.0)
    p["enc0.b2"] = np.zeros((c, d0))
    p["embed0"] = _truncated_normal(rng, cfg.init_std, (cfg.codebook0, d0))
    layer("enc1.w1", flat0, (flat0, cfg.fc_hidden), 2.0)
    p["enc1.b1"] = np.zeros(cfg.fc_hidden)
    layer("enc1.w2", cfg.fc_hidden, (cfg.fc_hidden, cfg.latent1), 1.0)
    p["enc1.b2"] = np.zeros(cfg.latent1)
    p["embed1"] = _truncated_normal(rng, cfg.init_std, (cfg.codebook1, cfg.cell_dim(1)))
    for name, fan_in, hidden, out in (
        ("dec1", cfg.latent1, cfg.dec1_hidden, flat0),
        ("rec", flat0, cfg.rec_hidden, cfg.obs_size),
        ("pi", flat0, cfg.pi_hidden, n_out),
    ):
        layer(name + ".w1", fan_in, (fan_in, hidden), 2.0)
        p[name + ".b1"] = np.zeros(hidden)
        layer(name + ".w2", hidden, (hidden, out), 1.0)
        p[name + ".b2"] = np.zeros(out)
    return HSDModel(cfg, {k: np.ascontiguousarray(v, dtype=dtype) for k, v in sorted(p.items())})


def _check_obs(cfg, observations):
    obs = np.asarray(observations)
    if obs.shape[1:] != cfg.obs_shape:
        raise ShapeError(f"observation shape {obs.shape[1:]} does not match model {cfg.obs_shape}")
    return obs


def _patches(cfg, x):
    n, f, h, w = x.shape
    p = cfg.patch
    x = x.reshape(n, f, h // p, p, w // p, p).transpose(0, 2, 4, 1, 3, 5)
    return x.reshape(n, (h // p) * (w // p), f * p * p)


def _unpatch_grad(cfg, g):
    n = g.shape[0]
    f, h, w = cfg.obs_shape
    p = cfg.patch
    g = g.reshape(n, h // p, w // p, f, p, p).transpose(0, 3, 1, 4, 2, 5)
    return g.reshape(n, f, h, w)


def _per_cell(x, w):
    """(n, c, d) @ (c, d, h) -> (n, c, h), one weight matrix per cell (batched BLAS)."""
    return np.matmul(x.transpose(1, 0, 2), w).transpose(1, 0, 2)


def _per_cell_outer(x, g):
    """Weight gradient of ``_per_cell``: (n, c, d), (n, c, h) -> (c, d, h)."""
    return np.matmul(x.transpose(1, 2, 0), g.transpose(1, 0, 2))


def _encode0(params, cfg, x):
    pt = _patches(cfg, x)
    pre = _per_cell(pt, params["enc0.w1"]) + params["enc0.b1"]
    hid = np.maximum(pre, 0)
    ze0 = _per_cell(hid, params["enc0.w2"]) + params["enc0.b2"]
    return pt, pre, ze0


def _encode1(params, q0):
    pre = q0 @ params["enc1.w1"] + params["enc1.b1"]
    hid = np.maximum(pre, 0)
    return pre, hid, hid @ params["enc1.w2"] + params["enc1.b2"]


def _mlp(params, name, x):
    pre = x @ params[name + ".w1"] + params[name + ".b1"]
    return pre, np.maximum(pre, 0) @ params[name + ".w2"] + params[name + ".b2"]


def _huber(r, delta):
    a = np.abs(r)
    return np.where(a <= delta, 0.5 * r * r, delta * (a - 0.5 * delta))


def _huber_grad(r, delta):
    return np.clip(r, -delta, delta)


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


@dataclass
class ForwardTrace:
    z_e0: np.ndarray
    z_q0: np.ndarray
    z_e1: np.ndarray
    z_q1: np.ndarray
    code0: np.ndarray
    code1: np.ndarray
    alpha: float
    reconstruction: np.ndarray
    policy_output: np.ndarray
    losses: dict
    cache: dict = field(repr=False, default_factory=dict)
    model_version: int = 0
    batch_token: tuple = ()


def _batch_arrays(batch):
    if isinstance(batch, PlayDataset):
        return batch.observations, batch.actions
    obs, actions = batch
    return np.asarray(obs), np.asarray(actions)


def _token(obs, actions):
    return (obs.shape, actions.shape, hash(obs.tobytes()), hash(np.ascontiguousarray(actions).tobytes()))


def forward(model: HSDModel, batch, alpha: float, train_noise: bool = False, rng=None, frozen=None) -> ForwardTrace:
    """Run the full model on a batch and compute every loss.

    ``frozen`` pins the quantizer for gradient checking. It may hold
    ``code0``/``code1`` (use these codebook rows instead of the nearest ones)
    and ``offset0``/``offset1`` (replace quantization by ``z_e + offset``, the
    straight-through surrogate whose exact derivative is the copied gradient).
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    cfg, prm = model.config, model.params
    obs, actions = _batch_arrays(batch)
    obs = _check_obs(cfg, obs)
    if len(obs) == 0:
        raise ShapeError("forward needs a non-empty batch")
    frozen = frozen or {}
    dtype = prm["rec.w2"].dtype
    n = len(obs)
    raw = obs.astype(dtype)
    if train_noise:
        rng = rng if rng is not None else np.random.default_rng()
        raw = raw + rng.normal(0.0, cfg.pixel_noise, size=raw.shape).astype(dtype)
    x = raw / dtype.type(255.0)
    target = obs.reshape(n, -1).astype(dtype) / dtype.type(255.0)

    pt, pre0, ze0 = _encode0(prm, cfg, x)
    code0, zq0 = _quantize_level(ze0, prm["embed0"], frozen, 0)
    q0 = zq0.reshape(n, -1)
    pre1, _, ze1_flat = _encode1(prm, q0)
    ze1 = ze1_flat.reshape(n, cfg.cells1, -1)
    code1, zq1 = _quantize_level(ze1, prm["embed1"], frozen, 1)
    q1 = zq1.reshape(n, -1)
    pre_d, r1 = _mlp(prm, "dec1", q1)
    u = alpha * q0 + (1.0 - alpha) * r1
    pre_r, recon = _mlp(prm, "rec", u)
    pre_p, pout = _mlp(prm, "pi", u)

    delta = cfg.huber_delta
    losses = {
        "rec": float(_huber(recon - target, delta).mean()),
        "vq0": float(_huber(ze0 - zq0, delta).mean()),
        "vq1": float(_huber(ze1 - zq1, delta).mean()),
    }
    if cfg.action_kind == "discrete":
        labels = actions.astype(np.int64)
        logp = _log_softmax(pout)
        losses["pi"] = float(-logp[np.arange(n), labels].mean())
    else:
        labels = actions.astype(dtype).reshape(n, -1)
        losses["pi"] = float(_huber(pout - labels, delta).mean())
    cache = dict(pt=pt, pre0=pre0, q0=q0, pre1=pre1, q1=q1, pre_d=pre_d, u=u, pre_r=pre_r, pre_p=pre_p,
                 target=target, labels=labels)
    return ForwardTrace(ze0, zq0, ze1, zq1, code0, code1, float(alpha), recon, pout, losses, cache,
                        model.version, _token(obs, actions))


def _quantize_level(ze, codebook, frozen, h):
    if f"offset{h}" in frozen:
        return frozen.get(f"code{h}"), ze + frozen[f"offset{h}"]
    if f"code{h}" in frozen:
        code = frozen[f"code{h}"]
        return code, codebook[code]
    return quantize(ze, codebook)


def total_loss(trace: ForwardTrace):
    return trace.losses["rec"] + trace.losses["pi"]


def _mlp_backward(prm, name, x, pre, g_out, grads, want_input=True):
    hid = np.maximum(pre, 0)
    grads[name + ".w2"] = hid.T @ g_out
    grads[name + ".b2"] = g_out.sum(axis=0)
    g_pre = (g_out @ prm[name + ".w2"].T) * (pre > 0)
    grads[name + ".w1"] = x.T @ g_pre
    grads[name + ".b1"] = g_pre.sum(axis=0)
    return g_pre @ prm[name + ".w1"].T if want_input else None


def backward(model: HSDModel, trace: ForwardTrace, batch) -> dict:
    """Per-parameter gradients following the gradient-copy rules.

    rec and pi receive the gradients of their own losses; dec1 receives the
    gradient of ``L_rec + L_pi``; each codebook receives the gradient of its
    own VQ loss; each encoder receives the task gradient copied from its
    quantized output plus ``beta`` times its VQ-loss gradient.
    """
    obs, actions = _batch_arrays(batch)
    if trace.model_version != model.version or trace.batch_token != _token(np.asarray(obs), np.asarray(actions)):
        raise StateError("trace was produced by a different model state or batch")
    cfg, prm, c = model.config, model.params, trace.cache
    n = len(trace.reconstruction)
    delta, beta, alpha = cfg.huber_delta, cfg.beta, trace.alpha
    grads: dict = {}

    g_recon = _huber_grad(trace.reconstruction - c["target"], delta) / trace.reconstruction.size
    g_u = _mlp_backward(prm, "rec", c["u"], c["pre_r"], g_recon, grads)
    if cfg.action_kind == "discrete":
        g_pout = np.exp(_log_softmax(trace.policy_output))
        g_pout[np.arange(n), c["labels"]] -= 1.0
        g_pout /= n
    else:
        g_pout = _huber_grad(trace.policy_output - c["labels"], delta) / trace.policy_output.size
    g_u = g_u + _mlp_backward(prm, "pi", c["u"], c["pre_p"], g_pout, grads)

    g_q1 = _mlp_backward(prm, "dec1", c["q1"], c["pre_d"], (1.0 - alpha) * g_u, grads)

    # hierarchy 1: copy dL/dz_q1 onto z_e1, add beta * dL_vq1/dz_e1
    r1 = (trace.z_e1 - trace.z_q1).reshape(n, -1)
    g_vq1 = _huber_grad(r1, delta) / r1.size
    grads["embed1"] = _scatter_rows(trace.code1, -g_vq1.reshape(-1, cfg.cell_dim(1)), prm["embed1"])
    hid1 = np.maximum(c["pre1"], 0)
    g_ze1 = g_q1 + beta * g_vq1
    grads["enc1.w2"] = hid1.T @ g_ze1
    grads["enc1.b2"] = g_ze1.sum(axis=0)
    g_pre1 = (g_ze1 @ prm["enc1.w2"].T) * (c["pre1"] > 0)
    grads["enc1.w1"] = c["q0"].T @ g_pre1
    grads["enc1.b1"] = g_pre1.sum(axis=0)
    # only the copied task gradient continues below hierarchy 1
    g_q0_from1 = ((g_q1 @ prm["enc1.w2"].T) * (c["pre1"] > 0)) @ prm["enc1.w1"].T

    # hierarchy 0
    g_ze0 = (alpha * g_u + g_q0_from1).reshape(trace.z_e0.shape)
    r0 = trace.z_e0 - trace.z_q0
    g_vq0 = _huber_grad(r0, delta) / r0.size
    grads["embed0"] = _scatter_rows(trace.code0, -g_vq0.reshape(-1, cfg.cell_dim0), prm["embed0"])
    g_ze0 = g_ze0 + beta * g_vq0
    hid0 = np.maximum(c["pre0"], 0)
    grads["enc0.w2"] = _per_cell_outer(hid0, g_ze0)
    grads["enc0.b2"] = g_ze0.sum(axis=0)
    g_pre0 = _per_cell(g_ze0, prm["enc0.w2"].transpose(0, 2, 1)) * (c["pre0"] > 0)
    grads["enc0.w1"] = _per_cell_outer(c["pt"], g_pre0)
    grads["enc0.b1"] = g_pre0.sum(axis=0)
    return {k: grads[k] for k in sorted(grads)}


def _scatter_rows(code, rows, codebook):
    out = np.zeros_like(codebook)
    if code is not None:
        np.add.at(out, np.asarray(code).ravel(), rows)
    return out


class Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        lr_t = self.lr * math.sqrt(1 - self.b2**self.t) / (1 - self.b1**self.t)
        for k in sorted(params):
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            params[k] -= (lr_t * self.m[k] / (np.sqrt(self.v[k]) + self.eps)).astype(params[k].dtype)


LOG_COLUMNS = ("step", "L_rec", "L_vq0", "L_vq1", "L_pi")


def train(model: HSDModel, dataset: PlayDataset, cfg: HSDConfig | None = None, progress=None):
    """Minibatch training; returns ``(trained_model, loss_log)``.

    ``alpha`` is drawn from U(0, 1) once per batch. The loss log holds one
    ``(step, L_rec, L_vq0, L_vq1, L_pi)`` row per update. Everything is a pure
    function of the config seed, the initial model and the data.
    """
    cfg = cfg or model.config
    if cfg.obs_shape != dataset.obs_shape or cfg.action_space != dataset.action_space:
        raise ShapeError("dataset does not match the model configuration")
    model = model.copy()
    model.config = replace(model.config, beta=cfg.beta, huber_delta=cfg.huber_delta,
                           pixel_noise=cfg.pixel_noise, learning_rate=cfg.learning_rate,
                           batch_size=cfg.batch_size, epochs=cfg.epochs)
    log: list = []
    if cfg.epochs <= 0 or len(dataset) == 0:
        return model, log
    rng = np.random.default_rng([cfg.seed, 1])
    opt = Adam(model.params, cfg.learning_rate)
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(order), cfg.batch_size):
            idx = np.sort(order[start : start + cfg.batch_size])
            batch = (dataset.observations[idx], dataset.actions[idx])
            alpha = float(rng.uniform(0.0, 1.0))
            trace = forward(model, batch, alpha, train_noise=True, rng=rng)
            row = (step, trace.losses["rec"], trace.losses["vq0"], trace.losses["vq1"], trace.losses["pi"])
            if not all(math.isfinite(v) for v in row[1:]):
                raise TrainingError(f"non-finite loss at step {step}", step=step)
            grads = backward(model, trace, batch)
            opt.step(model.params, grads)
            model.version += 1
            log.append(row)
            step += 1
        if progress is not None:
            progress(epoch, log[-1])
    return model, log


def codebook_usage(model: HSDModel, dataset: PlayDataset, hierarchy: int = 1, batch_size: int = 512) -> int:
    """Number of distinct codes the dataset occupies at one hierarchy."""
    if len(dataset) == 0:
        return 0
    codes = np.concatenate([
        model.codes(dataset.observations[i : i + batch_size], hierarchy)
        for i in range(0, len(dataset), batch_size)
    ])
    return len(np.unique(codes, axis=0))


def save_model(model: HSDModel, path) -> None:
    cfg = model.config.to_json().encode()
    parts = [MAGIC, struct.pack("<HI", VERSION, len(cfg)), cfg, struct.pack("<I", len(model.params))]
    for name in sorted(model.params):
        arr = np.ascontiguousarray(model.params[name], dtype="<f4")
        key = name.encode()
        parts.append(struct.pack("<H", len(key)) + key + struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_model(path) -> HSDModel:
    data = memoryview(Path(path).read_bytes())
    if bytes(data[:4]) != MAGIC:
        raise FormatError(f"{path}: missing HSDM magic bytes")
    version, clen = struct.unpack_from("<HI", data, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    off = 10
    cfg = HSDConfig.from_json(bytes(data[off : off + clen]).decode())
    off += clen
    (count,) = struct.unpack_from("<I", data, off)
    off += 4
    params = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", data, off)
            off += 2
            name = bytes(data[off : off + nlen]).decode()
            off += nlen
            (rank,) = struct.unpack_from("<B", data, off)
            off += 1
            shape = struct.unpack_from(f"<{rank}I", data, off)
            off += 4 * rank
            size = int(np.prod(shape, dtype=np.int64)) if rank else 1
            arr = np.frombuffer(data, dtype="<f4", count=size, offset=off).reshape(shape)
            off += 4 * size
            params[name] = arr.astype(np.float32)
    except (struct.error, ValueError) as exc:
        raise FormatError(f"{path}: truncated tensor data") from exc
    return HSDModel(cfg, params)

"""From-scratch decoder-only transformer with exact handwritten gradients.

GPT-2 style pre-norm blocks over a 26-token vocabulary: learned token and
absolute positional embeddings, per block LayerNorm -> causal multi-head
attention -> residual, LayerNorm -> GELU MLP (4x widening) -> residual, then
a final LayerNorm and an output head (untied from the token embedding by
default). Parameters live in a plain name->ndarray dict so the optimizer,
gradient checks, and checkpoint I/O can treat them uniformly.

Training runs in float32; gradient verification uses float64 via the dtype
argument of init_params. backward() returns the exact analytic gradient of
masked_loss for every parameter.

Checkpoint layout (little-endian):
    8 bytes   magic ``CICLCKPT``
    4 bytes   u32 version (= 1)
    16 bytes  u32 layers, heads, embed_dim, context_length
    4 bytes   u32 flags (bit 0: tied head, bit 1: optimizer state present)
    tensors   u32 name length, name bytes, u32 ndim, u64 dims, f32 data,
              in canonical parameter order
    optimizer (if flagged) u64 step, f64 lr/weight_decay/beta1/beta2/eps,
              then first- and second-moment tensors in the same encoding
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import erf

from .ciphers import ALPHABET_SIZE

CHECKPOINT_MAGIC = b"CICLCKPT"
CHECKPOINT_VERSION = 1

LN_EPS = 1e-5
INIT_STD = 0.02

Params = dict[str, np.ndarray]
Grads = dict[str, np.ndarray]


class CheckpointFormatError(ValueError):
    """Raised when a checkpoint file is corrupt or has the wrong format."""


@dataclass(frozen=True)
class ModelConfig:
    layers: int
    heads: int
    embed_dim: int
    context_length: int
    vocab: int = ALPHABET_SIZE
    mlp_ratio: int = 4
    tied_head: bool = False

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")
        if self.context_length < 2:
            raise ValueError("context_length must be >= 2")
        if min(self.layers, self.heads, self.embed_dim) < 1:
            raise ValueError("layers, heads, embed_dim must be positive")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.heads

    @property
    def mlp_dim(self) -> int:
        return self.mlp_ratio * self.embed_dim

    def param_count(self) -> int:
        d, v, m = self.embed_dim, self.vocab, self.mlp_dim
        per_layer = 2 * (2 * d) + 4 * d * d + 4 * d + d * m + m + m * d + d
        total = v * d + self.context_length * d + self.layers * per_layer + 2 * d
        total += v if self.tied_head else d * v + v
        return total


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Canonical parameter order and shapes; checkpoints follow this order."""
    d, m = config.embed_dim, config.mlp_dim
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (config.vocab, d),
        "pos_emb": (config.context_length, d),
    }
    for i in range(config.layers):
        p = f"layer{i}."
        shapes[p + "ln1.g"] = (d,)
        shapes[p + "ln1.b"] = (d,)
        for name in ("wq", "wk", "wv", "wo"):
            shapes[p + "attn." + name] = (d, d)
        for name in ("bq", "bk", "bv", "bo"):
            shapes[p + "attn." + name] = (d,)
        shapes[p + "ln2.g"] = (d,)
        shapes[p + "ln2.b"] = (d,)
        shapes[p + "mlp.w1"] = (d, m)
        shapes[p + "mlp.b1"] = (m,)
        shapes[p + "mlp.w2"] = (m, d)
        shapes[p + "mlp.b2"] = (d,)
    shapes["ln_f.g"] = (d,)
    shapes["ln_f.b"] = (d,)
    if not config.tied_head:
        shapes["head.w"] = (d, config.vocab)
    shapes["head.b"] = (config.vocab,)
    return shapes


def init_params(
    config: ModelConfig, rng: np.random.Generator, dtype=np.float32
) -> Params:
    """Weights and embeddings ~ N(0, 0.02^2); norm scales 1; biases 0."""
    params: Params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".g"):
            params[name] = np.ones(shape, dtype=dtype)
        elif name.endswith((".b", "bq", "bk", "bv", "bo", "b1", "b2")):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = rng.normal(0.0, INIT_STD, size=shape).astype(dtype)
    return params


def _head_weight(params: Params, config: ModelConfig) -> np.ndarray:
    return params["tok_emb"].T if config.tied_head else params["head.w"]


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _gelu_grad(x: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + erf(x / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return cdf + x * pdf


def _layernorm(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv_std = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + LN_EPS)
    xhat = xc * inv_std
    return xhat * g + b, (xhat, inv_std)


def _layernorm_backward(dy, cache, g):
    xhat, inv_std = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv_std * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    b, t, d = x.shape
    return x.reshape(b, t, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, h, t, hd = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * hd)


def _forward(params: Params, config: ModelConfig, tokens: np.ndarray):
    """Forward pass; returns (logits, cache) with everything backward needs."""
    tokens = np.asarray(tokens)
    squeeze = tokens.ndim == 1
    if squeeze:
        tokens = tokens[None, :]
    if tokens.ndim != 2:
        raise ValueError("tokens must be a 1-D or 2-D integer array")
    b, t = tokens.shape
    if t < 1:
        raise ValueError("empty token sequence")
    if t > config.context_length:
        raise ValueError(
            f"sequence length {t} exceeds context length {config.context_length}"
        )

    dtype = params["tok_emb"].dtype
    x = params["tok_emb"][tokens] + params["pos_emb"][:t]
    causal = np.tril(np.ones((t, t), dtype=bool))
    scale = 1.0 / math.sqrt(config.head_dim)
    neg = np.finfo(dtype).min

    layer_caches = []
    for i in range(config.layers):
        p = f"layer{i}."
        x_in = x
        h, ln1_cache = _layernorm(x, params[p + "ln1.g"], params[p + "ln1.b"])
        q = _split_heads(h @ params[p + "attn.wq"] + params[p + "attn.bq"], config.heads)
        k = _split_heads(h @ params[p + "attn.wk"] + params[p + "attn.bk"], config.heads)
        v = _split_heads(h @ params[p + "attn.wv"] + params[p + "attn.bv"], config.heads)
        scores = (q @ k.transpose(0, 1, 3, 2)) * scale
        scores = np.where(causal, scores, neg)
        att = _softmax(scores)
        merged = _merge_heads(att @ v)
        attn_out = merged @ params[p + "attn.wo"] + params[p + "attn.bo"]
        x = x_in + attn_out

        x_mid = x
        h2, ln2_cache = _layernorm(x, params[p + "ln2.g"], params[p + "ln2.b"])
        pre = h2 @ params[p + "mlp.w1"] + params[p + "mlp.b1"]
        act = _gelu(pre)
        x = x_mid + act @ params[p + "mlp.w2"] + params[p + "mlp.b2"]

        layer_caches.append((h, ln1_cache, q, k, v, att, merged, h2, ln2_cache, pre, act))

    hf, lnf_cache = _layernorm(x, params["ln_f.g"], params["ln_f.b"])
    logits = hf @ _head_weight(params, config) + params["head.b"]
    cache = (tokens, squeeze, layer_caches, hf, lnf_cache)
    return (logits[0] if squeeze else logits), cache


def forward(params: Params, config: ModelConfig, tokens: np.ndarray) -> np.ndarray:
    """Logits of shape (..., seq, vocab); causal in the sequence dimension."""
    logits, _ = _forward(params, config, tokens)
    return logits


def masked_loss(logits: np.ndarray, targets: np.ndarray, mask: np.ndarray) -> float:
    """Mean token-level cross-entropy over the masked-in positions only."""
    logits = np.atleast_2d(logits)
    flat = logits.reshape(-1, logits.shape[-1])
    targets = np.asarray(targets).reshape(-1)
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if not mask.any():
        raise ValueError("mask selects no positions")
    sel = flat[mask]
    tgt = targets[mask]
    z = sel - sel.max(axis=-1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    return float(-log_probs[np.arange(tgt.size), tgt].mean())


def _loss_grad(logits, targets, mask):
    """d(masked mean cross-entropy)/d(logits), matching masked_loss exactly."""
    flat = logits.reshape(-1, logits.shape[-1])
    targets = np.asarray(targets).reshape(-1)
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    n = int(mask.sum())
    probs = _softmax(flat)
    probs[np.arange(targets.size), targets] -= 1.0
    probs *= mask[:, None] / n
    return probs.reshape(logits.shape).astype(logits.dtype)


def backward(
    params: Params,
    config: ModelConfig,
    tokens: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray,
) -> tuple[float, Grads]:
    """Loss and exact gradients of masked_loss w.r.t. every parameter."""
    logits, cache = _forward(params, config, tokens)
    tokens2d, squeezed, layer_caches, hf, lnf_cache = cache
    logits3d = logits[None] if squeezed else logits
    targets2d = np.asarray(targets).reshape(tokens2d.shape)
    mask2d = np.asarray(mask, dtype=bool).reshape(tokens2d.shape)
    loss = masked_loss(logits3d, targets2d, mask2d)

    b, t = tokens2d.shape
    d = config.embed_dim
    scale = 1.0 / math.sqrt(config.head_dim)
    grads: Grads = {name: np.zeros_like(p) for name, p in params.items()}

    dlogits = _loss_grad(logits3d, targets2d, mask2d)
    flat_hf = hf.reshape(-1, d)
    flat_dl = dlogits.reshape(-1, config.vocab)
    w_head = _head_weight(params, config)
    if config.tied_head:
        grads["tok_emb"] += (flat_hf.T @ flat_dl).T
    else:
        grads["head.w"] += flat_hf.T @ flat_dl
    grads["head.b"] += flat_dl.sum(axis=0)
    dhf = dlogits @ w_head.T
    dx, dg, db = _layernorm_backward(dhf, lnf_cache, params["ln_f.g"])
    grads["ln_f.g"] += dg
    grads["ln_f.b"] += db

    for i in reversed(range(config.layers)):
        p = f"layer{i}."
        h, ln1_cache, q, k, v, att, merged, h2, ln2_cache, pre, act = layer_caches[i]

        # MLP branch: x = x_mid + gelu(h2 @ w1 + b1) @ w2 + b2
        dact = dx @ params[p + "mlp.w2"].T
        grads[p + "mlp.w2"] += act.reshape(-1, act.shape[-1]).T @ dx.reshape(-1, d)
        grads[p + "mlp.b2"] += dx.sum(axis=(0, 1))
        dpre = dact * _gelu_grad(pre)
        grads[p + "mlp.w1"] += h2.reshape(-1, d).T @ dpre.reshape(-1, dpre.shape[-1])
        grads[p + "mlp.b1"] += dpre.sum(axis=(0, 1))
        dh2 = dpre @ params[p + "mlp.w1"].T
        dx_mid, dg, db = _layernorm_backward(dh2, ln2_cache, params[p + "ln2.g"])
        grads[p + "ln2.g"] += dg
        grads[p + "ln2.b"] += db
        dx = dx + dx_mid  # residual join

        # Attention branch: x = x_in + merge(att @ v) @ wo + bo
        dmerged = dx @ params[p + "attn.wo"].T
        grads[p + "attn.wo"] += merged.reshape(-1, d).T @ dx.reshape(-1, d)
        grads[p + "attn.bo"] += dx.sum(axis=(0, 1))
        dheads = _split_heads(dmerged, config.heads)
        dv = att.transpose(0, 1, 3, 2) @ dheads
        datt = dheads @ v.transpose(0, 1, 3, 2)
        # softmax backward; att is exactly 0 beyond the causal mask, so those
        # score gradients vanish on their own
        dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
        dq = (dscores @ k) * scale
        dk = (dscores.transpose(0, 1, 3, 2) @ q) * scale
        dh = np.zeros_like(h)
        flat_h = h.reshape(-1, d)
        for name, dmat in (("wq", dq), ("wk", dk), ("wv", dv)):
            dflat = _merge_heads(dmat).reshape(-1, d)
            grads[p + "attn." + name] += flat_h.T @ dflat
            grads[p + "attn.b" + name[1]] += dflat.sum(axis=0)
            dh += (dflat @ params[p + "attn." + name].T).reshape(h.shape)
        dx_in, dg, db = _layernorm_backward(dh, ln1_cache, params[p + "ln1.g"])
        grads[p + "ln1.g"] += dg
        grads[p + "ln1.b"] += db
        dx = dx + dx_in

    grads["pos_emb"][:t] += dx.sum(axis=0)
    np.add.at(grads["tok_emb"], tokens2d.reshape(-1), dx.reshape(-1, d))
    return loss, grads


@dataclass
class OptimizerState:
    """AdamW moments plus hyperparameters; decay is decoupled from gradients."""

    lr: float = 1e-3
    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def _decayed(name: str) -> bool:
    # norm scales/biases and all bias vectors are excluded from weight decay
    return not (
        ".ln1." in name
        or ".ln2." in name
        or name.startswith("ln_f.")
        or name.endswith(("bq", "bk", "bv", "bo", "b1", "b2"))
        or name == "head.b"
    )


def adamw_step(params: Params, grads: Grads, state: OptimizerState) -> None:
    """One decoupled-weight-decay Adam update, in place."""
    if not state.m:
        state.m = {k: np.zeros_like(v) for k, v in params.items()}
        state.v = {k: np.zeros_like(v) for k, v in params.items()}
    for name in params:
        if params[name].shape != grads[name].shape:
            raise ValueError(f"gradient shape mismatch for {name}")
    state.step += 1
    bc1 = 1.0 - state.beta1**state.step
    bc2 = 1.0 - state.beta2**state.step
    for name, w in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        if state.weight_decay and _decayed(name):
            update = update + state.weight_decay * w
        w -= (state.lr * update).astype(w.dtype)


def _write_tensor(f, name: str, arr: np.ndarray) -> None:
    raw = name.encode("utf-8")
    f.write(struct.pack("<I", len(raw)))
    f.write(raw)
    f.write(struct.pack("<I", arr.ndim))
    f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_exact(f, n: int) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise CheckpointFormatError("truncated checkpoint file")
    return buf


def _read_tensor(f, expect_name: str) -> np.ndarray:
    (name_len,) = struct.unpack("<I", _read_exact(f, 4))
    name = _read_exact(f, name_len).decode("utf-8")
    if name != expect_name:
        raise CheckpointFormatError(f"expected tensor {expect_name!r}, found {name!r}")
    (ndim,) = struct.unpack("<I", _read_exact(f, 4))
    shape = struct.unpack(f"<{ndim}Q", _read_exact(f, 8 * ndim))
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(_read_exact(f, 4 * count), dtype="<f4")
    return data.reshape(shape).copy()


def save_checkpoint(
    params: Params,
    config: ModelConfig,
    state: OptimizerState | None,
    path: str | Path,
) -> None:
    flags = (1 if config.tied_head else 0) | (2 if state is not None else 0)
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        f.write(
            struct.pack(
                "<4I", config.layers, config.heads, config.embed_dim, config.context_length
            )
        )
        f.write(struct.pack("<I", flags))
        names = list(param_shapes(config))
        for name in names:
            _write_tensor(f, name, params[name])
        if state is not None:
            f.write(
                struct.pack(
                    "<Q5d",
                    state.step,
                    state.lr,
                    state.weight_decay,
                    state.beta1,
                    state.beta2,
                    state.eps,
                )
            )
            zeros = {} if state.m else {n: np.zeros_like(params[n]) for n in names}
            m, v = (state.m, state.v) if state.m else (zeros, zeros)
            for name in names:
                _write_tensor(f, "opt.m." + name, m[name])
            for name in names:
                _write_tensor(f, "opt.v." + name, v[name])


def load_checkpoint(path: str | Path) -> tuple[Params, ModelConfig, OptimizerState | None]:
    with open(path, "rb") as f:
        if _read_exact(f, 8) != CHECKPOINT_MAGIC:
            raise CheckpointFormatError(f"{path}: not a model checkpoint")
        (version,) = struct.unpack("<I", _read_exact(f, 4))
        if version != CHECKPOINT_VERSION:
            raise CheckpointFormatError(f"unsupported checkpoint version {version}")
        layers, heads, dim, ctx = struct.unpack("<4I", _read_exact(f, 16))
        (flags,) = struct.unpack("<I", _read_exact(f, 4))
        config = ModelConfig(
            layers=layers,
            heads=heads,
            embed_dim=dim,
            context_length=ctx,
            tied_head=bool(flags & 1),
        )
        names = list(param_shapes(config))
        params = {name: _read_tensor(f, name) for name in names}
        for name, shape in param_shapes(config).items():
            if params[name].shape != shape:
                raise CheckpointFormatError(f"tensor {name!r} has wrong shape")
        state = None
        if flags & 2:
            step, lr, wd, b1, b2, eps = struct.unpack("<Q5d", _read_exact(f, 48))
            state = OptimizerState(
                lr=lr, weight_decay=wd, beta1=b1, beta2=b2, eps=eps, step=step
            )
            state.m = {name: _read_tensor(f, "opt.m." + name) for name in names}
            state.v = {name: _read_tensor(f, "opt.v." + name) for name in names}
    return params, config, state

"""Binary match scorer: a five-layer CNN over the similarity canvas.

Architecture: [3x3 conv -> ReLU -> 2x2 max pool] x 4, then 3x3 conv -> ReLU
-> global average pool -> fc(64) -> ReLU -> fc(2). The phoneme embedding
table is part of the model and is trained jointly: gradients flow from the
loss through the canvas and the cosine normalization into embedding rows.
"""

from __future__ import annotations

import json
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import nn
from .bank import HotwordEntry
from .canvas import DEFAULT_COLS, DEFAULT_ROWS, NORM_EPS, SimilarityCanvas, normalize_rows
from .embeddings import DEFAULT_EMBEDDING_DIM, INIT_SCALE
from .errors import CorruptModel, NonFiniteLoss, ShapeMismatch
from .vocab import PAD_ID

DEFAULT_CHANNELS = (16, 32, 64, 128, 128)
FC_HIDDEN = 64
N_CLASSES = 2
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScorerHyper:
    canvas_rows: int = DEFAULT_ROWS
    canvas_cols: int = DEFAULT_COLS
    channels: Tuple[int, ...] = DEFAULT_CHANNELS
    embedding_dim: int = DEFAULT_EMBEDDING_DIM
    seed: int = 0


@dataclass
class ScorerModel:
    params: Dict[str, np.ndarray]
    hyper: ScorerHyper
    vocab_hash: bytes = b"\x00" * 32

    @property
    def vocab_size(self) -> int:
        return self.params["emb"].shape[0]

    @property
    def dtype(self):
        return self.params["emb"].dtype

    def param_names(self) -> List[str]:
        names = ["emb"]
        for i in range(len(self.hyper.channels)):
            names += [f"conv{i + 1}_w", f"conv{i + 1}_b"]
        names += ["fc1_w", "fc1_b", "fc2_w", "fc2_b"]
        return names

    def n_params(self) -> int:
        return sum(int(self.params[n].size) for n in self.param_names())


@dataclass
class ScoredPair:
    hotword_id: int
    score: float


def init_model(
    vocab_size: int,
    seed: int = 0,
    canvas_rows: int = DEFAULT_ROWS,
    canvas_cols: int = DEFAULT_COLS,
    channels: Sequence[int] = DEFAULT_CHANNELS,
    embedding_dim: int = DEFAULT_EMBEDDING_DIM,
    vocab_hash: bytes = b"\x00" * 32,
    dtype=np.float32,
) -> ScorerModel:
    """He fan-in init for conv/FC weights, zero biases, uniform embeddings."""
    if vocab_size < 2:
        raise ValueError("vocab_size must be at least 2 (PAD plus one phoneme)")
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    emb = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(vocab_size, embedding_dim))
    emb[PAD_ID] = 0.0
    params["emb"] = emb.astype(dtype)
    c_in = 1
    for i, c_out in enumerate(channels):
        fan_in = c_in * 9
        params[f"conv{i + 1}_w"] = (
            rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(c_out, c_in, 3, 3)).astype(dtype)
        )
        params[f"conv{i + 1}_b"] = np.zeros(c_out, dtype=dtype)
        c_in = c_out
    params["fc1_w"] = rng.normal(0.0, np.sqrt(2.0 / c_in), size=(FC_HIDDEN, c_in)).astype(dtype)
    params["fc1_b"] = np.zeros(FC_HIDDEN, dtype=dtype)
    params["fc2_w"] = rng.normal(0.0, np.sqrt(2.0 / FC_HIDDEN), size=(N_CLASSES, FC_HIDDEN)).astype(dtype)
    params["fc2_b"] = np.zeros(N_CLASSES, dtype=dtype)
    hyper = ScorerHyper(canvas_rows, canvas_cols, tuple(channels), embedding_dim, seed)
    return ScorerModel(params, hyper, vocab_hash)


# ---------------------------------------------------------------------------
# forward / backward over canvases


def forward_batch(model: ScorerModel, canvases: np.ndarray, want_cache: bool = False):
    """canvases: (N, rows, cols) -> logits (N, 2)."""
    hy = model.hyper
    if canvases.ndim != 3 or canvases.shape[1:] != (hy.canvas_rows, hy.canvas_cols):
        raise ShapeMismatch(
            f"expected (N, {hy.canvas_rows}, {hy.canvas_cols}), got {canvases.shape}"
        )
    p = model.params
    x = canvases[:, None, :, :]
    cache = [] if want_cache else None
    n_layers = len(hy.channels)
    for i in range(n_layers):
        out, conv_cache = nn.conv2d_forward(x, p[f"conv{i + 1}_w"], p[f"conv{i + 1}_b"])
        act, relu_mask = nn.relu_forward(out)
        if i < n_layers - 1:
            x, pool_cache = nn.maxpool2_forward(act)
        else:
            x, pool_cache = act, None
        if want_cache:
            cache.append((conv_cache, relu_mask, pool_cache))
    g, gap_shape = nn.gap_forward(x)
    h1, fc1_x = nn.linear_forward(g, p["fc1_w"], p["fc1_b"])
    h1a, fc1_mask = nn.relu_forward(h1)
    logits, fc2_x = nn.linear_forward(h1a, p["fc2_w"], p["fc2_b"])
    if want_cache:
        cache.append((gap_shape, fc1_x, fc1_mask, fc2_x))
    return logits, cache


def backward_batch(model: ScorerModel, cache, dlogits: np.ndarray):
    """Returns (grads for conv/fc params, gradient w.r.t. the canvases)."""
    p = model.params
    grads: Dict[str, np.ndarray] = {}
    gap_shape, fc1_x, fc1_mask, fc2_x = cache[-1]
    dh1a, grads["fc2_w"], grads["fc2_b"] = nn.linear_backward(dlogits, p["fc2_w"], fc2_x)
    dh1 = nn.relu_backward(dh1a, fc1_mask)
    dg, grads["fc1_w"], grads["fc1_b"] = nn.linear_backward(dh1, p["fc1_w"], fc1_x)
    dx = nn.gap_backward(dg, gap_shape)
    n_layers = len(model.hyper.channels)
    for i in range(n_layers - 1, -1, -1):
        conv_cache, relu_mask, pool_cache = cache[i]
        if pool_cache is not None:
            dx = nn.maxpool2_backward(dx, pool_cache)
        dx = nn.relu_backward(dx, relu_mask)
        dx, grads[f"conv{i + 1}_w"], grads[f"conv{i + 1}_b"] = nn.conv2d_backward(
            dx, p[f"conv{i + 1}_w"], conv_cache
        )
    return grads, dx[:, 0, :, :]


def forward(model: ScorerModel, canvas: SimilarityCanvas) -> np.ndarray:
    """Logits for a single canvas."""
    logits, _ = forward_batch(model, canvas.values[None, :, :])
    return logits[0]


# ---------------------------------------------------------------------------
# canvas construction from phoneme ids (differentiable path)


def _pair_canvas(emb: np.ndarray, hw_ids: np.ndarray, text_ids: np.ndarray,
                 rows: int, cols: int):
    """Cosine canvas plus the intermediates needed for the backward pass."""
    u = emb[hw_ids]
    v = emb[text_ids]
    nu = np.maximum(np.linalg.norm(u, axis=1), NORM_EPS)
    nv = np.maximum(np.linalg.norm(v, axis=1), NORM_EPS)
    un = u / nu[:, None]
    vn = v / nv[:, None]
    sim = un @ vn.T
    sim[hw_ids[:, None] == text_ids[None, :]] = 1.0
    sim = np.clip(sim, -1.0, 1.0)
    values = np.zeros((rows, cols), dtype=emb.dtype)
    values[: len(hw_ids), : len(text_ids)] = sim
    return values, (un, vn, nu, nv, sim)


def _pair_canvas_backward(dvalues: np.ndarray, pair_cache, hw_ids, text_ids, demb):
    un, vn, nu, nv, sim = pair_cache
    h, t = sim.shape
    # cells snapped to an exact 1.0 are constant w.r.t. the embeddings
    dc = np.where(hw_ids[:, None] == text_ids[None, :], 0.0, dvalues[:h, :t])
    dcs = dc * sim
    du = (dc @ vn - un * dcs.sum(axis=1, keepdims=True)) / nu[:, None]
    dv = (dc.T @ un - vn * dcs.sum(axis=0)[:, None]) / nv[:, None]
    np.add.at(demb, hw_ids, du)
    np.add.at(demb, text_ids, dv)


def _clip_ids(ids, limit) -> np.ndarray:
    arr = np.asarray(ids, dtype=np.intp)
    return arr[:limit]


def loss_and_grads(
    model: ScorerModel, batch: List[Tuple[Sequence[int], Sequence[int], int]]
):
    """Mean cross-entropy and gradients for every parameter.

    Each batch item is (hotword phoneme ids, transcript phoneme ids, label).
    The PAD embedding row's gradient is forced to zero.
    """
    if not batch:
        raise ValueError("empty batch")
    hy = model.hyper
    emb = model.params["emb"]
    canvases = np.empty((len(batch), hy.canvas_rows, hy.canvas_cols), dtype=emb.dtype)
    pair_caches = []
    labels = np.empty(len(batch), dtype=np.intp)
    id_pairs = []
    for i, (hw_ids, text_ids, label) in enumerate(batch):
        hw = _clip_ids(hw_ids, hy.canvas_rows)
        tx = _clip_ids(text_ids, hy.canvas_cols)
        canvases[i], pc = _pair_canvas(emb, hw, tx, hy.canvas_rows, hy.canvas_cols)
        pair_caches.append(pc)
        id_pairs.append((hw, tx))
        labels[i] = label
    logits, cache = forward_batch(model, canvases, want_cache=True)
    loss, dlogits = nn.softmax_xent(logits, labels)
    if not np.isfinite(loss):
        bad = int(np.nonzero(~np.isfinite(logits).all(axis=1))[0][0]) if logits.size else 0
        raise NonFiniteLoss(f"non-finite loss (first bad batch index {bad})")
    grads, dcanvases = backward_batch(model, cache, dlogits)
    demb = np.zeros_like(emb)
    for i, (hw, tx) in enumerate(id_pairs):
        _pair_canvas_backward(dcanvases[i], pair_caches[i], hw, tx, demb)
    demb[PAD_ID] = 0.0
    grads["emb"] = demb
    return loss, grads


# ---------------------------------------------------------------------------
# scoring


def positive_probability(logits: np.ndarray) -> np.ndarray:
    """softmax(logits)[..., 1], computed stably."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e[..., 1] / e.sum(axis=-1)


def score_id_pairs(
    model: ScorerModel,
    pairs: List[Tuple[Sequence[int], Sequence[int]]],
    chunk_size: int = 256,
    threads: int = 1,
) -> np.ndarray:
    """Scores for (hotword ids, text ids) pairs via the batched forward.

    Work is split into fixed-size chunks whose boundaries do not depend on
    the thread count, so results are identical for any `threads` value.
    """
    hy = model.hyper
    emb = model.params["emb"]
    norm_table = normalize_rows(emb)

    def run_chunk(lo: int) -> np.ndarray:
        hi = min(lo + chunk_size, len(pairs))
        canvases = np.zeros((hi - lo, hy.canvas_rows, hy.canvas_cols), dtype=emb.dtype)
        for i in range(lo, hi):
            hw = _clip_ids(pairs[i][0], hy.canvas_rows)
            tx = _clip_ids(pairs[i][1], hy.canvas_cols)
            sim = norm_table[hw] @ norm_table[tx].T
            sim[hw[:, None] == tx[None, :]] = 1.0
            canvases[i - lo, : len(hw), : len(tx)] = np.clip(sim, -1.0, 1.0)
        logits, _ = forward_batch(model, canvases)
        return positive_probability(logits)

    starts = list(range(0, len(pairs), chunk_size))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, starts))
    else:
        results = [run_chunk(lo) for lo in starts]
    return np.concatenate(results) if results else np.empty(0, dtype=emb.dtype)


def score_pair(model: ScorerModel, hotword: HotwordEntry, text_ids: Sequence[int]) -> ScoredPair:
    score = score_id_pairs(model, [(hotword.phoneme_ids, list(text_ids))])[0]
    return ScoredPair(hotword.id, float(score))


# ---------------------------------------------------------------------------
# AdamW


@dataclass
class OptimizerState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def _decayed(name: str) -> bool:
    # decoupled decay on weights and embeddings, never on biases
    return name.endswith("_w") or name == "emb"


def adamw_step(model: ScorerModel, opt: OptimizerState, grads: Dict[str, np.ndarray]) -> None:
    """One in-place AdamW update with decoupled weight decay."""
    opt.step += 1
    t = opt.step
    for name in model.param_names():
        p = model.params[name]
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} != param shape {p.shape} for {name}")
        if name not in opt.m:
            opt.m[name] = np.zeros_like(p)
            opt.v[name] = np.zeros_like(p)
        m = opt.m[name]
        v = opt.v[name]
        m *= opt.beta1
        m += (1 - opt.beta1) * g
        v *= opt.beta2
        v += (1 - opt.beta2) * np.square(g)
        mhat = m / (1 - opt.beta1 ** t)
        vhat = v / (1 - opt.beta2 ** t)
        if _decayed(name):
            p -= (opt.lr * opt.weight_decay) * p
        p -= opt.lr * mhat / (np.sqrt(vhat) + opt.eps)
    model.params["emb"][PAD_ID] = 0.0


# ---------------------------------------------------------------------------
# serialization


def save_model(model: ScorerModel) -> bytes:
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "vocab_hash": model.vocab_hash.hex(),
        "vocab_size": model.vocab_size,
        "canvas_rows": model.hyper.canvas_rows,
        "canvas_cols": model.hyper.canvas_cols,
        "channels": list(model.hyper.channels),
        "embedding_dim": model.hyper.embedding_dim,
        "seed": model.hyper.seed,
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [struct.pack("<I", len(raw)), raw]
    for name in model.param_names():
        parts.append(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())
    payload = b"".join(parts)
    return payload + struct.pack("<I", zlib.crc32(payload))


def load_model(data: bytes) -> ScorerModel:
    if len(data) < 8:
        raise CorruptModel("truncated model stream")
    payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != crc:
        raise CorruptModel("checksum mismatch")
    (hlen,) = struct.unpack_from("<I", payload, 0)
    try:
        header = json.loads(payload[4:4 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModel(f"bad header: {exc}") from exc
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise CorruptModel(f"unsupported model version {header.get('format_version')}")
    hyper = ScorerHyper(
        canvas_rows=header["canvas_rows"],
        canvas_cols=header["canvas_cols"],
        channels=tuple(header["channels"]),
        embedding_dim=header["embedding_dim"],
        seed=header["seed"],
    )
    shapes = [("emb", (header["vocab_size"], hyper.embedding_dim))]
    c_in = 1
    for i, c_out in enumerate(hyper.channels):
        shapes.append((f"conv{i + 1}_w", (c_out, c_in, 3, 3)))
        shapes.append((f"conv{i + 1}_b", (c_out,)))
        c_in = c_out
    shapes += [
        ("fc1_w", (FC_HIDDEN, c_in)), ("fc1_b", (FC_HIDDEN,)),
        ("fc2_w", (N_CLASSES, FC_HIDDEN)), ("fc2_b", (N_CLASSES,)),
    ]
    params: Dict[str, np.ndarray] = {}
    off = 4 + hlen
    for name, shape in shapes:
        n = int(np.prod(shape))
        blob = payload[off:off + 4 * n]
        if len(blob) != 4 * n:
            raise CorruptModel(f"tensor {name} truncated")
        params[name] = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
        off += 4 * n
    if off != len(payload):
        raise CorruptModel("trailing bytes after tensor data")
    return ScorerModel(params, hyper, bytes.fromhex(header["vocab_hash"]))

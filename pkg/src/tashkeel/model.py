"""From-scratch transformer encoder with manual backpropagation.

Post-LN BERT-style trunk (learned token+position embeddings, multi-head
self-attention with additive key padding mask, GELU feed-forward) and two
linear heads: "mlm" over the vocabulary and "cls" over the diacritic classes.
Parameters live in a flat name→array dict so checkpointing, AdamW, and the
finite-difference gradient check all see one representation. Everything is
deterministic given the seed and runs in float64 or float32 per the config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import erf

from .encoding import IGNORE_LABEL, PAD_ID, EncodedSample
from .errors import (
    DivergenceDetected,
    GradientMismatch,
    InvalidConfig,
    SequenceTooLong,
    ShapeMismatch,
)

LN_EPS = 1e-5
INIT_STD = 0.02
# Additive score for padded keys; large enough that softmax zeroes them in
# both precisions without overflowing float32.
KEY_MASK_VALUE = -1e9

HEADS = ("mlm", "cls")

_DTYPES = {"double": np.float64, "single": np.float32}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and numeric settings; stored verbatim in checkpoints.

    Defaults are the desk-scale shape that trains on one CPU core in minutes;
    label_count is fixed at fifteen, the size of the diacritic class set.
    """

    vocab_size: int
    hidden_dim: int = 128
    layer_count: int = 2
    head_count: int = 4
    ffn_dim: int = 256
    max_seq_len: int = 512
    label_count: int = 15
    dropout_rate: float = 0.1
    precision: str = "double"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vocab_size < 5:
            raise InvalidConfig("vocab_size must cover the special tokens")
        for name in ("hidden_dim", "layer_count", "head_count", "ffn_dim"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be positive")
        if self.max_seq_len < 2:
            raise InvalidConfig("max_seq_len must be at least 2")
        if self.label_count != 15:
            raise InvalidConfig("label_count is fixed at 15 diacritic classes")
        if self.hidden_dim % self.head_count:
            raise InvalidConfig("hidden_dim must be divisible by head_count")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidConfig("dropout_rate must be in [0, 1)")
        if self.precision not in _DTYPES:
            raise InvalidConfig(f"precision must be one of {sorted(_DTYPES)}")

    @property
    def dtype(self):
        return _DTYPES[self.precision]


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Every parameter tensor name and shape, in creation order."""
    d, f, v = config.hidden_dim, config.ffn_dim, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (v, d),
        "pos_emb": (config.max_seq_len, d),
        "emb_ln_g": (d,),
        "emb_ln_b": (d,),
    }
    for i in range(config.layer_count):
        p = f"l{i}_"
        shapes[p + "attn_wq"] = (d, d)
        shapes[p + "attn_bq"] = (d,)
        shapes[p + "attn_wk"] = (d, d)
        shapes[p + "attn_bk"] = (d,)
        shapes[p + "attn_wv"] = (d, d)
        shapes[p + "attn_bv"] = (d,)
        shapes[p + "attn_wo"] = (d, d)
        shapes[p + "attn_bo"] = (d,)
        shapes[p + "ln1_g"] = (d,)
        shapes[p + "ln1_b"] = (d,)
        shapes[p + "ffn_w1"] = (d, f)
        shapes[p + "ffn_b1"] = (f,)
        shapes[p + "ffn_w2"] = (f, d)
        shapes[p + "ffn_b2"] = (d,)
        shapes[p + "ln2_g"] = (d,)
        shapes[p + "ln2_b"] = (d,)
    shapes["mlm_w"] = (d, v)
    shapes["mlm_b"] = (v,)
    shapes["cls_w"] = (d, config.label_count)
    shapes["cls_b"] = (config.label_count,)
    return shapes


def init_parameters(
    config: ModelConfig, seed: int | None = None
) -> dict[str, np.ndarray]:
    """Seeded init: N(0, 0.02) weights, zero biases, unit layer-norm gains.

    Uses the config's own seed unless an override is given.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config).items():
        if name.endswith("_g"):
            arr = np.ones(shape)
        elif name.endswith(("_b", "_bq", "_bk", "_bv", "_bo", "_b1", "_b2")):
            arr = np.zeros(shape)
        else:
            arr = rng.normal(0.0, INIT_STD, size=shape)
        params[name] = arr.astype(config.dtype)
    return params


# --- primitive forward/backward pairs ----------------------------------------

def _layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mu) * inv_std
    return xhat * g + b, (xhat, inv_std, g)


def _layer_norm_backward(dy, cache):
    xhat, inv_std, g = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    mean1 = dxhat.mean(axis=-1, keepdims=True)
    mean2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv_std * (dxhat - mean1 - xhat * mean2)
    return dx, dg, db


_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _gelu(x):
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def _gelu_grad(x):
    return 0.5 * (1.0 + erf(x * _INV_SQRT2)) + x * _INV_SQRT2PI * np.exp(-0.5 * x * x)


def _linear(x, w, b):
    return x @ w + b


def _linear_backward(dy, x, w):
    flat_x = x.reshape(-1, x.shape[-1])
    flat_dy = dy.reshape(-1, dy.shape[-1])
    dw = flat_x.T @ flat_dy
    db = flat_dy.sum(axis=0)
    dx = dy @ w.T
    return dx, dw, db


def _dropout(x, rate, rng):
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def _split_heads(x, head_count):
    b, t, d = x.shape
    return x.reshape(b, t, head_count, d // head_count).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


# --- trunk --------------------------------------------------------------------

def _forward_trunk(params, config, ids, train=False, rng=None):
    """Run the encoder; returns final hidden states and the backward cache."""
    ids = np.asarray(ids)
    if ids.ndim != 2:
        raise ValueError("ids must be a (batch, seq) array")
    b, t = ids.shape
    if t > config.max_seq_len:
        raise SequenceTooLong(f"sequence of {t} exceeds limit {config.max_seq_len}")
    dropping = train and config.dropout_rate > 0.0
    if dropping and rng is None:
        raise ValueError("training with dropout requires an rng")
    dtype = config.dtype
    scale = 1.0 / math.sqrt(config.hidden_dim // config.head_count)

    key_mask = ((ids == PAD_ID).astype(dtype) * dtype(KEY_MASK_VALUE))[:, None, None, :]

    x = params["tok_emb"][ids] + params["pos_emb"][:t][None, :, :]
    x, emb_ln_cache = _layer_norm(x, params["emb_ln_g"], params["emb_ln_b"])
    emb_drop = None
    if dropping:
        x, emb_drop = _dropout(x, config.dropout_rate, rng)

    layer_caches = []
    for i in range(config.layer_count):
        p = f"l{i}_"
        x_in = x
        q = _linear(x_in, params[p + "attn_wq"], params[p + "attn_bq"])
        k = _linear(x_in, params[p + "attn_wk"], params[p + "attn_bk"])
        v = _linear(x_in, params[p + "attn_wv"], params[p + "attn_bv"])
        qh = _split_heads(q, config.head_count)
        kh = _split_heads(k, config.head_count)
        vh = _split_heads(v, config.head_count)
        scores = qh @ kh.transpose(0, 1, 3, 2) * scale + key_mask
        scores -= scores.max(axis=-1, keepdims=True)
        exp = np.exp(scores)
        probs = exp / exp.sum(axis=-1, keepdims=True)
        probs_used, probs_drop = probs, None
        if dropping:
            probs_used, probs_drop = _dropout(probs, config.dropout_rate, rng)
        ctx = _merge_heads(probs_used @ vh)
        attn = _linear(ctx, params[p + "attn_wo"], params[p + "attn_bo"])
        attn_drop = None
        if dropping:
            attn, attn_drop = _dropout(attn, config.dropout_rate, rng)
        u1 = x_in + attn
        x1, ln1_cache = _layer_norm(u1, params[p + "ln1_g"], params[p + "ln1_b"])
        h1 = _linear(x1, params[p + "ffn_w1"], params[p + "ffn_b1"])
        a1 = _gelu(h1)
        fo = _linear(a1, params[p + "ffn_w2"], params[p + "ffn_b2"])
        ffn_drop = None
        if dropping:
            fo, ffn_drop = _dropout(fo, config.dropout_rate, rng)
        u2 = x1 + fo
        x, ln2_cache = _layer_norm(u2, params[p + "ln2_g"], params[p + "ln2_b"])
        layer_caches.append({
            "x_in": x_in, "qh": qh, "kh": kh, "vh": vh,
            "probs": probs, "probs_used": probs_used, "probs_drop": probs_drop,
            "ctx": ctx, "attn_drop": attn_drop,
            "ln1": ln1_cache, "x1": x1, "h1": h1, "a1": a1,
            "ffn_drop": ffn_drop, "ln2": ln2_cache,
        })

    cache = {
        "ids": ids, "scale": scale,
        "emb_ln": emb_ln_cache, "emb_drop": emb_drop,
        "layers": layer_caches, "seq_len": t,
    }
    return x, cache


def _backward_trunk(params, config, cache, dx):
    """Backpropagate dx (gradient at the final hidden states) to all trunk
    parameters; returns the gradient dict."""
    grads = {name: None for name in params}
    scale = cache["scale"]
    for i in reversed(range(config.layer_count)):
        p = f"l{i}_"
        lc = cache["layers"][i]
        du2, dg2, db2 = _layer_norm_backward(dx, lc["ln2"])
        grads[p + "ln2_g"] = dg2
        grads[p + "ln2_b"] = db2
        dfo = du2
        if lc["ffn_drop"] is not None:
            dfo = dfo * lc["ffn_drop"]
        da1, dw2, dfb2 = _linear_backward(dfo, lc["a1"], params[p + "ffn_w2"])
        grads[p + "ffn_w2"] = dw2
        grads[p + "ffn_b2"] = dfb2
        dh1 = da1 * _gelu_grad(lc["h1"])
        dx1, dw1, dfb1 = _linear_backward(dh1, lc["x1"], params[p + "ffn_w1"])
        grads[p + "ffn_w1"] = dw1
        grads[p + "ffn_b1"] = dfb1
        dx1 = dx1 + du2
        du1, dg1, db1 = _layer_norm_backward(dx1, lc["ln1"])
        grads[p + "ln1_g"] = dg1
        grads[p + "ln1_b"] = db1
        dattn = du1
        if lc["attn_drop"] is not None:
            dattn = dattn * lc["attn_drop"]
        dctx, dwo, dbo = _linear_backward(dattn, lc["ctx"], params[p + "attn_wo"])
        grads[p + "attn_wo"] = dwo
        grads[p + "attn_bo"] = dbo
        dctx_h = _split_heads(dctx, config.head_count)
        dprobs_used = dctx_h @ lc["vh"].transpose(0, 1, 3, 2)
        dvh = lc["probs_used"].transpose(0, 1, 3, 2) @ dctx_h
        dprobs = dprobs_used
        if lc["probs_drop"] is not None:
            dprobs = dprobs * lc["probs_drop"]
        probs = lc["probs"]
        dscores = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
        dqh = dscores @ lc["kh"] * scale
        dkh = dscores.transpose(0, 1, 3, 2) @ lc["qh"] * scale
        dq = _merge_heads(dqh)
        dk = _merge_heads(dkh)
        dv = _merge_heads(dvh)
        x_in = lc["x_in"]
        dx_in = du1
        dstep, dwq, dbq = _linear_backward(dq, x_in, params[p + "attn_wq"])
        dx_in = dx_in + dstep
        grads[p + "attn_wq"] = dwq
        grads[p + "attn_bq"] = dbq
        dstep, dwk, dbk = _linear_backward(dk, x_in, params[p + "attn_wk"])
        dx_in = dx_in + dstep
        grads[p + "attn_wk"] = dwk
        grads[p + "attn_bk"] = dbk
        dstep, dwv, dbv = _linear_backward(dv, x_in, params[p + "attn_wv"])
        dx_in = dx_in + dstep
        grads[p + "attn_wv"] = dwv
        grads[p + "attn_bv"] = dbv
        dx = dx_in

    if cache["emb_drop"] is not None:
        dx = dx * cache["emb_drop"]
    dx0, dg, db = _layer_norm_backward(dx, cache["emb_ln"])
    grads["emb_ln_g"] = dg
    grads["emb_ln_b"] = db

    ids = cache["ids"]
    t = cache["seq_len"]
    dtok = np.zeros_like(params["tok_emb"])
    np.add.at(dtok, ids.ravel(), dx0.reshape(-1, dx0.shape[-1]))
    grads["tok_emb"] = dtok
    dpos = np.zeros_like(params["pos_emb"])
    dpos[:t] = dx0.sum(axis=0)
    grads["pos_emb"] = dpos
    return grads


def _head_params(head: str) -> tuple[str, str]:
    if head not in HEADS:
        raise ValueError(f"head must be one of {HEADS}")
    return f"{head}_w", f"{head}_b"


def forward_logits(params, config, ids, head: str, train=False, rng=None):
    """Logits of the given head for a (batch, seq) id array."""
    w_name, b_name = _head_params(head)
    hidden, _ = _forward_trunk(params, config, ids, train=train, rng=rng)
    return _linear(hidden, params[w_name], params[b_name])


def forward(params, config, ids, train=False, rng=None):
    """Both heads' logits from one trunk pass: {"mlm": …, "cls": …}."""
    hidden, _ = _forward_trunk(params, config, ids, train=train, rng=rng)
    return {
        head: _linear(hidden, *(params[n] for n in _head_params(head)))
        for head in HEADS
    }


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over positions whose label is not ignored.

    Returns (loss, dlogits). With no labelled positions the loss is 0 and the
    gradient is zero everywhere.
    """
    labels = np.asarray(labels)
    if labels.shape != logits.shape[:-1]:
        raise ShapeMismatch(
            f"labels {labels.shape} do not match logits {logits.shape[:-1]}"
        )
    mask = labels != IGNORE_LABEL
    n = int(mask.sum())
    dlogits = np.zeros_like(logits)
    if n == 0:
        return 0.0, dlogits
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)
    safe_labels = np.where(mask, labels, 0)
    picked = np.take_along_axis(probs, safe_labels[..., None], axis=-1)[..., 0]
    losses = -np.log(np.maximum(picked, np.finfo(logits.dtype).tiny))
    loss = float(losses[mask].sum() / n)
    one_hot = np.zeros_like(logits)
    np.put_along_axis(one_hot, safe_labels[..., None], 1.0, axis=-1)
    dlogits = (probs - one_hot) * mask[..., None].astype(logits.dtype) / n
    return loss, dlogits


def compute_loss(params, config, ids, labels, head: str) -> float:
    """Evaluation-mode loss; used by the finite-difference checker."""
    logits = forward_logits(params, config, ids, head)
    loss, _ = softmax_cross_entropy(logits, np.asarray(labels))
    return loss


def loss_and_grads(params, config, ids, labels, head: str, train=False, rng=None):
    """One forward/backward pass; raises DivergenceDetected on NaN/Inf."""
    w_name, b_name = _head_params(head)
    hidden, cache = _forward_trunk(params, config, ids, train=train, rng=rng)
    logits = _linear(hidden, params[w_name], params[b_name])
    loss, dlogits = softmax_cross_entropy(logits, np.asarray(labels))
    if not math.isfinite(loss):
        raise DivergenceDetected(f"non-finite loss {loss}")
    dhidden, dw, db = _linear_backward(dlogits, hidden, params[w_name])
    grads = _backward_trunk(params, config, cache, dhidden)
    grads[w_name] = dw
    grads[b_name] = db
    for other in HEADS:
        if other != head:
            ow, ob = _head_params(other)
            grads[ow] = np.zeros_like(params[ow])
            grads[ob] = np.zeros_like(params[ob])
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise DivergenceDetected(f"non-finite gradient in {name}")
    return loss, grads


def predict(params, config, sample: EncodedSample) -> tuple[int, ...]:
    """Argmax class id for every mask position, flattened in span order.

    Deterministic: ties go to the lowest class id. The result has exactly one
    entry per inserted mask token.
    """
    ids = np.asarray([sample.tokens])
    logits = forward_logits(params, config, ids, "cls")[0]
    all_positions = np.argmax(logits, axis=-1)
    return tuple(
        int(all_positions[i])
        for start, end in sample.word_spans
        for i in range(start, end)
    )


# --- gradient checking ---------------------------------------------------------


@dataclass(frozen=True)
class GradCheckReport:
    """Outcome of an analytic-vs-finite-difference comparison."""

    tolerance: float
    step: float
    probes: int
    passed: int
    worst_tensor: str
    worst_rel_err: float
    per_tensor: Mapping[str, tuple[int, int, float]] = field(default_factory=dict)

    @property
    def pass_fraction(self) -> float:
        return self.passed / self.probes if self.probes else 1.0


def _gradcheck_batch(config: ModelConfig, rng: np.random.Generator):
    """A small mixed batch: one full-length row, one padded row, labels for
    both heads at a few positions."""
    from .encoding import CLS_ID, MASK_ID, SEP_ID

    t = min(6, config.max_seq_len)
    b = 2
    ids = rng.integers(5, config.vocab_size, size=(b, t))
    ids[:, 0] = CLS_ID
    ids[0, -1] = SEP_ID
    ids[1, -3] = SEP_ID
    ids[1, -2:] = PAD_ID
    mask_positions = [(0, 2), (0, 3), (1, 1), (1, 2)]
    for r, c in mask_positions:
        ids[r, c] = MASK_ID
    cls_labels = np.full((b, t), IGNORE_LABEL)
    for r, c in mask_positions:
        cls_labels[r, c] = int(rng.integers(0, config.label_count))
    mlm_labels = np.full((b, t), IGNORE_LABEL)
    for r, c in [(0, 1), (1, 3), (0, t - 2)]:
        mlm_labels[r, c] = int(rng.integers(5, config.vocab_size))
    return ids, cls_labels, mlm_labels


def gradient_check(
    config: ModelConfig | None = None,
    *,
    seed: int = 0,
    tolerance: float = 1e-4,
    probes_per_tensor: int = 4,
    step: float = 1e-5,
    min_pass_fraction: float = 0.99,
    corrupt_backward: bool = False,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Probes a random entry subset of every tensor on a combined mlm+cls loss
    in double precision with dropout off. Raises GradientMismatch when the
    pass fraction falls below `min_pass_fraction`. `corrupt_backward`
    deliberately biases the analytic gradients of one tensor; the check must
    then fail, which is the negative control for the harness itself.
    """
    if config is None:
        config = ModelConfig(
            vocab_size=37, hidden_dim=16, layer_count=2, head_count=2,
            ffn_dim=32, max_seq_len=6, dropout_rate=0.0, precision="double",
        )
    if config.precision != "double":
        raise ValueError("gradient checking requires double precision")
    rng = np.random.default_rng(seed)
    params = init_parameters(config, seed=seed)
    ids, cls_labels, mlm_labels = _gradcheck_batch(config, rng)

    def total_loss(ps) -> float:
        return compute_loss(ps, config, ids, cls_labels, "cls") + compute_loss(
            ps, config, ids, mlm_labels, "mlm"
        )

    _, cls_grads = loss_and_grads(params, config, ids, cls_labels, "cls")
    _, mlm_grads = loss_and_grads(params, config, ids, mlm_labels, "mlm")
    analytic = {name: cls_grads[name] + mlm_grads[name] for name in params}
    if corrupt_backward:
        analytic["l0_ffn_w1"] = analytic["l0_ffn_w1"] + 1.0

    per_tensor: dict[str, tuple[int, int, float]] = {}
    probes = passed = 0
    worst_tensor, worst_err = "", 0.0
    for name in sorted(params):
        arr = params[name]
        n_probe = min(probes_per_tensor, arr.size)
        flat_idx = rng.choice(arr.size, size=n_probe, replace=False)
        t_passed, t_worst = 0, 0.0
        for idx in flat_idx:
            original = arr.flat[idx]
            arr.flat[idx] = original + step
            loss_plus = total_loss(params)
            arr.flat[idx] = original - step
            loss_minus = total_loss(params)
            arr.flat[idx] = original
            fd = (loss_plus - loss_minus) / (2.0 * step)
            a = float(analytic[name].flat[idx])
            rel = abs(a - fd) / max(1.0, abs(a))
            t_worst = max(t_worst, rel)
            if rel < tolerance:
                t_passed += 1
        probes += n_probe
        passed += t_passed
        per_tensor[name] = (n_probe, t_passed, t_worst)
        if t_worst >= worst_err:
            worst_tensor, worst_err = name, t_worst
    report = GradCheckReport(
        tolerance=tolerance, step=step, probes=probes, passed=passed,
        worst_tensor=worst_tensor, worst_rel_err=worst_err,
        per_tensor=per_tensor,
    )
    if report.pass_fraction < min_pass_fraction:
        raise GradientMismatch(
            f"only {passed}/{probes} probes within {tolerance} "
            f"(worst {worst_err:.3e} in {worst_tensor})"
        )
    return report

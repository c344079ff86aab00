"""Network building blocks: linear layers, layer norm, masked MLPs, Adam.

Every structure exists twice: a graph form (Tensor in, Tensor out, used
where gradients are needed) and an ``*_np`` fast path (plain numpy, used for
rollouts and target networks).  Both paths run the identical arithmetic, so
a forward pass agrees bit-for-bit between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autograd import Param, Tensor, concat, constant

LAYER_NORM_EPS = 1e-8
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


# -- initialization -----------------------------------------------------------


def init_linear(rng: np.random.Generator, fan_in: int, fan_out: int, name: str, dtype=np.float64):
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weight and bias pair."""
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype)
    b = rng.uniform(-bound, bound, size=(fan_out,)).astype(dtype)
    return Param(f"{name}.w", w), Param(f"{name}.b", b)


def init_layer_norm(fan_out: int, name: str, dtype=np.float64):
    gain = Param(f"{name}.g", np.ones(fan_out, dtype=dtype))
    bias = Param(f"{name}.b", np.zeros(fan_out, dtype=dtype))
    return gain, bias


# -- graph ops ----------------------------------------------------------------


def linear(x: Tensor, w: Param, b: Param) -> Tensor:
    return x @ w + b


def layer_norm(z: Tensor, gain: Param, bias: Param) -> Tensor:
    """Normalize each row to mean 0 / unit variance, then apply gain and bias."""
    mu = z.mean(axis=-1, keepdims=True)
    centered = z - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    normed = centered * ((var + LAYER_NORM_EPS) ** -0.5)
    return normed * gain + bias


def layer_norm_np(z: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mu = z.mean(axis=-1, keepdims=True)
    centered = z - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    normed = centered * ((var + LAYER_NORM_EPS) ** -0.5)
    return normed * gain + bias


def softmax(logits: Tensor, axis: int = -1) -> Tensor:
    shifted = logits - logits.data.max(axis=axis, keepdims=True)
    e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)


def softmax_np(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def tile_mask(mask: Tensor | np.ndarray, copies: int):
    """Repeat a width-K mask `copies` times so entry m carries mask[m % K]."""
    if isinstance(mask, Tensor):
        return concat([mask] * copies, axis=-1 if mask.data.ndim == 1 else 1)
    return np.tile(mask, copies if mask.ndim == 1 else (1, copies))


def mse(a, b) -> float:
    """Mean squared componentwise difference (plain numbers in, float out)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def mse_graph(a: Tensor, b: Tensor) -> Tensor:
    d = a - b
    return (d * d).mean()


def kl_categorical(p, q) -> float:
    """KL(p || q) in nats for two categorical distributions.

    Zero-probability entries of p contribute nothing; q must be strictly
    positive wherever p is not zero.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-6 or abs(q.sum() - 1.0) > 1e-6:
        raise ValueError("inputs must each sum to 1 within 1e-6")
    support = p > 0
    if np.any(q[support] == 0):
        raise ValueError("q has zero mass on the support of p")
    val = float(np.sum(p[support] * np.log(p[support] / q[support])))
    return 0.0 if val < 0 else val


def kl_rows(p: Tensor, q: Tensor) -> Tensor:
    """Row-wise KL(p || q) averaged over the batch; inputs must be positive.

    Graph form used inside objectives, where both arguments come out of a
    softmax and are therefore strictly positive.
    """
    return (p * (p.log() - q.log())).sum(axis=-1).mean()


def gumbel_softmax_sample(logits, rng: np.random.Generator, temperature: float = 1.0):
    """Draw one Gumbel-softmax sample per row.

    Returns ``(hard, soft)``: `hard` is a plain one-hot array at the argmax of
    the perturbed logits; `soft` is the tempered softmax of the same
    perturbation and carries the gradient when `logits` is a Tensor.  The
    straight-through estimator is ``soft + constant(hard - soft.data)``.
    """
    raw = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    u = rng.random(size=raw.shape)
    gumbel = -np.log(-np.log(u + 1e-20) + 1e-20).astype(raw.dtype)
    if isinstance(logits, Tensor):
        perturbed = (logits + constant(gumbel)) * (1.0 / temperature)
        soft = softmax(perturbed)
        pert_data = perturbed.data
    else:
        pert_data = (raw + gumbel) * (1.0 / temperature)
        soft = softmax_np(pert_data)
    hard = np.zeros_like(raw)
    idx = np.argmax(pert_data, axis=-1)
    if raw.ndim == 1:
        hard[idx] = 1.0
    else:
        hard[np.arange(raw.shape[0]), idx] = 1.0
    return hard, soft


def straight_through(hard: np.ndarray, soft: Tensor) -> Tensor:
    """Forward the hard one-hot, backprop through the soft sample."""
    return soft + constant(hard - soft.data)


# -- optimizer and target bookkeeping ----------------------------------------


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def like(cls, param: Param) -> "AdamState":
        return cls(np.zeros_like(param.data), np.zeros_like(param.data))


def adam_step(param: Param, state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update in place; a missing gradient is zero."""
    g = param.grad if param.grad is not None else np.zeros_like(param.data)
    state.t += 1
    state.m = ADAM_BETA1 * state.m + (1.0 - ADAM_BETA1) * g
    state.v = ADAM_BETA2 * state.v + (1.0 - ADAM_BETA2) * (g * g)
    m_hat = state.m / (1.0 - ADAM_BETA1 ** state.t)
    v_hat = state.v / (1.0 - ADAM_BETA2 ** state.t)
    param.data -= (lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)).astype(param.data.dtype)


def clip_gradient_norm(params: list[Param], threshold: float) -> float:
    """Scale all gradients so their global L2 norm is at most `threshold`.

    Returns the pre-clip norm.
    """
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
    norm = float(np.sqrt(total))
    if norm > threshold:
        scale = threshold / norm
        for p in params:
            if p.grad is not None:
                p.grad = p.grad * scale
    return norm


def soft_update(target_params: list[Param], source_params: list[Param], tau: float) -> None:
    """Polyak averaging: target <- tau * source + (1 - tau) * target."""
    if len(target_params) != len(source_params):
        raise ValueError("parameter lists must pair up")
    for tp, sp in zip(target_params, source_params):
        tp.data = (tau * sp.data + (1.0 - tau) * tp.data).astype(tp.data.dtype)


# -- a plain MLP --------------------------------------------------------------


@dataclass(frozen=True)
class MlpSpec:
    """Two hidden ReLU layers with layer norm on pre-activations by default.

    `activation` names the output head: linear, tanh or softmax.  A nonzero
    `mask_slots` K marks the first hidden layer maskable; its width must be a
    multiple of K and a width-K mask is tiled across it at forward time.
    """

    in_dim: int
    out_dim: int
    hidden: tuple[int, ...] = (128, 128)
    activation: str = "linear"
    layer_norm: bool = True
    mask_slots: int = 0

    def __post_init__(self):
        if self.activation not in ("linear", "tanh", "softmax"):
            raise ValueError(f"unknown output activation {self.activation!r}")
        if self.mask_slots:
            if self.hidden[0] % self.mask_slots != 0:
                raise ValueError(
                    f"first hidden width {self.hidden[0]} not divisible by mask slots {self.mask_slots}"
                )

    @property
    def mask_copies(self) -> int:
        return self.hidden[0] // self.mask_slots if self.mask_slots else 0


class Mlp:
    """Parameter container and forward passes for an MlpSpec."""

    def __init__(self, spec: MlpSpec, rng: np.random.Generator, name: str, dtype=np.float64):
        self.spec = spec
        self.name = name
        self.layers = []
        dims = [spec.in_dim, *spec.hidden, spec.out_dim]
        for k in range(len(dims) - 1):
            is_hidden = k < len(spec.hidden)
            w, b = init_linear(rng, dims[k], dims[k + 1], f"{name}.fc{k + 1}", dtype)
            if is_hidden and spec.layer_norm:
                g, beta = init_layer_norm(dims[k + 1], f"{name}.ln{k + 1}", dtype)
            else:
                g = beta = None
            self.layers.append((w, b, g, beta))

    def params(self) -> list[Param]:
        out = []
        for w, b, g, beta in self.layers:
            out.extend([w, b])
            if g is not None:
                out.extend([g, beta])
        return out

    def clone(self, name: str | None = None) -> "Mlp":
        twin = object.__new__(Mlp)
        twin.spec = self.spec
        twin.name = name or f"{self.name}.target"
        twin.layers = []
        for w, b, g, beta in self.layers:
            w2 = Param(w.name.replace(self.name, twin.name, 1), w.data.copy())
            b2 = Param(b.name.replace(self.name, twin.name, 1), b.data.copy())
            if g is not None:
                g2 = Param(g.name.replace(self.name, twin.name, 1), g.data.copy())
                beta2 = Param(beta.name.replace(self.name, twin.name, 1), beta.data.copy())
            else:
                g2 = beta2 = None
            twin.layers.append((w2, b2, g2, beta2))
        return twin

    def _check_mask(self, mask):
        if self.spec.mask_slots and mask is None:
            raise ValueError("maskable network requires a mask")
        if mask is not None and not self.spec.mask_slots:
            raise ValueError("mask passed to an unmaskable network")
        if isinstance(mask, (int, np.integer)):
            onehot = np.zeros(self.spec.mask_slots)
            onehot[int(mask)] = 1.0
            return onehot
        return mask

    def forward(self, x: Tensor, mask: Tensor | np.ndarray | int | None = None) -> Tensor:
        spec = self.spec
        mask = self._check_mask(mask)
        h = x
        n_hidden = len(spec.hidden)
        for k, (w, b, g, beta) in enumerate(self.layers):
            z = linear(h, w, b)
            if k < n_hidden:
                if g is not None:
                    z = layer_norm(z, g, beta)
                if k == 0 and mask is not None:
                    tiled = tile_mask(mask, spec.mask_copies)
                    z = z * (tiled if isinstance(tiled, Tensor) else constant(tiled))
                h = z.relu()
            else:
                h = z
        if spec.activation == "tanh":
            return h.tanh()
        if spec.activation == "softmax":
            return softmax(h)
        return h

    def forward_np(self, x: np.ndarray, mask: np.ndarray | int | None = None) -> np.ndarray:
        spec = self.spec
        mask = self._check_mask(mask)
        h = np.asarray(x)
        n_hidden = len(spec.hidden)
        for k, (w, b, g, beta) in enumerate(self.layers):
            z = h @ w.data + b.data
            if k < n_hidden:
                if g is not None:
                    z = layer_norm_np(z, g.data, beta.data)
                if k == 0 and mask is not None:
                    z = z * tile_mask(np.asarray(mask, dtype=z.dtype), spec.mask_copies)
                h = np.where(z > 0, z, 0.0).astype(z.dtype)
            else:
                h = z
        if spec.activation == "tanh":
            return np.tanh(h)
        if spec.activation == "softmax":
            return softmax_np(h)
        return h

"""
Dense-tensor neural-network kernel.

Exact forward/backward passes for convolution, batch normalisation, dropout,
flatten and dense layers, plus ReLU/sigmoid/softmax, the binary and
categorical cross-entropy losses and the Adam optimizer.

Activations are batched NHWC float64 arrays. Conv weights are laid out
(kh, kw, c_in, c_out) and dense weights (n_in, n_out). Forward functions return
their cache explicitly, so one set of weights can serve several passes
(the Siamese twins) before any backward call.
"""
from dataclasses import asdict, dataclass, field
from math import prod
from typing import Any, Literal, Optional, Union

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from radarhead.errors import InvalidArgumentError

Tensor = npt.NDArray[np.float64]
Mode = Literal["train", "infer"]
LayerKind = Literal["conv", "batchnorm", "dropout", "flatten", "dense"]
RngLike = Union[None, int, np.random.Generator]

BN_EPS = 1e-5
BN_MOMENTUM = 0.9
BCE_EPS = 1e-12

_SIGMOID_LO = float(np.finfo(np.float64).tiny)
_SIGMOID_HI = float(np.nextafter(1.0, 0.0))
_KINDS = ("conv", "batchnorm", "dropout", "flatten", "dense")


def as_tensor(x: npt.ArrayLike) -> Tensor:
    """Coerce to a float64 array, rejecting NaN/inf."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("tensor contains non-finite values")
    return arr


def _check_mode(mode: str) -> None:
    if mode not in ("train", "infer"):
        raise InvalidArgumentError(f"mode must be 'train' or 'infer', got {mode!r}")


def _scalar_or_array(arr: Tensor) -> Union[float, Tensor]:
    return float(arr) if arr.ndim == 0 else arr


# ============================================================================
# Layer description
# ============================================================================


@dataclass(frozen=True)
class LayerSpec:
    """
    One row of the backbone table. ``channels`` is the filter count of a conv
    and the unit count of a dense layer; ``activation`` appends a ReLU.
    """

    kind: LayerKind
    kernel_size: int = 0
    stride: int = 1
    channels: int = 0
    rate: float = 0.0
    padding: str = "same"
    activation: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidArgumentError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv":
            if self.kernel_size < 1 or self.channels < 1 or self.stride < 1:
                raise InvalidArgumentError("conv layers need kernel_size, stride and channels >= 1")
            if self.padding != "same":
                raise InvalidArgumentError("only 'same' padding is supported")
        if self.kind == "dense" and self.channels < 1:
            raise InvalidArgumentError("dense layers need at least one unit")
        if not 0.0 <= self.rate < 1.0:
            raise InvalidArgumentError(f"dropout rate must be in [0, 1), got {self.rate}")
        if self.activation and self.kind in ("dropout", "flatten"):
            raise InvalidArgumentError(f"{self.kind} layers carry no activation")

    @classmethod
    def conv(cls, kernel_size: int, stride: int, channels: int, activation: bool = True) -> "LayerSpec":
        return cls("conv", kernel_size=kernel_size, stride=stride, channels=channels, activation=activation)

    @classmethod
    def batchnorm(cls, activation: bool = False) -> "LayerSpec":
        return cls("batchnorm", activation=activation)

    @classmethod
    def dropout(cls, rate: float) -> "LayerSpec":
        return cls("dropout", rate=rate)

    @classmethod
    def flatten(cls) -> "LayerSpec":
        return cls("flatten")

    @classmethod
    def dense(cls, units: int, activation: bool = False) -> "LayerSpec":
        return cls("dense", channels=units, activation=activation)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LayerSpec":
        return cls(**data)


def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int, int]:
    """(output size, low pad, high pad); odd totals put the extra zero on the high side."""
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    low = total // 2
    return out, low, total - low


def layer_output_shape(spec: LayerSpec, input_shape: tuple[int, ...]) -> tuple[int, ...]:
    """Per-sample output shape of a layer."""
    if spec.kind == "conv":
        if len(input_shape) != 3:
            raise InvalidArgumentError(f"conv expects H x W x C input, got {input_shape}")
        h, w, _ = input_shape
        return (
            same_padding(h, spec.kernel_size, spec.stride)[0],
            same_padding(w, spec.kernel_size, spec.stride)[0],
            spec.channels,
        )
    if spec.kind in ("batchnorm", "dropout"):
        return tuple(input_shape)
    if spec.kind == "flatten":
        return (prod(input_shape),)
    if len(input_shape) != 1:
        raise InvalidArgumentError(f"dense expects a flat input, got {input_shape}")
    return (spec.channels,)


def layer_param_shapes(spec: LayerSpec, input_shape: tuple[int, ...]) -> dict[str, tuple[int, ...]]:
    """Trainable parameter shapes of a layer."""
    if spec.kind == "conv":
        c_in = input_shape[-1]
        k = spec.kernel_size
        return {"weights": (k, k, c_in, spec.channels), "bias": (spec.channels,)}
    if spec.kind == "batchnorm":
        return {"gamma": (input_shape[-1],), "beta": (input_shape[-1],)}
    if spec.kind == "dense":
        layer_output_shape(spec, input_shape)
        return {"weights": (input_shape[0], spec.channels), "bias": (spec.channels,)}
    return {}


# ============================================================================
# Element-wise activations
# ============================================================================


def relu(x: npt.ArrayLike) -> Tensor:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_backward(grad_out: Tensor, x: Tensor) -> Tensor:
    return grad_out * (x > 0)


def sigmoid(x: npt.ArrayLike) -> Union[float, Tensor]:
    """Logistic function kept inside the open interval (0, 1) for any finite x."""
    arr = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(arr))
    out = np.where(arr >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return _scalar_or_array(np.clip(out, _SIGMOID_LO, _SIGMOID_HI))


def sigmoid_backward(grad_out: Tensor, out: Tensor) -> Tensor:
    return grad_out * out * (1.0 - out)


def softmax(logits: npt.ArrayLike, axis: int = -1) -> Tensor:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


# ============================================================================
# Convolution
# ============================================================================


@dataclass
class ConvCache:
    cols: Tensor
    padded_shape: tuple[int, ...]
    offset: tuple[int, int]
    input_hw: tuple[int, int]
    output_shape: tuple[int, ...]
    weights: Tensor
    stride: int
    batched: bool


def conv2d_forward(
    x: npt.ArrayLike,
    weights: npt.ArrayLike,
    bias: npt.ArrayLike,
    stride: int = 1,
) -> tuple[Tensor, ConvCache]:
    """Cross-correlation with zero 'same' padding; output extent ceil(in / stride)."""
    x = np.asarray(x, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)

    batched = x.ndim == 4
    if not batched:
        if x.ndim != 3:
            raise InvalidArgumentError(f"conv input must be H x W x C or N x H x W x C, got {x.shape}")
        x = x[np.newaxis]
    if weights.ndim != 4:
        raise InvalidArgumentError(f"conv weights must be kh x kw x c_in x c_out, got {weights.shape}")
    if stride < 1:
        raise InvalidArgumentError(f"stride must be >= 1, got {stride}")

    n, h, w, c_in = x.shape
    kh, kw, w_in, c_out = weights.shape
    if w_in != c_in:
        raise InvalidArgumentError(f"input has {c_in} channels, weights expect {w_in}")
    if bias.shape != (c_out,):
        raise InvalidArgumentError(f"bias shape {bias.shape} does not match {c_out} filters")

    out_h, top, bottom = same_padding(h, kh, stride)
    out_w, left, right = same_padding(w, kw, stride)
    xp = np.pad(x, ((0, 0), (top, bottom), (left, right), (0, 0)))

    # (n, H', W', c_in, kh, kw) -> strided output positions
    windows = sliding_window_view(xp, (kh, kw), axis=(1, 2))
    windows = windows[:, ::stride, ::stride][:, :out_h, :out_w]
    cols = windows.transpose(0, 1, 2, 4, 5, 3).reshape(n * out_h * out_w, kh * kw * c_in)

    out = cols @ weights.reshape(kh * kw * c_in, c_out) + bias
    out = out.reshape(n, out_h, out_w, c_out)

    cache = ConvCache(
        cols=cols,
        padded_shape=xp.shape,
        offset=(top, left),
        input_hw=(h, w),
        output_shape=out.shape,
        weights=weights,
        stride=stride,
        batched=batched,
    )
    return (out if batched else out[0]), cache


def conv2d_backward(grad_out: npt.ArrayLike, cache: ConvCache) -> tuple[Tensor, Tensor, Tensor]:
    """Gradients w.r.t. input, weights and bias of conv2d_forward."""
    g = np.asarray(grad_out, dtype=np.float64)
    if not cache.batched:
        g = g[np.newaxis]
    if g.shape != cache.output_shape:
        raise InvalidArgumentError(f"grad shape {g.shape} does not match output {cache.output_shape}")

    n, out_h, out_w, c_out = g.shape
    kh, kw, c_in, _ = cache.weights.shape
    s = cache.stride

    g2 = g.reshape(-1, c_out)
    grad_w = (cache.cols.T @ g2).reshape(cache.weights.shape)
    grad_b = g2.sum(axis=0)

    dcols = (g2 @ cache.weights.reshape(kh * kw * c_in, c_out).T).reshape(n, out_h, out_w, kh, kw, c_in)
    dxp = np.zeros(cache.padded_shape, dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i : i + s * out_h : s, j : j + s * out_w : s, :] += dcols[:, :, :, i, j, :]

    top, left = cache.offset
    h, w = cache.input_hw
    grad_x = dxp[:, top : top + h, left : left + w, :]
    return (grad_x if cache.batched else grad_x[0]), grad_w, grad_b


# ============================================================================
# Batch normalisation
# ============================================================================


@dataclass
class BatchNormCache:
    x_hat: Tensor
    inv_std: Tensor
    gamma: Tensor
    mode: str
    count: int


def batchnorm_forward(
    x: npt.ArrayLike,
    gamma: npt.ArrayLike,
    beta: npt.ArrayLike,
    mode: Mode,
    running_mean: npt.ArrayLike,
    running_var: npt.ArrayLike,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> tuple[Tensor, BatchNormCache, tuple[Tensor, Tensor]]:
    """
    Per-channel (last axis) standardisation then affine transform.
    Returns (output, cache, (running_mean, running_var)); running statistics
    only move in train mode.
    """
    _check_mode(mode)
    x = np.asarray(x, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    running_mean = np.asarray(running_mean, dtype=np.float64)
    running_var = np.asarray(running_var, dtype=np.float64)

    channels = x.shape[-1]
    for name, arr in (("gamma", gamma), ("beta", beta), ("running_mean", running_mean), ("running_var", running_var)):
        if arr.shape != (channels,):
            raise InvalidArgumentError(f"{name} shape {arr.shape} does not match {channels} channels")

    axes = tuple(range(x.ndim - 1))
    count = prod(x.shape[:-1])

    if mode == "train":
        if x.shape[0] < 2:
            raise InvalidArgumentError("batch normalisation in train mode needs a batch of at least 2")
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        running_mean = momentum * running_mean + (1.0 - momentum) * mean
        running_var = momentum * running_var + (1.0 - momentum) * var
    else:
        mean, var = running_mean, running_var

    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean) * inv_std
    out = gamma * x_hat + beta

    cache = BatchNormCache(x_hat=x_hat, inv_std=inv_std, gamma=gamma, mode=mode, count=count)
    return out, cache, (running_mean, running_var)


def batchnorm_backward(grad_out: npt.ArrayLike, cache: BatchNormCache) -> tuple[Tensor, Tensor, Tensor]:
    """Gradients w.r.t. input, gamma and beta."""
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != cache.x_hat.shape:
        raise InvalidArgumentError(f"grad shape {g.shape} does not match {cache.x_hat.shape}")

    axes = tuple(range(g.ndim - 1))
    grad_gamma = (g * cache.x_hat).sum(axis=axes)
    grad_beta = g.sum(axis=axes)
    dx_hat = g * cache.gamma

    if cache.mode == "infer":
        return dx_hat * cache.inv_std, grad_gamma, grad_beta

    m = cache.count
    grad_x = (cache.inv_std / m) * (
        m * dx_hat - dx_hat.sum(axis=axes) - cache.x_hat * (dx_hat * cache.x_hat).sum(axis=axes)
    )
    return grad_x, grad_gamma, grad_beta


# ============================================================================
# Dropout, dense
# ============================================================================


def dropout_forward(
    x: npt.ArrayLike,
    rate: float = 0.5,
    mode: Mode = "train",
    rng: RngLike = None,
) -> tuple[Tensor, Optional[Tensor]]:
    """Inverted dropout; returns (output, scaled mask) and no mask when inactive."""
    _check_mode(mode)
    if not 0.0 <= rate < 1.0:
        raise InvalidArgumentError(f"dropout rate must be in [0, 1), got {rate}")
    x = np.asarray(x, dtype=np.float64)
    if mode == "infer" or rate == 0.0:
        return x, None

    gen = np.random.default_rng(0 if rng is None else rng)
    mask = (gen.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(grad_out: Tensor, mask: Optional[Tensor]) -> Tensor:
    return grad_out if mask is None else grad_out * mask


def dense_forward(x: npt.ArrayLike, weights: npt.ArrayLike, bias: npt.ArrayLike) -> Tensor:
    """Affine map x W + b for a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if weights.ndim != 2 or x.shape[-1] != weights.shape[0] or bias.shape != (weights.shape[1],):
        raise InvalidArgumentError(
            f"dense shapes disagree: input {x.shape}, weights {weights.shape}, bias {bias.shape}"
        )
    return x @ weights + bias


def dense_backward(grad_out: npt.ArrayLike, x: Tensor, weights: Tensor) -> tuple[Tensor, Tensor, Tensor]:
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape[:-1] != x.shape[:-1] or g.shape[-1] != weights.shape[1]:
        raise InvalidArgumentError(f"grad shape {g.shape} does not match dense output")
    g2 = g.reshape(-1, weights.shape[1])
    x2 = x.reshape(-1, weights.shape[0])
    return g @ weights.T, x2.T @ g2, g2.sum(axis=0)


# ============================================================================
# Losses
# ============================================================================


def bce_loss(
    p: npt.ArrayLike,
    b: npt.ArrayLike,
    eps: float = BCE_EPS,
) -> tuple[Union[float, Tensor], Union[float, Tensor]]:
    """
    Element-wise -[b log P + (1 - b) log(1 - P)] and its derivative dLoss/dP.
    P is clamped to [eps, 1 - eps].
    """
    p = np.asarray(p, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not np.all((b == 0.0) | (b == 1.0)):
        raise InvalidArgumentError("targets must be 0 or 1")

    pc = np.clip(p, eps, 1.0 - eps)
    loss = -(b * np.log(pc) + (1.0 - b) * np.log1p(-pc))
    grad = -b / pc + (1.0 - b) / (1.0 - pc)
    return _scalar_or_array(loss), _scalar_or_array(grad)


def softmax_cross_entropy(logits: npt.ArrayLike, labels: npt.ArrayLike) -> tuple[float, Tensor]:
    """Mean categorical cross-entropy over a batch and its gradient w.r.t. the logits."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2 or y.shape != (z.shape[0],):
        raise InvalidArgumentError(f"logits {z.shape} and labels {y.shape} disagree")
    if np.any((y < 0) | (y >= z.shape[1])):
        raise InvalidArgumentError("label outside the logit range")

    n = z.shape[0]
    shifted = z - z.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -float(log_probs[np.arange(n), y].mean())

    grad = np.exp(log_probs)
    grad[np.arange(n), y] -= 1.0
    return loss, grad / n


# ============================================================================
# Adam
# ============================================================================


@dataclass
class AdamState:
    learning_rate: float = 0.006
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, Tensor] = field(default_factory=dict)
    v: dict[str, Tensor] = field(default_factory=dict)


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, Tensor],
    state: AdamState,
) -> tuple[dict[str, Tensor], AdamState]:
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if set(grads) != set(params):
        missing = sorted(set(params) ^ set(grads))
        raise InvalidArgumentError(f"parameter/gradient names disagree: {missing}")
    for name, p in params.items():
        if grads[name].shape != p.shape:
            raise InvalidArgumentError(f"gradient for {name} has shape {grads[name].shape}, expected {p.shape}")
        if name in state.m and state.m[name].shape != p.shape:
            raise InvalidArgumentError(f"optimizer state for {name} has the wrong shape")

    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t

    for name, p in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))

        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        p -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)

    return params, state


# ============================================================================
# Layers and the sequential network
# ============================================================================


def _he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> Tensor:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """A LayerSpec bound to concrete input shape and parameter storage."""

    def __init__(self, spec: LayerSpec, input_shape: tuple[int, ...], rng: np.random.Generator, name: str):
        self.spec = spec
        self.name = name
        self.input_shape = tuple(input_shape)
        self.output_shape = layer_output_shape(spec, self.input_shape)
        self.params: dict[str, Tensor] = {}
        self.buffers: dict[str, Tensor] = {}

        shapes = layer_param_shapes(spec, self.input_shape)
        if spec.kind in ("conv", "dense"):
            weight_shape = shapes["weights"]
            fan_in = prod(weight_shape[:-1])
            self.params["weights"] = _he_uniform(rng, weight_shape, fan_in)
            self.params["bias"] = np.zeros(shapes["bias"])
        elif spec.kind == "batchnorm":
            channels = shapes["gamma"]
            self.params["gamma"] = np.ones(channels)
            self.params["beta"] = np.zeros(channels)
            self.buffers["running_mean"] = np.zeros(channels)
            self.buffers["running_var"] = np.ones(channels)

    def forward(self, x: Tensor, mode: Mode, rng: np.random.Generator) -> tuple[Tensor, Any]:
        spec = self.spec
        if spec.kind == "conv":
            out, inner = conv2d_forward(x, self.params["weights"], self.params["bias"], spec.stride)
        elif spec.kind == "batchnorm":
            out, inner, (mean, var) = batchnorm_forward(
                x,
                self.params["gamma"],
                self.params["beta"],
                mode,
                self.buffers["running_mean"],
                self.buffers["running_var"],
            )
            if mode == "train":
                self.buffers["running_mean"][...] = mean
                self.buffers["running_var"][...] = var
        elif spec.kind == "dropout":
            out, inner = dropout_forward(x, spec.rate, mode, rng)
        elif spec.kind == "flatten":
            out, inner = x.reshape(x.shape[0], -1), x.shape
        else:
            out, inner = dense_forward(x, self.params["weights"], self.params["bias"]), x

        if spec.activation:
            return relu(out), (inner, out)
        return out, (inner, None)

    def backward(self, grad: Tensor, cache: Any) -> tuple[Tensor, dict[str, Tensor]]:
        inner, pre_activation = cache
        if pre_activation is not None:
            grad = relu_backward(grad, pre_activation)

        kind = self.spec.kind
        if kind == "conv":
            grad_x, grad_w, grad_b = conv2d_backward(grad, inner)
            return grad_x, {"weights": grad_w, "bias": grad_b}
        if kind == "batchnorm":
            grad_x, grad_gamma, grad_beta = batchnorm_backward(grad, inner)
            return grad_x, {"gamma": grad_gamma, "beta": grad_beta}
        if kind == "dropout":
            return dropout_backward(grad, inner), {}
        if kind == "flatten":
            return grad.reshape(inner), {}
        grad_x, grad_w, grad_b = dense_backward(grad, inner, self.params["weights"])
        return grad_x, {"weights": grad_w, "bias": grad_b}


class Network:
    """Sequential stack of layers sharing one parameter store."""

    def __init__(self, specs: list[LayerSpec], input_shape: tuple[int, ...], seed: RngLike = 0):
        rng = np.random.default_rng(seed)
        self.specs = list(specs)
        self.input_shape = tuple(input_shape)
        self.layers: list[Layer] = []

        shape = self.input_shape
        for index, spec in enumerate(self.specs):
            layer = Layer(spec, shape, rng, name=f"{index:02d}_{spec.kind}")
            self.layers.append(layer)
            shape = layer.output_shape
        self.output_shape = shape

    def forward(self, x: npt.ArrayLike, mode: Mode = "infer", rng: RngLike = None) -> tuple[Tensor, list[Any]]:
        """Run a batch (N x input_shape); returns the output and per-layer caches."""
        _check_mode(mode)
        x = as_tensor(x)
        if x.shape[1:] != self.input_shape:
            raise InvalidArgumentError(f"expected batches of {self.input_shape}, got {x.shape}")

        gen = np.random.default_rng(0 if rng is None else rng)
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, mode, gen)
            caches.append(cache)
        return x, caches

    def backward(self, grad: npt.ArrayLike, caches: list[Any]) -> tuple[Tensor, dict[str, Tensor]]:
        """Back-propagate ``grad``; returns the input gradient and parameter gradients."""
        grad = np.asarray(grad, dtype=np.float64)
        grads: dict[str, Tensor] = {}
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad, layer_grads = layer.backward(grad, cache)
            for key, value in layer_grads.items():
                grads[f"{layer.name}.{key}"] = value
        ordered = {name: grads[name] for name in self.parameters()}
        return grad, ordered

    def parameters(self) -> dict[str, Tensor]:
        """Trainable arrays by name, in layer order; updates through them are live."""
        return {
            f"{layer.name}.{key}": value
            for layer in self.layers
            for key, value in layer.params.items()
        }

    def buffers(self) -> dict[str, Tensor]:
        return {
            f"{layer.name}.{key}": value
            for layer in self.layers
            for key, value in layer.buffers.items()
        }

    def shape_trace(self) -> list[tuple[str, tuple[int, ...]]]:
        return [(layer.name, layer.output_shape) for layer in self.layers]

    def param_count(self) -> int:
        return sum(int(p.size) for p in self.parameters().values())

    def state_dict(self) -> dict[str, Tensor]:
        """Copies of every parameter and buffer."""
        state = {name: value.copy() for name, value in self.parameters().items()}
        state.update({name: value.copy() for name, value in self.buffers().items()})
        return state

    def load_state_dict(self, state: dict[str, Tensor]) -> None:
        live = {**self.parameters(), **self.buffers()}
        if set(state) != set(live):
            raise InvalidArgumentError("state names do not match the network")
        for name, target in live.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != target.shape:
                raise InvalidArgumentError(f"{name}: shape {value.shape}, expected {target.shape}")
            target[...] = value

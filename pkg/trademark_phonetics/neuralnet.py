"""
Small convolutional network for pair similarity, written directly in numpy.

conv(5x5, same) -> ReLU -> maxpool 2x2 -> conv(5x5, same) -> ReLU -> maxpool 2x2
-> fc -> ReLU -> dropout -> fc -> softmax, trained with softmax cross-entropy and Adam.
Convolutions are computed as kernel-offset shifted matrix products, so the
summation order is fixed and runs are reproducible for a given seed.
"""
import time
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from trademark_phonetics.dataset import stratified_split
from trademark_phonetics.errors import InsufficientData, ShapeMismatch
from trademark_phonetics.pairing import PairSample, PairTensor

logger = logging.getLogger(__name__)

PARAM_NAMES = (
    "conv1_w", "conv1_b", "conv2_w", "conv2_b",
    "fc1_w", "fc1_b", "fc2_w", "fc2_b",
)
TRAIN_DTYPE = np.float32
MIN_TRAINING_SAMPLES = 10
POOL = 2

# Stream ids derived from the seed, one per source of randomness
_INIT_STREAM = 1
_SHUFFLE_STREAM = 2


@dataclass(frozen=True)
class CnnConfig:
    """Architecture and optimizer settings. Widths and optimizer constants are defaults, not givens."""
    input_channels: int = 2
    input_size: int = 128
    kernel_size: int = 5
    conv1_filters: int = 32
    conv2_filters: int = 64
    fc1_units: int = 1024
    num_classes: int = 2
    dropout_rate: float = 0.5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 64
    epochs: int = 10
    max_steps: Optional[int] = None
    rng_seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if not 0 <= self.dropout_rate < 1:
            raise ValueError(f"Dropout rate must lie in [0, 1), got {self.dropout_rate}")
        if self.kernel_size % 2 != 1:
            raise ValueError(f"'same' padding needs an odd kernel, got {self.kernel_size}")
        if self.input_size % (POOL * POOL) != 0:
            raise ValueError(f"Input size {self.input_size} must survive two {POOL}x{POOL} pools")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("Batch size and epochs must be positive")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError(f"max_steps must be positive, got {self.max_steps}")

    @property
    def padding(self) -> int:
        return self.kernel_size // 2

    @property
    def pooled_size(self) -> int:
        return self.input_size // (POOL * POOL)

    @property
    def flatten_size(self) -> int:
        return self.conv2_filters * self.pooled_size * self.pooled_size

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        k = self.kernel_size
        return {
            "conv1_w": (self.conv1_filters, self.input_channels, k, k),
            "conv1_b": (self.conv1_filters,),
            "conv2_w": (self.conv2_filters, self.conv1_filters, k, k),
            "conv2_b": (self.conv2_filters,),
            "fc1_w": (self.flatten_size, self.fc1_units),
            "fc1_b": (self.fc1_units,),
            "fc2_w": (self.fc1_units, self.num_classes),
            "fc2_b": (self.num_classes,),
        }

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CnnConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown CNN config fields: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass
class CnnParams:
    """Weights and biases in declaration order."""
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray

    def arrays(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in PARAM_NAMES:
            yield name, getattr(self, name)

    @classmethod
    def zeros_like(cls, other: "CnnParams") -> "CnnParams":
        return cls(**{name: np.zeros_like(array) for name, array in other.arrays()})

    def copy(self) -> "CnnParams":
        return CnnParams(**{name: array.copy() for name, array in self.arrays()})

    def astype(self, dtype) -> "CnnParams":
        return CnnParams(**{name: array.astype(dtype) for name, array in self.arrays()})

    def all_finite(self) -> bool:
        return all(np.isfinite(array).all() for _, array in self.arrays())


@dataclass
class AdamState:
    """First and second moments per parameter plus the step counter."""
    m: CnnParams
    v: CnnParams
    t: int = 0

    @classmethod
    def initial(cls, params: CnnParams) -> "AdamState":
        return cls(CnnParams.zeros_like(params), CnnParams.zeros_like(params), 0)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    validation_accuracy: float
    steps: int


@dataclass
class TrainReport:
    """Per-epoch metrics. Wall time is kept but left out of the JSON form by default."""
    seed: int
    n_train: int
    n_validation: int
    epochs: List[EpochStats] = field(default_factory=list)
    steps: int = 0
    wall_time: float = 0.0

    @property
    def final(self) -> Optional[EpochStats]:
        return self.epochs[-1] if self.epochs else None

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        report = {
            "seed": self.seed,
            "n_train": self.n_train,
            "n_validation": self.n_validation,
            "steps": self.steps,
            "epochs": [asdict(stats) for stats in self.epochs],
        }
        if include_timing:
            report["wall_time"] = self.wall_time
        return report


def init_params(
    config: CnnConfig,
    rng: Optional[np.random.Generator] = None,
    dtype=TRAIN_DTYPE
) -> CnnParams:
    """He-scaled normal weights, zero biases. Without `rng`, draws from the seed's init stream."""
    rng = rng if rng is not None else np.random.default_rng([config.rng_seed, _INIT_STREAM])
    arrays = {}
    for name, shape in config.param_shapes().items():
        if name.endswith("_b"):
            arrays[name] = np.zeros(shape, dtype=dtype)
            continue
        fan_in = int(np.prod(shape[1:])) if name.startswith("conv") else shape[0]
        arrays[name] = rng.standard_normal(shape, dtype=dtype) * dtype(np.sqrt(2.0 / fan_in))
    return CnnParams(**arrays)


# Layers

def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0, out=x)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Stride-1 'same' convolution.

    Args:
        x: (N, C, H, W) input
        w: (O, C, K, K) kernels, K odd
        b: (O,) biases

    Returns:
        (N, O, H, W) output
    """
    n, _, height, width = x.shape
    filters, _, k, _ = w.shape
    pad = k // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out = np.zeros((filters, n, height, width), dtype=x.dtype)
    for dy in range(k):
        for dx in range(k):
            patch = padded[:, :, dy:dy + height, dx:dx + width]
            out += np.tensordot(w[:, :, dy, dx], patch, axes=([1], [1]))
    out += b[:, None, None, None]
    return np.ascontiguousarray(out.transpose(1, 0, 2, 3))


def conv2d_backward(
    dout: np.ndarray,
    x: np.ndarray,
    w: np.ndarray,
    need_dx: bool = True
) -> Tuple[Optional[np.ndarray], np.ndarray, np.ndarray]:
    """Gradients of conv2d_forward with respect to input, kernels and biases."""
    _, _, height, width = x.shape
    k = w.shape[2]
    pad = k // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    dout_t = dout.transpose(1, 0, 2, 3)
    dw = np.zeros_like(w)
    db = dout.sum(axis=(0, 2, 3))
    dpadded = np.zeros_like(padded) if need_dx else None
    for dy in range(k):
        for dx in range(k):
            patch = padded[:, :, dy:dy + height, dx:dx + width]
            dw[:, :, dy, dx] = np.tensordot(dout_t, patch, axes=([1, 2, 3], [0, 2, 3]))
            if need_dx:
                contribution = np.tensordot(w[:, :, dy, dx], dout_t, axes=([0], [0]))
                dpadded[:, :, dy:dy + height, dx:dx + width] += contribution.transpose(1, 0, 2, 3)
    dx_out = dpadded[:, :, pad:pad + height, pad:pad + width] if need_dx else None
    return dx_out, dw, db


def maxpool_forward(x: np.ndarray, size: int = POOL) -> Tuple[np.ndarray, np.ndarray]:
    """Non-overlapping max pooling; returns the output and the in-window argmax."""
    n, c, height, width = x.shape
    windows = (
        x.reshape(n, c, height // size, size, width // size, size)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, height // size, width // size, size * size)
    )
    index = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, index[..., None], axis=-1)[..., 0]
    return out, index.astype(np.uint8)


def maxpool_backward(
    dout: np.ndarray,
    index: np.ndarray,
    x_shape: Tuple[int, ...],
    size: int = POOL
) -> np.ndarray:
    """Route each pooled gradient back to the position that won the max."""
    n, c, height, width = x_shape
    windows = np.zeros((n, c, height // size, width // size, size * size), dtype=dout.dtype)
    np.put_along_axis(windows, index[..., None].astype(np.intp), dout[..., None], axis=-1)
    return (
        windows.reshape(n, c, height // size, width // size, size, size)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, height, width)
    )


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def _check_batch(params: CnnParams, batch: np.ndarray):
    if batch.ndim != 4:
        raise ShapeMismatch(f"Expected an (N, C, H, W) batch, got shape {batch.shape}")
    n, channels, height, width = batch.shape
    if n == 0:
        raise ShapeMismatch("Empty batch")
    if channels != params.conv1_w.shape[1]:
        raise ShapeMismatch(f"Batch has {channels} channels, network expects {params.conv1_w.shape[1]}")
    if height != width or height % (POOL * POOL) != 0:
        raise ShapeMismatch(
            f"Batch images must be square and divisible by {POOL * POOL}, got {height}x{width}"
        )
    flatten = params.conv2_w.shape[0] * (height // (POOL * POOL)) * (width // (POOL * POOL))
    if flatten != params.fc1_w.shape[0]:
        raise ShapeMismatch(
            f"{height}x{width} input flattens to {flatten}, fc1 expects {params.fc1_w.shape[0]}"
        )


def forward(
    params: CnnParams,
    batch: np.ndarray,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
    dropout_rate: float = 0.5
) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    Class probabilities for a batch of pair tensors.

    Args:
        params: network weights
        batch: (N, 2, H, W) inputs in [0, 1]
        training: apply dropout after fc1
        rng: dropout mask source, required when training with dropout
        dropout_rate: probability of dropping an fc1 unit

    Returns:
        (N, 2) probabilities and the cache needed for backpropagation
    """
    batch = np.asarray(batch)
    _check_batch(params, batch)
    x = batch.astype(params.conv1_w.dtype, copy=False)

    a1 = relu(conv2d_forward(x, params.conv1_w, params.conv1_b))
    p1, index1 = maxpool_forward(a1)
    a2 = relu(conv2d_forward(p1, params.conv2_w, params.conv2_b))
    p2, index2 = maxpool_forward(a2)
    flat = p2.reshape(len(x), -1)
    hidden = relu(flat @ params.fc1_w + params.fc1_b)

    mask = None
    dropped = hidden
    if training and dropout_rate > 0:
        if rng is None:
            raise ValueError("Training-mode forward needs an rng for the dropout mask")
        keep = 1.0 - dropout_rate
        mask = ((rng.random(hidden.shape) < keep) / keep).astype(hidden.dtype)
        dropped = hidden * mask

    logits = dropped @ params.fc2_w + params.fc2_b
    probs = softmax(logits)
    cache = {
        "x": x, "a1": a1, "p1": p1, "index1": index1, "a2": a2, "index2": index2,
        "flat": flat, "hidden": hidden, "mask": mask, "dropped": dropped, "logits": logits,
    }
    return probs, cache


def _check_labels(labels: np.ndarray, n: int, classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ShapeMismatch(f"Expected {n} labels, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= classes:
        raise ValueError(f"Labels must lie in [0, {classes})")
    return labels


def compute_loss(
    params: CnnParams,
    batch: np.ndarray,
    labels: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    dropout_rate: float = 0.5,
    training: bool = True
) -> float:
    """Mean softmax cross-entropy without gradients."""
    _, cache = forward(params, batch, training, rng, dropout_rate)
    labels = _check_labels(labels, len(cache["x"]), params.fc2_w.shape[1])
    log_probs = log_softmax(cache["logits"])
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def loss_and_grads(
    params: CnnParams,
    batch: np.ndarray,
    labels: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    dropout_rate: float = 0.5
) -> Tuple[float, CnnParams]:
    """Training-mode loss and backpropagated gradients for every parameter."""
    probs, cache = forward(params, batch, True, rng, dropout_rate)
    n = len(cache["x"])
    labels = _check_labels(labels, n, params.fc2_w.shape[1])
    rows = np.arange(n)
    loss = float(-log_softmax(cache["logits"])[rows, labels].mean())

    dlogits = probs.copy()
    dlogits[rows, labels] -= 1
    dlogits /= n

    fc2_w = cache["dropped"].T @ dlogits
    fc2_b = dlogits.sum(axis=0)
    dhidden = dlogits @ params.fc2_w.T
    if cache["mask"] is not None:
        dhidden *= cache["mask"]
    dhidden *= cache["hidden"] > 0

    fc1_w = cache["flat"].T @ dhidden
    fc1_b = dhidden.sum(axis=0)
    dflat = dhidden @ params.fc1_w.T

    a2 = cache["a2"]
    pooled2_shape = (n, a2.shape[1], a2.shape[2] // POOL, a2.shape[3] // POOL)
    da2 = maxpool_backward(dflat.reshape(pooled2_shape), cache["index2"], a2.shape)
    da2 *= a2 > 0
    dp1, conv2_w, conv2_b = conv2d_backward(da2, cache["p1"], params.conv2_w)

    a1 = cache["a1"]
    da1 = maxpool_backward(dp1, cache["index1"], a1.shape)
    da1 *= a1 > 0
    _, conv1_w, conv1_b = conv2d_backward(da1, cache["x"], params.conv1_w, need_dx=False)

    grads = CnnParams(conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b)
    return loss, grads


def adam_step(
    params: CnnParams,
    grads: CnnParams,
    state: AdamState,
    config: CnnConfig
) -> Tuple[CnnParams, AdamState]:
    """
    One bias-corrected Adam update.

    Parameters and moments are updated in place and returned.
    """
    state.t += 1
    correction1 = 1.0 - config.beta1 ** state.t
    correction2 = 1.0 - config.beta2 ** state.t
    for name, param in params.arrays():
        grad = getattr(grads, name)
        if grad.shape != param.shape:
            raise ShapeMismatch(f"Gradient for {name} has shape {grad.shape}, expected {param.shape}")
        m = getattr(state.m, name)
        v = getattr(state.v, name)
        m *= config.beta1
        m += (1.0 - config.beta1) * grad
        v *= config.beta2
        v += (1.0 - config.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return params, state


def predict_batch(params: CnnParams, inputs: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Inference-mode probabilities, evaluated in batches."""
    inputs = np.asarray(inputs)
    chunks = [
        forward(params, inputs[start:start + batch_size], training=False)[0]
        for start in range(0, len(inputs), batch_size)
    ]
    return np.concatenate(chunks) if chunks else np.zeros((0, params.fc2_w.shape[1]))


def predict(params: CnnParams, pair: PairTensor) -> Tuple[int, float]:
    """Most probable label and its probability; dropout is never applied."""
    probs = forward(params, pair.channels[np.newaxis], training=False)[0][0]
    label = int(np.argmax(probs))
    return label, float(probs[label])


def _accuracy(params: CnnParams, inputs: np.ndarray, labels: np.ndarray, batch_size: int = 64) -> float:
    if len(labels) == 0:
        return 0.0
    predicted = predict_batch(params, inputs, batch_size).argmax(axis=1)
    return float(np.mean(predicted == labels))


def evaluate_accuracy(params: CnnParams, samples: Sequence[PairSample], batch_size: int = 64) -> float:
    """Fraction of samples whose predicted label matches."""
    if not samples:
        return 0.0
    inputs, labels = stack_samples(samples)
    return _accuracy(params, inputs, labels, batch_size)


def stack_samples(samples: Sequence[PairSample]) -> Tuple[np.ndarray, np.ndarray]:
    inputs = np.stack([sample.pair.channels for sample in samples]).astype(TRAIN_DTYPE, copy=False)
    labels = np.array([sample.label for sample in samples], dtype=np.int64)
    return inputs, labels


def train_with_state(
    dataset: Sequence[PairSample],
    config: CnnConfig
) -> Tuple[CnnParams, AdamState, TrainReport]:
    """
    Train on a stratified 9:1 split with Adam.

    Args:
        dataset: labelled pair samples with both classes present
        config: architecture, optimizer and schedule

    Returns:
        Trained parameters, the final Adam state and the per-epoch report

    Raises:
        InsufficientData: fewer than ten samples or a single class
    """
    if len(dataset) < MIN_TRAINING_SAMPLES:
        raise InsufficientData(f"Need at least {MIN_TRAINING_SAMPLES} samples, got {len(dataset)}")
    inputs, labels = stack_samples(dataset)
    if len(np.unique(labels)) < 2:
        raise InsufficientData("Training data contains a single class")
    expected = (config.input_channels, config.input_size, config.input_size)
    if inputs.shape[1:] != expected:
        raise ShapeMismatch(f"Samples have shape {inputs.shape[1:]}, config expects {expected}")

    train_idx, val_idx = stratified_split(labels, config.rng_seed, config.validation_fraction)
    params = init_params(config)
    state = AdamState.initial(params)
    rng = np.random.default_rng([config.rng_seed, _SHUFFLE_STREAM])
    report = TrainReport(seed=config.rng_seed, n_train=len(train_idx), n_validation=len(val_idx))

    logger.info(
        f"Training on {len(train_idx)} pairs, validating on {len(val_idx)} "
        f"(seed {config.rng_seed}, batch {config.batch_size}, lr {config.learning_rate})"
    )
    started = time.perf_counter()
    budget_exhausted = False

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        losses = []
        for start in range(0, len(order), config.batch_size):
            if config.max_steps is not None and report.steps >= config.max_steps:
                budget_exhausted = True
                break
            batch_idx = order[start:start + config.batch_size]
            loss, grads = loss_and_grads(
                params, inputs[batch_idx], labels[batch_idx], rng, config.dropout_rate
            )
            adam_step(params, grads, state, config)
            if not params.all_finite():
                raise FloatingPointError(f"Non-finite parameters after step {state.t}")
            report.steps += 1
            losses.append(loss)

        if losses:
            stats = EpochStats(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                train_accuracy=_accuracy(params, inputs[train_idx], labels[train_idx], config.batch_size),
                validation_accuracy=_accuracy(params, inputs[val_idx], labels[val_idx], config.batch_size),
                steps=report.steps,
            )
            report.epochs.append(stats)
            logger.info(
                f"Epoch {epoch}/{config.epochs}: loss {stats.train_loss:.4f}, "
                f"train acc {stats.train_accuracy:.3f}, val acc {stats.validation_accuracy:.3f}"
            )
        if budget_exhausted or (config.max_steps is not None and report.steps >= config.max_steps):
            logger.info(f"Stopping after {report.steps} steps (max_steps reached)")
            break

    report.wall_time = time.perf_counter() - started
    logger.info(f"Training finished in {report.wall_time:.1f}s")
    return params, state, report


def train(dataset: Sequence[PairSample], config: CnnConfig) -> Tuple[CnnParams, TrainReport]:
    """Train and keep only the parameters and the report."""
    params, _, report = train_with_state(dataset, config)
    return params, report


# Gradient checking

def numerical_gradient(
    params: CnnParams,
    batch: np.ndarray,
    labels: Sequence[int],
    seed: int,
    h: float = 1e-5,
    dropout_rate: float = 0.5
) -> CnnParams:
    """
    Central finite differences of the training loss for every parameter.

    The dropout mask is reproduced on every evaluation by re-seeding.
    """
    grads = CnnParams.zeros_like(params)
    for name, array in params.arrays():
        target = getattr(grads, name)
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + h
            plus = compute_loss(params, batch, labels, np.random.default_rng(seed), dropout_rate)
            array[index] = original - h
            minus = compute_loss(params, batch, labels, np.random.default_rng(seed), dropout_rate)
            array[index] = original
            target[index] = (plus - minus) / (2 * h)
    return grads


def max_relative_error(analytic: CnnParams, numeric: CnnParams, floor: float = 1e-3) -> float:
    """Largest |a - n| / max(|a|, |n|, floor) across all parameters."""
    worst = 0.0
    for name, a in analytic.arrays():
        n = getattr(numeric, name)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / scale)))
    return worst

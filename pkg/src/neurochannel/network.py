"""Layer stacking, softmax head, optimizer, training loop, checkpoints.

Networks are stacks of channel/bypass layers with a softmax cross-entropy
head. The clamp in each synapse is the nonlinearity, so no activation
function sits between layers. Training is deterministic full-batch gradient
descent with classical momentum. Loss and gradients are summed over the
dataset rows, not averaged; with the truth-table datasets this summed
accumulation is what lets the stock learning rate converge within the
budgeted epochs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CheckpointFormatError,
    CheckpointShapeError,
    CheckpointVersionError,
    ConfigError,
    DivergedError,
    ShapeError,
)
from .kernel import ChannelSemantics, OpTally
from .layer import ForwardTrace, LayerGrads, LayerParams, layer_backward, layer_forward

CHECKPOINT_MAGIC = "NCN"
CHECKPOINT_VERSION = 1

# Initialization spreads: channel widths start wide enough to pass unit
# signals, transmitter levels start at half that spread, biases at zero.
WIDTH_INIT_STD = 1.0
NEURO_INIT_STD = 0.5


def validate_topology(topology) -> list[int]:
    topology = list(topology)
    if len(topology) < 2:
        raise ConfigError("topology needs at least an input and an output size")
    for dim in topology:
        if not isinstance(dim, int) or dim < 1:
            raise ConfigError(f"topology entries must be positive integers, got {dim}")
    return topology


@dataclass
class Network:
    """An ordered stack of layers plus the semantics they were built with."""

    layers: list[LayerParams]
    topology: list[int]
    semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1

    def __post_init__(self):
        self.topology = validate_topology(self.topology)
        expected = list(zip(self.topology[1:], self.topology[:-1]))
        shapes = [(p.out_dim, p.in_dim) for p in self.layers]
        if shapes != expected:
            raise ShapeError(f"layer shapes {shapes} do not chain as {self.topology}")

    @property
    def in_dim(self) -> int:
        return self.topology[0]

    @property
    def out_dim(self) -> int:
        return self.topology[-1]

    def copy(self) -> "Network":
        layers = [
            LayerParams(p.widths.copy(), p.neuro.copy(), p.bias.copy())
            for p in self.layers
        ]
        return Network(layers, list(self.topology), self.semantics)


@dataclass
class TrainConfig:
    """Everything a training run depends on; fully determines the result."""

    topology: list[int]
    learning_rate: float = 0.001
    momentum: float = 0.9
    epochs: int = 1000
    seed: int = 0
    dataset: str = "xor"
    channel_semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1

    def validate(self) -> "TrainConfig":
        validate_topology(self.topology)
        if not (self.learning_rate > 0):
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0 <= self.momentum < 1):
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        return self


@dataclass
class OptimizerState:
    """Momentum velocity buffers mirroring every parameter tensor."""

    vel_widths: list[np.ndarray]
    vel_neuro: list[np.ndarray]
    vel_bias: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Network) -> "OptimizerState":
        return cls(
            vel_widths=[np.zeros_like(p.widths) for p in net.layers],
            vel_neuro=[np.zeros_like(p.neuro) for p in net.layers],
            vel_bias=[np.zeros_like(p.bias) for p in net.layers],
        )


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def init_network(
    topology,
    seed: int,
    semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1,
) -> Network:
    """Gaussian-initialized network, deterministic for a given seed.

    Widths are drawn N(0, 1), transmitter levels N(0, 0.5) with 0.5 the
    standard deviation, biases start at zero. Per layer the widths are drawn
    before the transmitter levels, so the stream of draws is reproducible.
    """
    topology = validate_topology(topology)
    rng = np.random.default_rng(seed)
    layers = []
    for d, m in zip(topology[:-1], topology[1:]):
        widths = rng.normal(0.0, WIDTH_INIT_STD, size=(m, d))
        neuro = rng.normal(0.0, NEURO_INIT_STD, size=(m, d))
        layers.append(LayerParams(widths, neuro, np.zeros(m)))
    return Network(layers, topology, semantics)


def forward_full(
    net: Network, x, tally: OpTally
) -> tuple[np.ndarray, list[ForwardTrace]]:
    """Chain every layer; returns raw logits (no softmax) and all traces."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.in_dim,):
        raise ShapeError(f"input shape {x.shape} != ({net.in_dim},)")
    traces = []
    out = x
    for params in net.layers:
        out, trace = layer_forward(params, out, tally, net.semantics)
        traces.append(trace)
    return out, traces


def softmax_probs(logits) -> np.ndarray:
    """Numerically stabilized softmax (max subtraction)."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size == 0:
        raise ShapeError("logits must be a non-empty vector")
    shifted = logits - np.max(logits)
    exps = np.exp(shifted)
    return exps / np.sum(exps)


def softmax_cross_entropy(logits, target_class: int) -> tuple[float, np.ndarray]:
    """Loss -log p[target] and its gradient p - onehot(target)."""
    probs = softmax_probs(logits)
    if not (0 <= target_class < probs.size):
        raise ShapeError(
            f"target class {target_class} out of range for {probs.size} logits"
        )
    # log of the shifted softmax, computed without re-exponentiating
    shifted = np.asarray(logits, dtype=np.float64) - np.max(logits)
    log_probs = shifted - math.log(np.sum(np.exp(shifted)))
    loss = -log_probs[target_class]
    dlogits = probs.copy()
    dlogits[target_class] -= 1.0
    return float(loss), dlogits


def predict_class(net: Network, x, tally: OpTally | None = None) -> int:
    """Argmax class for one input; ties go to the lowest class index."""
    logits, _ = forward_full(net, x, tally if tally is not None else OpTally())
    return int(np.argmax(logits))


def _zero_grads(net: Network) -> list[LayerGrads]:
    return [
        LayerGrads(
            d_widths=np.zeros_like(p.widths),
            d_neuro=np.zeros_like(p.neuro),
            d_bias=np.zeros_like(p.bias),
            d_x=np.zeros(p.in_dim),
        )
        for p in net.layers
    ]


def dataset_loss(net: Network, dataset) -> float:
    """Total cross-entropy over every dataset row (forward passes only)."""
    tally = OpTally()
    total = 0.0
    for x, target in zip(dataset.inputs, dataset.targets):
        logits, _ = forward_full(net, x, tally)
        loss, _ = softmax_cross_entropy(logits, int(target))
        total += loss
    return total


def dataset_grads(
    net: Network, dataset
) -> tuple[float, float, list[LayerGrads]]:
    """Full-batch backprop: total loss, accuracy, and summed gradients."""
    if net.in_dim != dataset.input_dim:
        raise ShapeError(
            f"network input dim {net.in_dim} != dataset input dim {dataset.input_dim}"
        )
    if dataset.num_classes > net.out_dim:
        raise ShapeError(
            f"dataset has {dataset.num_classes} classes but network emits {net.out_dim} logits"
        )
    grads = _zero_grads(net)
    tally = OpTally()
    total_loss = 0.0
    correct = 0
    for x, target in zip(dataset.inputs, dataset.targets):
        logits, traces = forward_full(net, x, tally)
        loss, dlogits = softmax_cross_entropy(logits, int(target))
        total_loss += loss
        if int(np.argmax(logits)) == int(target):
            correct += 1
        dy = dlogits
        for params, trace, acc in zip(
            reversed(net.layers), reversed(traces), reversed(grads)
        ):
            g = layer_backward(params, trace, dy)
            acc.d_widths += g.d_widths
            acc.d_neuro += g.d_neuro
            acc.d_bias += g.d_bias
            dy = g.d_x
    return total_loss, correct / len(dataset.targets), grads


def sgd_momentum_step(
    net: Network,
    grads: list[LayerGrads],
    state: OptimizerState,
    lr: float,
    mu: float,
) -> None:
    """Classical momentum, in place: v <- mu*v - lr*g, theta <- theta + v."""
    if len(grads) != len(net.layers):
        raise ShapeError("gradient list does not match network layers")
    for k, (params, g) in enumerate(zip(net.layers, grads)):
        if g.d_widths.shape != params.widths.shape:
            raise ShapeError(f"layer {k}: gradient shape mismatch")
        state.vel_widths[k] = mu * state.vel_widths[k] - lr * g.d_widths
        state.vel_neuro[k] = mu * state.vel_neuro[k] - lr * g.d_neuro
        state.vel_bias[k] = mu * state.vel_bias[k] - lr * g.d_bias
        params.widths += state.vel_widths[k]
        params.neuro += state.vel_neuro[k]
        params.bias += state.vel_bias[k]


def train(config: TrainConfig) -> tuple[Network, list[EpochStats]]:
    """Deterministic full-batch training on the configured dataset.

    Each epoch accumulates gradients over every row, applies one momentum
    step, and records the pre-update loss and accuracy. Raises
    DivergedError with the epoch index if the loss leaves the finite range.
    """
    from .data import resolve_dataset

    config.validate()
    dataset = resolve_dataset(config.dataset)
    if config.topology[0] != dataset.input_dim:
        raise ShapeError(
            f"topology input dim {config.topology[0]} != dataset input dim {dataset.input_dim}"
        )
    if dataset.num_classes > config.topology[-1]:
        raise ShapeError(
            f"dataset has {dataset.num_classes} classes but topology emits {config.topology[-1]} logits"
        )
    net = init_network(config.topology, config.seed, config.channel_semantics)
    state = OptimizerState.zeros_like(net)
    history = []
    for epoch in range(1, config.epochs + 1):
        try:
            loss, accuracy, grads = dataset_grads(net, dataset)
        except ValueError as exc:
            # non-finite activations: numeric blowup, dataset rows are finite
            raise DivergedError(str(exc), epoch=epoch) from exc
        if not math.isfinite(loss):
            raise DivergedError(f"loss became {loss}", epoch=epoch)
        sgd_momentum_step(net, grads, state, config.learning_rate, config.momentum)
        for params in net.layers:
            if not (
                np.all(np.isfinite(params.widths))
                and np.all(np.isfinite(params.neuro))
                and np.all(np.isfinite(params.bias))
            ):
                raise DivergedError("parameters became non-finite", epoch=epoch)
        history.append(EpochStats(epoch=epoch, loss=loss, accuracy=accuracy))
    return net, history


def _format_row(values) -> str:
    return " ".join(f"{v:.17g}" for v in values)


def save_checkpoint(net: Network, path) -> None:
    """Write the line-oriented text checkpoint; round-trips bit-exactly."""
    lines = [
        f"{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}",
        f"semantics: {net.semantics.value}",
        "topology: " + ",".join(str(d) for d in net.topology),
    ]
    for params in net.layers:
        lines.append("W")
        lines.extend(_format_row(row) for row in params.widths)
        lines.append("N")
        lines.extend(_format_row(row) for row in params.neuro)
        lines.append("b")
        lines.append(_format_row(params.bias))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class _LineReader:
    def __init__(self, lines):
        self._lines = lines
        self._pos = 0

    def next(self, what: str) -> str:
        if self._pos >= len(self._lines):
            raise CheckpointFormatError(f"unexpected end of file, expected {what}")
        line = self._lines[self._pos]
        self._pos += 1
        return line

    def exhausted(self) -> bool:
        return self._pos >= len(self._lines)


def _parse_row(line: str, expect: int, what: str) -> np.ndarray:
    cells = line.split()
    if len(cells) != expect:
        raise CheckpointShapeError(
            f"{what}: expected {expect} values per row, got {len(cells)}"
        )
    try:
        return np.array([float(c) for c in cells], dtype=np.float64)
    except ValueError as exc:
        raise CheckpointFormatError(f"{what}: {exc}") from exc


def load_checkpoint(path) -> Network:
    """Parse a checkpoint written by :func:`save_checkpoint`.

    Raises CheckpointVersionError on an unsupported version line,
    CheckpointFormatError on malformed or truncated content, and
    CheckpointShapeError when blocks disagree with the topology header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    reader = _LineReader(lines)

    header = reader.next("header")
    if not header.startswith(CHECKPOINT_MAGIC + " v"):
        raise CheckpointFormatError(f"bad header line {header!r}")
    version_text = header[len(CHECKPOINT_MAGIC) + 2 :]
    try:
        version = int(version_text)
    except ValueError as exc:
        raise CheckpointFormatError(f"bad version field {version_text!r}") from exc
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )

    sem_line = reader.next("semantics line")
    if not sem_line.startswith("semantics: "):
        raise CheckpointFormatError(f"expected semantics line, got {sem_line!r}")
    try:
        semantics = ChannelSemantics(sem_line[len("semantics: ") :])
    except ValueError as exc:
        raise CheckpointFormatError(str(exc)) from exc

    topo_line = reader.next("topology line")
    if not topo_line.startswith("topology: "):
        raise CheckpointFormatError(f"expected topology line, got {topo_line!r}")
    try:
        topology = [int(t) for t in topo_line[len("topology: ") :].split(",")]
    except ValueError as exc:
        raise CheckpointFormatError(f"bad topology field: {exc}") from exc
    try:
        validate_topology(topology)
    except ConfigError as exc:
        raise CheckpointShapeError(str(exc)) from exc

    layers = []
    for k, (d, m) in enumerate(zip(topology[:-1], topology[1:])):
        blocks = {}
        for tag in ("W", "N", "b"):
            marker = reader.next(f"layer {k} marker {tag!r}")
            if marker != tag:
                raise CheckpointFormatError(
                    f"layer {k}: expected marker {tag!r}, got {marker!r}"
                )
            rows = 1 if tag == "b" else m
            width = m if tag == "b" else d
            block = [
                _parse_row(reader.next(f"layer {k} {tag} row"), width, f"layer {k} {tag}")
                for _ in range(rows)
            ]
            blocks[tag] = block[0] if tag == "b" else np.vstack(block)
        try:
            layers.append(LayerParams(blocks["W"], blocks["N"], blocks["b"]))
        except (ShapeError, ValueError) as exc:
            raise CheckpointShapeError(f"layer {k}: {exc}") from exc

    while not reader.exhausted():
        if reader.next("end of file").strip():
            raise CheckpointFormatError("trailing content after last layer block")
    return Network(layers, topology, semantics)

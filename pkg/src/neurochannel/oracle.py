"""Independent verification machinery.

Nothing here reuses the analytic backward pass: gradients are checked by
central finite differences of the loss, operation tallies are checked
against a closed-form budget derived only from the topology, and accuracy
is computed by brute-force evaluation of every row. A minimal instrumented
dense forward provides the conventional-perceptron reference column for the
cost comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .kernel import OpTally
from .layer import layer_forward
from .network import (
    Network,
    dataset_grads,
    dataset_loss,
    forward_full,
    init_network,
    validate_topology,
)

ARCHITECTURES = ("ncn", "ffnn")


@dataclass(frozen=True)
class OpBudget:
    """Closed-form forward-pass operation counts for one topology.

    Synaptic counters grow with connection count, somatic counters with
    neuron count.
    """

    synaptic_fmul: int
    synaptic_fadd: int
    synaptic_compare: int
    synaptic_mux: int
    somatic_bias: int
    somatic_scaling: int

    def as_view(self) -> dict:
        """Same key set as ``OpTally.budget_view`` for direct comparison."""
        return {
            "fmul": self.synaptic_fmul,
            "fadd": self.synaptic_fadd,
            "compare": self.synaptic_compare,
            "mux": self.synaptic_mux,
            "bias_add": self.somatic_bias,
            "scaling": self.somatic_scaling,
        }


def predict_op_budget(topology, arch: str = "ncn") -> OpBudget:
    """Sum per-layer operation counts over the whole topology.

    For a layer with fan-in d and fan-out m, the channel/bypass layer costs
    0 fmul, 2dm fadd, 2dm compares, 2dm mux, m bias adds and m scalings.
    The conventional dense reference costs dm fmul, dm fadd, m bias adds
    and nothing else.
    """
    topology = validate_topology(topology)
    if arch not in ARCHITECTURES:
        raise ConfigError(f"unknown architecture {arch!r}, expected one of {ARCHITECTURES}")
    fmul = fadd = compare = mux = bias = scaling = 0
    for d, m in zip(topology[:-1], topology[1:]):
        if arch == "ncn":
            fadd += 2 * d * m
            compare += 2 * d * m
            mux += 2 * d * m
            bias += m
            scaling += m
        else:
            fmul += d * m
            fadd += d * m
            bias += m
    return OpBudget(fmul, fadd, compare, mux, bias, scaling)


def ffnn_layer_forward(weights, bias, x, tally: OpTally) -> np.ndarray:
    """Instrumented conventional dense layer: y = W x + b.

    Reference column only; tallies one fmul and one fadd per connection and
    one bias add per neuron.
    """
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m, d = weights.shape
    if x.shape != (d,):
        raise ShapeError(f"input shape {x.shape} != ({d},)")
    y = np.empty(m)
    for j in range(m):
        s = 0.0
        for i in range(d):
            s += weights[j, i] * x[i]
        tally.fmul += d
        tally.fadd += d
        y[j] = s + bias[j]
        tally.bias_add += 1
    return y


def ffnn_forward_full(topology, x, tally: OpTally, seed: int = 0) -> np.ndarray:
    """Chain instrumented dense layers with Gaussian parameters."""
    topology = validate_topology(topology)
    rng = np.random.default_rng(seed)
    out = np.asarray(x, dtype=np.float64)
    for d, m in zip(topology[:-1], topology[1:]):
        out = ffnn_layer_forward(rng.normal(size=(m, d)), np.zeros(m), out, tally)
    return out


def live_op_tally(net: Network) -> OpTally:
    """Run one instrumented forward pass on a zero input vector."""
    tally = OpTally()
    forward_full(net, np.zeros(net.in_dim), tally)
    return tally


PARAM_NAMES = ("W", "N", "b")


def _param_array(net: Network, coordinate):
    try:
        layer_idx, name, index = coordinate
    except (TypeError, ValueError):
        raise ValueError(f"coordinate must be (layer, name, index), got {coordinate!r}")
    if not (0 <= layer_idx < len(net.layers)):
        raise ValueError(f"layer index {layer_idx} out of range")
    if name not in PARAM_NAMES:
        raise ValueError(f"parameter name must be one of {PARAM_NAMES}, got {name!r}")
    params = net.layers[layer_idx]
    array = {"W": params.widths, "N": params.neuro, "b": params.bias}[name]
    try:
        array[index]
    except (IndexError, TypeError):
        raise ValueError(f"index {index!r} invalid for {name} of shape {array.shape}")
    return array


def finite_diff_grad(net: Network, dataset, coordinate, h: float = 1e-5) -> float:
    """Central difference of the mean dataset loss along one parameter.

    ``coordinate`` is (layer_index, name, index) with name one of W, N, b.
    Uses forward passes only, never the analytic backward pass. Results are
    only meaningful away from the clamp and sign kinks; callers should test
    the exclusion zone first.
    """
    if not (h > 0):
        raise ValueError(f"step size must be positive, got {h}")
    probe = net.copy()
    array = _param_array(probe, coordinate)
    _, _, index = coordinate
    original = array[index]
    array[index] = original + h
    loss_plus = dataset_loss(probe, dataset)
    array[index] = original - h
    loss_minus = dataset_loss(probe, dataset)
    array[index] = original
    return (loss_plus - loss_minus) / (2.0 * h)


def exhaustive_eval(net: Network, dataset) -> float:
    """Fraction of rows where the argmax class matches the target.

    Argmax ties resolve to the lowest class index.
    """
    if len(dataset) == 0:
        raise ShapeError("dataset is empty")
    if net.in_dim != dataset.input_dim:
        raise ShapeError(
            f"network input dim {net.in_dim} != dataset input dim {dataset.input_dim}"
        )
    tally = OpTally()
    correct = 0
    for x, target in zip(dataset.inputs, dataset.targets):
        logits, _ = forward_full(net, x, tally)
        if int(np.argmax(logits)) == int(target):
            correct += 1
    return correct / len(dataset)


def exclusion_zone_margin(net: Network, x) -> float:
    """Distance of a (network, input) pair from the nearest gradient kink.

    For every layer, using the activations that layer actually receives,
    the margin is the smallest of |x_i|, |W_ji|, |N_ji|, ||x_i| - |W_ji||
    and ||x_i| - |N_ji|| over all synapses. Finite differences are reliable
    only when this margin comfortably exceeds the step size.
    """
    tally = OpTally()
    margin = np.inf
    out = np.asarray(x, dtype=np.float64)
    for params in net.layers:
        ax = np.abs(out)
        aw = np.abs(params.widths)
        an = np.abs(params.neuro)
        margin = min(
            margin,
            ax.min(),
            aw.min(),
            an.min(),
            np.abs(ax[None, :] - aw).min(),
            np.abs(ax[None, :] - an).min(),
        )
        out, _ = layer_forward(params, out, tally, net.semantics)
    return float(margin)


@dataclass
class GradcheckResult:
    checked: int
    max_rel_error: float
    worst: tuple | None


def _coordinates(net: Network):
    for k, params in enumerate(net.layers):
        for j in range(params.out_dim):
            for i in range(params.in_dim):
                yield (k, "W", (j, i))
                yield (k, "N", (j, i))
        for j in range(params.out_dim):
            yield (k, "b", (j,))


def gradcheck(
    topology,
    seed: int = 0,
    min_coords: int = 1000,
    h: float = 1e-5,
    zone_radius: float = 1e-3,
) -> GradcheckResult:
    """Compare analytic gradients to central differences en masse.

    Draws random networks and inputs, rejects pairs inside the exclusion
    zone, then checks every parameter coordinate of each surviving pair
    until at least ``min_coords`` coordinates are covered. Relative error
    uses a 1e-6 floor in the denominator so exact zero gradients on both
    sides compare clean.
    """
    from .data import Dataset

    topology = validate_topology(topology)
    rng = np.random.default_rng(seed)
    checked = 0
    max_rel = 0.0
    worst = None
    draw = 0
    while checked < min_coords:
        draw += 1
        net = init_network(topology, seed=int(rng.integers(2**32)))
        x = rng.uniform(-1.5, 1.5, size=topology[0])
        if exclusion_zone_margin(net, x) <= zone_radius:
            continue
        target = int(rng.integers(topology[-1]))
        dataset = Dataset(
            x[None, :], np.array([target]), input_dim=topology[0], num_classes=topology[-1]
        )
        _, _, grads = dataset_grads(net, dataset)
        for coordinate in _coordinates(net):
            k, name, index = coordinate
            g = grads[k]
            array = {"W": g.d_widths, "N": g.d_neuro, "b": g.d_bias}[name]
            a = float(array[index])
            f = finite_diff_grad(net, dataset, coordinate, h)
            rel = abs(a - f) / max(abs(a), abs(f), 1e-6)
            checked += 1
            if rel > max_rel:
                max_rel = rel
                worst = (coordinate, a, f)
        if draw > 100 * max(1, min_coords):
            raise RuntimeError("could not sample enough points outside the exclusion zone")
    return GradcheckResult(checked=checked, max_rel_error=max_rel, worst=worst)


def audit_network(net: Network) -> tuple[OpBudget, OpTally, bool]:
    """Predicted budget vs live tally for one forward pass; True iff equal."""
    budget = predict_op_budget(net.topology, "ncn")
    tally = live_op_tally(net)
    return budget, tally, budget.as_view() == tally.budget_view()

"""Multiplication-free neural networks with audited forward passes.

Synapses carry signals through a magnitude-clamping channel plus a
sign-preserving bypass instead of multiplying by a weight, so inference
needs only additions, comparisons, and conditional selection. Live
operation tallies prove the zero-multiply property on every forward pass.
"""

from .data import BoundaryGrid, Dataset, boundary_scan, make_majority, make_xor
from .kernel import ChannelSemantics, OpTally, bypass_transmit, channel_transmit, sgn
from .layer import LayerGrads, LayerParams, layer_backward, layer_forward
from .network import (
    Network,
    TrainConfig,
    forward_full,
    init_network,
    load_checkpoint,
    save_checkpoint,
    softmax_cross_entropy,
    train,
)
from .oracle import OpBudget, exhaustive_eval, finite_diff_grad, gradcheck, predict_op_budget

__version__ = "0.1.0"

__all__ = [
    "BoundaryGrid",
    "ChannelSemantics",
    "Dataset",
    "LayerGrads",
    "LayerParams",
    "Network",
    "OpBudget",
    "OpTally",
    "TrainConfig",
    "boundary_scan",
    "bypass_transmit",
    "channel_transmit",
    "exhaustive_eval",
    "finite_diff_grad",
    "forward_full",
    "gradcheck",
    "init_network",
    "layer_backward",
    "layer_forward",
    "load_checkpoint",
    "make_majority",
    "make_xor",
    "predict_op_budget",
    "save_checkpoint",
    "sgn",
    "softmax_cross_entropy",
    "train",
]

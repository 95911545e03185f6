"""A fully connected layer of channel/bypass synapses.

The forward pass runs every synapse through the scalar kernel primitives,
accumulates both paths per neuron, scales the sum by 1/sqrt(in_dim) so the
output variance stays independent of fan-in, and adds the bias. Everything
the backward pass needs about branch outcomes is cached in a ForwardTrace.

The forward pass is multiplication-free and audited. The backward pass is
ordinary floating-point subgradient arithmetic: sign factors and min winners
recorded in the trace are treated as constants of the forward pass, and a
magnitude tie attributes the gradient to the parameter so parameters stay
trainable at the clamp boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .kernel import (
    PARAM_LIMITED,
    X_LIMITED,
    ChannelSemantics,
    OpTally,
    bypass_transmit_traced,
    channel_transmit_traced,
)


@dataclass
class LayerParams:
    """Learnable state of one layer.

    widths : (out_dim, in_dim) channel widths, the primary weights
    neuro : (out_dim, in_dim) transmitter levels gating the bypass path
    bias : (out_dim,) per-neuron offsets
    """

    widths: np.ndarray
    neuro: np.ndarray
    bias: np.ndarray
    sqrt_d: float = field(init=False)

    def __post_init__(self):
        self.widths = np.asarray(self.widths, dtype=np.float64)
        self.neuro = np.asarray(self.neuro, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.widths.ndim != 2:
            raise ShapeError("widths must be a 2-d matrix")
        if self.neuro.shape != self.widths.shape:
            raise ShapeError(
                f"neuro shape {self.neuro.shape} != widths shape {self.widths.shape}"
            )
        if self.bias.shape != (self.widths.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} incompatible with out_dim {self.widths.shape[0]}"
            )
        for name in ("widths", "neuro", "bias"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")
        # fan-in scaling, fixed at construction
        self.sqrt_d = math.sqrt(self.widths.shape[1])

    @property
    def out_dim(self) -> int:
        return self.widths.shape[0]

    @property
    def in_dim(self) -> int:
        return self.widths.shape[1]


@dataclass
class ForwardTrace:
    """Per-synapse branch outcomes cached by one forward pass.

    ``sign_match[j, i]`` is True when the channel output followed the input
    sign (always True under EQUATION1 semantics, where it degenerates to the
    bypass rule). Winner matrices hold X_LIMITED/PARAM_LIMITED/TIE codes for
    each min. ``presums`` are the per-neuron sums before scaling and bias,
    so ``presums / sqrt_d + bias`` reproduces the output bit-exactly.
    """

    x: np.ndarray
    sign_x: np.ndarray
    sign_match: np.ndarray
    channel_winner: np.ndarray
    bypass_winner: np.ndarray
    presums: np.ndarray
    semantics: ChannelSemantics


@dataclass
class LayerGrads:
    """Subgradients produced by one backward pass."""

    d_widths: np.ndarray
    d_neuro: np.ndarray
    d_bias: np.ndarray
    d_x: np.ndarray


def layer_forward(
    params: LayerParams,
    x,
    tally: OpTally,
    semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1,
) -> tuple[np.ndarray, ForwardTrace]:
    """Audited forward pass over every synapse of the layer.

    Returns the activation vector and the trace for the backward pass.
    Per synapse the tally accrues the two kernel transmissions plus 2 fadd
    for accumulation; per neuron, 1 scaling (the 1/sqrt(d) division) and
    1 bias_add.
    """
    x = np.asarray(x, dtype=np.float64)
    d = params.in_dim
    m = params.out_dim
    if x.shape != (d,):
        raise ShapeError(f"input shape {x.shape} != ({d},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite layer input")

    widths = params.widths
    neuro = params.neuro
    sign_x = np.sign(x).astype(np.int8)
    sign_match = np.empty((m, d), dtype=bool)
    channel_winner = np.empty((m, d), dtype=np.int8)
    bypass_winner = np.empty((m, d), dtype=np.int8)
    presums = np.empty(m, dtype=np.float64)
    y = np.empty(m, dtype=np.float64)

    for j in range(m):
        w_row = widths[j]
        n_row = neuro[j]
        s = 0.0
        for i in range(d):
            c, cw, match = channel_transmit_traced(x[i], w_row[i], tally, semantics)
            b, bw = bypass_transmit_traced(x[i], n_row[i], tally)
            s += c + b
            channel_winner[j, i] = cw
            bypass_winner[j, i] = bw
            sign_match[j, i] = match
        tally.fadd += 2 * d
        presums[j] = s
        y[j] = s / params.sqrt_d + params.bias[j]
        tally.scaling += 1
        tally.bias_add += 1

    trace = ForwardTrace(
        x=x.copy(),
        sign_x=sign_x,
        sign_match=sign_match,
        channel_winner=channel_winner,
        bypass_winner=bypass_winner,
        presums=presums,
        semantics=semantics,
    )
    return y, trace


def replay_forward(params: LayerParams, trace: ForwardTrace) -> np.ndarray:
    """Recompute the layer output from the recorded branch outcomes.

    Used to check that the trace fully determines the forward pass: the
    result must equal the original output bit for bit.
    """
    m, d = params.out_dim, params.in_dim
    if trace.channel_winner.shape != (m, d) or trace.x.shape != (d,):
        raise ShapeError("trace dimensions do not match layer dimensions")
    ax = np.abs(trace.x)
    y = np.empty(m, dtype=np.float64)
    for j in range(m):
        s = 0.0
        for i in range(d):
            lim_c = ax[i] if trace.channel_winner[j, i] != PARAM_LIMITED else abs(params.widths[j, i])
            lim_b = ax[i] if trace.bypass_winner[j, i] != PARAM_LIMITED else abs(params.neuro[j, i])
            sx = int(trace.sign_x[i])
            if trace.sign_match[j, i]:
                c = lim_c if sx > 0 else (-lim_c if sx < 0 else 0.0)
            else:
                c = -lim_c
            b = lim_b if sx > 0 else (-lim_b if sx < 0 else 0.0)
            s += c + b
        y[j] = s / params.sqrt_d + params.bias[j]
    return y


def layer_backward(params: LayerParams, trace: ForwardTrace, dy) -> LayerGrads:
    """Reverse-mode subgradients through the recorded forward branches.

    With sigma the channel output sign factor (sgn(x) where the output
    followed the input sign, -1 on the inhibitory branch) and the bracketed
    indicators read from the trace:

        dy/d_width = sigma * sgn(width) * [param limited] / sqrt(d)
        dy/d_neuro = sgn(x) * sgn(neuro) * [param limited] / sqrt(d)
        dy/d_bias  = 1
        dy/d_x     = (sigma * sgn(x) * [x limited, channel]
                      + [x limited, bypass]) / sqrt(d)

    Ties count as param-limited. Sign factors are constants of the forward
    pass, so there are no delta terms at sign flips. Unlike the forward
    pass, this path multiplies freely.
    """
    m, d = params.out_dim, params.in_dim
    dy = np.asarray(dy, dtype=np.float64)
    if dy.shape != (m,):
        raise ShapeError(f"dy shape {dy.shape} != ({m},)")
    if trace.channel_winner.shape != (m, d) or trace.x.shape != (d,):
        raise ShapeError("trace dimensions do not match layer dimensions")

    sx = trace.sign_x.astype(np.float64)
    sigma = np.where(trace.sign_match, sx[None, :], -1.0)
    pl_channel = (trace.channel_winner != X_LIMITED).astype(np.float64)
    xl_channel = (trace.channel_winner == X_LIMITED).astype(np.float64)
    pl_bypass = (trace.bypass_winner != X_LIMITED).astype(np.float64)
    xl_bypass = (trace.bypass_winner == X_LIMITED).astype(np.float64)
    inv = 1.0 / params.sqrt_d

    dy_col = dy[:, None]
    d_widths = dy_col * sigma * np.sign(params.widths) * pl_channel * inv
    d_neuro = dy_col * sx[None, :] * np.sign(params.neuro) * pl_bypass * inv
    d_bias = dy.copy()
    d_x = np.sum(dy_col * (sigma * sx[None, :] * xl_channel + xl_bypass) * inv, axis=0)
    return LayerGrads(d_widths=d_widths, d_neuro=d_neuro, d_bias=d_bias, d_x=d_x)

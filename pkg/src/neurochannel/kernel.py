"""Scalar multiplication-free synapse primitives with operation tallying.

Every synaptic computation in the package flows through this module, which is
what makes the operation counters trustworthy: the transmission primitives
never execute a floating-point multiply, and the live tally proves it.

A synapse carries a signal through two parallel paths. The channel path
clamps the signal magnitude to the channel width ``w`` and, when the signal
and the width disagree in sign, inverts the clamped signal (inhibition). The
bypass path clamps to the transmitter level ``n`` but always keeps the
signal's own sign, so a shut channel still leaks signal and gradient.

Sign and magnitude of an operand come from the same primitive (reading the
sign bit of a sign-magnitude value), so each extraction is tallied once as
``sign_abs``. The products ``sgn(x) * limit`` are realized as conditional
negation and tallied as ``mux``, never as a floating multiply.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum

Signal = float

# Outcome codes for a magnitude comparison min(|x|, |p|).
X_LIMITED = 0
PARAM_LIMITED = 1
TIE = 2


class ChannelSemantics(str, Enum):
    """Selects how the channel path treats an opposite-sign width.

    ``ALGORITHM1``: a sign mismatch between input and width inverts the
    clamped signal (inhibitory transmission). This is the default and the
    only variant in which the width's sign carries meaning.

    ``EQUATION1``: the width's sign is ignored and the output always follows
    the input sign, exactly like the bypass path. Kept for ablation.
    """

    ALGORITHM1 = "algorithm1"
    EQUATION1 = "equation1"


@dataclass
class OpTally:
    """Exact integer counters for the forward-pass operation audit.

    ``fmul`` must stay 0 across any sequence of transmission primitives;
    that is the central invariant the audit defends. ``compare`` counts every
    comparison executed, while ``min_compare`` counts only the magnitude
    (min) comparisons. The budget view reported to auditors folds the
    sign-match test into the mux selection, so it exposes ``min_compare``
    as its comparison row.
    """

    fmul: int = 0
    fadd: int = 0
    compare: int = 0
    mux: int = 0
    sign_abs: int = 0
    scaling: int = 0
    bias_add: int = 0
    min_compare: int = 0

    def reset(self) -> "OpTally":
        """Zero every counter (idempotent)."""
        for f in fields(self):
            setattr(self, f.name, 0)
        return self

    def merge(self, other: "OpTally") -> "OpTally":
        """Fold another tally into this one, component-wise."""
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def raw_view(self) -> dict:
        """Every primitive as executed, one key per counter."""
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def budget_view(self) -> dict:
        """The accounting convention used by the predicted op budgets.

        Only min comparisons count as comparisons; the sign-match test is
        considered part of the mux selection it feeds.
        """
        return {
            "fmul": self.fmul,
            "fadd": self.fadd,
            "compare": self.min_compare,
            "mux": self.mux,
            "bias_add": self.bias_add,
            "scaling": self.scaling,
        }


def tally_reset(tally: OpTally) -> OpTally:
    """Functional spelling of :meth:`OpTally.reset`."""
    return tally.reset()


def _sign(v: float) -> int:
    return -1 if v < 0.0 else (1 if v > 0.0 else 0)


def sgn(x: Signal, tally: OpTally) -> int:
    """Three-valued sign of ``x``; one ``sign_abs`` op."""
    tally.sign_abs += 1
    return _sign(x)


def _min_limited(a: float, b: float) -> tuple[float, int]:
    # Returns (min(a, b), outcome code); a is the |x| side.
    if a < b:
        return a, X_LIMITED
    if a > b:
        return b, PARAM_LIMITED
    return a, TIE


def channel_transmit_traced(
    x: Signal,
    w: float,
    tally: OpTally,
    semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1,
) -> tuple[Signal, int, bool]:
    """Channel-path transmission, also reporting the branch taken.

    Returns ``(out, winner, follows_input)`` where ``winner`` is the
    X_LIMITED/PARAM_LIMITED/TIE outcome of ``min(|x|, |w|)`` and
    ``follows_input`` tells whether the output sign tracks ``sgn(x)``
    (False only on the inhibitory branch, where ``out = -min(|x|, |w|)``).

    Tally, default semantics: 2 sign_abs, 2 compare (1 min + 1 sign match),
    1 mux, 0 fmul. Under ``EQUATION1`` there is no sign-match test, so only
    1 compare. Zero input or zero width transmits exactly 0.
    """
    ax = abs(x)
    sx = _sign(x)
    aw = abs(w)
    tally.sign_abs += 2
    limit, winner = _min_limited(ax, aw)
    tally.compare += 1
    tally.min_compare += 1
    if semantics is ChannelSemantics.ALGORITHM1:
        follows_input = sx == _sign(w)
        tally.compare += 1
    else:
        follows_input = True
    tally.mux += 1
    if follows_input:
        out = limit if sx > 0 else (-limit if sx < 0 else 0.0)
    else:
        out = -limit
    return out, winner, follows_input


def channel_transmit(
    x: Signal,
    w: float,
    tally: OpTally,
    semantics: ChannelSemantics = ChannelSemantics.ALGORITHM1,
) -> Signal:
    """Clamp ``x`` to the channel width ``w``.

    Same-sign input and width transmit ``sgn(x) * min(|x|, |w|)``; a sign
    mismatch inverts the clamped magnitude (inhibitory branch). Output
    magnitude always equals ``min(|x|, |w|)``.
    """
    out, _, _ = channel_transmit_traced(x, w, tally, semantics)
    return out


def bypass_transmit_traced(
    x: Signal, n: float, tally: OpTally
) -> tuple[Signal, int]:
    """Bypass-path transmission, also reporting the min outcome.

    Tally: 1 sign_abs, 1 compare, 1 mux. The magnitude of ``x`` is assumed
    already extracted by the channel path of the same synapse, so only
    ``|n|`` is charged here.
    """
    ax = abs(x)
    sx = _sign(x)
    an = abs(n)
    tally.sign_abs += 1
    limit, winner = _min_limited(ax, an)
    tally.compare += 1
    tally.min_compare += 1
    tally.mux += 1
    out = limit if sx > 0 else (-limit if sx < 0 else 0.0)
    return out, winner


def bypass_transmit(x: Signal, n: float, tally: OpTally) -> Signal:
    """Clamp ``x`` to the transmitter level ``n``, keeping the sign of ``x``.

    The sign of ``n`` is irrelevant: ``bypass_transmit(x, n)`` equals
    ``bypass_transmit(x, -n)`` for all inputs.
    """
    out, _ = bypass_transmit_traced(x, n, tally)
    return out

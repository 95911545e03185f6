"""Truth-table datasets, CSV ingestion, and the decision-boundary sampler."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DatasetFormatError, ShapeError


@dataclass
class Dataset:
    """Classification samples: float inputs, integer class targets."""

    inputs: np.ndarray
    targets: np.ndarray
    input_dim: int
    num_classes: int

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.int64)
        if self.inputs.ndim != 2 or self.inputs.shape[1] != self.input_dim:
            raise ShapeError(f"inputs must be (n, {self.input_dim})")
        if self.targets.shape != (self.inputs.shape[0],):
            raise ShapeError("targets must pair one class per input row")
        if self.inputs.shape[0] == 0:
            raise ShapeError("dataset is empty")
        if not np.all(np.isfinite(self.inputs)):
            raise ValueError("non-finite dataset inputs")
        if self.targets.min() < 0 or self.targets.max() >= self.num_classes:
            raise ShapeError(f"targets must lie in [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.targets)


def make_xor() -> Dataset:
    """The four-row exclusive-or truth table over {0,1}^2."""
    inputs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    targets = [0, 1, 1, 0]
    return Dataset(np.array(inputs, float), np.array(targets), input_dim=2, num_classes=2)


def make_majority(k: int) -> Dataset:
    """All 2^k bit vectors; class 1 iff more than half the bits are set.

    k must be odd and at least 3 so the majority is always strict.
    Rows come in binary counting order with the first column most
    significant.
    """
    if k < 3 or k % 2 == 0:
        raise ConfigError(f"majority size must be odd and >= 3, got {k}")
    rows = []
    targets = []
    for r in range(2**k):
        bits = [(r >> (k - 1 - i)) & 1 for i in range(k)]
        rows.append(bits)
        targets.append(1 if sum(bits) > k // 2 else 0)
    return Dataset(np.array(rows, float), np.array(targets), input_dim=k, num_classes=2)


def _parse_cells(cells, line_no):
    values = []
    for cell in cells:
        try:
            value = float(cell)
        except ValueError:
            raise DatasetFormatError(f"non-numeric cell {cell!r}", line=line_no) from None
        if not np.isfinite(value):
            raise DatasetFormatError(f"non-finite cell {cell!r}", line=line_no)
        values.append(value)
    return values


def load_csv(path) -> Dataset:
    """Comma-separated samples: feature columns then one integer label.

    A first row that does not parse as numbers is treated as a header.
    The number of classes is the highest label plus one.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = [(no, line.strip()) for no, line in enumerate(fh, start=1)]
    raw = [(no, line) for no, line in raw if line]
    if not raw:
        raise DatasetFormatError(f"{path}: no data rows")

    first_no, first_line = raw[0]
    try:
        _parse_cells(first_line.split(","), first_no)
    except DatasetFormatError:
        raw = raw[1:]  # header row
        if not raw:
            raise DatasetFormatError(f"{path}: header but no data rows") from None

    width = len(raw[0][1].split(","))
    if width < 2:
        raise DatasetFormatError("need at least one feature and a label", line=raw[0][0])
    inputs = []
    labels = []
    for no, line in raw:
        cells = line.split(",")
        if len(cells) != width:
            raise DatasetFormatError(
                f"expected {width} columns, got {len(cells)}", line=no
            )
        values = _parse_cells(cells, no)
        label = values[-1]
        if label != int(label) or label < 0:
            raise DatasetFormatError(
                f"label must be a non-negative integer, got {cells[-1]!r}", line=no
            )
        inputs.append(values[:-1])
        labels.append(int(label))
    return Dataset(
        np.array(inputs, float),
        np.array(labels),
        input_dim=width - 1,
        num_classes=max(labels) + 1,
    )


_MAJORITY_RE = re.compile(r"^majority(\d+)$")


def resolve_dataset(selector: str) -> Dataset:
    """Map a selector string to a dataset.

    Accepted forms: ``xor``, ``majority<k>`` for odd k >= 3, and
    ``csv:<path>``.
    """
    if selector == "xor":
        return make_xor()
    m = _MAJORITY_RE.match(selector)
    if m:
        return make_majority(int(m.group(1)))
    if selector.startswith("csv:"):
        return load_csv(selector[len("csv:") :])
    raise ConfigError(f"unknown dataset selector {selector!r}")


@dataclass
class BoundaryGrid:
    """Square lattice of evaluation points over [grid_min, grid_max]^2."""

    grid_min: float = -0.5
    grid_max: float = 1.5
    resolution: int = 200

    def __post_init__(self):
        if self.resolution < 2:
            raise ConfigError(f"resolution must be >= 2, got {self.resolution}")
        if not (self.grid_min < self.grid_max):
            raise ConfigError(
                f"grid_min must be below grid_max, got [{self.grid_min}, {self.grid_max}]"
            )

    def axis(self) -> np.ndarray:
        """Lattice coordinates along one axis; endpoints land exactly."""
        return np.linspace(self.grid_min, self.grid_max, self.resolution)


def boundary_scan(net, grid: BoundaryGrid) -> list[tuple]:
    """Classify every lattice point with a 2-input network.

    Output rows are (x1, x2, predicted_class, p_class1) in row-major order:
    x1 varies slowest, x2 fastest, so the first row is the (min, min) corner
    and the last the (max, max) corner.
    """
    from .kernel import OpTally
    from .network import forward_full, softmax_probs

    if net.in_dim != 2:
        raise ConfigError(
            f"boundary scan needs a 2-input network, got input dim {net.in_dim}"
        )
    if net.out_dim < 2:
        raise ConfigError("boundary scan needs at least 2 output classes")
    axis = grid.axis()
    tally = OpTally()
    rows = []
    for x1 in axis:
        for x2 in axis:
            logits, _ = forward_full(net, (x1, x2), tally)
            probs = softmax_probs(logits)
            rows.append((float(x1), float(x2), int(np.argmax(logits)), float(probs[1])))
    return rows


def write_boundary_csv(rows, path) -> None:
    """Write scan rows as ``x1,x2,class,p1`` with full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,class,p1\n")
        for x1, x2, cls, p1 in rows:
            fh.write(f"{x1:.17g},{x2:.17g},{cls},{p1:.17g}\n")

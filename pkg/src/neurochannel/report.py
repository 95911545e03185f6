"""Figure rendering for the CLI report paths.

Figures are written straight to files next to the delimited output, so the
Agg backend is forced before pyplot loads and no display is ever required.
The output format follows the file extension (.svg, .png, .pdf).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ShapeError

CLASS_COLORS = ("#4878a8", "#d1495b")


def class_matrix(rows, resolution: int) -> np.ndarray:
    """Reshape row-major scan rows into an image matrix.

    Element [r, c] is the class at the point with the r-th x2 value and the
    c-th x1 value, so plotting with origin="lower" puts x1 on the horizontal
    axis and x2 on the vertical one.
    """
    if len(rows) != resolution * resolution:
        raise ShapeError(f"expected {resolution**2} rows, got {len(rows)}")
    classes = np.array([row[2] for row in rows], dtype=int)
    # scan order: x1 slowest, x2 fastest
    return classes.reshape(resolution, resolution).T


def save_boundary_figure(rows, grid, path, points=None, labels=None) -> None:
    """Render a scan as a class-colored cell raster, optionally with points.

    ``points`` is an (n, 2) array of training inputs and ``labels`` their
    classes; they are drawn on top of the raster.
    """
    matrix = class_matrix(rows, grid.resolution)
    fig, ax = plt.subplots(figsize=(6, 5))
    extent = (grid.grid_min, grid.grid_max, grid.grid_min, grid.grid_max)
    ax.imshow(
        matrix,
        origin="lower",
        extent=extent,
        cmap=matplotlib.colors.ListedColormap(CLASS_COLORS),
        vmin=0,
        vmax=1,
        interpolation="nearest",
        aspect="auto",
    )
    if points is not None:
        points = np.asarray(points, dtype=float)
        labels = np.asarray(labels if labels is not None else np.zeros(len(points)), dtype=int)
        for cls in np.unique(labels):
            mask = labels == cls
            ax.scatter(
                points[mask, 0],
                points[mask, 1],
                c=CLASS_COLORS[int(cls) % len(CLASS_COLORS)],
                edgecolors="black",
                linewidths=1.2,
                s=90,
                zorder=3,
                label=f"class {cls}",
            )
        ax.legend(loc="upper right", framealpha=0.9)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("decision boundary")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_history_figure(history, path) -> None:
    """Loss and training accuracy curves over epochs, one panel each."""
    epochs = [h.epoch for h in history]
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [h.loss for h in history], color=CLASS_COLORS[0])
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("loss")
    ax_acc.plot(epochs, [h.accuracy for h in history], color=CLASS_COLORS[1])
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

"""
CSV tables and SVG pictures of boundary maps.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .boundary_map import SampledCircleMap  # noqa: E402
from .fuchsian import SinkSample, format_word  # noqa: E402
from .moebius import TWO_PI  # noqa: E402

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def bmap_csv(path: PathLike, bmap: SampledCircleMap, generator_names: Optional[Sequence[str]] = None) -> Path:
    """Rows (x_angle, y_angle, word)"""

    def label(index):
        word = bmap.label(index)
        if word is None or generator_names is None:
            return ""
        return format_word(word, generator_names)

    rows = ((f"{x:.15g}", f"{y:.15g}", label(i)) for i, (x, y) in enumerate(zip(bmap.xs, bmap.ys)))
    return write_rows(path, ("x_angle", "y_angle", "word"), rows)


def sinks_csv(path: PathLike, sample: SinkSample, generator_names: Sequence[str]) -> Path:
    rows = ((f"{point.theta:.15g}", format_word(word, generator_names)) for word, point in sample.entries)
    return write_rows(path, ("angle", "word"), rows)


def bmap_svg(path: PathLike, bmap: SampledCircleMap, title: str = "Boundary map", max_chords: int = 400) -> Path:
    """Chords x -> y on the unit circle beside the graph of the map in angle coordinates"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, (circle_ax, graph_ax) = plt.subplots(1, 2, figsize=(12, 6))

    outline = np.linspace(0.0, TWO_PI, 400)
    circle_ax.plot(np.cos(outline), np.sin(outline), color="black", linewidth=0.8)
    stride = max(1, len(bmap) // max_chords)
    for x, y in zip(bmap.xs[::stride], bmap.ys[::stride]):
        circle_ax.plot([np.cos(x), np.cos(y)], [np.sin(x), np.sin(y)], color="tab:blue", linewidth=0.3, alpha=0.6)
    circle_ax.scatter(np.cos(bmap.xs), np.sin(bmap.xs), s=2, color="tab:red", label="source")
    circle_ax.scatter(np.cos(bmap.ys), np.sin(bmap.ys), s=2, color="tab:green", label="image")
    circle_ax.set_aspect("equal")
    circle_ax.set_axis_off()
    circle_ax.legend(loc="upper right", fontsize="small")

    grid = np.linspace(0.0, TWO_PI, 2000, endpoint=False)
    graph_ax.plot(grid, bmap.evaluate_angles(grid), ",", color="tab:blue")
    graph_ax.scatter(bmap.xs, bmap.ys, s=2, color="tab:red")
    graph_ax.set_xlim(0.0, TWO_PI)
    graph_ax.set_ylim(0.0, TWO_PI)
    graph_ax.set_xlabel("source angle")
    graph_ax.set_ylabel("image angle")
    graph_ax.grid(True, linestyle=":", alpha=0.6)

    fig.suptitle(f"{title} ({len(bmap)} samples)")
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path

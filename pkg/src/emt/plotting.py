"""Static SVG figures for a result directory."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PLOT_FILES = ("satisfaction.svg", "error.svg", "utility.svg")


def _save(fig, path: Path, extra: str = "") -> None:
    # Fixed hash salt and no date keep the SVG bytes reproducible.
    with plt.rc_context({"svg.hashsalt": "emt", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": extra or None})
    plt.close(fig)


def _frame(ax) -> str:
    """Axes box in SVG user units plus data limits, for reading coordinates back."""
    fig = ax.figure
    fig.canvas.draw()
    bb = ax.get_window_extent()
    scale = 72.0 / fig.dpi
    h = fig.get_figheight() * 72.0
    x0, x1 = float(bb.x0 * scale), float(bb.x1 * scale)
    top, bottom = float(h - bb.y1 * scale), float(h - bb.y0 * scale)
    xl = tuple(float(v) for v in ax.get_xlim())
    yl = tuple(float(v) for v in ax.get_ylim())
    return (f"axes={x0!r},{top!r},{x1!r},{bottom!r};xlim={xl[0]!r},{xl[1]!r};"
            f"ylim={yl[0]!r},{yl[1]!r};yscale={ax.get_yscale()}")


def plot_satisfaction(header, data, path: Path) -> None:
    t = data[:, 0]
    cols = [i for i, h in enumerate(header) if h.startswith("x_")]
    fig, ax = plt.subplots(figsize=(7, 4))
    for i in cols:
        ax.plot(t, data[:, i], lw=1.0, label=header[i])
    ax.set_xlabel("t")
    ax.set_ylabel("satisfaction")
    if len(cols) <= 8:
        ax.legend(fontsize=7, ncol=2)
    _save(fig, path)


def plot_error(times, gap, envelope, path: Path) -> None:
    pos = gap > 0
    if not pos.any():
        raise ValueError("alignment gap is identically zero; nothing to draw on a log scale")
    fig, ax = plt.subplots(figsize=(7, 4))
    line, = ax.plot(times[pos], gap[pos], lw=1.2, label="sup-norm gap")
    line.set_gid("gap")
    if envelope is not None:
        env, = ax.plot(times, envelope, "--", lw=1.0, label="k* exp(-lambda t)")
        env.set_gid("envelope")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("ideal vs delivered gap")
    ax.legend(fontsize=8)
    _save(fig, path, _frame(ax))


def plot_utility(header, data, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(data[:, 0], data[:, header.index("discounted_utility")], lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("running discounted utility")
    _save(fig, path)


def read_frame(svg_text: str) -> dict:
    """Parse the frame description written by :func:`plot_error`."""
    import re

    m = re.search(r"<dc:description>(.*?)</dc:description>", svg_text, re.S)
    if not m:
        raise ValueError("no frame description in SVG")
    out = {}
    for part in m.group(1).strip().split(";"):
        key, val = part.split("=", 1)
        out[key] = val if key == "yscale" else tuple(float(v) for v in val.split(","))
    return out


def line_points(svg_text: str, gid: str) -> np.ndarray:
    """Vertices of the path inside the group with id ``gid`` (SVG user units)."""
    import re

    m = re.search(rf'<g id="{gid}">\s*<path d="([^"]+)"', svg_text)
    if not m:
        raise ValueError(f"no path with id {gid!r}")
    nums = re.findall(r"-?\d+(?:\.\d+)?(?:e-?\d+)?", m.group(1))
    return np.array([float(v) for v in nums]).reshape(-1, 2)

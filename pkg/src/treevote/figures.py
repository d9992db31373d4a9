"""Chart rendering: standalone SVG curves and PNG overlay figures."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .numformat import format_fixed

ROC = "roc"
GAIN = "gain"

_AXIS_LABELS = {
    ROC: ("false positive rate", "true positive rate"),
    GAIN: ("fraction targeted", "fraction captured"),
}


def _check_points(points) -> list[tuple[float, float]]:
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    for x, y in pts:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError(f"point ({x}, {y}) outside the unit square")
    return pts


def _svg_xy(x: float, y: float) -> str:
    # Unit square maps to a 1000x1000 viewBox with the y axis flipped.
    return f"{format_fixed(1000.0 * x, 2)},{format_fixed(1000.0 - 1000.0 * y, 2)}"


def render_svg(points, kind: str, baseline: bool = False) -> str:
    """Standalone SVG polyline of unit-square points.

    kind labels the chart (roc or gain); baseline adds the diagonal
    reference line. Output is a pure function of the arguments.
    """
    if kind not in _AXIS_LABELS:
        raise ValueError(f"unknown chart kind {kind!r}")
    pts = _check_points(points)
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000">',
        f"  <title>{kind} curve</title>",
        '  <rect x="0" y="0" width="1000" height="1000" fill="none"'
        ' stroke="#808080" stroke-width="2"/>',
    ]
    if baseline:
        lines.append(
            f'  <line x1="{format_fixed(0, 2)}" y1="{format_fixed(1000, 2)}"'
            f' x2="{format_fixed(1000, 2)}" y2="{format_fixed(0, 2)}"'
            ' stroke="#b0b0b0" stroke-width="2" stroke-dasharray="8 8"/>'
        )
    coords = " ".join(_svg_xy(x, y) for x, y in pts)
    lines.append(
        f'  <polyline fill="none" stroke="#1f6fb2" stroke-width="3" points="{coords}"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def curves_png(curves, kind: str, title: str) -> bytes:
    """PNG overlaying one curve per class with the diagonal baseline.

    curves is an ordered list of (label, points). Same inputs render
    the same bytes.
    """
    if kind not in _AXIS_LABELS:
        raise ValueError(f"unknown chart kind {kind!r}")
    xlabel, ylabel = _AXIS_LABELS[kind]
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=100)
    ax.plot([0, 1], [0, 1], linestyle="--", color="#b0b0b0", label="baseline")
    for label, points in curves:
        pts = _check_points(points)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=label)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="lower right")
    buf = io.BytesIO()
    fig.savefig(buf, format="png")
    plt.close(fig)
    return buf.getvalue()

"""Evaluation metrics and reports.

Confusion matrix with an SPSS-style frequency table, accuracy and
error rate, binomial standard error, one-vs-rest ROC curves with
trapezoidal AUC, and cumulative gain curves.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import AucUndefinedError
from .numformat import format_number, percent_str

Point = tuple[float, float]


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts indexed (actual, predicted) in class order."""

    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        k = len(self.classes)
        if k == 0 or len(set(self.classes)) != k:
            raise ValueError("classes must be nonempty and unique")
        if len(self.counts) != k or any(len(row) != k for row in self.counts):
            raise ValueError("counts must be square in class order")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    def row_total(self, i: int) -> int:
        return sum(self.counts[i])

    def column_total(self, j: int) -> int:
        return sum(row[j] for row in self.counts)


def confusion(actual, predicted, classes) -> ConfusionMatrix:
    """Tally actual-by-predicted counts over aligned label lists."""
    actual = list(actual)
    predicted = list(predicted)
    classes = tuple(classes)
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted must have equal length")
    if not actual:
        raise ValueError("cannot tally zero rows")
    position = {c: k for k, c in enumerate(classes)}
    grid = [[0] * len(classes) for _ in classes]
    for a, p in zip(actual, predicted):
        if a not in position:
            raise ValueError(f"unknown actual label {a!r}")
        if p not in position:
            raise ValueError(f"unknown predicted label {p!r}")
        grid[position[a]][position[p]] += 1
    return ConfusionMatrix(classes=classes, counts=tuple(tuple(r) for r in grid))


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    trace = sum(cm.counts[k][k] for k in range(len(cm.classes)))
    return trace / total


def error_rate(cm: ConfusionMatrix) -> float:
    return 1.0 - accuracy(cm)


def std_error(error: float, n: int) -> float:
    """Binomial proportion standard error sqrt(e(1-e)/n)."""
    if not 0.0 <= error <= 1.0:
        raise ValueError(f"error rate must be in [0, 1], got {error}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.sqrt(error * (1.0 - error) / n)


@dataclass(frozen=True)
class RocCurve:
    """One-vs-rest ROC points (fpr, tpr) and the trapezoidal area."""

    points: tuple[Point, ...]
    auc: float

    def __post_init__(self) -> None:
        pts = self.points
        if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise ValueError("curve must run from (0,0) to (1,1)")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0 or y1 < y0:
                raise ValueError("curve must be nondecreasing")
        if abs(self.auc - _trapezoid(pts)) > 1e-12:
            raise ValueError("auc must equal the trapezoidal integral")


def _trapezoid(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def _score_groups(scores, actual, positive):
    """Descending-score tie groups as (positives, negatives) counts."""
    if len(scores) != len(actual):
        raise ValueError("scores and actual must have equal length")
    if any(not math.isfinite(s) for s in scores):
        raise ValueError("scores must be finite")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    groups = []
    at = 0
    while at < len(order):
        end = at
        while end < len(order) and scores[order[end]] == scores[order[at]]:
            end += 1
        pos = sum(1 for k in range(at, end) if actual[order[k]] == positive)
        groups.append((pos, end - at - pos))
        at = end
    return groups


def roc_auc(scores, actual, positive) -> RocCurve:
    """ROC curve for one class against the rest.

    Rows sort by descending score; a tie group contributes a single
    straight segment, so the curve is independent of input order.
    """
    scores = list(scores)
    actual = list(actual)
    groups = _score_groups(scores, actual, positive)
    n_pos = sum(p for p, _ in groups)
    n_neg = sum(q for _, q in groups)
    if n_pos == 0 or n_neg == 0:
        raise AucUndefinedError(
            f"AUC undefined: need both classes, got {n_pos} positive rows"
        )
    points = [(0.0, 0.0)]
    tp = fp = 0
    for pos, neg in groups:
        tp += pos
        fp += neg
        points.append((fp / n_neg, tp / n_pos))
    return RocCurve(points=tuple(points), auc=_trapezoid(points))


@dataclass(frozen=True)
class GainCurve:
    """Cumulative gain points (targeted_fraction, captured_fraction)."""

    points: tuple[Point, ...]

    def __post_init__(self) -> None:
        pts = self.points
        if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise ValueError("curve must run from (0,0) to (1,1)")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0 or y1 < y0:
                raise ValueError("curve must be nondecreasing")


def gain(scores, actual, positive) -> GainCurve:
    """Cumulative gain for one class: positives captured versus rows targeted."""
    scores = list(scores)
    actual = list(actual)
    groups = _score_groups(scores, actual, positive)
    n = len(scores)
    n_pos = sum(p for p, _ in groups)
    if n_pos == 0:
        raise AucUndefinedError(f"gain undefined: no rows of class {positive!r}")
    points = [(0.0, 0.0)]
    seen = captured = 0
    for pos, neg in groups:
        seen += pos + neg
        captured += pos
        points.append((seen / n, captured / n_pos))
    return GainCurve(points=tuple(points))


@dataclass(frozen=True)
class EvalSummary:
    """Headline numbers for one evaluated model."""

    accuracy: float
    error_rate: float
    std_error: float
    per_class_auc: tuple[float | None, ...]

    def __post_init__(self) -> None:
        if abs(self.accuracy + self.error_rate - 1.0) > 1e-12:
            raise ValueError("accuracy and error_rate must sum to 1")


def curve_csv(points) -> str:
    """Two-column CSV of curve points in the standard numeric format."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", "y"])
    for x, y in points:
        writer.writerow([format_number(x), format_number(y)])
    return out.getvalue()


_STAT_ROWS = ("count", "column %", "row %", "total %")


def _cell_values(cm: ConfusionMatrix, i: int, j: int) -> tuple[str, str, str, str]:
    count = cm.counts[i][j]
    return (
        str(count),
        percent_str(count, cm.column_total(j)),
        percent_str(count, cm.row_total(i)),
        percent_str(count, cm.total),
    )


def frequency_report(cm: ConfusionMatrix) -> str:
    """Text frequency table: count, column, row, and total percent per cell."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    header = ["actual", "stat"] + [f"predicted {c}" for c in cm.classes] + ["total"]
    body: list[list[str]] = []
    for i, name in enumerate(cm.classes):
        cells = [_cell_values(cm, i, j) for j in range(len(cm.classes))]
        for line, stat in enumerate(_STAT_ROWS):
            row = [name if line == 0 else "", stat]
            row.extend(cell[line] for cell in cells)
            row.append(str(cm.row_total(i)) if line == 0 else "")
            body.append(row)
    totals = ["total", "count"]
    totals.extend(str(cm.column_total(j)) for j in range(len(cm.classes)))
    totals.append(str(cm.total))
    body.append(totals)

    widths = [max(len(r[k]) for r in [header] + body) for k in range(len(header))]
    lines = []
    for row in [header] + body:
        padded = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        padded.extend(cell.rjust(w) for cell, w in zip(row[2:], widths[2:]))
        lines.append("  ".join(padded).rstrip())
    return "\n".join(lines) + "\n"


def frequency_csv(cm: ConfusionMatrix) -> str:
    """One CSV row per matrix cell with the four frequency statistics."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["actual", "predicted", "count", "column_percent", "row_percent", "total_percent"]
    )
    for i, a in enumerate(cm.classes):
        for j, p in enumerate(cm.classes):
            count, col_pct, row_pct, tot_pct = _cell_values(cm, i, j)
            writer.writerow([a, p, count, col_pct, row_pct, tot_pct])
    return out.getvalue()

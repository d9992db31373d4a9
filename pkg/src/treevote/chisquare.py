"""Chi-square association screening.

Pearson's statistic on feature-by-class contingency tables, upper-tail
p-values via the regularized incomplete gamma function, and the
screening report that ranks features and drops the weak ones.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_left
from dataclasses import dataclass

from .data import NUMERIC, Dataset
from .errors import DegenerateDataError, DegenerateTableError
from .numformat import format_number

_EPS = 1e-14
_MAX_ITER = 500
_FPMIN = 1e-300


@dataclass(frozen=True)
class ContingencyTable:
    """Observed counts of feature categories (rows) by class (columns)."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.counts or not self.counts[0]:
            raise ValueError("table must have at least one row and column")
        if any(len(r) != len(self.col_labels) for r in self.counts):
            raise ValueError("ragged table")
        if len(self.counts) != len(self.row_labels):
            raise ValueError("row label count mismatch")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be nonnegative")
        if sum(c for row in self.counts for c in row) <= 0:
            raise ValueError("table total must be positive")


def chi_square_stat(table: ContingencyTable) -> tuple[float, int]:
    """Pearson chi-square statistic and degrees of freedom.

    Rows and columns whose margin is zero are removed before computing
    expected counts and dof = (r-1)(c-1). A table that collapses to a
    single row or column has no testable association and raises
    ``DegenerateTableError``.
    """
    counts = table.counts
    row_sums = [sum(row) for row in counts]
    col_sums = [sum(col) for col in zip(*counts)]
    rows = [i for i, s in enumerate(row_sums) if s > 0]
    cols = [j for j, s in enumerate(col_sums) if s > 0]
    if len(rows) < 2 or len(cols) < 2:
        raise DegenerateTableError(
            "no association testable: table is degenerate after removing "
            "empty rows and columns"
        )
    total = sum(row_sums[i] for i in rows)
    stat = 0.0
    for i in rows:
        row = counts[i]
        ri = row_sums[i]
        for j in cols:
            expected = ri * col_sums[j] / total
            diff = row[j] - expected
            stat += diff * diff / expected
    dof = (len(rows) - 1) * (len(cols) - 1)
    return stat, dof


def _gamma_series(a: float, x: float) -> float:
    # Lower regularized incomplete gamma P(a, x) by series expansion.
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_cf(a: float, x: float) -> float:
    # Upper regularized incomplete gamma Q(a, x) by Lentz's continued
    # fraction; converges fast for x > a + 1.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi_square_pvalue(statistic: float, dof: int) -> float:
    """Upper-tail probability of a chi-square variate.

    Q(dof/2, statistic/2): series expansion below the a+1 crossover,
    continued fraction above it, both iterated to 1e-14 relative error.
    """
    if statistic < 0:
        raise ValueError(f"statistic must be nonnegative, got {statistic}")
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    a = dof / 2.0
    x = statistic / 2.0
    if x == 0.0:  # includes subnormal statistics that halve to zero
        return 1.0
    if x < a + 1.0:
        p = 1.0 - _gamma_series(a, x)
    else:
        p = _gamma_cf(a, x)
    return min(max(p, 0.0), 1.0)


def equal_frequency_cuts(values: list[float], max_bins: int) -> list[float]:
    """Cut points splitting ``values`` into equal-frequency bins.

    The bin count is exactly min(max_bins, distinct values); a value
    equal to a cut belongs to the lower bin. Cuts are observed values,
    strictly increasing, and never the maximum (no empty bins). When an
    order statistic lands on the maximum or on an earlier cut, the cut
    shifts to the nearest distinct value that keeps every bin nonempty.
    """
    ordered = sorted(values)
    n = len(ordered)
    distinct = sorted(set(ordered))
    d = len(distinct)
    n_bins = min(max_bins, d)
    if n_bins <= 1:
        return []
    rank = {v: i for i, v in enumerate(distinct)}
    cuts: list[float] = []
    prev = -1
    for k in range(1, n_bins):
        pos = min(max(round(k * n / n_bins), 1), n - 1)
        j = rank[ordered[pos - 1]]
        j = max(j, prev + 1)  # strictly increasing
        j = min(j, d - 1 - (n_bins - k))  # leave room; excludes the max
        cuts.append(distinct[j])
        prev = j
    return cuts


def bin_index(value: float, cuts: list[float] | tuple[float, ...]) -> int:
    """Index of the bin holding ``value``: bin i covers cuts[i-1] < v <= cuts[i]."""
    return bisect_left(cuts, value)


def _bin_labels(cuts: list[float]) -> list[str]:
    if not cuts:
        return ["all"]
    labels = [f"<= {format_number(cuts[0])}"]
    for lo, hi in zip(cuts, cuts[1:]):
        labels.append(f"({format_number(lo)}, {format_number(hi)}]")
    labels.append(f"> {format_number(cuts[-1])}")
    return labels


def contingency(data: Dataset, feature: str) -> ContingencyTable:
    """Cross-tabulate one feature against the target classes.

    Categorical features get one row per observed category (sorted);
    numeric features are equal-frequency binned into at most 10 bins,
    rows ordered by bin lower bound. Columns follow schema class order.
    """
    if feature == data.schema.target:
        raise ValueError("feature must not be the target column")
    col = data.schema.column(feature)  # raises KeyError when unknown
    values = data.column_values(feature)
    labels = data.target_values()
    classes = data.schema.classes
    class_pos = {c: k for k, c in enumerate(classes)}

    if col.kind == NUMERIC:
        cuts = equal_frequency_cuts(values, 10)
        row_labels = _bin_labels(cuts)
        rows = [[0] * len(classes) for _ in row_labels]
        for v, y in zip(values, labels):
            rows[bin_index(v, cuts)][class_pos[y]] += 1
    else:
        cats = sorted(set(values))
        cat_pos = {c: i for i, c in enumerate(cats)}
        row_labels = cats
        rows = [[0] * len(classes) for _ in cats]
        for v, y in zip(values, labels):
            rows[cat_pos[v]][class_pos[y]] += 1

    return ContingencyTable(
        row_labels=tuple(row_labels),
        col_labels=tuple(classes),
        counts=tuple(tuple(r) for r in rows),
    )


@dataclass(frozen=True)
class FeatureStat:
    name: str
    statistic: float
    dof: int
    p_value: float
    retained: bool


@dataclass(frozen=True)
class ChiSquareReport:
    """Per-feature screening results, strongest association first."""

    entries: tuple[FeatureStat, ...]
    alpha: float

    def retained_features(self) -> list[str]:
        return [e.name for e in self.entries if e.retained]

    def dropped_features(self) -> list[str]:
        return [e.name for e in self.entries if not e.retained]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["feature", "chi_square", "dof", "p_value", "retained"])
        for e in self.entries:
            writer.writerow(
                [
                    e.name,
                    format_number(e.statistic),
                    e.dof,
                    repr(e.p_value),
                    "true" if e.retained else "false",
                ]
            )
        return out.getvalue()


def select_features(data: Dataset, alpha: float) -> ChiSquareReport:
    """Screen every feature against the target at significance ``alpha``.

    Features whose table is degenerate (constant columns, single class)
    score statistic 0 with p-value 1 and are dropped. Entries are sorted
    by ascending p-value, ties by descending statistic.
    """
    if not 0.0 < alpha < 1.0:
        raise DegenerateDataError(f"alpha must be in (0, 1), got {alpha}")
    features = data.schema.feature_names()
    if not features:
        raise DegenerateDataError("dataset has no feature columns")

    entries = []
    for pos, name in enumerate(features):
        table = contingency(data, name)
        try:
            stat, dof = chi_square_stat(table)
            p = chi_square_pvalue(stat, dof)
        except DegenerateTableError:
            stat, dof, p = 0.0, 1, 1.0
        entries.append((p, -stat, pos, FeatureStat(name, stat, dof, p, p <= alpha)))

    entries.sort(key=lambda t: t[:3])
    return ChiSquareReport(entries=tuple(e[3] for e in entries), alpha=alpha)

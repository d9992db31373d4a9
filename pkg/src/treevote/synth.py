"""Synthetic worker-evaluation data.

Generates the 12-column worker schema plus an `evaluation` target whose
label is a pure function of production_rate via the banding rule:
Average below 1.0, Good from 1.0 to 1.1, Excellent above 1.1.
"""

from __future__ import annotations

from .data import CATEGORICAL, NUMERIC, Column, Dataset, Schema
from .errors import DegenerateDataError
from .numformat import round_half_up
from .rng import SeededRng, random_integer

CLASSES = ("Average", "Good", "Excellent")

# Class mix targets Average 22.7%, Good 52.1%, Excellent 25.2%.
_P_AVERAGE = 0.227
_P_GOOD = 0.521

# Production-rate bands per class, kept clear of the 1.0 and 1.1 label
# boundaries so rounding achieved production to 2 decimals (and rates to
# 6 decimals on CSV write) can never flip a label.
_RATE_BANDS = {
    "Average": (0.85, 0.993),
    "Good": (1.007, 1.09),
    "Excellent": (1.11, 1.30),
}

_ELAPSED_BY_UNIT = (90.0, 97.0, 104.0, 111.0, 118.0)


def worker_schema() -> Schema:
    return Schema(
        columns=(
            Column("operator", CATEGORICAL),
            Column("badge_no", NUMERIC),
            Column("job_title", CATEGORICAL),
            Column("base_production", NUMERIC),
            Column("production_achieved", NUMERIC),
            Column("incentive_wages", NUMERIC),
            Column("production_rate", NUMERIC),
            Column("labor_efficiency", NUMERIC),
            Column("machine", CATEGORICAL),
            Column("product", CATEGORICAL),
            Column("elapsed_time", NUMERIC),
            Column("unit", CATEGORICAL),
            Column("evaluation", CATEGORICAL),
        ),
        target="evaluation",
        classes=CLASSES,
    )


def evaluation_label(production_rate: float) -> str:
    """Band a production rate into its evaluation class."""
    if production_rate < 1.0:
        return "Average"
    if production_rate <= 1.1:
        return "Good"
    return "Excellent"


def generate_workers(seed: int, n: int) -> Dataset:
    """Generate ``n`` synthetic worker rows from ``seed``.

    production_rate, labor_efficiency, and incentive_wages carry the
    label signal. machine, product, unit, and elapsed_time are drawn
    from a single latent unit assignment with no label dependence, so
    they are pure noise with respect to evaluation. operator and
    badge_no are distinct per row; job_title is constant.

    Per-row draw order is fixed: class selector, base production,
    rate position, efficiency noise, piece rate, latent unit.
    """
    if n < 10:
        raise DegenerateDataError(f"need at least 10 rows, got {n}")
    rng = SeededRng(seed)
    rows = []
    for i in range(n):
        u_class = rng.next_float()
        if u_class < _P_AVERAGE:
            label_draw = "Average"
        elif u_class < _P_AVERAGE + _P_GOOD:
            label_draw = "Good"
        else:
            label_draw = "Excellent"

        base = float(random_integer(rng, 180, 260))
        lo, hi = _RATE_BANDS[label_draw]
        rate_draw = lo + (hi - lo) * rng.next_float()
        achieved = round_half_up(base * rate_draw, 2)
        rate = achieved / base

        efficiency = round_half_up(
            100.0 * (0.5 + 0.8 * (rate - 0.85)) + 5.0 * (rng.next_float() - 0.5), 2
        )
        piece_rate = 1.2 + 0.6 * rng.next_float()
        wages = round_half_up(max(0.0, achieved - base) * piece_rate, 2)

        unit_idx = random_integer(rng, 0, 4)

        rows.append(
            (
                f"op{i + 1:03d}",
                float(1000 + i),
                "operator",
                base,
                achieved,
                wages,
                rate,
                efficiency,
                f"mc{unit_idx + 1}",
                f"pr{unit_idx + 1}",
                _ELAPSED_BY_UNIT[unit_idx],
                f"u{unit_idx + 1}",
                evaluation_label(rate),
            )
        )
    return Dataset(schema=worker_schema(), rows=tuple(rows))

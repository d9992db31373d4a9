"""Bootstrap resampling and stratified train/test splitting."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .data import Dataset
from .errors import DegenerateDataError
from .rng import SeededRng, random_integer


@dataclass(frozen=True)
class BootstrapSample:
    """Row indices chosen by one bootstrap draw, in draw order."""

    indices: tuple[int, ...]


def bootstrap(data: Dataset, rng: SeededRng) -> tuple[Dataset, BootstrapSample]:
    """Draw N rows with replacement from an N-row dataset.

    Every index comes from ``random_integer(rng, 0, N-1)``, so the whole
    sample is a pure function of the rng state.
    """
    n = data.n_rows
    if n == 0:
        raise DegenerateDataError("cannot bootstrap an empty dataset")
    indices = tuple(random_integer(rng, 0, n - 1) for _ in range(n))
    return data.subset(indices), BootstrapSample(indices)


def _shuffle(items: list[int], rng: SeededRng) -> None:
    # Fisher-Yates on top of the deterministic integer draw.
    for i in range(len(items) - 1, 0, -1):
        j = random_integer(rng, 0, i)
        items[i], items[j] = items[j], items[i]


def stratified_split(
    data: Dataset, test_fraction: float, rng: SeededRng
) -> tuple[Dataset, Dataset]:
    """Per-class shuffle-then-split.

    The test set receives round(count * test_fraction) rows of each
    class, halves rounded up. Train and test partition the data exactly.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateDataError(
            f"test_fraction must be in (0, 1), got {test_fraction}"
        )
    by_class: dict[str, list[int]] = {c: [] for c in data.schema.classes}
    t_idx = data.schema.target_index
    for i, row in enumerate(data.rows):
        by_class[row[t_idx]].append(i)

    test_idx: list[int] = []
    train_idx: list[int] = []
    frac = Decimal(repr(test_fraction))
    for label in data.schema.classes:
        members = by_class[label]
        if not members:
            continue
        if len(members) < 2:
            raise DegenerateDataError(
                f"class {label!r} has fewer than 2 rows; cannot split"
            )
        _shuffle(members, rng)
        k = int((Decimal(len(members)) * frac).quantize(0, rounding=ROUND_HALF_UP))
        test_idx.extend(members[:k])
        train_idx.extend(members[k:])

    return data.subset(train_idx), data.subset(test_idx)

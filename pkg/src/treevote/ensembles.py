"""Ensemble construction and voting.

Homogeneous bootstrap bagging, SAMME multiclass boosting, random
forests, and the heterogeneous committee that votes one prediction
across different tree families.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .data import Dataset
from .errors import DegenerateDataError, SchemaMismatchError
from .rng import SeededRng, derive_seed
from .sampling import bootstrap
from .trees import (
    CART,
    CART_DEFAULTS,
    CHAID,
    CHAID_DEFAULTS,
    EXHAUSTIVE_CHAID,
    DecisionTree,
    TreeParams,
    predict,
    predict_dist,
    train_cart,
    train_chaid,
    train_exhaustive_chaid,
)

MAJORITY = "majority"
WEIGHTED_MAJORITY = "weighted-majority"

# Weight cap for boosting rounds; ln(1e10) keeps exp(alpha) finite.
ALPHA_CAP = math.log(1e10)

_BASE_TRAINERS = {
    CART: (train_cart, CART_DEFAULTS),
    CHAID: (train_chaid, CHAID_DEFAULTS),
    EXHAUSTIVE_CHAID: (train_exhaustive_chaid, CHAID_DEFAULTS),
}


@dataclass(frozen=True)
class EnsembleModel:
    """Ordered members with positive weights and a vote rule."""

    members: tuple[tuple[object, float], ...]
    aggregation: str
    class_order: tuple[str, ...]
    kind: str = "ensemble"

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        for _, weight in self.members:
            if not math.isfinite(weight) or weight <= 0:
                raise ValueError("member weights must be finite and positive")
        if self.aggregation not in (MAJORITY, WEIGHTED_MAJORITY):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if not self.class_order:
            raise ValueError("class_order must be nonempty")
        if len(set(self.class_order)) != len(self.class_order):
            raise ValueError("class_order must be unique")


def model_predict(model, row) -> str:
    """Predicted class from a tree or ensemble."""
    if isinstance(model, DecisionTree):
        return predict(model, row)
    return vote(model, row)


def model_dist(model, row) -> tuple[float, ...]:
    """Class distribution from a tree or ensemble, in class order.

    For an ensemble this is the weight-normalized mean of the member
    distributions.
    """
    if isinstance(model, DecisionTree):
        return predict_dist(model, row)
    total_w = sum(w for _, w in model.members)
    sums = [0.0] * len(model.class_order)
    for member, weight in model.members:
        dist = model_dist(member, row)
        for k, p in enumerate(dist):
            sums[k] += weight * p
    return tuple(s / total_w for s in sums)


def vote(ensemble: EnsembleModel, row) -> str:
    """Weighted indicator vote over the members.

    Ties go to the class with the largest sum of weighted member
    probabilities, then to the earliest class in class_order.
    """
    order = ensemble.class_order
    position = {c: k for k, c in enumerate(order)}
    totals = [0.0] * len(order)
    picks = []
    for member, weight in ensemble.members:
        label = model_predict(member, row)
        if label not in position:
            raise SchemaMismatchError(f"member predicted unknown class {label!r}")
        totals[position[label]] += weight
        picks.append((member, weight))
    top = max(totals)
    tied = [k for k, t in enumerate(totals) if t == top]
    if len(tied) == 1:
        return order[tied[0]]
    prob_sums = {k: 0.0 for k in tied}
    for member, weight in picks:
        dist = model_dist(member, row)
        for k in tied:
            prob_sums[k] += weight * dist[k]
    best = max(prob_sums.values())
    for k in tied:
        if prob_sums[k] == best:
            return order[k]
    raise AssertionError("unreachable")


def _bootstrap_data(data: Dataset, rng: SeededRng) -> Dataset:
    resampled, _ = bootstrap(data, rng)
    return resampled


def _train_bag_member(args) -> DecisionTree:
    kind, params, train, seed, resample, mtry = args
    member_rng = SeededRng(seed)
    sample = resample(train, member_rng)
    if kind == CART and mtry is not None:
        return train_cart(sample, params, mtry=mtry, rng=member_rng)
    trainer, _ = _BASE_TRAINERS[kind]
    return trainer(sample, params)


def _run_members(tasks, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_train_bag_member, tasks))
    return [_train_bag_member(task) for task in tasks]


def bag(
    base_kind: str,
    train: Dataset,
    m: int,
    rng: SeededRng,
    *,
    base_params: TreeParams | None = None,
    resample=None,
    workers: int = 1,
) -> EnsembleModel:
    """Train ``m`` copies of one base learner on bootstrap resamples.

    Member i draws its sample from a fresh rng seeded with the
    splitmix64 output of (rng.state + i), i counted from 1, so members
    can train in parallel without changing the result. The passed rng
    is read, never advanced. The resample hook (data, rng) -> Dataset
    replaces bootstrapping in tests.
    """
    if base_kind not in _BASE_TRAINERS:
        raise ValueError(f"unknown base learner {base_kind!r}")
    if m < 1:
        raise ValueError("member count must be >= 1")
    if train.n_rows == 0:
        raise DegenerateDataError("cannot bag an empty dataset")
    _, defaults = _BASE_TRAINERS[base_kind]
    params = base_params if base_params is not None else defaults
    resample = resample if resample is not None else _bootstrap_data
    tasks = [
        (base_kind, params, train, derive_seed(rng.state, i), resample, None)
        for i in range(1, m + 1)
    ]
    trees = _run_members(tasks, workers)
    return EnsembleModel(
        members=tuple((tree, 1.0) for tree in trees),
        aggregation=MAJORITY,
        class_order=train.schema.classes,
        kind="bagged",
    )


@dataclass(frozen=True)
class BoostParams:
    rounds: int = 50
    base_max_depth: int = 3
    learning_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.base_max_depth < 1:
            raise ValueError("base_max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")


def train_boosted(
    train: Dataset, params: BoostParams = BoostParams(), rng: SeededRng | None = None
) -> EnsembleModel:
    """SAMME boosting over depth-limited CART trees.

    Row weights start uniform; each round trains a weighted tree,
    scores its weighted error, and reweights mistakes by exp(alpha)
    with alpha = learning_rate * (ln((1-e)/e) + ln(K-1)), capped at
    ln(1e10). A round with error >= 1 - 1/K is discarded and stops
    the loop; a perfect round is kept at the cap and stops it. The
    rng argument is accepted for signature parity and never used:
    the procedure is deterministic.
    """
    del rng
    n = train.n_rows
    if n == 0:
        raise DegenerateDataError("cannot boost an empty dataset")
    labels = train.target_values()
    k = len(set(labels))
    if k < 2:
        raise DegenerateDataError("boosting needs at least 2 classes present")
    base_params = TreeParams(
        max_depth=params.base_max_depth, min_samples_split=2, min_samples_leaf=1
    )
    records = [train.row_record(i) for i in range(n)]
    weights = [1.0 / n] * n
    members = []
    for _ in range(params.rounds):
        tree = train_cart(train, base_params, weights=tuple(weights))
        wrong = [i for i in range(n) if predict(tree, records[i]) != labels[i]]
        error = sum(weights[i] for i in wrong)
        if error >= 1.0 - 1.0 / k:
            break
        if error == 0.0:
            members.append((tree, ALPHA_CAP))
            break
        raw = math.log((1.0 - error) / error) + math.log(k - 1)
        alpha = min(params.learning_rate * raw, ALPHA_CAP)
        members.append((tree, alpha))
        boost = math.exp(alpha)
        for i in wrong:
            weights[i] *= boost
        total = sum(weights)
        weights = [w / total for w in weights]
    if not members:
        raise DegenerateDataError("boosting degenerate: no rounds survived")
    return EnsembleModel(
        members=tuple(members),
        aggregation=WEIGHTED_MAJORITY,
        class_order=train.schema.classes,
        kind="boosted",
    )


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry: int | None = None

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")


def default_mtry(n_features: int) -> int:
    return math.ceil(math.sqrt(n_features))


def train_random_forest(
    train: Dataset,
    params: ForestParams = ForestParams(),
    rng: SeededRng | None = None,
    *,
    resample=None,
    workers: int = 1,
) -> EnsembleModel:
    """Bootstrap CART forest with per-node feature sampling.

    Every tree grows unlimited depth with min_samples_leaf 1; each
    split sees a fresh sample of mtry features drawn without
    replacement (default ceil(sqrt(feature count))). Member seeds
    derive from the rng state as in bag, so the rng never advances.
    """
    if train.n_rows == 0:
        raise DegenerateDataError("cannot train a forest on an empty dataset")
    if rng is None:
        rng = SeededRng(0)
    n_features = len(train.schema.feature_names())
    mtry = params.mtry if params.mtry is not None else default_mtry(n_features)
    if mtry > n_features:
        raise ValueError(f"mtry {mtry} exceeds feature count {n_features}")
    tree_params = TreeParams(max_depth=None, min_samples_split=2, min_samples_leaf=1)
    resample = resample if resample is not None else _bootstrap_data
    tasks = [
        (CART, tree_params, train, derive_seed(rng.state, i), resample, mtry)
        for i in range(1, params.n_trees + 1)
    ]
    trees = _run_members(tasks, workers)
    return EnsembleModel(
        members=tuple((tree, 1.0) for tree in trees),
        aggregation=MAJORITY,
        class_order=train.schema.classes,
        kind="random_forest",
    )


def _model_classes(model) -> tuple[str, ...]:
    if isinstance(model, DecisionTree):
        return model.schema.classes
    return model.class_order


def committee(models) -> EnsembleModel:
    """Equal-weight majority vote across heterogeneous trained models."""
    members = tuple(models)
    if not members:
        raise ValueError("committee needs at least one model")
    class_order = _model_classes(members[0])
    for model in members[1:]:
        if _model_classes(model) != class_order:
            raise SchemaMismatchError("committee members disagree on classes")
    return EnsembleModel(
        members=tuple((model, 1.0) for model in members),
        aggregation=MAJORITY,
        class_order=class_order,
        kind="committee",
    )

"""Decision-tree induction.

CART grows binary trees by greedy Gini reduction. CHAID and its
exhaustive variant grow multi-way trees by merging feature categories
under pairwise chi-square tests and splitting on the feature with the
smallest Bonferroni-adjusted p-value. Prediction routes rows to leaves
and reads off class counts.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .chisquare import (
    ContingencyTable,
    bin_index,
    chi_square_pvalue,
    chi_square_stat,
    equal_frequency_cuts,
)
from .data import CATEGORICAL, NUMERIC, Dataset, Schema
from .errors import DegenerateDataError, DegenerateTableError, SchemaMismatchError
from .rng import SeededRng, random_integer

CART = "cart"
CHAID = "chaid"
EXHAUSTIVE_CHAID = "exhaustive_chaid"

THRESHOLD = "threshold"
CATEGORIES = "categories"
INTERVALS = "intervals"


@dataclass(frozen=True)
class TreeParams:
    """Stopping and significance knobs shared by the tree learners."""

    max_depth: int | None = None
    min_samples_split: int = 5
    min_samples_leaf: int = 2
    alpha_merge: float = 0.05
    alpha_split: float = 0.05
    numeric_bins: int = 10

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        for name in ("alpha_merge", "alpha_split"):
            alpha = getattr(self, name)
            if not 0.0 < alpha < 1.0:
                raise ValueError(f"{name} must be in (0, 1)")
        if self.numeric_bins < 2:
            raise ValueError("numeric_bins must be >= 2")


CART_DEFAULTS = TreeParams()
CHAID_DEFAULTS = TreeParams(max_depth=5)


@dataclass(frozen=True)
class SplitRule:
    """One routing decision at an internal node.

    kind "threshold": numeric; branch 0 takes value <= threshold.
    kind "categories": one branch per disjoint category group.
    kind "intervals": binned numeric; branch i takes
    boundaries[i-1] < value <= boundaries[i], open at the ends.
    """

    feature: str
    kind: str
    threshold: float | None = None
    groups: tuple[tuple[str, ...], ...] | None = None
    boundaries: tuple[float, ...] | None = None
    adjusted_p: float | None = None
    bonferroni_multiplier: int | None = None

    def __post_init__(self) -> None:
        if self.kind == THRESHOLD:
            if self.threshold is None:
                raise ValueError("threshold rule needs a threshold value")
        elif self.kind == CATEGORIES:
            if self.groups is None or len(self.groups) < 2:
                raise ValueError("category rule needs at least 2 groups")
            members = [c for group in self.groups for c in group]
            if len(members) != len(set(members)):
                raise ValueError("category groups must be disjoint")
            if any(not group for group in self.groups):
                raise ValueError("category groups must be nonempty")
        elif self.kind == INTERVALS:
            if not self.boundaries:
                raise ValueError("interval rule needs boundaries")
            pairs = zip(self.boundaries, self.boundaries[1:])
            if any(a >= b for a, b in pairs):
                raise ValueError("boundaries must be strictly increasing")
        else:
            raise ValueError(f"unknown rule kind: {self.kind!r}")
        if self.bonferroni_multiplier is not None and self.bonferroni_multiplier < 1:
            raise ValueError("bonferroni multiplier must be >= 1")

    def branch_count(self) -> int:
        if self.kind == THRESHOLD:
            return 2
        if self.kind == CATEGORIES:
            return len(self.groups)
        return len(self.boundaries) + 1

    def route(self, value: object) -> int | None:
        """Branch index for a feature value; None when the category is unseen."""
        if self.kind == THRESHOLD:
            return 0 if value <= self.threshold else 1
        if self.kind == INTERVALS:
            return bisect_left(self.boundaries, value)
        for branch, group in enumerate(self.groups):
            if value in group:
                return branch
        return None


@dataclass(frozen=True)
class TreeNode:
    """Internal node (rule + children) or leaf (rule None).

    class_counts follow schema class order; they are row counts for
    plain training and weight totals for weighted training.
    """

    class_counts: tuple[float, ...]
    prediction: str
    distribution: tuple[float, ...]
    rule: SplitRule | None = None
    children: tuple[TreeNode, ...] = ()

    def __post_init__(self) -> None:
        if self.rule is None:
            if self.children:
                raise ValueError("leaf must not have children")
        elif len(self.children) != self.rule.branch_count():
            raise ValueError("children count must match rule branch count")
        if abs(sum(self.distribution) - 1.0) > 1e-12:
            raise ValueError("distribution must sum to 1")
        if any(c < 0 for c in self.class_counts):
            raise ValueError("class counts must be nonnegative")

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

    @property
    def total(self) -> float:
        return sum(self.class_counts)


@dataclass(frozen=True)
class DecisionTree:
    schema: Schema
    root: TreeNode
    kind: str

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(child) for child in node.children)

        return walk(self.root)

    def leaves(self) -> list[TreeNode]:
        out: list[TreeNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p_k^2); 0 for a pure node."""
    counts = list(class_counts)
    if not counts:
        raise ValueError("class counts must be nonempty")
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be nonnegative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("total count must be positive")
    return 1.0 - sum((c / total) ** 2 for c in counts)


def _node_fields(counts: list[float]) -> tuple[tuple[float, ...], int, tuple[float, ...]]:
    total = sum(counts)
    if total > 0.0:
        dist = tuple(c / total for c in counts)
    else:
        dist = tuple(1.0 / len(counts) for _ in counts)
    best = max(range(len(counts)), key=lambda k: (counts[k], -k))
    return tuple(counts), best, dist


def _impurity(counts: list[float]) -> float:
    total = sum(counts)
    if total <= 0.0:
        return 0.0
    return 1.0 - sum((c / total) ** 2 for c in counts)


def train_cart(
    train: Dataset,
    params: TreeParams = CART_DEFAULTS,
    *,
    weights: tuple[float, ...] | None = None,
    mtry: int | None = None,
    rng: SeededRng | None = None,
) -> DecisionTree:
    """Greedy binary CART minimizing weighted child Gini.

    Numeric candidates are midpoints of consecutive distinct values;
    categorical candidates put one category against the rest. Score
    ties go to the earliest schema feature, then the smallest
    threshold or lexicographically first category. A best split is
    accepted even at zero gain, so impure nodes keep splitting until
    purity or a stopping limit.

    weights, when given, are per-row nonnegative reals folded into the
    impurity and the leaf counts. mtry with rng restricts each split
    to a fresh random sample of mtry features without replacement.
    """
    if train.n_rows == 0:
        raise DegenerateDataError("cannot train on an empty dataset")
    schema = train.schema
    classes = schema.classes
    features = schema.feature_names()
    if weights is None:
        row_weights = [1.0] * train.n_rows
    else:
        if len(weights) != train.n_rows:
            raise ValueError("weights length must match row count")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        row_weights = list(weights)
    if mtry is not None:
        if mtry < 1:
            raise ValueError("mtry must be >= 1")
        if rng is None:
            raise ValueError("mtry sampling needs an rng")

    columns = {name: train.column_values(name) for name in features}
    kinds = {name: schema.column(name).kind for name in features}
    feature_pos = {name: i for i, name in enumerate(features)}
    y = [schema.class_index(label) for label in train.target_values()]
    msl = params.min_samples_leaf

    def sample_features() -> list[str]:
        if mtry is None or mtry >= len(features):
            return list(features)
        pool = list(range(len(features)))
        for k in range(mtry):
            j = random_integer(rng, k, len(pool) - 1)
            pool[k], pool[j] = pool[j], pool[k]
        return [features[i] for i in sorted(pool[:mtry])]

    def class_weight_counts(idxs: list[int]) -> list[float]:
        counts = [0.0] * len(classes)
        for i in idxs:
            counts[y[i]] += row_weights[i]
        return counts

    def best_split(idxs: list[int]):
        best = None  # (score, feature_pos, sub_key, rule, partition)
        for name in sample_features():
            col = columns[name]
            pos = feature_pos[name]
            if kinds[name] == NUMERIC:
                order = sorted(idxs, key=lambda i: col[i])
                left_counts = [0.0] * len(classes)
                left_rows = 0
                total_counts = class_weight_counts(idxs)
                total_w = sum(total_counts)
                for at in range(len(order) - 1):
                    i = order[at]
                    left_counts[y[i]] += row_weights[i]
                    left_rows += 1
                    if col[i] == col[order[at + 1]]:
                        continue
                    if left_rows < msl or len(order) - left_rows < msl:
                        continue
                    right_counts = [t - l for t, l in zip(total_counts, left_counts)]
                    lw = sum(left_counts)
                    score = (
                        lw * _impurity(left_counts)
                        + (total_w - lw) * _impurity(right_counts)
                    ) / total_w
                    threshold = (col[i] + col[order[at + 1]]) / 2.0
                    key = (score, pos, threshold)
                    if best is None or key < best[:3]:
                        rule = SplitRule(name, THRESHOLD, threshold=threshold)
                        left = [j for j in idxs if col[j] <= threshold]
                        right = [j for j in idxs if col[j] > threshold]
                        best = (score, pos, threshold, rule, [left, right])
            else:
                cats = sorted(set(col[i] for i in idxs))
                if len(cats) < 2:
                    continue
                per_cat: dict[str, list[float]] = {c: [0.0] * len(classes) for c in cats}
                cat_rows = {c: 0 for c in cats}
                for i in idxs:
                    per_cat[col[i]][y[i]] += row_weights[i]
                    cat_rows[col[i]] += 1
                total_counts = class_weight_counts(idxs)
                total_w = sum(total_counts)
                for cat in cats:
                    if cat_rows[cat] < msl or len(idxs) - cat_rows[cat] < msl:
                        continue
                    inside = per_cat[cat]
                    outside = [t - c for t, c in zip(total_counts, inside)]
                    iw = sum(inside)
                    score = (
                        iw * _impurity(inside)
                        + (total_w - iw) * _impurity(outside)
                    ) / total_w
                    key = (score, pos, cat)
                    if best is None or key < best[:3]:
                        rest = tuple(c for c in cats if c != cat)
                        rule = SplitRule(name, CATEGORIES, groups=((cat,), rest))
                        left = [j for j in idxs if col[j] == cat]
                        right = [j for j in idxs if col[j] != cat]
                        best = (score, pos, cat, rule, [left, right])
        return best

    def grow(idxs: list[int], depth: int) -> TreeNode:
        counts = class_weight_counts(idxs)
        stored, best_class, dist = _node_fields(counts)
        pure = len(set(y[i] for i in idxs)) == 1
        can_split = (
            not pure
            and len(idxs) >= params.min_samples_split
            and (params.max_depth is None or depth < params.max_depth)
        )
        chosen = best_split(idxs) if can_split else None
        if chosen is None:
            return TreeNode(stored, classes[best_class], dist)
        _, _, _, rule, partition = chosen
        children = tuple(grow(part, depth + 1) for part in partition)
        return TreeNode(stored, classes[best_class], dist, rule=rule, children=children)

    root = grow(list(range(train.n_rows)), 0)
    return DecisionTree(schema=schema, root=root, kind=CART)


def bonferroni_nominal(categories: int, groups: int) -> int:
    """Ways to partition ``categories`` free categories into ``groups`` groups."""
    total = sum(
        (-1) ** i * math.comb(groups, i) * (groups - i) ** categories
        for i in range(groups)
    )
    return total // math.factorial(groups)


def bonferroni_ordinal(categories: int, groups: int) -> int:
    """Ways to cut ``categories`` ordered categories into ``groups`` runs."""
    return math.comb(categories - 1, groups - 1)


def _pair_pvalue(a: list[int], b: list[int], classes: tuple[str, ...]) -> float:
    # Indistinguishable groups (degenerate 2xK table) count as p = 1.
    table = ContingencyTable(("a", "b"), classes, (tuple(a), tuple(b)))
    try:
        stat, dof = chi_square_stat(table)
    except DegenerateTableError:
        return 1.0
    return chi_square_pvalue(stat, dof)


def _grouping_pvalue(
    group_counts: list[list[int]], classes: tuple[str, ...]
) -> float | None:
    rows = tuple(tuple(g) for g in group_counts)
    labels = tuple(str(i) for i in range(len(rows)))
    try:
        stat, dof = chi_square_stat(ContingencyTable(labels, classes, rows))
    except DegenerateTableError:
        return None
    return chi_square_pvalue(stat, dof)


def _merge_step(
    groups: list[tuple],
    counts: list[list[int]],
    classes: tuple[str, ...],
    ordinal: bool,
) -> tuple[int, int, float]:
    """Pick the least-significantly-different pair (largest p, earliest pair)."""
    best: tuple[int, int, float] | None = None
    for i in range(len(groups) - 1):
        j_range = (i + 1,) if ordinal else range(i + 1, len(groups))
        for j in j_range:
            p = _pair_pvalue(counts[i], counts[j], classes)
            if best is None or p > best[2]:
                best = (i, j, p)
    return best


def _analyze_feature(
    tokens: list,
    idxs: list[int],
    y: list[int],
    classes: tuple[str, ...],
    ordinal: bool,
    params: TreeParams,
    exhaustive: bool,
):
    """Merge categories and test the final grouping.

    Returns (adjusted_p, bonferroni, groups, row_partition) or None when
    the feature cannot split this node. groups are tuples of category
    tokens; nominal groups are kept sorted by signature, ordinal groups
    stay in value order and only adjacent groups merge.
    """
    observed = sorted(set(tokens[i] for i in idxs))
    c = len(observed)
    if c < 2:
        return None
    groups = [(tok,) for tok in observed]
    counts = []
    for tok in observed:
        vec = [0] * len(classes)
        for i in idxs:
            if tokens[i] == tok:
                vec[y[i]] += 1
        counts.append(vec)

    def merge(i: int, j: int) -> None:
        merged = tuple(sorted(groups[i] + groups[j])) if not ordinal else groups[i] + groups[j]
        summed = [a + b for a, b in zip(counts[i], counts[j])]
        del groups[j], counts[j]
        groups[i], counts[i] = merged, summed
        if not ordinal:
            order = sorted(range(len(groups)), key=lambda k: groups[k])
            groups[:] = [groups[k] for k in order]
            counts[:] = [counts[k] for k in order]

    if exhaustive:
        best_state = None  # (p, groups snapshot, counts snapshot)
        p0 = _grouping_pvalue(counts, classes)
        if p0 is not None:
            best_state = (p0, list(groups), [list(v) for v in counts])
        while len(groups) > 2:
            i, j, _ = _merge_step(groups, counts, classes, ordinal)
            merge(i, j)
            p = _grouping_pvalue(counts, classes)
            if p is not None and (best_state is None or p < best_state[0]):
                best_state = (p, list(groups), [list(v) for v in counts])
        if best_state is None:
            return None
        raw_p, groups, counts = best_state
    else:
        while len(groups) > 2:
            i, j, p = _merge_step(groups, counts, classes, ordinal)
            if p <= params.alpha_merge:
                break
            merge(i, j)
        raw_p = _grouping_pvalue(counts, classes)
        if raw_p is None:
            return None

    g = len(groups)
    if g < 2:
        return None
    multiplier = (
        bonferroni_ordinal(c, g) if ordinal else bonferroni_nominal(c, g)
    )
    adjusted = min(1.0, multiplier * raw_p)

    member_of = {tok: k for k, group in enumerate(groups) for tok in group}
    partition: list[list[int]] = [[] for _ in groups]
    for i in idxs:
        partition[member_of[tokens[i]]].append(i)
    if any(len(part) < params.min_samples_leaf for part in partition):
        return None
    return adjusted, multiplier, [tuple(g) for g in groups], partition


def _train_chaid(train: Dataset, params: TreeParams, exhaustive: bool) -> DecisionTree:
    if train.n_rows == 0:
        raise DegenerateDataError("cannot train on an empty dataset")
    schema = train.schema
    classes = schema.classes
    features = schema.feature_names()
    y = [schema.class_index(label) for label in train.target_values()]

    # Numeric features are binned once over the whole training set and
    # handled as ordinal bin indices from then on.
    tokens: dict[str, list] = {}
    cuts: dict[str, list[float]] = {}
    is_ordinal: dict[str, bool] = {}
    for name in features:
        col = train.column_values(name)
        if schema.column(name).kind == NUMERIC:
            cut = equal_frequency_cuts(col, params.numeric_bins)
            cuts[name] = cut
            tokens[name] = [bin_index(v, cut) for v in col]
            is_ordinal[name] = True
        else:
            tokens[name] = list(col)
            is_ordinal[name] = False

    def build_rule(name: str, analysis) -> SplitRule:
        adjusted, multiplier, groups, _ = analysis
        if is_ordinal[name]:
            boundaries = tuple(cuts[name][group[-1]] for group in groups[:-1])
            return SplitRule(
                name,
                INTERVALS,
                boundaries=boundaries,
                adjusted_p=adjusted,
                bonferroni_multiplier=multiplier,
            )
        return SplitRule(
            name,
            CATEGORIES,
            groups=tuple(groups),
            adjusted_p=adjusted,
            bonferroni_multiplier=multiplier,
        )

    def grow(idxs: list[int], depth: int) -> TreeNode:
        counts = [0.0] * len(classes)
        for i in idxs:
            counts[y[i]] += 1.0
        stored, best_class, dist = _node_fields(counts)
        pure = len(set(y[i] for i in idxs)) == 1
        can_split = (
            not pure
            and len(idxs) >= params.min_samples_split
            and (params.max_depth is None or depth < params.max_depth)
        )
        chosen = None
        if can_split:
            for name in features:
                analysis = _analyze_feature(
                    tokens[name], idxs, y, classes, is_ordinal[name], params, exhaustive
                )
                if analysis is None:
                    continue
                if chosen is None or analysis[0] < chosen[1][0]:
                    chosen = (name, analysis)
        if chosen is None or chosen[1][0] > params.alpha_split:
            return TreeNode(stored, classes[best_class], dist)
        name, analysis = chosen
        rule = build_rule(name, analysis)
        children = tuple(grow(part, depth + 1) for part in analysis[3])
        return TreeNode(stored, classes[best_class], dist, rule=rule, children=children)

    root = grow(list(range(train.n_rows)), 0)
    kind = EXHAUSTIVE_CHAID if exhaustive else CHAID
    return DecisionTree(schema=schema, root=root, kind=kind)


def train_chaid(train: Dataset, params: TreeParams = CHAID_DEFAULTS) -> DecisionTree:
    """CHAID: merge while the least different pair is insignificant, then split.

    Merging stops once every remaining pair differs at alpha_merge or
    only two groups remain. The split goes to the feature with the
    smallest Bonferroni-adjusted p-value when that is <= alpha_split.
    """
    return _train_chaid(train, params, exhaustive=False)


def train_exhaustive_chaid(train: Dataset, params: TreeParams = CHAID_DEFAULTS) -> DecisionTree:
    """CHAID variant that merges all the way down to two groups.

    Every grouping along the merge path is scored, the starting one
    included, and the grouping with the smallest raw p-value is used
    for the feature's split candidate.
    """
    return _train_chaid(train, params, exhaustive=True)


def _check_record(schema: Schema, row) -> None:
    for col in schema.columns:
        if col.name == schema.target:
            continue
        if col.name not in row:
            raise SchemaMismatchError(f"row is missing feature {col.name!r}")
        value = row[col.name]
        if col.kind == NUMERIC:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaMismatchError(f"feature {col.name!r} must be numeric")
        elif not isinstance(value, str):
            raise SchemaMismatchError(f"feature {col.name!r} must be categorical")


def _route(tree: DecisionTree, row) -> TreeNode:
    _check_record(tree.schema, row)
    node = tree.root
    while not node.is_leaf:
        branch = node.rule.route(row[node.rule.feature])
        if branch is None:
            kids = node.children
            branch = max(range(len(kids)), key=lambda b: (kids[b].total, -b))
        node = node.children[branch]
    return node


def predict(tree: DecisionTree, row) -> str:
    """Class label for a feature record (target column may be absent)."""
    return _route(tree, row).prediction


def predict_dist(tree: DecisionTree, row) -> tuple[float, ...]:
    """Leaf class distribution for a record, in schema class order."""
    return _route(tree, row).distribution

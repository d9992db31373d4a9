"""Tree learners: CART splitting, CHAID merging, routing, invariants.

CHAID p-value expectations are frozen from an independent derivation:
pairwise and grouped table p-values recomputed with scipy, multipliers
with the direct combinatorial formulas.
"""

from __future__ import annotations

import math

import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from treevote.data import Column, Dataset, Schema
from treevote.errors import DegenerateDataError, SchemaMismatchError
from treevote.rng import SeededRng
from treevote.trees import (
    CART,
    CATEGORIES,
    CHAID,
    EXHAUSTIVE_CHAID,
    INTERVALS,
    THRESHOLD,
    DecisionTree,
    SplitRule,
    TreeNode,
    TreeParams,
    bonferroni_nominal,
    bonferroni_ordinal,
    gini,
    predict,
    predict_dist,
    train_cart,
    train_chaid,
    train_exhaustive_chaid,
)

GROW_ALL = TreeParams(min_samples_split=2, min_samples_leaf=1)


def dataset(columns, rows, classes=None) -> Dataset:
    target = columns[-1][0]
    schema = Schema(
        columns=tuple(Column(n, k) for n, k in columns),
        target=target,
        classes=tuple(classes or sorted({r[-1] for r in rows})),
    )
    return Dataset(schema=schema, rows=tuple(tuple(r) for r in rows))


def cat_data(counts) -> Dataset:
    # {category: (count_x, count_y)} over a single categorical feature
    rows = []
    for cat, (nx, ny) in counts.items():
        rows += [(cat, "x")] * nx + [(cat, "y")] * ny
    return dataset(
        [("f", "categorical"), ("t", "categorical")], rows, classes=("x", "y")
    )


def walk_internal(tree: DecisionTree):
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            yield node
            stack.extend(node.children)


class TestTreeParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            TreeParams(max_depth=0)
        with pytest.raises(ValueError):
            TreeParams(min_samples_split=1)
        with pytest.raises(ValueError):
            TreeParams(min_samples_leaf=0)
        with pytest.raises(ValueError):
            TreeParams(alpha_merge=0.0)
        with pytest.raises(ValueError):
            TreeParams(alpha_split=1.0)
        with pytest.raises(ValueError):
            TreeParams(numeric_bins=1)

    def test_defaults(self):
        params = TreeParams()
        assert params.max_depth is None
        assert (params.min_samples_split, params.min_samples_leaf) == (5, 2)


class TestGini:
    def test_values(self):
        assert gini([5, 5]) == pytest.approx(0.5)
        assert gini([10, 0]) == 0.0
        assert gini([1, 1, 1, 1]) == pytest.approx(0.75)
        assert gini([2, 1, 1]) == pytest.approx(1 - (0.25 + 2 * 0.0625))

    def test_validation(self):
        with pytest.raises(ValueError):
            gini([])
        with pytest.raises(ValueError):
            gini([0, 0])
        with pytest.raises(ValueError):
            gini([-1, 2])


class TestSplitRule:
    def test_threshold_routing(self):
        rule = SplitRule("f", THRESHOLD, threshold=2.5)
        assert rule.branch_count() == 2
        assert rule.route(2.5) == 0  # ties go left
        assert rule.route(2.6) == 1
        assert rule.route(-10.0) == 0

    def test_interval_routing(self):
        rule = SplitRule("f", INTERVALS, boundaries=(4.0, 8.0))
        assert rule.branch_count() == 3
        assert rule.route(4.0) == 0
        assert rule.route(4.1) == 1
        assert rule.route(8.0) == 1
        assert rule.route(99.0) == 2

    def test_category_routing(self):
        rule = SplitRule("f", CATEGORIES, groups=(("a", "b"), ("c",)))
        assert rule.branch_count() == 2
        assert rule.route("b") == 0
        assert rule.route("c") == 1
        assert rule.route("zzz") is None

    def test_validation(self):
        with pytest.raises(ValueError):
            SplitRule("f", THRESHOLD)
        with pytest.raises(ValueError):
            SplitRule("f", CATEGORIES, groups=(("a",),))
        with pytest.raises(ValueError):
            SplitRule("f", CATEGORIES, groups=(("a",), ("a", "b")))
        with pytest.raises(ValueError):
            SplitRule("f", CATEGORIES, groups=(("a",), ()))
        with pytest.raises(ValueError):
            SplitRule("f", INTERVALS, boundaries=(3.0, 3.0))
        with pytest.raises(ValueError):
            SplitRule("f", "fancy")


class TestTreeNode:
    def test_leaf(self):
        leaf = TreeNode((3.0, 1.0), "x", (0.75, 0.25))
        assert leaf.is_leaf and leaf.total == 4.0

    def test_children_must_match_rule(self):
        rule = SplitRule("f", THRESHOLD, threshold=1.0)
        leaf = TreeNode((1.0,), "x", (1.0,))
        with pytest.raises(ValueError):
            TreeNode((2.0,), "x", (1.0,), rule=rule, children=(leaf,))

    def test_distribution_must_sum_to_one(self):
        with pytest.raises(ValueError):
            TreeNode((1.0, 1.0), "x", (0.6, 0.6))

    def test_leaf_must_not_have_children(self):
        leaf = TreeNode((1.0,), "x", (1.0,))
        with pytest.raises(ValueError):
            TreeNode((1.0,), "x", (1.0,), children=(leaf,))


class TestTrainCart:
    def test_numeric_midpoint_threshold(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "a"), (3.0, "b"), (4.0, "b")],
        )
        tree = train_cart(data, GROW_ALL)
        assert tree.kind == CART
        rule = tree.root.rule
        assert rule.kind == THRESHOLD and rule.threshold == 2.5
        assert tree.depth() == 1
        assert predict(tree, {"v": 2.49}) == "a"
        assert predict(tree, {"v": 2.5}) == "a"
        assert predict(tree, {"v": 2.51}) == "b"

    def test_xor_needs_zero_gain_acceptance(self):
        # no single split reduces Gini; depth-2 still reaches purity
        data = dataset(
            [("u", "numeric"), ("v", "numeric"), ("t", "categorical")],
            [
                (0.0, 0.0, "a"),
                (0.0, 1.0, "b"),
                (1.0, 0.0, "b"),
                (1.0, 1.0, "a"),
            ],
        )
        tree = train_cart(data, GROW_ALL)
        assert tree.depth() == 2
        for row in data.rows:
            assert predict(tree, {"u": row[0], "v": row[1]}) == row[2]

    def test_categorical_one_vs_rest(self):
        data = dataset(
            [("f", "categorical"), ("t", "categorical")],
            [("a", "x"), ("a", "x"), ("b", "y"), ("c", "y")],
        )
        tree = train_cart(data, GROW_ALL)
        rule = tree.root.rule
        assert rule.kind == CATEGORIES
        assert rule.groups == (("a",), ("b", "c"))
        assert predict(tree, {"f": "a"}) == "x"
        assert predict(tree, {"f": "c"}) == "y"

    def test_tie_breaks_to_earlier_feature(self):
        # two identical perfect features: the first schema column wins
        data = dataset(
            [("p", "numeric"), ("q", "numeric"), ("t", "categorical")],
            [(0.0, 0.0, "a"), (0.0, 0.0, "a"), (1.0, 1.0, "b"), (1.0, 1.0, "b")],
        )
        tree = train_cart(data, GROW_ALL)
        assert tree.root.rule.feature == "p"

    def test_pure_node_is_leaf(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "a"), (3.0, "a")],
            classes=("a", "b"),
        )
        tree = train_cart(data, GROW_ALL)
        assert tree.root.is_leaf
        assert tree.root.prediction == "a"

    def test_max_depth_zero_splits(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b"), (3.0, "a"), (4.0, "b")],
        )
        tree = train_cart(data, TreeParams(max_depth=1, min_samples_split=2, min_samples_leaf=1))
        assert tree.depth() <= 1

    def test_min_samples_leaf_blocks_unbalanced_split(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b"), (3.0, "b"), (4.0, "b")],
        )
        tree = train_cart(data, TreeParams(min_samples_split=2, min_samples_leaf=2))
        # the only useful cut (1|234) leaves one row on the left
        for node in walk_internal(tree):
            for child in node.children:
                assert sum(child.class_counts) >= 2

    def test_min_samples_split_blocks_small_nodes(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b"), (3.0, "a")],
        )
        tree = train_cart(data, TreeParams(min_samples_split=4, min_samples_leaf=1))
        assert tree.root.is_leaf

    def test_weights_shift_the_split(self):
        # plain: isolating the lone b at 2.5 is best (score 0.25).
        # with rows 1,2 at weight 9 the cut 1.5 peels off a pure mass
        # of 9: score 11/20 * (36/121) ~ 0.164 beats 2.5's 0.45
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b"), (3.0, "a"), (4.0, "a")],
        )
        plain = train_cart(data, GROW_ALL)
        heavy = train_cart(data, GROW_ALL, weights=(9.0, 9.0, 1.0, 1.0))
        assert plain.root.rule.threshold == 2.5
        assert heavy.root.rule.threshold == 1.5
        # weighted leaf counts hold weight totals, not row counts
        assert heavy.root.children[0].class_counts == (9.0, 0.0)

    def test_zero_weight_leaf_falls_back_to_uniform(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b")],
        )
        tree = train_cart(data, GROW_ALL, weights=(1.0, 0.0))
        assert not tree.root.is_leaf
        right = tree.root.children[1]
        assert right.class_counts == (0.0, 0.0)
        assert right.distribution == (0.5, 0.5)
        assert right.prediction == "a"

    def test_weights_validation(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b")],
        )
        with pytest.raises(ValueError):
            train_cart(data, GROW_ALL, weights=(1.0,))
        with pytest.raises(ValueError):
            train_cart(data, GROW_ALL, weights=(1.0, -1.0))

    def test_mtry_needs_rng(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b")],
        )
        with pytest.raises(ValueError):
            train_cart(data, GROW_ALL, mtry=1)
        with pytest.raises(ValueError):
            train_cart(data, GROW_ALL, mtry=0, rng=SeededRng(1))

    def test_mtry_full_width_matches_plain(self):
        data = dataset(
            [("u", "numeric"), ("v", "numeric"), ("t", "categorical")],
            [(0.0, 9.0, "a"), (1.0, 7.0, "a"), (2.0, 1.0, "b"), (3.0, 2.0, "b")],
        )
        plain = train_cart(data, GROW_ALL)
        sampled = train_cart(data, GROW_ALL, mtry=2, rng=SeededRng(3))
        assert sampled.root == plain.root

    def test_empty_dataset_rejected(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a")],
            classes=("a", "b"),
        ).subset([])
        with pytest.raises(DegenerateDataError):
            train_cart(data, GROW_ALL)

    def test_deterministic(self):
        rows = [(float(i % 7), float(i % 3), "ab"[i % 2]) for i in range(40)]
        data = dataset(
            [("u", "numeric"), ("v", "numeric"), ("t", "categorical")], rows
        )
        assert train_cart(data, GROW_ALL) == train_cart(data, GROW_ALL)

    def test_consistent_data_fits_perfectly(self):
        rng = SeededRng(99)
        for _ in range(5):
            rows = []
            seen = {}
            for _ in range(40):
                u = float(rng.next_u64() % 8)
                v = float(rng.next_u64() % 8)
                label = seen.setdefault((u, v), "ab"[rng.next_u64() % 2])
                rows.append((u, v, label))
            if len({r[2] for r in rows}) < 2:
                continue
            data = dataset(
                [("u", "numeric"), ("v", "numeric"), ("t", "categorical")], rows
            )
            tree = train_cart(data, GROW_ALL)
            for u, v, label in rows:
                assert predict(tree, {"u": u, "v": v}) == label


class TestBonferroni:
    def test_nominal_is_stirling_second_kind(self):
        # reference triangle of S2(c, g)
        expected = {
            (2, 2): 1,
            (3, 2): 3,
            (3, 3): 1,
            (4, 2): 7,
            (4, 3): 6,
            (5, 2): 15,
            (5, 3): 25,
            (5, 4): 10,
            (6, 3): 90,
            (7, 1): 1,
            (7, 7): 1,
        }
        for (c, g), want in expected.items():
            assert bonferroni_nominal(c, g) == want

    def test_nominal_recurrence(self):
        # S2(c, g) = g S2(c-1, g) + S2(c-1, g-1)
        for c in range(3, 10):
            for g in range(2, c):
                assert bonferroni_nominal(c, g) == (
                    g * bonferroni_nominal(c - 1, g)
                    + bonferroni_nominal(c - 1, g - 1)
                )

    def test_ordinal_is_binomial(self):
        for c in range(2, 12):
            for g in range(1, c + 1):
                assert bonferroni_ordinal(c, g) == math.comb(c - 1, g - 1)


ROOT_ONLY = TreeParams(
    max_depth=1,
    min_samples_split=2,
    min_samples_leaf=1,
    alpha_merge=0.05,
    alpha_split=0.999999,
)


class TestTrainChaid:
    def test_merge_dynamics_frozen(self):
        # a~b and c~d (pairwise p 0.3017) merge; the cross pairs differ.
        # final table [[15,1],[1,15]]: raw 7.430984e-7, S2(4,2)=7
        data = cat_data({"a": (8, 0), "b": (7, 1), "c": (1, 7), "d": (0, 8)})
        tree = train_chaid(data, ROOT_ONLY)
        assert tree.kind == CHAID
        rule = tree.root.rule
        assert rule.kind == CATEGORIES
        assert rule.groups == (("a", "b"), ("c", "d"))
        assert rule.bonferroni_multiplier == 7
        assert rule.adjusted_p == pytest.approx(5.201688606389888e-06, rel=1e-9)
        assert predict(tree, {"f": "a"}) == "x"
        assert predict(tree, {"f": "d"}) == "y"

    def test_all_pairs_significant_keeps_singletons(self):
        # every pairwise p <= alpha_merge: no merging at all
        data = cat_data({"a": (10, 0), "b": (0, 10), "c": (5, 5)})
        tree = train_chaid(data, ROOT_ONLY)
        rule = tree.root.rule
        assert rule.groups == (("a",), ("b",), ("c",))
        assert rule.bonferroni_multiplier == 1
        assert rule.adjusted_p == pytest.approx(4.539992976248486e-05, rel=1e-9)
        assert len(tree.root.children) == 3

    def test_insignificant_root_stays_leaf(self):
        data = cat_data({"a": (5, 4), "b": (4, 5)})
        tree = train_chaid(
            data,
            TreeParams(
                max_depth=1, min_samples_split=2, min_samples_leaf=1,
                alpha_merge=0.05, alpha_split=0.05,
            ),
        )
        assert tree.root.is_leaf

    def test_ordinal_intervals(self):
        # three pure runs over one numeric feature, binned to 3
        rows = [(float(v), "x") for v in range(1, 5)]
        rows += [(float(v), "y") for v in range(5, 9)]
        rows += [(float(v), "x") for v in range(9, 13)]
        data = dataset([("v", "numeric"), ("t", "categorical")], rows)
        params = TreeParams(
            max_depth=1, min_samples_split=2, min_samples_leaf=1,
            alpha_merge=0.05, alpha_split=0.05, numeric_bins=3,
        )
        tree = train_chaid(data, params)
        rule = tree.root.rule
        assert rule.kind == INTERVALS
        assert rule.boundaries == (4.0, 8.0)
        assert rule.bonferroni_multiplier == 1  # comb(2, 2)
        # grouped table [[4,0],[0,4],[4,0]]: statistic 12, dof 2
        assert rule.adjusted_p == pytest.approx(math.exp(-6.0), rel=1e-9)
        assert [child.prediction for child in tree.root.children] == ["x", "y", "x"]
        assert predict(tree, {"v": 6.0}) == "y"
        assert predict(tree, {"v": 100.0}) == "x"

    def test_ordinal_groups_are_contiguous(self):
        rng = SeededRng(5)
        rows = [
            (float(rng.next_u64() % 20), "ab"[rng.next_u64() % 2])
            for _ in range(80)
        ]
        data = dataset([("v", "numeric"), ("t", "categorical")], rows)
        tree = train_chaid(
            data,
            TreeParams(
                min_samples_split=2, min_samples_leaf=1,
                alpha_merge=0.4, alpha_split=0.9,
            ),
        )
        for node in walk_internal(tree):
            assert node.rule.kind == INTERVALS
            assert list(node.rule.boundaries) == sorted(node.rule.boundaries)

    def test_split_legality_invariants(self):
        # every internal node: adjusted p <= alpha_split, multiplier >= 1,
        # children at least min_samples_leaf, branch arity >= 2
        rng = SeededRng(17)
        params = TreeParams(
            min_samples_split=4, min_samples_leaf=2,
            alpha_merge=0.2, alpha_split=0.3,
        )
        for case in range(8):
            rows = [
                (
                    "cat" + str(rng.next_u64() % 5),
                    float(rng.next_u64() % 6),
                    "xyz"[rng.next_u64() % 3],
                )
                for _ in range(60)
            ]
            data = dataset(
                [("c", "categorical"), ("v", "numeric"), ("t", "categorical")],
                rows,
            )
            for trainer in (train_chaid, train_exhaustive_chaid):
                tree = trainer(data, params)
                for node in walk_internal(tree):
                    rule = node.rule
                    assert rule.adjusted_p is not None
                    assert rule.adjusted_p <= params.alpha_split
                    assert rule.bonferroni_multiplier >= 1
                    assert len(node.children) >= 2
                    for child in node.children:
                        assert sum(child.class_counts) >= params.min_samples_leaf

    def test_unseen_category_routes_to_largest_child(self):
        data = cat_data({"a": (8, 0), "b": (7, 1), "c": (1, 7), "d": (0, 8)})
        tree = train_chaid(data, ROOT_ONLY)
        sizes = [sum(ch.class_counts) for ch in tree.root.children]
        biggest = tree.root.children[sizes.index(max(sizes))]
        assert predict(tree, {"f": "mystery"}) == biggest.prediction

    def test_deterministic(self):
        data = cat_data({"a": (8, 2), "b": (5, 5), "c": (2, 8), "d": (1, 9)})
        assert train_chaid(data, ROOT_ONLY) == train_chaid(data, ROOT_ONLY)

    def test_frozen_pvalues_match_scipy(self):
        # the frozen adjusted p-values above are multiplier times the
        # plain Pearson p of the final grouped table
        merged = scipy.stats.chi2_contingency([[15, 1], [1, 15]], correction=False)
        assert 7 * merged.pvalue == pytest.approx(5.201688606389888e-06, rel=1e-9)
        kept = scipy.stats.chi2_contingency(
            [[10, 0], [0, 10], [5, 5]], correction=False
        )
        assert kept.pvalue == pytest.approx(4.539992976248486e-05, rel=1e-9)


class TestExhaustiveChaid:
    def test_initial_state_counts_as_candidate(self):
        # merging only worsens this table: best grouping is the start
        data = cat_data({"a": (10, 0), "b": (0, 10), "c": (5, 5)})
        tree = train_exhaustive_chaid(data, ROOT_ONLY)
        assert tree.kind == EXHAUSTIVE_CHAID
        rule = tree.root.rule
        assert rule.groups == (("a",), ("b",), ("c",))
        assert rule.adjusted_p == pytest.approx(4.539992976248486e-05, rel=1e-9)

    def test_merges_when_it_helps(self):
        data = cat_data({"a": (8, 0), "b": (7, 1), "c": (1, 7), "d": (0, 8)})
        tree = train_exhaustive_chaid(data, ROOT_ONLY)
        rule = tree.root.rule
        assert rule.groups == (("a", "b"), ("c", "d"))
        assert rule.bonferroni_multiplier == 7

    def test_root_raw_p_never_worse_than_plain(self):
        # raw p is recoverable as adjusted / multiplier while unclamped
        rng = SeededRng(31)
        cases = 0
        for _ in range(2000):
            if cases >= 40:
                break
            counts = {
                "abcde"[k]: (rng.next_u64() % 7, rng.next_u64() % 7)
                for k in range(2 + rng.next_u64() % 3)
            }
            if sum(nx + ny for nx, ny in counts.values()) < 6:
                continue
            if sum(nx for nx, _ in counts.values()) == 0:
                continue
            if sum(ny for _, ny in counts.values()) == 0:
                continue
            data = cat_data(counts)
            plain = train_chaid(data, ROOT_ONLY).root.rule
            exh = train_exhaustive_chaid(data, ROOT_ONLY).root.rule
            if plain is None or exh is None:
                continue
            cases += 1
            plain_raw = plain.adjusted_p / plain.bonferroni_multiplier
            exh_raw = exh.adjusted_p / exh.bonferroni_multiplier
            if plain.adjusted_p < 1.0 and exh.adjusted_p < 1.0:
                assert exh_raw <= plain_raw + 1e-15
        assert cases >= 40


class TestPrediction:
    def test_missing_feature_rejected(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b")],
        )
        tree = train_cart(data, GROW_ALL)
        with pytest.raises(SchemaMismatchError):
            predict(tree, {})
        with pytest.raises(SchemaMismatchError):
            predict(tree, {"v": "not numeric"})
        with pytest.raises(SchemaMismatchError):
            predict(tree, {"v": True})

    def test_target_key_optional_and_ignored(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b")],
        )
        tree = train_cart(data, GROW_ALL)
        assert predict(tree, {"v": 1.0}) == predict(tree, {"v": 1.0, "t": "b"}) == "a"

    def test_predict_dist_sums_to_one(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (2.0, "b"), (3.0, "a"), (4.0, "b")],
        )
        tree = train_cart(data, TreeParams(max_depth=1, min_samples_split=2, min_samples_leaf=2))
        dist = predict_dist(tree, {"v": 3.5})
        assert len(dist) == 2
        assert sum(dist) == pytest.approx(1.0)

    def test_argmax_tie_takes_earlier_class(self):
        data = dataset(
            [("v", "numeric"), ("t", "categorical")],
            [(1.0, "a"), (1.0, "b")],
            classes=("a", "b"),
        )
        tree = train_cart(data, TreeParams(min_samples_split=5))
        assert tree.root.is_leaf
        assert tree.root.prediction == "a"


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_cart_training_accuracy_on_consistent_data(seed):
    # deterministic labeling by region: CART must fit it exactly
    rng = SeededRng(seed)
    rows = []
    for _ in range(30):
        u = float(rng.next_u64() % 10)
        v = float(rng.next_u64() % 10)
        label = "pq"[int(u + v) % 2]
        rows.append((u, v, label))
    data = dataset(
        [("u", "numeric"), ("v", "numeric"), ("t", "categorical")],
        rows,
        classes=("p", "q"),
    )
    tree = train_cart(data, GROW_ALL)
    for u, v, label in rows:
        assert predict(tree, {"u": u, "v": v}) == label

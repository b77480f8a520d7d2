import math

import numpy as np
import pytest

from smokeintent.models import (
    Leaf,
    Split,
    TreeConfig,
    expected_information,
    fit_decision_tree,
    fit_regression_tree,
    information,
    predict_tree,
    split_gain,
    tree_depth,
)

from conftest import conflict_free_labels, random_categorical


def entropy_oracle(p, n):
    """Brute-force binary entropy, written independently of the library."""
    total = p + n
    acc = 0.0
    for c in (p, n):
        if c:
            acc -= (c / total) * math.log2(c / total)
    return acc


def gain_oracle(codes, y):
    """Exhaustive recomputation of the multiway information gain from raw counts."""
    p = sum(1 for v in y if v == 1)
    n = len(y) - p
    parent = entropy_oracle(p, n)
    weighted = 0.0
    for code in sorted(set(codes)):
        members = [label for c, label in zip(codes, y) if c == code]
        pi = sum(1 for v in members if v == 1)
        weighted += len(members) / len(y) * entropy_oracle(pi, len(members) - pi)
    return parent - weighted


class TestInformation:
    def test_balanced_is_one(self):
        assert information(3, 3) == pytest.approx(1.0)

    def test_pure_is_zero(self):
        assert information(0, 5) == 0.0
        assert information(5, 0) == 0.0

    def test_symmetric_and_bounded(self):
        for p in range(0, 8):
            for n in range(0, 8):
                if p + n == 0:
                    continue
                v = information(p, n)
                assert v == pytest.approx(information(n, p))
                assert 0.0 <= v <= 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            information(0, 0)

    def test_expected_information_weighted_average(self):
        # cells (2,0) and (1,3): E = 2/6*I(2,0) + 4/6*I(1,3)
        expected = 4 / 6 * entropy_oracle(1, 3)
        assert expected_information([(2, 0), (1, 3)]) == pytest.approx(expected)


class TestSplitGain:
    def test_matches_brute_force_on_random_data(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            n = int(rng.integers(2, 40))
            codes = rng.integers(1, 5, size=n)
            y = rng.integers(0, 2, size=n)
            assert split_gain(codes, y) == pytest.approx(gain_oracle(codes, y), abs=1e-12)

    def test_perfect_split_recovers_full_entropy(self):
        codes = np.array([1, 1, 2, 2])
        y = np.array([1, 1, 0, 0])
        assert split_gain(codes, y) == pytest.approx(1.0)


def replay_nodes(node, X, y, idx, used):
    """Yield (node, idx, used) for every internal node, routing data as the
    tree would."""
    if isinstance(node, Leaf):
        return
    yield node, idx, used
    column = X[idx, node.feature]
    for code, child in node.children.items():
        yield from replay_nodes(child, X, y, idx[column == code], used | {node.feature})


class TestId3:
    def test_constant_labels_give_single_leaf(self):
        X = np.array([[1, 2], [2, 1], [3, 2]])
        tree = fit_decision_tree(X, np.array([1, 1, 1]))
        assert isinstance(tree, Leaf)
        assert tree.value == 1

    def test_xor_solved_at_depth_two(self):
        X = np.array([[1, 1], [1, 2], [2, 1], [2, 2]])
        y = np.array([0, 1, 1, 0])
        tree = fit_decision_tree(X, y)
        assert tree_depth(tree) == 2
        assert [predict_tree(tree, row) for row in X] == y.tolist()

    def test_conflict_free_data_memorized(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            n = int(rng.integers(4, 65))
            d = int(rng.integers(2, 6))
            X = random_categorical(rng, n, d)
            y = conflict_free_labels(rng, X)
            tree = fit_decision_tree(X, y)
            predicted = [predict_tree(tree, row) for row in X]
            assert predicted == y.tolist()

    def test_every_split_matches_exhaustive_recomputation(self):
        rng = np.random.default_rng(34)
        for _ in range(50):
            n = int(rng.integers(4, 65))
            d = int(rng.integers(2, 6))
            X = random_categorical(rng, n, d)
            y = rng.integers(0, 2, size=n)
            tree = fit_decision_tree(X, y)
            for node, idx, used in replay_nodes(tree, X, y, np.arange(n), frozenset()):
                best_f, best_g = None, -np.inf
                for f in range(d):
                    if f in used:
                        continue
                    codes = X[idx, f]
                    if np.all(codes == codes[0]):
                        continue
                    g = gain_oracle(codes.tolist(), y[idx].tolist())
                    if g > best_g:
                        best_f, best_g = f, g
                assert node.feature == best_f  # ties go to the lowest index
                assert split_gain(X[idx, node.feature], y[idx]) == pytest.approx(best_g, abs=1e-12)
                assert best_g >= -1e-12

    def test_max_depth_respected(self):
        rng = np.random.default_rng(35)
        X = random_categorical(rng, 50, 5)
        y = rng.integers(0, 2, size=50)
        tree = fit_decision_tree(X, y, TreeConfig(max_depth=2))
        assert tree_depth(tree) <= 2

    def test_min_samples_stops_growth(self):
        rng = np.random.default_rng(36)
        X = random_categorical(rng, 30, 3)
        y = rng.integers(0, 2, size=30)
        tree = fit_decision_tree(X, y, TreeConfig(min_samples=31))
        assert isinstance(tree, Leaf)

    def test_unseen_code_routes_to_fallback_majority(self):
        X = np.array([[1], [1], [2], [2], [2]])
        y = np.array([1, 1, 0, 0, 0])
        tree = fit_decision_tree(X, y)
        assert isinstance(tree, Split)
        assert predict_tree(tree, [9]) == 0  # majority of the node is class 0

    def test_leaf_tie_breaks_to_class_zero(self):
        X = np.array([[1], [1]])
        y = np.array([0, 1])
        tree = fit_decision_tree(X, y)  # single-valued feature: no split possible
        assert isinstance(tree, Leaf)
        assert tree.value == 0

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fit_decision_tree(np.zeros((0, 2), dtype=int), np.zeros(0, dtype=int))

    def test_feature_restriction(self):
        X = np.array([[1, 1], [1, 2], [2, 1], [2, 2]])
        y = np.array([0, 0, 1, 1])  # feature 0 is perfect, feature 1 is noise
        tree = fit_decision_tree(X, y, features=[1])
        for node, _, _ in replay_nodes(tree, X, y, np.arange(4), frozenset()):
            assert node.feature == 1

    def test_deterministic(self):
        rng = np.random.default_rng(37)
        X = random_categorical(rng, 40, 4)
        y = rng.integers(0, 2, size=40)
        assert fit_decision_tree(X, y) == fit_decision_tree(X, y)


class TestRegressionTree:
    def test_leaf_values_use_callback(self):
        X = np.array([[1], [1], [2], [2]])
        target = np.array([1.0, 3.0, 10.0, 14.0])
        tree = fit_regression_tree(X, target, TreeConfig(max_depth=3, min_samples=1),
                                   leaf_value=lambda idx: float(target[idx].mean()))
        assert predict_tree(tree, [1]) == pytest.approx(2.0)
        assert predict_tree(tree, [2]) == pytest.approx(12.0)

    def test_constant_target_is_single_leaf(self):
        X = np.array([[1], [2], [3]])
        tree = fit_regression_tree(X, np.array([5.0, 5.0, 5.0]), TreeConfig(),
                                   leaf_value=lambda idx: 5.0)
        assert isinstance(tree, Leaf)

    def test_depth_cap(self):
        rng = np.random.default_rng(40)
        X = random_categorical(rng, 80, 6)
        target = rng.normal(size=80)
        tree = fit_regression_tree(X, target, TreeConfig(max_depth=2, min_samples=1),
                                   leaf_value=lambda idx: float(target[idx].mean()))
        assert tree_depth(tree) <= 2

    def test_fallback_value_covers_unseen_codes(self):
        X = np.array([[1], [2]])
        target = np.array([1.0, 3.0])
        tree = fit_regression_tree(X, target, TreeConfig(min_samples=1),
                                   leaf_value=lambda idx: float(target[idx].mean()))
        assert predict_tree(tree, [7]) == pytest.approx(2.0)  # node mean

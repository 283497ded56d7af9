import random

import numpy as np
import pytest

from interflow.forest import (ForestConfig, ModelFormatError, TrainedModel,
                              _best_split, _grow_tree, _tree_rng, load_model,
                              predict, predict_votes, save_model, train)


def separable_1d():
    rows = [[1.0], [2.0], [9.0], [10.0]]
    labels = ["a", "a", "b", "b"]
    return rows, labels


def oracle_route(node, row):
    """Independent per-tree traversal."""
    while "feature" in node:
        if row[node["feature"]] <= node["threshold"]:
            node = node["left"]
        else:
            node = node["right"]
    return node["counts"]


def oracle_gini_gain(X, y, idx, n_labels, feature, threshold):
    def gini(members):
        if len(members) == 0:
            return 0.0
        counts = np.bincount(y[members], minlength=n_labels)
        return 1.0 - float(np.sum((counts / len(members)) ** 2))

    left = idx[X[idx, feature] <= threshold]
    right = idx[X[idx, feature] > threshold]
    parent = gini(idx)
    return parent - (len(left) * gini(left) + len(right) * gini(right)) / len(idx)


class TestTrain:
    def test_linearly_separable_single_tree(self):
        rows, labels = separable_1d()
        cfg = ForestConfig(n_trees=1, features_per_split="all", seed=0)
        model = train(rows, labels, cfg)
        assert predict(model, rows) == labels
        tree = model.trees[0]
        assert "feature" in tree
        assert 2.0 < tree["threshold"] < 9.0

    def test_determinism_byte_identical(self, tmp_path):
        rnd = random.Random(20)
        rows = [[rnd.gauss(i % 3, 1) for _ in range(5)] for i in range(60)]
        labels = [f"c{i % 3}" for i in range(60)]
        cfg = ForestConfig(n_trees=10, seed=42)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(train(rows, labels, cfg), p1)
        save_model(train(list(rows), list(labels), cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_distinct_seeds_distinct_models(self):
        rnd = random.Random(21)
        rows = [[rnd.gauss(i % 2, 1) for _ in range(4)] for i in range(40)]
        labels = [f"c{i % 2}" for i in range(40)]
        m1 = train(rows, labels, ForestConfig(n_trees=3, seed=1))
        m2 = train(rows, labels, ForestConfig(n_trees=3, seed=2))
        assert m1.trees != m2.trees

    def test_single_label_rejected(self):
        with pytest.raises(ValueError, match="degenerate label set"):
            train([[1.0], [2.0]], ["a", "a"], ForestConfig(n_trees=1))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            train([[1.0], [2.0, 3.0]], ["a", "b"], ForestConfig(n_trees=1))

    def test_synthetic_three_label_accuracy(self):
        rng = np.random.default_rng(5)
        rows, labels = [], []
        for c, center in enumerate([0.0, 10.0, 20.0]):
            for _ in range(70):
                rows.append((center + rng.normal(0, 1, 6)).tolist())
                labels.append(f"class{c}")
        order = rng.permutation(len(rows))
        rows = [rows[i] for i in order]
        labels = [labels[i] for i in order]
        train_x, test_x = rows[:160], rows[160:]
        train_y, test_y = labels[:160], labels[160:]
        model = train(train_x, train_y, ForestConfig(n_trees=20, seed=3))
        acc = np.mean([p == t for p, t in zip(predict(model, test_x), test_y)])
        assert acc >= 0.9
        # depth-exhausting single tree on the same split clears a lower bar
        stump_model = train(train_x, train_y,
                            ForestConfig(n_trees=1, features_per_split="all",
                                         seed=3))
        stump_acc = np.mean([p == t for p, t in
                             zip(predict(stump_model, test_x), test_y)])
        assert stump_acc >= 0.8

    def test_monotone_transform_invariance(self):
        # cube preserves value order and distinct adjacency, so candidate
        # partitions, impurities, and tie-breaks all carry over; routing is
        # checked on the training rows themselves
        rnd = random.Random(22)
        for seed in range(5):
            rows = [[float(rnd.randrange(-6, 7)) for _ in range(3)]
                    for _ in range(30)]
            labels = [rnd.choice(["a", "b"]) for _ in range(30)]
            if len(set(labels)) < 2:
                labels[0] = "a" if labels[0] == "b" else "b"
            cfg = ForestConfig(n_trees=4, seed=seed)
            base = predict(train(rows, labels, cfg), rows)
            cubed = [[v ** 3 for v in row] for row in rows]
            transformed = predict(train(cubed, labels, cfg), cubed)
            assert base == transformed


class TestPredict:
    def test_memorizes_separable(self):
        rows, labels = separable_1d()
        # enough trees that bootstrap omissions of single rows average out
        model = train(rows, labels, ForestConfig(n_trees=25, seed=0))
        assert predict(model, rows) == labels

    def test_single_stump_histograms(self):
        stump = {"feature": 0, "threshold": 5.0,
                 "left": {"counts": [3, 1]}, "right": {"counts": [1, 3]}}
        model = TrainedModel(trees=[stump], label_table=["A", "B"],
                             config=ForestConfig(n_trees=1), feature_dim=1)
        assert predict(model, [[0.0], [9.0]]) == ["A", "B"]

    def test_micro_forest_matches_traversal_oracle(self):
        rnd = random.Random(23)
        for _ in range(20):
            def rand_tree(depth):
                if depth == 0 or rnd.random() < 0.3:
                    return {"counts": [rnd.randrange(1, 5)
                                       for _ in range(2)]}
                return {"feature": rnd.randrange(3),
                        "threshold": rnd.uniform(-1, 1),
                        "left": rand_tree(depth - 1),
                        "right": rand_tree(depth - 1)}
            trees = [rand_tree(2) for _ in range(rnd.randrange(1, 4))]
            model = TrainedModel(trees=trees, label_table=["A", "B"],
                                 config=ForestConfig(n_trees=len(trees)),
                                 feature_dim=3)
            rows = [[rnd.uniform(-1, 1) for _ in range(3)] for _ in range(20)]
            got = predict(model, rows)
            for row, lbl in zip(rows, got):
                sums = np.sum([oracle_route(t, row) for t in trees], axis=0)
                assert lbl == model.label_table[int(np.argmax(sums))]

    def test_vote_fractions_sum_to_one(self):
        rows, labels = separable_1d()
        model = train(rows, labels, ForestConfig(n_trees=7, seed=0))
        votes = predict_votes(model, rows)
        np.testing.assert_allclose(votes.sum(axis=1), 1.0, atol=1e-9)

    def test_dimension_mismatch(self):
        rows, labels = separable_1d()
        model = train(rows, labels, ForestConfig(n_trees=1, seed=0))
        with pytest.raises(ValueError, match="dimension"):
            predict(model, [[1.0, 2.0]])

    def test_predictions_within_label_table(self):
        rnd = random.Random(24)
        rows = [[rnd.gauss(0, 5) for _ in range(4)] for _ in range(50)]
        labels = [rnd.choice(["x", "y", "z"]) for _ in range(50)]
        model = train(rows, labels, ForestConfig(n_trees=5, seed=9))
        assert set(predict(model, rows)) <= set(model.label_table)


class TestSplitOptimality:
    def test_every_split_is_gini_optimal(self):
        rnd = random.Random(25)
        for seed in range(20):
            n = rnd.randrange(5, 51)
            d = rnd.randrange(1, 6)
            X = np.array([[rnd.choice([0.0, 1.0, 2.5, 4.0, 7.0])
                           for _ in range(d)] for _ in range(n)])
            y = np.array([rnd.randrange(3) for _ in range(n)])
            if len(set(y)) < 2:
                y[0] = (y[0] + 1) % 3
            cfg = ForestConfig(n_trees=1, features_per_split="all",
                               seed=seed, max_depth=6)
            tree = _grow_tree(X, y, np.arange(n), _tree_rng(seed, 0), cfg, 3)
            self._check(tree, X, y, np.arange(n), 3)

    def _check(self, node, X, y, idx, n_labels):
        if "feature" not in node:
            return
        chosen = oracle_gini_gain(X, y, idx, n_labels,
                                  node["feature"], node["threshold"])
        # exhaustive scan over every (feature, midpoint) candidate
        best = 0.0
        for f in range(X.shape[1]):
            vals = np.unique(X[idx, f])
            for a, b in zip(vals[:-1], vals[1:]):
                best = max(best, oracle_gini_gain(X, y, idx, n_labels,
                                                  f, (a + b) / 2))
        assert chosen >= best - 1e-12
        mask = X[idx, node["feature"]] <= node["threshold"]
        self._check(node["left"], X, y, idx[mask], n_labels)
        self._check(node["right"], X, y, idx[~mask], n_labels)

    def test_best_split_tie_breaks_low_feature_then_low_threshold(self):
        # two identical features: both give the same gain; feature 0 wins
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([0, 0, 1, 1])
        f, thr, gain = _best_split(X, y, np.arange(4), [1, 0], 2)
        assert f == 0
        assert thr == 1.5


class TestSaveLoad:
    def trained(self):
        rnd = random.Random(26)
        rows = [[rnd.gauss(i % 2 * 4, 1) for _ in range(6)] for i in range(40)]
        labels = [f"c{i % 2}" for i in range(40)]
        return train(rows, labels, ForestConfig(n_trees=8, seed=11),
                     meta={"n_bins": 60, "delta": 1.0})

    def test_round_trip_predictions(self, tmp_path):
        model = self.trained()
        path = tmp_path / "m.json"
        save_model(model, path)
        loaded = load_model(path)
        rnd = random.Random(27)
        rows = [[rnd.gauss(2, 3) for _ in range(6)] for _ in range(100)]
        assert predict(loaded, rows) == predict(model, rows)
        np.testing.assert_array_equal(predict_votes(loaded, rows),
                                      predict_votes(model, rows))
        assert loaded.meta == {"n_bins": 60, "delta": 1.0}

    def test_truncated_file_is_corruption_error(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(self.trained(), path)
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(ModelFormatError, match="corrupt"):
            load_model(path)

    def test_version_mismatch(self, tmp_path):
        model = self.trained()
        model.format_version = 999
        path = tmp_path / "m.json"
        save_model(model, path)
        with pytest.raises(ModelFormatError, match="999"):
            load_model(path)

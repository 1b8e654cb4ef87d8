import json

import numpy as np
import pytest

from ghicast import _rng
from ghicast.errors import ConfigError, EmptyTrainingSet, SchemaMismatch, UnfittedModel, UnsupportedFormat
from ghicast.features import FeatureMatrix
from ghicast.forest import ForestModel, ForestParams, fit_forest, fit_tree, load_model, predict, predict_per_tree, save_model
from ghicast.forest.tree import Tree, tree_from_dict, tree_to_dict

from oracles import brute_force_tree, random_cart_dataset, same_structure


def test_two_point_split():
    t = fit_tree(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), _rng.stream(0), min_leaf=1)
    d = tree_to_dict(t)
    assert d["feature"] == 0 and d["threshold"] == 0.5
    assert d["left"]["prediction"] == 0.0 and d["right"]["prediction"] == 1.0


def test_constant_target_single_leaf(rng):
    t = fit_tree(rng.normal(size=(20, 3)), np.full(20, 7.5), _rng.stream(0))
    assert t.n_nodes == 1 and t.value[0] == 7.5


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("min_leaf", [1, 4])
def test_tree_matches_brute_force(seed, min_leaf):
    X, y = random_cart_dataset(np.random.default_rng(1000 + seed))
    t = fit_tree(X, y, _rng.stream(seed), min_leaf=min_leaf)
    assert same_structure(tree_to_dict(t), brute_force_tree(X, y, min_leaf=min_leaf))


def test_min_leaf_and_depth_respected(rng):
    X, y = random_cart_dataset(rng, n=200)
    t = fit_tree(X, y, _rng.stream(1), min_leaf=7, max_depth=3)
    assert t.depth() <= 3
    leaves = t.feature == -1
    assert t.count[leaves].min() >= 7
    assert t.count[leaves].sum() == 200


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        fit_tree(np.zeros((0, 2)), np.zeros(0), _rng.stream(0))


def test_single_unrestricted_tree_memorises(rng):
    X = rng.normal(size=(80, 4))
    y = rng.normal(size=80)
    m = fit_forest(X, y, ForestParams(n_trees=1, min_leaf=1, bootstrap=False, mtry=4))
    assert np.mean((predict(m, X) - y) ** 2) == 0.0


def test_prediction_is_tree_mean(rng):
    X, y = random_cart_dataset(rng, n=120)
    m = fit_forest(X, y, ForestParams(n_trees=7, min_leaf=2, seed=3))
    per = predict_per_tree(m, X)
    np.testing.assert_allclose(predict(m, X), per.mean(axis=0), rtol=0, atol=1e-12)
    shuffled = ForestModel(m.trees[::-1], m.feature_names, m.importances, m.hyperparams)
    np.testing.assert_allclose(predict(shuffled, X), predict(m, X), rtol=0, atol=1e-12)


def leaf(v):
    return Tree(*(np.array([x]) for x in (-1, 0.0, -1, -1, v, 1)), np.zeros(1))


def test_leaf_trees_average():
    m = ForestModel([leaf(2.0), leaf(4.0)], ["a"], np.zeros(1), ForestParams(n_trees=2))
    assert predict(m, np.zeros((3, 1))).tolist() == [3.0, 3.0, 3.0]
    one = ForestModel([leaf(2.0)], ["a"], np.zeros(1), ForestParams(n_trees=1))
    assert predict(one, np.zeros((1, 1)))[0] == 2.0


def test_importance_informative_feature(rng):
    x0, x1 = rng.uniform(size=500), rng.uniform(size=500)
    y = 3 * x0 + 0.05 * rng.normal(size=500)
    m = fit_forest(np.column_stack([x0, x1]), y, ForestParams(n_trees=20, mtry=2))
    assert m.importances[0] > 0.9 and m.importances[1] < 0.1
    assert m.importances.sum() == pytest.approx(1.0)


def test_threads_do_not_change_model(rng):
    X, y = random_cart_dataset(rng, n=150)
    p = ForestParams(n_trees=6, seed=2)
    a, b = fit_forest(X, y, p), fit_forest(X, y, p, threads=3)
    assert json.dumps([tree_to_dict(t) for t in a.trees]) == json.dumps([tree_to_dict(t) for t in b.trees])


def test_schema_and_unfitted(rng):
    X, y = random_cart_dataset(rng)
    m = fit_forest(X, y, ForestParams(n_trees=2))
    with pytest.raises(SchemaMismatch):
        predict(m, X[:, :2])
    with pytest.raises(UnfittedModel):
        predict(ForestModel([], ["a"], np.zeros(1), ForestParams()), X)
    fm = FeatureMatrix(X, [f"x{k}" for k in range(X.shape[1])])
    np.testing.assert_array_equal(predict(m, fm), predict(m, X))


def test_params_validation():
    with pytest.raises(ConfigError):
        ForestParams(n_trees=0)
    with pytest.raises(ConfigError):
        ForestParams(min_leaf=0)
    assert ForestParams().resolved_mtry(67) == 22


def test_save_load_roundtrip(tmp_path, rng):
    X, y = random_cart_dataset(rng)
    m = fit_forest(X, y, ForestParams(n_trees=3, min_leaf=2))
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    np.testing.assert_array_equal(predict(back, X), predict(m, X))
    np.testing.assert_array_equal(back.importances, m.importances)
    save_model(back, tmp_path / "m2.json")
    assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def test_unsupported_format(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"format_version": 99}))
    with pytest.raises(UnsupportedFormat):
        load_model(tmp_path / "m.json")


def test_tree_dict_roundtrip(rng):
    X, y = random_cart_dataset(rng)
    t = fit_tree(X, y, _rng.stream(4), min_leaf=3)
    back = tree_from_dict(tree_to_dict(t), X.shape[1])
    np.testing.assert_array_equal(back.predict(X), t.predict(X))

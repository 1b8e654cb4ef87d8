import numpy as np
import pytest

from ghicast.errors import SchemaMismatch, SingularSystem
from ghicast.forest import fit_linear, load_model, predict_linear, save_model


def test_exact_line():
    x = np.arange(10, dtype=float).reshape(-1, 1)
    m = fit_linear(x, 2 * x.ravel())
    assert abs(m.coefficients[0] - 2.0) < 1e-8 and abs(m.intercept) < 1e-8


def test_ridge_limit(rng):
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, -2.0, 0.5] + 4.0
    m = fit_linear(X, y, ridge_lambda=1e12)
    assert np.all(np.abs(m.coefficients) < 1e-8)
    assert m.intercept == pytest.approx(y.mean(), abs=1e-6)


def test_residuals_orthogonal(rng):
    X = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    m = fit_linear(X, y)
    resid = y - predict_linear(m, X)
    assert np.all(np.abs(X.T @ resid) < 1e-8)
    assert abs(resid.sum()) < 1e-8


def test_rank_deficient():
    X = np.column_stack([np.arange(5.0), 2 * np.arange(5.0)])
    with pytest.raises(SingularSystem):
        fit_linear(X, np.arange(5.0))
    m = fit_linear(X, np.arange(5.0), ridge_lambda=0.1)
    assert np.all(np.isfinite(m.coefficients))


def test_schema_and_roundtrip(tmp_path, rng):
    X = rng.normal(size=(10, 2))
    m = fit_linear(X, rng.normal(size=10), 0.5)
    with pytest.raises(SchemaMismatch):
        predict_linear(m, X[:, :1])
    save_model(m, tmp_path / "l.json")
    back = load_model(tmp_path / "l.json")
    np.testing.assert_array_equal(predict_linear(back, X), predict_linear(m, X))
    assert back.ridge_lambda == 0.5

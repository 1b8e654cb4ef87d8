import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from ghicast import _rng
from ghicast.embedding.alias import alias_build, alias_sample, draw
from ghicast.errors import EmptyWeights, NonPositiveWeight


def test_single_outcome():
    t = alias_build([1.0])
    assert np.all(alias_sample(t, np.random.default_rng(0), 1000) == 0)


@pytest.mark.parametrize("weights", [[1.0, 1.0], [1.0, 3.0]])
def test_two_outcome_frequencies(weights):
    t = alias_build(weights)
    draws = alias_sample(t, np.random.default_rng(7), 100_000)
    expected = np.asarray(weights) / np.sum(weights) * 100_000
    assert chisquare(np.bincount(draws, minlength=2), expected).pvalue > 0.01


def test_errors():
    with pytest.raises(EmptyWeights):
        alias_build([])
    with pytest.raises(NonPositiveWeight):
        alias_build([1.0, 0.0])
    with pytest.raises(NonPositiveWeight):
        alias_build([1.0, -2.0])
    with pytest.raises(NonPositiveWeight):
        alias_build([1.0, np.inf])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30))
def test_table_encodes_distribution_exactly(weights):
    # each column i holds prob[i] of itself and 1 - prob[i] of alias[i]
    t = alias_build(weights)
    n = len(weights)
    mass = np.zeros(n)
    for i in range(n):
        mass[i] += t.probabilities[i] / n
        mass[t.aliases[i]] += (1.0 - t.probabilities[i]) / n
    target = np.asarray(weights) / np.sum(weights)
    np.testing.assert_allclose(mass, target, atol=1e-12)
    assert np.all((t.probabilities >= 0) & (t.probabilities <= 1 + 1e-12))


def test_numba_draw_matches_distribution():
    w = np.array([5.0, 1.0, 2.0, 2.0])
    t = alias_build(w)
    state = _rng.stream(1, 2, 3)
    counts = np.zeros(4)
    for _ in range(40_000):
        counts[draw(t.probabilities, t.aliases, state)] += 1
    assert chisquare(counts, w / w.sum() * counts.sum()).pvalue > 0.01

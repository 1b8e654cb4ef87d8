import numpy as np
import pytest

from ghicast.embedding import TrainConfig, WalkConfig, embed_graph
from ghicast.geo_graph import build_graph
from ghicast.synth import SynthConfig, generate, grid_locations


@pytest.fixture(scope="session")
def small_cfg():
    return SynthConfig(rows=3, cols=4, step_minutes=60, seed=3)


@pytest.fixture(scope="session")
def small_data(small_cfg):
    measurements, forecasts = generate(small_cfg)
    return measurements, forecasts


@pytest.fixture(scope="session")
def small_embedding(small_cfg):
    g = build_graph(grid_locations(small_cfg))
    return embed_graph(g, WalkConfig(walk_length=20, walks_per_node=5, seed=1), TrainConfig(dims=8, epochs=2, seed=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

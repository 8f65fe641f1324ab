"""
Shared fixtures: small hand-checked graphs and a seeded random-graph factory
"""

import numpy as np
import pytest

from spread_core import DEFAULT_CONFIG
from uncertain_graph import UncertainDigraph


@pytest.fixture
def diamond():
    """0->1, 0->2, 1->3, 2->3, all p=0.5; P(0~>3) = 0.4375"""
    return UncertainDigraph.from_edges(4, [(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)])


@pytest.fixture
def path3():
    return UncertainDigraph.from_edges(3, [(0, 1, 0.5), (1, 2, 0.5)])


@pytest.fixture
def triangle():
    """Directed 3-cycle 0->1->2->0"""
    return UncertainDigraph.from_edges(3, [(0, 1, 0.4), (1, 2, 0.6), (2, 0, 0.7)])


@pytest.fixture
def single_edge():
    return UncertainDigraph.from_edges(2, [(0, 1, 0.7)])


@pytest.fixture
def star():
    return UncertainDigraph.from_edges(5, [(0, leaf, 0.3) for leaf in range(1, 5)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def engine_config():
    return dict(DEFAULT_CONFIG['engine'])


@pytest.fixture
def config():
    cfg = {section: dict(values) for section, values in DEFAULT_CONFIG.items()}
    cfg['logging']['file'] = ''
    return cfg

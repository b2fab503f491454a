"""
Shared fixtures: small environments that keep exact computations instant.
"""
from __future__ import annotations

import numpy as np
import pytest

from src.envs.comblock import build_comblock
from src.envs.lower_bound import build_lower_bound_family
from src.envs.suites import build_partitioned_suite, build_shared_emission_suite


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def comblock():
    """H=4, A=3 combination lock."""
    return build_comblock(4, 3, rng=np.random.default_rng(7))


@pytest.fixture
def tiny_comblock():
    """H=3, A=2 combination lock."""
    return build_comblock(3, 2, rng=np.random.default_rng(11))


@pytest.fixture
def shared_suite():
    return build_shared_emission_suite(2, 3, np.random.default_rng(3), num_actions=2)


@pytest.fixture
def partitioned_suite():
    return build_partitioned_suite(2, 4, np.random.default_rng(5), num_actions=2)


@pytest.fixture
def lower_bound():
    return build_lower_bound_family()

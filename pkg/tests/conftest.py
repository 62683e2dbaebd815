"""Shared fixtures: deterministic samples reused across test modules."""

from __future__ import annotations

import numpy as np
import pytest

from geomrisk import get_preset, simulate, substream


@pytest.fixture(scope="session")
def rng_factory():
    """Factory for named deterministic generators, one stream per purpose."""

    def make(stage: str) -> np.random.Generator:
        return substream(20260825, stage)

    return make


@pytest.fixture(scope="session")
def x1_sample_10k(rng_factory) -> np.ndarray:
    """Independent bivariate standard normal sample, n = 10_000."""
    return simulate(get_preset("X1"), 10_000, rng_factory("x1-10k"))


@pytest.fixture(scope="session")
def symmetric_sample(rng_factory) -> np.ndarray:
    """Centrally symmetrized 2-D sample: rows come in (+z, -z) pairs plus a shift."""
    half = rng_factory("symmetric").standard_normal((400, 2)) * np.array([1.0, 0.7])
    centered = np.vstack([half, -half])
    return centered + np.array([0.5, -1.5])

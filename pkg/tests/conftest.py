import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from core.model import PotentialModel, make_bounds
from core.rng import RngStream


class QuadraticModel(PotentialModel):
    """U(x) = 0.5 * |x|^2 / sd^2, optionally confined to a box."""

    def __init__(self, dim: int = 1, sd: float = 1.0, box=None):
        self.dim = dim
        self.sd = sd
        if box is not None:
            self.bounds = make_bounds(box[0], box[1], dim)

    def potential(self, x):
        return float(0.5 * x @ x / self.sd ** 2)

    def gradient(self, x):
        return x / self.sd ** 2


class ZeroModel(PotentialModel):
    def __init__(self, dim: int = 1):
        self.dim = dim

    def potential(self, x):
        return 0.0

    def gradient(self, x):
        return np.zeros_like(x, dtype=float)


class CountingModel(PotentialModel):
    """Wraps a model and counts potential and gradient evaluations."""

    def __init__(self, inner: PotentialModel):
        self.inner = inner
        self.dim = inner.dim
        self.bounds = inner.bounds
        self.potential_calls = 0
        self.gradient_calls = 0

    def potential(self, x):
        self.potential_calls += 1
        return self.inner.potential(x)

    def gradient(self, x):
        self.gradient_calls += 1
        return self.inner.gradient(x)


class ForcedStream:
    """Stands in for RngStream with fixed draws."""

    def __init__(self, uniform: float, normal: float):
        self._u = uniform
        self._z = normal

    def uniform(self) -> float:
        return self._u

    def standard_normal(self, size: int) -> np.ndarray:
        return np.full(size, self._z)


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def quadratic():
    return QuadraticModel(1)

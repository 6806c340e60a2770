from abc import ABC, abstractmethod

import numpy as np


class PotentialModel(ABC):
    """Differentiable negative log density U(x), with an optional box.

    ``bounds`` is None for unconstrained models, otherwise a (dim, 2) array of
    [lo, hi] rows; use -inf/inf for free coordinates.
    """

    dim: int
    bounds: np.ndarray | None = None

    @abstractmethod
    def potential(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        ...

    def potential_and_gradient(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        return self.potential(x), self.gradient(x)


def make_bounds(lo, hi, dim: int) -> np.ndarray:
    """Broadcasts scalar or per-coordinate limits into a read-only (dim, 2) box."""
    box = np.empty((dim, 2))
    box[:, 0] = lo
    box[:, 1] = hi
    box.setflags(write=False)
    return box

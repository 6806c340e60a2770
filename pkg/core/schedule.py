import math
from abc import ABC, abstractmethod

import numpy as np

from core.rng import RngStream

SYMMETRY_TOL = 1e-12


def _fold_index(k: float, K: int) -> float:
    """Reduces a grid index to its canonical representative in [0, K/2]."""
    m = k % K
    return K - m if m > K / 2 else m


class MassSchedule(ABC):
    """Periodic, symmetric log mass scale eta_k on the half-integer grid.

    Lookups accept any half-integer and reduce modulo K internally. The
    subclasses evaluate eta only on the folded index, so symmetry and
    periodicity hold exactly.
    """

    def __init__(self, K: int):
        if K < 1:
            raise ValueError(f"schedule period must be positive, got {K}")
        self.K = int(K)

    @abstractmethod
    def _eta_folded(self, m: float) -> float:
        ...

    def eta(self, k: float) -> float:
        return self._eta_folded(_fold_index(k, self.K))

    def alpha(self, k: float) -> float:
        return math.exp(2.0 * self.eta(k))

    def angular_frequency(self, eps: float) -> float:
        """omega = 2 pi / (K eps), the schedule frequency in leapfrog time."""
        return 2.0 * math.pi / (self.K * eps)

    @staticmethod
    def constant(c: float, K: int) -> "CosineSchedule":
        return CosineSchedule(eta_star=0.0, c_eta=c, K=K)


class CosineSchedule(MassSchedule):
    """eta_k = c_eta + eta_star * (1 - cos(2 pi k / K))."""

    def __init__(self, eta_star: float, c_eta: float, K: int):
        super().__init__(K)
        self.eta_star = float(eta_star)
        self.c_eta = float(c_eta)

    def _eta_folded(self, m: float) -> float:
        return self.c_eta + self.eta_star * (1.0 - math.cos(2.0 * math.pi * m / self.K))

    def __repr__(self) -> str:
        return f"CosineSchedule(eta_star={self.eta_star}, c_eta={self.c_eta}, K={self.K})"


class TriangularSchedule(MassSchedule):
    """eta_k = xi * min(k, K - k), linear ramp up and back down."""

    def __init__(self, xi: float, K: int):
        super().__init__(K)
        self.xi = float(xi)

    def _eta_folded(self, m: float) -> float:
        return self.xi * m


class TabulatedSchedule(MassSchedule):
    """eta given as 2K values on 0, 1/2, ..., K - 1/2."""

    def __init__(self, values):
        vals = np.array(values, dtype=float).ravel()
        if vals.size == 0 or vals.size % 2:
            raise ValueError("tabulated schedule needs 2K values on the half-integer grid")
        super().__init__(vals.size // 2)
        if not np.all(np.isfinite(vals)):
            raise ValueError("tabulated schedule values must be finite")
        n = vals.size
        mirrored = vals[(-np.arange(n)) % n]
        worst = float(np.max(np.abs(vals - mirrored)))
        if worst > SYMMETRY_TOL:
            raise ValueError(f"tabulated schedule is not symmetric (max deviation {worst:.3e})")
        vals.setflags(write=False)
        self.values = vals

    def _eta_folded(self, m: float) -> float:
        j = 2.0 * m
        if j != int(j):
            raise ValueError(f"index {m} is not on the half-integer grid")
        return float(self.values[int(j)])


class IndexDistribution:
    """Symmetric distribution psi_K over the schedule index 0..K-1."""

    def __init__(self, weights):
        w = np.array(weights, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("index distribution needs at least one weight")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("index weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ValueError("index distribution has empty support")
        p = w / total
        K = p.size
        mirrored = p[(-np.arange(K)) % K]
        if np.max(np.abs(p - mirrored)) > SYMMETRY_TOL:
            raise ValueError("index weights must satisfy w(k) = w(K - k)")
        with np.errstate(divide="ignore"):
            log_p = np.log(p)
        p.setflags(write=False)
        log_p.setflags(write=False)
        self.K = K
        self.probs = p
        self.log_probs = log_p
        self._cdf = np.cumsum(p)
        self._cdf[-1] = 1.0

    @classmethod
    def windowed_uniform(cls, K: int, half_width: int) -> "IndexDistribution":
        k = np.arange(K)
        return cls((np.minimum(k, K - k) <= half_width).astype(float))

    @classmethod
    def point_mass(cls, K: int) -> "IndexDistribution":
        return cls.windowed_uniform(K, 0)

    @classmethod
    def below_threshold(cls, schedule: MassSchedule, c: float) -> "IndexDistribution":
        eta = np.array([schedule.eta(k) for k in range(schedule.K)])
        return cls((eta <= c).astype(float))

    def prob(self, k: int) -> float:
        return float(self.probs[int(k) % self.K])

    def log_prob(self, k: int) -> float:
        return float(self.log_probs[int(k) % self.K])

    def in_support(self, k: int) -> bool:
        return self.probs[int(k) % self.K] > 0.0

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0.0)

    def sample(self, rng: RngStream) -> int:
        u = rng.uniform()
        k = int(np.searchsorted(self._cdf, u, side="right"))
        k = min(k, self.K - 1)
        # guards a zero-weight tail slot picked up by the clamp
        while self.probs[k] == 0.0:
            k -= 1
        return k

    def __repr__(self) -> str:
        return f"IndexDistribution(K={self.K}, support={self.support().size})"

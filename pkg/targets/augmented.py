import logging
import math
from typing import Sequence

import numpy as np
from scipy.stats import norm, truncnorm

from core.model import PotentialModel
from core.rng import RngStream
from targets.mixture import GaussianMixture, LOG_2PI

logger = logging.getLogger(__name__)


class AugmentedTarget(PotentialModel):
    """pi+ = pi + nu * g: the base target plus a small bridge density g.

    Give either ``nu`` or ``log_nu``; the latter reaches weights far below the
    smallest positive double.
    """

    def __init__(self, base: PotentialModel, bridge: GaussianMixture,
                 nu: float | None = None, log_nu: float | None = None):
        if bridge.means.shape[0] != 1:
            raise ValueError("bridge must be a single normal component")
        if bridge.dim != base.dim:
            raise ValueError(f"bridge dimension {bridge.dim} differs from base dimension {base.dim}")
        if (nu is None) == (log_nu is None):
            raise ValueError("give exactly one of nu and log_nu")
        if log_nu is None:
            if nu <= 0:
                raise ValueError(f"nu must be positive, got {nu}")
            log_nu = math.log(nu)
        self.base = base
        self.bridge = bridge
        self.log_nu = float(log_nu)
        self.dim = base.dim
        self.bounds = base.bounds

    def _branches(self, x: np.ndarray) -> tuple[float, float, float]:
        u_base = self.base.potential(x)
        log_bridge = self.log_nu - self.bridge.potential(x)
        lse = float(np.logaddexp(-u_base, log_bridge))
        return u_base, log_bridge, lse

    def potential(self, x: np.ndarray) -> float:
        return -self._branches(x)[2]

    def base_weight(self, x: np.ndarray) -> float:
        """pi(x) / (pi(x) + nu g(x))."""
        u_base, _, lse = self._branches(x)
        return math.exp(-u_base - lse)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        r = self.base_weight(x)
        grad = (1.0 - r) * self.bridge.gradient(x)
        if r > 0.0:
            grad = grad + r * self.base.gradient(x)
        return grad


def augmented_potential(at: AugmentedTarget, x) -> tuple[float, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return at.potential(x), at.gradient(x)


def rejection_filter(samples: Sequence, at: AugmentedTarget, rng: RngStream) -> list[np.ndarray]:
    """Keeps each sample with probability pi / (pi + nu g), preserving order."""
    kept = []
    for x in samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if rng.uniform() < at.base_weight(x):
            kept.append(x)
    logger.info(f"Rejection filter kept {len(kept)} of {len(samples)} samples")
    return kept


class GappedTarget(PotentialModel):
    """1-D density made of weighted normals, each truncated to its own open interval.

    U is +inf between the intervals; use it only as the base of an AugmentedTarget.
    """

    dim = 1

    def __init__(self, intervals, means, sds, weights):
        self.intervals = [(float(lo), float(hi)) for lo, hi in intervals]
        self.means = np.array(means, dtype=float)
        self.sds = np.array(sds, dtype=float)
        self.weights = np.array(weights, dtype=float)
        n = len(self.intervals)
        if not (self.means.size == self.sds.size == self.weights.size == n):
            raise ValueError("one mean, sd and weight per interval required")
        for lo, hi in self.intervals:
            if lo >= hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        ordered = sorted(self.intervals)
        for (_, hi), (lo, _) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise ValueError("intervals must not overlap")

    @classmethod
    def two_sided_gap(cls) -> "GappedTarget":
        """N(-2, 0.5^2) on (-3, -1) and N(3, 1) on (1, inf), equal weights."""
        return cls([(-3.0, -1.0), (1.0, math.inf)], [-2.0, 3.0], [0.5, 1.0], [0.5, 0.5])

    def component_of(self, x: float) -> int | None:
        for j, (lo, hi) in enumerate(self.intervals):
            if lo < x < hi:
                return j
        return None

    def potential(self, x: np.ndarray) -> float:
        xv = float(x[0])
        j = self.component_of(xv)
        if j is None:
            return math.inf
        z = (xv - self.means[j]) / self.sds[j]
        return float(0.5 * z * z + 0.5 * LOG_2PI + math.log(self.sds[j]) - math.log(self.weights[j]))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        xv = float(x[0])
        j = self.component_of(xv)
        if j is None:
            return np.zeros(1)
        return np.array([(xv - self.means[j]) / self.sds[j] ** 2])

    def component_masses(self) -> np.ndarray:
        """Normalized probability of each interval under the target."""
        masses = np.array([
            w * (norm.cdf(hi, loc=m, scale=s) - norm.cdf(lo, loc=m, scale=s))
            for (lo, hi), m, s, w in zip(self.intervals, self.means, self.sds, self.weights)
        ])
        return masses / masses.sum()

    def cdf(self, x: float) -> float:
        """Target CDF at x, normalized over the intervals."""
        masses = self.component_masses()
        total = 0.0
        for j, (lo, hi) in enumerate(self.intervals):
            if x <= lo:
                continue
            m, s = self.means[j], self.sds[j]
            inside = norm.cdf(min(x, hi), loc=m, scale=s) - norm.cdf(lo, loc=m, scale=s)
            full = norm.cdf(hi, loc=m, scale=s) - norm.cdf(lo, loc=m, scale=s)
            total += masses[j] * inside / full
        return float(total)

    def sample_component(self, j: int, rng: RngStream, size: int = 1) -> np.ndarray:
        """Exact draws from component j, its normal truncated to its interval."""
        lo, hi = self.intervals[j]
        m, s = self.means[j], self.sds[j]
        return truncnorm.rvs((lo - m) / s, (hi - m) / s, loc=m, scale=s,
                             size=size, random_state=rng.generator)

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        """Exact draws from the target, shape (size,)."""
        comps = rng.generator.choice(len(self.intervals), size=size, p=self.component_masses())
        out = np.empty(size)
        for j in range(len(self.intervals)):
            picked = comps == j
            if picked.any():
                out[picked] = self.sample_component(j, rng, int(picked.sum()))
        return out

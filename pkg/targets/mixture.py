import numpy as np
from scipy.special import logsumexp

from core.model import PotentialModel

LOG_2PI = float(np.log(2.0 * np.pi))


class GaussianMixture(PotentialModel):
    """Weighted mixture of normals with isotropic or diagonal covariances.

    U is the negative log of the normalized mixture density, normal constants
    included. ``sds`` is either one value per component (isotropic) or an
    (m, d) array of per-coordinate standard deviations.
    """

    def __init__(self, weights, means, sds):
        means = np.atleast_2d(np.array(means, dtype=float))
        m, d = means.shape
        w = np.array(weights, dtype=float).ravel()
        if w.size != m:
            raise ValueError(f"{w.size} weights for {m} components")
        if np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        if not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-12):
            raise ValueError(f"mixture weights sum to {w.sum()}, expected 1")
        sds = np.array(sds, dtype=float)
        if sds.ndim <= 1:
            sds = np.broadcast_to(sds.reshape(-1, 1), (m, d)).copy()
        if sds.shape != (m, d) or np.any(sds <= 0):
            raise ValueError("component standard deviations must be positive, shape (m,) or (m, d)")
        self.dim = d
        self.weights = w
        self.means = means
        self.sds = sds
        self._prec = 1.0 / sds ** 2
        # log w_j - 0.5 d log 2pi - sum log sd_j
        self._log_norm = np.log(w) - 0.5 * d * LOG_2PI - np.sum(np.log(sds), axis=1)
        for arr in (self.weights, self.means, self.sds, self._prec, self._log_norm):
            arr.setflags(write=False)

    @classmethod
    def single(cls, mean, sd) -> "GaussianMixture":
        mean = np.atleast_1d(np.array(mean, dtype=float))
        return cls([1.0], mean[None, :], [sd])

    @classmethod
    def symmetric_pair(cls, mu1, mu2, sd: float = 1.0) -> "GaussianMixture":
        return cls([0.5, 0.5], np.vstack([np.atleast_1d(mu1), np.atleast_1d(mu2)]).astype(float), [sd, sd])

    def _component_log_densities(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        diff = x[None, :] - self.means
        log_dens = self._log_norm - 0.5 * np.sum(diff * diff * self._prec, axis=1)
        return log_dens, diff

    def potential(self, x: np.ndarray) -> float:
        if self.means.shape[0] == 1:
            diff = x - self.means[0]
            return float(0.5 * np.sum(diff * diff * self._prec[0]) - self._log_norm[0])
        log_dens, _ = self._component_log_densities(x)
        return float(-logsumexp(log_dens))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self.means.shape[0] == 1:
            return (x - self.means[0]) * self._prec[0]
        log_dens, diff = self._component_log_densities(x)
        # responsibilities from shifted log weights; an underflowed component gives exactly 0
        resp = np.exp(log_dens - logsumexp(log_dens))
        return resp @ (diff * self._prec)

    def potential_and_gradient(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        log_dens, diff = self._component_log_densities(x)
        lse = logsumexp(log_dens)
        resp = np.exp(log_dens - lse)
        return float(-lse), resp @ (diff * self._prec)

    def log_density(self, x: np.ndarray) -> float:
        return -self.potential(x)


def mixture_potential(mix: GaussianMixture, x) -> tuple[float, np.ndarray]:
    return mix.potential_and_gradient(np.atleast_1d(np.asarray(x, dtype=float)))

"""Sensor network localization posterior, its hyperparameter conditionals, and data generation.

A pair of sensors at distance d is observed with probability exp(-d^2 / (2 R^2));
an observed pair reports y ~ N(d, sigma_e^2). Unknown sensor locations carry a
uniform prior on the unit square. R and sigma_e, when unknown, carry exponential
priors and are sampled on the log scale.
"""
import logging
import math
from typing import Literal

import numpy as np

from core.errors import DegeneratePair
from core.model import PotentialModel, make_bounds
from core.rng import RngStream
from schemas.sensor import SensorDataset

logger = logging.getLogger(__name__)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
RATE_R = 1.0 / 0.5
RATE_SIGMA_E = 1.0 / 0.05

DEFAULT_KNOWN = ((0.45, 0.52), (0.55, 0.48), (0.90, 0.50))
DEFAULT_R = 0.3
DEFAULT_SIGMA_E = 0.02
DEFAULT_SENSOR_SEED = 20210421


class _PairTable:
    """Index arrays over every pair with at least one unknown sensor."""

    def __init__(self, ds: SensorDataset):
        n_u, n = ds.n_unknown, ds.n_sensors
        I, J = [], []
        for t in range(n_u):
            for u in range(t + 1, n):
                I.append(t)
                J.append(u)
        self.I = np.array(I, dtype=int)
        self.J = np.array(J, dtype=int)
        lookup = {pair: i for i, pair in enumerate(zip(I, J))}
        self.observed = np.zeros(self.I.size, dtype=bool)
        self.y = np.full(self.I.size, np.nan)
        for (t, u), y in zip(ds.obs, ds.dist):
            idx = lookup[(t, u)]
            self.observed[idx] = True
            self.y[idx] = y
        self.known = ds.known_array()
        self.n_unknown = n_u

    def positions(self, locs: np.ndarray) -> np.ndarray:
        return np.vstack([np.reshape(locs, (-1, 2)), self.known])

    def geometry(self, locs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = self.positions(locs)
        diff = pos[self.I] - pos[self.J]
        d2 = np.einsum("ij,ij->i", diff, diff)
        return diff, d2


class SensorPosterior(PotentialModel):
    """Potential of the 2 * n_unknown location vector given fixed R and sigma_e."""

    def __init__(self, ds: SensorDataset, R: float | None = None, sigma_e: float | None = None):
        self.ds = ds
        self.R = float(R if R is not None else ds.R)
        self.sigma_e = float(sigma_e if sigma_e is not None else ds.sigma_e)
        self._pairs = _PairTable(ds)
        self.dim = 2 * ds.n_unknown
        self.bounds = make_bounds(0.0, 1.0, self.dim)

    def log_likelihood_terms(self, x: np.ndarray) -> np.ndarray:
        pt = self._pairs
        _, d2 = pt.geometry(x)
        q = d2 / (2.0 * self.R ** 2)
        obs = pt.observed
        ll = np.empty_like(q)
        d_obs = np.sqrt(d2[obs])
        ll[obs] = (-q[obs] - (pt.y[obs] - d_obs) ** 2 / (2.0 * self.sigma_e ** 2)
                   - LOG_SQRT_2PI - math.log(self.sigma_e))
        with np.errstate(divide="ignore"):
            ll[~obs] = np.log(-np.expm1(-q[~obs]))
        return ll

    def potential(self, x: np.ndarray) -> float:
        return float(-np.sum(self.log_likelihood_terms(x)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        pt = self._pairs
        diff, d2 = pt.geometry(x)
        R2 = self.R ** 2
        q = d2 / (2.0 * R2)
        obs = pt.observed
        # coef = (d ell / d d) / d, so d ell / d x_t = coef * (x_t - x_u)
        coef = np.empty_like(q)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            d_obs = np.sqrt(d2[obs])
            coef[obs] = -1.0 / R2 + (pt.y[obs] - d_obs) / (self.sigma_e ** 2 * d_obs)
            q_un = q[~obs]
            if np.any(q_un == 0.0):
                raise DegeneratePair("an unobserved pair of sensors coincides")
            coef[~obs] = 1.0 / (R2 * np.expm1(q_un))
        g_pair = coef[:, None] * diff
        grad_pos = np.zeros((pt.n_unknown + pt.known.shape[0], 2))
        np.add.at(grad_pos, pt.I, g_pair)
        np.add.at(grad_pos, pt.J, -g_pair)
        return -grad_pos[:pt.n_unknown].ravel()


def sensor_potential(locs, ds: SensorDataset) -> tuple[float, np.ndarray]:
    """U and gradient of the location posterior, with R and sigma_e taken from ds.

    An unobserved coincident pair gives U = +inf and a DegeneratePair from the gradient.
    """
    model = SensorPosterior(ds)
    x = np.asarray(locs, dtype=float).ravel()
    u = model.potential(x)
    if math.isinf(u):
        return u, np.full(x.size, np.nan)
    return u, model.gradient(x)


class HyperConditional(PotentialModel):
    """Potential of theta = log R or theta = log sigma_e with the locations frozen."""

    dim = 1

    def __init__(self, which: Literal["R", "sigma_e"], locs, ds: SensorDataset,
                 R: float | None = None, sigma_e: float | None = None):
        if which not in ("R", "sigma_e"):
            raise ValueError(f"unknown hyperparameter {which!r}")
        self.which = which
        self.R = float(R if R is not None else ds.R)
        self.sigma_e = float(sigma_e if sigma_e is not None else ds.sigma_e)
        pt = _PairTable(ds)
        _, d2 = pt.geometry(np.asarray(locs, dtype=float))
        self._d2_obs = d2[pt.observed]
        self._d2_unobs = d2[~pt.observed]
        self._resid2 = (pt.y[pt.observed] - np.sqrt(self._d2_obs)) ** 2
        self.rate = RATE_R if which == "R" else RATE_SIGMA_E

    def potential(self, x: np.ndarray) -> float:
        theta = float(x[0])
        scale = float(np.exp(theta))
        if self.which == "R":
            with np.errstate(divide="ignore", over="ignore"):
                q_obs = self._d2_obs * np.exp(-2.0 * theta) / 2.0
                q_un = self._d2_unobs * np.exp(-2.0 * theta) / 2.0
                lik = np.sum(q_obs) - np.sum(np.log(-np.expm1(-q_un)))
        else:
            n_obs = self._resid2.size
            with np.errstate(over="ignore"):
                lik = float(np.sum(self._resid2) * np.exp(-2.0 * theta) / 2.0) + n_obs * (LOG_SQRT_2PI + theta)
        return float(lik + self.rate * scale - math.log(self.rate) - theta)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        theta = float(x[0])
        scale = float(np.exp(theta))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.which == "R":
                q_obs = self._d2_obs * np.exp(-2.0 * theta) / 2.0
                q_un = self._d2_unobs * np.exp(-2.0 * theta) / 2.0
                un_terms = np.where(q_un > 0.0, 2.0 * q_un / np.expm1(q_un), 2.0)
                dlik = -2.0 * np.sum(q_obs) + np.sum(un_terms)
            else:
                dlik = -np.sum(self._resid2) * np.exp(-2.0 * theta) + self._resid2.size
        return np.array([dlik + self.rate * scale - 1.0])


def hyper_potential(log_param: float, which: Literal["R", "sigma_e"], locs,
                    ds: SensorDataset) -> tuple[float, np.ndarray]:
    model = HyperConditional(which, locs, ds)
    x = np.array([log_param], dtype=float)
    return model.potential(x), model.gradient(x)


def log_posterior(ds: SensorDataset, locs, log_R: float | None = None,
                  log_sigma_e: float | None = None) -> float:
    """Log posterior density of the locations, plus the log-scale hyperparameters when given."""
    x = np.asarray(locs, dtype=float).ravel()
    if log_R is None and log_sigma_e is None:
        return -SensorPosterior(ds).potential(x)
    R, sigma_e = math.exp(log_R), math.exp(log_sigma_e)
    lp = -SensorPosterior(ds, R=R, sigma_e=sigma_e).potential(x)
    lp += math.log(RATE_R) - RATE_R * R + log_R
    lp += math.log(RATE_SIGMA_E) - RATE_SIGMA_E * sigma_e + log_sigma_e
    return lp


def observe_pair(d: float, R: float, sigma_e: float, rng: RngStream) -> float | None:
    """Returns a noisy distance with probability exp(-d^2 / (2 R^2)), otherwise None."""
    if rng.uniform() < math.exp(-d * d / (2.0 * R * R)):
        return d + sigma_e * float(rng.standard_normal(1)[0])
    return None


def generate_sensor_data(truth, R: float, sigma_e: float, rng: RngStream,
                         n_unknown: int = 8) -> SensorDataset:
    """Simulates measurements for all pairs with at least one unknown sensor.

    ``truth`` holds the unknown positions first and the known ones after them.
    """
    pos = np.asarray(truth, dtype=float).reshape(-1, 2)
    n = pos.shape[0]
    if n <= n_unknown:
        raise ValueError(f"{n} positions given for {n_unknown} unknown sensors; known sensors missing")
    obs, dist = [], []
    for t in range(n_unknown):
        for u in range(t + 1, n):
            d = float(np.linalg.norm(pos[t] - pos[u]))
            y = observe_pair(d, R, sigma_e, rng)
            if y is not None:
                obs.append((t, u))
                dist.append(y)
    logger.info(f"Generated {len(obs)} distance measurements among {n} sensors")
    return SensorDataset(
        n_unknown=n_unknown,
        known=[tuple(p) for p in pos[n_unknown:].tolist()],
        obs=obs,
        dist=dist,
        R=R,
        sigma_e=sigma_e,
        truth=[tuple(p) for p in pos[:n_unknown].tolist()],
    )


def default_sensor_dataset(seed: int = DEFAULT_SENSOR_SEED, n_unknown: int = 8) -> SensorDataset:
    """Three fixed known sensors, two of them nearly coincident, and seeded unknowns."""
    rng = RngStream(seed)
    unknown = 0.05 + 0.9 * rng.generator.random((n_unknown, 2))
    truth = np.vstack([unknown, np.array(DEFAULT_KNOWN)])
    return generate_sensor_data(truth, DEFAULT_R, DEFAULT_SIGMA_E, rng, n_unknown=n_unknown)


def mirror_configuration(locs, known) -> np.ndarray:
    """Reflects locations across the total least squares line through the known sensors."""
    pts = np.asarray(locs, dtype=float).reshape(-1, 2)
    known = np.asarray(known, dtype=float).reshape(-1, 2)
    center = known.mean(axis=0)
    _, _, vt = np.linalg.svd(known - center)
    direction = vt[0]
    rel = pts - center
    along = rel @ direction
    mirrored = 2.0 * np.outer(along, direction) - rel + center
    return mirrored

"""Deterministic-scan Gibbs sampler for sensor locations with unknown R and sigma_e.

Each sweep updates the locations given (R, sigma_e), then log R given the
locations, then log sigma_e given both. The location block runs either THT or
plain HMC; the two hyperparameter blocks run one-dimensional HMC with unit mass.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from core.mass import MassSpec
from core.rng import RngStream
from core.samplers import hmc_step, tht_step
from schemas.results import StepResult
from schemas.sampler import HmcConfig, ThtConfig
from schemas.sensor import SensorDataset
from targets.sensor import HyperConditional, SensorPosterior

logger = logging.getLogger(__name__)


def default_hyper_config() -> HmcConfig:
    """Thirty leapfrog steps of size 0.02 with unit mass."""
    return HmcConfig(eps=0.02, n_leapfrog=30, mass=MassSpec.identity(1))


@dataclass(frozen=True)
class GibbsState:
    locs: np.ndarray  # (n_unknown, 2)
    log_R: float
    log_sigma_e: float

    def __post_init__(self):
        locs = np.asarray(self.locs, dtype=float).reshape(-1, 2)
        if np.any(locs < 0.0) or np.any(locs > 1.0):
            raise ValueError("sensor locations must lie in the unit square")
        object.__setattr__(self, "locs", locs)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.locs.ravel(), [self.log_R, self.log_sigma_e]])

    @classmethod
    def from_vector(cls, vec) -> "GibbsState":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:-2].reshape(-1, 2), float(vec[-2]), float(vec[-1]))


def _sweep(s: GibbsState, ds_template: SensorDataset, loc_cfg: ThtConfig | HmcConfig,
           hyper_cfg: HmcConfig, rng: RngStream) -> tuple[GibbsState, StepResult, bool]:
    R, sigma_e = math.exp(s.log_R), math.exp(s.log_sigma_e)
    loc_model = SensorPosterior(ds_template, R=R, sigma_e=sigma_e)
    x = s.locs.ravel()
    if isinstance(loc_cfg, ThtConfig):
        loc_res = tht_step(loc_model, x, loc_cfg, rng)
    else:
        loc_res = hmc_step(loc_model, x, loc_cfg, rng)
    locs = loc_res.next_x

    r_model = HyperConditional("R", locs, ds_template, sigma_e=sigma_e)
    r_res = hmc_step(r_model, np.array([s.log_R]), hyper_cfg, rng)
    log_R = float(r_res.next_x[0])

    s_model = HyperConditional("sigma_e", locs, ds_template, R=math.exp(log_R))
    s_res = hmc_step(s_model, np.array([s.log_sigma_e]), hyper_cfg, rng)
    log_sigma_e = float(s_res.next_x[0])

    moved = loc_res.accepted_move or r_res.accepted_move or s_res.accepted_move
    return GibbsState(locs.reshape(-1, 2), log_R, log_sigma_e), loc_res, moved


def gibbs_sweep(s: GibbsState, ds_template: SensorDataset, tht_cfg: ThtConfig | HmcConfig,
                hyper_cfg: HmcConfig, rng: RngStream) -> GibbsState:
    """One sweep x -> log R -> log sigma_e. ``tht_cfg`` may also be an HmcConfig."""
    return _sweep(s, ds_template, tht_cfg, hyper_cfg, rng)[0]


@dataclass(frozen=True)
class GibbsKernel:
    """Gibbs sweep over the flat vector (locs, log_R, log_sigma_e), for run_chain."""

    ds: SensorDataset
    loc_cfg: ThtConfig | HmcConfig
    hyper_cfg: HmcConfig

    def __call__(self, x: np.ndarray, rng: RngStream) -> StepResult:
        state, loc_res, moved = _sweep(GibbsState.from_vector(x), self.ds, self.loc_cfg, self.hyper_cfg, rng)
        return StepResult(next_x=state.to_vector(), accepted_move=moved, delta_H=loc_res.delta_H,
                          k0=loc_res.k0, proposals_used=loc_res.proposals_used,
                          acceptable_found=loc_res.acceptable_found)

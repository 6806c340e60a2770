"""Tuning advisor for the time-scale coefficient a, the period K and the step eps.

A slow pilot path is simulated for each candidate a. With the right a the
oscillation amplitude of v-bar stays constant while eta rises and falls; the
candidate with the least amplitude drift wins. The oscillation frequency of
v-bar along the winning path gives the bounds on K and eps.
"""
import logging
import math
from typing import Sequence

import numpy as np

from core.diagnostics import estimate_oscillation_frequency
from core.dynamics import tht_map
from core.errors import NonFiniteState, PilotDiverged
from core.hamiltonian import ExtendedState, sample_initial_velocity
from core.mass import MassSpec
from core.model import PotentialModel
from core.rng import RngStream
from core.schedule import CosineSchedule, IndexDistribution
from schemas.diagnostics import PilotScore, TuningRecommendation
from schemas.sampler import ThtConfig

logger = logging.getLogger(__name__)


def tuning_bounds(rho_min: float, rho_max: float, eps: float) -> tuple[int, float]:
    """K_min = ceil(5 / (eps rho_min)) and eps_max = 1 / (10 rho_max)."""
    return math.ceil(5.0 / (eps * rho_min)), 1.0 / (10.0 * rho_max)


def pilot_path(model: PotentialModel, x0: np.ndarray, v0: np.ndarray, cfg: ThtConfig,
               coordinate: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Runs one schedule cycle from k = 0 and returns (k, v-bar coordinate) per step."""
    schedule = cfg.schedule
    s = ExtendedState(x0, 0, v0)
    ks = [0]
    vbar = [float(v0[coordinate]) * math.exp(cfg.a * schedule.eta(0))]
    for _ in range(schedule.K):
        s = tht_map(model, s, schedule, cfg)
        ks.append(s.k)
        vbar.append(float(s.v[coordinate]) * math.exp(cfg.a * schedule.eta(s.k)))
    return np.array(ks), np.array(vbar)


def amplitude_drift(ks: np.ndarray, vbar: np.ndarray, K: int) -> float:
    """|log RMS over the high-eta middle half - log RMS over the low-eta outer quarters|."""
    phase = ks / K
    middle = (phase >= 0.25) & (phase < 0.75)
    rms_mid = math.sqrt(float(np.mean(vbar[middle] ** 2)))
    rms_out = math.sqrt(float(np.mean(vbar[~middle] ** 2)))
    if rms_mid == 0.0 or rms_out == 0.0:
        return math.inf
    return abs(math.log(rms_mid) - math.log(rms_out))


def recommend_tuning(model: PotentialModel, pilot_start, eta_star: float, a_grid: Sequence[float],
                     rng: RngStream, eps: float = 0.05, K_pilot: int = 4000,
                     mass: MassSpec | None = None, coordinate: int = 0,
                     n_windows: int = 8, traces_out: dict | None = None) -> TuningRecommendation:
    """Scores each candidate a on a pilot path and derives K_min and eps_max.

    When ``traces_out`` is given it receives a -> (k, v-bar) for every pilot
    that completed.
    """
    x0 = np.asarray(pilot_start, dtype=float).ravel()
    mass = mass or MassSpec.identity(x0.size)
    schedule = CosineSchedule(eta_star=eta_star, c_eta=0.0, K=K_pilot)
    psi = IndexDistribution.point_mass(K_pilot)
    # one velocity shared by every candidate so the scores are comparable
    v0 = sample_initial_velocity(mass, schedule.alpha(0), rng)

    scores = []
    traces = {}
    for a in a_grid:
        cfg = ThtConfig(eps=eps, a=a, L=1, N=K_pilot, schedule=schedule, psi=psi, mass=mass)
        try:
            ks, vbar = pilot_path(model, x0, v0, cfg, coordinate)
        except NonFiniteState as e:
            logger.warning(f"Pilot path for a={a} diverged: {e}")
            scores.append(PilotScore(a=a, score=None))
            continue
        score = amplitude_drift(ks, vbar, K_pilot)
        logger.info(f"Pilot a={a:.4g}: amplitude drift {score:.4f}")
        scores.append(PilotScore(a=a, score=score if math.isfinite(score) else None))
        traces[a] = vbar
        if traces_out is not None:
            traces_out[a] = (ks, vbar)

    valid = [s for s in scores if s.score is not None]
    if not valid:
        raise PilotDiverged(f"every pilot path failed for a in {list(a_grid)}")
    best = min(valid, key=lambda s: s.score)
    a_hat = best.a

    vbar = traces[a_hat]
    width = max(len(vbar) // n_windows, 4)
    rhos = []
    for start in range(0, len(vbar) - width + 1, max(width // 2, 1)):
        rho = estimate_oscillation_frequency(vbar[start:start + width], eps)
        if rho > 0:
            rhos.append(rho)

    rec = TuningRecommendation(a_hat=a_hat, gamma_hat=2.0 / a_hat - 2.0, eps=eps, scores=scores)
    if rhos:
        rec.rho_min, rec.rho_max = min(rhos), max(rhos)
        rec.K_min, rec.eps_max = tuning_bounds(rec.rho_min, rec.rho_max, eps)
    else:
        logger.warning("Pilot path shows no oscillation; K_min and eps_max left unset")
    logger.info(f"Tuning recommendation: a={rec.a_hat:.4g}, gamma={rec.gamma_hat:.4g}, "
                f"K_min={rec.K_min}, eps_max={rec.eps_max}")
    return rec

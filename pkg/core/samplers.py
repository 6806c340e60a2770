import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from core.dynamics import PhasePoint, leapfrog_step, tht_map
from core.errors import NonFiniteState
from core.hamiltonian import (ExtendedState, INFINITE_ENERGY, extended_hamiltonian,
                              hamiltonian, sample_initial_velocity)
from core.mass import MassSpec
from core.model import PotentialModel
from core.rng import RngStream
from schemas.results import ChainOutput, StepResult
from schemas.sampler import EnhancedConfig, HmcConfig, ThtConfig

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray, RngStream], StepResult]


def _log_uniform(lam: float) -> float:
    return math.log(lam) if lam > 0.0 else -math.inf


def _acceptable(log_lam: float, h0: float, h: float) -> bool:
    # Lambda < exp(H0 - H); an infinite H is never acceptable
    if h == INFINITE_ENERGY:
        return False
    return log_lam < h0 - h


def _check_dim(x: np.ndarray, mass: MassSpec) -> None:
    if x.size != mass.dim:
        raise ValueError(f"state has dimension {x.size}, mass matrix has {mass.dim}")


def _rejected(x: np.ndarray, used: int, found: int = 0, k0: int | None = None, trace=None) -> StepResult:
    return StepResult(next_x=x, accepted_move=False, delta_H=math.nan, k0=k0,
                      proposals_used=used, acceptable_found=found, h_trace=trace)


def hmc_step(model: PotentialModel, x: np.ndarray, cfg: HmcConfig, rng: RngStream) -> StepResult:
    """Standard HMC: n_leapfrog steps from a fresh velocity, Metropolis accept at the endpoint."""
    _check_dim(x, cfg.mass)
    lam = rng.uniform()
    v0 = sample_initial_velocity(cfg.mass, 1.0, rng)
    h0 = hamiltonian(model, cfg.mass, x, v0)
    p = PhasePoint(x, v0)
    try:
        for _ in range(cfg.n_leapfrog):
            p = leapfrog_step(model, p, cfg.mass, 1.0, cfg.eps, bounds=model.bounds)
    except NonFiniteState as e:
        logger.debug(f"HMC trajectory rejected: {e}")
        return _rejected(x, 1)
    h1 = hamiltonian(model, cfg.mass, p.x, p.v)
    if _acceptable(_log_uniform(lam), h0, h1):
        return StepResult(next_x=p.x, accepted_move=True, delta_H=h1 - h0,
                          proposals_used=1, acceptable_found=1)
    return _rejected(x, 1)


def mass_enhanced_step(model: PotentialModel, x: np.ndarray, cfg: EnhancedConfig, rng: RngStream) -> StepResult:
    """Sequential proposals along a path simulated with mass alpha*M, judged by the original H."""
    _check_dim(x, cfg.mass)
    lam = rng.uniform()
    v0 = sample_initial_velocity(cfg.mass, 1.0, rng)
    h0 = hamiltonian(model, cfg.mass, x, v0)
    log_lam = _log_uniform(lam)
    p = PhasePoint(x, v0)
    found = 0
    used = 0
    for n in range(1, cfg.N + 1):
        try:
            p = leapfrog_step(model, p, cfg.mass, cfg.alpha, cfg.eps_tilde, bounds=model.bounds)
        except NonFiniteState as e:
            logger.debug(f"Enhanced trajectory truncated at proposal {n}: {e}")
            used = n
            break
        used = n
        h = hamiltonian(model, cfg.mass, p.x, p.v)
        if _acceptable(log_lam, h0, h):
            found += 1
            if found == cfg.L:
                return StepResult(next_x=p.x, accepted_move=True, delta_H=h - h0,
                                  proposals_used=used, acceptable_found=found)
    return _rejected(x, used, found)


def tht_step(model: PotentialModel, x: np.ndarray, cfg: ThtConfig, rng: RngStream,
             record_trace: bool = False) -> StepResult:
    """One tempered Hamiltonian transition.

    Draws Lambda, k0 ~ psi and v~(0) ~ N(0, alpha_k0^-1 M^-1), then applies the
    S map up to N times. Candidate n is acceptable when k0 + n is in the support
    of psi and Lambda < exp(H0 - H_n); the L-th acceptable position is returned.
    Off-support candidates are skipped without evaluating the potential.
    """
    _check_dim(x, cfg.mass)
    schedule, psi = cfg.schedule, cfg.psi
    lam = rng.uniform()
    k0 = psi.sample(rng)
    v0 = sample_initial_velocity(cfg.mass, schedule.alpha(k0), rng)
    s = ExtendedState(x, k0, v0)
    h0 = extended_hamiltonian(model, s, schedule, psi, cfg.mass)
    log_lam = _log_uniform(lam)
    trace = [] if record_trace else None
    found = 0
    used = 0
    for n in range(1, cfg.N + 1):
        try:
            s = tht_map(model, s, schedule, cfg)
        except NonFiniteState as e:
            logger.debug(f"THT trajectory truncated at proposal {n}: {e}")
            used = n
            break
        used = n
        if not psi.in_support(s.k):
            if trace is not None:
                trace.append((n, s.k, math.inf, False))
            continue
        h = extended_hamiltonian(model, s, schedule, psi, cfg.mass)
        ok = _acceptable(log_lam, h0, h)
        if trace is not None:
            trace.append((n, s.k, h - h0, ok))
        if ok:
            found += 1
            if found == cfg.L:
                return StepResult(next_x=s.x, accepted_move=True, delta_H=h - h0, k0=k0,
                                  proposals_used=used, acceptable_found=found, h_trace=trace)
    return _rejected(x, used, found, k0=k0, trace=trace)


@dataclass(frozen=True)
class HmcKernel:
    model: PotentialModel
    cfg: HmcConfig

    def __call__(self, x: np.ndarray, rng: RngStream) -> StepResult:
        return hmc_step(self.model, x, self.cfg, rng)


@dataclass(frozen=True)
class EnhancedKernel:
    model: PotentialModel
    cfg: EnhancedConfig

    def __call__(self, x: np.ndarray, rng: RngStream) -> StepResult:
        return mass_enhanced_step(self.model, x, self.cfg, rng)


@dataclass(frozen=True)
class ThtKernel:
    model: PotentialModel
    cfg: ThtConfig
    record_trace: bool = False

    def __call__(self, x: np.ndarray, rng: RngStream) -> StepResult:
        return tht_step(self.model, x, self.cfg, rng, record_trace=self.record_trace)


def run_chain(kernel: Kernel, x0, iters: int, rng: RngStream, chain_index: int = 0) -> ChainOutput:
    """Iterates ``kernel`` from x0 and collects every state and step result."""
    x = np.array(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(f"chain {chain_index} initial state is not finite")
    states = np.empty((iters + 1, x.size))
    states[0] = x
    results: List[StepResult] = []
    start = time.perf_counter()
    for i in range(iters):
        res = kernel(x, rng)
        x = res.next_x
        states[i + 1] = x
        results.append(res)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"chain {chain_index} iter {i + 1}: accepted={res.accepted_move} "
                         f"dH={res.delta_H:.4g} used={res.proposals_used}")
    wall_time = time.perf_counter() - start
    out = ChainOutput(states=states, step_results=results, wall_time=wall_time, chain_index=chain_index)
    logger.info(f"Chain {chain_index} finished {iters} iterations in {wall_time:.2f}s, "
                f"acceptance rate {out.acceptance_rate:.3f}")
    return out


def _run_indexed(job) -> ChainOutput:
    kernel, x0, iters, base_seed, index = job
    return run_chain(kernel, x0, iters, RngStream.derive(base_seed, index), chain_index=index)


def run_parallel_chains(kernel: Kernel, inits: Sequence, iters: int, base_seed: int,
                        n_workers: int = 1) -> List[ChainOutput]:
    """Runs one chain per initial state; chain i draws from RngStream.derive(base_seed, i).

    ``kernel`` must be picklable when n_workers > 1 (the kernel classes above are).
    Results do not depend on n_workers.
    """
    if len(inits) == 0:
        raise ValueError("run_parallel_chains needs at least one initial state")
    jobs = [(kernel, x0, iters, base_seed, i) for i, x0 in enumerate(inits)]
    if n_workers <= 1 or len(jobs) == 1:
        return [_run_indexed(job) for job in jobs]
    logger.info(f"Running {len(jobs)} chains on {min(n_workers, len(jobs))} worker processes")
    with ProcessPoolExecutor(max_workers=min(n_workers, len(jobs))) as pool:
        return list(pool.map(_run_indexed, jobs))

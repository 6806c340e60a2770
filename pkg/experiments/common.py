import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.diagnostics import (ModeClassifier, delta_h_trace, effective_sample_size,
                              rank_normalized_rhat, summarize_delta_h)
from core.dynamics import bar_transform
from core.model import PotentialModel
from core.rng import RngStream
from core.samplers import Kernel, run_parallel_chains
from schemas.diagnostics import ArmSummary
from schemas.results import ChainOutput
from schemas.sampler import ThtConfig
from utils.file_utils import ArtifactWriter

logger = logging.getLogger(__name__)

# chain i draws from derive(seed, i); auxiliary streams sit far above any chain index
AUX_STREAM = 1_000_000


@dataclass
class RunContext:
    seed: int
    iterations: int
    workers: int
    writer: ArtifactWriter
    dim: Optional[int] = None

    def aux_rng(self, offset: int = 0) -> RngStream:
        return RngStream.derive(self.seed, AUX_STREAM + offset)

    def run_arm(self, kernel: Kernel, inits: Sequence, iterations: int | None = None) -> List[ChainOutput]:
        return run_parallel_chains(kernel, inits, iterations or self.iterations, self.seed, self.workers)


def post_burn_in(out: ChainOutput, burn_in: int) -> np.ndarray:
    """States after the initial one and the first ``burn_in`` iterations."""
    return out.states[1 + burn_in:]


def chains_frame(arm: str, outputs: Sequence[ChainOutput], columns: Sequence[str],
                 project: Callable[[np.ndarray], np.ndarray] | None = None) -> pd.DataFrame:
    frames = []
    for out in outputs:
        values = out.states if project is None else project(out.states)
        df = pd.DataFrame(values, columns=list(columns))
        df.insert(0, "iteration", np.arange(len(values)))
        df.insert(0, "chain", out.chain_index)
        df.insert(0, "arm", arm)
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def rhat_block(outputs: Sequence[ChainOutput], names: Sequence[str], burn_in: int) -> dict:
    if len(outputs) < 2:
        return {}
    kept = [post_burn_in(o, burn_in) for o in outputs]
    if min(k.shape[0] for k in kept) < 4:
        logger.warning("Too few draws after burn-in for R-hat")
        return {}
    n = min(k.shape[0] for k in kept)
    return {name: rank_normalized_rhat([k[:n, j] for k in kept]) for j, name in enumerate(names)}


def mode_visits(states: np.ndarray, classifier: ModeClassifier) -> List[int]:
    labels = {classifier(x) for x in states}
    labels.discard(None)
    return sorted(labels)


def summarize_arm(name: str, outputs: Sequence[ChainOutput], burn_in: int, hop_counts: List[int],
                  names: Sequence[str], reach: List[Optional[int]] | None = None) -> ArmSummary:
    dh = np.concatenate([o.delta_h() for o in outputs]) if outputs else np.array([])
    rhat = rhat_block(outputs, names, burn_in)
    ess = []
    for o in outputs:
        draws = post_burn_in(o, burn_in)
        if draws.shape[0] >= 4:
            ess.append(effective_sample_size(draws[:, 0]))
    return ArmSummary(
        name=name,
        n_chains=len(outputs),
        iterations=len(outputs[0].step_results),
        acceptance_rates=[o.acceptance_rate for o in outputs],
        hop_counts=hop_counts,
        delta_h=summarize_delta_h(dh),
        wall_time=sum(o.wall_time for o in outputs),
        effective_sample_size=ess or None,
        rhat=rhat or None,
        rhat_variables=len(rhat) if rhat else None,
        reach_iterations=reach,
    )


def trace_frame(model: PotentialModel, x0, cfg: ThtConfig, rng: RngStream,
                coordinate: int = 0, k0: int = 0) -> pd.DataFrame:
    """Energy error and bar-transformed coordinate along one proposal sweep started at k0."""
    rows = {}

    def record(n, s):
        eta = cfg.schedule.eta(s.k)
        xbar, vbar = bar_transform(s.x, s.v, eta, cfg.a)
        rows[n] = (s.k, eta, float(xbar[coordinate]), float(vbar[coordinate]))

    dh = dict(delta_h_trace(model, x0, cfg, rng, k0=k0, on_step=record))
    dh[0] = 0.0
    steps = sorted(n for n in rows if n in dh)
    return pd.DataFrame({
        "step": steps,
        "k": [rows[n][0] for n in steps],
        "eta": [rows[n][1] for n in steps],
        "delta_H": [dh[n] for n in steps],
        "xbar": [rows[n][2] for n in steps],
        "vbar": [rows[n][3] for n in steps],
    })

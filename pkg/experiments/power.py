"""Pilot traces on U(x) = c |x|^gamma and a short THT run with the recommended tuning."""
import logging

import numpy as np
import pandas as pd

from core.diagnostics import SignClassifier, count_mode_hops
from core.mass import MassSpec
from core.samplers import ThtKernel
from core.schedule import CosineSchedule, IndexDistribution
from core.tuning import recommend_tuning
from experiments.common import RunContext, chains_frame, post_burn_in, summarize_arm
from schemas.diagnostics import DiagnosticsReport
from schemas.experiment import PowerPilotExperiment
from schemas.sampler import ThtConfig
from targets.power import PowerPotential
from utils.file_utils import gnuplot_script, series_plot

logger = logging.getLogger(__name__)


def run_power_pilot(cfg: PowerPilotExperiment, ctx: RunContext) -> DiagnosticsReport:
    model = PowerPotential(cfg.c, cfg.gamma, dim=cfg.dim)
    start = np.full(cfg.dim, cfg.start)
    traces = {}
    rec = recommend_tuning(model, start, cfg.eta_star, cfg.a_grid, ctx.aux_rng(),
                           eps=cfg.eps, K_pilot=cfg.K_pilot, traces_out=traces)

    schedule = CosineSchedule(eta_star=cfg.eta_star, c_eta=0.0, K=cfg.K_pilot)
    rows = []
    for a, (ks, vbar) in traces.items():
        rows.append(pd.DataFrame({
            "a": a,
            "step": np.arange(len(ks)),
            "k": ks,
            "eta": [schedule.eta(k) for k in ks],
            "vbar": vbar,
        }))
    ctx.writer.write_csv("trace.csv", pd.concat(rows, ignore_index=True))

    K = max(rec.K_min or cfg.K_pilot, 2)
    eps = min(cfg.eps, rec.eps_max) if rec.eps_max else cfg.eps
    tht_cfg = ThtConfig(eps=eps, a=rec.a_hat, L=1, N=K,
                        schedule=CosineSchedule(eta_star=cfg.eta_star, c_eta=0.0, K=K),
                        psi=IndexDistribution.point_mass(K), mass=MassSpec.identity(cfg.dim))
    logger.info(f"Running recommended tuning: a={rec.a_hat}, K={K}, eps={eps}")
    outs = ctx.run_arm(ThtKernel(model, tht_cfg), [start] * cfg.chains)
    classifier = SignClassifier()
    hops = [count_mode_hops(post_burn_in(o, cfg.burn_in), classifier) for o in outs]
    names = [f"x{j}" for j in range(cfg.dim)]

    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations,
                               burn_in=cfg.burn_in, tuning=rec)
    report.arms.append(summarize_arm("tht", outs, cfg.burn_in, hops, names))
    report.extras["chain_K"] = K
    report.extras["chain_eps"] = eps
    ctx.writer.write_csv("chains.csv", chains_frame("tht", outs, names))

    pilot = ", ".join(f"'trace.csv' using 2:(abs($1-{a})<1e-12 ? $5 : 1/0) with lines title \"a={a}\""
                      for a in traces)
    chains = ", ".join(series_plot("chains.csv", "tht", c, 3, 4, f"chain {c}") for c in range(min(cfg.chains, 4)))
    ctx.writer.write_text("plot.gp", gnuplot_script(f"Pilot v-bar traces, gamma={cfg.gamma}", [pilot, chains],
                                                     ylabel="v-bar", xlabel="step"))
    return report

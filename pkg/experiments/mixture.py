"""Two-component Gaussian mixtures with far-apart modes, in one and in many dimensions."""
import logging
import math

import numpy as np
import pandas as pd

from core.diagnostics import ProjectionClassifier, count_mode_hops
from core.samplers import HmcKernel, ThtKernel
from experiments.common import RunContext, chains_frame, post_burn_in, summarize_arm, trace_frame
from schemas.diagnostics import DiagnosticsReport
from schemas.experiment import Mixture1dExperiment, MixtureHdExperiment
from targets.mixture import GaussianMixture
from utils.file_utils import gnuplot_script, series_plot

logger = logging.getLogger(__name__)


def _trace_plot() -> str:
    return ("'trace.csv' using 1:4 with lines title \"delta H\", "
            "'trace.csv' using 1:6 with lines axes x1y2 title \"v-bar\"")


def run_mixture1d(cfg: Mixture1dExperiment, ctx: RunContext) -> DiagnosticsReport:
    lo, hi = cfg.means
    mix = GaussianMixture.symmetric_pair([lo], [hi], cfg.sd)
    classifier = ProjectionClassifier([lo], [hi])
    tht_cfg = cfg.tht.build(1)
    kernels = {"tht": ThtKernel(mix, tht_cfg)}
    if cfg.hmc is not None:
        kernels["hmc"] = HmcKernel(mix, cfg.hmc.build(1))
    inits = [np.array([cfg.init])] * cfg.chains

    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations, burn_in=cfg.burn_in)
    frames = []
    for arm, kernel in kernels.items():
        logger.info(f"Running {arm} arm: {cfg.chains} chains x {ctx.iterations} iterations")
        outs = ctx.run_arm(kernel, inits)
        hops = [count_mode_hops(post_burn_in(o, cfg.burn_in), classifier) for o in outs]
        report.arms.append(summarize_arm(arm, outs, cfg.burn_in, hops, ["x0"]))
        draws = np.concatenate([post_burn_in(o, cfg.burn_in)[:, 0] for o in outs])
        upper = [classifier(np.array([x])) == 1 for x in draws]
        report.extras[f"{arm}_upper_mode_fraction"] = float(np.mean(upper)) if upper else None
        frames.append(chains_frame(arm, outs, ["x0"]))
    ctx.writer.write_csv("chains.csv", pd.concat(frames, ignore_index=True))

    plots = [", ".join(series_plot("chains.csv", arm, c, 3, 4, f"{arm} chain {c}")
                       for arm in kernels for c in range(min(cfg.chains, 4)))]
    if cfg.trace:
        ctx.writer.write_csv("trace.csv", trace_frame(mix, inits[0], tht_cfg, ctx.aux_rng()))
        plots.append(_trace_plot())
    ctx.writer.write_text("plot.gp", gnuplot_script("1-D mixture chains", plots, ylabel="x"))
    return report


def run_mixture_hd(cfg: MixtureHdExperiment, ctx: RunContext) -> DiagnosticsReport:
    d = ctx.dim or cfg.dim
    offset = 0.5 * cfg.separation / math.sqrt(d)
    mu1, mu2 = np.full(d, -offset), np.full(d, offset)
    mix = GaussianMixture.symmetric_pair(mu1, mu2, cfg.sd)
    classifier = ProjectionClassifier(mu1, mu2)
    tht_cfg = cfg.tht.build(d)
    logger.info(f"Mixture in {d} dimensions, mean separation {cfg.separation}")

    rng = ctx.aux_rng()
    inits = [mu1 + cfg.sd * rng.standard_normal(d) for _ in range(cfg.chains)]
    axis = (mu2 - mu1) / np.linalg.norm(mu2 - mu1)
    other = rng.standard_normal(d)
    other -= (other @ axis) * axis
    other /= np.linalg.norm(other)

    outs = ctx.run_arm(ThtKernel(mix, tht_cfg), inits)
    hops = [count_mode_hops(post_burn_in(o, cfg.burn_in), classifier) for o in outs]
    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations, burn_in=cfg.burn_in)
    report.arms.append(summarize_arm("tht", outs, cfg.burn_in, hops, [f"x{j}" for j in range(min(d, 2))]))
    report.extras["dim"] = d
    report.extras["accepted_moves"] = [sum(r.accepted_move for r in o.step_results) for o in outs]

    project = lambda states: np.column_stack([states @ axis, states @ other])
    ctx.writer.write_csv("chains.csv", chains_frame("tht", outs, ["proj_mean_axis", "proj_orthogonal"], project))
    plots = [", ".join(series_plot("chains.csv", "tht", c, 3, 4, f"chain {c}")
                       for c in range(min(cfg.chains, 4)))]
    if cfg.trace:
        ctx.writer.write_csv("trace.csv", trace_frame(mix, inits[0], tht_cfg, ctx.aux_rng(1)))
        plots.append(_trace_plot())
    ctx.writer.write_text("plot.gp", gnuplot_script(f"{d}-D mixture, projection on the mean axis", plots,
                                                     ylabel="projection"))
    return report

"""Crossing a gap in the support through a tiny bridge density, then filtering the bridge back out."""
import logging

import numpy as np

from core.diagnostics import SignClassifier, count_mode_hops
from core.rng import RngStream
from core.samplers import ThtKernel
from experiments.common import RunContext, chains_frame, mode_visits, post_burn_in, summarize_arm, trace_frame
from schemas.diagnostics import DiagnosticsReport
from schemas.experiment import GapBridgeExperiment
from targets.augmented import AugmentedTarget, GappedTarget, rejection_filter
from targets.mixture import GaussianMixture
from utils.file_utils import gnuplot_script, series_plot

logger = logging.getLogger(__name__)


def stratified_starts(base: GappedTarget, chains: int, rng: RngStream) -> list[np.ndarray]:
    """Chain i starts from an exact draw of component i mod the number of components."""
    n_comp = len(base.intervals)
    return [base.sample_component(i % n_comp, rng, 1) for i in range(chains)]


def _fractions(labels: list, n_comp: int) -> list:
    return [labels.count(j) / len(labels) if labels else None for j in range(n_comp)]


def run_gap_bridge(cfg: GapBridgeExperiment, ctx: RunContext) -> DiagnosticsReport:
    base = GappedTarget.two_sided_gap()
    bridge = GaussianMixture.single([0.0], cfg.bridge_sd)
    target = AugmentedTarget(base, bridge, log_nu=cfg.log_nu)
    tht_cfg = cfg.tht.build(1)
    classifier = SignClassifier()
    n_comp = len(base.intervals)

    if cfg.init is None:
        inits = stratified_starts(base, cfg.chains, ctx.aux_rng(2))
    else:
        inits = [np.array([cfg.init])] * cfg.chains
    outs = ctx.run_arm(ThtKernel(target, tht_cfg), inits)
    kept_chains = [post_burn_in(o, cfg.burn_in) for o in outs]
    hops = [count_mode_hops(s, classifier) for s in kept_chains]
    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations, burn_in=cfg.burn_in)
    report.arms.append(summarize_arm("tht", outs, cfg.burn_in, hops, ["x0"]))

    draws = np.vstack(kept_chains)
    kept = rejection_filter(list(draws), target, ctx.aux_rng())
    labels = [base.component_of(float(x[0])) for x in kept]
    fractions = _fractions(labels, n_comp)
    truth = base.component_masses()
    survival = len(kept) / len(draws) if len(draws) else None
    logger.info(f"Filter survival {survival}, component fractions {fractions}, truth {truth.tolist()}")

    report.extras.update({
        "filter_survival": survival,
        "kept_draws": len(kept),
        "draws_in_gap": int(sum(base.component_of(float(x[0])) is None for x in draws)),
        "component_fractions": fractions,
        "component_truth": truth.tolist(),
        "chain_component_fractions": [
            _fractions([base.component_of(float(x[0])) for x in s], n_comp) for s in kept_chains],
        "start_components": [base.component_of(float(x[0])) for x in inits],
        "modes_visited": [mode_visits(s, classifier) for s in kept_chains],
    })
    ctx.writer.write_csv("chains.csv", chains_frame("tht", outs, ["x0"]))
    plots = [", ".join(series_plot("chains.csv", "tht", c, 3, 4, f"chain {c}") for c in range(min(cfg.chains, 4)))]
    if cfg.trace:
        ctx.writer.write_csv("trace.csv", trace_frame(target, inits[0], tht_cfg, ctx.aux_rng(1)))
        plots.append("'trace.csv' using 1:4 with lines title \"delta H\"")
    ctx.writer.write_text("plot.gp", gnuplot_script("Gapped target with bridge", plots, ylabel="x"))
    return report

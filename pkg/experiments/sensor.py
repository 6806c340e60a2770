"""Sensor network localization: fixed hyperparameters, and the Gibbs variant with R and sigma_e unknown."""
import logging
import math

import numpy as np
import pandas as pd
from pydantic import ValidationError

from core.diagnostics import BasinClassifier, count_mode_hops, reach_iteration
from core.errors import ConfigError
from core.gibbs import GibbsKernel
from core.samplers import ThtKernel
from core.schedule import MassSchedule
from experiments.common import RunContext, chains_frame, mode_visits, post_burn_in, summarize_arm
from schemas.diagnostics import DiagnosticsReport
from schemas.experiment import SensorExperiment, SensorGibbsExperiment
from schemas.sensor import SensorDataset
from targets.sensor import SensorPosterior, default_sensor_dataset, log_posterior, mirror_configuration
from utils.file_utils import gnuplot_script, series_plot

logger = logging.getLogger(__name__)


def load_dataset(path: str | None) -> SensorDataset:
    if path is None:
        return default_sensor_dataset()
    try:
        with open(path, encoding="utf-8") as f:
            return SensorDataset.from_json(f.read())
    except OSError as e:
        raise ConfigError(f"cannot read sensor dataset {path}: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"invalid sensor dataset {path}: {e}") from e


def location_names(n_unknown: int) -> list[str]:
    return [f"s{t + 1}_{axis}" for t in range(n_unknown) for axis in ("x", "y")]


def basin_classifier(model: SensorPosterior, outs_by_arm: dict, n_loc: int) -> BasinClassifier | None:
    """Basins of the lowest-potential draw any chain reached and of its mirror image."""
    draws = [x[:n_loc] for outs in outs_by_arm.values() for o in outs for x in o.states[1:]]
    if not draws:
        return None
    best = min(draws, key=model.potential)
    mirror = mirror_configuration(best, model.ds.known_array()).ravel()
    clf = BasinClassifier(model, [best, mirror])
    logger.info(f"Reference levels {[round(u, 3) for u in clf.levels]}")
    return clf


def _initial_locations(ds: SensorDataset, chains: int, ctx: RunContext) -> list[np.ndarray]:
    rng = ctx.aux_rng()
    return [rng.generator.random(2 * ds.n_unknown) for _ in range(chains)]


def _mode_stats(outs, burn_in: int, classifier, n_loc: int) -> tuple[list[int], list[list[int]]]:
    if classifier is None:
        return [], []
    hops, visits = [], []
    for o in outs:
        locs = post_burn_in(o, burn_in)[:, :n_loc]
        hops.append(count_mode_hops(locs, classifier))
        visits.append(mode_visits(locs, classifier))
    return hops, visits


def _plot(arms, chains: int, title: str) -> str:
    first = ", ".join(series_plot("chains.csv", arm, c, 3, 4, f"{arm} chain {c}")
                      for arm in arms for c in range(min(chains, 4)))
    return gnuplot_script(title, [first], ylabel="sensor 1, x coordinate")


def run_sensor(cfg: SensorExperiment, ctx: RunContext) -> DiagnosticsReport:
    ds = load_dataset(cfg.dataset)
    model = SensorPosterior(ds)
    n_loc = 2 * ds.n_unknown
    names = location_names(ds.n_unknown)
    tht_cfg = cfg.tht.build(n_loc)
    arm_cfgs = {
        "tht": tht_cfg,
        "hmc": tht_cfg.with_schedule(MassSchedule.constant(0.0, cfg.tht.K)),
    }
    inits = _initial_locations(ds, cfg.chains, ctx)

    outs_by_arm = {}
    for arm in cfg.arms:
        logger.info(f"Running {arm} arm: {cfg.chains} chains x {ctx.iterations} iterations")
        outs_by_arm[arm] = ctx.run_arm(ThtKernel(model, arm_cfgs[arm]), inits)
    classifier = basin_classifier(model, outs_by_arm, n_loc)

    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations, burn_in=cfg.burn_in)
    frames = []
    for arm, outs in outs_by_arm.items():
        hops, visits = _mode_stats(outs, cfg.burn_in, classifier, n_loc)
        reach = [reach_iteration([-model.potential(x) for x in o.states[1:]]) for o in outs]
        report.arms.append(summarize_arm(arm, outs, cfg.burn_in, hops, names, reach))
        report.extras[f"{arm}_modes_visited"] = visits
        frames.append(chains_frame(arm, outs, names))
    if classifier is not None:
        report.extras["reference_levels"] = classifier.levels
    ctx.writer.write_csv("chains.csv", pd.concat(frames, ignore_index=True))
    ctx.writer.write_text("plot.gp", _plot(cfg.arms, cfg.chains, "Sensor locations"))
    return report


def budget_matched_iterations(cfg: SensorGibbsExperiment, iterations: int) -> int:
    """HMC-Gibbs sweeps costing as many leapfrog steps as ``iterations`` THT-Gibbs sweeps."""
    hyper = 2 * cfg.hyper.n_leapfrog
    return math.ceil(iterations * (cfg.tht.N + hyper) / (cfg.hmc.n_leapfrog + hyper))


def run_sensor_gibbs(cfg: SensorGibbsExperiment, ctx: RunContext) -> DiagnosticsReport:
    ds = load_dataset(cfg.dataset)
    n_loc = 2 * ds.n_unknown
    names = location_names(ds.n_unknown) + ["log_R", "log_sigma_e"]
    hyper_cfg = cfg.hyper.build(1)
    loc_cfgs = {"tht": cfg.tht.build(n_loc), "hmc": cfg.hmc.build(n_loc)}
    iterations = {
        "tht": ctx.iterations,
        "hmc": cfg.hmc_iterations or budget_matched_iterations(cfg, ctx.iterations),
    }
    hyper0 = [math.log(cfg.init_R), math.log(cfg.init_sigma_e)]
    inits = [np.concatenate([locs, hyper0]) for locs in _initial_locations(ds, cfg.chains, ctx)]

    outs_by_arm = {}
    for arm in cfg.arms:
        logger.info(f"Running {arm}-Gibbs arm: {cfg.chains} chains x {iterations[arm]} sweeps")
        outs_by_arm[arm] = ctx.run_arm(GibbsKernel(ds, loc_cfgs[arm], hyper_cfg), inits, iterations[arm])
    # basins are those of the location posterior at the dataset's nominal R and sigma_e
    classifier = basin_classifier(SensorPosterior(ds), outs_by_arm, n_loc)

    report = DiagnosticsReport(kind=cfg.kind, seed=ctx.seed, iterations=ctx.iterations, burn_in=cfg.burn_in)
    frames = []
    for arm, outs in outs_by_arm.items():
        hops, visits = _mode_stats(outs, cfg.burn_in, classifier, n_loc)
        reach = [reach_iteration([log_posterior(ds, x[:n_loc], x[-2], x[-1]) for x in o.states[1:]])
                 for o in outs]
        report.arms.append(summarize_arm(arm, outs, cfg.burn_in, hops, names, reach))
        kept = np.vstack([post_burn_in(o, cfg.burn_in) for o in outs])
        if kept.shape[0] > 0:
            report.extras[f"{arm}_posterior_mean_R"] = float(np.mean(np.exp(kept[:, -2])))
            report.extras[f"{arm}_posterior_mean_sigma_e"] = float(np.mean(np.exp(kept[:, -1])))
        report.extras[f"{arm}_modes_visited"] = visits
        frames.append(chains_frame(arm, outs, names))
    report.extras["sweeps"] = {arm: iterations[arm] for arm in cfg.arms}
    ctx.writer.write_csv("chains.csv", pd.concat(frames, ignore_index=True))
    ctx.writer.write_text("plot.gp", _plot(cfg.arms, cfg.chains, "Sensor locations, Gibbs with unknown R and sigma_e"))
    return report

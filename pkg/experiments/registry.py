import json
import logging
from typing import Callable, Dict, Optional

from pydantic import ValidationError

from core.config import settings
from core.errors import ConfigError
from experiments.common import RunContext
from experiments.gap import run_gap_bridge
from experiments.mixture import run_mixture1d, run_mixture_hd
from experiments.power import run_power_pilot
from experiments.sensor import run_sensor, run_sensor_gibbs
from schemas.diagnostics import DiagnosticsReport
from schemas.experiment import ExperimentOutcome, experiment_adapter
from utils.file_utils import ArtifactWriter, to_builtin

logger = logging.getLogger(__name__)

Runner = Callable[..., DiagnosticsReport]

RUNNERS: Dict[str, Runner] = {
    "mixture1d": run_mixture1d,
    "mixture_hd": run_mixture_hd,
    "power_pilot": run_power_pilot,
    "sensor": run_sensor,
    "sensor_gibbs": run_sensor_gibbs,
    "gap_bridge": run_gap_bridge,
}


def format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_config(path: str):
    """Reads and validates an experiment config; every failure is a ConfigError."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return experiment_adapter.validate_python(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {format_validation_error(e)}") from e


def run_experiment(config_path: str, seed: Optional[int] = None, iters: Optional[int] = None,
                   workers: Optional[int] = None, out_dir: Optional[str] = None,
                   dim: Optional[int] = None) -> ExperimentOutcome:
    """Runs one configured experiment and writes its artifacts.

    Exit code 2 for configuration problems, 3 for failures during the run; in
    both cases nothing written by this run is left behind.
    """
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return ExperimentOutcome(exit_code=2, message=str(e))

    if dim is not None and cfg.kind != "mixture_hd":
        logger.warning(f"--dim only applies to mixture_hd; ignored for {cfg.kind}")
        dim = None
    if seed is None:
        seed = cfg.seed if cfg.seed is not None else settings.default_seed
    writer = ArtifactWriter(out_dir or settings.out_dir)
    ctx = RunContext(seed=seed, iterations=iters or cfg.iterations,
                     workers=workers or settings.workers, writer=writer, dim=dim)
    logger.info(f"Starting {cfg.kind} experiment: seed={ctx.seed}, iterations={ctx.iterations}, "
                f"workers={ctx.workers}, out={writer.out_dir}")

    try:
        report = RUNNERS[cfg.kind](cfg, ctx)
        report.extras = to_builtin(report.extras)
        writer.write_model("diagnostics.json", report)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        writer.remove_all()
        return ExperimentOutcome(exit_code=2, message=str(e))
    except Exception as e:
        logger.exception(f"{cfg.kind} run failed")
        writer.remove_all()
        return ExperimentOutcome(exit_code=3, message=f"{cfg.kind} run failed: {type(e).__name__}: {e}")

    logger.info(f"{cfg.kind} experiment finished, {len(writer.paths)} artifacts in {writer.out_dir}")
    return ExperimentOutcome(exit_code=0, artifacts=list(writer.paths))

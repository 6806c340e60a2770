import logging

import click
from dotenv import load_dotenv

# Load .env file before other imports (especially config)
load_dotenv()

from core.config import settings  # Import settings to ensure config is loaded
from core.logging_config import configure_logging
from experiments.registry import run_experiment

logger = logging.getLogger(__name__)


@click.group(help="Tempered Hamiltonian transitions: seeded experiment runs with CSV/JSON artifacts.")
@click.option("--log-level", default=None, help="Overrides THT_LOG_LEVEL.")
@click.option("--log-format", type=click.Choice(["text", "json"]), default=None, help="Overrides THT_LOG_FORMAT.")
def cli(log_level, log_format):
    configure_logging(log_level, log_format)


@cli.command(help="Run the experiment described by CONFIG_PATH (a JSON file).")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Base seed; chain i uses stream (seed, i).")
@click.option("--iters", type=click.IntRange(min=1), default=None, help="Iterations per chain.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes (THT_WORKERS).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Artifact directory (THT_OUT_DIR).")
@click.option("--dim", type=click.IntRange(min=1), default=None, help="Dimension override for mixture_hd.")
@click.pass_context
def run(ctx, config_path, seed, iters, workers, out_dir, dim):
    outcome = run_experiment(config_path, seed=seed, iters=iters, workers=workers or settings.workers,
                             out_dir=out_dir, dim=dim)
    if outcome.exit_code != 0:
        click.echo(outcome.message, err=True)
    else:
        for path in outcome.artifacts:
            click.echo(path)
    ctx.exit(outcome.exit_code)


if __name__ == "__main__":
    cli()

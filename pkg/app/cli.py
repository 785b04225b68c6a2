"""Command-line entry point: python -m app.cli <verb>."""
from pathlib import Path
from typing import Optional
import logging
import sys

import click

from app.core.config import settings
from app.core.exceptions import ConfigurationError, MedsError
from app.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def _load(config_path: Optional[str], preset_name: Optional[str], seed: Optional[int] = None) -> ExperimentConfig:
    from app.db.config_store import load_config
    from app.services.experiment_service import preset

    if config_path and preset_name:
        raise ConfigurationError("--config and --preset are mutually exclusive")
    if config_path:
        config = load_config(config_path)
    else:
        config = preset(preset_name or "synthetic")
    if seed is not None:
        config = ExperimentConfig(**{**config.model_dump(), "seed": seed})
    return config


def _fail(error: MedsError) -> None:
    click.echo(f"error: {error.message}", err=True)
    sys.exit(error.exit_code)


config_option = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                             default=None, help="key=value experiment file")
preset_option = click.option("--preset", "preset_name", type=click.Choice(["synthetic", "hardware"]),
                             default=None, help="built-in experiment parameters")
out_option = click.option("--out", "output_dir", type=click.Path(file_okay=False), default=None,
                          help="output directory (defaults to output.dir, then MEDS_OUTPUT_DIR)")


@click.group()
@click.option("--log-level", default=None, help="logging level, overrides LOG_LEVEL")
def main(log_level: Optional[str]):
    """Modulo event-driven sampling: simulate, recover and sweep."""
    logging.basicConfig(
        level=(log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@config_option
@preset_option
@click.option("--seed", type=int, default=None, help="override the signal seed")
@out_option
def simulate(config_path, preset_name, seed, output_dir):
    """Encode with the standalone ASDM and with MEDS, decode both, write artifacts."""
    from app.services.experiment_service import run_synthetic

    try:
        config = _load(config_path, preset_name, seed)
        result = run_synthetic(config, output_dir=output_dir)
    except MedsError as e:
        _fail(e)
        return

    click.echo(f"folds={result.fold_count} triggers_meds={result.trigger_count_meds} "
               f"triggers_asdm={result.trigger_count_asdm}")
    click.echo(f"err_asdm={result.err_asdm:.6g}%")
    if result.failure:
        click.echo(f"detection failed: {result.failure}", err=True)
        click.echo(f"artifacts: {result.output_dir}")
        sys.exit(2)
    click.echo(f"err_meds={result.err_meds:.6g}%")
    if result.err_tau is not None:
        click.echo(f"err_tau={result.err_tau:.6g}%")
    click.echo(f"artifacts: {result.output_dir}")


@main.command()
@click.option("--triggers", "trigger_csv", required=True, type=click.Path(dir_okay=False),
              help="trigger times in k,t form")
@click.option("--reference", "reference_csv", type=click.Path(dir_okay=False), default=None,
              help="reference waveform in t,value form")
@config_option
@preset_option
@out_option
def recover(trigger_csv, reference_csv, config_path, preset_name, output_dir):
    """Run the recovery on externally supplied trigger times."""
    from app.services.experiment_service import ingest_and_recover

    try:
        config = _load(config_path, preset_name)
        _, report = ingest_and_recover(trigger_csv, config, reference_csv, output_dir=output_dir, write=True)
    except MedsError as e:
        _fail(e)
        return
    click.echo(f"folds={report.fold_count} triggers={report.trigger_count}")
    if report.error is not None:
        click.echo(f"err={report.error:.6g}%")


@main.command()
@config_option
@preset_option
@click.option("--delta-min", type=float, default=None, help="defaults to 0.4 x asdm.delta")
@click.option("--delta-max", type=float, default=None, help="defaults to 2.4 x asdm.delta")
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--workers", type=int, default=None, help="concurrent sweep points")
@out_option
def sweep(config_path, preset_name, delta_min, delta_max, count, workers, output_dir):
    """Repeat the MEDS experiment across delta values and write sweep.csv."""
    from app.services.experiment_service import run_delta_sweep

    try:
        config = _load(config_path, preset_name)
        rows = run_delta_sweep(config, delta_min, delta_max, count, workers=workers, output_dir=output_dir)
    except MedsError as e:
        _fail(e)
        return
    for row in rows:
        click.echo(f"delta={row.delta:.4g} err_meds={row.err_meds:.4g}% err_tau={row.err_tau:.4g}% "
                   f"triggers={row.trigger_count} status={row.status}")


@main.command()
@config_option
@preset_option
@click.option("--g-sup", type=float, default=None, help="amplitude bound (defaults to the measured peak)")
def check(config_path, preset_name, g_sup):
    """Report the sufficient recovery conditions and their margins."""
    from app.db.csv_store import render_conditions
    from app.services.bounds_service import check_sufficient_conditions
    from app.services.experiment_service import build_signal
    from app.services.signal_service import peak_amplitude, signal_callable

    try:
        config = _load(config_path, preset_name)
        if g_sup is None:
            g_sup = peak_amplitude(signal_callable(build_signal(config)), 0.0, config.duration, config.omega)
        report = check_sufficient_conditions(config.asdm, config.modulo, config.omega, g_sup, config.order)
    except MedsError as e:
        _fail(e)
        return
    click.echo(render_conditions(report), nl=False)


@main.command()
@config_option
@preset_option
@out_option
def baseline(config_path, preset_name, output_dir):
    """Classical ASDM decoding of the raw input, without any folding."""
    from app.db import csv_store
    from app.services.experiment_service import run_baseline

    try:
        config = _load(config_path, preset_name)
        triggers, waveform, err = run_baseline(config)
        target = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
        csv_store.write_triggers(target / "triggers_asdm.csv", triggers)
        if waveform is not None:
            csv_store.write_waveform(target / "baseline.csv", waveform)
    except MedsError as e:
        _fail(e)
        return
    click.echo(f"triggers={triggers.count} err_asdm={err:.6g}%")


if __name__ == "__main__":
    main()

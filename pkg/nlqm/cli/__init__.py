"""Shared plumbing for the command blueprints."""
import functools
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import click
from flask import current_app

from ..config import load_config, resolve, sweep_entries
from ..errors import ConfigError, ModelError


def run_options(func):
    """--config, --out, --seed, --tol and --jobs, shared by every command."""

    @click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Run config JSON.")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory (default NLQM_OUT_DIR).")
    @click.option("--seed", type=click.IntRange(min=0), help="Seed for the pseudorandom constructions.")
    @click.option("--tol", "tolerance", type=click.FloatRange(min=0, min_open=True), help="Override every check tolerance.")
    @click.option("--jobs", type=click.IntRange(min=1), help="Worker threads for sweep entries.")
    @functools.wraps(func)
    def wrapper(config_path, out_dir, seed, tolerance, jobs, **kwargs):
        return func(RunContext(config_path, out_dir, seed, tolerance, jobs), **kwargs)

    return wrapper


class RunContext:
    """Resolved run settings: flag > run config > app.config."""

    def __init__(self, config_path, out_dir, seed, tolerance, jobs):
        self.config_path = config_path
        self._out_dir, self._seed, self._tolerance, self._jobs = out_dir, seed, tolerance, jobs

    def load(self, default_preset=None, preset=None):
        with config_errors():
            data = load_config(self.config_path) if self.config_path else {}
            if preset is not None:
                data.setdefault("preset", preset)
            self.config = resolve(data, default_preset)
        return self.config

    def _pick(self, flag, key, app_key):
        if flag is not None:
            return flag
        if key in self.config:
            return self.config[key]
        return current_app.config[app_key]

    @property
    def out_dir(self):
        return self._out_dir or current_app.config["OUT_DIR"]

    @property
    def seed(self):
        return int(self._pick(self._seed, "seed", "SEED"))

    @property
    def tolerance(self):
        return self._pick(self._tolerance, "tolerance", "TOLERANCE")

    @property
    def jobs(self):
        return int(self._jobs or current_app.config["JOBS"])

    @property
    def substep(self):
        return float(self.config.get("substep", current_app.config["SUBSTEP"]))

    @property
    def order(self):
        return int(self.config.get("order", current_app.config["INTEGRATOR_ORDER"]))

    @property
    def label(self):
        return self.config.get("label")

    def entries(self):
        return sweep_entries(self.config)


@contextmanager
def config_errors():
    try:
        yield
    except ConfigError as e:
        raise click.UsageError(str(e)) from e


@contextmanager
def library_errors():
    try:
        yield
    except ConfigError as e:
        raise click.UsageError(str(e)) from e
    except ModelError as e:
        raise click.ClickException(str(e)) from e


def run_entries(run, entries, fn):
    """Run ``fn(entry, index)`` for each entry; index is None for a single entry."""
    if len(entries) == 1:
        with library_errors():
            return [fn(entries[0], None)]
    current_app.logger.info("running %d sweep entries on %d threads", len(entries), run.jobs)
    app = current_app._get_current_object()

    def task(args):
        entry, index = args
        with app.app_context():
            return fn(entry, index)

    with library_errors(), ThreadPoolExecutor(max_workers=run.jobs) as pool:
        return list(pool.map(task, [(entry, i) for i, entry in enumerate(entries)]))


def echo_paths(paths):
    for path in paths:
        click.echo(path)

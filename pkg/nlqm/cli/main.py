from flask import Blueprint, current_app

from . import run_options
from .reduced import run_taudelta

main = Blueprint("main", __name__, cli_group=None)


@main.cli.command("figures")
@run_options
def figures(run):
    """Regenerate the kappa, tau and delta curves at N^2=25, c=4, p=-1."""
    run.load(preset="figure")
    current_app.logger.info("figure preset into %s", run.out_dir)
    run_taudelta(run)

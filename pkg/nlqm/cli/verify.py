import click
from flask import Blueprint, current_app

from ..output import output_path, write_json
from ..verification import run_suite
from . import run_options

verify = Blueprint("verify", __name__, cli_group=None)


@verify.cli.command("verify")
@run_options
@click.pass_context
def verify_command(ctx, run):
    """Run the invariant suite; exit status 1 if any check fails."""
    config = run.load()
    results = run_suite(tolerance=run.tolerance, seed=run.seed, ids=config.get("checks"))
    failed = [r.id for r in results if not r.passed]
    report = {
        "passed": not failed,
        "failed": failed,
        "seed": run.seed,
        "tolerance_override": run.tolerance,
        "checks": [r.to_json() for r in results],
    }
    path = write_json(output_path(run.out_dir, "verify.json", run.label), report)
    for r in results:
        click.echo(f"{'ok    ' if r.passed else 'FAILED'} {r.id:<22} {r.value:.3e} (tol {r.tolerance:.1e})")
    click.echo(path)
    if failed:
        current_app.logger.error("%d of %d checks failed: %s", len(failed), len(results), ", ".join(failed))
        ctx.exit(1)

from functools import wraps
from typing import Optional
import sys

import click

from .errors import CosetSearchExhaustedError, InvariantBreachError, RelCertError, ResourceLimitError
from .orchestrator import Orchestrator
from .scenario import export_scenario_lp, load_scenario, run_scenario, scenario_curve, verify_file
from .services import helpers

EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INVARIANT = 4


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, InvariantBreachError):
        return EXIT_INVARIANT
    if isinstance(error, (ResourceLimitError, CosetSearchExhaustedError)):
        return EXIT_RESOURCE
    if isinstance(error, (RelCertError, ValueError, KeyError, FileNotFoundError)):
        return EXIT_USAGE
    raise error


def reports_errors(func):
    """Map failures to exit codes; a completed run exits 0 whatever its mathematical verdict."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except Exception as error:
            code = exit_code_for(error)
            click.echo(f"error: {error}", err=True)
            sys.exit(code)
    return wrapper


@click.group()
@click.option("--config-dir", type=click.Path(file_okay=False), default=None,
              help="Directory holding main_config.json and the section files.")
@click.option("-v", "--verbose", count=True, help="Repeat for more logging (up to -vvv).")
@click.pass_context
def cli(ctx: click.Context, config_dir: Optional[str], verbose: int):
    """Relative property A and relative amenability certificates."""
    ctx.ensure_object(dict)
    try:
        ctx.obj["orchestrator"] = Orchestrator(config_dir, verbose or None)
    except (FileNotFoundError, KeyError, ValueError) as error:
        click.echo(f"error: {error}", err=True)
        sys.exit(EXIT_USAGE)


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False))
@reports_errors
def run(config: str):
    """Run the scenario described by CONFIG (TOML) and print its report."""
    report = run_scenario(config)
    click.echo(helpers.dumps_json(report.to_dict()), nl=False)


@cli.command("verify")
@click.argument("certificate", type=click.Path(dir_okay=False))
@click.argument("space", type=click.Path(dir_okay=False))
@click.option("--R", "R", type=int, default=None, help="Pair radius (pairs with 1 <= d <= R).")
@click.option("--eps", "epsilon", type=str, default=None, help="Variation bound, e.g. 3/5.")
@click.option("--S", "S", type=int, default=None, help="Support bound (rho < S).")
@click.option("--window", type=int, default=None, help="Radius of the checked window.")
@click.option("--convention", type=click.Choice(["reiter-centered", "identity-centered"]), default=None)
@reports_errors
def verify_command(certificate: str, space: str, R: Optional[int], epsilon: Optional[str], S: Optional[int],
                   window: Optional[int], convention: Optional[str]):
    """Verify CERTIFICATE against the coset space stored in SPACE."""
    report = verify_file(certificate, space, R, epsilon, S, window, convention)
    click.echo(helpers.dumps_json(report.to_dict()), nl=False)


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False))
@reports_errors
def curve(config: str):
    """Write the exact optimum curve of CONFIG's linear programs as CSV."""
    result = scenario_curve(load_scenario(config))
    click.echo(result.to_frame().to_csv(index=False, lineterminator="\n"), nl=False)


@cli.command("export-lp")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@reports_errors
def export_lp_command(config: str, output: Optional[str]):
    """Export CONFIG's linear program in CPLEX LP format."""
    path = export_scenario_lp(load_scenario(config), output)
    click.echo(f"Written to {path}")


def main():
    cli(obj={})


if __name__ == "__main__":
    main()

# main.py - Command-line entry point

import os
import sys

import click

from config import get_config
from errors import DomainError
from models import Task
from services.recipes import figure_recipes, get_recipe, run_recipe
from services.run_service import RunService
from utils.logging_config import setup_logging

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTE = 0, 1, 2


def _overrides(pairs):
    """--set key=value pairs as a mapping; malformed pairs are a usage error"""
    mapping = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep or not key.strip():
            raise click.BadParameter(f"expected key=value, got {pair!r}", param_hint='--set')
        mapping[key.strip()] = value.strip()
    return mapping


def _output_dir(flag):
    """--output-dir wins over ROTOR_OUTPUT_DIR, which wins over the config file"""
    if flag:
        return flag
    return os.environ.get('ROTOR_OUTPUT_DIR') or None


def run_options(func):
    func = click.option('--set', 'settings', multiple=True, metavar='KEY=VALUE',
                        help='Override a configuration key; repeatable.')(func)
    func = click.option('--output-dir', type=click.Path(file_okay=False),
                        help='Directory for CSV, meta.json and error.json.')(func)
    func = click.option('--config', 'config_file', type=click.File('r', encoding='utf-8'),
                        help='key=value or JSON configuration file.')(func)
    return func


@click.group()
@click.pass_context
def cli(ctx):
    """Rotor wave packets: coherent states, revivals and clones."""
    config_class = get_config()
    setup_logging(config_class)
    ctx.obj = RunService(config_class)


def _make_task_command(task):
    @cli.command(name=task.value, help=f"Run the {task.value} task.")
    @run_options
    @click.pass_obj
    def command(service, config_file, output_dir, settings):
        text = config_file.read() if config_file else ''
        overrides = _overrides(settings)
        overrides['task'] = task.value
        target = _output_dir(output_dir)
        bundle, message, code = service.run_text(text, overrides, target)
        if code == EXIT_OK:
            click.echo(message)
        else:
            click.echo(f"Error: {message}", err=True)
        sys.exit(code)

    return command


for _task in Task:
    _make_task_command(_task)


@cli.command()
def recipes():
    """List the canned figure configurations."""
    for recipe in figure_recipes():
        click.echo(f"{recipe.name}\t{recipe.description}")


@cli.command()
@click.argument('name')
@click.option('--output-dir', type=click.Path(file_okay=False), help='Root directory for the recipe outputs.')
@click.pass_obj
def recipe(service, name, output_dir):
    """Run one canned figure configuration."""
    try:
        selected = get_recipe(name)
    except DomainError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)
    root = _output_dir(output_dir) or service.config.OUTPUT_DIR
    failed = False
    for label, bundle, message in run_recipe(selected, service, root):
        if bundle is None:
            failed = True
            click.echo(f"{selected.name}/{label}: {message}", err=True)
        else:
            click.echo(f"{selected.name}/{label}: {message}")
    sys.exit(EXIT_COMPUTE if failed else EXIT_OK)


if __name__ == '__main__':
    cli()

"""Command-line client for the solitary-wave service.

Each subcommand reads a YAML configuration, sends it to the HTTP service
(in-process by default, or a remote base URL via --server), and reports the
verdict. Exit status 0 means every requested verification passed.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import ConfigError, parse_config

__all__ = ["main"]


def _load_config(config_path, out, seed, quiet):
    text = Path(config_path).read_text() if config_path else "{}"
    cfg = parse_config(text)
    updates = {}
    if out is not None:
        updates["output_dir"] = out
    if seed is not None:
        updates["seed"] = seed
    if quiet:
        updates["quiet"] = True
    return cfg.model_copy(update=updates) if updates else cfg


def _post(command, cfg, server):
    payload = {"config": cfg.model_dump(), "persist": True}
    if server:
        import httpx

        response = httpx.post(f"{server.rstrip('/')}/{command}", json=payload, timeout=None)
    else:
        from fastapi.testclient import TestClient

        from .service import app

        with TestClient(app) as client:
            response = client.post(f"/{command}", json=payload)
    if response.status_code != 200:
        detail = response.json().get("detail", response.text)
        raise ConfigError(str(detail))
    return response.json()


def _run_command(command, config, out, seed, quiet, server):
    try:
        cfg = _load_config(config, out, seed, quiet)
        result = _post(command, cfg, server)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if not cfg.quiet:
        click.echo(json.dumps(result["summary"], indent=2, sort_keys=True))
        click.echo(f"artifacts: {result['output_dir']}")
    click.echo(f"{command}: {'pass' if result['passed'] else 'fail'}")
    sys.exit(0 if result["passed"] else 1)


def _common_options(fn):
    fn = click.option("--config", type=click.Path(), default=None, help="YAML configuration file.")(fn)
    fn = click.option("--out", default=None, help="Output directory for artifacts.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Random seed override.")(fn)
    fn = click.option("--quiet", is_flag=True, help="Print only the final verdict.")(fn)
    fn = click.option("--server", default=None, help="Base URL of a remote service.")(fn)
    return fn


@click.group()
def main():
    """Solitary waves of a class of dispersive equations with cubic nonlocal nonlinearity."""


@main.command()
@_common_options
def solve(config, out, seed, quiet, server):
    """Compute a single solitary wave of prescribed mass."""
    _run_command("solve", config, out, seed, quiet, server)


@main.command()
@_common_options
def sweep(config, out, seed, quiet, server):
    """Continuation sweep over an ascending list of masses."""
    _run_command("sweep", config, out, seed, quiet, server)


@main.command()
@_common_options
def evolve(config, out, seed, quiet, server):
    """Solve, then time-evolve the wave and check conservation and the frame."""
    _run_command("evolve", config, out, seed, quiet, server)


@main.command()
@_common_options
def probe(config, out, seed, quiet, server):
    """Run one of the named diagnostic probes."""
    _run_command("probe", config, out, seed, quiet, server)


if __name__ == "__main__":
    main()

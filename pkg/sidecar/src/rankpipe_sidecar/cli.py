"""Service entry point: load the configured models, then serve."""

from __future__ import annotations

import logging

import click
import uvicorn

from .app import create_app
from .models import ModelRegistry


@click.command()
@click.option("--models", "models_path", required=True,
              type=click.Path(exists=True),
              help="YAML file naming the models to serve.")
@click.option("--port", default=8800, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--verbose", is_flag=True)
def main(models_path: str, port: int, host: str, verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    registry = ModelRegistry.from_config(models_path)
    app = create_app(registry)
    registry.load()
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()

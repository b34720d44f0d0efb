"""Command-line driver: train one model per latent dimensionality and emit
``mnist-nd-{d}.mnde`` embedding files plus per-dimension loss CSVs."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Tuple

import click

from .config import MvaeConfig
from .errors import ConfigError, CorruptionError, FormatError, MvaegenError
from .export import export_embeddings, export_loss_curves
from .idx import load_images, load_labels
from .train import train_mvae

EXIT_OK = 0
EXIT_CONFIG = 2

# Training is unsupervised, so train-set labels are never read.
_TRAIN_IMAGES = ("train-images-idx3-ubyte", "train-images.idx3-ubyte")
_TEST_IMAGES = ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte")
_TEST_LABELS = ("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte")


def _find_idx(directory: Path, names: Tuple[str, ...]) -> Path:
    for name in names:
        for candidate in (directory / name, directory / f"{name}.gz"):
            if candidate.exists():
                return candidate
    raise ConfigError(
        f"no IDX file under {directory} matching any of {list(names)} (.gz accepted)"
    )


def _csv_ints(_ctx, _param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


@click.group()
@click.version_option(package_name="mvae-generator", prog_name="mvaegen")
def cli() -> None:
    """Per-dimension mixture-VAE embedding generator."""


@cli.command("train", help="Train one model per latent dim and export embeddings.")
@click.option("--data-dir", required=True, type=click.Path(), metavar="DIR",
              help="Directory holding the four IDX files (gzipped accepted).")
@click.option("--out", default=None, metavar="DIR", help="Output directory.")
@click.option("--dims", callback=_csv_ints, default=None, metavar="D1,D2,...",
              help="Latent dimensionalities to sweep.")
@click.option("--beta0", type=float, default=None, help="Base KL weight; beta(d) = beta0/d.")
@click.option("--epochs", type=int, default=None)
@click.option("--patience", type=int, default=None, help="Early-stopping patience (epochs).")
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--hidden", callback=_csv_ints, default=None, metavar="H1,H2",
              help="Encoder/decoder hidden widths.")
@click.option("--val-fraction", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--sample", is_flag=True, default=False,
              help="Export one posterior draw per image instead of the mean.")
def train(data_dir, out, dims, beta0, epochs, patience, batch_size, lr, hidden,
          val_fraction, seed, sample):
    overrides = {
        "out": out,
        "latent_dims": dims,
        "beta0": beta0,
        "epochs": epochs,
        "patience": patience,
        "batch_size": batch_size,
        "lr": lr,
        "val_fraction": val_fraction,
        "seed": seed,
    }
    if hidden is not None:
        if len(hidden) != 2:
            click.echo("error: --hidden expects exactly two widths", err=True)
            sys.exit(EXIT_CONFIG)
        overrides["hidden"] = tuple(hidden)

    try:
        data = Path(data_dir)
        train_images = load_images(_find_idx(data, _TRAIN_IMAGES))
        test_images = load_images(_find_idx(data, _TEST_IMAGES))
        test_labels = load_labels(_find_idx(data, _TEST_LABELS))
    except (ConfigError, FormatError, CorruptionError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    # Pixel count comes from the files themselves, so non-28x28 inputs work.
    overrides["image_dim"] = train_images.shape[1]
    try:
        cfg = MvaeConfig(**{k: v for k, v in overrides.items() if v is not None})
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        out_dir = Path(cfg.out)
        for d in cfg.latent_dims:
            click.echo(f"latent dim {d}: training (beta = {cfg.beta(d):.6g})")
            result = train_mvae(cfg, d, train_images)
            curve = export_loss_curves(result.history, out_dir / f"losses-d{d}.csv")
            embedding = export_embeddings(
                result.model, test_images, test_labels,
                out_dir / f"mnist-nd-{d}.mnde",
                sample=sample, seed=cfg.run_seed(d),
            )
            click.echo(
                f"latent dim {d}: {len(result.history)} epochs "
                f"(best {result.best_epoch}"
                f"{', early stop' if result.stopped_early else ''}) -> "
                f"{embedding}, {curve}"
            )
    except (ConfigError, FormatError, CorruptionError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except MvaegenError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    sys.exit(EXIT_OK)


def main() -> None:
    cli(auto_envvar_prefix="MVAEGEN")


if __name__ == "__main__":
    main()

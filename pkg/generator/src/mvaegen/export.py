"""Export: encode a held-out image set to an MNDE embedding file, and dump
per-epoch loss curves as CSV."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch

from .errors import ConfigError
from .mnde import save_mnde
from .model import LossBreakdown, MixtureVae

LOSS_COLUMNS = ("epoch", "reconstruction", "kl", "categorical", "total")


def encode_images(
    model: MixtureVae,
    images: np.ndarray,
    sample: bool = False,
    seed: int = 0,
    batch_size: int = 1024,
) -> np.ndarray:
    """(n, latent_dim) float32 embedding of ``images``.

    Component selection is the exact argmax one-hot; the embedding is the
    posterior mean, or one reparameterized draw per image when ``sample``
    is set (seeded, so still reproducible)."""
    x = np.asarray(images, dtype=np.float32)
    if x.ndim != 2 or x.shape[1] != model.image_dim:
        raise ConfigError(f"images must be (n, {model.image_dim}), got {x.shape}")
    model.eval()
    gen = torch.Generator().manual_seed(seed)
    chunks = []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            batch = torch.from_numpy(x[start:start + batch_size])
            _, selection = model.select_component(batch, temperature=1.0, hard=True)
            mean, logvar = model.posterior(batch, selection)
            z = mean
            if sample:
                noise = torch.randn(mean.shape, generator=gen)
                z = mean + torch.exp(0.5 * logvar) * noise
            chunks.append(z.numpy().astype(np.float32))
    return np.concatenate(chunks, axis=0)


def export_embeddings(
    model: MixtureVae,
    images: np.ndarray,
    labels: Optional[np.ndarray],
    path: Union[str, Path],
    sample: bool = False,
    seed: int = 0,
) -> Path:
    """Encode ``images`` and write the MNDE file (labels attached when given)."""
    if labels is not None and np.asarray(labels).shape[0] != np.asarray(images).shape[0]:
        raise ConfigError(
            f"labels cover {np.asarray(labels).shape[0]} images, "
            f"got {np.asarray(images).shape[0]}"
        )
    z = encode_images(model, images, sample=sample, seed=seed)
    return save_mnde(z, labels, path)


def export_loss_curves(history: List[LossBreakdown], path: Union[str, Path]) -> Path:
    """Per-epoch loss CSV with columns exactly (epoch, reconstruction, kl,
    categorical, total)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOSS_COLUMNS)
        for row in history:
            writer.writerow([
                row.epoch,
                repr(row.reconstruction),
                repr(row.kl),
                repr(row.categorical),
                repr(row.total),
            ])
    return out

"""mvaegen: trains one mixture-prior VAE per latent dimensionality on MNIST
and exports the embeddings as ``.mnde`` datasets with loss-curve CSVs."""

from .config import MvaeConfig
from .errors import (
    ConfigError,
    CorruptionError,
    DivergenceError,
    FormatError,
    MvaegenError,
)
from .export import LOSS_COLUMNS, encode_images, export_embeddings, export_loss_curves
from .idx import load_idx, load_images, load_labels
from .mnde import mnde_bytes, save_mnde
from .model import LossBreakdown, MixtureVae
from .train import TrainResult, train_mvae

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CorruptionError",
    "DivergenceError",
    "FormatError",
    "LOSS_COLUMNS",
    "LossBreakdown",
    "MixtureVae",
    "MvaeConfig",
    "MvaegenError",
    "TrainResult",
    "encode_images",
    "export_embeddings",
    "export_loss_curves",
    "load_idx",
    "load_images",
    "load_labels",
    "mnde_bytes",
    "save_mnde",
    "train_mvae",
    "__version__",
]

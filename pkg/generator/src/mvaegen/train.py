"""Training loop: one model per latent dimensionality.

Adam on the combined loss, Gumbel temperature annealed linearly from
``temperature_start`` to ``temperature_end`` over the configured epochs,
early stopping on validation total loss with the configured patience
(best weights restored).  A non-finite training loss aborts immediately
with the per-epoch trace in the exception message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np
import torch

from .config import MvaeConfig
from .errors import ConfigError, DivergenceError
from .model import LossBreakdown, MixtureVae


@dataclass
class TrainResult:
    model: MixtureVae
    history: List[LossBreakdown]  # training losses per completed epoch
    val_total: List[float]  # validation total per completed epoch
    best_epoch: int
    stopped_early: bool


def _temperature(cfg: MvaeConfig, epoch: int) -> float:
    if cfg.epochs == 1:
        return cfg.temperature_end
    frac = epoch / (cfg.epochs - 1)
    return cfg.temperature_start + frac * (cfg.temperature_end - cfg.temperature_start)


def _epoch_trace(history: List[LossBreakdown], tail: int = 5) -> str:
    rows = history[-tail:]
    return "; ".join(
        f"epoch {h.epoch}: total={h.total:.6g} recon={h.reconstruction:.6g} "
        f"kl={h.kl:.6g} cat={h.categorical:.6g}"
        for h in rows
    ) or "no completed epochs"


def train_mvae(cfg: MvaeConfig, d: int, images: np.ndarray) -> TrainResult:
    """Fit one mixture VAE at latent dimensionality ``d``.

    ``images`` is an (n, image_dim) float array in [0, 1]; a validation
    slice of ``val_fraction`` is split off deterministically.
    """
    if d < 1:
        raise ConfigError(f"latent dim must be >= 1, got {d}")
    x = np.asarray(images, dtype=np.float32)
    if x.ndim != 2 or x.shape[1] != cfg.image_dim:
        raise ConfigError(
            f"images must be (n, {cfg.image_dim}), got {x.shape}"
        )
    n_val = max(1, int(round(x.shape[0] * cfg.val_fraction)))
    if x.shape[0] - n_val < 1:
        raise ConfigError(
            f"need at least one training image after a validation split of "
            f"{n_val} from {x.shape[0]}"
        )

    seed = cfg.run_seed(d)
    torch.manual_seed(seed)
    perm = np.random.default_rng(seed).permutation(x.shape[0])
    val = torch.from_numpy(x[perm[:n_val]])
    train = torch.from_numpy(x[perm[n_val:]])

    model = MixtureVae(
        latent_dim=d,
        n_components=cfg.n_components,
        image_dim=cfg.image_dim,
        hidden=cfg.hidden,
    )
    beta = cfg.beta(d)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    batches = torch.Generator().manual_seed(seed)

    history: List[LossBreakdown] = []
    val_total: List[float] = []
    best = math.inf
    best_epoch = -1
    best_state = None
    since_best = 0
    stopped_early = False

    for epoch in range(cfg.epochs):
        tau = _temperature(cfg, epoch)
        model.train()
        sums = np.zeros(4)
        n_seen = 0
        order = torch.randperm(train.shape[0], generator=batches)
        for start in range(0, train.shape[0], cfg.batch_size):
            batch = train[order[start:start + cfg.batch_size]]
            total, recon, kl, cat = model.losses(batch, beta=beta, temperature=tau)
            if not torch.isfinite(total):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch} (latent dim {d}); "
                    f"trace: {_epoch_trace(history)}"
                )
            opt.zero_grad()
            total.backward()
            opt.step()
            b = batch.shape[0]
            sums += b * np.array([
                float(total.detach()), float(recon.detach()),
                float(kl.detach()), float(cat.detach()),
            ])
            n_seen += b
        mean_total, mean_recon, mean_kl, mean_cat = sums / n_seen
        history.append(LossBreakdown(
            epoch=epoch,
            reconstruction=float(mean_recon),
            kl=float(mean_kl),
            categorical=float(mean_cat),
            total=float(mean_total),
        ))

        model.eval()
        with torch.no_grad():
            v_total, _, _, _ = model.losses(val, beta=beta, temperature=tau)
        v = float(v_total)
        if not math.isfinite(v):
            raise DivergenceError(
                f"non-finite validation loss at epoch {epoch} (latent dim {d}); "
                f"trace: {_epoch_trace(history)}"
            )
        val_total.append(v)

        if v < best:
            best = v
            best_epoch = epoch
            best_state = {k: t.detach().clone() for k, t in model.state_dict().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                stopped_early = True
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    return TrainResult(
        model=model,
        history=history,
        val_total=val_total,
        best_epoch=best_epoch,
        stopped_early=stopped_early,
    )

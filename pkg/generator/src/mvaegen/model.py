"""Mixture variational autoencoder with a Gumbel-softmax component selector.

Two-stage encoder: the first stage maps an image to categorical logits
over mixture components and draws a differentiable (approximately)
one-hot selection via Gumbel-softmax; the second stage maps the image
concatenated with that selection to a diagonal-Gaussian posterior over
the latent code.  The latent prior is a mixture: each component owns a
learnable mean (unit covariance), and the selection picks which mean the
posterior is pulled toward.  The decoder mirrors the encoder widths and
reconstructs pixels from the latent code alone — component identity
reaches it only through where the code lands.  No ground-truth labels
are consumed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import torch
from torch import nn
from torch.nn import functional as F


@dataclass(frozen=True)
class LossBreakdown:
    """Per-epoch loss components; total = reconstruction + beta*kl + categorical."""

    epoch: int
    reconstruction: float
    kl: float
    categorical: float
    total: float


def _mlp(sizes) -> nn.Sequential:
    layers = []
    for i, (a, b) in enumerate(zip(sizes, sizes[1:])):
        layers.append(nn.Linear(a, b))
        if i < len(sizes) - 2:
            layers.append(nn.ReLU())
    return nn.Sequential(*layers)


class MixtureVae(nn.Module):
    def __init__(
        self,
        latent_dim: int,
        n_components: int = 10,
        image_dim: int = 784,
        hidden: Tuple[int, int] = (512, 256),
    ):
        super().__init__()
        if latent_dim < 1:
            raise ValueError(f"latent_dim must be >= 1, got {latent_dim}")
        h1, h2 = hidden
        self.latent_dim = latent_dim
        self.n_components = n_components
        self.image_dim = image_dim
        self.classifier = _mlp((image_dim, h1, h2, n_components))
        self.encoder = _mlp((image_dim + n_components, h1, h2, 2 * latent_dim))
        self.decoder = _mlp((latent_dim, h2, h1, image_dim))
        self.component_means = nn.Parameter(torch.zeros(n_components, latent_dim))

    def select_component(
        self, x: torch.Tensor, temperature: float, hard: bool
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """(logits, selection): a Gumbel-softmax draw over components, or the
        exact argmax one-hot when ``hard`` is requested without gradients."""
        logits = self.classifier(x)
        if hard and not self.training:
            selection = F.one_hot(logits.argmax(dim=-1), self.n_components).to(x.dtype)
        else:
            selection = F.gumbel_softmax(logits, tau=temperature, hard=hard)
        return logits, selection

    def posterior(
        self, x: torch.Tensor, selection: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Mean and log-variance of q(z | x, selection)."""
        stats = self.encoder(torch.cat([x, selection], dim=-1))
        mean, logvar = stats.chunk(2, dim=-1)
        return mean, logvar

    def forward(self, x: torch.Tensor, temperature: float = 1.0, hard: bool = False):
        logits, selection = self.select_component(x, temperature, hard)
        mean, logvar = self.posterior(x, selection)
        if self.training:
            z = mean + torch.exp(0.5 * logvar) * torch.randn_like(mean)
        else:
            z = mean
        recon_logits = self.decoder(z)
        return recon_logits, logits, selection, mean, logvar

    def losses(
        self, x: torch.Tensor, beta: float, temperature: float
    ) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
        """(total, reconstruction, kl, categorical), each a scalar mean over
        the batch.  KL is taken against the selected component's prior
        N(mean_c, I); categorical is KL(q(c|x) || uniform)."""
        recon_logits, logits, selection, mean, logvar = self.forward(
            x, temperature=temperature, hard=False
        )
        recon = F.binary_cross_entropy_with_logits(
            recon_logits, x, reduction="none"
        ).sum(dim=-1).mean()

        prior_mean = selection @ self.component_means
        kl = 0.5 * (
            torch.exp(logvar) + (mean - prior_mean) ** 2 - 1.0 - logvar
        ).sum(dim=-1).mean()

        log_q = F.log_softmax(logits, dim=-1)
        categorical = (log_q.exp() * log_q).sum(dim=-1).mean() + torch.log(
            torch.tensor(float(self.n_components), device=x.device)
        )

        total = recon + beta * kl + categorical
        return total, recon, kl, categorical

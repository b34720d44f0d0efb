"""Training configuration.

One config drives the whole dimensionality sweep.  Everything except the
KL weight is identical across latent dimensions; the weight follows
``beta(d) = beta0 / d`` so that ``beta(d) * d`` is constant — the larger
the latent space, the softer each coordinate is pulled to the prior,
keeping the overall regularization pressure matched across the sweep.
"""

from __future__ import annotations

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_LATENT_DIMS = (2, 4, 8, 16, 32, 64)


class MvaeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    latent_dims: List[int] = Field(default=list(DEFAULT_LATENT_DIMS))
    n_components: int = 10
    beta0: float = 2.0

    image_dim: int = 784
    hidden: Tuple[int, int] = (512, 256)

    epochs: int = 100
    patience: int = 10
    batch_size: int = 256
    lr: float = 1e-3
    val_fraction: float = 0.1

    temperature_start: float = 1.0
    temperature_end: float = 0.5

    seed: int = 0
    out: str = "mvae-out"

    @field_validator("latent_dims")
    @classmethod
    def _dims_ok(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("at least one latent dimensionality required")
        if any(d < 1 for d in v):
            raise ValueError(f"latent dims must be >= 1, got {v}")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate latent dims in {v}")
        return v

    @field_validator("n_components", "image_dim", "epochs", "patience", "batch_size")
    @classmethod
    def _positive_int(cls, v: int, info) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("beta0", "lr", "temperature_start", "temperature_end")
    @classmethod
    def _positive_real(cls, v: float, info) -> float:
        if not v > 0:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def _cross_checks(self) -> "MvaeConfig":
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError(f"val_fraction must lie in (0, 1), got {self.val_fraction}")
        if self.temperature_end > self.temperature_start:
            raise ValueError("temperature must anneal downward (end <= start)")
        if any(h < 1 for h in self.hidden):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden}")
        return self

    def beta(self, d: int) -> float:
        """KL weight for latent dimensionality d: beta0 / d."""
        if d < 1:
            raise ValueError(f"latent dim must be >= 1, got {d}")
        return self.beta0 / d

    def run_seed(self, d: int) -> int:
        """Per-dimension seed so the sweep's runs are independent streams."""
        return self.seed * 1_000_003 + d

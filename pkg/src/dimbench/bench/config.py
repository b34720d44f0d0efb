"""Experiment configuration and deterministic seed derivation.

Seed streams: every random decision in a benchmark run draws from an RNG
seeded by ``derive_seed(...)``, a SHA-256 hash of the global seed plus a
purpose tag and the cell coordinates.  Streams for different purposes or
cells are therefore independent, and adding a method or dimension to a
config never shifts the seeds of existing cells.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError

METHODS = ("kmeans", "gmm", "tmm", "leiden")
DEFAULT_PERCENTILES = (0.01, 0.1, 0.3, 0.5, 1.0, 2.0, 3.0, 5.0)

_SEED_DOMAIN = "dimbench.v1"


def derive_seed(global_seed: int, *parts) -> int:
    """Deterministic 64-bit seed for one purpose-tagged stream.

    The stream identity is the pipe-joined string
    ``"dimbench.v1|<global_seed>|<part>|..."`` hashed with SHA-256; the
    first 8 digest bytes, little-endian, form the seed.
    """
    msg = "|".join([_SEED_DOMAIN, str(global_seed), *[str(p) for p in parts]])
    return int.from_bytes(hashlib.sha256(msg.encode("utf-8")).digest()[:8], "little")


class ExperimentConfig(BaseModel):
    """Everything a benchmark run depends on, all defaulted and validated.

    Datasets come either from ``datasets`` (per-dimension embedding file
    paths, MNDE or CSV) or, when that is empty, from the synthetic mixture
    generator using ``synth_k``/``synth_n``/``synth_overlap`` with the same
    derived data seed for every dimension.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dims: List[int] = Field(default=[2, 4, 8, 16, 32, 64])
    methods: List[str] = Field(default=list(METHODS))
    k: int = 10
    n_seeds: int = 10
    percentiles: List[float] = Field(default=list(DEFAULT_PERCENTILES))
    out: str = "bench-out"
    seed: int = 0

    datasets: Dict[int, str] = Field(default_factory=dict)
    synth_k: int = 10
    synth_n: int = 5000
    synth_overlap: float = 8.0

    n_neighbors: int = 15
    resolution: float = 1.0
    weight_policy: str = "unit"

    rf_trees: int = 100
    folds: int = 10
    top_m: int = 30

    @field_validator("dims")
    @classmethod
    def _dims_ok(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("at least one dimensionality required")
        if any(d < 1 for d in v):
            raise ValueError(f"dimensionalities must be >= 1, got {v}")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate dimensionalities in {v}")
        return v

    @field_validator("methods")
    @classmethod
    def _methods_ok(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("at least one method required")
        unknown = [m for m in v if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate methods in {v}")
        return v

    @field_validator("percentiles")
    @classmethod
    def _percentiles_ok(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one percentile required")
        if any(not (0.0 < p <= 100.0) for p in v):
            raise ValueError(f"percentiles must lie in (0, 100], got {v}")
        return v

    @field_validator("k", "n_seeds", "synth_k", "synth_n", "n_neighbors", "rf_trees", "folds", "top_m")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("synth_overlap", "resolution")
    @classmethod
    def _positive_real(cls, v: float, info) -> float:
        if not v > 0:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def _cross_checks(self) -> "ExperimentConfig":
        if self.n_seeds < 2:
            raise ValueError("n_seeds must be >= 2 so stability has at least one pair")
        if self.folds < 2:
            raise ValueError("folds must be >= 2 for cross-validation")
        if self.datasets:
            missing = [d for d in self.dims if d not in self.datasets]
            if missing:
                raise ValueError(
                    f"dims {missing} have no dataset path; datasets covers {sorted(self.datasets)}"
                )
        if self.weight_policy not in ("unit", "inverse_distance"):
            raise ValueError(f"unknown weight policy {self.weight_policy!r}")
        if self.synth_n < self.synth_k:
            raise ValueError("synth_n must be >= synth_k")
        return self

    # -- derived seeds ------------------------------------------------------

    def data_seed(self) -> int:
        """One seed for synthetic data, shared by all dims so the signal
        content is identical across the dimensionality sweep."""
        return derive_seed(self.seed, "data")

    def cell_seed(self, dim: int, method: str, seed_index: int) -> int:
        return derive_seed(self.seed, "cell", dim, method, seed_index)

    def split_seed(self, seed_index: int) -> int:
        """Bootstrap split seed: independent of dim and method, so the same
        index split is reused across the whole dimensionality sweep."""
        return derive_seed(self.seed, "split", seed_index)

    def rf_seed(self, dim: int) -> int:
        return derive_seed(self.seed, "rf", dim)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _parse_scalar(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def load_config_file(path) -> dict:
    """Parse a config file into a keyword dict for ExperimentConfig.

    Two syntaxes: a JSON object, or flat ``key = value`` lines (``#``
    comments allowed; values parsed as JSON where possible, e.g.
    ``dims = [2, 64]``, else taken as bare strings).  Hyphens in keys are
    normalized to underscores.
    """
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON config: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
        return {str(k).replace("-", "_"): v for k, v in data.items()}

    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        for sep in ("=", ":"):
            if sep in body:
                key, _, raw = body.partition(sep)
                break
        else:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key = key.strip().replace("-", "_")
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = _parse_scalar(raw.strip())
    return out


def build_config(file_path: Optional[str] = None, **overrides) -> ExperimentConfig:
    """Merge a config file (lowest precedence) with keyword overrides and
    validate; raises ConfigError on any invalid combination."""
    data = load_config_file(file_path) if file_path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "datasets" in data and isinstance(data["datasets"], dict):
        try:
            data["datasets"] = {int(k): str(v) for k, v in data["datasets"].items()}
        except (TypeError, ValueError) as e:
            raise ConfigError(f"datasets keys must be integer dims: {e}") from e
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"{loc}: {first['msg']}") from e

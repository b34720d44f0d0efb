"""Request/response bodies for the benchmark service."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class GenSynthRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    k: int = 10
    d: int = 2
    n: int = 5000
    overlap: float = 8.0
    seed: int = 0
    out_path: str


class GenSynthResponse(BaseModel):
    path: str
    name: str
    n: int
    d: int
    k: int


class SplitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    n: int
    seed: int = 0


class SplitResponse(BaseModel):
    n: int
    shared: List[int]
    unique: List[List[int]]


class ClusterRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    data_path: str
    method: str
    k: int = 10
    seed: int = 0
    resolution: float = 1.0
    n_neighbors: int = 15
    weight_policy: str = "unit"
    out_path: Optional[str] = None  # partition CSV written here when given


class ClusterResponse(BaseModel):
    method: str
    n: int
    n_clusters: int
    sizes: List[int]
    labels: List[int]
    out_path: Optional[str]


class EvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    truth_path: str  # partition CSV ("index,label") or labeled .mnde dataset
    pred_path: str


class EvalResponse(BaseModel):
    n: int
    ari: float
    fowlkes_mallows: float
    homogeneity: float
    completeness: float
    v_measure: float
    nmi: float


class SectionRequest(BaseModel):
    """One experiment section (or the whole pipeline): the body is the
    experiment config as flat keys, identical to the config file schema."""

    model_config = ConfigDict(extra="forbid")
    config: Dict = Field(default_factory=dict)


class SectionResponse(BaseModel):
    section: str
    out: str
    files: List[str]
    n_failures: int
    summary: Dict


class ErrorBody(BaseModel):
    kind: str  # "config" | "format" | "internal"
    error: str

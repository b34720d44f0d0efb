"""Benchmark report schema and deterministic emission.

The report is a pydantic tree serialized with sorted keys; reruns with
the same config are byte-identical except for the provenance timestamp.
Figures are emitted alongside as SVG, but every number a figure shows is
also present in a CSV — plots are views, CSVs and report.json are the
sources.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from .. import __version__
from ..density import DensityPeakProfile, load_profile_csv, save_profile_csv
from ..errors import ConfigError
from ..svgplot import PALETTE, Series, density_svg, line_band_svg
from .config import ExperimentConfig

# -- cells -------------------------------------------------------------------


class CellFailure(BaseModel):
    dim: Optional[int] = None
    method: Optional[str] = None
    seed_index: Optional[int] = None
    stage: str
    error: str


class PerformanceCell(BaseModel):
    dim: int
    method: str
    values: List[Optional[float]]  # ground-truth ARI per seed index; None = failed
    mean: Optional[float]
    sd: Optional[float]
    n_ok: int


class StabilityPair(BaseModel):
    i: int
    j: int
    ari: float


class StabilityCell(BaseModel):
    dim: int
    method: str
    pairs: List[StabilityPair]
    mean: Optional[float]
    sd: Optional[float]
    n_pairs: int


class BootstrapSeedCell(BaseModel):
    seed_index: int
    aris: List[float]  # 3 pairwise ARIs on the shared subset


class BootstrapCell(BaseModel):
    dim: int
    method: str
    seeds: List[BootstrapSeedCell]
    mean: Optional[float]
    sd: Optional[float]
    n_ok: int  # seed indices whose 3 fits all succeeded


class RfCell(BaseModel):
    dim: int
    mean: float
    sd: float
    folds: int


class PeakRow(BaseModel):
    rank: int  # 1-based by descending gamma
    index: int
    rho: float
    delta: float
    gamma: float


class DensityCell(BaseModel):
    dim: int
    percentile: float
    r: float
    n: int
    peaks: List[PeakRow]


class SDbwCell(BaseModel):
    dim: int
    value: Optional[float]  # None when ground-truth labels are unavailable


# -- sections ------------------------------------------------------------------


class PerformanceSection(BaseModel):
    cells: List[PerformanceCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


class StabilitySection(BaseModel):
    cells: List[StabilityCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


class BootstrapSection(BaseModel):
    cells: List[BootstrapCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


class RfSection(BaseModel):
    cells: List[RfCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


class DensitySection(BaseModel):
    cells: List[DensityCell] = Field(default_factory=list)
    s_dbw: List[SDbwCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


class Provenance(BaseModel):
    tool: str = "dimbench"
    version: str = __version__
    config_hash: str
    global_seed: int
    created_at: str  # the single field excluded from determinism guarantees


class BenchmarkReport(BaseModel):
    provenance: Provenance
    config: dict
    performance: List[PerformanceCell] = Field(default_factory=list)
    stability: List[StabilityCell] = Field(default_factory=list)
    bootstrap: List[BootstrapCell] = Field(default_factory=list)
    rf: List[RfCell] = Field(default_factory=list)
    density: List[DensityCell] = Field(default_factory=list)
    s_dbw: List[SDbwCell] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


SECTION_MODELS = {
    "performance": PerformanceSection,
    "stability": StabilitySection,
    "bootstrap": BootstrapSection,
    "rf": RfSection,
    "density": DensitySection,
}


def assemble_report(
    cfg: ExperimentConfig,
    performance: Optional[PerformanceSection] = None,
    stability: Optional[StabilitySection] = None,
    bootstrap: Optional[BootstrapSection] = None,
    rf: Optional[RfSection] = None,
    density: Optional[DensitySection] = None,
    created_at: Optional[str] = None,
) -> BenchmarkReport:
    failures: List[CellFailure] = []
    for sec in (performance, stability, bootstrap, rf, density):
        if sec is not None:
            for f in sec.failures:  # sections sharing a fit cache can record
                if f not in failures:  # the same cell failure twice
                    failures.append(f)
    return BenchmarkReport(
        provenance=Provenance(
            config_hash=cfg.config_hash(),
            global_seed=cfg.seed,
            created_at=created_at or datetime.now(timezone.utc).isoformat(),
        ),
        config=json.loads(cfg.canonical_json()),
        performance=performance.cells if performance else [],
        stability=stability.cells if stability else [],
        bootstrap=bootstrap.cells if bootstrap else [],
        rf=rf.cells if rf else [],
        density=density.cells if density else [],
        s_dbw=density.s_dbw if density else [],
        failures=failures,
    )


# -- deterministic text emission ----------------------------------------------


def model_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: List[str], rows: List[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _pct_tag(pct: float) -> str:
    return repr(float(pct))


def profile_csv_path(out: Path, dim: int, pct: float) -> Path:
    return out / "density" / f"profile-d{dim}-p{_pct_tag(pct)}.csv"


def write_section_file(out: Path, name: str, section: BaseModel) -> Path:
    path = out / "sections" / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_json(section), encoding="utf-8")
    return path


def read_section_file(out: Path, name: str):
    """Load one section JSON if present, else None; parse errors surface."""
    path = out / "sections" / f"{name}.json"
    if not path.exists():
        return None
    try:
        return SECTION_MODELS[name].model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as e:
        raise ConfigError(f"{path}: invalid section file: {e}") from e


def write_density_profiles(
    out: Path, profiles: Dict[Tuple[int, float], DensityPeakProfile]
) -> None:
    for (dim, pct), profile in sorted(profiles.items()):
        path = profile_csv_path(out, dim, pct)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_profile_csv(profile, path)


def _load_density_profiles(
    out: Path, cells: List[DensityCell]
) -> Dict[Tuple[int, float], DensityPeakProfile]:
    profiles: Dict[Tuple[int, float], DensityPeakProfile] = {}
    for cell in cells:
        path = profile_csv_path(out, cell.dim, cell.percentile)
        if not path.exists():
            raise ConfigError(
                f"density profile CSV missing for dim={cell.dim} "
                f"percentile={cell.percentile}: expected {path}"
            )
        profiles[(cell.dim, cell.percentile)] = load_profile_csv(
            path, r=cell.r, percentile=cell.percentile
        )
    return profiles


# -- figure assembly ------------------------------------------------------------


def _series_over_dims(dims, methods, cells) -> List[Series]:
    by_key = {(c.dim, c.method): c for c in cells}
    out = []
    for m in methods:
        means = [getattr(by_key.get((d, m)), "mean", None) for d in dims]
        sds = [getattr(by_key.get((d, m)), "sd", None) for d in dims]
        out.append(Series(label=m, means=means, sds=sds, color=PALETTE.get(m, "")))
    return out


def _dims_of(cells) -> List[int]:
    return sorted({c.dim for c in cells})


def _methods_of(cells, cfg_methods: List[str]) -> List[str]:
    present = {c.method for c in cells}
    ordered = [m for m in cfg_methods if m in present]
    return ordered + sorted(present - set(ordered))


def write_report(
    report: BenchmarkReport,
    out_dir,
    profiles: Optional[Dict[Tuple[int, float], DensityPeakProfile]] = None,
) -> List[Path]:
    """Write report.json plus all CSV tables and SVG figures; returns the
    paths written.  Density scatter figures need the full per-point
    profiles: pass them in, or they are reloaded from the profile CSVs
    already in the output directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plots").mkdir(exist_ok=True)
    written: List[Path] = []

    def note(path: Path) -> Path:
        written.append(path)
        return path

    note(out / "report.json").write_text(model_json(report), encoding="utf-8")

    cfg_methods = list(report.config.get("methods", []))

    _write_csv(
        note(out / "performance_values.csv"),
        ["dim", "method", "seed_index", "ari"],
        [
            (c.dim, c.method, i, v)
            for c in report.performance
            for i, v in enumerate(c.values)
            if v is not None
        ],
    )
    _write_csv(
        note(out / "performance_summary.csv"),
        ["dim", "method", "mean", "sd", "n_ok"],
        [(c.dim, c.method, c.mean, c.sd, c.n_ok) for c in report.performance],
    )
    _write_csv(
        note(out / "stability_values.csv"),
        ["dim", "method", "i", "j", "ari"],
        [(c.dim, c.method, p.i, p.j, p.ari) for c in report.stability for p in c.pairs],
    )
    _write_csv(
        note(out / "stability_summary.csv"),
        ["dim", "method", "mean", "sd", "n_pairs"],
        [(c.dim, c.method, c.mean, c.sd, c.n_pairs) for c in report.stability],
    )
    _write_csv(
        note(out / "bootstrap_values.csv"),
        ["dim", "method", "seed_index", "pair", "ari"],
        [
            (c.dim, c.method, s.seed_index, pair, v)
            for c in report.bootstrap
            for s in c.seeds
            for pair, v in enumerate(s.aris)
        ],
    )
    _write_csv(
        note(out / "bootstrap_summary.csv"),
        ["dim", "method", "mean", "sd", "n_ok"],
        [(c.dim, c.method, c.mean, c.sd, c.n_ok) for c in report.bootstrap],
    )
    _write_csv(
        note(out / "rf_accuracy.csv"),
        ["dim", "mean", "sd", "folds"],
        [(c.dim, c.mean, c.sd, c.folds) for c in report.rf],
    )
    _write_csv(
        note(out / "s_dbw.csv"),
        ["dim", "value"],
        [(c.dim, c.value) for c in report.s_dbw],
    )
    _write_csv(
        note(out / "density_peaks.csv"),
        ["dim", "percentile", "r", "rank", "index", "rho", "delta", "gamma"],
        [
            (c.dim, c.percentile, c.r, p.rank, p.index, p.rho, p.delta, p.gamma)
            for c in report.density
            for p in c.peaks
        ],
    )
    _write_csv(
        note(out / "failures.csv"),
        ["dim", "method", "seed_index", "stage", "error"],
        [(f.dim, f.method, f.seed_index, f.stage, f.error.replace(",", ";")) for f in report.failures],
    )

    for name, cells, ylabel in (
        ("performance", report.performance, "ground-truth ARI"),
        ("stability", report.stability, "pairwise seed ARI"),
        ("bootstrap", report.bootstrap, "shared-subset ARI"),
    ):
        if not cells:
            continue
        dims = _dims_of(cells)
        series = _series_over_dims(dims, _methods_of(cells, cfg_methods), cells)
        note(out / "plots" / f"{name}.svg").write_text(
            line_band_svg(f"{name} across dimensionality", "dimensionality", ylabel, dims, series),
            encoding="utf-8",
        )
    if report.rf:
        dims = _dims_of(report.rf)
        by_dim = {c.dim: c for c in report.rf}
        series = [
            Series(
                label="rf accuracy",
                means=[by_dim[d].mean for d in dims],
                sds=[by_dim[d].sd for d in dims],
                color="#4269d0",
            )
        ]
        note(out / "plots" / "rf_accuracy.svg").write_text(
            line_band_svg(
                "cross-validated classifier accuracy", "dimensionality", "accuracy", dims, series
            ),
            encoding="utf-8",
        )

    if report.density:
        if profiles is None:
            profiles = _load_density_profiles(out, report.density)
        else:
            write_density_profiles(out, profiles)
            for (dim, pct) in sorted(profiles):
                written.append(profile_csv_path(out, dim, pct))
        for cell in report.density:
            profile = profiles[(cell.dim, cell.percentile)]
            svg = density_svg(
                f"density peaks d={cell.dim}",
                profile.rho.tolist(),
                profile.delta.tolist(),
                profile.gamma.tolist(),
                [p.index for p in cell.peaks],
                r=cell.r,
                percentile=cell.percentile,
            )
            note(
                out / "plots" / f"density-d{cell.dim}-p{_pct_tag(cell.percentile)}.svg"
            ).write_text(svg, encoding="utf-8")
    return written

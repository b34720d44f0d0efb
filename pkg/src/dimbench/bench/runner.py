"""Cell-by-cell benchmark execution.

A cell is one (dimensionality, method, seed-index) unit of work.  Cell
failures are recorded and never abort the sweep; the report carries them
and the CLI signals partial failure via its exit code.  Full-dataset fits
are cached so the performance and stability sections share the identical
partitions, as the protocol requires.
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..dataset import Dataset
from ..density import DensityPeakProfile, density_peak_profile, s_dbw, top_gamma
from ..errors import ConfigError, DimbenchError
from ..forest import ForestParams, cross_val_accuracy
from ..kmeans import kmeans
from ..knn import KnnGraph, knn_graph
from ..leiden import leiden
from ..metrics import ari, pairwise_ari
from ..mixtures import gmm_fit, tmm_fit
from ..mnde import load_mnde
from ..csvio import load_csv
from ..partition import Partition
from ..splits import N_BOOTSTRAPS, bootstrap_split
from ..synth import SyntheticMixtureSpec, generate_synthetic_mixture
from .config import ExperimentConfig, derive_seed
from .report import (
    BenchmarkReport,
    BootstrapCell,
    BootstrapSection,
    BootstrapSeedCell,
    CellFailure,
    DensityCell,
    DensitySection,
    PeakRow,
    PerformanceCell,
    PerformanceSection,
    RfCell,
    RfSection,
    SDbwCell,
    StabilityCell,
    StabilityPair,
    StabilitySection,
    assemble_report,
)


def _mean_sd(values: List[float]) -> Tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    if len(values) == 1:
        return float(values[0]), 0.0
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=1))


def load_dataset_file(path: Union[str, Path]) -> Dataset:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"dataset file not found: {p}")
    suffix = p.suffix.lower()
    if suffix == ".mnde":
        return load_mnde(p)
    if suffix == ".csv":
        return load_csv(p)
    raise ConfigError(f"unknown dataset format {suffix!r} for {p} (expected .mnde or .csv)")


class BenchRunner:
    """Executes the experiment sections described by one ExperimentConfig."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._datasets: Dict[int, Dataset] = {}
        self._graphs: Dict[int, KnnGraph] = {}
        self._fits: Dict[Tuple[int, str, int], Union[np.ndarray, CellFailure]] = {}

    # -- data ------------------------------------------------------------

    def dataset(self, dim: int) -> Dataset:
        if dim not in self._datasets:
            cfg = self.cfg
            if cfg.datasets:
                ds = load_dataset_file(cfg.datasets[dim])
                if ds.d != dim:
                    raise ConfigError(
                        f"dataset {cfg.datasets[dim]} has d={ds.d}, configured as dim {dim}"
                    )
            else:
                # one data seed for every dim: the signal content of the
                # synthetic sweep stays fixed while dimensionality varies
                ds = generate_synthetic_mixture(
                    SyntheticMixtureSpec(
                        k=cfg.synth_k,
                        d=dim,
                        n=cfg.synth_n,
                        overlap=cfg.synth_overlap,
                        seed=cfg.data_seed(),
                    )
                )
            self._datasets[dim] = ds
        return self._datasets[dim]

    def _graph(self, dim: int) -> KnnGraph:
        if dim not in self._graphs:
            self._graphs[dim] = knn_graph(
                self.dataset(dim),
                n_neighbors=self.cfg.n_neighbors,
                weight_policy=self.cfg.weight_policy,
            )
        return self._graphs[dim]

    # -- fitting ------------------------------------------------------------

    def _fit_once(
        self, ds: Dataset, method: str, seed: int, graph: Optional[KnnGraph] = None
    ) -> np.ndarray:
        cfg = self.cfg
        if method == "kmeans":
            return kmeans(ds, cfg.k, seed=seed).partition.labels
        if method == "gmm":
            return gmm_fit(ds, cfg.k, seed=seed).partition.labels
        if method == "tmm":
            return tmm_fit(ds, cfg.k, seed=seed).partition.labels
        if method == "leiden":
            if graph is None:
                graph = knn_graph(
                    ds, n_neighbors=cfg.n_neighbors, weight_policy=cfg.weight_policy
                )
            return leiden(graph, resolution=cfg.resolution, seed=seed).labels
        raise ConfigError(f"unknown method {method!r}")

    def _full_fit(self, dim: int, method: str, i: int) -> Union[np.ndarray, CellFailure]:
        key = (dim, method, i)
        if key not in self._fits:
            try:
                graph = self._graph(dim) if method == "leiden" else None
                labels = self._fit_once(
                    self.dataset(dim), method, self.cfg.cell_seed(dim, method, i), graph
                )
                self._fits[key] = labels
            except DimbenchError as e:
                self._fits[key] = CellFailure(
                    dim=dim,
                    method=method,
                    seed_index=i,
                    stage="fit",
                    error=f"{type(e).__name__}: {e}",
                )
        return self._fits[key]

    # -- sections -------------------------------------------------------------

    def run_performance(self) -> PerformanceSection:
        """Ground-truth agreement: ARI(prediction, labels) per cell."""
        cfg = self.cfg
        section = PerformanceSection()
        for dim in cfg.dims:
            ds = self.dataset(dim)
            if not ds.has_labels:
                raise ConfigError(
                    f"performance section needs ground-truth labels; dim {dim} has none"
                )
            for method in cfg.methods:
                values: List[Optional[float]] = []
                for i in range(cfg.n_seeds):
                    fit = self._full_fit(dim, method, i)
                    if isinstance(fit, CellFailure):
                        section.failures.append(fit)
                        values.append(None)
                    else:
                        values.append(ari(ds.labels, fit))
                ok = [v for v in values if v is not None]
                mean, sd = _mean_sd(ok)
                section.cells.append(
                    PerformanceCell(
                        dim=dim, method=method, values=values, mean=mean, sd=sd, n_ok=len(ok)
                    )
                )
        return section

    def run_seed_stability(self) -> StabilitySection:
        """Pairwise ARI among the same n_seeds partitions used for the
        performance section (shared via the fit cache)."""
        cfg = self.cfg
        section = StabilitySection()
        for dim in cfg.dims:
            for method in cfg.methods:
                fits: List[Tuple[int, np.ndarray]] = []
                for i in range(cfg.n_seeds):
                    fit = self._full_fit(dim, method, i)
                    if isinstance(fit, CellFailure):
                        if fit not in section.failures:
                            section.failures.append(fit)
                    else:
                        fits.append((i, fit))
                pairs: List[StabilityPair] = []
                if len(fits) >= 2:
                    _, _, matrix = pairwise_ari([f for _, f in fits])
                    for a in range(len(fits)):
                        for b in range(a + 1, len(fits)):
                            pairs.append(
                                StabilityPair(
                                    i=fits[a][0], j=fits[b][0], ari=float(matrix[a, b])
                                )
                            )
                mean, sd = _mean_sd([p.ari for p in pairs])
                section.cells.append(
                    StabilityCell(
                        dim=dim,
                        method=method,
                        pairs=pairs,
                        mean=mean,
                        sd=sd,
                        n_pairs=len(pairs),
                    )
                )
        return section

    def run_bootstrap_robustness(self) -> BootstrapSection:
        """Per seed: one index split shared by every dim, three fits on the
        60% bootstrap datasets, ARIs on the shared 40% only."""
        cfg = self.cfg
        section = BootstrapSection()
        sizes = {self.dataset(dim).n for dim in cfg.dims}
        if len(sizes) > 1:
            raise ConfigError(
                f"bootstrap protocol shares one split across dims, but dataset "
                f"sizes differ: {sorted(sizes)}"
            )
        n = sizes.pop()
        splits = [bootstrap_split(n, cfg.split_seed(i)) for i in range(cfg.n_seeds)]
        for dim in cfg.dims:
            ds = self.dataset(dim)
            for method in cfg.methods:
                seed_cells: List[BootstrapSeedCell] = []
                for i in range(cfg.n_seeds):
                    split = splits[i]
                    shared_sorted = np.sort(split.shared)
                    shared_parts: List[np.ndarray] = []
                    failure = None
                    for b in range(N_BOOTSTRAPS):
                        fit_idx = split.fit_indices(b)
                        try:
                            labels = self._fit_once(
                                ds.subset(fit_idx),
                                method,
                                derive_seed(cfg.seed, "boot", dim, method, i, b),
                            )
                        except DimbenchError as e:
                            failure = CellFailure(
                                dim=dim,
                                method=method,
                                seed_index=i,
                                stage=f"bootstrap-fit-{b}",
                                error=f"{type(e).__name__}: {e}",
                            )
                            break
                        pos = np.searchsorted(fit_idx, shared_sorted)
                        shared_parts.append(labels[pos])
                    if failure is not None:
                        section.failures.append(failure)
                        continue
                    aris = [
                        ari(shared_parts[a], shared_parts[b])
                        for a in range(N_BOOTSTRAPS)
                        for b in range(a + 1, N_BOOTSTRAPS)
                    ]
                    seed_cells.append(BootstrapSeedCell(seed_index=i, aris=aris))
                values = [v for s in seed_cells for v in s.aris]
                mean, sd = _mean_sd(values)
                section.cells.append(
                    BootstrapCell(
                        dim=dim,
                        method=method,
                        seeds=seed_cells,
                        mean=mean,
                        sd=sd,
                        n_ok=len(seed_cells),
                    )
                )
        return section

    def run_density_scan(
        self,
    ) -> Tuple[DensitySection, Dict[Tuple[int, float], DensityPeakProfile]]:
        """Density-peak profiles for every (dim, percentile), plus the
        S_Dbw validity index against ground-truth labels where available."""
        cfg = self.cfg
        section = DensitySection()
        profiles: Dict[Tuple[int, float], DensityPeakProfile] = {}
        for dim in cfg.dims:
            ds = self.dataset(dim)
            for pct in cfg.percentiles:
                try:
                    profile = density_peak_profile(ds, pct)
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        peaks = top_gamma(profile, m=min(cfg.top_m, ds.n))
                except DimbenchError as e:
                    section.failures.append(
                        CellFailure(
                            dim=dim,
                            method=None,
                            seed_index=None,
                            stage=f"density-p{pct}",
                            error=f"{type(e).__name__}: {e}",
                        )
                    )
                    continue
                profiles[(dim, float(pct))] = profile
                section.cells.append(
                    DensityCell(
                        dim=dim,
                        percentile=float(pct),
                        r=profile.r,
                        n=ds.n,
                        peaks=[
                            PeakRow(
                                rank=rank,
                                index=idx,
                                rho=float(profile.rho[idx]),
                                delta=float(profile.delta[idx]),
                                gamma=g,
                            )
                            for rank, (idx, g) in enumerate(peaks, start=1)
                        ],
                    )
                )
            if ds.has_labels:
                try:
                    value = s_dbw(ds, Partition(ds.labels))
                    section.s_dbw.append(SDbwCell(dim=dim, value=value))
                except DimbenchError as e:
                    section.failures.append(
                        CellFailure(
                            dim=dim, method=None, seed_index=None,
                            stage="s_dbw", error=f"{type(e).__name__}: {e}",
                        )
                    )
            else:
                section.s_dbw.append(SDbwCell(dim=dim, value=None))
        return section, profiles

    def run_rf_check(self) -> RfSection:
        """Cross-validated classifier accuracy per dim (separability probe)."""
        cfg = self.cfg
        section = RfSection()
        for dim in cfg.dims:
            ds = self.dataset(dim)
            try:
                seed = cfg.rf_seed(dim)
                mean, sd = cross_val_accuracy(
                    ds,
                    ForestParams(n_trees=cfg.rf_trees, seed=seed),
                    folds=cfg.folds,
                    seed=seed,
                )
            except DimbenchError as e:
                section.failures.append(
                    CellFailure(
                        dim=dim, method=None, seed_index=None,
                        stage="rf", error=f"{type(e).__name__}: {e}",
                    )
                )
                continue
            section.cells.append(RfCell(dim=dim, mean=mean, sd=sd, folds=cfg.folds))
        return section

    def run_all(
        self,
    ) -> Tuple[BenchmarkReport, Dict[Tuple[int, float], DensityPeakProfile]]:
        performance = self.run_performance()
        stability = self.run_seed_stability()
        bootstrap = self.run_bootstrap_robustness()
        density, profiles = self.run_density_scan()
        rf = self.run_rf_check()
        report = assemble_report(
            self.cfg,
            performance=performance,
            stability=stability,
            bootstrap=bootstrap,
            rf=rf,
            density=density,
        )
        return report, profiles

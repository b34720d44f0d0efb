"""FastAPI application wiring benchmark operations to HTTP endpoints.

All heavy lifting lives in the core package; endpoints validate bodies,
call one operation, write any requested artifacts to the caller-supplied
paths, and return JSON.  Domain errors map to structured 400/500 bodies
so clients can distinguish configuration mistakes from internal faults.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench.config import build_config
from ..bench.report import (
    assemble_report,
    profile_csv_path,
    read_section_file,
    write_density_profiles,
    write_report,
    write_section_file,
)
from ..bench.runner import BenchRunner, load_dataset_file
from ..errors import ConfigError, CorruptionError, DimbenchError, FormatError, VersionError
from ..kmeans import kmeans
from ..knn import knn_graph
from ..leiden import leiden
from ..metrics import ari, completeness, fowlkes_mallows, homogeneity, v_measure
from ..mixtures import gmm_fit, tmm_fit
from ..mnde import load_mnde, save_mnde
from ..partition import Partition, load_partition_csv, save_partition_csv
from ..splits import bootstrap_split
from ..synth import SyntheticMixtureSpec, generate_synthetic_mixture
from .models import (
    ClusterRequest,
    ClusterResponse,
    EvalRequest,
    EvalResponse,
    GenSynthRequest,
    GenSynthResponse,
    SectionRequest,
    SectionResponse,
    SplitRequest,
    SplitResponse,
)


def _error_response(status: int, kind: str, error: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"kind": kind, "error": error})


def _load_labels(path: str) -> np.ndarray:
    """A partition CSV or a labeled MNDE dataset, as cluster labels."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"file not found: {p}")
    if p.suffix.lower() == ".mnde":
        ds = load_mnde(p)
        if not ds.has_labels:
            raise ConfigError(f"{p} stores no labels")
        return ds.labels
    return load_partition_csv(p).labels


def create_app() -> FastAPI:
    app = FastAPI(title="dimbench", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(_: Request, exc: ConfigError):
        return _error_response(400, "config", str(exc))

    @app.exception_handler(FormatError)
    async def _format_error(_: Request, exc: FormatError):
        return _error_response(400, "format", str(exc))

    @app.exception_handler(CorruptionError)
    async def _corruption_error(_: Request, exc: CorruptionError):
        return _error_response(400, "format", str(exc))

    @app.exception_handler(VersionError)
    async def _version_error(_: Request, exc: VersionError):
        return _error_response(400, "format", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()))
        return _error_response(400, "config", f"{loc}: {first.get('msg', 'invalid')}")

    @app.exception_handler(DimbenchError)
    async def _domain_error(_: Request, exc: DimbenchError):
        return _error_response(500, "internal", str(exc))

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "tool": "dimbench", "version": __version__}

    @app.post("/v1/gen-synth", response_model=GenSynthResponse)
    def gen_synth(req: GenSynthRequest) -> GenSynthResponse:
        spec = SyntheticMixtureSpec(k=req.k, d=req.d, n=req.n, overlap=req.overlap, seed=req.seed)
        ds = generate_synthetic_mixture(spec)
        out = Path(req.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_mnde(ds, out)
        return GenSynthResponse(path=str(out), name=ds.name, n=ds.n, d=ds.d, k=req.k)

    @app.post("/v1/split", response_model=SplitResponse)
    def split(req: SplitRequest) -> SplitResponse:
        s = bootstrap_split(req.n, req.seed)
        return SplitResponse(
            n=req.n,
            shared=[int(i) for i in s.shared],
            unique=[[int(i) for i in u] for u in s.unique],
        )

    @app.post("/v1/cluster", response_model=ClusterResponse)
    def cluster(req: ClusterRequest) -> ClusterResponse:
        ds = load_dataset_file(req.data_path)
        if req.method == "kmeans":
            part = kmeans(ds, req.k, seed=req.seed).partition
        elif req.method == "gmm":
            part = gmm_fit(ds, req.k, seed=req.seed).partition
        elif req.method == "tmm":
            part = tmm_fit(ds, req.k, seed=req.seed).partition
        elif req.method == "leiden":
            g = knn_graph(ds, n_neighbors=req.n_neighbors, weight_policy=req.weight_policy)
            part = leiden(g, resolution=req.resolution, seed=req.seed)
        else:
            raise ConfigError(f"unknown method {req.method!r}")
        out_path = None
        if req.out_path:
            out = Path(req.out_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            save_partition_csv(part, out)
            out_path = str(out)
        return ClusterResponse(
            method=req.method,
            n=part.n,
            n_clusters=part.k,
            sizes=[int(s) for s in part.sizes()],
            labels=[int(v) for v in part.labels],
            out_path=out_path,
        )

    @app.post("/v1/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest) -> EvalResponse:
        truth = _load_labels(req.truth_path)
        pred = _load_labels(req.pred_path)
        if truth.shape[0] != pred.shape[0]:
            raise ConfigError(
                f"partition sizes differ: truth n={truth.shape[0]}, pred n={pred.shape[0]}"
            )
        vm = v_measure(pred, truth)
        return EvalResponse(
            n=int(truth.shape[0]),
            ari=ari(truth, pred),
            fowlkes_mallows=fowlkes_mallows(truth, pred),
            homogeneity=homogeneity(pred, truth),
            completeness=completeness(pred, truth),
            v_measure=vm,
            nmi=vm,
        )

    # -- experiment sections -------------------------------------------------

    def _section_endpoint(name: str, run: Callable[[BenchRunner], Tuple]):
        def endpoint(req: SectionRequest) -> SectionResponse:
            cfg = build_config(**req.config)
            runner = BenchRunner(cfg)
            section, profiles, summary = run(runner)
            out = Path(cfg.out)
            files = [str(write_section_file(out, name, section))]
            if profiles:
                write_density_profiles(out, profiles)
                files.extend(str(profile_csv_path(out, d, p)) for d, p in sorted(profiles))
            return SectionResponse(
                section=name,
                out=str(out),
                files=files,
                n_failures=len(section.failures),
                summary=summary,
            )

        return endpoint

    def _mean_table(cells) -> Dict:
        return {
            f"d{c.dim}/{c.method}": c.mean
            for c in cells
            if getattr(c, "method", None) is not None
        }

    def _run_performance(r: BenchRunner):
        s = r.run_performance()
        return s, None, {"cells": len(s.cells), "mean_ari": _mean_table(s.cells)}

    def _run_stability(r: BenchRunner):
        s = r.run_seed_stability()
        return s, None, {"cells": len(s.cells), "mean_ari": _mean_table(s.cells)}

    def _run_bootstrap(r: BenchRunner):
        s = r.run_bootstrap_robustness()
        return s, None, {"cells": len(s.cells), "mean_ari": _mean_table(s.cells)}

    def _run_density(r: BenchRunner):
        s, profiles = r.run_density_scan()
        return s, profiles, {
            "cells": len(s.cells),
            "s_dbw": {f"d{c.dim}": c.value for c in s.s_dbw},
        }

    def _run_rf(r: BenchRunner):
        s = r.run_rf_check()
        return s, None, {
            "cells": len(s.cells),
            "accuracy": {f"d{c.dim}": c.mean for c in s.cells},
        }

    app.post("/v1/performance", response_model=SectionResponse)(
        _section_endpoint("performance", _run_performance)
    )
    app.post("/v1/stability", response_model=SectionResponse)(
        _section_endpoint("stability", _run_stability)
    )
    app.post("/v1/bootstrap", response_model=SectionResponse)(
        _section_endpoint("bootstrap", _run_bootstrap)
    )
    app.post("/v1/density", response_model=SectionResponse)(
        _section_endpoint("density", _run_density)
    )
    app.post("/v1/rf-cv", response_model=SectionResponse)(
        _section_endpoint("rf", _run_rf)
    )

    @app.post("/v1/report", response_model=SectionResponse)
    def report(req: SectionRequest) -> SectionResponse:
        """Assemble report.json, CSV tables, and SVG figures from section
        files already present in the config's output directory."""
        cfg = build_config(**req.config)
        out = Path(cfg.out)
        sections = {name: read_section_file(out, name) for name in
                    ("performance", "stability", "bootstrap", "rf", "density")}
        if all(v is None for v in sections.values()):
            raise ConfigError(
                f"no section files under {out / 'sections'}; run section "
                "commands (or 'all') first"
            )
        rep = assemble_report(
            cfg,
            performance=sections["performance"],
            stability=sections["stability"],
            bootstrap=sections["bootstrap"],
            rf=sections["rf"],
            density=sections["density"],
        )
        files = write_report(rep, out)
        return SectionResponse(
            section="report",
            out=str(out),
            files=[str(f) for f in files],
            n_failures=len(rep.failures),
            summary={"sections": [k for k, v in sections.items() if v is not None]},
        )

    @app.post("/v1/all", response_model=SectionResponse)
    def run_all(req: SectionRequest) -> SectionResponse:
        cfg = build_config(**req.config)
        runner = BenchRunner(cfg)
        out = Path(cfg.out)
        performance = runner.run_performance()
        stability = runner.run_seed_stability()
        bootstrap = runner.run_bootstrap_robustness()
        density, profiles = runner.run_density_scan()
        rf = runner.run_rf_check()
        files = [
            str(write_section_file(out, "performance", performance)),
            str(write_section_file(out, "stability", stability)),
            str(write_section_file(out, "bootstrap", bootstrap)),
            str(write_section_file(out, "density", density)),
            str(write_section_file(out, "rf", rf)),
        ]
        rep = assemble_report(
            cfg,
            performance=performance,
            stability=stability,
            bootstrap=bootstrap,
            rf=rf,
            density=density,
        )
        files.extend(str(f) for f in write_report(rep, out, profiles))
        return SectionResponse(
            section="all",
            out=str(out),
            files=files,
            n_failures=len(rep.failures),
            summary={
                "performance": _mean_table(performance.cells),
                "stability": _mean_table(stability.cells),
                "bootstrap": _mean_table(bootstrap.cells),
                "rf": {f"d{c.dim}": c.mean for c in rf.cells},
            },
        )

    return app

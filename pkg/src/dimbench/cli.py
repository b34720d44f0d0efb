"""Command-line client for the benchmark service.

Every subcommand builds a JSON request and posts it to the service —
in-process by default, or to a running server via ``--server URL`` — then
prints the JSON response.  Exit codes: 0 success, 2 configuration or
input-format error, 3 completed with recorded per-cell failures (outputs
are still written), 1 anything else.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from .bench.config import load_config_file
from .errors import DimbenchError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


class _Client:
    """Uniform .post/.get over an in-process app or a remote server."""

    def __init__(self, server: Optional[str]):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)

    def get(self, path: str):
        return self._client.get(path)


pass_client = click.make_pass_decorator(_Client)


@click.group()
@click.option(
    "--server",
    default=None,
    metavar="URL",
    help="Base URL of a running service; default runs in-process.",
)
@click.version_option(package_name="dimbench", prog_name="dimbench")
@click.pass_context
def cli(ctx: click.Context, server: Optional[str]) -> None:
    """Clustering-degradation benchmark suite."""
    ctx.obj = _Client(server)


def _finish(resp) -> None:
    try:
        body = resp.json()
    except ValueError:
        body = {"kind": "internal", "error": resp.text}
    if resp.status_code == 200:
        click.echo(json.dumps(body, indent=2, sort_keys=True))
        sys.exit(EXIT_PARTIAL if body.get("n_failures") else EXIT_OK)
    click.echo(f"error: {body.get('error', resp.text)}", err=True)
    sys.exit(EXIT_CONFIG if body.get("kind") in ("config", "format") else 1)


def _csv_ints(_ctx, _param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _csv_floats(_ctx, _param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _csv_strs(_ctx, _param, value):
    if value is None:
        return None
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _config_options(fn):
    opts = [
        click.option("--config", "config_file", type=click.Path(), default=None,
                     help="Config file: flat 'key = value' lines or a JSON object."),
        click.option("--seed", type=int, default=None, help="Global seed."),
        click.option("--out", default=None, metavar="DIR", help="Output directory."),
        click.option("--dims", callback=_csv_ints, default=None, metavar="D1,D2,...",
                     help="Dimensionalities to sweep."),
        click.option("--methods", callback=_csv_strs, default=None, metavar="M1,M2,...",
                     help="Subset of kmeans,gmm,tmm,leiden."),
        click.option("--percentiles", callback=_csv_floats, default=None, metavar="P1,P2,...",
                     help="Distance percentiles for the density scan."),
        click.option("--k", type=int, default=None, help="Cluster count for centroid methods."),
        click.option("--n-seeds", type=int, default=None, help="Seeds per cell."),
        click.option("--dataset", "dataset_entries", multiple=True, metavar="DIM=PATH",
                     help="Per-dim embedding file (repeatable); omit to synthesize."),
        click.option("--synth-k", type=int, default=None, help="Synthetic component count."),
        click.option("--synth-n", type=int, default=None, help="Synthetic sample count."),
        click.option("--synth-overlap", type=float, default=None,
                     help="Synthetic mean-separation scale c."),
        click.option("--neighbors", "n_neighbors", type=int, default=None,
                     help="kNN graph neighbor count."),
        click.option("--resolution", type=float, default=None, help="Community resolution."),
        click.option("--weight-policy", default=None,
                     type=click.Choice(["unit", "inverse_distance"]),
                     help="kNN edge weights."),
        click.option("--rf-trees", type=int, default=None, help="Forest size."),
        click.option("--folds", type=int, default=None, help="Cross-validation folds."),
        click.option("--top-m", type=int, default=None, help="Peak candidates kept per profile."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_config_payload(config_file, dataset_entries, **flags) -> dict:
    try:
        data = load_config_file(config_file) if config_file else {}
    except (DimbenchError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    data.update({k: v for k, v in flags.items() if v is not None})
    if dataset_entries:
        datasets = {}
        for entry in dataset_entries:
            dim, sep, path = entry.partition("=")
            if not sep or not dim.strip().isdigit() or not path:
                click.echo(f"error: --dataset expects DIM=PATH, got {entry!r}", err=True)
                sys.exit(EXIT_CONFIG)
            datasets[int(dim)] = path
        data["datasets"] = datasets
    return data


def _section_command(name: str, endpoint: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @_config_options
    @pass_client
    def _cmd(client: _Client, config_file, dataset_entries, **flags):
        payload = _build_config_payload(config_file, dataset_entries, **flags)
        _finish(client.post(endpoint, {"config": payload}))

    return _cmd


_section_command("performance", "/v1/performance",
                 "Ground-truth ARI per (dim, method, seed).")
_section_command("stability", "/v1/stability",
                 "Pairwise ARI across seeds per (dim, method).")
_section_command("bootstrap", "/v1/bootstrap",
                 "Robustness to data perturbation: three 60% fits, ARI on the shared 40%.")
_section_command("density", "/v1/density",
                 "Density-peak profiles per (dim, percentile), plus S_Dbw.")
_section_command("rf-cv", "/v1/rf-cv",
                 "Cross-validated classifier accuracy per dim.")
_section_command("report", "/v1/report",
                 "Assemble report.json, CSV tables, and SVG figures from stored sections.")
_section_command("all", "/v1/all",
                 "Run every section, then emit the full report.")


@cli.command("gen-synth", help="Synthesize a mixture dataset and write an MNDE file.")
@click.option("--k", type=int, default=10, show_default=True, help="Component count.")
@click.option("--d", type=int, required=True, help="Dimensionality.")
@click.option("--n", type=int, default=5000, show_default=True, help="Sample count.")
@click.option("--overlap", type=float, default=8.0, show_default=True,
              help="Mean-separation scale c.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, metavar="FILE", help="Output .mnde path.")
@pass_client
def gen_synth(client: _Client, k, d, n, overlap, seed, out):
    _finish(client.post("/v1/gen-synth", {
        "k": k, "d": d, "n": n, "overlap": overlap, "seed": seed, "out_path": out,
    }))


@cli.command("split", help="Bootstrap index split: 40% shared, three 20% unique blocks.")
@click.option("--n", type=int, required=True, help="Dataset size.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, metavar="FILE", help="Also write the JSON here.")
@pass_client
def split(client: _Client, n, seed, out):
    resp = client.post("/v1/split", {"n": n, "seed": seed})
    if resp.status_code == 200 and out:
        from pathlib import Path

        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(resp.json(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    _finish(resp)


@cli.command("cluster", help="Fit one clustering method on one dataset file.")
@click.option("--data", "data_path", required=True, metavar="PATH",
              help="Dataset file (.mnde or .csv).")
@click.option("--method", required=True,
              type=click.Choice(["kmeans", "gmm", "tmm", "leiden"]))
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--resolution", type=float, default=1.0, show_default=True)
@click.option("--neighbors", "n_neighbors", type=int, default=15, show_default=True)
@click.option("--weight-policy", default="unit",
              type=click.Choice(["unit", "inverse_distance"]), show_default=True)
@click.option("--out", default=None, metavar="FILE", help="Write the partition CSV here.")
@pass_client
def cluster(client: _Client, data_path, method, k, seed, resolution, n_neighbors,
            weight_policy, out):
    _finish(client.post("/v1/cluster", {
        "data_path": data_path, "method": method, "k": k, "seed": seed,
        "resolution": resolution, "n_neighbors": n_neighbors,
        "weight_policy": weight_policy, "out_path": out,
    }))


@cli.command("eval", help="Agreement metrics between two stored partitions.")
@click.option("--truth", "truth_path", required=True, metavar="PATH",
              help="Partition CSV or labeled .mnde file.")
@click.option("--pred", "pred_path", required=True, metavar="PATH",
              help="Partition CSV or labeled .mnde file.")
@pass_client
def evaluate(client: _Client, truth_path, pred_path):
    _finish(client.post("/v1/eval", {"truth_path": truth_path, "pred_path": pred_path}))


@cli.command("serve", help="Run the HTTP service (for --server clients).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main() -> None:
    cli(auto_envvar_prefix="DIMBENCH")


if __name__ == "__main__":
    main()

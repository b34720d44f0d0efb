import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dimbench.bench.config import ExperimentConfig
from dimbench.bench.report import (
    BootstrapCell,
    BootstrapSeedCell,
    BootstrapSection,
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
    model_json,
    profile_csv_path,
    read_section_file,
    write_density_profiles,
    write_report,
    write_section_file,
)
from dimbench.density import DensityPeakProfile
from dimbench.errors import ConfigError


def _sections():
    perf = PerformanceSection(
        cells=[
            PerformanceCell(dim=2, method="kmeans", values=[1.0, 0.5, None], mean=0.75, sd=0.353553, n_ok=2),
            PerformanceCell(dim=4, method="kmeans", values=[0.9, 0.8, 0.7], mean=0.8, sd=0.1, n_ok=3),
        ],
        failures=[CellFailure(dim=2, method="kmeans", seed_index=2, stage="fit", error="boom, with comma")],
    )
    stab = StabilitySection(
        cells=[
            StabilityCell(
                dim=2, method="kmeans",
                pairs=[StabilityPair(i=0, j=1, ari=0.6)], mean=0.6, sd=0.0, n_pairs=1,
            )
        ],
        failures=[CellFailure(dim=2, method="kmeans", seed_index=2, stage="fit", error="boom, with comma")],
    )
    boot = BootstrapSection(
        cells=[
            BootstrapCell(
                dim=2, method="kmeans",
                seeds=[BootstrapSeedCell(seed_index=0, aris=[1.0, 0.9, 0.8])],
                mean=0.9, sd=0.1, n_ok=1,
            )
        ]
    )
    rf = RfSection(cells=[RfCell(dim=2, mean=0.91, sd=0.02, folds=10)])
    dens = DensitySection(
        cells=[
            DensityCell(
                dim=2, percentile=1.0, r=0.5, n=4,
                peaks=[PeakRow(rank=1, index=3, rho=9.0, delta=2.0, gamma=18.0)],
            )
        ],
        s_dbw=[SDbwCell(dim=2, value=0.8), SDbwCell(dim=4, value=None)],
    )
    return perf, stab, boot, rf, dens


def _profiles():
    return {
        (2, 1.0): DensityPeakProfile(
            rho=np.array([1.0, 2.0, 3.0, 9.0]),
            delta=np.array([0.1, 0.2, 0.3, 2.0]),
            gamma=np.array([0.1, 0.4, 0.9, 18.0]),
            r=0.5,
            percentile=1.0,
        )
    }


def test_assemble_dedupes_shared_failures():
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(
        ExperimentConfig(), performance=perf, stability=stab, bootstrap=boot,
        rf=rf, density=dens, created_at="T",
    )
    assert len(rep.failures) == 1  # identical failure recorded once
    assert rep.provenance.created_at == "T"
    assert rep.s_dbw[1].value is None


def test_report_json_is_deterministic_and_sorted():
    perf, stab, boot, rf, dens = _sections()
    cfg = ExperimentConfig()
    a = model_json(assemble_report(cfg, performance=perf, created_at="T"))
    b = model_json(assemble_report(cfg, performance=perf, created_at="T"))
    assert a == b
    keys = list(json.loads(a))
    assert keys == sorted(keys)


def test_write_report_inventory(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(
        ExperimentConfig(dims=[2, 4]), performance=perf, stability=stab,
        bootstrap=boot, rf=rf, density=dens, created_at="T",
    )
    written = write_report(rep, tmp_path, profiles=_profiles())
    names = {p.relative_to(tmp_path).as_posix() for p in written}
    assert {
        "report.json",
        "performance_values.csv",
        "performance_summary.csv",
        "stability_values.csv",
        "stability_summary.csv",
        "bootstrap_values.csv",
        "bootstrap_summary.csv",
        "rf_accuracy.csv",
        "s_dbw.csv",
        "density_peaks.csv",
        "failures.csv",
        "plots/performance.svg",
        "plots/stability.svg",
        "plots/bootstrap.svg",
        "plots/rf_accuracy.svg",
        "plots/density-d2-p1.0.svg",
        "density/profile-d2-p1.0.csv",
    } <= names
    for p in written:
        assert p.exists()


def test_every_plotted_number_is_in_a_csv(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(
        ExperimentConfig(dims=[2, 4]), performance=perf, stability=stab,
        bootstrap=boot, rf=rf, density=dens, created_at="T",
    )
    write_report(rep, tmp_path, profiles=_profiles())
    with open(tmp_path / "performance_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    means = {(int(r["dim"]), r["method"]): float(r["mean"]) for r in rows}
    assert means[(2, "kmeans")] == 0.75
    with open(tmp_path / "density" / "profile-d2-p1.0.csv") as fh:
        prows = list(csv.DictReader(fh))
    assert [float(r["gamma"]) for r in prows] == [0.1, 0.4, 0.9, 18.0]


def test_svgs_are_wellformed_xml(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(
        ExperimentConfig(dims=[2, 4]), performance=perf, stability=stab,
        bootstrap=boot, rf=rf, density=dens, created_at="T",
    )
    written = write_report(rep, tmp_path, profiles=_profiles())
    svgs = [p for p in written if p.suffix == ".svg"]
    assert len(svgs) == 5
    for p in svgs:
        root = ET.fromstring(p.read_text())
        assert root.tag.endswith("svg")


def test_failures_csv_escapes_commas(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(ExperimentConfig(), performance=perf, created_at="T")
    write_report(rep, tmp_path)
    with open(tmp_path / "failures.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["error"] == "boom; with comma"


def test_section_file_roundtrip(tmp_path):
    perf, *_ = _sections()
    write_section_file(tmp_path, "performance", perf)
    back = read_section_file(tmp_path, "performance")
    assert back == perf
    assert read_section_file(tmp_path, "stability") is None


def test_section_file_invalid_is_config_error(tmp_path):
    path = tmp_path / "sections" / "performance.json"
    path.parent.mkdir(parents=True)
    path.write_text("{\"cells\": 7}")
    with pytest.raises(ConfigError):
        read_section_file(tmp_path, "performance")


def test_density_profiles_reloaded_from_disk(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(ExperimentConfig(dims=[2, 4]), density=dens, created_at="T")
    write_density_profiles(tmp_path, _profiles())
    written = write_report(rep, tmp_path)  # profiles=None -> reload from CSVs
    assert (tmp_path / "plots" / "density-d2-p1.0.svg") in written


def test_density_profiles_missing_is_config_error(tmp_path):
    perf, stab, boot, rf, dens = _sections()
    rep = assemble_report(ExperimentConfig(dims=[2, 4]), density=dens, created_at="T")
    with pytest.raises(ConfigError):
        write_report(rep, tmp_path)


def test_profile_csv_path_layout(tmp_path):
    assert (
        profile_csv_path(tmp_path, 8, 0.5).relative_to(tmp_path).as_posix()
        == "density/profile-d8-p0.5.csv"
    )

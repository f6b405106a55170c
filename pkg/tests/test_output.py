import io
import json
from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

from dualmode_pcw import BandStructure, GapInfo, MapSummary, Parity, Provenance
from dualmode_pcw._output import (
    budget_table,
    dump_json,
    output_name,
    plot_bands,
    plot_sweep,
    summary_dict,
    write_bands,
    write_sweep,
)


def test_output_name() -> None:
    assert output_name("maps", "dual", 930.0) == "maps_dual_930.000.csv"
    assert output_name("maps", "dual", 929.12345, "cutline") == "maps_dual_929.123_cutline.csv"
    assert output_name("wg-bands", "dual", 240.0 / 0.26, "ng-peak", ".json") == "wg-bands_dual_923.077_ng-peak.json"


def test_dump_json_is_strict_and_sorted() -> None:
    stream = io.StringIO()
    dump_json({"b": float("inf"), "a": float("nan")}, stream)
    text = stream.getvalue()
    assert text == '{\n  "a": null,\n  "b": "inf"\n}\n'
    assert json.loads(text) == {"a": None, "b": "inf"}


def _bands() -> BandStructure:
    kgrid = np.array([0.0, 0.25, 0.5])
    omega = np.array([[0.0, 0.25, 0.26], [0.3, 0.31, 0.32]])
    return BandStructure(
        kgrid=kgrid,
        kpoints=np.column_stack([kgrid, np.zeros(3)]),
        omega=omega,
        parity=(Parity.EVEN, Parity.ODD),
        ng=np.array([[np.inf, 10.0, 12.0], [25.0, 25.0, 25.0]]),
        provenance=Provenance("0" * 16, 1.5, 240.0),
        localized=np.array([[False, True, True], [False, False, True]]),
    )


def test_write_bands(tmp_path: Path) -> None:
    path = write_bands(tmp_path / "bands.csv", _bands())
    lines = path.read_text().splitlines()
    assert lines[0] == "k_x [2pi/a],band,omega [a/lambda],wavelength [nm],parity,n_g [1],guided"
    assert len(lines) == 7
    assert lines[1] == "0.0,0,0.0,inf,Even,inf,False"
    assert lines[3].split(",") == ["0.25", "0", "0.25", "960.0", "Even", "10.0", "True"]
    assert lines[6].endswith("Odd,25.0,True")


def _rows() -> List[MapSummary]:
    return [
        MapSummary(920.0 + i, 20.0 + i, 10.0, 0.97, {0.85: 0.5, 0.95: 0.1 * i}, 0.05 * i, 0.6) for i in range(3)
    ]


def test_write_sweep(tmp_path: Path) -> None:
    lines = write_sweep(tmp_path / "sweep.csv", _rows()).read_text().splitlines()
    assert lines[0].split(",") == [
        "wavelength [nm]",
        "n_g1 [1]",
        "n_g2 [1]",
        "beta1_max [1]",
        "fraction_beta1>=0.85 [1]",
        "fraction_beta1>=0.95 [1]",
        "working_fraction [1]",
    ]
    assert lines[2] == "921.0,21.0,10.0,0.97,0.5,0.1,0.05"


def test_summary_dict() -> None:
    summary = summary_dict(_rows()[1])
    assert summary["fractions"] == {"0.85": 0.5, "0.95": 0.1}
    assert "monte_carlo" not in summary


def test_budget_table() -> None:
    report = {
        "inputs": {"t_1in": 4e-6, "beta1": 0.98},
        "eta": 6.349206349e-6,
        "eta_db": None,
        "yield": {"length_um": 12.5},
    }
    assert budget_table(report).splitlines() == [
        "input.t_1in      4e-06",
        "input.beta1      0.98",
        "eta              6.34921e-06",
        "eta_db           -",
        "yield.length_um  12.5",
    ]


@pytest.mark.parametrize("gap", [None, GapInfo(0.2, 0.35)])
def test_band_figure_is_reproducible(tmp_path: Path, gap: Optional[GapInfo]) -> None:
    first = plot_bands(tmp_path / "a.svg", _bands(), gap).read_bytes()
    second = plot_bands(tmp_path / "b.svg", _bands(), gap).read_bytes()
    assert first == second
    assert first.startswith(b"<?xml")


def test_sweep_figure_is_reproducible(tmp_path: Path) -> None:
    first = plot_sweep(tmp_path / "a.svg", _rows()).read_bytes()
    second = plot_sweep(tmp_path / "b.svg", _rows()).read_bytes()
    assert first == second

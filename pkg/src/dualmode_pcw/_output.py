"""Result files: CSV tables with unit headers, sorted-key JSON and SVG figures"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from ._bands import BandStructure, GapInfo
from ._emitter import CutlineProfile, EmitterMaps, MapSummary, MonteCarloFractions
from ._util import jsonable

LOGGER = logging.getLogger(__name__)

#: fixed salt and no timestamp keep SVG output byte-identical across runs
SVG_STYLE = {"svg.hashsalt": "dualmode-pcw", "svg.fonttype": "none"}


def output_name(command: str, section: str, wavelength_nm: float, kind: str = "", suffix: str = ".csv") -> str:
    """:return: ``<command>_<section>_<wavelength_nm>[_<kind>]<suffix>``"""
    extra = f"_{kind}" if kind else ""
    return f"{command}_{section}_{wavelength_nm:.3f}{extra}{suffix}"


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a table, floats in their shortest round-tripping form."""
    with path.open("w", newline="", encoding="utf-8") as file_handler:
        writer = csv.writer(file_handler, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    LOGGER.info("wrote %s", path)
    return path


def dump_json(data: Any, stream: TextIO) -> None:
    json.dump(jsonable(data), stream, sort_keys=True, indent=2, allow_nan=False)
    stream.write("\n")


def write_json(path: Path, data: Any) -> Path:
    with path.open("w", encoding="utf-8") as file_handler:
        dump_json(data, file_handler)
    LOGGER.info("wrote %s", path)
    return path


def write_bands(path: Path, bands: BandStructure) -> Path:
    """One row per (k, band) of a waveguide scan."""
    a = bands.provenance.a
    guided = bands.localized
    rows = []
    for index, k in enumerate(bands.kgrid):
        for band in range(bands.nbands):
            omega = float(bands.omega[band, index])
            rows.append(
                [
                    float(k),
                    band,
                    omega,
                    a / omega if omega > 0 else math.inf,
                    bands.parity[band].value,
                    float(bands.ng[band, index]),
                    bool(guided[band, index]) if guided is not None else False,
                ]
            )
    header = ["k_x [2pi/a]", "band", "omega [a/lambda]", "wavelength [nm]", "parity", "n_g [1]", "guided"]
    return write_csv(path, header, rows)


def write_bulk_bands(path: Path, bands: BandStructure) -> Path:
    """One row per (path point, band) of a bulk scan."""
    a = bands.provenance.a
    rows = []
    for index, (distance, (kx, ky)) in enumerate(zip(bands.kgrid, bands.kpoints)):
        for band in range(bands.nbands):
            omega = float(bands.omega[band, index])
            rows.append([float(distance), float(kx), float(ky), band, omega, a / omega if omega > 0 else math.inf])
    header = ["k_path [2pi/a]", "k_x [2pi/a]", "k_y [2pi/a]", "band", "omega [a/lambda]", "wavelength [nm]"]
    return write_csv(path, header, rows)


def write_maps(path: Path, maps: EmitterMaps) -> Path:
    """All maps of one wavelength, one row per sample."""
    columns = [maps.x, maps.y, maps.f1, maps.f2, maps.beta1, maps.beta2, maps.epsilon]
    flat = [c.ravel() for c in columns]
    mask = maps.mask.ravel()
    rows = ([*(float(c[i]) for c in flat), bool(mask[i])] for i in range(mask.size))
    header = ["x [nm]", "y [nm]", "F1 [1]", "F2 [1]", "beta1 [1]", "beta2 [1]", "epsilon [1]", "effective_area"]
    return write_csv(path, header, rows)


def write_cutline(path: Path, profile: CutlineProfile) -> Path:
    rows = zip(profile.y, profile.beta1, profile.beta2, profile.epsilon)
    return write_csv(path, ["dy [nm]", "beta1 [1]", "beta2 [1]", "epsilon [1]"], rows)


def summary_dict(summary: MapSummary, monte_carlo: Optional[MonteCarloFractions] = None) -> Dict[str, Any]:
    """:return: the summary document of one wavelength"""
    result: Dict[str, Any] = {
        "wavelength_nm": summary.wavelength_nm,
        "ng1": summary.ng1,
        "ng2": summary.ng2,
        "beta1_max": summary.beta1_max,
        "fractions": {f"{t:.2f}": v for t, v in summary.fractions.items()},
        "working_fraction": summary.working_fraction,
        "mask_fraction": summary.mask_fraction,
    }
    if monte_carlo is not None:
        result["monte_carlo"] = {
            "samples": monte_carlo.samples,
            "accepted": monte_carlo.accepted,
            "fractions": {f"{t:.2f}": v for t, v in monte_carlo.fractions.items()},
            "working_fraction": monte_carlo.working_fraction,
        }
    return result


def write_sweep(path: Path, rows: Sequence[MapSummary]) -> Path:
    thresholds = sorted(rows[0].fractions) if rows else []
    header = ["wavelength [nm]", "n_g1 [1]", "n_g2 [1]", "beta1_max [1]"]
    header += [f"fraction_beta1>={t:.2f} [1]" for t in thresholds] + ["working_fraction [1]"]
    table = (
        [r.wavelength_nm, r.ng1, r.ng2, r.beta1_max, *(r.fractions[t] for t in thresholds), r.working_fraction]
        for r in rows
    )
    return write_csv(path, header, table)


def budget_table(report: Dict[str, Any]) -> str:
    """:return: the scalar entries of a budget report as aligned ``name  value`` lines"""
    flat: Dict[str, Any] = {f"input.{k}": v for k, v in report["inputs"].items()}
    flat.update((k, v) for k, v in report.items() if k not in ("inputs", "yield"))
    flat.update((f"yield.{k}", v) for k, v in report.get("yield", {}).items())
    width = max(len(k) for k in flat)
    lines = [f"{k:<{width}}  {_number(v)}" for k, v in flat.items()]
    return "\n".join(lines) + "\n"


def _number(value: Any) -> str:
    if value is None:
        return "-"
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def _save(figure: Figure, path: Path) -> Path:
    with matplotlib.rc_context(SVG_STYLE):
        figure.savefig(path, format="svg", metadata={"Date": None})
    LOGGER.info("wrote %s", path)
    return path


def plot_bands(path: Path, bands: BandStructure, gap: Optional[GapInfo] = None) -> Path:
    """Band diagram with guided samples highlighted and the gap shaded."""
    figure = Figure(figsize=(5, 4))
    axes = figure.add_subplot()
    if gap is not None:
        axes.axhspan(gap.omega_lo, gap.omega_hi, color="0.9")
    for band in range(bands.nbands):
        axes.plot(bands.kgrid, bands.omega[band], color="0.6", linewidth=0.8)
        if bands.localized is not None and bands.localized[band].any():
            guided = np.where(bands.localized[band], bands.omega[band], np.nan)
            axes.plot(bands.kgrid, guided, linewidth=1.6, label=f"{band} {bands.parity[band].value}")
    axes.set_xlabel("k [2π/a]")
    axes.set_ylabel("ω [a/λ]")
    if gap is not None:
        margin = gap.omega_hi - gap.omega_lo
        axes.set_ylim(gap.omega_lo - margin, gap.omega_hi + margin)
    if axes.get_legend_handles_labels()[0]:
        axes.legend(fontsize="small")
    return _save(figure, path)


def plot_maps(path: Path, maps: EmitterMaps) -> Path:
    """Heat maps of the β-factors and the impurity."""
    figure = Figure(figsize=(9, 4))
    panels: List[Any] = [("β1", maps.beta1), ("β2", maps.beta2), ("log10 ε", np.log10(maps.epsilon))]
    for index, (title, values) in enumerate(panels, start=1):
        axes = figure.add_subplot(1, 3, index)
        image = axes.pcolormesh(maps.x, maps.y, np.where(np.isfinite(values), values, np.nan), cmap="viridis")
        axes.contour(maps.x, maps.y, maps.mask.astype(float), levels=[0.5], colors="white", linewidths=0.8)
        axes.set_title(title)
        axes.set_aspect("equal")
        axes.set_xlabel("x [nm]")
        figure.colorbar(image, ax=axes, shrink=0.8)
    figure.axes[0].set_ylabel("y [nm]")
    return _save(figure, path)


def plot_sweep(path: Path, rows: Sequence[MapSummary]) -> Path:
    """Area fractions against wavelength."""
    figure = Figure(figsize=(5, 4))
    axes = figure.add_subplot()
    wavelengths = [r.wavelength_nm for r in rows]
    for threshold in sorted(rows[0].fractions):
        axes.plot(wavelengths, [r.fractions[threshold] for r in rows], label=f"β1 ≥ {threshold:.2f}")
    axes.plot(wavelengths, [r.working_fraction for r in rows], linestyle="--", label="working area")
    axes.set_xlabel("λ [nm]")
    axes.set_ylabel("area fraction")
    axes.legend(fontsize="small")
    return _save(figure, path)


__all__ = [
    "output_name",
    "write_csv",
    "dump_json",
    "write_json",
    "write_bands",
    "write_bulk_bands",
    "write_maps",
    "write_cutline",
    "summary_dict",
    "budget_table",
    "write_sweep",
    "plot_bands",
    "plot_maps",
    "plot_sweep",
]

import json
from pathlib import Path
from typing import Any, Callable, Dict

import pytest

from dualmode_pcw import (
    LatticeSpec,
    SupercellGeometry,
    build_bulk_cell,
    build_waveguide_cell,
    dual_mode_params,
    w1_params,
)

N_GAAS = 3.475


@pytest.fixture(scope="session")
def lattice() -> LatticeSpec:
    return LatticeSpec(a=240.0, r0=64.0, eps_bg=N_GAAS**2)


@pytest.fixture(scope="session")
def bulk_cell(lattice: LatticeSpec) -> SupercellGeometry:
    return build_bulk_cell(lattice)


@pytest.fixture(scope="session")
def w1_cell(lattice: LatticeSpec) -> SupercellGeometry:
    return build_waveguide_cell(lattice, w1_params(lattice, rows_per_side=5))


@pytest.fixture(scope="session")
def dual_cell(lattice: LatticeSpec) -> SupercellGeometry:
    return build_waveguide_cell(lattice, dual_mode_params(lattice, rows_per_side=5))


@pytest.fixture(scope="session")
def homogeneous_cell(lattice: LatticeSpec) -> SupercellGeometry:
    a = lattice.a
    return SupercellGeometry(((a, 0.0), (0.0, a)), (), lattice, symmetry_axis=True, channel_half_width=a / 4)


@pytest.fixture()
def small_config() -> Dict[str, Any]:
    """A reduced device that solves in a fraction of a second."""
    return {
        "device": {"rows_per_side": 5},
        "solver": {
            "cutoff": 1.5,
            "bulk_cutoff": 3.0,
            "nbands": 6,
            "k_points": 9,
            "bulk_k_points": 10,
            "grid_spacing_nm": 30.0,
            "scan_grid_spacing_nm": 40.0,
        },
    }


@pytest.fixture()
def write_config(tmp_path: Path) -> Callable[..., Path]:
    def _f(data: Dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return _f

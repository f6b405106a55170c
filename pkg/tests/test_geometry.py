import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dualmode_pcw import (
    Hole,
    InvalidParameter,
    LatticeSpec,
    OverlappingHoles,
    SlabSpec,
    SupercellGeometry,
    TESolver,
    WaveguideParams,
    build_basis,
    build_bulk_cell,
    build_waveguide_cell,
    dual_mode_params,
    membrane_lattice,
    mode_filter_params,
    permittivity_at,
    slab_mode_height,
    slab_te_effective_index,
    w1_params,
)
from dualmode_pcw._geometry import (
    check_holes,
    epsilon_coefficients,
    epsilon_fourier,
    geometry_hash,
    row_positions,
)


def test_slab_effective_index_lies_between_cladding_and_core() -> None:
    n_eff = slab_te_effective_index(SlabSpec(3.475, 1.0, 175.0, 930.0))
    assert 1.0 < n_eff < 3.475


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=60.0, max_value=400.0))
def test_slab_effective_index_grows_with_thickness(thickness: float) -> None:
    thin = slab_te_effective_index(SlabSpec(3.475, 1.0, thickness, 930.0))
    thick = slab_te_effective_index(SlabSpec(3.475, 1.0, thickness * 1.2, 930.0))
    assert thick > thin


def test_slab_mode_height_matches_quadrature() -> None:
    spec = SlabSpec(3.475, 1.0, 175.0, 930.0)
    n_eff = slab_te_effective_index(spec)
    k0 = 2 * math.pi / spec.wavelength
    kappa = k0 * math.sqrt(spec.n_core**2 - n_eff**2)
    gamma = k0 * math.sqrt(n_eff**2 - spec.n_clad**2)
    half = spec.thickness / 2

    def profile(z: float) -> float:
        if abs(z) <= half:
            return math.cos(kappa * z) ** 2
        return math.cos(kappa * half) ** 2 * math.exp(-2 * gamma * (abs(z) - half))

    inside, _ = quad(profile, -half, half)
    outside, _ = quad(profile, half, math.inf)
    assert slab_mode_height(spec, n_eff) == pytest.approx(inside + 2 * outside, rel=1e-8)
    assert slab_mode_height(spec) == pytest.approx(slab_mode_height(spec, n_eff))


@pytest.mark.parametrize(
    "spec",
    [
        SlabSpec(1.0, 1.0, 175.0, 930.0),
        SlabSpec(3.475, 1.0, 0.0, 930.0),
        SlabSpec(3.475, 1.0, 175.0, -1.0),
    ],
)
def test_slab_rejects_invalid(spec: SlabSpec) -> None:
    with pytest.raises(InvalidParameter):
        slab_te_effective_index(spec)


def test_membrane_lattice_uses_the_effective_index() -> None:
    lattice, slab = membrane_lattice(240.0, 64.0, 3.475, 175.0, 930.0)
    assert lattice.eps_bg == pytest.approx(slab_te_effective_index(slab) ** 2)
    assert lattice.eps_hole == 1.0
    assert lattice.w0 == pytest.approx(240.0 * math.sqrt(3) / 2)


@pytest.mark.parametrize(
    "lattice",
    [
        LatticeSpec(0.0, 64.0, 12.0),
        LatticeSpec(240.0, 120.0, 12.0),
        LatticeSpec(240.0, 64.0, 1.0),
    ],
)
def test_lattice_rejects_invalid(lattice: LatticeSpec) -> None:
    with pytest.raises(InvalidParameter):
        build_bulk_cell(lattice)


def test_bulk_cell(bulk_cell: SupercellGeometry, lattice: LatticeSpec) -> None:
    assert bulk_cell.holes == (Hole(0.0, 0.0, lattice.r0),)
    assert not bulk_cell.is_rectangular
    assert bulk_cell.area == pytest.approx(lattice.a * lattice.w0)
    assert bulk_cell.fill_fraction == pytest.approx(math.pi * 64.0**2 / (240.0**2 * math.sqrt(3) / 2))


def test_w1_cell(w1_cell: SupercellGeometry, lattice: LatticeSpec) -> None:
    assert w1_cell.is_rectangular
    assert w1_cell.channel_half_width == pytest.approx(lattice.w0)
    assert len(w1_cell.holes) == 11
    ys = sorted(h.y for h in w1_cell.holes if h.y > 0)
    assert np.allclose(np.diff(ys), lattice.w0)
    (_, _), (_, height) = w1_cell.cell_vectors
    assert height == pytest.approx(2 * ys[-1])


@pytest.mark.parametrize("rows_per_side", [5, 6, 7])
def test_registry_alternates_across_the_cell_boundary(lattice: LatticeSpec, rows_per_side: int) -> None:
    geom = build_waveguide_cell(lattice, w1_params(lattice, rows_per_side))
    (_, _), (_, height) = geom.cell_vectors
    assert round(height / lattice.w0) % 2 == 0
    for image in (-1, 0, 1):
        for hole in geom.holes:
            y = hole.y + image * height
            row = round(y / lattice.w0)
            assert y == pytest.approx(row * lattice.w0)
            assert hole.x == pytest.approx(lattice.a / 2 if row % 2 else 0.0)


def test_dual_mode_rows(lattice: LatticeSpec) -> None:
    params = dual_mode_params(lattice)
    assert params == WaveguideParams(1.07, lattice.w0 - 60.0, lattice.w0 - 40.0, False, 7)
    rows = row_positions(lattice, params)
    assert len(rows) == 7
    assert rows[0] == pytest.approx(1.07 * lattice.w0)
    assert rows[1] - rows[0] == pytest.approx(lattice.w0 - 60.0)
    assert rows[2] - rows[1] == pytest.approx(lattice.w0 - 40.0)
    assert rows[3] - rows[2] == pytest.approx(lattice.w0)


def test_rows_alternate_registry(dual_cell: SupercellGeometry, lattice: LatticeSpec) -> None:
    by_row = sorted({(round(h.y, 6), h.x) for h in dual_cell.holes if h.y > 0})
    assert [x for _, x in by_row] == [lattice.a / 2, 0.0, lattice.a / 2, 0.0, lattice.a / 2, 0.0]


def test_mode_filter_has_an_axial_row(lattice: LatticeSpec) -> None:
    params = mode_filter_params(lattice)
    assert params.center_row
    assert params.w1_factor == 1.38
    geom = build_waveguide_cell(lattice, params)
    assert Hole(lattice.a / 2, 0.0, lattice.r0) in geom.holes
    assert len(geom.holes) == 16


def test_w1_params(lattice: LatticeSpec) -> None:
    assert w1_params(lattice) == WaveguideParams(1.0, lattice.w0, lattice.w0, False, 7)


def test_overlapping_rows_are_rejected() -> None:
    lattice = LatticeSpec(240.0, 100.0, 12.0)
    with pytest.raises(OverlappingHoles):
        build_waveguide_cell(lattice, WaveguideParams(1.0, 101.0, 101.0))


@pytest.mark.parametrize(
    "params",
    [
        WaveguideParams(0.9, 200.0, 200.0),
        WaveguideParams(1.0, 50.0, 200.0),
        WaveguideParams(1.0, 200.0, 200.0, rows_per_side=3),
    ],
)
def test_waveguide_rejects_invalid(lattice: LatticeSpec, params: WaveguideParams) -> None:
    with pytest.raises(InvalidParameter):
        build_waveguide_cell(lattice, params)


def test_broken_mirror_symmetry_is_rejected(lattice: LatticeSpec) -> None:
    geom = SupercellGeometry(((240.0, 0.0), (0.0, 1000.0)), (Hole(0.0, 300.0, 64.0),), lattice, symmetry_axis=True)
    with pytest.raises(InvalidParameter, match="mirror"):
        check_holes(geom)


def test_permittivity_at(w1_cell: SupercellGeometry, lattice: LatticeSpec) -> None:
    hole = w1_cell.holes[0]
    x = np.array([hole.x, hole.x + lattice.a, hole.x + hole.r + 1.0, 0.0])
    y = np.array([hole.y, hole.y, hole.y, 0.0])
    assert permittivity_at(w1_cell, x, y).tolist() == [1.0, 1.0, lattice.eps_bg, lattice.eps_bg]


def test_epsilon_mean_is_the_area_average(dual_cell: SupercellGeometry, lattice: LatticeSpec) -> None:
    mean = epsilon_coefficients(dual_cell, np.zeros((1, 2)))[0]
    fill = dual_cell.fill_fraction
    assert mean.real == pytest.approx(lattice.eps_bg * (1 - fill) + lattice.eps_hole * fill)
    assert mean.imag == pytest.approx(0.0)


def test_epsilon_coefficients_mirror_symmetric(dual_cell: SupercellGeometry) -> None:
    rng = np.random.default_rng(1)
    g = rng.normal(scale=0.05, size=(50, 2))
    mirrored = g * np.array([1.0, -1.0])
    assert np.allclose(epsilon_coefficients(dual_cell, g), epsilon_coefficients(dual_cell, mirrored), atol=1e-14)


def test_geometry_hash(w1_cell: SupercellGeometry, dual_cell: SupercellGeometry) -> None:
    assert geometry_hash(w1_cell) == geometry_hash(w1_cell._replace())
    assert geometry_hash(w1_cell) != geometry_hash(dual_cell)
    assert len(geometry_hash(w1_cell)) == 16


def test_epsilon_fourier_is_the_solver_matrix(w1_cell: SupercellGeometry) -> None:
    basis = build_basis(w1_cell, 1.5)
    matrix = epsilon_fourier(w1_cell, basis.gvecs * (2 * math.pi / basis.a))
    assert np.allclose(matrix, matrix.conj().T)
    assert np.allclose(np.linalg.inv(matrix), TESolver(w1_cell, basis).inverse_epsilon)


def test_epsilon_fourier_examples(bulk_cell: SupercellGeometry, homogeneous_cell: SupercellGeometry) -> None:
    rng = np.random.default_rng(5)
    g = rng.normal(scale=0.05, size=(6, 2))
    assert np.allclose(epsilon_fourier(bulk_cell, g).imag, 0.0)
    empty = epsilon_fourier(homogeneous_cell, np.vstack([np.zeros(2), g]))
    assert empty[0, 0] == homogeneous_cell.lattice.eps_bg
    assert np.allclose(empty[1:, 0], 0.0)

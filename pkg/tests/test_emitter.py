import math
from typing import List, Tuple

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest_mock import MockerFixture

from dualmode_pcw import (
    BandStructure,
    EmitterMaps,
    EmptyMask,
    GapInfo,
    GuidedCrossing,
    ImpurityParams,
    InvalidParameter,
    NoneFound,
    Parity,
    Provenance,
    SupercellGeometry,
    TESolver,
    ZeroField,
    area_fraction,
    beta_map,
    build_basis,
    compute_emitter_maps,
    cutline_profile,
    effective_area_mask,
    impurity_map,
    monte_carlo_fractions,
    normalize_mode,
    purcell_factor,
    purcell_map,
    reconstruct_field,
    summarize_maps,
    working_area,
)
from dualmode_pcw._emitter import emitter_sites, hole_clearance
from dualmode_pcw._pwe import make_grid

PARAMS = ImpurityParams(eta=1e-5)
K = 0.35
MODE_HEIGHT = 300.0
N_SLAB = 3.475


def test_purcell_factor_of_unit_inputs() -> None:
    assert purcell_factor(1.0, 1.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(3 / (4 * math.pi))
    assert purcell_factor(2.0, -5.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(4 * 5 * 3 / (4 * math.pi))


def test_purcell_factor_needs_a_finite_group_index() -> None:
    with pytest.raises(InvalidParameter):
        purcell_factor(1.0, math.inf, 1.0, 1.0, 1.0, 1.0)


def test_purcell_map_of_a_plane_wave_in_a_homogeneous_medium(homogeneous_cell: SupercellGeometry) -> None:
    basis = build_basis(homogeneous_cell, 2.0)
    solver = TESolver(homogeneous_cell, basis)
    k = (0.3, 0.0)
    pair = solver.solve(k, 1)[0]
    ng = 1.0 / solver.group_velocity(k, pair)
    field = normalize_mode(reconstruct_field(homogeneous_cell, basis, k, pair.vector, 20.0, 0, pair.omega))
    rates = purcell_map(field, ng, N_SLAB, MODE_HEIGHT)
    a = homogeneous_cell.lattice.a
    wavelength = a / pair.omega
    # a uniform Ey with ∫ε|E|² dA = 1 has |Ey|² = 1/(n² A)
    expected = 3 * a * wavelength**2 * N_SLAB / (4 * math.pi * N_SLAB * MODE_HEIGHT * N_SLAB**2 * homogeneous_cell.area)
    assert ng == pytest.approx(N_SLAB, rel=1e-6)
    assert np.allclose(rates, expected, rtol=1e-6)


rates = st.lists(st.floats(min_value=0.0, max_value=1e3), min_size=1, max_size=20)


@given(rates, rates, st.floats(min_value=0.0, max_value=10.0))
def test_beta_map_is_a_share(f1: List[float], f2: List[float], f_ng: float) -> None:
    size = min(len(f1), len(f2))
    beta1, beta2 = beta_map(np.array(f1[:size]), np.array(f2[:size]), f_ng)
    assert np.all(beta1 >= 0) and np.all(beta2 >= 0)
    assert np.all(beta1 + beta2 <= 1 + 1e-12)


def test_beta_map_without_losses() -> None:
    beta1, beta2 = beta_map(np.array([3.0, 0.0]), np.array([1.0, 0.0]), 0.0)
    assert beta1.tolist() == [0.75, 0.0]
    assert beta2.tolist() == [0.25, 0.0]
    with pytest.raises(InvalidParameter):
        beta_map(beta1, beta2, -0.1)


def test_impurity_map() -> None:
    epsilon = impurity_map(np.array([0.5, 0.9]), np.array([0.5, 0.0]), PARAMS)
    assert epsilon[0] == pytest.approx(4e-5)
    assert epsilon[1] == math.inf


@pytest.mark.parametrize(
    "params",
    [ImpurityParams(eta=0.0), ImpurityParams(eta=1e-5, epsilon_threshold=1.5), ImpurityParams(1e-5, 5e-3, (0.9, 1.0))],
)
def test_impurity_map_rejects_params(params: ImpurityParams) -> None:
    with pytest.raises(InvalidParameter):
        impurity_map(np.ones(2), np.ones(2), params)


def test_area_fractions() -> None:
    values = np.array([0.1, 0.5, 0.9, 0.95, 0.99])
    mask = np.array([True, True, True, True, False])
    assert area_fraction(values, mask, 0.9) == 0.5
    assert area_fraction(values, mask, 0.96) == 0.0
    epsilon = np.array([1e-4, 1e-4, 1e-2, 1e-4, 1e-4])
    assert working_area(values, epsilon, 0.9, 5e-3, mask) == 0.25
    with pytest.raises(EmptyMask):
        area_fraction(values, np.zeros(5, dtype=bool), 0.5)


def test_hole_clearance(w1_cell: SupercellGeometry) -> None:
    hole = w1_cell.holes[0]
    a = w1_cell.lattice.a
    x = np.array([hole.x, hole.x + a, hole.x + hole.r + 10.0])
    y = np.full(3, hole.y)
    assert np.allclose(hole_clearance(w1_cell, x, y), [-hole.r, -hole.r, 10.0])


def test_emitter_sites(w1_cell: SupercellGeometry) -> None:
    nearest = min((h for h in w1_cell.holes if h.y > 0), key=lambda h: h.y)
    x = np.array([nearest.x, nearest.x, 0.0])
    y = np.array([0.0, nearest.y - nearest.r - 20.0, w1_cell.lattice.w0 + 10.0])
    assert emitter_sites(w1_cell, x, y).tolist() == [True, False, False]
    with pytest.raises(InvalidParameter):
        emitter_sites(w1_cell, x, y, clearance=-1.0)


def test_effective_area_mask(w1_cell: SupercellGeometry, bulk_cell: SupercellGeometry) -> None:
    grid = make_grid(w1_cell, 20.0)
    mask = effective_area_mask(w1_cell, grid)
    assert mask.any()
    assert np.all(np.abs(grid.y[mask]) <= w1_cell.lattice.w0)
    with pytest.raises(EmptyMask):
        effective_area_mask(w1_cell, grid, clearance=1e4)
    with pytest.raises(InvalidParameter):
        effective_area_mask(bulk_cell, make_grid(bulk_cell, 20.0))


def test_normalize_mode(w1_cell: SupercellGeometry) -> None:
    basis = build_basis(w1_cell, 1.5)
    pair = TESolver(w1_cell, basis).solve((K, 0.0), 1)[0]
    field = normalize_mode(reconstruct_field(w1_cell, basis, (K, 0.0), pair.vector, 20.0, 0, pair.omega))
    energy = np.sum(field.eps * (np.abs(field.ex) ** 2 + np.abs(field.ey) ** 2)) * field.grid.weight
    assert energy == pytest.approx(1.0)
    zero = reconstruct_field(w1_cell, basis, (K, 0.0), np.zeros(basis.size, complex), 20.0)
    with pytest.raises(ZeroField):
        normalize_mode(zero)


@pytest.fixture(scope="module")
def w1_solver(w1_cell: SupercellGeometry) -> TESolver:
    return TESolver(w1_cell, build_basis(w1_cell, 1.5))


def _bands(solver: TESolver) -> Tuple[BandStructure, List[float]]:
    omega = [p.omega for p in solver.solve((K, 0.0), 3)]
    kgrid = np.array([K - 0.05, K, K + 0.05])
    bands = BandStructure(
        kgrid=kgrid,
        kpoints=np.column_stack([kgrid, np.zeros(3)]),
        omega=np.tile(np.array(omega)[:, None], (1, 3)),
        parity=(Parity.EVEN, Parity.ODD, Parity.MIXED),
        ng=np.ones((3, 3)),
        provenance=Provenance("0" * 16, 1.5, solver.geometry.lattice.a),
        localized=np.ones((3, 3), dtype=bool),
    )
    return bands, omega


def _maps(mocker: MockerFixture, solver: TESolver, with_odd: bool = True) -> EmitterMaps:
    bands, omega = _bands(solver)
    crossings = [GuidedCrossing(0, K, Parity.EVEN, 20.0, omega[0])]
    if with_odd:
        crossings.append(GuidedCrossing(1, K, Parity.ODD, -10.0, omega[1]))
    mocker.patch("dualmode_pcw._emitter.guided_mode_at_wavelength", return_value=crossings)
    return compute_emitter_maps(
        solver,
        bands,
        GapInfo(0.1, 0.5),
        930.0,
        PARAMS,
        n_material=N_SLAB,
        mode_height=MODE_HEIGHT,
        grid_spacing=20.0,
    )


def test_compute_emitter_maps(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver)
    geom = w1_solver.geometry
    shape = maps.x.shape
    for values in (maps.y, maps.f1, maps.f2, maps.beta1, maps.beta2, maps.epsilon, maps.mask):
        assert values.shape == shape
    assert geom.channel_half_width is not None
    assert np.all(np.abs(maps.y) <= geom.channel_half_width + geom.lattice.w0)
    assert maps.ng1 == 20.0 and maps.ng2 == 10.0
    assert np.all(maps.f1 >= 0) and np.all(maps.f2 >= 0)
    assert np.all(maps.beta1 + maps.beta2 < 1)
    assert np.all(maps.epsilon >= PARAMS.eta)
    assert maps.mask.any()
    even, odd = maps.modes
    assert even is not None and odd is not None
    assert even.band_index == 0 and odd.band_index == 1


def test_missing_parity_gives_a_zero_map(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver, with_odd=False)
    assert maps.modes[1] is None
    assert maps.ng2 == 0.0
    assert not maps.f2.any() and not maps.beta2.any()
    assert np.all(np.isinf(maps.epsilon))
    summary = summarize_maps(maps, PARAMS)
    assert summary.working_fraction == 0.0


def test_maps_without_even_or_odd_crossing_raise(mocker: MockerFixture, w1_solver: TESolver) -> None:
    bands, omega = _bands(w1_solver)
    mixed = [GuidedCrossing(2, K, Parity.MIXED, 5.0, omega[2])]
    mocker.patch("dualmode_pcw._emitter.guided_mode_at_wavelength", return_value=mixed)
    with pytest.raises(NoneFound, match="no even or odd guided crossing") as exc_info:
        compute_emitter_maps(
            w1_solver,
            bands,
            GapInfo(0.1, 0.5),
            930.0,
            PARAMS,
            n_material=N_SLAB,
            mode_height=MODE_HEIGHT,
            grid_spacing=20.0,
        )
    assert exc_info.value.details["parities"] == ["Mixed"]


def test_summarize_maps(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver)
    summary = summarize_maps(maps, PARAMS)
    assert summary.wavelength_nm == 930.0
    values = [summary.fractions[t] for t in sorted(summary.fractions)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert values == sorted(values, reverse=True)
    assert summary.working_fraction <= values[-1]
    assert 0.0 < summary.mask_fraction <= 1.0
    assert summary.beta1_max == pytest.approx(float(maps.beta1[maps.mask].max()))


def test_cutline_profile(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver)
    profile = cutline_profile(maps, 0.0)
    assert profile.x == 0.0
    assert np.array_equal(profile.y, maps.y[0])
    assert np.array_equal(profile.beta1, maps.beta1[0])
    shifted = cutline_profile(maps, w1_solver.geometry.lattice.a)
    assert shifted.x == 0.0


def test_monte_carlo_fractions(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver)
    first, second = (
        monte_carlo_fractions(maps, PARAMS, samples=2000, seed=7, n_material=N_SLAB, mode_height=MODE_HEIGHT, chunk=512)
        for _ in range(2)
    )
    assert first == second
    assert first.samples == 2000
    assert 0 < first.accepted <= 2000
    values = [first.fractions[t] for t in sorted(first.fractions)]
    assert values == sorted(values, reverse=True)
    assert first.working_fraction <= values[-1]


def test_monte_carlo_fractions_rejects_samples(mocker: MockerFixture, w1_solver: TESolver) -> None:
    maps = _maps(mocker, w1_solver)
    with pytest.raises(InvalidParameter):
        monte_carlo_fractions(maps, PARAMS, samples=0, seed=1, n_material=N_SLAB, mode_height=MODE_HEIGHT)
    with pytest.raises(EmptyMask):
        monte_carlo_fractions(
            maps, PARAMS, samples=50, seed=1, n_material=N_SLAB, mode_height=MODE_HEIGHT, clearance=1e4
        )

"""Scans and sweeps behind the command line, run on a thread pool with results kept in input order"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ._bands import (
    BandStructure,
    BoolArray,
    GapInfo,
    NgPeak,
    Parity,
    Provenance,
    bulk_k_path,
    coefficient_parity,
    dual_mode_window,
    find_bandgap,
    localization,
    ng_peak_report,
    track_bands,
)
from ._config import AnalysisConfig, BudgetConfig, RunConfig, sweep_wavelengths
from ._emitter import (
    CutlineProfile,
    EmitterMaps,
    ImpurityParams,
    MapSummary,
    MonteCarloFractions,
    compute_emitter_maps,
    cutline_profile,
    monte_carlo_fractions,
    summarize_maps,
)
from ._errors import InvalidParameter, NoGap, NoneFound
from ._geometry import (
    LatticeSpec,
    SlabSpec,
    SupercellGeometry,
    WaveguideParams,
    build_bulk_cell,
    build_waveguide_cell,
    dual_mode_params,
    geometry_hash,
    membrane_lattice,
    mode_filter_params,
    slab_mode_height,
    w1_params,
)
from ._pipeline import (
    BudgetInputs,
    SourceBudget,
    budget_report,
    compute_budget,
    emitter_yield,
    required_beta2,
    single_interface_from_two_port,
)
from ._pwe import Eigenpair, FloatArray, TESolver, build_basis, reconstruct_field

LOGGER = logging.getLogger(__name__)

A = TypeVar("A")
R = TypeVar("R")


class Section(str, Enum):
    """Waveguide sections of the device"""

    W1 = "w1"
    DUAL = "dual"
    FILTER = "filter"


class Device(NamedTuple):
    """The membrane reduced to a 2D crystal"""

    lattice: LatticeSpec
    slab: SlabSpec
    n_eff: float
    #: effective height of the slab mode (nm)
    mode_height: float


class WaveguideScan(NamedTuple):
    bands: BandStructure
    solver: TESolver
    #: ``None`` when the bulk crystal has no gap
    gap: Optional[GapInfo]


class MapResult(NamedTuple):
    maps: EmitterMaps
    summary: MapSummary
    cutline: CutlineProfile
    monte_carlo: Optional[MonteCarloFractions]


def ordered_map(func: Callable[[A], R], items: Iterable[A], threads: int) -> List[R]:
    """
    Apply a function to every item, on a thread pool when ``threads > 1``.

    :return: the results in the order of the items
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def resolve_device(config: RunConfig) -> Device:
    """:return: the 2D crystal with the slab effective index as background"""
    cfg = config.device
    lattice, slab = membrane_lattice(cfg.a_nm, cfg.r0_nm, cfg.n_slab, cfg.t_nm, cfg.wavelength_nm, cfg.n_clad)
    n_eff = math.sqrt(lattice.eps_bg)
    device = Device(lattice, slab, n_eff, slab_mode_height(slab, n_eff))
    LOGGER.info("slab n_eff %.6f, mode height %.2f nm", device.n_eff, device.mode_height)
    return device


def section_params(config: RunConfig, lattice: LatticeSpec, section: Section) -> WaveguideParams:
    """:return: the row positions of a section"""
    cfg = config.device
    if section is Section.W1:
        return w1_params(lattice, cfg.rows_per_side)
    if section is Section.DUAL:
        params = dual_mode_params(lattice, cfg.w1_factor, cfg.d1_nm, cfg.d2_nm, cfg.rows_per_side)
        return params._replace(center_row=cfg.center_row)
    return mode_filter_params(lattice, cfg.filter_w1_factor, cfg.d1_nm, cfg.d2_nm, cfg.rows_per_side)


def _strip(config: RunConfig, geom: SupercellGeometry) -> SupercellGeometry:
    return geom._replace(holes=()) if config.device.homogeneous else geom


def build_section(config: RunConfig, device: Device, section: Section) -> SupercellGeometry:
    """:return: the supercell of a waveguide section"""
    return _strip(config, build_waveguide_cell(device.lattice, section_params(config, device.lattice, section)))


def _solve_all(solver: TESolver, kpoints: FloatArray, nbands: int, threads: int) -> List[List[Eigenpair]]:
    nbands = min(nbands, solver.basis.size)
    return ordered_map(lambda k: solver.solve((float(k[0]), float(k[1])), nbands), list(kpoints), threads)


def scan_bulk(config: RunConfig, device: Device, threads: int = 1, cutoff: Optional[float] = None) -> BandStructure:
    """
    Bands of the bulk crystal along the Γ-M-K-Γ path, in ascending order at every wavevector.

    :param cutoff: plane-wave cutoff, the configured ``bulk_cutoff`` when not given
    :return: the bands, group indices are not defined along the path and hold ``nan``
    """
    geom = _strip(config, build_bulk_cell(device.lattice))
    basis = build_basis(geom, config.solver.bulk_cutoff if cutoff is None else cutoff, config.solver.max_basis)
    solver = TESolver(geom, basis)
    path, length = bulk_k_path(config.solver.bulk_k_points)
    raw = _solve_all(solver, path, config.solver.nbands, threads)
    omega = np.array([[pair.omega for pair in pairs] for pairs in raw]).T
    LOGGER.info("bulk path solved at %d wavevectors with %d plane waves", len(path), basis.size)
    return BandStructure(
        kgrid=length,
        kpoints=path,
        omega=omega,
        parity=tuple(Parity.MIXED for _ in range(omega.shape[0])),
        ng=np.full_like(omega, np.nan),
        provenance=Provenance(geometry_hash(geom), basis.cutoff, geom.lattice.a),
    )


def bulk_gap(config: RunConfig, device: Device, threads: int = 1, cutoff: Optional[float] = None) -> Optional[GapInfo]:
    """:return: the bulk TE gap, ``None`` when there is none"""
    try:
        return find_bandgap(scan_bulk(config, device, threads, cutoff))
    except NoGap as exc:
        LOGGER.warning("%s, no band is guided", exc.msg)
        return None


def reference_gap(config: RunConfig, device: Device, threads: int = 1) -> Optional[GapInfo]:
    """
    The bulk gap guided modes of the waveguide sections are classified against.

    It is solved at the cutoff of the supercells, so the gap edges and the waveguide bands share the truncation error
    of the basis.

    :return: the gap, ``None`` when there is none
    """
    return bulk_gap(config, device, threads, config.solver.cutoff)


def _localized(
    solver: TESolver, bands: BandStructure, gap: Optional[GapInfo], threshold: float, spacing: float, threads: int
) -> BoolArray:
    assert bands.vectors is not None
    vectors = bands.vectors

    def flags(index: int) -> List[bool]:
        k = (float(bands.kpoints[index, 0]), float(bands.kpoints[index, 1]))
        row = []
        for band in range(bands.nbands):
            omega = float(bands.omega[band, index])
            if gap is None or not gap.contains(omega):
                row.append(False)
                continue
            field = reconstruct_field(solver.geometry, solver.basis, k, vectors[index, :, band], spacing, band, omega)
            row.append(localization(field) >= threshold)
        return row

    return np.array(ordered_map(flags, range(bands.kgrid.size), threads), dtype=bool).T


def scan_waveguide(
    config: RunConfig, device: Device, section: Section, gap: Optional[GapInfo], threads: int = 1
) -> WaveguideScan:
    """
    Tracked bands of a waveguide section for ``k_x`` in ``[0, 0.5]``, with parity and localisation.

    :param config: the run configuration
    :param device: the reduced membrane
    :param section: the waveguide section
    :param gap: the bulk gap, no band is guided without one
    :param threads: worker threads
    :return: the bands and the solver they came from
    """
    geom = build_section(config, device, section)
    basis = build_basis(geom, config.solver.cutoff, config.solver.max_basis)
    solver = TESolver(geom, basis)
    kx = np.linspace(0.0, 0.5, config.solver.k_points)
    kpoints = np.column_stack([kx, np.zeros_like(kx)])
    raw = _solve_all(solver, kpoints, config.solver.nbands, threads)
    provenance = Provenance(geometry_hash(geom), basis.cutoff, geom.lattice.a)
    bands = track_bands(kpoints, raw, provenance, parity_of=partial(coefficient_parity, basis))
    localized = _localized(solver, bands, gap, config.analysis.localization, config.scan_grid_spacing, threads)
    bands = bands._replace(localized=localized)
    LOGGER.info(
        "%s section: %d plane waves, guided bands %s",
        section.value,
        basis.size,
        [f"{i}:{bands.parity[i].value}" for i, guided in enumerate(bands.guided) if guided],
    )
    return WaveguideScan(bands, solver, gap)


def peak_report(scan: WaveguideScan) -> Optional[NgPeak]:
    """:return: the even group-index peak, ``None`` without gap or even guided band"""
    if scan.gap is None:
        return None
    try:
        return ng_peak_report(scan.bands, scan.gap)
    except NoneFound as exc:
        LOGGER.warning("no group-index peak: %s", exc.msg)
        return None


def impurity_params(config: RunConfig) -> ImpurityParams:
    analysis = config.analysis
    return ImpurityParams(analysis.eta, analysis.epsilon_threshold, analysis.beta_thresholds)


def _require_gap(gap: Optional[GapInfo]) -> GapInfo:
    if gap is None:
        raise NoGap("the bulk crystal has no TE gap, no mode is guided")
    return gap


def map_at(config: RunConfig, device: Device, scan: WaveguideScan, wavelength_nm: float) -> MapResult:
    """:return: maps, figures of merit, cutline and the optional Monte Carlo check of one wavelength"""
    analysis = config.analysis
    params = impurity_params(config)
    maps = compute_emitter_maps(
        scan.solver,
        scan.bands,
        _require_gap(scan.gap),
        wavelength_nm,
        params,
        n_material=config.device.n_slab,
        mode_height=device.mode_height,
        grid_spacing=config.grid_spacing,
        f_ng=analysis.f_ng,
        clearance=analysis.clearance_nm,
    )
    monte_carlo = None
    if analysis.mc_samples > 0:
        monte_carlo = monte_carlo_fractions(
            maps,
            params,
            samples=analysis.mc_samples,
            seed=analysis.mc_seed,
            n_material=config.device.n_slab,
            mode_height=device.mode_height,
            clearance=analysis.clearance_nm,
        )
    return MapResult(maps, summarize_maps(maps, params), cutline_profile(maps, analysis.cutline_x_nm), monte_carlo)


def maps_for(config: RunConfig, wavelengths: Sequence[float], threads: int = 1) -> List[MapResult]:
    """
    Emitter maps of the dual-mode section at every wavelength.

    :raises NoneFound: when a wavelength has no guided crossing
    """
    device = resolve_device(config)
    gap = _require_gap(reference_gap(config, device, threads))
    scan = scan_waveguide(config, device, Section.DUAL, gap, threads)
    return ordered_map(partial(map_at, config, device, scan), wavelengths, threads)


class SweepResult(NamedTuple):
    #: wavelength interval swept (nm)
    window_nm: Tuple[float, float]
    #: figures of merit of every wavelength with a guided crossing, in ascending wavelength
    rows: List[MapSummary]


def sweep(config: RunConfig, threads: int = 1) -> SweepResult:
    """
    Area fractions of the dual-mode section across a wavelength interval.

    Without an explicit sweep the interval where both parities are guided is used, trimmed by 5% at each end.

    :raises NoneFound: when no wavelength of the sweep has a guided crossing
    """
    device = resolve_device(config)
    gap = _require_gap(reference_gap(config, device, threads))
    scan = scan_waveguide(config, device, Section.DUAL, gap, threads)
    a = device.lattice.a
    window: Optional[Tuple[float, float]] = None
    if config.analysis.sweep_nm is None:
        omega_lo, omega_hi = dual_mode_window(scan.bands, gap)
        low, high = a / omega_hi, a / omega_lo
        trim = 0.05 * (high - low)
        window = (low + trim, high - trim)
    wavelengths = sweep_wavelengths(config.analysis, window)
    params = impurity_params(config)

    def one(wavelength: float) -> Optional[MapSummary]:
        try:
            maps = compute_emitter_maps(
                scan.solver,
                scan.bands,
                gap,
                wavelength,
                params,
                n_material=config.device.n_slab,
                mode_height=device.mode_height,
                grid_spacing=config.grid_spacing,
                f_ng=config.analysis.f_ng,
                clearance=config.analysis.clearance_nm,
            )
        except NoneFound:
            LOGGER.warning("no guided crossing at %.3f nm, skipped", wavelength)
            return None
        return summarize_maps(maps, params)

    rows = [row for row in ordered_map(one, wavelengths, threads) if row is not None]
    if not rows:
        raise NoneFound("no wavelength of the sweep has a guided crossing", first=wavelengths[0], last=wavelengths[-1])
    return SweepResult((wavelengths[0], wavelengths[-1]), rows)


def _interface(direct: Optional[float], two_port: Optional[float]) -> float:
    if direct is not None:
        return direct
    assert two_port is not None  # check_budget demands one of both
    return single_interface_from_two_port(two_port)


def budget_inputs(budget: BudgetConfig, eta: Optional[float] = None) -> BudgetInputs:
    """
    Turn a budget section into the inputs of the source budget.

    :param budget: the budget section
    :param eta: target extinction, replaces ``t_1in`` by ``η I_l2 T_2in / I_l1`` when given
    :return: the inputs, two-port transmissions converted to single interfaces
    """
    inputs = BudgetInputs(
        t_1in=budget.t_1in,
        t_2in=_interface(budget.t_2in, budget.t_mf_odd),
        t_1out=_interface(budget.t_1out, budget.t_w1_even),
        beta1=budget.beta1,
        beta2=budget.beta2,
        i_l1=budget.i_l1,
        i_l2=budget.i_l2,
        t_2out=budget.t_2out,
    )
    if eta is None:
        return inputs
    if not (inputs.i_l1 > 0 and eta > 0):
        raise InvalidParameter("an extinction target needs pump power in the even mode", i_l1=inputs.i_l1, eta=eta)
    t_1in = eta * inputs.i_l2 * inputs.t_2in / inputs.i_l1
    if t_1in > 1.0:
        raise InvalidParameter("the extinction target needs t_1in above 1", eta=eta, t_1in=t_1in)
    LOGGER.info("extinction %.4g selects t_1in=%.4g", eta, t_1in)
    return inputs._replace(t_1in=t_1in)


def source_report(
    budget: BudgetConfig, analysis: AnalysisConfig, a_nm: float, eta: Optional[float] = None
) -> Tuple[SourceBudget, Dict[str, Any]]:
    """
    Budget, least excitation coupling for the impurity threshold and, when a working fraction is given, the yield.

    :param budget: the budget section
    :param analysis: supplies the impurity threshold and the emitter distribution
    :param a_nm: lattice constant, the length of a unit cell (nm)
    :param eta: optional extinction target
    :return: the budget and its report
    """
    result = compute_budget(budget_inputs(budget, eta))
    yield_ = None
    if budget.working_fraction is not None:
        assert budget.effective_area_um2 is not None and budget.window_nm is not None
        low, high = budget.window_nm
        yield_ = emitter_yield(
            budget.working_fraction,
            budget.effective_area_um2,
            a_nm,
            (low, high),
            analysis.qd_density_um2,
            analysis.inhomogeneous_center_nm,
            analysis.inhomogeneous_sigma_nm,
        )
    report = budget_report(result, yield_)
    report["epsilon_target"] = analysis.epsilon_threshold
    usable = 0 < result.eta < math.inf and result.inputs.beta1 > 0
    target = analysis.epsilon_threshold
    report["required_beta2"] = required_beta2(result.eta, result.inputs.beta1, target) if usable else None
    return result, report


__all__ = [
    "Section",
    "Device",
    "WaveguideScan",
    "MapResult",
    "SweepResult",
    "ordered_map",
    "resolve_device",
    "section_params",
    "build_section",
    "scan_bulk",
    "bulk_gap",
    "reference_gap",
    "scan_waveguide",
    "peak_report",
    "impurity_params",
    "map_at",
    "maps_for",
    "sweep",
    "budget_inputs",
    "source_report",
]

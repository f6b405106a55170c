"""
Spatial maps of the coupling of a y-polarized point dipole to the two guided modes.

Fields are normalized over the two-dimensional unit cell with lengths in nanometres. The Purcell factor into one mode
then reads ``F = 3 a λ² n_g |Ey|² / (4π n h)``, where ``h`` is the effective height of the slab mode turning the
in-plane normalization into the three-dimensional one.
"""
import logging
import math
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ._bands import BandStructure, GapInfo, GuidedCrossing, Parity, guided_mode_at_wavelength
from ._errors import EmptyMask, InvalidParameter, NoneFound, ZeroField
from ._geometry import SupercellGeometry
from ._pwe import FloatArray, Grid, ModeField, TESolver, evaluate_field, reconstruct_field

LOGGER = logging.getLogger(__name__)

BoolArray = npt.NDArray[np.bool_]

#: default Purcell factor into non-guided modes
F_NG = 0.13
#: default distance emitters keep from the etched holes (nm)
CLEARANCE_NM = 43.0
DEFAULT_BETA_THRESHOLDS = (0.85, 0.90, 0.95)
DEFAULT_EPSILON_THRESHOLD = 5e-3


class ImpurityParams(NamedTuple):
    """Settings of the laser-impurity analysis"""

    #: extinction of the pump in the collection mode (linear)
    eta: float
    #: largest acceptable impurity
    epsilon_threshold: float = DEFAULT_EPSILON_THRESHOLD
    #: β-factors the area fractions are reported for
    beta_thresholds: Tuple[float, ...] = DEFAULT_BETA_THRESHOLDS


def check_impurity_params(params: ImpurityParams) -> None:
    if not params.eta > 0:
        raise InvalidParameter("eta must be positive", eta=params.eta)
    for value in (params.epsilon_threshold, *params.beta_thresholds):
        if not 0 < value < 1:
            raise InvalidParameter("thresholds must lie in (0, 1)", threshold=value)


class EmitterMaps(NamedTuple):
    """Coupling maps of one wavelength on the channel region of the cell"""

    #: x coordinates of the samples (nm)
    x: FloatArray
    #: y coordinates of the samples (nm), symmetric about the axis
    y: FloatArray
    #: Purcell factor into the even mode
    f1: FloatArray
    #: Purcell factor into the odd mode
    f2: FloatArray
    beta1: FloatArray
    beta2: FloatArray
    #: laser impurity, ``+inf`` where the odd mode is not excited
    epsilon: FloatArray
    #: emitter positions clear of the holes inside the channel
    mask: BoolArray
    f_ng: float
    wavelength_nm: float
    #: group index of the even and the odd mode (``0`` when a parity is not guided)
    ng1: float
    ng2: float
    #: normalized fields of the even and the odd mode
    modes: Tuple[Optional[ModeField], Optional[ModeField]]


def normalize_mode(field: ModeField) -> ModeField:
    """
    Scale a mode so that ``∫ ε |E|² dA = 1`` over the sampled cell (nm units).

    :param field: a mode sampled over exactly one cell
    :return: the scaled mode, its coefficients scaled alike
    """
    energy = float(np.sum(field.eps * (np.abs(field.ex) ** 2 + np.abs(field.ey) ** 2)) * field.grid.weight)
    if not (math.isfinite(energy) and energy > 1e-300):
        raise ZeroField("field energy underflows", energy=energy)
    scale = 1.0 / math.sqrt(energy)
    return field._replace(hz=field.hz * scale, ex=field.ex * scale, ey=field.ey * scale, vector=field.vector * scale)


def purcell_factor(
    ey: npt.ArrayLike, ng: float, a: float, wavelength_nm: float, n_material: float, mode_height: float
) -> FloatArray:
    """Purcell factor of a y-polarized dipole from the cell-normalized ``Ey`` (nm⁻¹)."""
    if not math.isfinite(ng):
        raise InvalidParameter("the group index must be finite", ng=ng)
    intensity = np.abs(np.asarray(ey)) ** 2
    result: FloatArray = 3.0 * a * wavelength_nm**2 * abs(ng) * intensity / (4.0 * math.pi * n_material * mode_height)
    return result


def purcell_map(field: ModeField, ng: float, n_material: float, mode_height: float) -> FloatArray:
    """
    Purcell factor into one mode at every sample of a normalized field.

    :param field: the normalized mode, its frequency sets the wavelength ``λ = a/ω``
    :param ng: group index of the mode
    :param n_material: refractive index at the emitter
    :param mode_height: effective height of the slab mode (nm)
    :return: the map
    """
    a = field.geometry.lattice.a
    return purcell_factor(field.ey, ng, a, a / field.omega, n_material, mode_height)


def beta_map(f1: FloatArray, f2: FloatArray, f_ng: float = F_NG) -> Tuple[FloatArray, FloatArray]:
    """
    Share of the emission going into each guided mode.

    :return: ``β_j = F_j / (F1 + F2 + F_ng)``, zero where every rate vanishes
    """
    if f_ng < 0:
        raise InvalidParameter("F_ng must not be negative", f_ng=f_ng)
    f1, f2 = np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)
    total = f1 + f2 + f_ng
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, f1 / safe, 0.0), np.where(total > 0, f2 / safe, 0.0)


def hole_clearance(geom: SupercellGeometry, x: FloatArray, y: FloatArray) -> FloatArray:
    """:return: distance (nm) from every point to the nearest hole edge, periodic images included"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    (ax, ay), (bx, by) = geom.cell_vectors
    det = ax * by - ay * bx
    nearest = np.full(np.broadcast(x, y).shape, np.inf)
    for hole in geom.holes:
        dx, dy = x - hole.x, y - hole.y
        u = np.round((dx * by - dy * bx) / det)
        v = np.round((ax * dy - ay * dx) / det)
        dx, dy = dx - u * ax - v * bx, dy - u * ay - v * by
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                nearest = np.minimum(nearest, np.hypot(dx + i * ax + j * bx, dy + i * ay + j * by) - hole.r)
    return nearest


def _channel(geom: SupercellGeometry) -> float:
    if geom.channel_half_width is None:
        raise InvalidParameter("the cell has no defect channel")
    return geom.channel_half_width


def emitter_sites(geom: SupercellGeometry, x: FloatArray, y: FloatArray, clearance: float = CLEARANCE_NM) -> BoolArray:
    """:return: which points lie inside the channel ``|y| <= w1`` and farther than ``clearance`` from every hole"""
    if clearance < 0:
        raise InvalidParameter("clearance must not be negative", clearance=clearance)
    inside: BoolArray = (np.abs(y) <= _channel(geom)) & (hole_clearance(geom, x, y) > clearance)
    return inside


def effective_area_mask(geom: SupercellGeometry, grid: Grid, clearance: float = CLEARANCE_NM) -> BoolArray:
    """
    Effective emitter area on a grid of the cell.

    :param geom: the waveguide cell
    :param grid: samples of the cell
    :param clearance: least distance to the hole edges (nm)
    :return: the mask
    :raises EmptyMask: when no sample qualifies
    """
    mask = emitter_sites(geom, grid.x, grid.y, clearance)
    if not mask.any():
        raise EmptyMask("no grid point is clear of the holes", clearance=clearance)
    return mask


def _mask_weight(mask: BoolArray) -> int:
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise EmptyMask("the mask selects no point")
    return count


def area_fraction(values: FloatArray, mask: BoolArray, threshold: float) -> float:
    """
    Share of the masked area where the map reaches a threshold.

    :return: a fraction in ``[0, 1]``, the grid samples carry equal weights
    """
    count = _mask_weight(mask)
    return int(np.count_nonzero(mask & (np.asarray(values) >= threshold))) / count


def impurity_map(beta1: FloatArray, beta2: FloatArray, params: ImpurityParams) -> FloatArray:
    """
    Laser impurity ``ε = η / (β1 β2)`` of an emitter at every sample.

    :return: the map, ``+inf`` where a β-factor vanishes
    """
    check_impurity_params(params)
    product = np.asarray(beta1, dtype=float) * np.asarray(beta2, dtype=float)
    with np.errstate(divide="ignore"):
        result: FloatArray = np.where(product > 0, params.eta / np.where(product > 0, product, 1.0), np.inf)
    return result


def working_area(beta1: FloatArray, epsilon: FloatArray, beta0: float, eps0: float, mask: BoolArray) -> float:
    """:return: share of the masked area with ``β1 >= beta0`` and ``ε <= eps0``"""
    count = _mask_weight(mask)
    good = mask & (np.asarray(beta1) >= beta0) & (np.asarray(epsilon) <= eps0)
    return int(np.count_nonzero(good)) / count


def _pick(crossings: Sequence[GuidedCrossing], parity: Parity) -> Optional[GuidedCrossing]:
    candidates = [c for c in crossings if c.parity is parity and math.isfinite(c.ng)]
    return max(candidates, key=lambda c: (abs(c.ng), -c.band_index)) if candidates else None


def _mode_at(
    solver: TESolver, bands: BandStructure, crossing: GuidedCrossing, grid_spacing: float
) -> Tuple[ModeField, float]:
    k = (crossing.k, 0.0)
    pairs = solver.solve(k, bands.nbands)
    nearest = int(np.argmin(np.abs(bands.kgrid - crossing.k)))
    if bands.vectors is not None:
        reference = bands.vectors[nearest, :, crossing.band_index]
        index = int(np.argmax([abs(np.vdot(reference, p.vector)) for p in pairs]))
    else:
        index = int(np.argmin([abs(p.omega - crossing.omega) for p in pairs]))
    pair = pairs[index]
    field = reconstruct_field(
        solver.geometry, solver.basis, k, pair.vector, grid_spacing, band_index=crossing.band_index, omega=pair.omega
    )
    return normalize_mode(field), pair.omega


def _crop(values: npt.NDArray[Any], keep: BoolArray) -> npt.NDArray[Any]:
    return values[:, keep]


def compute_emitter_maps(
    solver: TESolver,
    bands: BandStructure,
    gap: GapInfo,
    wavelength_nm: float,
    params: ImpurityParams,
    *,
    n_material: float,
    mode_height: float,
    grid_spacing: float,
    f_ng: float = F_NG,
    clearance: float = CLEARANCE_NM,
) -> EmitterMaps:
    """
    Purcell, β and impurity maps of one wavelength.

    The even and the odd guided crossings with the largest group index are re-solved at their exact wavevector,
    normalized over the full cell and cropped to ``|y| <= w1 + w0``. A parity without a guided crossing contributes a
    zero map.

    :param solver: solver of the waveguide cell the bands were computed with
    :param bands: the tracked waveguide bands with localisation flags
    :param gap: the bulk gap
    :param wavelength_nm: vacuum wavelength of the emitter
    :param params: impurity settings
    :param n_material: refractive index at the emitter
    :param mode_height: effective slab mode height (nm)
    :param grid_spacing: sample distance of the maps (nm)
    :param f_ng: Purcell factor into non-guided modes
    :param clearance: least distance of emitters to the holes (nm)
    :return: the maps
    """
    geom = solver.geometry
    a = geom.lattice.a
    crossings = guided_mode_at_wavelength(bands, gap, a / wavelength_nm)
    chosen = (_pick(crossings, Parity.EVEN), _pick(crossings, Parity.ODD))
    modes: List[Optional[ModeField]] = []
    rates: List[Optional[FloatArray]] = []
    ngs: List[float] = []
    for crossing in chosen:
        if crossing is None:
            modes.append(None)
            rates.append(None)
            ngs.append(0.0)
            continue
        field, omega = _mode_at(solver, bands, crossing, grid_spacing)
        modes.append(field)
        rates.append(purcell_map(field, crossing.ng, n_material, mode_height))
        ngs.append(abs(crossing.ng))
        LOGGER.debug("%s mode at k=%.5f omega=%.6f ng=%.3f", crossing.parity.value, crossing.k, omega, crossing.ng)
    template = next((m for m in modes if m is not None), None)
    if template is None:
        raise NoneFound(
            "no even or odd guided crossing at this wavelength",
            wavelength_nm=wavelength_nm,
            parities=[c.parity.value for c in crossings],
        )
    f1 = rates[0] if rates[0] is not None else np.zeros(template.grid.shape)
    f2 = rates[1] if rates[1] is not None else np.zeros(template.grid.shape)
    beta1, beta2 = beta_map(f1, f2, f_ng)
    epsilon = impurity_map(beta1, beta2, params)
    mask = effective_area_mask(geom, template.grid, clearance)
    keep = np.abs(template.grid.y[0]) <= _channel(geom) + geom.lattice.w0
    maps = EmitterMaps(
        x=_crop(template.grid.x, keep),
        y=_crop(template.grid.y, keep),
        f1=_crop(f1, keep),
        f2=_crop(f2, keep),
        beta1=_crop(beta1, keep),
        beta2=_crop(beta2, keep),
        epsilon=_crop(epsilon, keep),
        mask=_crop(mask, keep),
        f_ng=f_ng,
        wavelength_nm=wavelength_nm,
        ng1=ngs[0],
        ng2=ngs[1],
        modes=(modes[0], modes[1]),
    )
    LOGGER.info("maps at %.2f nm: ng1=%.3f ng2=%.3f max beta1=%.4f", wavelength_nm, maps.ng1, maps.ng2, beta1.max())
    return maps


class MapSummary(NamedTuple):
    """Scalar figures of merit of one set of maps"""

    wavelength_nm: float
    ng1: float
    ng2: float
    beta1_max: float
    #: share of the effective area per β threshold
    fractions: Dict[float, float]
    #: share of the effective area with high β1 and low impurity
    working_fraction: float
    #: share of the channel occupied by the effective area
    mask_fraction: float


def summarize_maps(maps: EmitterMaps, params: ImpurityParams) -> MapSummary:
    """:return: the area fractions of the maps for the thresholds of ``params``"""
    check_impurity_params(params)
    fractions = {t: area_fraction(maps.beta1, maps.mask, t) for t in params.beta_thresholds}
    beta0 = max(params.beta_thresholds)
    channel = np.abs(maps.y) <= _channel(_geometry_of(maps))
    return MapSummary(
        wavelength_nm=maps.wavelength_nm,
        ng1=maps.ng1,
        ng2=maps.ng2,
        beta1_max=float(maps.beta1[maps.mask].max()) if maps.mask.any() else 0.0,
        fractions=fractions,
        working_fraction=working_area(maps.beta1, maps.epsilon, beta0, params.epsilon_threshold, maps.mask),
        mask_fraction=int(np.count_nonzero(maps.mask)) / max(int(np.count_nonzero(channel)), 1),
    )


def _geometry_of(maps: EmitterMaps) -> SupercellGeometry:
    field = maps.modes[0] if maps.modes[0] is not None else maps.modes[1]
    assert field is not None
    return field.geometry


class CutlineProfile(NamedTuple):
    """β-factors and impurity along a line of constant x"""

    x: float
    y: FloatArray
    beta1: FloatArray
    beta2: FloatArray
    epsilon: FloatArray


def cutline_profile(maps: EmitterMaps, x_nm: float = 0.0) -> CutlineProfile:
    """
    Values of the maps on the grid column closest to ``x_nm``, as a function of the offset from the axis.

    :param maps: the maps
    :param x_nm: position of the cut (nm), folded into the cell
    :return: the profile
    """
    a = _geometry_of(maps).lattice.a
    column = maps.x[:, 0]
    distance = np.abs((column - x_nm + a / 2.0) % a - a / 2.0)
    row = int(np.argmin(distance))
    return CutlineProfile(
        x=float(column[row]),
        y=maps.y[row].copy(),
        beta1=maps.beta1[row].copy(),
        beta2=maps.beta2[row].copy(),
        epsilon=maps.epsilon[row].copy(),
    )


class MonteCarloFractions(NamedTuple):
    """Area fractions estimated from random emitter positions"""

    samples: int
    #: points that fell inside the effective area
    accepted: int
    fractions: Dict[float, float]
    working_fraction: float


def _point_rates(
    field: Optional[ModeField], ng: float, x: FloatArray, y: FloatArray, n_material: float, mode_height: float
) -> FloatArray:
    if field is None:
        return np.zeros(x.shape)
    _, _, ey = evaluate_field(field, x, y)
    a = field.geometry.lattice.a
    return purcell_factor(ey, ng, a, a / field.omega, n_material, mode_height)


def monte_carlo_fractions(
    maps: EmitterMaps,
    params: ImpurityParams,
    *,
    samples: int,
    seed: int,
    n_material: float,
    mode_height: float,
    clearance: float = CLEARANCE_NM,
    chunk: int = 65536,
) -> MonteCarloFractions:
    """
    Estimate the area fractions of :func:`summarize_maps` from uniformly drawn positions in the channel.

    The fields are evaluated directly from their plane-wave coefficients, so the estimate shares no grid with the maps.

    :param maps: the maps holding the normalized modes
    :param params: impurity settings
    :param samples: number of random positions
    :param seed: seed of the random generator
    :param n_material: refractive index at the emitter
    :param mode_height: effective slab mode height (nm)
    :param clearance: least distance of emitters to the holes (nm)
    :param chunk: positions evaluated per block
    :return: the estimated fractions
    """
    if samples < 1:
        raise InvalidParameter("at least one sample is required", samples=samples)
    check_impurity_params(params)
    geom = _geometry_of(maps)
    half = _channel(geom)
    rng = np.random.default_rng(seed)
    beta0 = max(params.beta_thresholds)
    hits = dict.fromkeys(params.beta_thresholds, 0)
    accepted = working = 0
    for start in range(0, samples, chunk):
        size = min(chunk, samples - start)
        x = rng.uniform(0.0, geom.lattice.a, size)
        y = rng.uniform(-half, half, size)
        inside = emitter_sites(geom, x, y, clearance)
        x, y = x[inside], y[inside]
        f1 = _point_rates(maps.modes[0], maps.ng1, x, y, n_material, mode_height)
        f2 = _point_rates(maps.modes[1], maps.ng2, x, y, n_material, mode_height)
        beta1, beta2 = beta_map(f1, f2, maps.f_ng)
        epsilon = impurity_map(beta1, beta2, params)
        accepted += x.size
        for threshold in hits:
            hits[threshold] += int(np.count_nonzero(beta1 >= threshold))
        working += int(np.count_nonzero((beta1 >= beta0) & (epsilon <= params.epsilon_threshold)))
    if accepted == 0:
        raise EmptyMask("no random position is clear of the holes", samples=samples, clearance=clearance)
    LOGGER.info("Monte Carlo: %d of %d positions inside the effective area", accepted, samples)
    return MonteCarloFractions(
        samples=samples,
        accepted=accepted,
        fractions={t: hits[t] / accepted for t in params.beta_thresholds},
        working_fraction=working / accepted,
    )


__all__ = [
    "F_NG",
    "CLEARANCE_NM",
    "ImpurityParams",
    "EmitterMaps",
    "MapSummary",
    "CutlineProfile",
    "MonteCarloFractions",
    "normalize_mode",
    "purcell_factor",
    "purcell_map",
    "beta_map",
    "hole_clearance",
    "emitter_sites",
    "effective_area_mask",
    "area_fraction",
    "impurity_map",
    "working_area",
    "compute_emitter_maps",
    "summarize_maps",
    "cutline_profile",
    "monte_carlo_fractions",
]

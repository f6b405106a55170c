"""Band tracking, mirror parity, localisation, group index and guided-mode crossings"""
import logging
import math
import warnings
from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from ._errors import AsymmetricGeometry, FlatBand, InvalidParameter, NoGap, NoneFound, TrackingAmbiguity, ZeroField
from ._pwe import ComplexArray, Eigenpair, FloatArray, ModeField, PlaneWaveBasis

LOGGER = logging.getLogger(__name__)

BoolArray = npt.NDArray[np.bool_]

#: mirror overlap beyond which a mode counts as symmetric (or antisymmetric)
PARITY_THRESHOLD = 0.9
#: overlap below which band identity between neighbouring k-points is ambiguous
TRACKING_THRESHOLD = 0.5
#: frequency steps below this make the group index diverge
FLAT_STEP = 1e-12
#: relative width below which a gap is round-off between degenerate bands
GAP_TOLERANCE = 1e-9
#: least number of samples along the bulk path
MIN_BULK_POINTS = 30
#: default share of the field energy a guided mode keeps near the axis
LOCALIZATION_THRESHOLD = 0.8


class Parity(str, Enum):
    """Symmetry of a mode under reflection about the waveguide axis"""

    EVEN = "Even"
    ODD = "Odd"
    MIXED = "Mixed"


class Provenance(NamedTuple):
    """Where a band structure comes from"""

    geometry_hash: str
    cutoff: float
    #: lattice constant (nm), converts normalized frequencies to wavelengths
    a: float


class GapInfo(NamedTuple):
    """Bulk TE band gap in normalized frequency"""

    omega_lo: float
    omega_hi: float

    def contains(self, omega: float) -> bool:
        return self.omega_lo < omega < self.omega_hi

    def to_dict(self, a: float) -> Dict[str, float]:
        """:return: the gap report, wavelengths follow ``λ = a/ω``"""
        return {
            "omega_lo": self.omega_lo,
            "omega_hi": self.omega_hi,
            "lambda_hi_nm": a / self.omega_lo,
            "lambda_lo_nm": a / self.omega_hi,
        }


class BandStructure(NamedTuple):
    """Tracked bands over a list of Bloch wavevectors"""

    #: abscissa of the samples, ``k_x`` for waveguides and path length for the bulk path (``2π/a``)
    kgrid: FloatArray
    #: the Bloch wavevectors, shape ``(nk, 2)`` (``2π/a``)
    kpoints: FloatArray
    #: frequencies, shape ``(nbands, nk)`` (``ωa/2πc``)
    omega: FloatArray
    #: label of every band
    parity: Tuple[Parity, ...]
    #: group index, shape ``(nbands, nk)``, ``+inf`` where the band is flat
    ng: FloatArray
    provenance: Provenance
    #: tracked eigenvectors, shape ``(nk, N, nbands)``, ``None`` when not kept
    vectors: Optional[ComplexArray] = None
    #: whether the mode is an in-gap state localised at the defect, shape ``(nbands, nk)``
    localized: Optional[BoolArray] = None

    @property
    def nbands(self) -> int:
        return int(self.omega.shape[0])

    @property
    def guided(self) -> Tuple[bool, ...]:
        """:return: for every band whether it is localised at any sample"""
        if self.localized is None:
            return tuple(False for _ in range(self.nbands))
        return tuple(bool(row.any()) for row in self.localized)


class GuidedCrossing(NamedTuple):
    """A guided band crossing a target frequency"""

    band_index: int
    #: crossing wavevector ``k_x`` (``2π/a``)
    k: float
    parity: Parity
    #: group index at the crossing, ``+inf`` for a flat band
    ng: float
    #: band frequency at the crossing
    omega: float


class NgPeak(NamedTuple):
    """Group-index maximum of the even guided band and the odd band at the same frequency"""

    band_index: int
    k: float
    omega: float
    wavelength_nm: float
    ng_even: float
    #: ``nan`` when no odd band crosses the frequency
    ng_odd: float
    ratio: float
    #: the maximum lies strictly inside the sampled k range
    interior: bool


def bulk_k_path(n_per_segment: int) -> Tuple[FloatArray, FloatArray]:
    """
    The Γ-M-K-Γ path of the triangular lattice with cell vectors ``(a, 0)`` and ``(a/2, a√3/2)``.

    :param n_per_segment: number of intervals of every segment
    :return: the wavevectors ``(3n+1, 2)`` and the cumulative path length, both in ``2π/a``
    """
    if n_per_segment < 1:
        raise InvalidParameter("a path segment needs at least one interval", n_per_segment=n_per_segment)
    corners = np.array([(0.0, 0.0), (0.0, 1.0 / math.sqrt(3.0)), (1.0 / 3.0, 1.0 / math.sqrt(3.0)), (0.0, 0.0)])
    steps = np.arange(n_per_segment) / n_per_segment
    points = [start + np.outer(steps, stop - start) for start, stop in zip(corners[:-1], corners[1:])]
    path = np.vstack(points + [corners[-1:]])
    length = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(path, axis=0).T))])
    return path, length


def find_bandgap(bulk: BandStructure) -> GapInfo:
    """
    Gap between the first two TE bands of the bulk crystal.

    :param bulk: ascending bulk bands along the irreducible path
    :return: the gap
    :raises NoGap: when the second band dips below the top of the first one
    """
    if bulk.omega.shape[1] < MIN_BULK_POINTS:
        raise InvalidParameter("the bulk path is sampled too coarsely", points=bulk.omega.shape[1])
    if bulk.nbands < 2:
        raise InvalidParameter("the gap needs at least two bands", nbands=bulk.nbands)
    omega_lo, omega_hi = float(bulk.omega[0].max()), float(bulk.omega[1].min())
    if not omega_hi - omega_lo > GAP_TOLERANCE * omega_hi:
        raise NoGap("no gap between the first two TE bands", omega_lo=omega_lo, omega_hi=omega_hi)
    LOGGER.info("TE gap %.6f - %.6f (a/λ)", omega_lo, omega_hi)
    return GapInfo(omega_lo, omega_hi)


def _mirror_order(basis: PlaneWaveBasis) -> npt.NDArray[np.int64]:
    lookup = {(int(m), int(n)): i for i, (m, n) in enumerate(basis.indices)}
    try:
        return np.array([lookup[(int(m), -int(n))] for m, n in basis.indices])
    except KeyError as exc:
        raise AsymmetricGeometry("basis is not closed under the mirror y -> -y") from exc


def coefficient_parity(basis: PlaneWaveBasis, vector: ComplexArray) -> Parity:
    """
    Parity of a mode of a rectangular cell at ``k_y = 0`` from its plane-wave coefficients.

    Reflection about ``y = 0`` maps the coefficient of ``(m, n)`` to ``(m, -n)``; ``Ey`` shares the parity of ``Hz``.
    """
    overlap = np.vdot(vector, vector[_mirror_order(basis)]) / np.vdot(vector, vector)
    return _label(float(np.real(overlap)))


def _label(overlap: float) -> Parity:
    if overlap > PARITY_THRESHOLD:
        return Parity.EVEN
    if overlap < -PARITY_THRESHOLD:
        return Parity.ODD
    return Parity.MIXED


def _check_mirror(field: ModeField) -> None:
    geom = field.geometry
    if not (geom.symmetry_axis and geom.is_rectangular):
        raise AsymmetricGeometry("parity needs a rectangular cell mirror symmetric about y = 0")


def classify_parity(field: ModeField) -> Parity:
    """
    Label a mode by the symmetry of ``Ey`` under ``y -> -y``.

    :param field: the sampled mode
    :return: Even or Odd when the mirror overlap exceeds the threshold, Mixed otherwise
    """
    _check_mirror(field)
    ny = field.grid.shape[1]
    mirror = (ny - np.arange(ny)) % ny
    norm = np.vdot(field.ey, field.ey).real
    if not norm > 0:
        raise ZeroField("Ey vanishes, parity is undefined")
    return _label(float(np.vdot(field.ey, field.ey[:, mirror]).real / norm))


def localization(field: ModeField, half_width: Optional[float] = None) -> float:
    """
    Share of the electric energy ``ε|E|²`` found within ``|y| <= half_width``.

    :param field: the sampled mode
    :param half_width: extent around the axis (nm), by default the channel half width plus one row distance
    :return: the fraction in ``[0, 1]``
    """
    geom = field.geometry
    if half_width is None:
        if geom.channel_half_width is None:
            raise InvalidParameter("cell has no defect channel, give the half width explicitly")
        half_width = geom.channel_half_width + geom.lattice.w0
    energy = field.eps * (np.abs(field.ex) ** 2 + np.abs(field.ey) ** 2)
    total = float(energy.sum())
    if not total > 0:
        raise ZeroField("field energy vanishes")
    return float(energy[np.abs(field.grid.y) <= half_width].sum() / total)


def _greedy_match(overlap: FloatArray, step: FloatArray) -> npt.NDArray[np.int64]:
    # pairs by decreasing overlap, ties by increasing frequency jump
    rows, cols = np.unravel_index(np.lexsort((step.ravel(), -np.round(overlap.ravel(), 12))), overlap.shape)
    assignment = np.full(overlap.shape[0], -1, dtype=np.int64)
    taken = np.zeros(overlap.shape[1], dtype=bool)
    for row, col in zip(rows, cols):
        if assignment[row] < 0 and not taken[col]:
            assignment[row] = col
            taken[col] = True
    return assignment


def track_bands(
    kpoints: FloatArray,
    raw: Sequence[Sequence[Eigenpair]],
    provenance: Provenance,
    kgrid: Optional[FloatArray] = None,
    parity_of: Optional[Callable[[ComplexArray], Parity]] = None,
    keep_vectors: bool = True,
) -> BandStructure:
    """
    Connect per-k eigenpairs into bands by maximal eigenvector overlap.

    :param kpoints: the wavevectors, shape ``(nk, 2)``
    :param raw: ascending eigenpairs at every wavevector, all solved in the same basis
    :param provenance: origin of the data
    :param kgrid: abscissa of the samples, ``k_x`` by default
    :param parity_of: labels a single eigenvector, bands stay Mixed when not given
    :param keep_vectors: store the tracked eigenvectors
    :return: the tracked bands with group indices
    """
    kpoints = np.asarray(kpoints, dtype=float).reshape(-1, 2)
    if len(raw) != len(kpoints) or not raw:
        raise InvalidParameter("one list of eigenpairs per wavevector is required", nk=len(kpoints), raw=len(raw))
    nbands = len(raw[0])
    omega = np.empty((nbands, len(raw)))
    vectors = np.empty((len(raw), raw[0][0].vector.size, nbands), dtype=complex)
    omega[:, 0] = [p.omega for p in raw[0]]
    vectors[0] = np.stack([p.vector for p in raw[0]], axis=-1)
    worst = np.ones(nbands)
    for index in range(1, len(raw)):
        current = np.stack([p.vector for p in raw[index]], axis=-1)
        freq = np.array([p.omega for p in raw[index]])
        overlap = np.abs(vectors[index - 1].conj().T @ current)
        step = np.abs(omega[:, index - 1, None] - freq[None, :])
        assignment = _greedy_match(overlap, step)
        worst = np.minimum(worst, overlap[np.arange(nbands), assignment])
        omega[:, index] = freq[assignment]
        vectors[index] = current[:, assignment]
    ambiguous = worst < TRACKING_THRESHOLD
    for band in np.flatnonzero(ambiguous):
        msg = f"band {band} has an overlap of {worst[band]:.3f} between neighbouring k-points"
        LOGGER.warning(msg)
        warnings.warn(msg, TrackingAmbiguity, stacklevel=2)
    parity = []
    for band in range(nbands):
        labels = {parity_of(vectors[i, :, band]) for i in range(len(raw))} if parity_of else {Parity.MIXED}
        parity.append(labels.pop() if len(labels) == 1 and not ambiguous[band] else Parity.MIXED)
    grid = kpoints[:, 0].copy() if kgrid is None else np.asarray(kgrid, dtype=float)
    ng = np.vstack([group_index_curve(grid, row) for row in omega])
    return BandStructure(
        kgrid=grid,
        kpoints=kpoints,
        omega=omega,
        parity=tuple(parity),
        ng=ng,
        provenance=provenance,
        vectors=vectors if keep_vectors else None,
    )


def group_index_curve(kgrid: FloatArray, omega: FloatArray) -> FloatArray:
    """
    Group index ``Δk/Δω`` along one band, central differences inside and one-sided at the ends.

    :return: the group index per sample, ``+inf`` where the band is flat and ``nan`` for a single sample
    """
    kgrid, omega = np.asarray(kgrid, dtype=float), np.asarray(omega, dtype=float)
    if kgrid.size < 2:
        return np.full(kgrid.size, np.nan)
    lo = np.concatenate([[0], np.arange(kgrid.size - 2), [kgrid.size - 2]])
    hi = np.concatenate([[1], np.arange(2, kgrid.size), [kgrid.size - 1]])
    d_omega, d_k = omega[hi] - omega[lo], kgrid[hi] - kgrid[lo]
    flat = np.abs(d_omega) < FLAT_STEP
    return np.where(flat, np.inf, d_k / np.where(flat, 1.0, d_omega))


def group_index(bands: BandStructure, band_index: int, k_index: int) -> float:
    """
    Group index ``n_g = c/v_g`` of a band at one sample.

    :param bands: the band structure
    :param band_index: the band
    :param k_index: the sample
    :return: the signed group index, ``+inf`` for a flat band
    """
    nk = bands.kgrid.size
    if nk < 2:
        raise InvalidParameter("the group index needs at least two samples", nk=nk)
    if not 0 <= k_index < nk:
        raise InvalidParameter("sample index out of range", k_index=k_index, nk=nk)
    lo, hi = max(k_index - 1, 0), min(k_index + 1, nk - 1)
    d_omega = bands.omega[band_index, hi] - bands.omega[band_index, lo]
    if abs(d_omega) < FLAT_STEP:
        msg = f"band {band_index} is flat at k={bands.kgrid[k_index]:.6f}"
        LOGGER.warning(msg)
        warnings.warn(msg, FlatBand, stacklevel=2)
        return math.inf
    return float((bands.kgrid[hi] - bands.kgrid[lo]) / d_omega)


def _crossings(kgrid: FloatArray, row: FloatArray, target: float) -> List[Tuple[float, float, float]]:
    # (k, omega, dω/dk) where the spline through the samples meets the target
    spline = CubicSpline(kgrid, row)
    slope = spline.derivative()
    offset = row - target
    found = []
    for i in range(kgrid.size - 1):
        if offset[i] == 0.0:
            found.append(float(kgrid[i]))
        elif offset[i] * offset[i + 1] < 0:
            found.append(float(bisect(lambda k: float(spline(k)) - target, kgrid[i], kgrid[i + 1], xtol=1e-9)))
    if offset[-1] == 0.0:
        found.append(float(kgrid[-1]))
    return [(k, float(spline(k)), float(slope(k))) for k in found]


def guided_mode_at_wavelength(bands: BandStructure, gap: GapInfo, target: float) -> List[GuidedCrossing]:
    """
    Every guided band crossing a target frequency.

    :param bands: waveguide bands with localisation flags
    :param gap: the bulk gap, crossings outside of it are not guided
    :param target: normalized frequency ``a/λ``
    :return: the crossings ordered by band then by ``k``
    :raises NoneFound: when no guided band crosses the frequency
    """
    if bands.localized is None:
        raise InvalidParameter("the band structure carries no localisation flags")
    result = []
    if bands.kgrid.size >= 2 and gap.contains(target):
        for band in range(bands.nbands):
            for k, omega, slope in _crossings(bands.kgrid, bands.omega[band], target):
                nearest = int(np.argmin(np.abs(bands.kgrid - k)))
                if not bands.localized[band, nearest]:
                    continue
                ng = math.inf if abs(slope) < FLAT_STEP else 1.0 / slope
                result.append(GuidedCrossing(band, k, bands.parity[band], ng, omega))
    if not result:
        raise NoneFound("no guided band crosses the frequency", omega=target, gap=tuple(gap))
    LOGGER.debug("crossings at %.6f: %s", target, result)
    return result


def _guided_range(bands: BandStructure, gap: GapInfo, parity: Parity) -> Optional[Tuple[float, float]]:
    assert bands.localized is not None
    values = [
        bands.omega[band, bands.localized[band]]
        for band in range(bands.nbands)
        if bands.parity[band] is parity and bands.localized[band].any()
    ]
    if not values:
        return None
    merged = np.concatenate(values)
    merged = merged[(merged > gap.omega_lo) & (merged < gap.omega_hi)]
    return (float(merged.min()), float(merged.max())) if merged.size else None


def dual_mode_window(bands: BandStructure, gap: GapInfo) -> Tuple[float, float]:
    """
    Frequency interval where an even and an odd guided band coexist.

    :return: the interval ``(omega_min, omega_max)``
    :raises NoneFound: when the guided frequency ranges of the two parities do not overlap
    """
    even, odd = _guided_range(bands, gap, Parity.EVEN), _guided_range(bands, gap, Parity.ODD)
    if even is None or odd is None or max(even[0], odd[0]) >= min(even[1], odd[1]):
        raise NoneFound("no frequency supports both an even and an odd guided mode", even=even, odd=odd)
    return max(even[0], odd[0]), min(even[1], odd[1])


def _local_maxima(values: FloatArray) -> npt.NDArray[np.int64]:
    # samples outside the usable range hold -inf and so count as lower neighbours
    inner = np.arange(1, values.size - 1)
    keep = np.isfinite(values[inner])
    keep &= (values[inner] >= values[inner - 1]) & (values[inner] >= values[inner + 1])
    return inner[keep]


def ng_peak_report(bands: BandStructure, gap: GapInfo) -> NgPeak:
    """
    Largest group index of the even guided bands, preferring interior maxima, and the odd mode at that frequency.

    :return: the peak
    :raises NoneFound: when no even band is guided
    """
    if bands.localized is None:
        raise InvalidParameter("the band structure carries no localisation flags")
    best: Optional[Tuple[float, int, int, bool]] = None
    for band in range(bands.nbands):
        if bands.parity[band] is not Parity.EVEN:
            continue
        usable = bands.localized[band] & (bands.omega[band] > gap.omega_lo) & (bands.omega[band] < gap.omega_hi)
        values = np.where(usable & np.isfinite(bands.ng[band]), np.abs(bands.ng[band]), -np.inf)
        if not usable.any():
            continue
        interior = _local_maxima(values)
        index, is_interior = (int(interior[np.argmax(values[interior])]), True) if interior.size else (-1, False)
        if index < 0:
            index = int(np.argmax(values))
        candidate = (float(values[index]), band, index, is_interior)
        if best is None or (candidate[3], candidate[0]) > (best[3], best[0]):
            best = candidate
    if best is None:
        raise NoneFound("no even guided band")
    ng_even, band, index, interior = best
    omega = float(bands.omega[band, index])
    try:
        odd = [abs(c.ng) for c in guided_mode_at_wavelength(bands, gap, omega) if c.parity is Parity.ODD]
    except NoneFound:
        odd = []
    ng_odd = min(odd) if odd else math.nan
    ratio = ng_even / ng_odd if odd and ng_odd > 0 else math.nan
    peak = NgPeak(
        band_index=band,
        k=float(bands.kgrid[index]),
        omega=omega,
        wavelength_nm=bands.provenance.a / omega,
        ng_even=ng_even,
        ng_odd=ng_odd,
        ratio=ratio,
        interior=interior,
    )
    LOGGER.info("even group-index peak %.2f at k=%.4f (odd %.2f)", ng_even, peak.k, ng_odd)
    return peak


__all__ = [
    "Parity",
    "Provenance",
    "GapInfo",
    "BandStructure",
    "GuidedCrossing",
    "NgPeak",
    "LOCALIZATION_THRESHOLD",
    "bulk_k_path",
    "find_bandgap",
    "coefficient_parity",
    "classify_parity",
    "localization",
    "track_bands",
    "group_index_curve",
    "group_index",
    "guided_mode_at_wavelength",
    "dual_mode_window",
    "ng_peak_report",
]

"""Supercell descriptions of the bulk crystal and the waveguide sections.

All lengths handled by this module are in nanometres; reciprocal vectors passed to the Fourier routines are in
radians per nanometre.
"""
import hashlib
import json
import logging
import math
from itertools import product
from typing import Any, NamedTuple, Optional, Tuple

import numpy as np
import numpy.typing as npt
from scipy.optimize import bisect
from scipy.special import j1

from ._errors import InvalidParameter, NoGuidedMode, OverlappingHoles

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]
Vector = Tuple[float, float]


class LatticeSpec(NamedTuple):
    """Parameters of the triangular hole lattice of the (effective) 2D membrane"""

    #: lattice constant (nm)
    a: float
    #: nominal hole radius (nm)
    r0: float
    #: relative permittivity of the slab material (effective index squared)
    eps_bg: float
    #: relative permittivity inside the holes
    eps_hole: float = 1.0

    @property
    def w0(self) -> float:
        """:return: distance between two neighbouring hole rows, ``a*sqrt(3)/2`` (nm)"""
        return self.a * math.sqrt(3.0) / 2.0


class WaveguideParams(NamedTuple):
    """Positions of the hole rows around the line defect"""

    #: half width of the defect channel in units of ``w0``
    w1_factor: float
    #: distance between the first and the second hole row (nm)
    d1: float
    #: distance between the second and the third hole row (nm)
    d2: float
    #: whether the mode-filter row of holes sits on the waveguide axis
    center_row: bool = False
    #: number of hole rows on each side of the defect
    rows_per_side: int = 7


class Hole(NamedTuple):
    """A circular hole of the supercell"""

    #: centre x coordinate (nm)
    x: float
    #: centre y coordinate (nm)
    y: float
    #: radius (nm)
    r: float


class SupercellGeometry(NamedTuple):
    """The device blueprint: a periodic cell filled with circular holes"""

    #: the two in-plane lattice vectors of the cell (nm)
    cell_vectors: Tuple[Vector, Vector]
    #: the holes of the cell
    holes: Tuple[Hole, ...]
    #: material parameters of the crystal
    lattice: LatticeSpec
    #: the geometry is mirror symmetric about ``y = 0``
    symmetry_axis: bool
    #: half width ``w1`` of the defect channel (nm), ``None`` for bulk cells
    channel_half_width: Optional[float] = None

    @property
    def area(self) -> float:
        """:return: area of the cell (nm²)"""
        (ax, ay), (bx, by) = self.cell_vectors
        return abs(ax * by - ay * bx)

    @property
    def is_rectangular(self) -> bool:
        """:return: truthful when the cell vectors are aligned with the x and y axes"""
        (_, ay), (bx, _) = self.cell_vectors
        return ay == 0.0 and bx == 0.0

    @property
    def fill_fraction(self) -> float:
        """:return: the fraction of the cell area occupied by holes"""
        return sum(math.pi * h.r**2 for h in self.holes) / self.area


class SlabSpec(NamedTuple):
    """A symmetric dielectric slab used to reduce the membrane to an effective 2D medium"""

    #: refractive index of the membrane
    n_core: float
    #: refractive index of the surrounding cladding
    n_clad: float
    #: membrane thickness (nm)
    thickness: float
    #: vacuum wavelength (nm)
    wavelength: float


def _check_slab(spec: SlabSpec) -> None:
    if not spec.n_core > spec.n_clad >= 1.0:
        raise InvalidParameter("slab indices must satisfy n_core > n_clad >= 1", n_core=spec.n_core, n_clad=spec.n_clad)
    if not spec.thickness > 0 or not spec.wavelength > 0:
        raise InvalidParameter(
            "slab thickness and wavelength must be positive", thickness=spec.thickness, wavelength=spec.wavelength
        )


def _slab_residual(spec: SlabSpec, n_eff: float) -> float:
    # symmetric slab, fundamental TE: u tan(u) = w written without the poles of the tangent
    half = math.pi * spec.thickness / spec.wavelength
    u = half * math.sqrt(max(spec.n_core**2 - n_eff**2, 0.0))
    w = half * math.sqrt(max(n_eff**2 - spec.n_clad**2, 0.0))
    return u * math.sin(u) - w * math.cos(u)


def slab_te_effective_index(spec: SlabSpec) -> float:
    """
    Effective index of the fundamental TE mode of a symmetric slab.

    :param spec: the slab
    :return: the effective index, strictly between the cladding and the core index
    """
    _check_slab(spec)
    # the fundamental mode has u in [0, pi/2]
    u_max = spec.wavelength / (2.0 * spec.thickness)
    low = max(spec.n_clad, math.sqrt(max(spec.n_core**2 - u_max**2, 0.0)))
    high = spec.n_core
    f_low, f_high = _slab_residual(spec, low), _slab_residual(spec, high)
    if not f_low * f_high < 0:
        raise NoGuidedMode("no sign change of the slab dispersion relation", low=low, high=high)
    n_eff = float(bisect(lambda n: _slab_residual(spec, n), low, high, xtol=1e-13, maxiter=400))
    LOGGER.debug("slab %r has n_eff %.9f", spec, n_eff)
    return n_eff


def slab_mode_height(spec: SlabSpec, n_eff: Optional[float] = None) -> float:
    """
    Effective height of the fundamental TE slab mode seen by an emitter in the middle of the membrane.

    :param spec: the slab
    :param n_eff: effective index of the mode, solved for when not given
    :return: ``∫|φ(z)|² dz / |φ(0)|²`` (nm)
    """
    if n_eff is None:
        n_eff = slab_te_effective_index(spec)
    k0 = 2.0 * math.pi / spec.wavelength
    kappa = k0 * math.sqrt(spec.n_core**2 - n_eff**2)
    gamma = k0 * math.sqrt(n_eff**2 - spec.n_clad**2)
    t = spec.thickness
    core = t / 2.0 + math.sin(kappa * t) / (2.0 * kappa)
    return core + math.cos(kappa * t / 2.0) ** 2 / gamma


def membrane_lattice(
    a: float, r0: float, n_slab: float, thickness: float, wavelength: float, n_clad: float = 1.0
) -> Tuple[LatticeSpec, SlabSpec]:
    """
    Reduce a hole-patterned membrane to a 2D crystal with the slab effective index as background.

    :return: the lattice (``eps_bg = n_eff²``, air holes) and the slab it was derived from
    """
    slab = SlabSpec(n_core=n_slab, n_clad=n_clad, thickness=thickness, wavelength=wavelength)
    n_eff = slab_te_effective_index(slab)
    lattice = LatticeSpec(a=a, r0=r0, eps_bg=n_eff**2, eps_hole=n_clad**2)
    _check_lattice(lattice)
    return lattice, slab


def _check_lattice(lattice: LatticeSpec) -> None:
    if not lattice.a > 0:
        raise InvalidParameter("lattice constant must be positive", a=lattice.a)
    if not 0 < lattice.r0 < lattice.a / 2:
        raise InvalidParameter("hole radius must lie in (0, a/2)", a=lattice.a, r0=lattice.r0)
    if not lattice.eps_bg > lattice.eps_hole >= 1.0:
        raise InvalidParameter(
            "permittivities must satisfy eps_bg > eps_hole >= 1", eps_bg=lattice.eps_bg, eps_hole=lattice.eps_hole
        )


def _check_waveguide(lattice: LatticeSpec, params: WaveguideParams) -> None:
    if not params.w1_factor >= 1.0:
        raise InvalidParameter("w1_factor must be at least 1", w1_factor=params.w1_factor)
    if not (params.d1 > lattice.r0 and params.d2 > lattice.r0):
        raise InvalidParameter("row distances must exceed the hole radius", d1=params.d1, d2=params.d2)
    if params.rows_per_side < 5:
        raise InvalidParameter("at least 5 hole rows per side are required", rows_per_side=params.rows_per_side)


def build_bulk_cell(lattice: LatticeSpec) -> SupercellGeometry:
    """
    Primitive cell of the triangular crystal: lattice vectors of length ``a`` at 60° and one hole at the origin.

    :param lattice: the crystal
    :return: the bulk cell
    """
    _check_lattice(lattice)
    a = lattice.a
    cell = ((a, 0.0), (a / 2.0, lattice.w0))
    return SupercellGeometry(cell, (Hole(0.0, 0.0, lattice.r0),), lattice, symmetry_axis=True)


def w1_params(lattice: LatticeSpec, rows_per_side: int = 7) -> WaveguideParams:
    """:return: the standard single missing row waveguide"""
    return WaveguideParams(1.0, lattice.w0, lattice.w0, center_row=False, rows_per_side=rows_per_side)


def dual_mode_params(
    lattice: LatticeSpec,
    w1_factor: float = 1.07,
    d1: Optional[float] = None,
    d2: Optional[float] = None,
    rows_per_side: int = 7,
) -> WaveguideParams:
    """:return: the dispersion engineered dual-mode waveguide (``d1 = w0 - 60 nm``, ``d2 = w0 - 40 nm`` by default)"""
    d1 = lattice.w0 - 60.0 if d1 is None else d1
    d2 = lattice.w0 - 40.0 if d2 is None else d2
    return WaveguideParams(w1_factor, d1, d2, center_row=False, rows_per_side=rows_per_side)


def mode_filter_params(
    lattice: LatticeSpec,
    w1_factor: float = 1.38,
    d1: Optional[float] = None,
    d2: Optional[float] = None,
    rows_per_side: int = 7,
) -> WaveguideParams:
    """:return: the widened dual-mode waveguide with an extra row of holes on the axis"""
    dual = dual_mode_params(lattice, d1=d1, d2=d2, rows_per_side=rows_per_side)
    return dual._replace(w1_factor=w1_factor, center_row=True)


def row_positions(lattice: LatticeSpec, params: WaveguideParams) -> Tuple[float, ...]:
    """:return: y coordinates (nm) of the hole rows above the axis, innermost first"""
    w0 = lattice.w0
    first = params.w1_factor * w0
    rows = [first, first + params.d1, first + params.d1 + params.d2]
    while len(rows) < params.rows_per_side:
        rows.append(rows[-1] + w0)
    return tuple(rows)


def build_waveguide_cell(lattice: LatticeSpec, params: WaveguideParams) -> SupercellGeometry:
    """
    Rectangular supercell of a line-defect waveguide, periodic with ``a`` along x.

    Odd rows (counted outward from the axis) are shifted by ``a/2`` along x to keep the triangular registry. One more
    row sits on the cell boundary, a bulk row distance beyond the outermost rows of both sides, and is shared by them
    so the registry alternates across the boundary as well.

    :param lattice: the crystal
    :param params: the row positions
    :return: the supercell
    """
    _check_lattice(lattice)
    _check_waveguide(lattice, params)
    a, r0 = lattice.a, lattice.r0
    rows = row_positions(lattice, params)
    holes = []
    for index, y in enumerate(rows, start=1):
        holes.extend((Hole(_row_offset(a, index), y, r0), Hole(_row_offset(a, index), -y, r0)))
    boundary = rows[-1] + lattice.w0
    holes.append(Hole(_row_offset(a, len(rows) + 1), boundary, r0))
    if params.center_row:
        holes.append(Hole(a / 2.0, 0.0, r0))
    geom = SupercellGeometry(
        cell_vectors=((a, 0.0), (0.0, 2.0 * boundary)),
        holes=tuple(sorted(holes, key=lambda h: (h.y, h.x))),
        lattice=lattice,
        symmetry_axis=True,
        channel_half_width=rows[0],
    )
    check_holes(geom)
    return geom


def _row_offset(a: float, index: int) -> float:
    return a / 2.0 if index % 2 else 0.0


def _image_shifts(geom: SupercellGeometry) -> FloatArray:
    (ax, ay), (bx, by) = geom.cell_vectors
    return np.array([(i * ax + j * bx, i * ay + j * by) for i, j in product((-1, 0, 1), repeat=2)])


def check_holes(geom: SupercellGeometry) -> None:
    """
    Verify that no two holes intersect, periodic images included, and that a declared mirror symmetry holds.

    :raises OverlappingHoles: for intersecting holes
    :raises InvalidParameter: for a declared but broken mirror symmetry
    """
    shifts = _image_shifts(geom)
    for i, first in enumerate(geom.holes):
        for j in range(i, len(geom.holes)):
            second = geom.holes[j]
            delta = np.array([second.x - first.x, second.y - first.y]) + shifts
            dist = np.hypot(delta[:, 0], delta[:, 1])
            if i == j:
                dist = dist[np.any(shifts != 0.0, axis=1)]
            if np.min(dist) <= first.r + second.r:
                raise OverlappingHoles("holes intersect", first=tuple(first), second=tuple(second))
    if geom.symmetry_axis and _mirror_partners(geom) is None:
        raise InvalidParameter("geometry is flagged mirror symmetric but its holes are not")


def _mirror_partners(geom: SupercellGeometry) -> Optional[Tuple[int, ...]]:
    # index of the mirror image of each hole, periodic images included
    (_, _), (_, height) = geom.cell_vectors
    partners = []
    for hole in geom.holes:
        match = None
        for index, other in enumerate(geom.holes):
            dy = other.y + hole.y
            if geom.is_rectangular:
                dy -= height * round(dy / height)
            if abs(other.x - hole.x) < 1e-9 and abs(dy) < 1e-9 and abs(other.r - hole.r) < 1e-12:
                match = index
                break
        if match is None:
            return None
        partners.append(match)
    return tuple(partners)


def permittivity_at(geom: SupercellGeometry, x: FloatArray, y: FloatArray) -> FloatArray:
    """
    Relative permittivity at the given points.

    :param geom: the geometry
    :param x: x coordinates (nm)
    :param y: y coordinates (nm), same shape as ``x``
    :return: the permittivity at every point
    """
    lattice = geom.lattice
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    (ax, ay), (bx, by) = geom.cell_vectors
    det = ax * by - ay * bx
    for hole in geom.holes:
        # fold into the cell around the hole centre, then test the neighbouring images
        dx, dy = x - hole.x, y - hole.y
        u = np.round((dx * by - dy * bx) / det)
        v = np.round((ax * dy - ay * dx) / det)
        dx, dy = dx - u * ax - v * bx, dy - u * ay - v * by
        for sx, sy in _image_shifts(geom):
            inside |= (dx + sx) ** 2 + (dy + sy) ** 2 < hole.r**2
    return np.where(inside, lattice.eps_hole, lattice.eps_bg)


def epsilon_coefficients(geom: SupercellGeometry, g: FloatArray) -> ComplexArray:
    """
    Analytic Fourier coefficients ``ε(G)`` of the piecewise constant permittivity.

    :param geom: the geometry
    :param g: reciprocal vectors, shape ``(..., 2)`` (rad/nm)
    :return: the coefficients, shape ``g.shape[:-1]``
    """
    g = np.asarray(g, dtype=float)
    gx, gy = g[..., 0], g[..., 1]
    norm = np.hypot(gx, gy)
    lattice = geom.lattice
    contrast = lattice.eps_hole - lattice.eps_bg
    result = np.where(norm == 0.0, lattice.eps_bg, 0.0).astype(complex)
    partners = _mirror_partners(geom) if geom.symmetry_axis else None
    for index, hole in enumerate(geom.holes):
        if partners is not None and partners[index] < index:
            continue  # already added together with its mirror image
        arg = norm * hole.r
        safe = np.where(arg == 0.0, 1.0, arg)
        form = np.where(arg == 0.0, 1.0, 2.0 * j1(safe) / safe)
        fraction = math.pi * hole.r**2 / geom.area
        phase = np.exp(-1j * (gx * hole.x + gy * hole.y))
        if partners is not None and partners[index] != index:
            mirror = geom.holes[partners[index]]
            phase = phase + np.exp(-1j * (gx * mirror.x + gy * mirror.y))
        result += contrast * fraction * form * phase
    return result


def epsilon_fourier(geom: SupercellGeometry, gvecs: FloatArray) -> ComplexArray:
    """
    The matrix ``ε(G - G')`` over a list of reciprocal vectors.

    :param geom: the geometry
    :param gvecs: reciprocal lattice vectors of the cell, shape ``(N, 2)`` (rad/nm)
    :return: Hermitian ``(N, N)`` matrix
    """
    gvecs = np.asarray(gvecs, dtype=float)
    return epsilon_coefficients(geom, gvecs[:, None, :] - gvecs[None, :, :])


def geometry_hash(geom: SupercellGeometry) -> str:
    """:return: short digest identifying the geometry, recorded as provenance of derived data"""
    payload: Any = [geom.cell_vectors, [tuple(h) for h in geom.holes], tuple(geom.lattice), geom.symmetry_axis]
    return hashlib.sha256(json.dumps(payload).encode()).hexdigest()[:16]


__all__ = [
    "LatticeSpec",
    "WaveguideParams",
    "Hole",
    "SupercellGeometry",
    "SlabSpec",
    "slab_te_effective_index",
    "slab_mode_height",
    "membrane_lattice",
    "build_bulk_cell",
    "build_waveguide_cell",
    "w1_params",
    "dual_mode_params",
    "mode_filter_params",
    "row_positions",
    "check_holes",
    "permittivity_at",
    "epsilon_coefficients",
    "epsilon_fourier",
    "geometry_hash",
]

"""Plane-wave expansion of the 2D TE Bloch problem (out-of-plane magnetic field).

Wavevectors and reciprocal vectors are expressed in units of ``2π/a`` and frequencies as ``ωa/2πc``, so that the
eigenvalues of the operator are the squared normalized frequencies.
"""
import logging
import math
from typing import List, NamedTuple, Tuple

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgError, eigh

from ._errors import BasisTooLarge, BasisTooSmall, EigSolveFailure, InvalidParameter, SingularEpsilon
from ._geometry import SupercellGeometry, epsilon_coefficients, permittivity_at

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]
IntArray = npt.NDArray[np.int64]
Wavevector = Tuple[float, float]

#: default cap on the number of plane waves
MAX_BASIS = 4000
#: largest accepted condition number of the permittivity matrix
MAX_CONDITION = 1e12
#: eigenvalues below this are clamped to zero frequency
ZERO_EIGENVALUE = 1e-8


class PlaneWaveBasis(NamedTuple):
    """Reciprocal lattice vectors of a cell within a cutoff"""

    #: largest ``|G|`` kept, in units of ``2π/a``
    cutoff: float
    #: coordinates ``(m, n)`` of every vector on the reciprocal basis of the cell
    indices: IntArray
    #: the vectors, shape ``(N, 2)``, in units of ``2π/a``
    gvecs: FloatArray
    #: lattice constant the normalized units refer to (nm)
    a: float

    @property
    def size(self) -> int:
        """:return: number of plane waves"""
        return int(self.gvecs.shape[0])


class PlaneWaveOperator(NamedTuple):
    """The Hermitian eigenproblem at one Bloch wavevector"""

    #: Bloch wavevector (``2π/a``)
    k: Wavevector
    #: the plane waves the matrix is expressed in
    basis: PlaneWaveBasis
    #: the Hermitian matrix whose eigenvalues are ``(ωa/2πc)²``
    matrix: ComplexArray


class Eigenpair(NamedTuple):
    """One eigenmode of the operator"""

    #: normalized frequency ``ωa/2πc``
    omega: float
    #: unit-norm plane-wave coefficients of ``Hz``, largest component real positive
    vector: ComplexArray


class Grid(NamedTuple):
    """Uniform sampling of one cell, ``x``/``y`` have shape ``(Nx, Ny)``"""

    #: fractional coordinates along the first cell vector
    u: FloatArray
    #: fractional coordinates along the second cell vector, symmetric around zero
    v: FloatArray
    #: x coordinates of the samples (nm)
    x: FloatArray
    #: y coordinates of the samples (nm)
    y: FloatArray
    #: area represented by one sample (nm²)
    weight: float

    @property
    def shape(self) -> Tuple[int, int]:
        """:return: number of samples along both cell vectors, the shape of ``x`` and ``y``"""
        return int(self.u.size), int(self.v.size)


class ModeField(NamedTuple):
    """Electromagnetic field of one mode sampled on a grid of the cell"""

    #: the sampling grid
    grid: Grid
    #: out-of-plane magnetic field
    hz: ComplexArray
    #: in-plane electric field, x component
    ex: ComplexArray
    #: in-plane electric field, y component
    ey: ComplexArray
    #: relative permittivity at the samples
    eps: FloatArray
    #: Bloch wavevector (``2π/a``)
    k: Wavevector
    #: index of the band the mode belongs to
    band_index: int
    #: normalized frequency ``ωa/2πc``
    omega: float
    #: plane-wave coefficients of ``hz`` (scaled together with the sampled fields)
    vector: ComplexArray
    #: the plane waves of ``vector``
    basis: PlaneWaveBasis
    #: the geometry the mode lives in
    geometry: SupercellGeometry


def _reciprocal(geom: SupercellGeometry) -> FloatArray:
    # rows b1, b2 in units of 2π/a: b_i . a_j = δ_ij with a_j in units of a
    cell = np.array(geom.cell_vectors, dtype=float) / geom.lattice.a
    return np.linalg.inv(cell).T


def build_basis(geom: SupercellGeometry, cutoff: float, max_size: int = MAX_BASIS) -> PlaneWaveBasis:
    """
    All reciprocal vectors of the cell within the cutoff, ordered by length then by lattice coordinates.

    :param geom: the cell
    :param cutoff: largest ``|G|`` in units of ``2π/a``
    :param max_size: refuse to build bases larger than this
    :return: the basis, closed under negation
    """
    if not cutoff > 0:
        raise BasisTooSmall("cutoff must be positive", cutoff=cutoff)
    cell = np.array(geom.cell_vectors, dtype=float) / geom.lattice.a
    recip = _reciprocal(geom)
    m_max = int(math.floor(cutoff * float(np.hypot(*cell[0])) + 1e-9))
    n_max = int(math.floor(cutoff * float(np.hypot(*cell[1])) + 1e-9))
    m, n = np.meshgrid(np.arange(-m_max, m_max + 1), np.arange(-n_max, n_max + 1), indexing="ij")
    indices = np.stack([m.ravel(), n.ravel()], axis=-1).astype(np.int64)
    gvecs = indices @ recip
    norm = np.hypot(gvecs[:, 0], gvecs[:, 1])
    keep = norm <= cutoff * (1.0 + 1e-12)
    indices, gvecs, norm = indices[keep], gvecs[keep], norm[keep]
    order = np.lexsort((indices[:, 1], indices[:, 0], np.round(norm, 10)))
    indices, gvecs = indices[order], gvecs[order]
    if len(indices) < 2:
        raise BasisTooSmall("the basis holds only G = 0", cutoff=cutoff)
    if len(indices) > max_size:
        raise BasisTooLarge("plane-wave basis exceeds the cap", size=len(indices), cap=max_size, cutoff=cutoff)
    LOGGER.debug("basis with cutoff %s holds %d plane waves", cutoff, len(indices))
    return PlaneWaveBasis(cutoff=cutoff, indices=indices, gvecs=gvecs, a=geom.lattice.a)


def _epsilon_matrix(geom: SupercellGeometry, basis: PlaneWaveBasis) -> ComplexArray:
    # evaluate ε on the distinct differences G - G' only, then scatter into the matrix
    span = np.abs(basis.indices).max(axis=0) * 2
    dm, dn = np.meshgrid(np.arange(-span[0], span[0] + 1), np.arange(-span[1], span[1] + 1), indexing="ij")
    table_g = np.stack([dm, dn], axis=-1) @ _reciprocal(geom) * (2.0 * math.pi / geom.lattice.a)
    table = epsilon_coefficients(geom, table_g)
    diff = basis.indices[:, None, :] - basis.indices[None, :, :]
    return table[diff[..., 0] + span[0], diff[..., 1] + span[1]]


class TESolver:
    """
    TE plane-wave solver of one geometry and basis.

    The inverse permittivity matrix does not depend on the Bloch wavevector and is computed once. Instances are not
    mutated after construction and can be shared between threads.
    """

    def __init__(self, geom: SupercellGeometry, basis: PlaneWaveBasis) -> None:
        """
        :param geom: the geometry
        :param basis: the plane waves
        """
        self.geometry = geom
        self.basis = basis
        self.inverse_epsilon = self._invert(_epsilon_matrix(geom, basis))

    @staticmethod
    def _invert(epsilon: ComplexArray) -> ComplexArray:
        try:
            values, vectors = eigh(epsilon)
        except LinAlgError as exc:
            raise SingularEpsilon(f"permittivity matrix decomposition failed: {exc}") from exc
        condition = float(np.abs(values).max() / np.abs(values).min()) if values.min() > 0 else math.inf
        if condition > MAX_CONDITION:
            raise SingularEpsilon("permittivity matrix is numerically singular", condition=condition)
        inverse: ComplexArray = (vectors / values) @ vectors.conj().T
        return inverse

    def assemble(self, k: Wavevector) -> PlaneWaveOperator:
        """
        Inverse-rule operator ``M[G, G'] = (k+G).(k+G') η[G, G']``.

        :param k: Bloch wavevector (``2π/a``)
        :return: the operator
        """
        q = self.basis.gvecs + np.asarray(k, dtype=float)
        matrix = (q @ q.T) * self.inverse_epsilon
        matrix = (matrix + matrix.conj().T) / 2.0
        return PlaneWaveOperator(k=(float(k[0]), float(k[1])), basis=self.basis, matrix=matrix)

    def solve(self, k: Wavevector, nbands: int) -> List[Eigenpair]:
        """:return: the lowest ``nbands`` eigenpairs at ``k``"""
        return solve_bands(self.assemble(k), nbands)

    def group_velocity(self, k: Wavevector, pair: Eigenpair) -> float:
        """
        Group velocity ``dω̃/dk̃_x`` of a mode from the Hellmann-Feynman theorem.

        :param k: Bloch wavevector the pair was solved at
        :param pair: the mode
        :return: the group velocity in units of ``c``
        """
        qx = self.basis.gvecs[:, 0] + k[0]
        derivative = (qx[:, None] + qx[None, :]) * self.inverse_epsilon
        slope = float(np.real(pair.vector.conj() @ derivative @ pair.vector))
        return slope / (2.0 * pair.omega) if pair.omega > 0 else 0.0


def assemble_te_operator(geom: SupercellGeometry, basis: PlaneWaveBasis, k: Wavevector) -> PlaneWaveOperator:
    """
    Assemble the TE operator of a geometry at one wavevector.

    :param geom: the geometry
    :param basis: the plane waves
    :param k: Bloch wavevector (``2π/a``)
    :return: the operator
    """
    return TESolver(geom, basis).assemble(k)


def _fix_phase(vector: ComplexArray) -> ComplexArray:
    index = int(np.argmax(np.abs(vector)))
    pivot = vector[index]
    fixed: ComplexArray = vector * (np.conj(pivot) / abs(pivot))
    return fixed


def solve_bands(op: PlaneWaveOperator, nbands: int) -> List[Eigenpair]:
    """
    Lowest eigenpairs of the operator in ascending frequency.

    :param op: the operator
    :param nbands: number of bands to compute
    :return: the eigenpairs, phase fixed so that the largest component is real positive
    """
    size = op.basis.size
    if not 1 <= nbands <= size:
        raise InvalidParameter("nbands must lie within [1, basis size]", nbands=nbands, size=size)
    try:
        values, vectors = eigh(op.matrix, subset_by_index=[0, nbands - 1])
    except (LinAlgError, ValueError) as exc:
        raise EigSolveFailure(f"dense eigensolve failed at k={op.k}: {exc}") from exc
    values = np.where(values < ZERO_EIGENVALUE, 0.0, values)
    result = [Eigenpair(float(math.sqrt(v)), _fix_phase(vectors[:, i])) for i, v in enumerate(values)]
    LOGGER.debug("k=%s lowest frequencies %s", op.k, [round(p.omega, 6) for p in result[:4]])
    return result


def make_grid(geom: SupercellGeometry, spacing: float) -> Grid:
    """
    Uniform grid over one cell, symmetric about ``y = 0`` along the second cell vector.

    :param geom: the cell
    :param spacing: target sample distance (nm)
    :return: the grid
    """
    if not spacing > 0:
        raise InvalidParameter("grid spacing must be positive", spacing=spacing)
    (ax, ay), (bx, by) = geom.cell_vectors
    nx = max(int(math.ceil(math.hypot(ax, ay) / spacing - 1e-9)), 1)
    ny = max(int(math.ceil(math.hypot(bx, by) / spacing - 1e-9)), 2)
    ny += ny % 2
    u = np.arange(nx) / nx
    v = np.arange(-ny // 2, ny // 2) / ny
    uu, vv = np.meshgrid(u, v, indexing="ij")
    x = uu * ax + vv * bx
    y = uu * ay + vv * by
    return Grid(u=u, v=v, x=x, y=y, weight=geom.area / (nx * ny))


def _synthesize(basis: PlaneWaveBasis, coefficients: ComplexArray, grid: Grid) -> ComplexArray:
    # Σ c_mn exp(2πi (m u + n v)) evaluated as two matrix products
    m_min, n_min = basis.indices.min(axis=0)
    m_max, n_max = basis.indices.max(axis=0)
    table = np.zeros((m_max - m_min + 1, n_max - n_min + 1), dtype=complex)
    table[basis.indices[:, 0] - m_min, basis.indices[:, 1] - n_min] = coefficients
    along_u = np.exp(2j * math.pi * np.outer(grid.u, np.arange(m_min, m_max + 1)))
    along_v = np.exp(2j * math.pi * np.outer(np.arange(n_min, n_max + 1), grid.v))
    result: ComplexArray = along_u @ table @ along_v
    return result


def _electric(omega: float, eps: FloatArray, dhx: ComplexArray, dhy: ComplexArray) -> Tuple[ComplexArray, ComplexArray]:
    # E = i/(ω ε) (∂y Hz, -∂x Hz)
    factor = 1j / ((omega if omega > 0 else 1.0) * eps)
    return factor * dhy, -factor * dhx


def reconstruct_field(
    geom: SupercellGeometry,
    basis: PlaneWaveBasis,
    k: Wavevector,
    eigenvector: ComplexArray,
    grid_spacing: float,
    band_index: int = 0,
    omega: float = 1.0,
) -> ModeField:
    """
    Sample ``Hz`` and the in-plane electric field of a mode on a grid of the cell.

    :param geom: the geometry the mode was solved for
    :param basis: the plane waves of the eigenvector
    :param k: Bloch wavevector (``2π/a``)
    :param eigenvector: plane-wave coefficients of ``Hz``
    :param grid_spacing: target sample distance (nm)
    :param band_index: band label stored with the field
    :param omega: normalized frequency of the mode
    :return: the (not normalized) field
    """
    grid = make_grid(geom, grid_spacing)
    scale = 2.0 * math.pi / basis.a
    q = (basis.gvecs + np.asarray(k, dtype=float)) * scale
    bloch = np.exp(1j * scale * (k[0] * grid.x + k[1] * grid.y))
    hz = bloch * _synthesize(basis, eigenvector, grid)
    dhx = bloch * _synthesize(basis, 1j * q[:, 0] * eigenvector, grid)
    dhy = bloch * _synthesize(basis, 1j * q[:, 1] * eigenvector, grid)
    eps = permittivity_at(geom, grid.x, grid.y)
    ex, ey = _electric(omega, eps, dhx, dhy)
    return ModeField(
        grid=grid,
        hz=hz,
        ex=ex,
        ey=ey,
        eps=eps,
        k=(float(k[0]), float(k[1])),
        band_index=band_index,
        omega=omega,
        vector=np.asarray(eigenvector, dtype=complex),
        basis=basis,
        geometry=geom,
    )


def evaluate_field(
    field: ModeField, x: FloatArray, y: FloatArray, chunk: int = 8192
) -> Tuple[ComplexArray, ComplexArray, ComplexArray]:
    """
    Evaluate a mode at arbitrary points directly from its plane-wave coefficients.

    :param field: the mode (its coefficients and scale are used, not its samples)
    :param x: x coordinates (nm)
    :param y: y coordinates (nm), same shape as ``x``
    :param chunk: number of points evaluated per block
    :return: ``Hz``, ``Ex`` and ``Ey`` at the points
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    flat_x, flat_y = x.ravel(), y.ravel()
    scale = 2.0 * math.pi / field.basis.a
    q = (field.basis.gvecs + np.asarray(field.k)) * scale
    hz = np.empty(flat_x.size, dtype=complex)
    dhx, dhy = np.empty_like(hz), np.empty_like(hz)
    for start in range(0, flat_x.size, chunk):
        stop = start + chunk
        waves = np.exp(1j * (np.outer(flat_x[start:stop], q[:, 0]) + np.outer(flat_y[start:stop], q[:, 1])))
        hz[start:stop] = waves @ field.vector
        dhx[start:stop] = waves @ (1j * q[:, 0] * field.vector)
        dhy[start:stop] = waves @ (1j * q[:, 1] * field.vector)
    eps = permittivity_at(field.geometry, flat_x, flat_y)
    ex, ey = _electric(field.omega, eps, dhx, dhy)
    return hz.reshape(x.shape), ex.reshape(x.shape), ey.reshape(x.shape)


__all__ = [
    "MAX_BASIS",
    "PlaneWaveBasis",
    "PlaneWaveOperator",
    "Eigenpair",
    "Grid",
    "ModeField",
    "TESolver",
    "build_basis",
    "assemble_te_operator",
    "solve_bands",
    "make_grid",
    "reconstruct_field",
    "evaluate_field",
]

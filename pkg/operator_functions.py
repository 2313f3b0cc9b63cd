import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse

from config import LOGGER_NAME, boundary_conditions
from support_functions import ConfigError, array_digest

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class GridSpec:
    """
    Cell-centred grid on an axis-parallel box.

    Node i sits at origin + (i + 1/2) * spacing, so a box of shape n has side
    n * spacing and every node owns one cell of volume spacing**d.
    """
    dimension: int
    shape: Tuple[int, ...]
    spacing: float
    origin: Tuple[float, ...]

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f'Grid dimension must be 1, 2 or 3, got {self.dimension}')
        if len(self.shape) != self.dimension or len(self.origin) != self.dimension:
            raise ConfigError('Grid shape and origin must have one entry per dimension.')
        if min(self.shape) < 1:
            raise ConfigError(f'Grid shape must be positive, got {self.shape}')
        if not self.spacing > 0:
            raise ConfigError(f'Grid spacing must be positive, got {self.spacing}')

    @classmethod
    def cube(cls, dimension: int, cells: int, spacing: float = 1.0,
             origin: Union[float, Sequence[float]] = 0.0) -> 'GridSpec':
        if np.isscalar(origin):
            origin = (float(origin),) * dimension
        return cls(dimension, (int(cells),) * dimension, float(spacing), tuple(float(o) for o in origin))

    @classmethod
    def centred_cube(cls, dimension: int, cells: int, spacing: float = 1.0) -> 'GridSpec':
        return cls.cube(dimension, cells, spacing, -0.5 * cells * spacing)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(n * self.spacing for n in self.shape)

    @property
    def is_cube(self) -> bool:
        return len(set(self.shape)) == 1

    @property
    def side(self) -> float:
        if not self.is_cube:
            raise ConfigError(f'Grid {self.shape} is not a cube.')
        return self.shape[0] * self.spacing

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    @property
    def centre(self) -> np.ndarray:
        return np.asarray(self.origin) + 0.5 * np.asarray(self.lengths)

    def nearest_node(self, point) -> np.ndarray:
        """
        Coordinates of the node whose cell contains point.

        Points outside the box snap to the closest boundary cell; a point on a
        cell face belongs to the upper cell, so on an even side the centre maps
        to the node half a spacing above it.
        """
        point = np.asarray(point, dtype=float)
        index = np.floor((point - np.asarray(self.origin)) / self.spacing)
        index = np.clip(index, 0, np.asarray(self.shape) - 1)
        return np.asarray(self.origin) + (index + 0.5) * self.spacing

    def coordinates(self) -> np.ndarray:
        """Node coordinates as an (N, d) array in C order."""
        axes = [self.origin[k] + (np.arange(self.shape[k]) + 0.5) * self.spacing
                for k in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def site_keys(self) -> np.ndarray:
        """Integer keys identifying nodes across grids of equal spacing."""
        return np.rint(2.0 * self.coordinates() / self.spacing).astype(np.int64)

    def subgrid(self, start: Sequence[int], shape: Sequence[int]) -> 'GridSpec':
        start = tuple(int(s) for s in start)
        shape = tuple(int(n) for n in shape)
        if any(s < 0 or s + n > m for s, n, m in zip(start, shape, self.shape)):
            raise ConfigError(f'Subgrid {start}+{shape} does not fit in {self.shape}')
        origin = tuple(o + s * self.spacing for o, s in zip(self.origin, start))
        return GridSpec(self.dimension, shape, self.spacing, origin)

    def slices_of(self, sub: 'GridSpec') -> Tuple[slice, ...]:
        """Index slices of this grid's node array covered by a subgrid."""
        if not np.isclose(sub.spacing, self.spacing):
            raise ConfigError('Subgrid spacing differs from the parent grid.')
        offsets = np.rint((np.asarray(sub.origin) - np.asarray(self.origin)) / self.spacing).astype(int)
        slices = tuple(slice(o, o + n) for o, n in zip(offsets, sub.shape))
        if any(s.start < 0 or s.stop > m for s, m in zip(slices, self.shape)):
            raise ConfigError('Subgrid is not contained in the parent grid.')
        return slices

    def split(self, axis: int = 0, at: Optional[int] = None) -> Tuple['GridSpec', 'GridSpec']:
        """Bisects the box across one axis; the interface has measure zero."""
        n = self.shape[axis]
        at = n // 2 if at is None else int(at)
        if not 0 < at < n:
            raise ConfigError(f'Cannot split {n} cells at {at}')
        first_shape = list(self.shape)
        first_shape[axis] = at
        second_shape = list(self.shape)
        second_shape[axis] = n - at
        second_start = [0] * self.dimension
        second_start[axis] = at
        return (self.subgrid([0] * self.dimension, first_shape),
                self.subgrid(second_start, second_shape))

    def partition(self, cells_per_side: int) -> List['GridSpec']:
        """Decomposes the box into pairwise disjoint cubes of equal size."""
        m = int(cells_per_side)
        if m < 1 or any(n % m for n in self.shape):
            raise ConfigError(f'Shape {self.shape} is not divisible into cubes of {m} cells.')
        counts = [n // m for n in self.shape]
        return [self.subgrid([c * m for c in index], [m] * self.dimension)
                for index in np.ndindex(*counts)]


@dataclass(frozen=True)
class ConstantFieldGauge:
    """Antisymmetric constant field tensor B_jk in the symmetric gauge."""
    field: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        matrix = np.asarray(self.field, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] not in (1, 2, 3):
            raise ConfigError(f'Field tensor must be d x d with d in 1..3, got shape {matrix.shape}')
        if not np.array_equal(matrix, -matrix.T):
            raise ConfigError('Field tensor must be antisymmetric, B_jk = -B_kj.')

    @classmethod
    def zero(cls, dimension: int) -> 'ConstantFieldGauge':
        return cls(tuple((0.0,) * dimension for _ in range(dimension)))

    @classmethod
    def planar(cls, strength: float, dimension: int = 2) -> 'ConstantFieldGauge':
        """Field of the given strength in the (x1, x2) plane, B_12 = strength."""
        if dimension == 1:
            if strength != 0:
                raise ConfigError('A one-dimensional system carries no magnetic field.')
            return cls.zero(1)
        matrix = np.zeros((dimension, dimension))
        matrix[0, 1] = strength
        matrix[1, 0] = -strength
        return cls(tuple(tuple(row) for row in matrix))

    @classmethod
    def from_config(cls, value, dimension: int) -> 'ConstantFieldGauge':
        if value is None:
            return cls.zero(dimension)
        if np.isscalar(value):
            return cls.planar(float(value), dimension)
        gauge = cls(tuple(tuple(float(v) for v in row) for row in value))
        if gauge.dimension != dimension:
            raise ConfigError(f'Field tensor is {gauge.dimension}-dimensional, grid is {dimension}-dimensional.')
        return gauge

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.field, dtype=float)

    @property
    def dimension(self) -> int:
        return len(self.field)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)


def vector_potential(gauge: ConstantFieldGauge, x) -> np.ndarray:
    """
    Symmetric-gauge vector potential A_k(x) = sum_j x_j B_jk / 2.

    Args:
        gauge: the constant field
        x    : a point, or an (N, d) array of points

    Returns:
        np.ndarray: A(x) with the same leading shape as x
    """
    return np.asarray(x, dtype=float) @ gauge.matrix / 2.0


def magnetic_translation_phase(gauge: ConstantFieldGauge, x, y) -> float:
    """Phase Phi_x(y) = sum_jk x_j B_jk (y_k - x_k) / 2 of the magnetic translation by x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(x @ gauge.matrix @ (y - x) / 2.0)


@dataclass(frozen=True)
class HermitianOperator:
    """Sparse discretization of H_{Lambda,X}(A, V); immutable after assembly."""
    matrix: sparse.csr_matrix
    boundary: str
    sites: np.ndarray
    spacing: float
    grid: Optional[GridSpec] = None
    provenance: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def volume(self) -> float:
        return self.size * self.spacing ** self.sites.shape[1]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def coordinate_frame(self) -> pd.DataFrame:
        """Non-zero entries as (row, col, re, im), sorted by row then column."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return pd.DataFrame({'row': coo.row[order], 'col': coo.col[order],
                             're': coo.data.real[order], 'im': coo.data.imag[order]})


def bonds(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nearest-neighbour bonds x -> x + h e_k inside the box.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: tail indices, head indices, axis of each bond
    """
    index = np.arange(grid.n_nodes).reshape(grid.shape)
    tails, heads, axes = [], [], []
    for k in range(grid.dimension):
        # Pair every node with its upper neighbour along axis k
        lower = [slice(None)] * grid.dimension
        upper = [slice(None)] * grid.dimension
        lower[k] = slice(0, -1)
        upper[k] = slice(1, None)
        tail = index[tuple(lower)].ravel()
        tails.append(tail)
        heads.append(index[tuple(upper)].ravel())
        axes.append(np.full(tail.size, k))
    return np.concatenate(tails), np.concatenate(heads), np.concatenate(axes)


def peierls_phases(grid: GridSpec, gauge: ConstantFieldGauge) -> np.ndarray:
    """Link phases h * A_k(midpoint) of every bond (midpoint rule for the line integral)."""
    if gauge.dimension != grid.dimension:
        raise ConfigError(f'Gauge is {gauge.dimension}-dimensional, grid is {grid.dimension}-dimensional.')
    tails, heads, axes = bonds(grid)
    if gauge.is_zero:
        return np.zeros(tails.size)
    coords = grid.coordinates()
    midpoints = 0.5 * (coords[tails] + coords[heads])
    potential = vector_potential(gauge, midpoints)
    return grid.spacing * potential[np.arange(tails.size), axes]


def pure_gauge_phases(grid: GridSpec, chi: np.ndarray) -> np.ndarray:
    """Link phases chi_tail - chi_head of the gauge function chi (zero field)."""
    tails, heads, _ = bonds(grid)
    chi = np.asarray(chi, dtype=float).ravel()
    return chi[tails] - chi[heads]


def _potential_values(grid: GridSpec, potential) -> np.ndarray:
    if potential is None:
        return np.zeros(grid.n_nodes)
    values = getattr(potential, 'values', potential)
    values = np.asarray(values, dtype=float)
    if values.size != grid.n_nodes:
        raise ConfigError(f'Potential has {values.size} values, grid has {grid.n_nodes} nodes.')
    if not np.all(np.isfinite(values)):
        raise ConfigError('Potential contains NaN or Inf values.')
    return values.ravel()


def assemble_with_phases(grid: GridSpec, boundary: str, phases: np.ndarray, potential=None,
                         provenance: Optional[dict] = None) -> HermitianOperator:
    """
    Assembles the operator from explicit link phases.

    Each bond contributes -(1/2h^2) exp(-i phase) at (tail, head) and its
    conjugate at (head, tail). The Neumann diagonal counts interior bonds
    (reflecting wall); the Dirichlet diagonal adds two units per missing
    bond, which puts the wall on the cell face (mirror ghost node at
    distance h/2). Two unit cells in 1-D therefore give
    [[3/2, -1/2], [-1/2, 3/2]], not the node-wall stencil [[1, -1/2], [-1/2, 1]]
    with a constant 2d diagonal. Only the face wall keeps H_D below the
    operator split along any interior face, and its 1-D spectrum is
    n^2 (1 - cos(pi k / n)) for L = 1.

    Raises:
        ConfigError: for an unknown boundary condition or an invalid potential
    """
    if boundary not in boundary_conditions:
        raise ConfigError(f'Boundary condition must be one of {boundary_conditions}, got {boundary!r}')
    values = _potential_values(grid, potential)
    tails, heads, _ = bonds(grid)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != tails.shape:
        raise ConfigError(f'Expected {tails.size} link phases, got {phases.size}')

    scale = 1.0 / (2.0 * grid.spacing ** 2)
    hopping = -scale * np.exp(-1j * phases)
    degree = np.bincount(tails, minlength=grid.n_nodes) + np.bincount(heads, minlength=grid.n_nodes)
    if boundary == 'N':
        kinetic = scale * degree
    else:
        # Face wall: one extra 1/h^2 per missing neighbour
        kinetic = scale * (4 * grid.dimension - degree)
    diagonal = kinetic + values

    # Diagonal, then each bond in both directions; the conjugate keeps H Hermitian bit for bit
    n = grid.n_nodes
    rows = np.concatenate([np.arange(n), tails, heads])
    cols = np.concatenate([np.arange(n), heads, tails])
    data = np.concatenate([diagonal.astype(complex), hopping, np.conj(hopping)])
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    info = {'potential_sha256': array_digest(values)}
    info.update(provenance or {})
    return HermitianOperator(matrix=matrix, boundary=boundary, sites=grid.site_keys(),
                             spacing=grid.spacing, grid=grid, provenance=info)


def assemble(grid: GridSpec, boundary: str, gauge: Optional[ConstantFieldGauge] = None,
             potential=None) -> HermitianOperator:
    """
    Discretized finite-volume magnetic Schroedinger operator H_{Lambda,X}(A, V).

    Args:
        grid     : the box and its discretization
        boundary : 'D' or 'N'
        gauge    : constant field in the symmetric gauge (zero field if None)
        potential: FieldRealization, array of node values, or None for V = 0

    Returns:
        HermitianOperator: the assembled sparse operator
    """
    gauge = ConstantFieldGauge.zero(grid.dimension) if gauge is None else gauge
    phases = peierls_phases(grid, gauge)
    operator = assemble_with_phases(grid, boundary, phases, potential,
                                    provenance={'field': gauge.matrix.tolist()})
    logger.debug(f'Assembled {boundary} operator on {grid.shape} nodes, spacing {grid.spacing}')
    return operator


def gauge_transform(operator: HermitianOperator, chi: np.ndarray) -> HermitianOperator:
    """Unitary conjugation U* H U with U = diag(exp(i chi)); leaves the spectrum unchanged."""
    chi = np.asarray(chi, dtype=float).ravel()
    if chi.size != operator.size:
        raise ConfigError(f'Gauge function has {chi.size} values, operator has {operator.size} nodes.')
    coo = operator.matrix.tocoo()
    data = coo.data * np.exp(1j * (chi[coo.col] - chi[coo.row]))
    matrix = sparse.coo_matrix((data, (coo.row, coo.col)), shape=coo.shape).tocsr()
    return HermitianOperator(matrix=matrix, boundary=operator.boundary, sites=operator.sites,
                             spacing=operator.spacing, grid=operator.grid,
                             provenance=dict(operator.provenance, gauge_transformed=True))


def decouple(first: HermitianOperator, second: HermitianOperator) -> HermitianOperator:
    """
    Direct sum of operators on disjoint node sets.

    Raises:
        ConfigError: if the node sets overlap, spacings differ, or the boundary conditions differ
    """
    if not np.isclose(first.spacing, second.spacing):
        raise ConfigError('Cannot decouple operators on grids of different spacing.')
    if first.boundary != second.boundary:
        raise ConfigError('Cannot decouple operators with different boundary conditions.')
    if first.sites.shape[1] != second.sites.shape[1]:
        raise ConfigError('Cannot decouple operators of different dimension.')
    shared = set(map(tuple, first.sites)) & set(map(tuple, second.sites))
    if shared:
        raise ConfigError(f'Node sets overlap in {len(shared)} nodes.')
    matrix = sparse.block_diag([first.matrix, second.matrix], format='csr')
    return HermitianOperator(matrix=matrix, boundary=first.boundary,
                             sites=np.vstack([first.sites, second.sites]), spacing=first.spacing,
                             grid=None, provenance={'parts': [first.provenance, second.provenance]})


def decouple_all(operators: Sequence[HermitianOperator]) -> HermitianOperator:
    """
    Direct sum of several operators on pairwise disjoint node sets.

    Args:
        operators: at least one operator, all with the same spacing

    Returns:
        HermitianOperator: the block-diagonal operator, blocks in the given order

    Raises:
        ConfigError: for an empty list, overlapping node sets or mismatched spacings or boundaries
    """
    if not operators:
        raise ConfigError('Nothing to decouple: give at least one operator.')
    result = operators[0]
    for operator in operators[1:]:
        result = decouple(result, operator)
    return result

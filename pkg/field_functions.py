import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial.hermite_e import hermegauss
from scipy import fft
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import pdist, squareform

from config import (
    EMBEDDING_PADDING_TAUS,
    GAUSS_DENSE_NODES,
    LOGGER_NAME,
    PSD_TOL,
    QUADRATURE_WEIGHT_TOL,
)
from operator_functions import GridSpec
from support_functions import ConfigError, ResourceLimitError, SpectralConditionError

logger = logging.getLogger(LOGGER_NAME)

HERMITE_NODES = 48


# ---------------------------------------------------------------------------
# Single-site profiles and coupling laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CubeProfile:
    """u0 = height on the unit cell Lambda(0) = [-1/2, 1/2)^d, zero elsewhere."""
    height: float = 1.0

    def __post_init__(self):
        if not self.height > 0:
            raise ConfigError(f'Cube profile height must be positive, got {self.height}')

    @property
    def support_radius(self) -> float:
        return 0.5

    @property
    def sup_norm(self) -> float:
        return self.height

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        inside = np.all(np.floor(points + 0.5) == 0, axis=1)
        return np.where(inside, self.height, 0.0)

    def unit_cell_bounds(self, dimension: int) -> Tuple[float, float]:
        return self.height, self.height


@dataclass(frozen=True)
class TabulatedProfile:
    """
    Piecewise-constant u0 on a box of cells centred at the origin.

    Cell i along each axis covers [-shape*spacing/2 + i*spacing, ... + spacing).
    """
    spacing: float
    shape: Tuple[int, ...]
    data: Tuple[float, ...]

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigError(f'Profile spacing must be positive, got {self.spacing}')
        if len(self.data) != int(np.prod(self.shape)):
            raise ConfigError('Profile data does not match its shape.')
        if min(self.data) < 0 or not all(math.isfinite(v) for v in self.data):
            raise ConfigError('Single-site profiles must be finite and nonnegative.')

    @classmethod
    def from_array(cls, spacing: float, values) -> 'TabulatedProfile':
        array = np.asarray(values, dtype=float)
        return cls(float(spacing), tuple(array.shape), tuple(array.ravel().tolist()))

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.data).reshape(self.shape)

    @property
    def half_widths(self) -> np.ndarray:
        return 0.5 * self.spacing * np.asarray(self.shape)

    @property
    def support_radius(self) -> float:
        return float(self.half_widths.max())

    @property
    def sup_norm(self) -> float:
        return max(self.data)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        index = np.floor((points + self.half_widths) / self.spacing).astype(int)
        inside = np.all((index >= 0) & (index < np.asarray(self.shape)), axis=1)
        result = np.zeros(points.shape[0])
        result[inside] = self.values[tuple(index[inside].T)]
        return result

    def unit_cell_bounds(self, dimension: int) -> Tuple[float, float]:
        axes = [(np.arange(n) + 0.5) * self.spacing - w for n, w in zip(self.shape, self.half_widths)]
        mesh = np.meshgrid(*axes, indexing='ij')
        centres = np.stack([m.ravel() for m in mesh], axis=1)
        in_cell = np.all(np.floor(centres + 0.5) == 0, axis=1)
        if not np.any(in_cell):
            return 0.0, 0.0
        inside = self.values.ravel()[in_cell]
        return float(inside.min()), float(inside.max())


@dataclass(frozen=True)
class UniformDensity:
    """Couplings uniformly distributed on support, density bound gmax = 1/|support|."""
    support: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        low, high = self.support
        if low < 0 or not high > low:
            raise ConfigError(f'Uniform support must be an interval in [0, inf), got {self.support}')

    @property
    def density_sup(self) -> float:
        return 1.0 / (self.support[1] - self.support[0])

    @property
    def nonnegative(self) -> bool:
        return True

    @property
    def tag(self) -> str:
        return 'uniform'

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(*self.support))


@dataclass(frozen=True)
class LaplaceCoupling:
    """Couplings with density exp(-|lambda|/alpha) / (2 alpha)."""
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError(f'Laplace scale must be positive, got {self.scale}')

    @property
    def density_sup(self) -> float:
        return 1.0 / (2.0 * self.scale)

    @property
    def nonnegative(self) -> bool:
        return False

    @property
    def tag(self) -> str:
        return 'laplace'

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.laplace(0.0, self.scale))


@dataclass(frozen=True)
class FixedCoupling:
    """Degenerate law: every coupling equals value (no density)."""
    value: float = 0.0

    @property
    def density_sup(self) -> float:
        return math.inf

    @property
    def nonnegative(self) -> bool:
        return self.value >= 0

    @property
    def tag(self) -> str:
        return 'fixed'

    def draw(self, rng: np.random.Generator) -> float:
        return float(self.value)


Profile = Union[CubeProfile, TabulatedProfile]
CouplingLaw = Union[UniformDensity, LaplaceCoupling, FixedCoupling]


@dataclass(frozen=True)
class AlloyModel:
    """Alloy-type field sum_j lambda_j u0(x - j) over the integer lattice."""
    dimension: int
    profile: Profile = field(default_factory=CubeProfile)
    coupling: CouplingLaw = field(default_factory=UniformDensity)
    v1: Optional[float] = None
    v2: Optional[float] = None

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f'Alloy dimension must be 1, 2 or 3, got {self.dimension}')
        if isinstance(self.profile, TabulatedProfile) and len(self.profile.shape) != self.dimension:
            raise ConfigError('Tabulated profile dimension differs from the model dimension.')
        low, high = self.profile.unit_cell_bounds(self.dimension)
        v1 = low if self.v1 is None else self.v1
        v2 = high if self.v2 is None else self.v2
        if not 0 < v1 <= v2:
            raise ConfigError(f'Single-site bounds need 0 < v1 <= v2, got v1={v1}, v2={v2}')
        if v1 > low * (1 + 1e-12) or high > v2 * (1 + 1e-12):
            raise ConfigError(f'Profile range [{low}, {high}] on the unit cell violates v1={v1}, v2={v2}')
        object.__setattr__(self, 'v1', float(v1))
        object.__setattr__(self, 'v2', float(v2))

    @property
    def tag(self) -> str:
        return f'alloy:{self.coupling.tag}'

    def sites_for(self, grid: GridSpec) -> np.ndarray:
        """Lattice sites whose single-site support meets the box, in C order."""
        radius = self.profile.support_radius
        ranges = []
        for k in range(grid.dimension):
            low = grid.origin[k]
            high = low + grid.lengths[k]
            first = math.floor(low - radius) + 1
            last = math.ceil(high + radius) - 1
            ranges.append(np.arange(first, last + 1))
        mesh = np.meshgrid(*ranges, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1).astype(np.int64)

    def site_profile(self, grid: GridSpec, site: Sequence[int]) -> np.ndarray:
        """u0(x - j) at the grid nodes, shaped like the grid."""
        values = self.profile(grid.coordinates() - np.asarray(site, dtype=float))
        return values.reshape(grid.shape)


def alloy_grid(dimension: int, side: int, refinement: int = 1) -> GridSpec:
    """
    Grid on a union of side^d unit cells Lambda(j), j in {0..side-1}^d.

    Args:
        dimension : 1, 2 or 3
        side      : number of unit cells per axis
        refinement: nodes per unit length (spacing 1/refinement)

    Returns:
        GridSpec: the aligned grid
    """
    return GridSpec.cube(dimension, side * refinement, 1.0 / refinement, -0.5)


def _check_unit_cell_aligned(grid: GridSpec) -> None:
    for length, origin in zip(grid.lengths, grid.origin):
        if not math.isclose(length, round(length), abs_tol=1e-9):
            raise ConfigError(f'Alloy grids need an integer side length, got {length}')
        if not math.isclose(origin + 0.5, round(origin + 0.5), abs_tol=1e-9):
            raise ConfigError(f'Alloy grids need origin = -1/2 mod 1, got {origin}')
    inverse = 1.0 / grid.spacing
    if not math.isclose(inverse, round(inverse), abs_tol=1e-9):
        raise ConfigError(f'Alloy grids need 1/spacing to be an integer, got spacing {grid.spacing}')


def _zigzag(value: int) -> int:
    return 2 * value if value >= 0 else -2 * value - 1


def site_coupling(law: CouplingLaw, seed: int, site: Sequence[int]) -> float:
    """Coupling of one lattice site from its own stream keyed by (seed, site)."""
    key = tuple(_zigzag(int(j)) for j in site)
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(len(key),) + key)
    return law.draw(np.random.default_rng(sequence))


# ---------------------------------------------------------------------------
# Realizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldRealization:
    """One potential realization on the grid nodes; values are read-only."""
    grid: GridSpec
    values: np.ndarray
    seed: int
    model_tag: str
    sites: Optional[np.ndarray] = None
    couplings: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ConfigError('Field realization contains non-finite values.')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def coupling_of(self, site: Sequence[int]) -> float:
        if self.sites is None:
            raise ConfigError(f'Realization {self.model_tag} carries no lattice couplings.')
        matches = np.flatnonzero(np.all(self.sites == np.asarray(site), axis=1))
        if matches.size == 0:
            raise ConfigError(f'Site {tuple(site)} is not in the lattice of this realization.')
        return float(self.couplings[matches[0]])

    def frame(self) -> pd.DataFrame:
        coords = self.grid.coordinates()
        columns = {f'x{k + 1}': coords[:, k] for k in range(self.grid.dimension)}
        columns['value'] = self.values.ravel()
        return pd.DataFrame(columns)


def zero_field(grid: GridSpec) -> FieldRealization:
    return FieldRealization(grid, np.zeros(grid.shape), 0, 'none')


def alloy_field(model: AlloyModel, grid: GridSpec, couplings: Mapping[Tuple[int, ...], float],
                seed: int = 0) -> FieldRealization:
    """Alloy field with explicitly given couplings; unlisted sites carry zero."""
    sites = np.array([tuple(int(j) for j in site) for site in couplings], dtype=np.int64)
    sites = sites.reshape(-1, grid.dimension)
    strengths = np.array([float(c) for c in couplings.values()])
    values = np.zeros(grid.shape)
    for site, strength in zip(sites, strengths):
        values = values + strength * model.site_profile(grid, site)
    return FieldRealization(grid, values, seed, model.tag, sites, strengths)


def sample_alloy(model: AlloyModel, grid: GridSpec, seed: int) -> FieldRealization:
    """
    Samples the alloy-type field on a unit-cell-aligned grid.

    Args:
        model: the alloy model
        grid : grid covering a union of unit cells (see alloy_grid)
        seed : nonnegative integer; coupling j is drawn from the stream (seed, j)

    Returns:
        FieldRealization: the realization, with its sites and couplings

    Raises:
        ConfigError: if the grid is not aligned with the unit cells
    """
    if grid.dimension != model.dimension:
        raise ConfigError(f'Model is {model.dimension}-dimensional, grid is {grid.dimension}-dimensional.')
    _check_unit_cell_aligned(grid)
    sites = model.sites_for(grid)
    couplings = {tuple(site): site_coupling(model.coupling, seed, site) for site in sites}
    return alloy_field(model, grid, couplings, seed)


@dataclass(frozen=True)
class CovarianceModel:
    """
    Stationary covariance C(x) of a zero-mean Gaussian field.

    Either the builtin shape C(0) exp(-|x|^2 / (2 tau^2)) (tau may be inf) or a
    radial table (r, C(r)) with r starting at 0; beyond the table C = 0.
    """
    c0: float
    dimension: int
    tau: Optional[float] = None
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def __post_init__(self):
        if not self.c0 > 0:
            raise ConfigError(f'C(0) must be positive, got {self.c0}')
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f'Covariance dimension must be 1, 2 or 3, got {self.dimension}')
        if (self.tau is None) == (self.table is None):
            raise ConfigError('Give exactly one of tau (builtin shape) or a covariance table.')
        if self.tau is not None and not self.tau > 0:
            raise ConfigError(f'Correlation length must be positive, got {self.tau}')
        if self.table is not None:
            radii, values = (np.asarray(part, dtype=float) for part in self.table)
            if radii.size < 4 or radii.size != values.size or radii[0] != 0 or np.any(np.diff(radii) <= 0):
                raise ConfigError('Covariance table needs at least 4 increasing radii starting at 0.')
            if not math.isclose(values[0], self.c0, rel_tol=1e-12):
                raise ConfigError(f'Covariance table starts at {values[0]}, but C(0) = {self.c0}')

    @classmethod
    def tabulate(cls, c0: float, dimension: int, radii, values) -> 'CovarianceModel':
        return cls(float(c0), dimension,
                   table=(tuple(float(r) for r in radii), tuple(float(c) for c in values)))

    @property
    def builtin(self) -> bool:
        return self.tau is not None

    @property
    def tag(self) -> str:
        return 'gaussian'

    @property
    def reach(self) -> float:
        """Distance beyond which the covariance is negligible."""
        if self.builtin:
            return EMBEDDING_PADDING_TAUS * self.tau
        return self.table[0][-1]

    def covariance(self, radius) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        if self.builtin:
            return self.c0 * np.exp(-radius ** 2 / (2.0 * self.tau ** 2))
        radii = self.table[0]
        return np.where(radius <= radii[-1], _radial_spline(self.table)(np.minimum(radius, radii[-1])), 0.0)


@lru_cache(maxsize=16)
def _radial_spline(table) -> CubicSpline:
    radii, values = table
    return CubicSpline(radii, values, bc_type=((1, 0.0), 'natural'))


@lru_cache(maxsize=4)
def _dense_factor(model: CovarianceModel, grid: GridSpec) -> np.ndarray:
    coords = grid.coordinates()
    matrix = model.covariance(squareform(pdist(coords)))
    eigenvalues, vectors = np.linalg.eigh(matrix)
    floor = PSD_TOL * max(eigenvalues.max(), model.c0)
    if eigenvalues.min() < -floor:
        raise SpectralConditionError(
            f'Covariance matrix is not positive semidefinite: most negative eigenvalue {eigenvalues.min():.6g}')
    eigenvalues = np.where(eigenvalues > floor, eigenvalues, 0.0)
    logger.info(f'Dense covariance factor on {grid.n_nodes} nodes, rank {int(np.count_nonzero(eigenvalues))}')
    return vectors * np.sqrt(eigenvalues)


@lru_cache(maxsize=4)
def _embedding_amplitudes(model: CovarianceModel, grid: GridSpec) -> np.ndarray:
    if not math.isfinite(model.reach):
        raise ResourceLimitError('Spectral embedding needs a finite correlation reach; use a smaller grid.')
    padding = math.ceil(model.reach / grid.spacing)
    shape = tuple(fft.next_fast_len(n + padding) for n in grid.shape)
    axes = []
    for m in shape:
        index = np.arange(m)
        axes.append(grid.spacing * np.minimum(index, m - index))
    mesh = np.meshgrid(*axes, indexing='ij')
    radius = np.sqrt(sum(axis ** 2 for axis in mesh))
    spectrum = fft.fftn(model.covariance(radius)).real
    if spectrum.min() < -PSD_TOL * spectrum.max():
        logger.warning(f'Clipping negative embedding eigenvalue {spectrum.min():.3g}')
    logger.info(f'Spectral embedding of {grid.shape} on torus {shape}')
    return np.sqrt(np.clip(spectrum, 0.0, None) / spectrum.size)


def sample_gaussian(model: CovarianceModel, grid: GridSpec, seed: int) -> FieldRealization:
    """
    Samples the zero-mean stationary Gaussian field at the grid nodes.

    Up to GAUSS_DENSE_NODES nodes the covariance matrix is factorized densely,
    above that the field is the restriction of a periodic field on a torus
    padded by the covariance reach.

    Raises:
        SpectralConditionError: if a tabulated covariance is not positive semidefinite
    """
    if grid.dimension != model.dimension:
        raise ConfigError(f'Model is {model.dimension}-dimensional, grid is {grid.dimension}-dimensional.')
    rng = np.random.default_rng(seed)
    if grid.n_nodes <= GAUSS_DENSE_NODES:
        factor = _dense_factor(model, grid)
        values = factor @ rng.standard_normal(grid.n_nodes)
    else:
        amplitudes = _embedding_amplitudes(model, grid)
        noise = rng.standard_normal(amplitudes.shape) + 1j * rng.standard_normal(amplitudes.shape)
        periodic = fft.fftn(amplitudes * noise).real
        values = periodic[tuple(slice(0, n) for n in grid.shape)]
    return FieldRealization(grid, values.reshape(grid.shape), seed, model.tag)


def sample_field(model, grid: GridSpec, seed: int) -> FieldRealization:
    """Dispatches on the model type; None means the zero potential."""
    if model is None:
        return zero_field(grid)
    if isinstance(model, AlloyModel):
        return sample_alloy(model, grid, seed)
    if isinstance(model, CovarianceModel):
        return sample_gaussian(model, grid, seed)
    raise ConfigError(f'Unknown field model {type(model).__name__}')


def restrict_field(realization: FieldRealization, subgrid: GridSpec) -> FieldRealization:
    values = realization.values[realization.grid.slices_of(subgrid)]
    return FieldRealization(subgrid, values, realization.seed, realization.model_tag,
                            realization.sites, realization.couplings)


# ---------------------------------------------------------------------------
# Gaussian mollifier profile
# ---------------------------------------------------------------------------

def mollifier_normalization(model: CovarianceModel, s: float) -> float:
    """kappa_s with kappa_s^2 * E[C(Y - Y')] = C(0) for Y, Y' ~ N(0, s^2 I)."""
    if s < 0:
        raise ConfigError(f'Mollifier width must be nonnegative, got {s}')
    if s == 0:
        return 1.0
    if model.builtin:
        ratio = 1.0 + 2.0 * s ** 2 / model.tau ** 2
        mean_covariance = model.c0 * ratio ** (-model.dimension / 2.0)
    else:
        mean_covariance = _hermite_expectation(model, np.zeros(model.dimension), math.sqrt(2.0) * s)
    if not mean_covariance > np.finfo(float).tiny or not math.isfinite(mean_covariance):
        raise ConfigError(f'Mollifier width s={s} is too large: its normalization underflows.')
    return math.sqrt(model.c0 / mean_covariance)


def _hermite_expectation(model: CovarianceModel, x: np.ndarray, width: float) -> float:
    """E[C(x - Y)] for Y ~ N(0, width^2 I) by tensor Gauss-Hermite quadrature."""
    nodes, weights = hermegauss(HERMITE_NODES)
    weights = weights / math.sqrt(2.0 * math.pi)
    mesh = np.meshgrid(*([nodes] * model.dimension), indexing='ij')
    offsets = width * np.stack([m.ravel() for m in mesh], axis=1)
    weight_mesh = np.meshgrid(*([weights] * model.dimension), indexing='ij')
    tensor_weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=1), axis=1)
    radius = np.linalg.norm(np.asarray(x, dtype=float) - offsets, axis=1)
    return float(tensor_weights @ model.covariance(radius))


def gaussian_u_profile(model: CovarianceModel, s: float, x) -> Union[float, np.ndarray]:
    """
    Single-site direction u(x) = C(0)^(-1/2) * integral of mu_s(dy) C(x - y).

    Args:
        model: the covariance model
        s    : mollifier width (0 means a Dirac mass at the origin)
        x    : a point, or an (N, d) array of points

    Returns:
        float or np.ndarray: u at the point(s)
    """
    points = np.atleast_2d(np.asarray(x, dtype=float))
    squared = np.sum(points ** 2, axis=1)
    kappa = mollifier_normalization(model, s)
    if s == 0:
        values = model.covariance(np.sqrt(squared)) / math.sqrt(model.c0)
    elif model.builtin:
        spread = model.tau ** 2 + s ** 2
        values = (math.sqrt(model.c0) * kappa * (model.tau ** 2 / spread) ** (model.dimension / 2.0)
                  * np.exp(-squared / (2.0 * spread)))
    else:
        values = np.array([_hermite_expectation(model, p, s) for p in points]) * kappa / math.sqrt(model.c0)
    if np.ndim(x) <= 1:
        return float(values[0])
    return values


@dataclass(frozen=True, eq=False)
class OneParameterDecomposition:
    """V = U + lambda * u with lambda of density kind density_kind."""
    background: FieldRealization
    coupling: float
    profile: np.ndarray
    density_kind: str
    density_sup: float

    def reconstruct(self) -> np.ndarray:
        return self.background.values + self.coupling * self.profile


def decompose_alloy(realization: FieldRealization, model: AlloyModel,
                    site: Sequence[int]) -> OneParameterDecomposition:
    """
    Splits off the coupling of one lattice site: U = V - lambda_j u0(. - j).

    Raises:
        ConfigError: if the site is not in the realization's lattice
    """
    coupling = realization.coupling_of(site)
    profile = model.site_profile(realization.grid, site)
    background = FieldRealization(realization.grid, realization.values - coupling * profile,
                                  realization.seed, realization.model_tag)
    return OneParameterDecomposition(background, coupling, profile, model.coupling.tag,
                                     model.coupling.density_sup)


def mollifier_weights(grid: GridSpec, s: float, centre=None) -> np.ndarray:
    """
    Quadrature weights of the mollifier mu_s / kappa_s at the grid nodes.

    Raises:
        ConfigError: if the weights do not sum to 1 within QUADRATURE_WEIGHT_TOL
    """
    centre = np.zeros(grid.dimension) if centre is None else np.asarray(centre, dtype=float)
    offsets = grid.coordinates() - centre
    if s == 0:
        hits = np.flatnonzero(np.all(np.abs(offsets) <= 1e-9 * grid.spacing, axis=1))
        if hits.size != 1:
            raise ConfigError(f'A Dirac mollifier needs a grid node at {centre.tolist()}')
        weights = np.zeros(grid.n_nodes)
        weights[hits[0]] = 1.0
        return weights
    squared = np.sum(offsets ** 2, axis=1)
    weights = np.exp(-squared / (2.0 * s ** 2)) * (grid.spacing / (math.sqrt(2.0 * math.pi) * s)) ** grid.dimension
    if abs(weights.sum() - 1.0) > QUADRATURE_WEIGHT_TOL:
        raise ConfigError(f'Mollifier weights sum to {weights.sum():.12g}; refine the grid or enlarge the box for s={s}')
    return weights


def decompose_gaussian(model: CovarianceModel, realization: FieldRealization, s: float,
                       centre=None) -> OneParameterDecomposition:
    """
    Gaussian decomposition: lambda = C(0)^(-1/2) * sum_x mu_s(x) V(x), standard normal.

    Args:
        model      : covariance model of the realization
        realization: the sampled field
        s          : mollifier width
        centre     : mollifier centre (defaults to the origin)

    Returns:
        OneParameterDecomposition: background U = V - lambda u, profile u
    """
    grid = realization.grid
    centre = np.zeros(grid.dimension) if centre is None else np.asarray(centre, dtype=float)
    weights = mollifier_weights(grid, s, centre)
    kappa = mollifier_normalization(model, s)
    coupling = float(kappa * weights @ realization.values.ravel() / math.sqrt(model.c0))
    profile = np.asarray(gaussian_u_profile(model, s, grid.coordinates() - centre)).reshape(grid.shape)
    background = FieldRealization(grid, realization.values - coupling * profile,
                                  realization.seed, realization.model_tag)
    return OneParameterDecomposition(background, coupling, profile, 'normal', 1.0 / math.sqrt(2.0 * math.pi))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def model_from_config(section: Optional[Dict], dimension: int):
    """
    Builds the field model described by the 'field' section of a run config.

    Returns:
        AlloyModel, CovarianceModel, or None for kind 'none'
    """
    if not section or section['kind'] == 'none':
        return None
    if section['kind'] == 'alloy':
        single_site = section.get('single_site', 'cube')
        if single_site == 'cube':
            profile = CubeProfile(float(section.get('height', 1.0)))
        else:
            profile = TabulatedProfile.from_array(single_site['spacing'], single_site['values'])
        law = section.get('law', 'uniform')
        if law == 'uniform':
            if 'support' in section:
                coupling = UniformDensity(tuple(float(v) for v in section['support']))
            else:
                coupling = UniformDensity((0.0, 1.0 / float(section.get('gmax', 1.0))))
            if 'gmax' in section and not math.isclose(section['gmax'], coupling.density_sup, rel_tol=1e-9):
                raise ConfigError(f'gmax={section["gmax"]} does not match a uniform density on {coupling.support}')
        elif law == 'laplace':
            if 'alpha' not in section:
                raise ConfigError('The Laplace law needs a scale alpha.')
            coupling = LaplaceCoupling(float(section['alpha']))
        else:
            coupling = FixedCoupling(float(section.get('value', 0.0)))
        return AlloyModel(dimension, profile, coupling, section.get('v1'), section.get('v2'))
    if 'c0' not in section:
        raise ConfigError('A Gaussian field needs c0.')
    if 'covariance_table' in section:
        table = section['covariance_table']
        return CovarianceModel.tabulate(section['c0'], dimension, table['r'], table['c'])
    return CovarianceModel(float(section['c0']), dimension, tau=float(section.get('tau', math.inf)))

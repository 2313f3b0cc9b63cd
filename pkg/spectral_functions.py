import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy import linalg, sparse
from scipy.integrate import quad_vec
from scipy.special import gamma

from config import DENSE_LIMIT, LOGGER_NAME, QUADRATURE_TOL, RESIDUAL_FACTOR
from operator_functions import HermitianOperator
from support_functions import ConfigError, ResourceLimitError, SpectralConditionError

logger = logging.getLogger(LOGGER_NAME)

# exp(709) is the largest finite double exponential
_EXP_LIMIT = 700.0


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with multiplicity, optionally with eigenvectors as columns."""
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    residual: float = 0.0

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def minimum(self) -> float:
        return float(self.eigenvalues[0])

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({'index': np.arange(self.size), 'eigenvalue': self.eigenvalues})


@dataclass(frozen=True)
class EnergyInterval:
    lower: float
    upper: float
    closed_lower: bool = True
    closed_upper: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigError(f'Energy interval needs lower < upper, got [{self.lower}, {self.upper}]')

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def sup(self) -> float:
        return self.upper

    def contains(self, energies) -> np.ndarray:
        energies = np.asarray(energies, dtype=float)
        above = energies >= self.lower if self.closed_lower else energies > self.lower
        below = energies <= self.upper if self.closed_upper else energies < self.upper
        return above & below

    def describe(self) -> str:
        left = '[' if self.closed_lower else '('
        right = ']' if self.closed_upper else ')'
        return f'{left}{self.lower:g}, {self.upper:g}{right}'


@dataclass(frozen=True)
class CountingResult:
    count: int
    volume: float

    @property
    def per_volume(self) -> float:
        return self.count / self.volume


def dense_matrix(operator) -> np.ndarray:
    if isinstance(operator, HermitianOperator):
        return operator.dense()
    if sparse.issparse(operator):
        return operator.toarray()
    return np.atleast_2d(np.asarray(operator))


def eigenvalues(operator, vectors: bool = False) -> Spectrum:
    """
    Full spectrum of a Hermitian operator by dense diagonalization.

    Args:
        operator: HermitianOperator, sparse matrix or array
        vectors : also return eigenvectors and their residual bound

    Returns:
        Spectrum: ascending eigenvalues with multiplicity

    Raises:
        ResourceLimitError: if the operator exceeds DENSE_LIMIT nodes
    """
    size = operator.shape[0] if not isinstance(operator, HermitianOperator) else operator.size
    if size > DENSE_LIMIT:
        raise ResourceLimitError(
            f'Operator with {size} nodes exceeds the dense limit {DENSE_LIMIT}; '
            f'decouple the box into smaller cubes or coarsen the grid.')
    matrix = dense_matrix(operator)
    if not vectors:
        return Spectrum(linalg.eigh(matrix, eigvals_only=True))
    values, basis = linalg.eigh(matrix)
    residual = float(np.linalg.norm(matrix @ basis - basis * values, axis=0).max())
    allowed = RESIDUAL_FACTOR * max(np.abs(matrix).max(), 1.0) * size
    if residual > allowed:
        logger.warning(f'Eigenpair residual {residual:.3g} exceeds {allowed:.3g}')
    return Spectrum(values, basis, residual)


def count_in_interval(spectrum: Spectrum, interval: EnergyInterval, volume: float = 1.0) -> CountingResult:
    """Number of eigenvalues in the interval, with multiplicity."""
    values = spectrum.eigenvalues
    # Eigenvalues are ascending, so both ends are binary searches
    low = np.searchsorted(values, interval.lower, side='left' if interval.closed_lower else 'right')
    high = np.searchsorted(values, interval.upper, side='right' if interval.closed_upper else 'left')
    return CountingResult(int(max(0, high - low)), volume)


def finite_volume_ids(spectrum: Spectrum, energy, volume: float):
    """
    Number of eigenvalues strictly below E, per unit volume.

    Args:
        spectrum: the spectrum
        energy  : a single energy or an array of energies
        volume  : volume of the box

    Returns:
        float or np.ndarray: N(E) / volume, left-continuous in E
    """
    if not volume > 0:
        raise ConfigError(f'Volume must be positive, got {volume}')
    counts = np.searchsorted(spectrum.eigenvalues, energy, side='left')
    if np.ndim(energy) == 0:
        return float(counts) / volume
    return counts / volume


def heat_trace(spectrum: Spectrum, beta: float) -> float:
    """
    Partition function sum exp(-beta * lambda).

    Raises:
        SpectralConditionError: if exp(-beta * lambda_min) overflows
    """
    if not beta > 0:
        raise ConfigError(f'Inverse temperature must be positive, got {beta}')
    # The lowest eigenvalue dominates the sum
    exponent = -beta * spectrum.minimum
    if exponent > _EXP_LIMIT:
        raise SpectralConditionError(f'Heat trace overflows: beta * lambda_min = {-exponent:.6g}')
    return float(np.exp(-beta * spectrum.eigenvalues).sum())


def _diagonalized(operator) -> Spectrum:
    if isinstance(operator, Spectrum):
        if operator.eigenvectors is None:
            raise ConfigError('Spectrum carries no eigenvectors.')
        return operator
    return eigenvalues(operator, vectors=True)


def _check_vector(spectrum: Spectrum, psi) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape[0] != spectrum.size:
        raise ConfigError(f'Vector has {psi.shape[0]} entries, operator has {spectrum.size} nodes.')
    return psi


def spectral_apply(operator: Union[HermitianOperator, Spectrum], function, psi) -> np.ndarray:
    """f(H) psi in the eigenbasis; psi may hold several vectors as columns."""
    spectrum = _diagonalized(operator)
    psi = _check_vector(spectrum, psi)
    basis = spectrum.eigenvectors
    weights = function(spectrum.eigenvalues)
    # Expand in the eigenbasis, scale, transform back
    coefficients = basis.conj().T @ psi
    if psi.ndim == 1:
        return basis @ (weights * coefficients)
    return basis @ (weights[:, None] * coefficients)


def semigroup_apply(operator, t: float, psi) -> np.ndarray:
    """exp(-tH) psi; t = 0 returns psi unchanged."""
    if t < 0:
        raise ConfigError(f'Semigroup time must be nonnegative, got {t}')
    if t == 0:
        size = operator.size if isinstance(operator, (Spectrum, HermitianOperator)) else operator.shape[0]
        if np.asarray(psi).shape[0] != size:
            raise ConfigError(f'Vector has {np.asarray(psi).shape[0]} entries, operator has {size} nodes.')
        return np.array(psi, copy=True)
    return spectral_apply(operator, lambda values: np.exp(-t * values), psi)


def _check_resolvent_point(spectrum: Spectrum, z: complex, alpha: float) -> None:
    if not alpha > 0:
        raise ConfigError(f'Resolvent power must be positive, got {alpha}')
    if not np.real(z) < spectrum.minimum:
        raise SpectralConditionError(
            f'Re z = {np.real(z):.6g} is not below the spectrum (minimum {spectrum.minimum:.6g})')


def resolvent_power_apply(operator, z: complex, alpha: float, psi) -> np.ndarray:
    """
    (H - z)^(-alpha) psi with the principal branch of the power.

    Raises:
        SpectralConditionError: unless Re z < inf spec H
    """
    spectrum = _diagonalized(operator)
    _check_resolvent_point(spectrum, z, alpha)
    return spectral_apply(spectrum, lambda values: np.power(values.astype(complex) - z, -alpha), psi)


def resolvent_power_quadrature(operator, z: complex, alpha: float, psi) -> np.ndarray:
    """
    (H - z)^(-alpha) psi from the Laplace representation
    Gamma(alpha)^(-1) * integral of t^(alpha-1) exp(tz) exp(-tH) psi dt over t > 0.

    The substitution t = u^(1/alpha) removes the endpoint singularity.
    """
    spectrum = _diagonalized(operator)
    _check_resolvent_point(spectrum, z, alpha)
    psi = _check_vector(spectrum, psi)
    basis = spectrum.eigenvectors
    coefficients = basis.conj().T @ psi.astype(complex)
    shifted = spectrum.eigenvalues - z
    size = coefficients.size

    def integrand(u):
        t = u ** (1.0 / alpha)
        decay = np.exp(-t * shifted) * coefficients
        return np.concatenate([decay.real, decay.imag])

    # quad_vec integrates real vectors only
    stacked, _ = quad_vec(integrand, 0.0, math.inf, epsabs=0.0, epsrel=QUADRATURE_TOL)
    # dt = u^(1/alpha - 1) du / alpha cancels t^(alpha-1); Gamma(alpha) alpha = Gamma(alpha + 1)
    coefficients_out = (stacked[:size] + 1j * stacked[size:]) / gamma(alpha + 1.0)
    return basis @ coefficients_out

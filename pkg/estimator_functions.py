import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from config import DENSE_LIMIT, LOGGER_NAME, SIGMA_BAND
from field_functions import AlloyModel, CovarianceModel, model_from_config, sample_field
from operator_functions import ConstantFieldGauge, GridSpec, assemble
from spectral_functions import EnergyInterval, Spectrum, count_in_interval, eigenvalues, finite_volume_ids
from support_functions import (
    CheckReport,
    ConfigError,
    EnsembleError,
    LabError,
    ResourceLimitError,
    parallel_map,
    sample_statistics,
)

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class EnsembleSpec:
    """
    Ensemble of random operators H(A, V^(omega)) on one box.

    Realization r uses seed base_seed XOR r.
    """
    model: Optional[object]
    grid: GridSpec
    gauge: ConstantFieldGauge
    boundary: str = 'N'
    realizations: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError(f'An ensemble needs at least one realization, got {self.realizations}')
        if self.base_seed < 0:
            raise ConfigError(f'Base seed must be nonnegative, got {self.base_seed}')
        if self.model is not None and not isinstance(self.model, (AlloyModel, CovarianceModel)):
            raise ConfigError(f'Unsupported field model {type(self.model).__name__}')

    def seed(self, index: int) -> int:
        return self.base_seed ^ index

    @property
    def seeds(self) -> List[int]:
        return [self.seed(r) for r in range(self.realizations)]

    @property
    def volume(self) -> float:
        return self.grid.volume

    def with_grid(self, grid: GridSpec) -> 'EnsembleSpec':
        return replace(self, grid=grid)

    def with_boundary(self, boundary: str) -> 'EnsembleSpec':
        return replace(self, boundary=boundary)


@dataclass(frozen=True, eq=False)
class MCResult:
    """Sample mean and standard error over R realizations."""
    mean: float
    stderr: float
    realizations: int
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values: Sequence[float], keep: bool = False) -> 'MCResult':
        data = np.asarray(values, dtype=float)
        mean, stderr = sample_statistics(data)
        return cls(mean, stderr, data.size, data if keep else None)


def realization_operator(spec: EnsembleSpec, index: int):
    potential = sample_field(spec.model, spec.grid, spec.seed(index))
    return assemble(spec.grid, spec.boundary, spec.gauge, potential)


def _realization_spectrum(spec: EnsembleSpec, index: int) -> Spectrum:
    seed = spec.seed(index)
    try:
        return eigenvalues(realization_operator(spec, index))
    except (LabError, np.linalg.LinAlgError) as exc:
        raise EnsembleError(f'Realization {index} (seed {seed}) failed: {exc}', seed) from exc


def ensemble_spectra(spec: EnsembleSpec, jobs: int = 1) -> List[Spectrum]:
    """
    Spectra of every realization, in realization order.

    Raises:
        ResourceLimitError: if the box exceeds the dense eigensolver limit
        EnsembleError     : naming the seed of the first failing realization
    """
    if spec.grid.n_nodes > DENSE_LIMIT:
        raise ResourceLimitError(
            f'Box with {spec.grid.n_nodes} nodes exceeds the dense limit {DENSE_LIMIT}; use smaller cubes.')
    logger.info(f'Ensemble of {spec.realizations} realizations on {spec.grid.shape}, '
                f'X={spec.boundary}, base seed {spec.base_seed}, jobs {jobs}')
    spectra = parallel_map(partial(_realization_spectrum, spec), list(range(spec.realizations)), jobs)
    logger.info(f'Ensemble finished, seeds {spec.seed(0)}..{spec.seed(spec.realizations - 1)}')
    return spectra


def counts_per_realization(spectra: Sequence[Spectrum], interval: EnergyInterval) -> np.ndarray:
    return np.array([count_in_interval(spectrum, interval).count for spectrum in spectra], dtype=float)


def expected_counting(spec: EnsembleSpec, interval: EnergyInterval, jobs: int = 1,
                      spectra: Optional[Sequence[Spectrum]] = None, keep: bool = False) -> MCResult:
    """
    Monte Carlo estimate of E[nu(I)], the mean number of eigenvalues in I.

    Args:
        spec    : the ensemble
        interval: the energy interval I
        jobs    : worker processes
        spectra : precomputed ensemble spectra (computed if omitted)
        keep    : retain the per-realization counts

    Returns:
        MCResult: mean count and its standard error
    """
    spectra = ensemble_spectra(spec, jobs) if spectra is None else spectra
    return MCResult.from_values(counts_per_realization(spectra, interval), keep)


def ids_values(spectra: Sequence[Spectrum], energies: Sequence[float], volume: float) -> np.ndarray:
    """Realization-wise finite-volume IDS, shape (R, len(energies))."""
    return np.array([finite_volume_ids(spectrum, np.asarray(energies, dtype=float), volume)
                     for spectrum in spectra])


def ids_curve(spec: EnsembleSpec, energies: Sequence[float], jobs: int = 1,
              spectra: Optional[Sequence[Spectrum]] = None, keep: bool = False) -> List[MCResult]:
    """
    Monte Carlo mean of N(E) / |Lambda| at each energy.

    Raises:
        ConfigError: if the energies are not ascending
    """
    energies = np.asarray(energies, dtype=float)
    if np.any(np.diff(energies) < 0):
        raise ConfigError('IDS energies must be ascending.')
    spectra = ensemble_spectra(spec, jobs) if spectra is None else spectra
    table = ids_values(spectra, energies, spec.volume)
    return [MCResult.from_values(table[:, k], keep) for k in range(energies.size)]


def ids_frame(energies: Sequence[float], results: Sequence[MCResult], **columns) -> pd.DataFrame:
    frame = pd.DataFrame(columns, index=range(len(results)))
    frame['E'] = np.asarray(energies, dtype=float)
    frame['mean'] = [r.mean for r in results]
    frame['stderr'] = [r.stderr for r in results]
    frame['R'] = [r.realizations for r in results]
    return frame


def chebyshev_check(spec: EnsembleSpec, interval: EnergyInterval, jobs: int = 1,
                    spectra: Optional[Sequence[Spectrum]] = None, tolerance: float = 0.0) -> CheckReport:
    """
    Empirical P[nu(I) >= 1] against E[nu(I)] with a SIGMA_BAND combined standard-error margin.
    """
    spectra = ensemble_spectra(spec, jobs) if spectra is None else spectra
    counts = counts_per_realization(spectra, interval)
    # P[nu >= 1] and E[nu] from the same realizations
    frequency = MCResult.from_values(counts >= 1)
    mean = MCResult.from_values(counts)
    # Both estimates carry their own standard error
    band = SIGMA_BAND * math.hypot(frequency.stderr, mean.stderr)
    instance = {'interval': interval.describe(), 'R': spec.realizations, 'base_seed': spec.base_seed,
                'boundary': spec.boundary, 'shape': list(spec.grid.shape)}
    return CheckReport.from_margins('chebyshev', instance, [frequency.mean], [mean.mean + band], tolerance,
                                    {'frequency': frequency.mean, 'mean': mean.mean, 'band': band})


def resized_grid(grid: GridSpec, side: float) -> GridSpec:
    """Cube of the given side with the spacing and origin of the reference grid."""
    cells = int(round(side / grid.spacing))
    if not math.isclose(cells * grid.spacing, side, rel_tol=1e-9):
        raise ConfigError(f'Side {side} is not a multiple of the spacing {grid.spacing}')
    return GridSpec.cube(grid.dimension, cells, grid.spacing, grid.origin)


def ids_size_sweep(spec: EnsembleSpec, sizes: Sequence[float], energies: Sequence[float],
                   jobs: int = 1) -> pd.DataFrame:
    """
    IDS curves for a ladder of cube sides, with the difference of each curve
    to the one of the previous size as a convergence diagnostic.

    Returns:
        pd.DataFrame: columns size, boundary, E, mean, stderr, R, cauchy
    """
    frames = []
    previous = None
    for side in sizes:
        # Same base seed at every size; alloy couplings agree on shared sites
        sized = spec.with_grid(resized_grid(spec.grid, side))
        results = ids_curve(sized, energies, jobs)
        frame = ids_frame(energies, results, size=float(side), boundary=spec.boundary)
        # No predecessor for the first size
        if previous is None:
            frame['cauchy'] = np.nan
        else:
            frame['cauchy'] = np.abs(frame['mean'].to_numpy() - previous)
            logger.info(f'IDS side {side}, X={spec.boundary}: max difference to previous side '
                        f'{frame["cauchy"].max():.4g}')
        previous = frame['mean'].to_numpy()
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def ensemble_from_config(config: dict, boundary: Optional[str] = None) -> EnsembleSpec:
    """Builds the ensemble of a validated run config; the boundary defaults to the first listed."""
    grid_section = config.get('grid')
    if grid_section is None:
        raise ConfigError('The run config needs a grid section.')
    dimension = grid_section['dimension']
    grid = GridSpec.cube(dimension, grid_section['cells'], grid_section['spacing'],
                         grid_section.get('origin', 0.0))
    gauge = ConstantFieldGauge.from_config(config.get('gauge', {}).get('B'), dimension)
    model = model_from_config(config.get('field'), dimension)
    ensemble = config.get('ensemble', {})
    return EnsembleSpec(model=model, grid=grid, gauge=gauge,
                        boundary=boundary or config.get('boundary', ['N'])[0],
                        realizations=ensemble.get('realizations', 1),
                        base_seed=ensemble.get('base_seed', 0))

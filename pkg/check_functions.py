import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.integrate import quad

from config import (
    BRACKETING_TOL,
    DECOUPLING_TOL,
    DIAMAGNETIC_TOL,
    LOGGER_NAME,
    QUADRATURE_TOL,
    RESOLVENT_TOL,
    SERIES_TAIL_TOL,
    SIGMA_BAND,
    boundary_conditions,
    check_names,
)
from bound_functions import (
    BoundProblem,
    WegnerConstants,
    free_trace_factor,
    minimize_bound,
    mgf_sup_alloy,
    wegner_rhs,
    z3,
)
from estimator_functions import EnsembleSpec, MCResult, counts_per_realization, ensemble_spectra
from field_functions import (
    AlloyModel,
    CovarianceModel,
    FieldRealization,
    UniformDensity,
    alloy_grid,
    restrict_field,
    sample_alloy,
    sample_field,
    sample_gaussian,
)
from operator_functions import ConstantFieldGauge, GridSpec, HermitianOperator, assemble, decouple
from spectral_functions import (
    EnergyInterval,
    eigenvalues,
    heat_trace,
    resolvent_power_apply,
    semigroup_apply,
)
from support_functions import CheckReport, ConfigError, SpectralConditionError, parallel_map

logger = logging.getLogger(LOGGER_NAME)

RESOLVENT_POWERS = (0.5, 1.0, 2.0)


def _scale(*arrays) -> float:
    return max(1.0, *(float(np.max(np.abs(a))) for a in arrays))


def _instance(grid: GridSpec, gauge: Optional[ConstantFieldGauge], potential, **extra) -> dict:
    info = {'shape': list(grid.shape), 'spacing': grid.spacing,
            'field': None if gauge is None else gauge.matrix.tolist()}
    if isinstance(potential, FieldRealization):
        info.update(seed=potential.seed, model=potential.model_tag)
    info.update(extra)
    return info


def merge_reports(name: str, reports: Sequence[CheckReport], instance: dict) -> CheckReport:
    """One report for a family of instances: worst violation and slack over all of them."""
    worst = max(r.worst_violation for r in reports)
    slack = min(r.slack for r in reports)
    tolerance = min(r.tolerance for r in reports)
    return CheckReport(name, dict(instance, instances=len(reports)), worst, slack, tolerance,
                       bool(worst <= tolerance), {'failed': sum(not r.passed for r in reports)})


def _operator_pair(grid: GridSpec, boundary: str, gauge: ConstantFieldGauge, potential):
    return assemble(grid, boundary, gauge, potential), assemble(grid, boundary, None, potential)


def check_diamagnetic_semigroup(grid: GridSpec, gauge: ConstantFieldGauge, potential, t: float,
                                trials: int = 50, seed: int = 0) -> CheckReport:
    """
    |exp(-tH(A, v)) psi| <= exp(-tH(0, v)) |psi| componentwise, for random
    complex psi and both boundary conditions; margins relative to the largest entry.
    """
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((grid.n_nodes, trials)) + 1j * rng.standard_normal((grid.n_nodes, trials))
    lhs, rhs = [], []
    for boundary in boundary_conditions:
        magnetic, free = _operator_pair(grid, boundary, gauge, potential)
        left = np.abs(semigroup_apply(eigenvalues(magnetic, vectors=True), t, psi))
        right = semigroup_apply(eigenvalues(free, vectors=True), t, np.abs(psi)).real
        scale = _scale(left, right)
        lhs.append((left / scale).ravel())
        rhs.append((right / scale).ravel())
    return CheckReport.from_margins('diamagnetic-semigroup', _instance(grid, gauge, potential, t=t, trials=trials),
                                    np.concatenate(lhs), np.concatenate(rhs), DIAMAGNETIC_TOL)


def check_diamagnetic_partition(grid: GridSpec, gauge: ConstantFieldGauge, potential, beta: float) -> CheckReport:
    """Tr exp(-beta H(A, v)) <= Tr exp(-beta H(0, v)) for both boundary conditions."""
    lhs, rhs, slack = [], [], {}
    for boundary in boundary_conditions:
        magnetic, free = _operator_pair(grid, boundary, gauge, potential)
        left = heat_trace(eigenvalues(magnetic), beta)
        right = heat_trace(eigenvalues(free), beta)
        lhs.append(left / right)
        rhs.append(1.0)
        slack[boundary] = right - left
    return CheckReport.from_margins('diamagnetic-partition', _instance(grid, gauge, potential, beta=beta),
                                    lhs, rhs, DIAMAGNETIC_TOL, {'slack': slack})


def check_resolvent_power(grid: GridSpec, gauge: ConstantFieldGauge, potential, z: Optional[complex] = None,
                          alphas: Sequence[float] = RESOLVENT_POWERS, trials: int = 50, seed: int = 0) -> CheckReport:
    """
    |(H(A, v) - z)^(-alpha) psi| <= (H(0, v) - Re z)^(-alpha) |psi| componentwise.

    z defaults to the zero-field ground state energy minus one.

    Raises:
        SpectralConditionError: unless Re z lies below the zero-field spectrum
    """
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((grid.n_nodes, trials)) + 1j * rng.standard_normal((grid.n_nodes, trials))
    lhs, rhs = [], []
    for boundary in boundary_conditions:
        magnetic, free = _operator_pair(grid, boundary, gauge, potential)
        magnetic_spectrum = eigenvalues(magnetic, vectors=True)
        free_spectrum = eigenvalues(free, vectors=True)
        point = free_spectrum.minimum - 1.0 if z is None else z
        if not np.real(point) < free_spectrum.minimum:
            raise SpectralConditionError(
                f'Re z = {np.real(point):.6g} must lie below the zero-field spectrum ({free_spectrum.minimum:.6g})')
        for alpha in alphas:
            left = np.abs(resolvent_power_apply(magnetic_spectrum, point, alpha, psi))
            right = resolvent_power_apply(free_spectrum, np.real(point), alpha, np.abs(psi)).real
            scale = _scale(left, right)
            lhs.append((left / scale).ravel())
            rhs.append((right / scale).ravel())
    return CheckReport.from_margins('resolvent-power',
                                    _instance(grid, gauge, potential, z=z, alphas=list(alphas), trials=trials),
                                    np.concatenate(lhs), np.concatenate(rhs), RESOLVENT_TOL)


def check_ground_state(grid: GridSpec, gauge: ConstantFieldGauge, potential) -> CheckReport:
    """inf spec H(0, v) <= inf spec H(A, v) for both boundary conditions."""
    lhs, rhs = [], []
    for boundary in boundary_conditions:
        magnetic, free = _operator_pair(grid, boundary, gauge, potential)
        low = eigenvalues(free).minimum
        high = eigenvalues(magnetic).minimum
        scale = _scale([low, high])
        lhs.append(low / scale)
        rhs.append(high / scale)
    return CheckReport.from_margins('ground-state', _instance(grid, gauge, potential), lhs, rhs, DIAMAGNETIC_TOL)


def _restrict(potential, grid: GridSpec, subgrid: GridSpec):
    if potential is None:
        return None
    if isinstance(potential, FieldRealization):
        return restrict_field(potential, subgrid)
    return np.asarray(potential, dtype=float).reshape(grid.shape)[grid.slices_of(subgrid)]


def split_operator(grid: GridSpec, boundary: str, gauge: ConstantFieldGauge, potential,
                   axis: int = 0, at: Optional[int] = None) -> HermitianOperator:
    """Direct sum of the operators on the two halves of the box, decoupled at the interface."""
    first, second = grid.split(axis, at)
    return decouple(assemble(first, boundary, gauge, _restrict(potential, grid, first)),
                    assemble(second, boundary, gauge, _restrict(potential, grid, second)))


def check_bracketing(grid: GridSpec, gauge: ConstantFieldGauge, potential, axis: int = 0,
                     at: Optional[int] = None) -> CheckReport:
    """
    lambda_k(N, split) <= lambda_k(N) <= lambda_k(D) <= lambda_k(D, split) for every k.
    """
    gauge = ConstantFieldGauge.zero(grid.dimension) if gauge is None else gauge
    chain = [eigenvalues(split_operator(grid, 'N', gauge, potential, axis, at)).eigenvalues,
             eigenvalues(assemble(grid, 'N', gauge, potential)).eigenvalues,
             eigenvalues(assemble(grid, 'D', gauge, potential)).eigenvalues,
             eigenvalues(split_operator(grid, 'D', gauge, potential, axis, at)).eigenvalues]
    scale = _scale(*chain)
    lhs = np.concatenate(chain[:-1]) / scale
    rhs = np.concatenate(chain[1:]) / scale
    return CheckReport.from_margins('bracketing', _instance(grid, gauge, potential, axis=axis, at=at),
                                    lhs, rhs, BRACKETING_TOL)


def check_decoupling(first: HermitianOperator, second: HermitianOperator) -> CheckReport:
    """Spectrum of the direct sum equals the sorted union of the part spectra."""
    total = eigenvalues(decouple(first, second)).eigenvalues
    merged = np.sort(np.concatenate([eigenvalues(first).eigenvalues, eigenvalues(second).eigenvalues]))
    deviation = np.abs(total - merged) / _scale(total, merged)
    return CheckReport.from_margins('decoupling', {'sizes': [first.size, second.size]},
                                    deviation, np.zeros_like(deviation), DECOUPLING_TOL)


@dataclass(frozen=True, eq=False)
class SpectralAveragingInstance:
    """L + xi M with weights K, coupling density g (sup norm g_sup), interval and vector psi."""
    L: np.ndarray
    K: np.ndarray
    M: np.ndarray
    g: Callable[[float], float]
    g_sup: float
    interval: EnergyInterval
    psi: np.ndarray
    xi_window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        for name in ('L', 'K', 'M'):
            matrix = np.atleast_2d(np.asarray(getattr(self, name), dtype=complex))
            if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=1e-13):
                raise ConfigError(f'{name} must be Hermitian.')
            object.__setattr__(self, name, matrix)
        object.__setattr__(self, 'psi', np.atleast_1d(np.asarray(self.psi, dtype=complex)))


def averaging_kappa(K: np.ndarray, M: np.ndarray) -> float:
    """
    kappa = inf over K phi != 0 of <phi, M phi> / <phi, K^2 phi>.

    The null space of K is eliminated by its Schur complement in M; the
    result is the smallest generalized eigenvalue on the range of K.
    """
    weights, basis = linalg.eigh(K)
    cutoff = 1e-12 * max(1.0, np.abs(weights).max())
    on_range = np.abs(weights) > cutoff
    if not np.any(on_range):
        raise ConfigError('K vanishes identically.')
    Q_r, Q_n = basis[:, on_range], basis[:, ~on_range]
    M_rr = Q_r.conj().T @ M @ Q_r
    if Q_n.shape[1]:
        M_nn = Q_n.conj().T @ M @ Q_n
        M_nr = Q_n.conj().T @ M @ Q_r
        if linalg.eigvalsh(M_nn).min() <= cutoff:
            return -math.inf
        M_rr = M_rr - M_nr.conj().T @ linalg.solve(M_nn, M_nr, assume_a='her')
    return float(linalg.eigh(M_rr, np.diag(weights[on_range] ** 2), eigvals_only=True)[0])


def _averaging_window(instance: SpectralAveragingInstance) -> Tuple[float, float]:
    if instance.xi_window is not None:
        return instance.xi_window
    m_low = linalg.eigvalsh(instance.M).min()
    if m_low <= 0:
        raise ConfigError('M is not positive definite; give the instance an explicit xi window.')
    l_values = linalg.eigvalsh(instance.L)
    # Weyl: every eigenvalue of L + xi M leaves I outside this window
    return ((instance.interval.lower - l_values.max()) / m_low,
            (instance.interval.upper - l_values.min()) / m_low)


def _crossings(instance: SpectralAveragingInstance, window: Tuple[float, float]) -> np.ndarray:
    """xi where an eigenvalue of L + xi M crosses an endpoint of I."""
    points = list(window)
    size = instance.L.shape[0]
    for energy in (instance.interval.lower, instance.interval.upper):
        values = linalg.eig(energy * np.eye(size) - instance.L, instance.M, right=False)
        finite = values[np.isfinite(values)]
        real = finite.real[np.abs(finite.imag) <= 1e-9 * np.maximum(1.0, np.abs(finite.real))]
        points.extend(real[(real > window[0]) & (real < window[1])])
    return np.unique(np.asarray(points))


def averaged_weight(instance: SpectralAveragingInstance, xi: float) -> float:
    """<psi, K 1_I(L + xi M) K psi> by full diagonalization."""
    values, vectors = linalg.eigh(instance.L + xi * instance.M)
    inside = instance.interval.contains(values)
    amplitudes = vectors[:, inside].conj().T @ (instance.K @ instance.psi)
    return float(np.sum(np.abs(amplitudes) ** 2))


def check_spectral_averaging(instance: SpectralAveragingInstance, tolerance: float = QUADRATURE_TOL) -> CheckReport:
    """
    Integral of |g(xi)| <psi, K 1_I(L + xi M) K psi> over xi against |I| ||g|| / kappa * ||psi||^2.

    Raises:
        ConfigError: if kappa <= 0
    """
    kappa = averaging_kappa(instance.K, instance.M)
    if not kappa > 0:
        raise ConfigError(f'Spectral averaging needs kappa > 0, got {kappa}')
    window = _averaging_window(instance)
    breakpoints = _crossings(instance, window)
    integral, error = 0.0, 0.0
    for low, high in zip(breakpoints[:-1], breakpoints[1:]):
        value, estimate = quad(lambda xi: abs(instance.g(xi)) * averaged_weight(instance, xi), low, high,
                               epsabs=1e-12, epsrel=1e-10, limit=200)
        integral += value
        error += estimate
    bound = instance.interval.length * instance.g_sup / kappa * float(np.vdot(instance.psi, instance.psi).real)
    scale = max(1.0, bound)
    return CheckReport.from_margins('spectral-averaging',
                                    {'size': instance.L.shape[0], 'interval': instance.interval.describe()},
                                    [integral / scale], [(bound + error) / scale], tolerance,
                                    {'integral': integral, 'bound': bound, 'kappa': kappa, 'quadrature_error': error})


def _golden_thompson_sample(spec: EnsembleSpec, beta: float, index: int) -> Tuple[float, np.ndarray]:
    potential = sample_field(spec.model, spec.grid, spec.seed(index))
    operator = assemble(spec.grid, spec.boundary, spec.gauge, potential)
    return heat_trace(eigenvalues(operator), beta), np.exp(-beta * potential.values.ravel())


def check_golden_thompson_avg(spec: EnsembleSpec, beta: float, jobs: int = 1) -> CheckReport:
    """
    E Tr exp(-beta H(A, V)) <= Tr exp(-beta H(A, 0)) * max_x E exp(-beta V(x)).

    Checked realization by realization through Golden-Thompson,
    Tr exp(-beta H(A, V)) <= sum_x exp(-beta H(A, 0))_xx exp(-beta V(x)).
    Averaging the right side gives at most Tr exp(-beta H(A, 0)) times the
    largest node mean, for any node means, so no Monte Carlo margin enters
    the verdict. The averaged sides are reported in the details.
    """
    samples = parallel_map(partial(_golden_thompson_sample, spec, beta), list(range(spec.realizations)), jobs)
    traces = np.array([s[0] for s in samples])
    weights = np.array([s[1] for s in samples])
    free = eigenvalues(assemble(spec.grid, spec.boundary, spec.gauge, None), vectors=True)
    # Diagonal of the free semigroup kernel
    kernel_diagonal = (np.abs(free.eigenvectors) ** 2) @ np.exp(-beta * free.eigenvalues)
    bounds = weights @ kernel_diagonal
    free_trace = float(kernel_diagonal.sum())
    node_means = weights.mean(axis=0)
    rhs = free_trace * float(node_means.max())
    instance = {'shape': list(spec.grid.shape), 'R': spec.realizations, 'base_seed': spec.base_seed,
                'beta': beta, 'boundary': spec.boundary}
    return CheckReport.from_margins('golden-thompson', instance, traces / bounds, np.ones_like(bounds),
                                    DIAMAGNETIC_TOL,
                                    {'lhs': float(traces.mean()), 'rhs': rhs,
                                     'lhs_stderr': MCResult.from_values(traces).stderr,
                                     'node': int(np.argmax(node_means))})


def neumann_series_trace(side: float, beta: float, dimension: int) -> Tuple[float, float]:
    """
    Continuum free Neumann trace on a cube, (sum_n exp(-beta pi^2 n^2 / (2 L^2)))^d,
    with a bound on the truncation error.
    """
    rate = beta * math.pi ** 2 / (2.0 * side ** 2)
    total, n = 0.0, 0
    while True:
        total += math.exp(-rate * n * n)
        n += 1
        lead = math.exp(-rate * n * n)
        tail = lead / -math.expm1(-rate * (2 * n + 1))
        if dimension * tail * (total + tail) ** (dimension - 1) < SERIES_TAIL_TOL:
            break
    return total ** dimension, dimension * tail * (total + tail) ** (dimension - 1)


def check_neumann_partition_bound(side: float, beta: float, dimension: int) -> CheckReport:
    """Free Neumann trace <= |Lambda| (|Lambda|^(-1/d) + (2 pi beta)^(-1/2))^d."""
    trace, tail = neumann_series_trace(side, beta, dimension)
    volume = side ** dimension
    bound = volume * free_trace_factor(beta, volume, dimension)
    return CheckReport.from_margins('neumann-partition', {'side': side, 'beta': beta, 'dimension': dimension},
                                    [(trace + tail) / bound], [1.0], 0.0, {'trace': trace, 'bound': bound})


def wegner_ladder(lower: float = 0.0, upper: float = 3.0, count: int = 10) -> List[EnergyInterval]:
    edges = np.linspace(lower, upper, count + 1)
    return [EnergyInterval(a, b) for a, b in zip(edges[:-1], edges[1:])]


def interval_bound(spec: EnsembleSpec, interval: EnergyInterval) -> Tuple[float, dict]:
    """
    Wegner bound on E[nu(I)] for the ensemble, with the constants used.

    Raises:
        ConfigError: if the model admits no decomposition with a bounded density
    """
    model = spec.model
    d = spec.grid.dimension
    if isinstance(model, AlloyModel):
        if not math.isfinite(model.coupling.density_sup):
            raise ConfigError(f'Model {model.tag} has no coupling density; no Wegner bound applies.')
        family = 'alloy-uniform' if isinstance(model.coupling, UniformDensity) else 'alloy-laplace'
        _, point = minimize_bound(BoundProblem(family, model), interval.sup)
        beta = point['beta']
        constants = WegnerConstants(model.v1, model.v2, beta, model.coupling.density_sup,
                                    z3(beta, 1.0, d, mgf_sup_alloy(model, beta)), d)
        return wegner_rhs(constants, spec.volume, interval), {'beta': beta, 'Z': constants.Z, 'R': constants.R}
    if isinstance(model, CovarianceModel):
        ell = min(spec.grid.lengths)
        value, point = minimize_bound(BoundProblem('gauss', model), interval.sup, fixed={'ell': ell})
        return spec.volume * interval.length * value, dict(point)
    raise ConfigError('The Wegner check needs an alloy or Gaussian field model.')


def check_wegner_mc(spec: EnsembleSpec, intervals: Sequence[EnergyInterval], jobs: int = 1) -> CheckReport:
    """
    Monte Carlo E[nu(I)] against the Wegner bound for every interval of the ladder,
    with a SIGMA_BAND standard-error margin. Both curves go into the report details.
    """
    spectra = ensemble_spectra(spec, jobs)
    lhs, rhs, rows = [], [], []
    for interval in intervals:
        counts = MCResult.from_values(counts_per_realization(spectra, interval))
        bound, constants = interval_bound(spec, interval)
        lhs.append(counts.mean - SIGMA_BAND * counts.stderr)
        rhs.append(bound)
        rows.append({'lower': interval.lower, 'upper': interval.upper, 'mean': counts.mean,
                     'stderr': counts.stderr, 'bound': bound, **constants})
    instance = {'shape': list(spec.grid.shape), 'R': spec.realizations, 'base_seed': spec.base_seed,
                'boundary': spec.boundary, 'field': spec.gauge.matrix.tolist(), 'model': spec.model.tag}
    return CheckReport.from_margins('wegner-mc', instance, lhs, rhs, 0.0, {'curves': rows})


# ---------------------------------------------------------------------------
# Randomized batteries
# ---------------------------------------------------------------------------

def _random_grid(rng: np.random.Generator, sides: Sequence[int], dimensions: Sequence[int] = (1, 2)) -> GridSpec:
    dimension = int(rng.choice(dimensions))
    shape = tuple(int(rng.choice(sides)) for _ in range(dimension))
    spacing = float(rng.choice([0.5, 1.0]))
    return GridSpec(dimension, shape, spacing, (0.0,) * dimension)


def _random_gauge(rng: np.random.Generator, dimension: int, zero: bool = False) -> ConstantFieldGauge:
    if dimension == 1 or zero:
        return ConstantFieldGauge.zero(dimension)
    return ConstantFieldGauge.planar(float(rng.uniform(-3.0, 3.0)), dimension)


def diamagnetic_battery(instances: int = 1000, seed: int = 0) -> List[CheckReport]:
    """Semigroup, partition, resolvent-power and ground-state checks on random small instances."""
    rng = np.random.default_rng(seed)
    collected: Dict[str, List[CheckReport]] = {name: [] for name in
                                               ('diamagnetic-semigroup', 'diamagnetic-partition',
                                                'resolvent-power', 'ground-state')}
    for index in range(instances):
        grid = _random_grid(rng, (2, 3, 4, 5), (1, 2))
        gauge = _random_gauge(rng, grid.dimension, zero=index % 10 == 0)
        potential = rng.uniform(-2.0, 2.0, grid.n_nodes)
        collected['diamagnetic-semigroup'].append(
            check_diamagnetic_semigroup(grid, gauge, potential, float(rng.uniform(0.0, 3.0)), 4, index))
        collected['diamagnetic-partition'].append(
            check_diamagnetic_partition(grid, gauge, potential, float(rng.uniform(0.1, 5.0))))
        collected['resolvent-power'].append(
            check_resolvent_power(grid, gauge, potential, None, RESOLVENT_POWERS, 4, index))
        collected['ground-state'].append(check_ground_state(grid, gauge, potential))
    return [merge_reports(name, reports, {'battery': True, 'seed': seed}) for name, reports in collected.items()]


def bracketing_battery(instances: int = 100, seed: int = 0) -> CheckReport:
    rng = np.random.default_rng(seed)
    reports = []
    for index in range(instances):
        grid = _random_grid(rng, (2, 3, 4, 5, 6), (2,))
        gauge = _random_gauge(rng, 2, zero=index % 2 == 0)
        potential = rng.uniform(-2.0, 2.0, grid.n_nodes)
        axis = int(rng.integers(0, 2))
        at = int(rng.integers(1, grid.shape[axis]))
        reports.append(check_bracketing(grid, gauge, potential, axis, at))
    return merge_reports('bracketing', reports, {'battery': True, 'seed': seed})


def random_averaging_instance(rng: np.random.Generator, size: int = 6) -> SpectralAveragingInstance:
    raw = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    L = 0.5 * (raw + raw.conj().T)
    K = np.diag([1.0] * (size - 1) + [0.0])
    M = K @ K + 0.1 * np.eye(size)
    centre = float(rng.uniform(-2.0, 2.0))
    psi = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return SpectralAveragingInstance(L, K, M, partial(_gaussian_bump, centre), 1.0, EnergyInterval(-1.0, 1.0), psi)


def _gaussian_bump(centre: float, xi: float) -> float:
    return math.exp(-0.5 * (xi - centre) ** 2)


def spectral_averaging_battery(instances: int = 20, seed: int = 0) -> CheckReport:
    rng = np.random.default_rng(seed)
    reports = [check_spectral_averaging(random_averaging_instance(rng)) for _ in range(instances)]
    return merge_reports('spectral-averaging', reports, {'battery': True, 'seed': seed})


# ---------------------------------------------------------------------------
# Builtin instances used by the verify command
# ---------------------------------------------------------------------------

def _uniform_alloy(dimension: int = 2) -> AlloyModel:
    return AlloyModel(dimension)


def _builtin_diamagnetic(quick: bool, seed: int) -> List[CheckReport]:
    grid = alloy_grid(2, 5)
    potential = sample_alloy(_uniform_alloy(), grid, 7)
    gauge = ConstantFieldGauge.planar(1.0)
    battery = diamagnetic_battery(100 if quick else 1000, seed)
    free_grid = GridSpec.cube(2, 6, 1.0)
    sweep = [check_diamagnetic_partition(free_grid, ConstantFieldGauge.planar(b), None, 1.0) for b in (2.0, 1.0, 0.1, 0.01)]
    return ([check_diamagnetic_semigroup(grid, gauge, potential, 1.0, 50, seed)] + sweep
            + [check_resolvent_power(grid, gauge, potential, None, (0.5,), 50, seed),
               check_ground_state(grid, gauge, potential)] + battery)


def _builtin_bracketing(quick: bool, seed: int) -> List[CheckReport]:
    line = GridSpec.cube(1, 4, 1.0)
    grid = GridSpec.cube(2, 6, 1.0)
    potential = sample_gaussian(CovarianceModel(0.25, 2, tau=1.0), grid, 3)
    return [check_bracketing(line, None, None),
            check_bracketing(grid, ConstantFieldGauge.planar(1.0), potential),
            bracketing_battery(10 if quick else 100, seed)]


def _builtin_decoupling(quick: bool, seed: int) -> List[CheckReport]:
    rng = np.random.default_rng(seed)
    first_grid = GridSpec(1, (4,), 1.0, (0.0,))
    second_grid = GridSpec(1, (4,), 1.0, (10.0,))
    first = assemble(first_grid, 'N', None, rng.uniform(-1, 1, 4))
    second = assemble(second_grid, 'N', None, rng.uniform(-1, 1, 4))
    free = [assemble(GridSpec.cube(2, 3, 1.0, origin), 'N') for origin in (0.0, 5.0)]
    return [check_decoupling(first, second), check_decoupling(*free)]


def _builtin_spectral_averaging(quick: bool, seed: int) -> List[CheckReport]:
    scalar = SpectralAveragingInstance(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)), _unit_weight, 1.0,
                                       EnergyInterval(0.0, 1.0), np.ones(1))
    return [check_spectral_averaging(scalar), spectral_averaging_battery(5 if quick else 20, seed)]


def _unit_weight(xi: float) -> float:
    return 1.0


def _builtin_golden_thompson(quick: bool, seed: int, jobs: int = 1) -> List[CheckReport]:
    spec = EnsembleSpec(CovarianceModel(0.25, 2, tau=1.0), GridSpec.cube(2, 5, 1.0),
                        ConstantFieldGauge.planar(1.0), 'N', 100 if quick else 500, seed)
    return [check_golden_thompson_avg(spec, 1.0, jobs), check_golden_thompson_avg(spec.with_boundary('D'), 1.0, jobs)]


def _builtin_neumann(quick: bool, seed: int) -> List[CheckReport]:
    reports = [check_neumann_partition_bound(1.0, 2.0 * math.pi, 1)]
    for dimension in (1, 2, 3):
        for beta in (0.1, 1.0, 10.0):
            for side in (1.0, 2.0):
                reports.append(check_neumann_partition_bound(side, beta, dimension))
    return reports


def _builtin_wegner(quick: bool, seed: int, jobs: int = 1) -> List[CheckReport]:
    reports = []
    for strength in (0.0, 1.0):
        for boundary in boundary_conditions:
            spec = EnsembleSpec(_uniform_alloy(), alloy_grid(2, 6), ConstantFieldGauge.planar(strength),
                                boundary, 200 if quick else 2000, seed)
            reports.append(check_wegner_mc(spec, wegner_ladder(), jobs))
    return reports


_REGISTRY = {
    'diamagnetic-semigroup': _builtin_diamagnetic,
    'bracketing': _builtin_bracketing,
    'decoupling': _builtin_decoupling,
    'spectral-averaging': _builtin_spectral_averaging,
    'golden-thompson': _builtin_golden_thompson,
    'neumann-partition': _builtin_neumann,
    'wegner-mc': _builtin_wegner,
}

# the diamagnetic builtin covers these together with the semigroup check
_COVERED_BY = {'diamagnetic-partition': 'diamagnetic-semigroup',
               'resolvent-power': 'diamagnetic-semigroup',
               'ground-state': 'diamagnetic-semigroup'}

_ENSEMBLE_CHECKS = {'golden-thompson', 'wegner-mc'}


def run_checks(names: Sequence[str], quick: bool = False, seed: int = 0, jobs: int = 1) -> List[CheckReport]:
    """
    Runs the builtin instances of the named checks ('all' runs every check).

    Returns:
        List[CheckReport]: reports in a fixed order

    Raises:
        ConfigError: for an unknown check name
    """
    if 'all' in names:
        names = check_names
    unknown = [name for name in names if name not in check_names]
    if unknown:
        raise ConfigError(f'Unknown checks {unknown}; choose from {check_names} or all')
    runners = []
    for name in names:
        runner = _COVERED_BY.get(name, name)
        if runner not in runners:
            runners.append(runner)
    reports = []
    for runner in runners:
        builtin = _REGISTRY[runner]
        found = builtin(quick, seed, jobs) if runner in _ENSEMBLE_CHECKS else builtin(quick, seed)
        wanted = [r for r in found if r.name in names]
        for report in wanted:
            logger.info(f'Check {report.name}: worst violation {report.worst_violation:.3g}, '
                        f'{"pass" if report.passed else "FAIL"}')
        reports.extend(wanted)
    return reports

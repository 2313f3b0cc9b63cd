import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq, minimize, minimize_scalar

from config import (
    ASYMPTOTIC_ENERGY_FLOOR,
    BETA_RANGE,
    ELL_CEILING_TAUS,
    ELL_FLOOR,
    EMBEDDING_PADDING_TAUS,
    LOGGER_NAME,
    MIN_REL_TOL,
    REFINE_PASSES,
    S_MAX_TAUS,
    SEARCH_POINTS,
)
from estimator_functions import EnsembleSpec, MCResult
from field_functions import (
    AlloyModel,
    CovarianceModel,
    CubeProfile,
    LaplaceCoupling,
    UniformDensity,
    decompose_alloy,
    decompose_gaussian,
    gaussian_u_profile,
    sample_field,
)
from operator_functions import HermitianOperator, assemble
from spectral_functions import EnergyInterval, eigenvalues, heat_trace
from support_functions import ConfigError, LabError, SpectralConditionError, parallel_map

logger = logging.getLogger(LOGGER_NAME)

families = ['alloy-uniform', 'alloy-laplace', 'gauss']

MAX_CYCLES = 25


@dataclass(frozen=True)
class WegnerConstants:
    """Constants v1, v2, beta, R, Z of the Wegner estimate in d dimensions."""
    v1: float
    v2: float
    beta: float
    R: float
    Z: float
    dimension: int

    def __post_init__(self):
        if not (self.v1 > 0 and self.v2 > 0 and self.beta > 0 and self.Z > 0):
            raise ConfigError(f'Wegner constants v1, v2, beta, Z must be positive: {self}')
        if self.R < 0:
            raise ConfigError(f'The density bound R must be nonnegative, got {self.R}')
        if self.v1 > self.v2:
            raise ConfigError(f'Wegner constants need v1 <= v2, got {self.v1} > {self.v2}')


def wegner_rhs(constants: WegnerConstants, volume: float, interval: EnergyInterval) -> float:
    """|Lambda| |I| (R Z / v1) exp(beta sup I), the bound on E[nu(I)]."""
    return (volume * interval.length * constants.R * constants.Z / constants.v1
            * math.exp(constants.beta * interval.sup))


def free_trace_factor(beta: float, cell_volume: float, dimension: int) -> float:
    """(|cell|^(-1/d) + (2 pi beta)^(-1/2))^d."""
    return (cell_volume ** (-1.0 / dimension) + (2.0 * math.pi * beta) ** -0.5) ** dimension


def z3(beta: float, cell_volume: float, dimension: int, mgf_sup: float) -> float:
    """
    Explicit trace bound Z3 = free_trace_factor * ess sup E[exp(-beta U)].

    Raises:
        ConfigError: for nonpositive inputs
    """
    if not (beta > 0 and cell_volume > 0 and mgf_sup > 0):
        raise ConfigError(f'z3 needs positive beta, cell volume and moment factor, '
                          f'got {beta}, {cell_volume}, {mgf_sup}')
    return free_trace_factor(beta, cell_volume, dimension) * mgf_sup


def _z1_sample(spec: EnsembleSpec, beta: float, site, s: float, index: int) -> float:
    seed = spec.seed(index)
    potential = sample_field(spec.model, spec.grid, seed)
    if isinstance(spec.model, AlloyModel):
        potential = decompose_alloy(potential, spec.model, site).background
    elif isinstance(spec.model, CovarianceModel):
        centre = spec.grid.nearest_node(spec.grid.centre)
        potential = decompose_gaussian(spec.model, potential, s, centre).background
    operator = assemble(spec.grid, spec.boundary, None, potential)
    return heat_trace(eigenvalues(operator), beta) / spec.grid.volume


def z1_estimate(spec: EnsembleSpec, beta: float, jobs: int = 1, site=None, s: float = 0.0) -> MCResult:
    """
    Monte Carlo Z1 = E[Tr exp(-beta H(0, U_j))] / |Lambda_j| on the cell grid of spec.

    The background U_j removes the coupling of site (alloy, default the
    site at the cell centre) or the mollified coupling of width s (Gaussian,
    centred at the node nearest the cell centre, so s = 0 works on even sides).
    """
    if site is None:
        site = tuple(int(c) for c in np.rint(spec.grid.centre))
    values = parallel_map(partial(_z1_sample, spec, beta, site, s), list(range(spec.realizations)), jobs)
    return MCResult.from_values(values)


def z2_estimate(operator: HermitianOperator, beta: float, mgf_sup: float) -> float:
    """Z2 = Tr exp(-beta H_N(A, 0)) / |Lambda_j| * ess sup E[exp(-beta U)]."""
    return heat_trace(eigenvalues(operator), beta) / operator.volume * mgf_sup


def _unit_cell_points(model: AlloyModel) -> np.ndarray:
    if isinstance(model.profile, CubeProfile):
        return np.zeros((1, model.dimension))
    spacing = model.profile.spacing / 4.0
    per_axis = min(int(math.ceil(1.0 / spacing)), 64 if model.dimension < 3 else 24)
    axis = (np.arange(per_axis) + 0.5) / per_axis - 0.5
    mesh = np.meshgrid(*([axis] * model.dimension), indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


def _overlap_sum(model: AlloyModel, transform: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """sum_j transform(u0(x - j)) at points x of the unit cell Lambda(0)."""
    points = _unit_cell_points(model)
    reach = int(math.ceil(model.profile.support_radius + 0.5))
    offsets = np.arange(-reach, reach + 1)
    mesh = np.meshgrid(*([offsets] * model.dimension), indexing='ij')
    sites = np.stack([m.ravel() for m in mesh], axis=1)
    total = np.zeros(points.shape[0])
    for site in sites:
        total += transform(model.profile(points - site))
    return total


def k_beta(model: AlloyModel, alpha: float, beta: float) -> float:
    """
    K_beta = -inf over Lambda(0) of sum_j ln(1 - (beta alpha u0(x - j))^2).

    Raises:
        SpectralConditionError: unless beta alpha ||u0|| < 1
    """
    # ln(1 - x^2) needs |x| < 1 at every point of the cell
    if beta * alpha * model.profile.sup_norm >= 1.0:
        raise SpectralConditionError(
            f'beta={beta} is outside admissible beta range: beta * alpha * ||u0|| must stay below 1 '
            f'(beta < {1.0 / (alpha * model.profile.sup_norm):.6g})')
    if isinstance(model.profile, CubeProfile):
        return -math.log1p(-(beta * alpha * model.profile.height) ** 2)
    sums = _overlap_sum(model, lambda u: np.log1p(-(beta * alpha * u) ** 2))
    return float(-sums.min())


def mgf_sup_alloy(model: AlloyModel, beta: float) -> float:
    """ess sup over the cell of E[exp(-beta U_j(x))] for the alloy background U_j."""
    coupling = model.coupling
    if isinstance(coupling, LaplaceCoupling):
        return (1.0 - (beta * coupling.scale * model.v1) ** 2) * math.exp(k_beta(model, coupling.scale, beta))
    if coupling.nonnegative:
        return 1.0
    overlap = float(_overlap_sum(model, lambda u: u).max())
    return math.exp(beta * abs(coupling.value) * overlap)


def mgf_sup_gaussian(model: CovarianceModel, s: float, beta: float, points) -> float:
    """max over points of exp(beta^2 Var U(x) / 2) with Var U(x) = C(0) - u(x)^2."""
    u = np.atleast_1d(gaussian_u_profile(model, s, np.atleast_2d(points)))
    variance = np.clip(model.c0 - u ** 2, 0.0, None).max()
    return math.exp(0.5 * beta ** 2 * variance)


def w_alloy_uniform(energy: float, dimension: int, beta: float, gmax: float, v1: float) -> float:
    """Density-of-states bound for alloys with bounded coupling density."""
    return (1.0 + (2.0 * math.pi * beta) ** -0.5) ** dimension * gmax / v1 * np.exp(beta * energy)


def w_alloy_laplace(energy: float, dimension: int, beta: float, alpha: float, v1: float, k: float) -> float:
    """Density-of-states bound for Laplace-distributed couplings of scale alpha."""
    if beta * alpha * v1 >= 1.0:
        raise SpectralConditionError(f'beta={beta} is outside admissible beta range for alpha={alpha}, v1={v1}')
    return ((1.0 + (2.0 * math.pi * beta) ** -0.5) ** dimension
            * (1.0 - (beta * alpha * v1) ** 2) / (2.0 * alpha * v1) * np.exp(beta * energy + k))


@dataclass(frozen=True)
class GaussBoundParams:
    c0: float
    ell: float
    s: float
    B_ell: float
    b_ell: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0 or self.b_ell < self.gamma * (1 - 1e-12):
            raise ConfigError(f'Gaussian constants need b_ell >= gamma > 0, got b={self.b_ell}, gamma={self.gamma}')
        if self.b_ell > self.B_ell * (1 + 1e-12):
            raise ConfigError(f'Gaussian constants need b_ell <= B_ell, got {self.b_ell} > {self.B_ell}')

    @property
    def C_ell(self) -> float:
        return self.c0 * (1.0 + self.B_ell ** 2 - self.b_ell ** 2)


def correlation_scale(model: CovarianceModel) -> float:
    if model.builtin:
        return model.tau
    return model.reach / EMBEDDING_PADDING_TAUS


def _cube_points(dimension: int, ell: float) -> np.ndarray:
    per_axis = 11 if dimension < 3 else 9
    axis = np.linspace(-0.5 * ell, 0.5 * ell, per_axis)
    mesh = np.meshgrid(*([axis] * dimension), indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


def _u_extremes(model: CovarianceModel, s: float, ell: float) -> Tuple[float, float]:
    """sup and inf of u / sqrt(C(0)) over the cube of edge ell centred at the origin."""
    root = math.sqrt(model.c0)
    d = model.dimension
    if model.builtin:
        if s == 0:
            return 1.0, math.exp(-d * ell ** 2 / (8.0 * model.tau ** 2))
        centre = gaussian_u_profile(model, s, np.zeros(d)) / root
        return centre, centre * math.exp(-d * ell ** 2 / (8.0 * (model.tau ** 2 + s ** 2)))
    u = np.atleast_1d(gaussian_u_profile(model, s, _cube_points(d, ell))) / root
    return float(u.max()), float(u.min())


def max_admissible_ell(model: CovarianceModel, s: float, gamma: float) -> float:
    """Largest cube edge with u >= gamma sqrt(C(0)) on the whole cube."""
    d = model.dimension
    if model.builtin:
        centre = _u_extremes(model, s, 0.0)[0]
        if centre <= gamma:
            return 0.0
        return math.sqrt(8.0 * (model.tau ** 2 + s ** 2) * math.log(centre / gamma) / d)
    if _u_extremes(model, s, 0.0)[1] <= gamma:
        return 0.0
    upper = correlation_scale(model)
    while _u_extremes(model, s, upper)[1] > gamma:
        upper *= 2.0
        if upper > 1e6 * correlation_scale(model):
            return upper
    return brentq(lambda ell: _u_extremes(model, s, ell)[1] - gamma, 0.0, upper, xtol=1e-12)


def gauss_constants(model: CovarianceModel, s: float, ell: float, gamma: Optional[float] = None) -> GaussBoundParams:
    """
    Constants B_ell, b_ell, C_ell of the Gaussian bound for the cube of edge ell.

    Args:
        model: covariance model
        s    : mollifier width of the decomposition
        ell  : edge of the cube centred at the origin
        gamma: containment level; the cube must lie in {u >= gamma sqrt(C(0))} (defaults to b_ell)

    Raises:
        ConfigError: if the cube leaves the containment set, naming the largest admissible edge
    """
    if not ell > 0:
        raise ConfigError(f'Cube edge must be positive, got {ell}')
    B_ell, b_ell = _u_extremes(model, s, ell)
    if gamma is None:
        gamma = b_ell
    if b_ell < gamma or not b_ell > 0:
        limit = max_admissible_ell(model, s, gamma) if gamma > 0 else 0.0
        raise ConfigError(f'Cube of edge {ell} is not contained in {{u >= {gamma} sqrt(C0)}}; '
                          f'largest admissible edge is {limit:.6g}')
    return GaussBoundParams(model.c0, ell, s, B_ell, b_ell, gamma)


def log_w_gauss(energy: float, dimension: int, beta: float, params: GaussBoundParams) -> float:
    """
    Natural log of the Gaussian density-of-states bound, in closed form.

    Args:
        energy   : energy E
        dimension: space dimension d
        beta     : inverse temperature of the trace bound
        params   : constants of the cube of edge ell

    Returns:
        float: ln W_G(E), finite even where W_G itself under- or overflows
    """
    prefactor = dimension * math.log(2.0 / params.ell + (2.0 * math.pi * beta) ** -0.5)
    normalization = math.log(math.sqrt(2.0 * math.pi * params.c0) * params.b_ell)
    return prefactor + beta * energy + 0.5 * beta ** 2 * params.C_ell - normalization


def w_gauss(energy: float, dimension: int, beta: float, params: GaussBoundParams) -> float:
    """Density-of-states bound for Gaussian random potentials."""
    with np.errstate(over='ignore', under='ignore'):
        return float(np.exp(log_w_gauss(energy, dimension, beta, params)))


@dataclass(frozen=True)
class SearchAxis:
    name: str
    grid: np.ndarray
    log: bool

    def to_internal(self, value: float) -> float:
        return math.log(value) if self.log else value

    def to_value(self, internal: float) -> float:
        return math.exp(internal) if self.log else internal

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.to_internal(self.grid[0]), self.to_internal(self.grid[-1])


@dataclass(frozen=True)
class BoundProblem:
    """One density-of-states bound family together with its model."""
    family: str
    model: object
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.family not in families:
            raise ConfigError(f'Unknown bound family {self.family!r}; choose one of {families}')
        if self.family == 'alloy-uniform':
            if not isinstance(self.model, AlloyModel) or not isinstance(self.model.coupling, UniformDensity):
                raise ConfigError('The alloy-uniform bound needs an alloy model with a uniform coupling law.')
        elif self.family == 'alloy-laplace':
            if not isinstance(self.model, AlloyModel) or not isinstance(self.model.coupling, LaplaceCoupling):
                raise ConfigError('The alloy-laplace bound needs an alloy model with a Laplace coupling law.')
        elif not isinstance(self.model, CovarianceModel):
            raise ConfigError('The gauss bound needs a covariance model.')

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def beta_limit(self) -> float:
        if self.family == 'alloy-laplace':
            return (1.0 - 1e-9) / (self.model.coupling.scale * self.model.profile.sup_norm)
        scale = math.sqrt(self.model.c0) if self.family == 'gauss' else 1.0
        return BETA_RANGE[1] / scale

    def value(self, energy: float, beta: float, ell: float = math.nan, s: float = math.nan) -> float:
        """The bound W(E) at fixed parameters."""
        if self.family == 'alloy-uniform':
            return float(w_alloy_uniform(energy, self.dimension, beta,
                                         self.model.coupling.density_sup, self.model.v1))
        if self.family == 'alloy-laplace':
            alpha = self.model.coupling.scale
            return float(w_alloy_laplace(energy, self.dimension, beta, alpha, self.model.v1,
                                         k_beta(self.model, alpha, beta)))
        params = gauss_constants(self.model, s, ell, self.gamma)
        return w_gauss(energy, self.dimension, beta, params)

    def axes(self) -> List[SearchAxis]:
        scale = math.sqrt(self.model.c0) if self.family == 'gauss' else 1.0
        low = BETA_RANGE[0] / scale
        high = self.beta_limit
        if not high > low:
            raise ConfigError(f'Empty feasible beta range for {self.family}: [{low:.3g}, {high:.3g}]')
        axes = [SearchAxis('beta', np.geomspace(low, high, SEARCH_POINTS), True)]
        if self.family == 'gauss':
            tau = correlation_scale(self.model)
            ell_low = ELL_FLOOR * tau
            ell_high = ELL_CEILING_TAUS * tau
            if self.gamma is not None:
                ell_high = min(ell_high, max_admissible_ell(self.model, 0.0, self.gamma))
            if not ell_high > ell_low:
                raise ConfigError(f'Empty feasible cube-edge range for gamma={self.gamma}')
            axes.append(SearchAxis('ell', np.geomspace(ell_low, ell_high, SEARCH_POINTS), True))
            s_grid = np.concatenate([[0.0], np.geomspace(1e-3 * tau, S_MAX_TAUS * tau, SEARCH_POINTS - 1)])
            axes.append(SearchAxis('s', s_grid, False))
        return axes

    def defaults(self) -> Dict[str, float]:
        if self.family == 'gauss':
            tau = correlation_scale(self.model)
            ell = tau
            if self.gamma is not None:
                ell = min(ell, 0.5 * max_admissible_ell(self.model, 0.0, self.gamma))
            return {'beta': 1.0 / math.sqrt(self.model.c0), 'ell': ell, 's': 0.0}
        return {'beta': min(1.0, 0.5 * self.beta_limit)}

    def objective(self, energy: float, point: Dict[str, float]) -> float:
        try:
            value = self.value(energy, **point)
        except (LabError, ValueError, OverflowError):
            return math.inf
        return value if math.isfinite(value) else math.inf


def _line_search(objective: Callable[[float], float], axis: SearchAxis, values: np.ndarray) -> Tuple[float, float]:
    """Golden-section refinement around the best grid point of one axis."""
    index = int(np.argmin(values))
    internal = [axis.to_internal(v) for v in axis.grid]
    best_x, best_f = internal[index], float(values[index])
    if not math.isfinite(best_f):
        return best_x, best_f
    if 0 < index < len(internal) - 1 and values[index] < values[index - 1] and values[index] < values[index + 1]:
        result = minimize_scalar(objective, bracket=(internal[index - 1], best_x, internal[index + 1]),
                                 method='golden', options={'xtol': 1e-10})
    else:
        neighbour = internal[1] if index == 0 else internal[-2] if index == len(internal) - 1 else None
        if neighbour is None:
            return best_x, best_f
        low, high = sorted((best_x, neighbour))
        result = minimize_scalar(objective, bounds=(low, high), method='bounded', options={'xatol': 1e-10})
    if result.fun < best_f:
        return float(result.x), float(result.fun)
    return best_x, best_f


def minimize_bound(problem: BoundProblem, energy: float, start: Optional[Dict[str, float]] = None,
                   fixed: Optional[Dict[str, float]] = None) -> Tuple[float, Dict[str, float]]:
    """
    Minimizes the bound over its parameters at one energy.

    Coordinate descent: each coordinate is scanned on a logarithmic grid of
    SEARCH_POINTS values and refined by golden-section search; cycles repeat
    (at least REFINE_PASSES times) until the relative gain drops below
    MIN_REL_TOL, then a Nelder-Mead polish runs in the internal coordinates.
    Moves are accepted only when they lower the bound, so the result never
    exceeds the value at the starting point. Parameters named in fixed are
    held at the given values.

    Returns:
        Tuple[float, Dict[str, float]]: the minimum W* and its argmin

    Raises:
        ConfigError: if the feasible set is empty
    """
    # Held parameters drop out of the search
    fixed = fixed or {}
    axes = [axis for axis in problem.axes() if axis.name not in fixed]
    point = dict(problem.defaults() if start is None else start)
    point.update(fixed)
    best = problem.objective(energy, point)
    for cycle in range(MAX_CYCLES):
        previous = best
        for axis in axes:
            def along(internal, axis=axis):
                return problem.objective(energy, {**point, axis.name: axis.to_value(internal)})
            # Scan the whole axis, then refine around the best grid point
            scan = np.array([along(axis.to_internal(v)) for v in axis.grid])
            x, value = _line_search(along, axis, scan)
            low, high = axis.bounds
            if value < best and low <= x <= high:
                best = value
                point[axis.name] = axis.to_value(x)
        if not math.isfinite(best):
            raise ConfigError(f'No feasible parameters for {problem.family} at E={energy}')
        if cycle + 1 >= REFINE_PASSES and previous - best <= MIN_REL_TOL * best:
            break

    # Joint Nelder-Mead polish in the internal coordinates
    if len(axes) > 1:
        bounds = [axis.bounds for axis in axes]

        def joint(internal):
            return problem.objective(energy, {**fixed, **{a.name: a.to_value(x) for a, x in zip(axes, internal)}})

        start_internal = [axis.to_internal(point[axis.name]) for axis in axes]
        polished = minimize(joint, start_internal, method='Nelder-Mead', bounds=bounds,
                            options={'xatol': 1e-10, 'fatol': 1e-14 * best, 'maxiter': 2000})
        if polished.fun < best:
            best = float(polished.fun)
            point = {**fixed, **{a.name: a.to_value(x) for a, x in zip(axes, polished.x)}}
    logger.info(f'{problem.family} bound at E={energy:g}: W*={best:.6g} at {point}')
    return best, point


@dataclass(frozen=True, eq=False)
class BoundCurve:
    family: str
    energies: np.ndarray
    values: np.ndarray
    argmins: List[Dict[str, float]]
    constants: dict = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'E': self.energies,
            'W': self.values,
            'beta_star': [p.get('beta', math.nan) for p in self.argmins],
            'ell_star': [p.get('ell', math.nan) for p in self.argmins],
            's_star': [p.get('s', math.nan) for p in self.argmins],
            'family': self.family,
        })


def problem_constants(problem: BoundProblem) -> dict:
    model = problem.model
    constants = {'family': problem.family, 'dimension': problem.dimension}
    if isinstance(model, AlloyModel):
        constants.update(v1=model.v1, v2=model.v2, R=model.coupling.density_sup)
        if isinstance(model.coupling, LaplaceCoupling):
            constants['alpha'] = model.coupling.scale
    else:
        constants.update(c0=model.c0, tau=model.tau, gamma=problem.gamma)
    return constants


def _minimize_at(problem: BoundProblem, energy: float) -> Tuple[float, Dict[str, float]]:
    return minimize_bound(problem, energy)


def minimize_curve(problem: BoundProblem, energies: Sequence[float], jobs: int = 1) -> BoundCurve:
    """
    Minimized bound on an ascending energy grid.

    A backward sweep re-evaluates each energy at the argmin of its upper
    neighbour and keeps the smaller value, so the curve is nondecreasing.
    """
    energies = np.asarray(energies, dtype=float)
    if np.any(np.diff(energies) < 0):
        raise ConfigError('Bound energies must be ascending.')
    results = parallel_map(partial(_minimize_at, problem), list(energies), jobs)
    values = np.array([r[0] for r in results])
    argmins = [dict(r[1]) for r in results]
    # Backward sweep: a higher energy's argmin can serve the lower one
    for i in range(energies.size - 2, -1, -1):
        candidate = problem.objective(energies[i], argmins[i + 1])
        if candidate < values[i]:
            values[i] = candidate
            argmins[i] = dict(argmins[i + 1])
    return BoundCurve(problem.family, energies, values, argmins, problem_constants(problem))


def evaluate_curve(problem: BoundProblem, energies: Sequence[float],
                   params: Optional[Dict[str, float]] = None) -> BoundCurve:
    """The bound at fixed parameters (the family defaults if none are given)."""
    energies = np.asarray(energies, dtype=float)
    point = dict(problem.defaults() if params is None else params)
    values = np.array([problem.value(e, **point) for e in energies])
    return BoundCurve(problem.family, energies, values, [dict(point) for _ in energies],
                      problem_constants(problem))


def asymptotic_limits(model: CovarianceModel, s: float = 0.0) -> Tuple[float, float]:
    """Low-energy limit of ln W / E^2 and high-energy limit of W / E^(d/2)."""
    d = model.dimension
    u_centre = gaussian_u_profile(model, s, np.zeros(d))
    high = (math.e / (math.pi * d)) ** (d / 2.0) / (math.sqrt(2.0 * math.pi) * u_centre)
    return -1.0 / (2.0 * model.c0), high


def gauss_asymptotics(model: CovarianceModel, s: float, energies: Sequence[float]) -> pd.DataFrame:
    """
    Gaussian bound along ell = |E|^(-1/4), beta = (sqrt(E^2 + 2 d C_ell) - E) / (2 C_ell).

    Returns:
        pd.DataFrame: columns E, regime, ell, beta, W, ratio, limit; the ratio is
        ln W / E^2 for E < 0 and W / E^(d/2) for E > 0
    """
    d = model.dimension
    low_limit, high_limit = asymptotic_limits(model, s)
    rows = []
    for energy in energies:
        if energy == 0:
            raise ConfigError('Asymptotic energies must be nonzero.')
        if abs(energy) / math.sqrt(model.c0) < ASYMPTOTIC_ENERGY_FLOOR:
            logger.warning(f'Asymptotic energy E={energy} is small compared to sqrt(C0)={math.sqrt(model.c0):g}')
        # Prescribed choices: ell = |E|^(-1/4), beta from the quadratic in the exponent
        ell = abs(energy) ** -0.25
        params = gauss_constants(model, s, ell)
        c_ell = params.C_ell
        beta = (math.sqrt(energy ** 2 + 2.0 * d * c_ell) - energy) / (2.0 * c_ell)
        log_value = log_w_gauss(energy, d, beta, params)
        value = w_gauss(energy, d, beta, params)
        if energy < 0:
            # W itself underflows far below the spectrum
            rows.append((energy, 'low', ell, beta, value, log_value / energy ** 2, low_limit))
        else:
            rows.append((energy, 'high', ell, beta, value, value / energy ** (d / 2.0), high_limit))
    return pd.DataFrame(rows, columns=['E', 'regime', 'ell', 'beta', 'W', 'ratio', 'limit'])


def problem_from_config(config: dict, model) -> BoundProblem:
    section = config.get('wegner', {})
    family = section.get('family')
    if family is None:
        if isinstance(model, CovarianceModel):
            family = 'gauss'
        elif isinstance(model, AlloyModel) and isinstance(model.coupling, LaplaceCoupling):
            family = 'alloy-laplace'
        else:
            family = 'alloy-uniform'
    return BoundProblem(family, model, section.get('gamma'))

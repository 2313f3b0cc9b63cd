import math

import numpy as np
import pytest
from scipy import sparse
from scipy.linalg import expm

from config import DENSE_LIMIT
from operator_functions import ConstantFieldGauge, GridSpec, assemble
from spectral_functions import (
    EnergyInterval,
    Spectrum,
    count_in_interval,
    eigenvalues,
    finite_volume_ids,
    heat_trace,
    resolvent_power_apply,
    resolvent_power_quadrature,
    semigroup_apply,
)
from support_functions import ConfigError, ResourceLimitError, SpectralConditionError


@pytest.fixture
def magnetic_operator():
    grid = GridSpec.cube(2, 4, 1.0)
    potential = np.random.default_rng(0).uniform(0, 1, grid.n_nodes)
    return assemble(grid, 'N', ConstantFieldGauge.planar(1.0), potential)


def test_two_node_dirichlet_spectrum():
    spectrum = eigenvalues(assemble(GridSpec.cube(1, 2), 'D'))
    np.testing.assert_allclose(spectrum.eigenvalues, [1.0, 2.0])


def test_counting_respects_interval_ends():
    spectrum = Spectrum(np.array([0.0, 1.0, 1.0, 2.0]))
    assert count_in_interval(spectrum, EnergyInterval(1.0, 2.0)).count == 3
    assert count_in_interval(spectrum, EnergyInterval(1.0, 2.0, closed_lower=False)).count == 1
    assert count_in_interval(spectrum, EnergyInterval(1.0, 2.0, closed_upper=False)).count == 2
    assert count_in_interval(spectrum, EnergyInterval(5.0, 6.0), volume=2.0).per_volume == 0.0
    with pytest.raises(ConfigError):
        EnergyInterval(1.0, 1.0)


def test_ids_counts_strictly_below():
    spectrum = eigenvalues(assemble(GridSpec.cube(1, 2), 'D'))
    assert finite_volume_ids(Spectrum(np.array([1.0, 2.0])), 1.0, 2.0) == 0.0
    np.testing.assert_allclose(finite_volume_ids(spectrum, np.array([1.5, 2.5]), 2.0), [0.5, 1.0])


def test_heat_trace():
    spectrum = eigenvalues(assemble(GridSpec.cube(1, 2), 'N'))
    assert heat_trace(spectrum, 1.0) == pytest.approx(1.0 + math.exp(-1.0), rel=1e-12)
    with pytest.raises(SpectralConditionError):
        heat_trace(Spectrum(np.array([-1000.0, 0.0])), 1.0)


def test_dense_limit():
    with pytest.raises(ResourceLimitError):
        eigenvalues(sparse.identity(DENSE_LIMIT + 1, format='csr'))


def test_semigroup_matches_matrix_exponential(magnetic_operator):
    psi = np.random.default_rng(1).standard_normal(magnetic_operator.size)
    expected = expm(-0.7 * magnetic_operator.dense()) @ psi
    np.testing.assert_allclose(semigroup_apply(magnetic_operator, 0.7, psi), expected, atol=1e-12)
    np.testing.assert_array_equal(semigroup_apply(magnetic_operator, 0.0, psi), psi)
    with pytest.raises(ConfigError):
        semigroup_apply(magnetic_operator, -1.0, psi)


def test_semigroup_property(magnetic_operator):
    psi = np.random.default_rng(2).standard_normal(magnetic_operator.size)
    composed = semigroup_apply(magnetic_operator, 0.3, semigroup_apply(magnetic_operator, 0.4, psi))
    np.testing.assert_allclose(composed, semigroup_apply(magnetic_operator, 0.7, psi), atol=1e-12)


def test_eigenvalues_sum_to_the_trace(magnetic_operator):
    spectrum = eigenvalues(magnetic_operator)
    assert spectrum.eigenvalues.sum() == pytest.approx(magnetic_operator.diagonal().sum(), rel=1e-12)


def test_scalar_resolvent():
    np.testing.assert_allclose(resolvent_power_apply(np.array([[2.0]]), 0.0, 1.0, [1.0]), [0.5])


@pytest.mark.parametrize('alpha', [0.5, 1.0, 2.0])
def test_resolvent_quadrature_matches_direct(magnetic_operator, alpha):
    spectrum = eigenvalues(magnetic_operator, vectors=True)
    z = spectrum.minimum - 1.0 + 0.5j
    psi = np.random.default_rng(2).standard_normal(magnetic_operator.size)
    direct = resolvent_power_apply(spectrum, z, alpha, psi)
    np.testing.assert_allclose(resolvent_power_quadrature(spectrum, z, alpha, psi), direct, rtol=1e-6, atol=1e-6)


def test_resolvent_needs_point_below_spectrum(magnetic_operator):
    spectrum = eigenvalues(magnetic_operator, vectors=True)
    with pytest.raises(SpectralConditionError):
        resolvent_power_apply(spectrum, spectrum.minimum + 0.1, 1.0, np.ones(spectrum.size))
    with pytest.raises(ConfigError):
        resolvent_power_apply(spectrum, spectrum.minimum - 1.0, 0.0, np.ones(spectrum.size))


def test_eigenvector_residual(magnetic_operator):
    spectrum = eigenvalues(magnetic_operator, vectors=True)
    assert spectrum.residual < 1e-10
    frame = spectrum.frame()
    assert list(frame.columns) == ['index', 'eigenvalue']
    assert frame['eigenvalue'].is_monotonic_increasing

import math

import numpy as np
import pytest

from field_functions import (
    AlloyModel,
    CovarianceModel,
    CubeProfile,
    FixedCoupling,
    LaplaceCoupling,
    TabulatedProfile,
    UniformDensity,
    alloy_field,
    alloy_grid,
    decompose_alloy,
    decompose_gaussian,
    gaussian_u_profile,
    model_from_config,
    mollifier_normalization,
    mollifier_weights,
    restrict_field,
    sample_alloy,
    sample_field,
    sample_gaussian,
)
from operator_functions import GridSpec
from support_functions import ConfigError, SpectralConditionError


def test_alloy_is_reproducible():
    model = AlloyModel(2)
    grid = alloy_grid(2, 4)
    first = sample_alloy(model, grid, 11)
    assert np.array_equal(first.values, sample_alloy(model, grid, 11).values)
    assert not np.array_equal(first.values, sample_alloy(model, grid, 12).values)


def test_alloy_couplings_do_not_depend_on_the_box():
    model = AlloyModel(2)
    small = sample_alloy(model, alloy_grid(2, 3), 5)
    large = sample_alloy(model, alloy_grid(2, 5), 5)
    assert small.coupling_of((1, 2)) == large.coupling_of((1, 2))


def test_cube_profile_puts_one_coupling_per_cell():
    model = AlloyModel(2)
    realization = sample_alloy(model, alloy_grid(2, 3, refinement=2), 3)
    values = realization.values
    assert values[0, 0] == values[1, 1] == realization.coupling_of((0, 0))
    assert values[4, 5] == realization.coupling_of((2, 2))
    assert np.all((values >= 0) & (values <= 1))


def test_zero_coupling_gives_zero_field():
    model = AlloyModel(1, coupling=FixedCoupling(0.0))
    assert not np.any(sample_alloy(model, alloy_grid(1, 6), 1).values)


def test_explicit_couplings():
    model = AlloyModel(1)
    realization = alloy_field(model, alloy_grid(1, 3), {(0,): 0.5, (2,): 2.0})
    np.testing.assert_allclose(realization.values, [0.5, 0.0, 2.0])


def test_alloy_grid_alignment_is_enforced():
    with pytest.raises(ConfigError):
        sample_alloy(AlloyModel(2), GridSpec.cube(2, 3, 1.0, 0.0), 0)
    with pytest.raises(ConfigError):
        sample_alloy(AlloyModel(2), GridSpec.cube(2, 3, 0.4, -0.5), 0)


def test_alloy_bounds_checked():
    with pytest.raises(ConfigError):
        AlloyModel(2, v1=2.0)
    model = AlloyModel(1, TabulatedProfile.from_array(0.5, [0.5, 1.0, 1.0, 0.5]))
    assert (model.v1, model.v2) == (1.0, 1.0)


def test_coupling_laws():
    assert UniformDensity((0.0, 0.5)).density_sup == 2.0
    assert LaplaceCoupling(0.25).density_sup == 2.0
    assert math.isinf(FixedCoupling(1.0).density_sup)
    with pytest.raises(ConfigError):
        UniformDensity((1.0, 1.0))


def test_realization_is_read_only():
    realization = sample_alloy(AlloyModel(1), alloy_grid(1, 2), 0)
    with pytest.raises(ValueError):
        realization.values[0] = 1.0
    with pytest.raises(ConfigError):
        realization.coupling_of((7,))


def test_gaussian_node_variance():
    model = CovarianceModel(0.25, 1, tau=1.0)
    grid = GridSpec.cube(1, 8, 0.5)
    samples = np.array([sample_gaussian(model, grid, seed).values[3] for seed in range(400)])
    stderr = math.sqrt(2.0) * model.c0 / math.sqrt(samples.size)
    assert abs(np.mean(samples ** 2) - model.c0) < 4 * stderr


def test_gaussian_is_reproducible():
    model = CovarianceModel(1.0, 2, tau=2.0)
    grid = GridSpec.cube(2, 6)
    assert np.array_equal(sample_field(model, grid, 9).values, sample_field(model, grid, 9).values)


def test_spectral_embedding_path():
    model = CovarianceModel(1.0, 1, tau=2.0)
    grid = GridSpec.cube(1, 5000, 1.0)
    realization = sample_gaussian(model, grid, 4)
    assert realization.values.shape == (5000,)
    assert np.all(np.isfinite(realization.values))
    assert 0.5 < np.var(realization.values) < 1.5
    assert np.array_equal(realization.values, sample_gaussian(model, grid, 4).values)


def test_indefinite_table_is_rejected():
    model = CovarianceModel.tabulate(1.0, 1, [0.0, 1.0, 2.0, 3.0], [1.0, 1.0, -1.0, 0.0])
    with pytest.raises(SpectralConditionError, match='most negative eigenvalue'):
        sample_gaussian(model, GridSpec.cube(1, 3), 0)


def test_covariance_validation():
    with pytest.raises(ConfigError):
        CovarianceModel(1.0, 2)
    with pytest.raises(ConfigError):
        CovarianceModel(-1.0, 2, tau=1.0)
    with pytest.raises(ConfigError):
        CovarianceModel.tabulate(1.0, 1, [0.0, 1.0, 2.0, 3.0], [0.9, 0.5, 0.1, 0.0])


def test_u_profile_closed_form():
    model = CovarianceModel(1.0, 2, tau=1.0)
    assert gaussian_u_profile(model, 0.0, [0.5, 0.5]) == pytest.approx(math.exp(-0.25))
    assert gaussian_u_profile(model, 0.5, [0.0, 0.0]) <= 1.0


def test_mollifier_normalization():
    model = CovarianceModel(2.0, 3, tau=1.5)
    assert mollifier_normalization(model, 0.0) == 1.0
    s = 0.4
    kappa = mollifier_normalization(model, s)
    assert kappa ** 2 * model.c0 * (1 + 2 * s ** 2 / model.tau ** 2) ** -1.5 == pytest.approx(model.c0)


def test_tabulated_profile_matches_builtin():
    builtin = CovarianceModel(1.0, 1, tau=1.0)
    radii = np.linspace(0.0, 8.0, 801)
    table = CovarianceModel.tabulate(1.0, 1, radii, np.exp(-radii ** 2 / 2))
    for x in (0.0, 0.3, 1.2):
        assert gaussian_u_profile(table, 0.5, [x]) == pytest.approx(gaussian_u_profile(builtin, 0.5, [x]), rel=1e-5)


def test_mollifier_weights():
    weights = mollifier_weights(GridSpec.cube(1, 200, 0.05, -5.0), 0.5)
    assert weights.sum() == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ConfigError):
        mollifier_weights(GridSpec.cube(1, 10, 1.0, -5.0), 0.1)
    with pytest.raises(ConfigError):
        mollifier_weights(GridSpec.cube(1, 4, 1.0, -2.0), 0.0)


def test_alloy_decomposition_reconstructs():
    model = AlloyModel(2)
    realization = sample_alloy(model, alloy_grid(2, 3), 8)
    split = decompose_alloy(realization, model, (1, 1))
    np.testing.assert_allclose(split.reconstruct(), realization.values, atol=1e-12)
    assert split.background.values[1, 1] == 0.0
    assert split.density_sup == 1.0


def test_gaussian_decomposition_with_dirac_mollifier():
    model = CovarianceModel(0.5, 1, tau=1.0)
    grid = GridSpec.cube(1, 5, 1.0, -2.5)
    realization = sample_gaussian(model, grid, 2)
    split = decompose_gaussian(model, realization, 0.0)
    assert split.coupling == pytest.approx(realization.values[2] / math.sqrt(model.c0))
    np.testing.assert_allclose(split.reconstruct(), realization.values, atol=1e-12)
    assert split.background.values[2] == pytest.approx(0.0, abs=1e-12)


def test_restrict_field():
    realization = sample_alloy(AlloyModel(2), alloy_grid(2, 4), 1)
    sub = realization.grid.subgrid((1, 2), (2, 2))
    np.testing.assert_array_equal(restrict_field(realization, sub).values, realization.values[1:3, 2:4])


def test_model_from_config():
    assert model_from_config({'kind': 'none'}, 2) is None
    alloy = model_from_config({'kind': 'alloy', 'law': 'uniform', 'gmax': 2.0}, 2)
    assert alloy.coupling.support == (0.0, 0.5)
    assert isinstance(alloy.profile, CubeProfile)
    gaussian = model_from_config({'kind': 'gaussian', 'c0': 0.04, 'tau': 100.0}, 2)
    assert gaussian.tau == 100.0
    with pytest.raises(ConfigError):
        model_from_config({'kind': 'alloy', 'law': 'laplace'}, 1)


def test_uniform_alloy_mean():
    model = AlloyModel(1)
    grid = alloy_grid(1, 200)
    values = np.concatenate([sample_alloy(model, grid, seed).values for seed in range(50)])
    stderr = math.sqrt(1.0 / 12.0) / math.sqrt(values.size)
    assert abs(values.mean() - 0.5) < 4 * stderr


@pytest.mark.slow
def test_gaussian_lag_covariance():
    model = CovarianceModel(1.0, 1, tau=1.0)
    grid = GridSpec.cube(1, 8, 1.0)
    samples = np.array([sample_gaussian(model, grid, seed).values for seed in range(20000)])
    for lag in (1, 2):
        estimate = np.mean(samples[:, 3] * samples[:, 3 + lag])
        expected = math.exp(-lag ** 2 / 2.0)
        stderr = math.sqrt((1.0 + expected ** 2) / samples.shape[0])
        assert abs(estimate - expected) < 4 * stderr, lag


@pytest.mark.slow
def test_mollified_coupling_is_standard_and_independent():
    model = CovarianceModel(1.0, 1, tau=1.0)
    grid = GridSpec.cube(1, 80, 0.25, -10.0)
    draws = 10000
    couplings = np.empty(draws)
    backgrounds = np.empty((draws, 2))
    for seed in range(draws):
        split = decompose_gaussian(model, sample_gaussian(model, grid, seed), 0.5)
        couplings[seed] = split.coupling
        # nodes at x = 0.125 and x = 1.125
        backgrounds[seed] = split.background.values[[40, 44]]
    assert abs(couplings.mean()) < 4 / math.sqrt(draws)
    assert abs(couplings.var() - 1.0) < 4 * math.sqrt(2.0 / draws)
    for column in backgrounds.T:
        assert abs(np.corrcoef(couplings, column)[0, 1]) < 4 / math.sqrt(draws)

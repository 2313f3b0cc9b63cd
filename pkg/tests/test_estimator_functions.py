import math

import numpy as np
import pytest

from field_functions import AlloyModel, CovarianceModel, FixedCoupling, alloy_grid
from operator_functions import ConstantFieldGauge, GridSpec
from estimator_functions import (
    EnsembleSpec,
    MCResult,
    chebyshev_check,
    ensemble_from_config,
    ensemble_spectra,
    expected_counting,
    ids_curve,
    ids_size_sweep,
    resized_grid,
)
from spectral_functions import EnergyInterval
from support_functions import ConfigError, EnsembleError, ResourceLimitError


@pytest.fixture
def alloy_ensemble():
    return EnsembleSpec(AlloyModel(2), alloy_grid(2, 4), ConstantFieldGauge.planar(1.0), 'N',
                        realizations=12, base_seed=7)


def test_seeds_are_base_xor_index():
    spec = EnsembleSpec(None, GridSpec.cube(1, 2), ConstantFieldGauge.zero(1), realizations=4, base_seed=5)
    assert spec.seeds == [5, 4, 7, 6]
    with pytest.raises(ConfigError):
        EnsembleSpec(None, GridSpec.cube(1, 2), ConstantFieldGauge.zero(1), realizations=0)


def test_mc_result_statistics():
    result = MCResult.from_values([1.0, 2.0, 3.0], keep=True)
    assert result.mean == 2.0
    assert result.stderr == pytest.approx(1.0 / math.sqrt(3.0))
    assert result.realizations == 3
    assert MCResult.from_values([4.0]).stderr == 0.0


def test_free_ensemble_counts_are_exact():
    spec = EnsembleSpec(None, GridSpec.cube(1, 2), ConstantFieldGauge.zero(1), 'D', realizations=3)
    result = expected_counting(spec, EnergyInterval(0.5, 1.5))
    assert (result.mean, result.stderr) == (1.0, 0.0)


def test_fixed_coupling_shifts_the_spectrum():
    model = AlloyModel(1, coupling=FixedCoupling(2.0))
    spec = EnsembleSpec(model, alloy_grid(1, 2), ConstantFieldGauge.zero(1), 'D', realizations=2)
    spectra = ensemble_spectra(spec)
    np.testing.assert_allclose(spectra[0].eigenvalues, [3.0, 4.0])


def test_dirichlet_ids_below_neumann(alloy_ensemble):
    energies = np.linspace(0.0, 3.0, 13)
    neumann = ids_curve(alloy_ensemble, energies)
    dirichlet = ids_curve(alloy_ensemble.with_boundary('D'), energies)
    for low, high in zip(dirichlet, neumann):
        assert low.mean <= high.mean
    means = [r.mean for r in neumann]
    assert means == sorted(means)


def test_ids_energies_must_ascend(alloy_ensemble):
    with pytest.raises(ConfigError):
        ids_curve(alloy_ensemble, [1.0, 0.0])


def test_results_do_not_depend_on_worker_count(alloy_ensemble):
    energies = [0.5, 1.0, 2.0]
    serial = ids_curve(alloy_ensemble, energies, jobs=1)
    pooled = ids_curve(alloy_ensemble, energies, jobs=2)
    assert [r.mean for r in serial] == [r.mean for r in pooled]
    assert [r.stderr for r in serial] == [r.stderr for r in pooled]


def test_failed_realization_names_its_seed():
    model = CovarianceModel.tabulate(1.0, 1, [0.0, 1.0, 2.0, 3.0], [1.0, 1.0, -1.0, 0.0])
    spec = EnsembleSpec(model, GridSpec.cube(1, 3), ConstantFieldGauge.zero(1), realizations=2, base_seed=5)
    with pytest.raises(EnsembleError) as info:
        ensemble_spectra(spec)
    assert info.value.seed == 5
    assert 'seed 5' in str(info.value)


def test_large_box_is_refused_up_front():
    spec = EnsembleSpec(None, GridSpec.cube(2, 91), ConstantFieldGauge.zero(2))
    with pytest.raises(ResourceLimitError):
        ensemble_spectra(spec)


def test_chebyshev_check_passes(alloy_ensemble):
    report = chebyshev_check(alloy_ensemble, EnergyInterval(0.5, 1.0))
    assert report.passed
    assert report.details['frequency'] <= report.details['mean']


def test_size_sweep_frame(alloy_ensemble):
    frame = ids_size_sweep(alloy_ensemble.with_boundary('D'), [2, 4], [0.5, 1.5])
    assert list(frame.columns) == ['size', 'boundary', 'E', 'mean', 'stderr', 'R', 'cauchy']
    assert len(frame) == 4
    assert frame['cauchy'].iloc[:2].isna().all()
    assert frame['cauchy'].iloc[2:].notna().all()
    assert set(frame['boundary']) == {'D'}


def test_resized_grid():
    grid = resized_grid(alloy_grid(2, 4, refinement=2), 3)
    assert grid.shape == (6, 6)
    assert grid.origin == (-0.5, -0.5)
    with pytest.raises(ConfigError):
        resized_grid(GridSpec.cube(1, 4, 0.4), 1.0)


def test_ensemble_from_config():
    config = {
        'schema_version': 1,
        'grid': {'dimension': 2, 'cells': 3, 'spacing': 1.0, 'origin': -0.5},
        'field': {'kind': 'alloy', 'law': 'uniform'},
        'gauge': {'B': 1.0},
        'boundary': ['D', 'N'],
        'ensemble': {'realizations': 4, 'base_seed': 3},
    }
    spec = ensemble_from_config(config)
    assert spec.boundary == 'D'
    assert spec.seeds == [3, 2, 1, 0]
    assert ensemble_from_config(config, 'N').boundary == 'N'
    with pytest.raises(ConfigError):
        ensemble_from_config({'schema_version': 1})

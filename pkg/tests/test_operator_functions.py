import math

import numpy as np
import pytest
from scipy import linalg

from operator_functions import (
    ConstantFieldGauge,
    GridSpec,
    assemble,
    assemble_with_phases,
    bonds,
    decouple,
    decouple_all,
    gauge_transform,
    magnetic_translation_phase,
    peierls_phases,
    pure_gauge_phases,
    vector_potential,
)
from support_functions import ConfigError


def test_two_node_stencils():
    grid = GridSpec.cube(1, 2, 1.0)
    np.testing.assert_allclose(assemble(grid, 'D').dense().real, [[1.5, -0.5], [-0.5, 1.5]])
    np.testing.assert_allclose(assemble(grid, 'N').dense().real, [[0.5, -0.5], [-0.5, 0.5]])


def test_dirichlet_spectrum_is_exact_cosine_law():
    n = 100
    grid = GridSpec.cube(1, n, 1.0 / n)
    values = linalg.eigvalsh(assemble(grid, 'D').dense())
    expected = n ** 2 * (1.0 - np.cos(np.pi * np.arange(1, n + 1) / n))
    np.testing.assert_allclose(np.sort(values), np.sort(expected), rtol=1e-10, atol=1e-8)
    assert values[0] == pytest.approx(0.5 * math.pi ** 2, rel=2e-4)


def test_neumann_constant_mode():
    grid = GridSpec.cube(2, 4, 0.5)
    operator = assemble(grid, 'N')
    np.testing.assert_allclose(operator.matrix @ np.ones(grid.n_nodes), 0.0, atol=1e-12)


def test_magnetic_operator_is_hermitian():
    grid = GridSpec.centred_cube(2, 5, 0.5)
    rng = np.random.default_rng(1)
    operator = assemble(grid, 'D', ConstantFieldGauge.planar(1.3), rng.uniform(-1, 1, grid.n_nodes))
    matrix = operator.dense()
    np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-14)
    assert np.any(np.abs(matrix.imag) > 0)


def test_zero_field_has_no_phases():
    grid = GridSpec.cube(2, 3)
    assert not np.any(peierls_phases(grid, ConstantFieldGauge.zero(2)))
    assert np.array_equal(assemble(grid, 'N', ConstantFieldGauge.planar(0.0)).dense(), assemble(grid, 'N').dense())


def test_bond_count():
    tails, heads, axes = bonds(GridSpec(2, (3, 4), 1.0, (0.0, 0.0)))
    assert tails.size == 2 * 4 + 3 * 3
    assert set(axes) == {0, 1}


def test_symmetric_gauge():
    gauge = ConstantFieldGauge.planar(2.0)
    np.testing.assert_allclose(vector_potential(gauge, [1.0, 0.0]), [0.0, 1.0])
    assert magnetic_translation_phase(gauge, [0.3, 0.4], [0.3, 0.4]) == 0.0


def test_gauge_validation():
    with pytest.raises(ConfigError):
        ConstantFieldGauge.planar(1.0, dimension=1)
    with pytest.raises(ConfigError):
        ConstantFieldGauge(((0.0, 1.0), (1.0, 0.0)))
    with pytest.raises(ConfigError):
        ConstantFieldGauge.from_config([[0.0]], 2)


def test_gauge_transform_keeps_spectrum():
    grid = GridSpec.cube(2, 4, 1.0)
    operator = assemble(grid, 'N', ConstantFieldGauge.planar(0.7), np.linspace(0, 1, grid.n_nodes))
    chi = np.random.default_rng(2).uniform(0, 2 * np.pi, grid.n_nodes)
    np.testing.assert_allclose(linalg.eigvalsh(gauge_transform(operator, chi).dense()),
                               linalg.eigvalsh(operator.dense()), atol=1e-12)


@pytest.mark.parametrize('boundary', ['D', 'N'])
def test_pure_gauge_phases_remove(boundary):
    grid = GridSpec.cube(1, 6, 1.0)
    chi = np.random.default_rng(3).uniform(-3, 3, grid.n_nodes)
    rotated = assemble_with_phases(grid, boundary, pure_gauge_phases(grid, chi))
    np.testing.assert_allclose(linalg.eigvalsh(rotated.dense()), linalg.eigvalsh(assemble(grid, boundary).dense()),
                               atol=1e-12)


def test_potential_validation():
    grid = GridSpec.cube(1, 3)
    with pytest.raises(ConfigError):
        assemble(grid, 'N', None, [0.0, np.nan, 1.0])
    with pytest.raises(ConfigError):
        assemble(grid, 'N', None, [0.0, 1.0])
    with pytest.raises(ConfigError):
        assemble(grid, 'R')


def test_decouple_merges_spectra():
    first = assemble(GridSpec.cube(1, 3, 1.0, 0.0), 'N', None, [1.0, 2.0, 3.0])
    second = assemble(GridSpec.cube(1, 2, 1.0, 10.0), 'N')
    total = decouple(first, second)
    assert total.size == 5
    merged = np.sort(np.concatenate([linalg.eigvalsh(first.dense()), linalg.eigvalsh(second.dense())]))
    np.testing.assert_allclose(linalg.eigvalsh(total.dense()), merged, atol=1e-12)


def test_decouple_neumann_zero_modes_double():
    parts = [assemble(GridSpec.cube(2, 2, 1.0, origin), 'N') for origin in (0.0, 4.0)]
    values = linalg.eigvalsh(decouple_all(parts).dense())
    assert np.sum(np.abs(values) < 1e-12) == 2


def test_decouple_rejects_overlap():
    operator = assemble(GridSpec.cube(1, 3), 'N')
    with pytest.raises(ConfigError):
        decouple(operator, operator)
    with pytest.raises(ConfigError):
        decouple(operator, assemble(GridSpec.cube(1, 3, 1.0, 5.0), 'D'))


def test_split_and_partition():
    grid = GridSpec.cube(2, 6, 0.5)
    first, second = grid.split(axis=1, at=2)
    assert first.shape == (6, 2) and second.shape == (6, 4)
    assert second.origin == (0.0, 1.0)
    cubes = grid.partition(3)
    assert len(cubes) == 4
    assert sum(c.n_nodes for c in cubes) == grid.n_nodes
    with pytest.raises(ConfigError):
        grid.partition(4)
    with pytest.raises(ConfigError):
        grid.split(at=6)


def test_dirichlet_wall_sits_on_the_cell_face():
    grid = GridSpec.cube(2, 3, 0.5)
    neumann = assemble(grid, 'N').dense().real
    dirichlet = assemble(grid, 'D').dense().real
    tails, heads, _ = bonds(grid)
    missing = 2 * grid.dimension - (np.bincount(tails, minlength=grid.n_nodes)
                                    + np.bincount(heads, minlength=grid.n_nodes))
    np.testing.assert_allclose(dirichlet - neumann, np.diag(missing / grid.spacing ** 2))
    # a constant 2d diagonal would give [[1, -1/2], [-1/2, 1]] on two unit cells
    assert assemble(GridSpec.cube(1, 2), 'D').dense()[0, 0].real == 1.5


def test_nearest_node():
    grid = GridSpec.cube(2, 4, 0.5, -1.0)
    assert grid.nearest_node(grid.centre).tolist() == [0.25, 0.25]
    assert grid.nearest_node([-0.2, 0.6]).tolist() == [-0.25, 0.75]
    assert grid.nearest_node([9.0, -9.0]).tolist() == [0.75, -0.75]


def test_decouple_all_needs_an_operator():
    with pytest.raises(ConfigError):
        decouple_all([])

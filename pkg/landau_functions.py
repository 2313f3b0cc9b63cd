import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import gamma

from config import LOGGER_NAME
from support_functions import ConfigError

logger = logging.getLogger(LOGGER_NAME)

MAX_QUADRATURE_ORDER = 512


@dataclass(frozen=True)
class LandauParams:
    """Constant field B > 0 in two dimensions and a Landau level index."""
    B: float
    level: int = 0

    def __post_init__(self):
        if not self.B > 0:
            raise ConfigError(f'Landau field strength must be positive, got {self.B}')
        if int(self.level) != self.level or self.level < 0:
            raise ConfigError(f'Landau level index must be a nonnegative integer, got {self.level}')

    @property
    def energy(self) -> float:
        return (self.level + 0.5) * self.B

    @property
    def degeneracy(self) -> float:
        """Number of states per unit area in one level."""
        return self.B / (2.0 * math.pi)


def laguerre(level: int, xi):
    """
    Laguerre polynomial L_level(xi) by the three-term recurrence
    (k + 1) L_{k+1} = (2k + 1 - xi) L_k - k L_{k-1}.

    Args:
        level: polynomial degree, >= 0
        xi   : nonnegative argument, scalar or array

    Returns:
        float or np.ndarray: L_level(xi)

    Raises:
        ConfigError: for a negative degree
    """
    if level < 0:
        raise ConfigError(f'Laguerre degree must be nonnegative, got {level}')
    xi = np.asarray(xi, dtype=float)
    previous = np.ones_like(xi)
    current = 1.0 - xi
    if level == 0:
        result = previous
    else:
        for k in range(1, level):
            previous, current = current, ((2 * k + 1 - xi) * current - k * previous) / (k + 1)
        result = current
    return float(result) if result.ndim == 0 else result


def landau_kernel(params: LandauParams, x, y):
    """
    Integral kernel P_l(x, y) of the projection onto one Landau level
    (symmetric gauge, units hbar = mass = charge = 1).

    Args:
        params: field strength and level
        x, y  : points in the plane, or (N, 2) arrays broadcast against each other

    Returns:
        complex or np.ndarray: the kernel values
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != 2 or y.shape[-1] != 2:
        raise ConfigError('The Landau kernel is defined for points in the plane.')
    B = params.B
    distance2 = np.sum((x - y) ** 2, axis=-1)
    # Symmetric-gauge phase exp(i B (x2 y1 - x1 y2) / 2)
    phase = 0.5 * B * (x[..., 1] * y[..., 0] - x[..., 0] * y[..., 1])
    values = (B / (2.0 * math.pi) * np.exp(1j * phase - 0.25 * B * distance2)
              * laguerre(params.level, 0.5 * B * distance2))
    return complex(values) if np.ndim(values) == 0 else values


def landau_staircase(B: float, energy):
    """
    Integrated density of states of the Landau Hamiltonian,
    (B / 2 pi) * #{l >= 0 : (l + 1/2) B < E}; a level energy itself is not counted.
    """
    if not B > 0:
        raise ConfigError(f'Landau field strength must be positive, got {B}')
    energy = np.asarray(energy, dtype=float)
    # Number of levels strictly below E, corrected for rounding at the level energies
    levels = np.maximum(np.ceil(energy / B - 0.5), 0.0)
    levels = np.where((levels > 0) & ((levels - 0.5) * B >= energy), levels - 1, levels)
    levels = np.where((levels + 0.5) * B < energy, levels + 1, levels)
    values = B / (2.0 * math.pi) * levels
    return float(values) if values.ndim == 0 else values


def free_ids(energy, dimension: int = 2):
    """Integrated density of states of -Laplace/2 in d dimensions, |B_d| (2E)^(d/2) / (2 pi)^d."""
    if dimension not in (1, 2, 3):
        raise ConfigError(f'Dimension must be 1, 2 or 3, got {dimension}')
    energy = np.asarray(energy, dtype=float)
    ball = math.pi ** (dimension / 2.0) / gamma(dimension / 2.0 + 1.0)
    values = ball * np.power(2.0 * np.clip(energy, 0.0, None), dimension / 2.0) / (2.0 * math.pi) ** dimension
    return float(values) if values.ndim == 0 else values


def _box_rule(order: int, box: Tuple[float, float, float, float]) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    x0, x1, y0, y1 = box
    xs = 0.5 * (x1 - x0) * (nodes + 1) + x0
    ys = 0.5 * (y1 - y0) * (nodes + 1) + y0
    mesh_x, mesh_y = np.meshgrid(xs, ys, indexing='ij')
    points = np.stack([mesh_x.ravel(), mesh_y.ravel()], axis=1)
    tensor = np.outer(weights, weights).ravel() * 0.25 * (x1 - x0) * (y1 - y0)
    return points, tensor


def _polar_rule(order: int, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    rs = 0.5 * radius * (nodes + 1)
    thetas = math.pi * (nodes + 1)
    mesh_r, mesh_t = np.meshgrid(rs, thetas, indexing='ij')
    points = np.stack([mesh_r.ravel() * np.cos(mesh_t.ravel()), mesh_r.ravel() * np.sin(mesh_t.ravel())], axis=1)
    # Jacobian r dr dtheta folded into the weights
    tensor = np.outer(weights * 0.5 * radius * rs, weights * math.pi).ravel()
    return points, tensor


def refine_quadrature(rule: Callable[[int], Tuple[np.ndarray, np.ndarray]], integrand: Callable,
                      tolerance: float = 1e-12, order: int = 16) -> complex:
    """
    Tensor Gauss-Legendre quadrature, doubling the order until two successive
    values agree to the tolerance.
    """
    points, weights = rule(order)
    value = weights @ integrand(points)
    while order < MAX_QUADRATURE_ORDER:
        order *= 2
        points, weights = rule(order)
        refined = weights @ integrand(points)
        if abs(refined - value) <= tolerance * max(1.0, abs(refined)):
            return refined
        value = refined
    logger.warning(f'Quadrature did not settle below {tolerance:g} at order {order}')
    return value


def landau_cell_trace(params: LandauParams, box: Tuple[float, float, float, float] = (-0.5, 0.5, -0.5, 0.5)) -> float:
    """Tr[1_box P_l 1_box] as the quadrature of the kernel diagonal over the box."""
    value = refine_quadrature(lambda order: _box_rule(order, box),
                              lambda points: landau_kernel(params, points, points).real)
    return float(value)


def landau_hs_density(params: LandauParams) -> float:
    """Integral of |P_l(0, y)|^2 over the plane, by radial quadrature; equals B / 2 pi."""
    B = params.B

    def radial(r):
        xi = 0.5 * B * r * r
        return 2.0 * math.pi * r * (B / (2.0 * math.pi)) ** 2 * math.exp(-xi) * laguerre(params.level, xi) ** 2

    value, _ = quad(radial, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def kernel_composition(params: LandauParams, x: Sequence[float], y: Sequence[float],
                       radius: float = 8.0) -> complex:
    """Integral of P_l(x, z) P_l(z, y) over the disc |z| < radius, by polar quadrature."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return complex(refine_quadrature(
        lambda order: _polar_rule(order, radius),
        lambda points: landau_kernel(params, x, points) * landau_kernel(params, points, y)))


def staircase_frame(B: float, energies: Sequence[float]) -> pd.DataFrame:
    """
    Landau staircase IDS on an energy grid.

    Args:
        B       : field strength, nonzero
        energies: energies at which to evaluate the left-continuous staircase

    Returns:
        pd.DataFrame: columns E and N
    """
    energies = np.asarray(energies, dtype=float)
    return pd.DataFrame({'E': energies, 'N': landau_staircase(B, energies)})

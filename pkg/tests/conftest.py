"""Shared fixtures and independent brute-force oracles.

The oracles here recompute powers straight from the per-element formula
with plain loops/meshgrids, independent of the library's vectorized paths.
"""

import math

import numpy as np
import pytest

from xlmimo.scenario import ArrayConfig, UserLocation

WAVELENGTH = 0.1256
RHO = 1e9


def make_config(m_x: int, m_y: int) -> ArrayConfig:
    return ArrayConfig.uniform(m_x, m_y, WAVELENGTH)


def oracle_element_power(config: ArrayConfig, user: UserLocation,
                         mx_idx: float, my_idx: float) -> float:
    """Per-element power recomputed from scratch."""
    dx = mx_idx * config.delta_x - user.x
    dy = my_idx * config.delta_y - user.y
    r2 = dx * dx + dy * dy + user.z * user.z
    a = config.a_x * config.a_y
    return a / (4 * math.pi) * user.z * (dx * dx + user.z ** 2) / r2 ** 2.5


def oracle_power_grid(config: ArrayConfig, user: UserLocation) -> np.ndarray:
    """(m_y, m_x) power grid via the scalar oracle, vectorized meshgrid."""
    mx = (np.arange(config.m_x) - (config.m_x - 1) / 2)[None, :] * config.delta_x
    my = (np.arange(config.m_y) - (config.m_y - 1) / 2)[:, None] * config.delta_y
    dx2 = (mx - user.x) ** 2
    dy2 = (my - user.y) ** 2
    r2 = dx2 + dy2 + user.z ** 2
    a = config.a_x * config.a_y
    return a / (4 * math.pi) * user.z * (dx2 + user.z ** 2) / r2 ** 2.5


def oracle_snr_sum(config: ArrayConfig, user: UserLocation, rho: float = RHO) -> float:
    return rho * float(oracle_power_grid(config, user).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)

"""Near-field / far-field boundary computation.

Two complementary criteria: the maximum phase error of a planar-wavefront
approximation across the array (generalizing the classical Fraunhofer
distance to arbitrary incident directions), and the spread between the
strongest and weakest element powers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import element_power
from .errors import DomainError, SearchFailureError
from .scenario import AntennaIndex, ArrayConfig, UserLocation

PHASE_ERROR_LIMIT = math.pi / 8.0


def _direction_cosines(psi_e: float, psi_a: float) -> tuple[float, float]:
    if not (0.0 <= psi_e <= math.pi / 2.0):
        raise DomainError("elevation must lie in [0, pi/2]")
    return math.sin(psi_e) * math.cos(psi_a), math.sin(psi_e) * math.sin(psi_a)


def _boundary_numerator(config: ArrayConfig, cx: float, cy: float) -> float:
    ex = (config.m_x - 1) / 2.0 * config.delta_x
    ey = (config.m_y - 1) / 2.0 * config.delta_y
    return (ex * ex * (1.0 - cx * cx) + ey * ey * (1.0 - cy * cy)
            + 2.0 * ex * ey * abs(cx * cy))


def max_phase_error(config: ArrayConfig, user: UserLocation) -> float:
    """Worst spherical-vs-planar phase discrepancy over the array, radians.

    Quadratic aperture term of the distance expansion, maximized at a
    corner element; accurate once the user is several apertures out.
    """
    cx, cy, _ = user.cosines
    return math.pi / config.wavelength * _boundary_numerator(config, cx, cy) / user.distance


def phase_boundary_distance(config: ArrayConfig, psi_e: float, psi_a: float) -> float:
    """Distance along (psi_e, psi_a) where the max phase error is pi/8."""
    cx, cy = _direction_cosines(psi_e, psi_a)
    return _boundary_numerator(config, cx, cy) / (config.wavelength / 8.0)


def fraunhofer_distance(config: ArrayConfig) -> float:
    """Classical far-field distance 2 D^2 / lambda, D = aperture diagonal."""
    return 2.0 * (config.length_x ** 2 + config.length_y ** 2) / config.wavelength


def power_profile(s: float, v: float) -> float:
    """Element power versus squared x-offset ``s`` at squared y-offset ``v``.

    Shape function s / (s + v)^(5/2); increasing up to s = 2v/3 and
    decreasing beyond, which drives the extremal-element case analysis.
    """
    return s / (s + v) ** 2.5


def _nearest_index(value: float, count: int, step: float) -> float:
    """Nearest point of the symmetric index lattice to value/step, clamped."""
    edge = (count - 1) / 2.0
    j = round(value / step + edge)
    return min(max(j, 0), count - 1) - edge


def _signed_edge(coord: float, count: int) -> float:
    """Edge index on the side of ``coord`` (positive side when coord == 0)."""
    edge = (count - 1) / 2.0
    return edge if coord >= 0 else -edge


def _min_abs(a: float, b: float) -> float:
    return a if abs(a) <= abs(b) else b


@dataclass(frozen=True)
class ExtremalElements:
    """Strongest and weakest element of the grid for one user."""

    argmax_idx: AntennaIndex
    argmin_idx: AntennaIndex
    max_power: float
    min_power: float


def power_extremal_elements(config: ArrayConfig, user: UserLocation) -> ExtremalElements:
    """Closed-form argmax/argmin of the element power over the whole grid.

    The y index decouples (power decreases with the y offset); along x the
    unimodal profile peaks at squared offset 2v/3, giving a three-way case
    split between an interior optimum and the near/far edges.
    """
    if user.z <= 0:
        raise DomainError("extremal elements need z > 0")
    cfg = config
    z2 = user.z * user.z

    s_near_idx = _nearest_index(user.x, cfg.m_x, cfg.delta_x)
    s_min = (s_near_idx * cfg.delta_x - user.x) ** 2 + z2
    far_edge = -_signed_edge(user.x, cfg.m_x)
    s_max = (_signed_edge(user.x, cfg.m_x) * cfg.delta_x + user.x) ** 2 + z2

    # strongest element: smallest y offset, then peak-chasing in x
    my_top = _nearest_index(user.y, cfg.m_y, cfg.delta_y)
    v_top = (my_top * cfg.delta_y - user.y) ** 2
    peak = 2.0 / 3.0 * v_top
    if s_min <= peak <= s_max:
        w = math.sqrt(peak - z2)
        cand = _min_abs((w + user.x) / cfg.delta_x, (-w + user.x) / cfg.delta_x)
        mx_top = _nearest_index(cand * cfg.delta_x, cfg.m_x, cfg.delta_x)
    elif peak < s_min:
        mx_top = s_near_idx
    else:
        mx_top = far_edge

    # weakest element: largest y offset, then the worse of the two x endpoints
    my_bot = -_signed_edge(user.y, cfg.m_y)
    v_bot = (my_bot * cfg.delta_y - user.y) ** 2
    peak = 2.0 / 3.0 * v_bot
    if s_min <= peak <= s_max:
        mx_bot = s_near_idx if power_profile(s_min, v_bot) <= power_profile(s_max, v_bot) \
            else far_edge
    elif peak > s_max:
        mx_bot = s_near_idx
    else:
        mx_bot = far_edge

    top = AntennaIndex(mx_top, my_top)
    bot = AntennaIndex(mx_bot, my_bot)
    return ExtremalElements(argmax_idx=top, argmin_idx=bot,
                            max_power=element_power(config, user, top),
                            min_power=element_power(config, user, bot))


def power_variation(config: ArrayConfig, user: UserLocation) -> float:
    """Weakest-to-strongest element power ratio, in (0, 1]."""
    ext = power_extremal_elements(config, user)
    return ext.min_power / ext.max_power


def power_boundary_distance(config: ArrayConfig, u_x: float, u_y: float,
                            v_t: float, tol: float = 1e-6,
                            max_iter: int = 60) -> float:
    """Height z at which the power variation crosses the threshold ``v_t``.

    Exploits monotonicity of the variation in z: the upper bracket is
    expanded geometrically until the variation exceeds ``v_t``, then
    bisection runs until |v - v_t| <= tol.
    """
    if not (0.0 < v_t < 1.0):
        raise DomainError("v_t must lie in (0, 1)")

    def v_at(z: float) -> float:
        return power_variation(config, UserLocation(u_x, u_y, z))

    z_lo = 0.05 * max(config.delta_x, config.delta_y)
    for _ in range(max_iter):
        if v_at(z_lo) < v_t:
            break
        z_lo /= 2.0
    else:
        raise SearchFailureError("could not bracket the boundary from below")
    z_hi = max(2.0 * z_lo, max(config.length_x, config.length_y))
    for _ in range(max_iter):
        if v_at(z_hi) > v_t:
            break
        z_hi *= 2.0
    else:
        raise SearchFailureError("could not bracket the boundary from above")

    for _ in range(max_iter):
        z_mid = 0.5 * (z_lo + z_hi)
        v = v_at(z_mid)
        if abs(v - v_t) <= tol:
            return z_mid
        if v < v_t:
            z_lo = z_mid
        else:
            z_hi = z_mid
    raise SearchFailureError(f"bisection did not reach |v - v_t| <= {tol}")


class FieldRegion(enum.Enum):
    NEAR_BOTH = "near_both"
    NEAR_PHASE_ONLY = "near_phase_only"
    NEAR_POWER_ONLY = "near_power_only"
    FAR = "far"


def classify_field_region(config: ArrayConfig, user: UserLocation,
                          v_t: float) -> FieldRegion:
    """Which near-field criteria (phase error, power variation) a user trips.

    Far field iff the user is outside both boundaries.
    """
    if user.z <= 0:
        raise DomainError("classification needs z > 0")
    if not (0.0 < v_t < 1.0):
        raise DomainError("v_t must lie in (0, 1)")
    near_phase = user.distance < phase_boundary_distance(config, user.elevation,
                                                         user.azimuth)
    near_power = power_variation(config, user) < v_t
    if near_phase and near_power:
        return FieldRegion.NEAR_BOTH
    if near_phase:
        return FieldRegion.NEAR_PHASE_ONLY
    if near_power:
        return FieldRegion.NEAR_POWER_ONLY
    return FieldRegion.FAR

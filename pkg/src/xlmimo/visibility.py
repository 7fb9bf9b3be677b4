"""Sub-array powers and visibility-region detection.

The array is tiled into S = s_x * s_y rectangular sub-arrays.  A user's
visibility region is the smallest set of sub-arrays whose closed-form
powers exceed a fraction ``varpi`` of the total; sub-arrays are taken in
decreasing power order, so the greedy pick is cardinality optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateUserError, DomainError
from .scenario import ArrayConfig, UserLocation
from .snr import SIX_PI, corner_integral

@dataclass(frozen=True)
class SubArrayGrid:
    """Partition of the array into s_x by s_y equal rectangular blocks."""

    config: ArrayConfig
    s_x: int
    s_y: int

    def __post_init__(self):
        if self.s_x < 1 or self.s_y < 1:
            raise DomainError("sub-array counts must be positive")
        if self.config.m_x % self.s_x or self.config.m_y % self.s_y:
            raise DomainError("element counts must divide evenly into sub-arrays")

    @property
    def count(self) -> int:
        return self.s_x * self.s_y

    @property
    def elements_per_subarray(self) -> int:
        return self.config.n_elements // self.count

    def x_boundaries(self) -> np.ndarray:
        """Sub-array cell edges along x, in meters (length s_x + 1)."""
        cfg = self.config
        return (-cfg.m_x / 2.0 + np.arange(self.s_x + 1) * cfg.m_x / self.s_x) * cfg.delta_x

    def y_boundaries(self) -> np.ndarray:
        cfg = self.config
        return (-cfg.m_y / 2.0 + np.arange(self.s_y + 1) * cfg.m_y / self.s_y) * cfg.delta_y


def subarray_power(grid: SubArrayGrid, user: UserLocation, rho: float,
                   s_x_idx: int, s_y_idx: int) -> float:
    """Closed-form power one sub-array captures from the user.

    Four-corner combination over the sub-array's cell rectangle; summing
    over all sub-arrays tiles the aperture exactly, so the sub-array powers
    add up to the whole-array closed form.
    """
    if not (0 <= s_x_idx < grid.s_x and 0 <= s_y_idx < grid.s_y):
        raise DomainError("sub-array index out of range")
    if user.z == 0.0:
        return 0.0
    cfg = grid.config
    fx1, fx2 = (np.array([s_x_idx, s_x_idx + 1]) * cfg.m_x / grid.s_x - cfg.m_x / 2.0) * cfg.delta_x
    fy1, fy2 = (np.array([s_y_idx, s_y_idx + 1]) * cfg.m_y / grid.s_y - cfg.m_y / 2.0) * cfg.delta_y
    z = user.z
    total = (corner_integral(fy1 - user.y, fx1 - user.x, z)
             + corner_integral(-fy1 + user.y, fx2 - user.x, z)
             + corner_integral(-fy2 + user.y, fx1 - user.x, z)
             + corner_integral(fy2 - user.y, fx2 - user.x, z))
    return rho * cfg.occupation_ratio / SIX_PI * float(total)


def subarray_power_map(grid: SubArrayGrid, user: UserLocation, rho: float) -> np.ndarray:
    """Powers of every sub-array, shape (s_y, s_x)."""
    if user.z == 0.0:
        return np.zeros((grid.s_y, grid.s_x))
    fx = grid.x_boundaries()[None, :] - user.x
    fy = grid.y_boundaries()[:, None] - user.y
    corners = corner_integral(fy, fx, user.z)
    cell = corners[1:, 1:] - corners[:-1, 1:] - corners[1:, :-1] + corners[:-1, :-1]
    return rho * grid.config.occupation_ratio / SIX_PI * cell


@dataclass(frozen=True)
class VisibilityRegion:
    """Sub-arrays capturing at least a ``varpi`` share of one user's power.

    ``members`` holds flat sub-array ids (s_y * s_x_count + s_x) in the
    order they were selected, strongest first.
    """

    user: int
    members: tuple[int, ...]
    captured_power: float
    target_power: float
    grid: SubArrayGrid

    def __post_init__(self):
        if len(set(self.members)) != len(self.members) or not self.members:
            raise DomainError("members must be distinct and non-empty")
        if any(not 0 <= m < self.grid.count for m in self.members):
            raise DomainError("member id out of range")

    @property
    def coverage(self) -> float:
        """Fraction of the sub-array grid this region occupies."""
        return len(self.members) / self.grid.count


def detect_vr(grid: SubArrayGrid, user: UserLocation, rho: float,
              varpi: float, user_id: int = 0) -> VisibilityRegion:
    """Greedy visibility-region detection.

    Sub-arrays are sorted by decreasing power (ties broken towards the
    smaller flat id) and appended while the captured power is still <=
    varpi times the total, so at least one sub-array is always selected and
    varpi = 1 selects all of them.
    """
    if not (0.0 <= varpi <= 1.0):
        raise DomainError("varpi must lie in [0, 1]")
    if user.z == 0.0:
        raise DegenerateUserError("on-plane user has zero power everywhere")
    powers = subarray_power_map(grid, user, rho).ravel()
    target = float(powers.sum())
    order = np.lexsort((np.arange(powers.size), -powers))
    members: list[int] = []
    captured = 0.0
    for flat in order:
        members.append(int(flat))
        captured += float(powers[flat])
        if captured > varpi * target:
            break
    return VisibilityRegion(user=user_id, members=tuple(members),
                            captured_power=captured, target_power=target,
                            grid=grid)


def vr_antenna_indices(grid: SubArrayGrid, vr: VisibilityRegion) -> np.ndarray:
    """Global element enumeration indices covered by a visibility region.

    Sorted ascending; disjoint sub-arrays contribute disjoint index blocks.
    """
    if vr.grid != grid:
        raise DomainError("visibility region belongs to a different grid")
    cfg = grid.config
    per_x = cfg.m_x // grid.s_x
    per_y = cfg.m_y // grid.s_y
    ix = np.arange(per_x)
    iy = np.arange(per_y)
    blocks = []
    for flat in vr.members:
        s_y_idx, s_x_idx = divmod(flat, grid.s_x)
        rows = (s_y_idx * per_y + iy)[:, None] * cfg.m_x
        cols = (s_x_idx * per_x + ix)[None, :]
        blocks.append((rows + cols).ravel())
    return np.sort(np.concatenate(blocks))


def occupancy_ratio(vrs: Sequence[VisibilityRegion], s_count: int) -> float:
    """Average fraction of the sub-array grid used across users."""
    if not vrs:
        raise DomainError("need at least one visibility region")
    return float(np.mean([len(vr.members) / s_count for vr in vrs]))

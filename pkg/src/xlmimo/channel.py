"""Near-field electromagnetic channel between users and the array.

Each element sees the user through a per-element power (free-space
pathloss x aperture projection x polarization mismatch, with the source
current polarized along y) and a per-element spherical-wavefront phase.
Element enumeration is y-major: entry ``iy * m_x + ix`` belongs to the
element with lattice indices (x_lattice[ix], y_lattice[iy]).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, SingularityError, UnsupportedConfigError
from .scenario import AntennaIndex, ArrayConfig, UserLocation

FOUR_PI = 4.0 * math.pi
# Free-space impedance enters the field expressions only through a factor
# that the power normalization cancels, so it is fixed to 1 here.
KAPPA = 1.0


def _offset_grids(config: ArrayConfig, user: UserLocation):
    """Squared lateral offsets between every element center and the user.

    Returns (dx2, dy2) broadcastable to the (m_y, m_x) element grid.
    """
    dx = config.x_lattice() * config.delta_x - user.x
    dy = config.y_lattice() * config.delta_y - user.y
    return (dx * dx)[None, :], (dy * dy)[:, None]


def element_power_map(config: ArrayConfig, user: UserLocation) -> np.ndarray:
    """Channel power of every element, shape (m_y, m_x).

    Zero everywhere when the user lies on the array plane.
    """
    if user.z == 0.0:
        return np.zeros((config.m_y, config.m_x))
    dx2, dy2 = _offset_grids(config, user)
    z2 = user.z * user.z
    r2 = dx2 + dy2 + z2
    return (config.element_area / FOUR_PI) * user.z * (dx2 + z2) / r2 ** 2.5


def element_power(config: ArrayConfig, user: UserLocation, idx: AntennaIndex) -> float:
    """Channel power between the user and one element (dimensionless)."""
    idx.validate(config)
    if user.z == 0.0:
        return 0.0
    dx2 = (idx.m_x_idx * config.delta_x - user.x) ** 2
    dy2 = (idx.m_y_idx * config.delta_y - user.y) ** 2
    z2 = user.z * user.z
    return (config.element_area / FOUR_PI) * user.z * (dx2 + z2) / (dx2 + dy2 + z2) ** 2.5


def element_phase_map(config: ArrayConfig, user: UserLocation) -> np.ndarray:
    """Propagation phase 2 pi r / lambda of every element, unwrapped radians."""
    dx2, dy2 = _offset_grids(config, user)
    r = np.sqrt(dx2 + dy2 + user.z * user.z)
    return config.wavenumber * r


def element_phase(config: ArrayConfig, user: UserLocation, idx: AntennaIndex) -> float:
    """Propagation phase between the user and one element, unwrapped."""
    idx.validate(config)
    dx2 = (idx.m_x_idx * config.delta_x - user.x) ** 2
    dy2 = (idx.m_y_idx * config.delta_y - user.y) ** 2
    return config.wavenumber * math.sqrt(dx2 + dy2 + user.z * user.z)


@dataclass(frozen=True)
class ChannelVector:
    """Complex channel from one user to every element, y-major order."""

    entries: np.ndarray
    config: ArrayConfig

    def __post_init__(self):
        if self.entries.shape != (self.config.n_elements,):
            raise DomainError("entry count must equal the number of elements")

    @property
    def gain(self) -> float:
        """Total captured power ||h||^2."""
        return float(np.vdot(self.entries, self.entries).real)


@dataclass(frozen=True)
class ChannelMatrix:
    """Stacked channel vectors of K users; column k belongs to user k."""

    matrix: np.ndarray
    config: ArrayConfig

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.config.n_elements:
            raise DomainError("matrix must be (n_elements, n_users)")

    @property
    def n_users(self) -> int:
        return self.matrix.shape[1]

    def column(self, k: int) -> np.ndarray:
        return self.matrix[:, k]


def _check_clearance(config: ArrayConfig, user: UserLocation) -> None:
    # The per-element power collapses the integral over the element area to
    # its center value; that needs the user at least ~10 element sides away.
    dx2, dy2 = _offset_grids(config, user)
    min_dist = math.sqrt(float(np.min(dx2 + dy2)) + user.z * user.z)
    guard = 10.0 * max(config.a_x, config.a_y)
    if min_dist < guard:
        raise SingularityError(
            f"user within {min_dist:.4g} m of an element; model needs >= {guard:.4g} m")


def channel_vector(config: ArrayConfig, user: UserLocation) -> ChannelVector:
    """Channel from one user to the whole array.

    Entries are sqrt(power) * exp(-j phase); all zero iff the user lies on
    the array plane.
    """
    if user.z == 0.0:
        return ChannelVector(np.zeros(config.n_elements, dtype=complex), config)
    _check_clearance(config, user)
    amp = np.sqrt(element_power_map(config, user))
    phase = element_phase_map(config, user)
    return ChannelVector((amp * np.exp(-1j * phase)).ravel(), config)


def channel_matrix(config: ArrayConfig, users: Sequence[UserLocation]) -> ChannelMatrix:
    """Stack per-user channel vectors into an (n_elements, K) matrix."""
    if not users:
        raise DomainError("need at least one user")
    cols = [channel_vector(config, u).entries for u in users]
    return ChannelMatrix(np.stack(cols, axis=1), config)


def green_function_y(p: np.ndarray, user: UserLocation,
                     wavelength: float) -> np.ndarray:
    """Electric-field response at array point ``p`` to a y-polarized source.

    ``p`` is a point on the array plane (z = 0).  Returns the complex
    3-vector field with the impedance constant fixed to 1.
    """
    p = np.asarray(p, dtype=float)
    r_vec = np.array([p[0] - user.x, p[1] - user.y, -user.z])
    r = float(np.linalg.norm(r_vec))
    if r < 1e-12:
        raise SingularityError("field point coincides with the source")
    bx = (p[0] - user.x) * (p[1] - user.y) / r ** 2
    by = 1.0 - ((p[1] - user.y) / r) ** 2
    bz = (-user.z) * (p[1] - user.y) / r ** 2
    scale = (-1j * KAPPA) / (2.0 * wavelength * r) * np.exp(-1j * 2.0 * math.pi * r / wavelength)
    return scale * np.array([bx, by, bz])


def power_density(p: np.ndarray, user: UserLocation, wavelength: float) -> float:
    """Captured power per unit element area at array point ``p``.

    Normalized squared field magnitude times the aperture projection; the
    per-element power equals this density integrated over the element area.
    """
    g = green_function_y(p, user, wavelength)
    r = math.sqrt((p[0] - user.x) ** 2 + (p[1] - user.y) ** 2 + user.z ** 2)
    norm2 = float(np.vdot(g, g).real)
    return (wavelength ** 2 / (KAPPA ** 2 * math.pi)) * norm2 * (user.z / r)


def far_field_channel(config: ArrayConfig, user: UserLocation,
                      amplitude: float = 1.0) -> ChannelVector:
    """Planar-wavefront reference channel for a linear array (m_y == 1).

    Constant per-entry amplitude with linear phase progression
    exp(-j 2 pi (delta_x / lambda) i sin(psi)), i = 0..M-1, where sin(psi)
    is the user's x direction cosine.
    """
    if config.m_y != 1:
        raise UnsupportedConfigError("far-field reference channel needs m_y == 1")
    sin_psi = user.x / user.distance
    step = 2.0 * math.pi * config.delta_x / config.wavelength * sin_psi
    phases = step * np.arange(config.m_x)
    return ChannelVector(amplitude * np.exp(-1j * phases), config)


def dump_channel_csv(channels: ChannelMatrix, destination) -> None:
    """Write the channel matrix as CSV: one row per element enumeration
    index, two columns (re, im) per user."""
    mat = channels.matrix
    header = ["element"]
    for k in range(mat.shape[1]):
        header += [f"user{k}_re", f"user{k}_im"]
    with open(destination, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for e in range(mat.shape[0]):
            row = [e]
            for k in range(mat.shape[1]):
                row += [format(mat[e, k].real, ".17g"), format(mat[e, k].imag, ".17g")]
            writer.writerow(row)

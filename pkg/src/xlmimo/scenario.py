"""Array geometry, user placement, and deterministic scenario sampling.

Coordinate conventions: the antenna array lies in the z = 0 plane centered
at the origin, users sit in the half space z >= 0.  All lengths are in
meters, all angles in radians.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

ELEMENT_AREA_MODES = ("lambda_sq_over_4pi",)


def index_lattice(count: int) -> np.ndarray:
    """Symmetric element-index lattice {-(count-1)/2, ..., (count-1)/2}.

    Integer valued for odd counts, half-integer valued for even counts;
    the step is always 1.
    """
    if count < 1:
        raise DomainError(f"element count must be >= 1, got {count}")
    return np.arange(count) - (count - 1) / 2.0


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform planar array: element counts, spacings, and element size.

    ``a_x``/``a_y`` are the side lengths of each element's effective area
    and must be strictly smaller than the spacings ``delta_x``/``delta_y``.
    """

    m_x: int
    m_y: int
    delta_x: float
    delta_y: float
    a_x: float
    a_y: float
    wavelength: float

    def __post_init__(self):
        if self.m_x < 1 or self.m_y < 1:
            raise DomainError("antenna counts must be positive")
        for name in ("delta_x", "delta_y", "a_x", "a_y", "wavelength"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.a_x >= self.delta_x or self.a_y >= self.delta_y:
            raise DomainError("element sides must be smaller than the spacings")

    @classmethod
    def uniform(cls, m_x: int, m_y: int, wavelength: float,
                delta_factor: float = 0.5,
                element_area_mode: str = "lambda_sq_over_4pi") -> "ArrayConfig":
        """Square-spaced array with spacing ``delta_factor`` wavelengths.

        The only supported area mode sets the element effective area to
        wavelength**2 / (4 pi), i.e. the aperture of an isotropic element.
        """
        if element_area_mode not in ELEMENT_AREA_MODES:
            raise DomainError(f"unknown element_area_mode {element_area_mode!r}")
        side = wavelength / math.sqrt(4.0 * math.pi)
        delta = delta_factor * wavelength
        return cls(m_x=m_x, m_y=m_y, delta_x=delta, delta_y=delta,
                   a_x=side, a_y=side, wavelength=wavelength)

    @property
    def n_elements(self) -> int:
        return self.m_x * self.m_y

    @property
    def element_area(self) -> float:
        return self.a_x * self.a_y

    @property
    def occupation_ratio(self) -> float:
        """Fraction of each spacing cell covered by the element area."""
        return self.element_area / (self.delta_x * self.delta_y)

    @property
    def length_x(self) -> float:
        return self.m_x * self.delta_x

    @property
    def length_y(self) -> float:
        return self.m_y * self.delta_y

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def x_lattice(self) -> np.ndarray:
        """Element x indices on the symmetric lattice."""
        return index_lattice(self.m_x)

    def y_lattice(self) -> np.ndarray:
        return index_lattice(self.m_y)


@dataclass(frozen=True)
class AntennaIndex:
    """Signed element index pair on the symmetric lattice of the array."""

    m_x_idx: float
    m_y_idx: float

    def validate(self, config: ArrayConfig) -> None:
        for val, count, axis in ((self.m_x_idx, config.m_x, "x"),
                                 (self.m_y_idx, config.m_y, "y")):
            lim = (count - 1) / 2.0
            offset = val + lim
            if not (-1e-9 <= offset <= 2 * lim + 1e-9) or abs(offset - round(offset)) > 1e-9:
                raise DomainError(f"index {val} not on the {axis} lattice of {count} elements")


@dataclass(frozen=True)
class UserLocation:
    """Single-antenna user position; z >= 0 (in front of the array)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.z < 0:
            raise DomainError("users must satisfy z >= 0")
        if self.distance == 0.0:
            raise DomainError("user cannot sit at the array center")

    @property
    def distance(self) -> float:
        """Distance to the array center."""
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def elevation(self) -> float:
        """Polar angle measured from the array normal, in [0, pi/2]."""
        return math.acos(min(1.0, self.z / self.distance))

    @property
    def azimuth(self) -> float:
        """Angle of the lateral projection in [0, 2 pi)."""
        return math.atan2(self.y, self.x) % (2.0 * math.pi)

    @property
    def cosines(self) -> np.ndarray:
        """Unit direction from the array center towards the user."""
        return np.array([self.x, self.y, self.z]) / self.distance

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


def user_from_polar(r_o: float, psi_e: float, psi_a: float) -> UserLocation:
    """Build a user location from distance, elevation, and azimuth.

    ``psi_e`` is measured from the array normal and must lie in [0, pi/2]
    so the user stays in front of the array.
    """
    if r_o <= 0:
        raise DomainError("distance must be positive")
    if not (0.0 <= psi_e <= math.pi / 2.0):
        raise DomainError("elevation must lie in [0, pi/2]")
    se = math.sin(psi_e)
    ce = math.cos(psi_e)
    if abs(ce) < 1e-15:  # psi_e at (the representable) pi/2: on-plane user
        ce = 0.0
    return UserLocation(x=r_o * se * math.cos(psi_a),
                        y=r_o * se * math.sin(psi_a),
                        z=r_o * ce)


def antenna_center(config: ArrayConfig, idx: AntennaIndex) -> np.ndarray:
    """Cartesian center of one element; always on the z = 0 plane."""
    idx.validate(config)
    return np.array([idx.m_x_idx * config.delta_x, idx.m_y_idx * config.delta_y, 0.0])


def element_distance(config: ArrayConfig, user: UserLocation, idx: AntennaIndex) -> float:
    """Euclidean distance between the user and one element center."""
    center = antenna_center(config, idx)
    return float(np.linalg.norm(center - user.as_array()))


def sample_users(region, k: int, seed: int) -> list[UserLocation]:
    """Draw ``k`` users uniformly over an axis-aligned box on the xz plane.

    ``region`` is (x_min, x_max, z_min, z_max) with z_min > 0; sampled users
    have y = 0.  The generator is numpy's PCG64 seeded with ``seed``, so the
    same seed reproduces the same users bit for bit.
    """
    x_min, x_max, z_min, z_max = (float(v) for v in region)
    if k < 1:
        raise DomainError("k must be >= 1")
    if not (math.isfinite(x_min) and math.isfinite(x_max)
            and math.isfinite(z_min) and math.isfinite(z_max)):
        raise DomainError("region bounds must be finite")
    if x_max < x_min or z_max < z_min:
        raise DomainError("region bounds must be ordered")
    if z_min <= 0:
        raise DomainError("z_min must be positive (on-plane users receive nothing)")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_min, x_max, size=k)
    zs = rng.uniform(z_min, z_max, size=k)
    return [UserLocation(x=float(x), y=0.0, z=float(z)) for x, z in zip(xs, zs)]


@dataclass(frozen=True)
class Scenario:
    """Scenario file contents: array layout plus the user population."""

    wavelength: float = 0.1256
    m_x: int = 1000
    m_y: int = 10
    delta_factor: float = 0.5
    element_area_mode: str = "lambda_sq_over_4pi"
    user_region: tuple = (-25.0, 25.0, 2.0, 12.0)
    k: int = 20
    seed: int = 1

    def array_config(self) -> ArrayConfig:
        return ArrayConfig.uniform(self.m_x, self.m_y, self.wavelength,
                                   delta_factor=self.delta_factor,
                                   element_area_mode=self.element_area_mode)

    def draw_users(self, seed: int | None = None) -> list[UserLocation]:
        return sample_users(self.user_region, self.k,
                            self.seed if seed is None else seed)


def load_scenario(path) -> Scenario:
    """Parse a scenario config file (INI format, ``[scenario]`` section).

    Recognized keys: lambda, m_x, m_y, delta_factor, element_area_mode,
    user_region (four comma-separated numbers), k, seed.  Missing keys fall
    back to the defaults of :class:`Scenario`.
    """
    parser = configparser.ConfigParser()
    text = Path(path).read_text()
    parser.read_string(text)
    if not parser.has_section("scenario"):
        raise DomainError(f"{path}: missing [scenario] section")
    sec = parser["scenario"]
    kwargs = {}
    if "lambda" in sec:
        kwargs["wavelength"] = sec.getfloat("lambda")
    for key in ("m_x", "m_y", "k", "seed"):
        if key in sec:
            kwargs[key] = sec.getint(key)
    if "delta_factor" in sec:
        kwargs["delta_factor"] = sec.getfloat("delta_factor")
    if "element_area_mode" in sec:
        kwargs["element_area_mode"] = sec.get("element_area_mode")
    if "user_region" in sec:
        parts = [p for p in sec.get("user_region").replace(",", " ").split() if p]
        if len(parts) != 4:
            raise DomainError("user_region needs four numbers: x_min x_max z_min z_max")
        kwargs["user_region"] = tuple(float(p) for p in parts)
    scen = Scenario(**kwargs)
    scen.array_config()  # validate eagerly
    return scen

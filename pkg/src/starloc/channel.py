"""Uniform planar arrays, path loss, and line-of-sight channel construction.

Arrays lie in the x-z plane. The array response is the Kronecker product of
an x-axis factor, whose per-element phase grows with cos(azimuth) times
sin(elevation), and a z-axis factor, whose phase grows with cos(elevation),
both over symmetric element grids centered on the array midpoint. Channels
are modeled as pure line of sight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonpositiveDistanceError
from .geometry import SphericalTriple

SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class UpaConfig:
    """Geometry of one uniform planar array in the x-z plane.

    ``spacing_x``/``spacing_z`` are element spacings in wavelengths.
    """

    nx: int
    nz: int
    spacing_x: float = 0.5
    spacing_z: float = 0.5

    def __post_init__(self):
        if self.nx < 1 or self.nz < 1:
            raise ValueError(f"array needs at least one element per axis, got {self.nx}x{self.nz}")
        if self.spacing_x <= 0 or self.spacing_z <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def size(self) -> int:
        return self.nx * self.nz


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier described by its wavelength in meters."""

    wavelength: float

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength


class PathLossModel(str, Enum):
    """Selectable large-scale attenuation laws."""

    SQUARED_DISTANCE = "squared_distance"
    FREE_SPACE = "free_space"
    UMI = "umi"


# Exponent of the distance power law of each model; the amplitude of a link
# decays as d^(-gamma/2).
DISTANCE_EXPONENT = {
    PathLossModel.SQUARED_DISTANCE: 2.0,
    PathLossModel.FREE_SPACE: 2.0,
    PathLossModel.UMI: 3.67,
}


def element_grid(n: int) -> np.ndarray:
    """Symmetric element index grid m - (n-1)/2 for m = 0..n-1."""
    return np.arange(n) - (n - 1) / 2.0


def steering_x(azimuth: float, elevation: float, n: int, spacing: float) -> np.ndarray:
    """x-axis steering factor; phase grows with cos(azimuth) sin(elevation)."""
    phase = 2.0 * math.pi * spacing * math.cos(azimuth) * math.sin(elevation)
    return np.exp(1j * phase * element_grid(n))


def steering_z(elevation: float, n: int, spacing: float) -> np.ndarray:
    """z-axis steering factor; phase grows with cos(elevation)."""
    phase = 2.0 * math.pi * spacing * math.cos(elevation)
    return np.exp(1j * phase * element_grid(n))


def upa_response(azimuth: float, elevation: float, upa: UpaConfig) -> np.ndarray:
    """Array response, Kronecker product of the x and z factors (length nx*nz)."""
    ax = steering_x(azimuth, elevation, upa.nx, upa.spacing_x)
    az = steering_z(elevation, upa.nz, upa.spacing_z)
    return np.kron(ax, az)


def path_loss(model: PathLossModel, distance: float, carrier: CarrierConfig) -> float:
    """Power attenuation rho of a link; the channel amplitude is 1/sqrt(rho)."""
    if distance <= 0:
        raise NonpositiveDistanceError(f"path loss needs a positive distance, got {distance}")
    if model is PathLossModel.SQUARED_DISTANCE:
        return distance**2
    if model is PathLossModel.FREE_SPACE:
        f_khz = carrier.frequency / 1e3
        return distance**2 * f_khz**2 / 10**8.755
    if model is PathLossModel.UMI:
        f_ghz = carrier.frequency / 1e9
        return 10**2.27 * distance**3.67 * f_ghz**2.6
    raise ValueError(f"unknown path loss model {model!r}")


def los_channel(
    link: SphericalTriple,
    upa: UpaConfig,
    loss: PathLossModel,
    carrier: CarrierConfig,
) -> np.ndarray:
    """Line-of-sight channel vector of one mobile link (length upa.size).

    Every entry has magnitude 1/sqrt(rho); the common phase is set by the
    link distance in wavelengths.
    """
    rho = path_loss(loss, link.distance, carrier)
    gain = np.exp(-2j * math.pi * link.distance / carrier.wavelength) / math.sqrt(rho)
    return gain * upa_response(link.azimuth, link.elevation, upa)


def bs_ris_channel(
    link: SphericalTriple,
    bs_upa: UpaConfig,
    ris_upa: UpaConfig,
    loss: PathLossModel,
    carrier: CarrierConfig,
) -> np.ndarray:
    """Rank-one anchor-to-surface channel matrix (bs_upa.size x ris_upa.size).

    Built as the outer product of the receive response at the base station
    and the conjugated response at the surface for the same anchor link.
    """
    rho = path_loss(loss, link.distance, carrier)
    gain = np.exp(-2j * math.pi * link.distance / carrier.wavelength) / math.sqrt(rho)
    a_bs = upa_response(link.azimuth, link.elevation, bs_upa)
    a_ris = upa_response(link.azimuth, link.elevation, ris_upa)
    return gain * np.outer(a_bs, a_ris.conj())

"""Scene geometry: positions, spherical link parameters, and their Jacobian.

Azimuth is measured in the x-y plane with atan2 (range (-pi, pi]), elevation
from the horizontal plane (range [-pi/2, pi/2]), so the unit direction from a
reference point toward a target is

    xi(theta, phi) = [cos(theta) cos(phi), sin(theta) cos(phi), sin(phi)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ElevationSingularityError,
    NonpositiveDistanceError,
    ZeroDistanceError,
)

# Elevations closer than this to +-pi/2 make the azimuth column of the
# Jacobian blow up; treat them as singular.
_COS_ELEVATION_FLOOR = 1e-12


@dataclass(frozen=True)
class Position3:
    """A point in 3-D Cartesian space, in meters."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "Position3":
        x, y, z = np.asarray(arr, dtype=float)
        return cls(float(x), float(y), float(z))


@dataclass(frozen=True)
class SphericalTriple:
    """Azimuth (rad), elevation (rad) and distance (m) of one link."""

    azimuth: float
    elevation: float
    distance: float

    def __post_init__(self):
        if self.distance <= 0.0:
            raise NonpositiveDistanceError(
                f"link distance must be positive, got {self.distance}"
            )


@dataclass(frozen=True)
class SceneGeometry:
    """Anchor and mobile positions of one evaluation scene.

    The base station and the surface are anchors with known positions; the
    outdoor mobile sees both, the indoor mobile only the surface.
    """

    bs: Position3
    ris: Position3
    ms_outdoor: Position3
    ms_indoor: Position3


@dataclass(frozen=True)
class ChannelParams:
    """Spherical parameters of the three estimated links.

    Ordered as the 9-entry parameter vector: BS-outdoor, surface-outdoor,
    surface-indoor, each contributing (azimuth, elevation, distance).
    """

    bs_outdoor: SphericalTriple
    ris_outdoor: SphericalTriple
    ris_indoor: SphericalTriple

    def links(self) -> tuple[SphericalTriple, SphericalTriple, SphericalTriple]:
        return (self.bs_outdoor, self.ris_outdoor, self.ris_indoor)

    def as_vector(self) -> np.ndarray:
        return np.array(
            [v for s in self.links() for v in (s.azimuth, s.elevation, s.distance)]
        )

    @classmethod
    def from_vector(cls, vec) -> "ChannelParams":
        v = np.asarray(vec, dtype=float)
        if v.shape != (9,):
            raise ValueError(f"expected 9 parameters, got shape {v.shape}")
        triples = [SphericalTriple(*v[3 * i : 3 * i + 3]) for i in range(3)]
        return cls(*triples)


@dataclass(frozen=True)
class PositionJacobian:
    """Derivatives of the link parameters w.r.t. mobile coordinates.

    ``outdoor`` is the 3x6 block for the outdoor mobile (rows x, y, z;
    columns are its six link parameters), ``indoor`` the 3x3 block for the
    indoor mobile, and ``full`` the assembled block-diagonal 6x9 matrix
    mapping (x1, y1, z1, x2, y2, z2) to the 9 link parameters.
    """

    outdoor: np.ndarray
    indoor: np.ndarray
    full: np.ndarray


def unit_direction(azimuth: float, elevation: float) -> np.ndarray:
    """Unit vector pointing at the given azimuth/elevation."""
    ca, sa = math.cos(azimuth), math.sin(azimuth)
    ce, se = math.cos(elevation), math.sin(elevation)
    return np.array([ca * ce, sa * ce, se])


def spherical_from_positions(reference: Position3, target: Position3) -> SphericalTriple:
    """Spherical parameters of the link from ``reference`` toward ``target``."""
    delta = target.as_array() - reference.as_array()
    distance = float(np.linalg.norm(delta))
    if distance == 0.0:
        raise ZeroDistanceError("reference and target positions coincide")
    azimuth = math.atan2(delta[1], delta[0])
    if azimuth == -math.pi:
        azimuth = math.pi
    # clip guards asin against |dz/d| exceeding 1 by roundoff
    elevation = math.asin(min(1.0, max(-1.0, delta[2] / distance)))
    return SphericalTriple(azimuth, elevation, distance)


def position_from_spherical(reference: Position3, link: SphericalTriple) -> Position3:
    """Inverse of :func:`spherical_from_positions`."""
    point = reference.as_array() + link.distance * unit_direction(
        link.azimuth, link.elevation
    )
    return Position3.from_array(point)


def channel_params_from_scene(scene: SceneGeometry) -> ChannelParams:
    """Spherical parameters of the three mobile links of a scene."""
    return ChannelParams(
        bs_outdoor=spherical_from_positions(scene.bs, scene.ms_outdoor),
        ris_outdoor=spherical_from_positions(scene.ris, scene.ms_outdoor),
        ris_indoor=spherical_from_positions(scene.ris, scene.ms_indoor),
    )


def _link_jacobian(link: SphericalTriple) -> np.ndarray:
    """3x3 block d(azimuth, elevation, distance)/d(x, y, z) of one link.

    Rows are the target coordinates x, y, z; columns the three parameters.
    Derivatives w.r.t. the reference point are the negatives and are not
    needed here (anchors are known).
    """
    ca, sa = math.cos(link.azimuth), math.sin(link.azimuth)
    ce, se = math.cos(link.elevation), math.sin(link.elevation)
    d = link.distance
    if abs(ce) < _COS_ELEVATION_FLOOR:
        raise ElevationSingularityError(
            "elevation at +-pi/2: azimuth is not differentiable"
        )
    block = np.empty((3, 3))
    block[:, 0] = [-sa / (d * ce), ca / (d * ce), 0.0]
    block[:, 1] = [-ca * se / d, -sa * se / d, ce / d]
    block[:, 2] = [ca * ce, sa * ce, se]
    return block


def jacobian(scene: SceneGeometry) -> PositionJacobian:
    """Jacobian of the 9 link parameters w.r.t. the two mobile positions."""
    params = channel_params_from_scene(scene)
    outdoor = np.zeros((3, 6))
    outdoor[:, 0:3] = _link_jacobian(params.bs_outdoor)
    outdoor[:, 3:6] = _link_jacobian(params.ris_outdoor)
    indoor = _link_jacobian(params.ris_indoor)
    full = np.zeros((6, 9))
    full[0:3, 0:6] = outdoor
    full[3:6, 6:9] = indoor
    return PositionJacobian(outdoor=outdoor, indoor=indoor, full=full)

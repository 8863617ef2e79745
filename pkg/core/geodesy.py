"""Spherical-earth primitives shared by every pipeline stage.

Scalar helpers use ``math``; ``haversine_angles`` is the vectorized form the
spatial index and its brute-force oracle both rely on.
"""

import math
from dataclasses import dataclass

import numpy as np

from utils.constants import EARTH_RADIUS_M
from utils.errors import IdenticalPoints, InvalidResult, InvalidParameter
from utils.validators import Validators


@dataclass(frozen=True)
class GeoCoord:
    """WGS84 latitude/longitude in degrees"""

    lat_deg: float
    lon_deg: float

    def is_valid(self) -> bool:
        return (Validators.validate_latitude(self.lat_deg)
                and Validators.validate_longitude(self.lon_deg))


@dataclass(frozen=True)
class RadCoord:
    """Latitude/longitude in radians"""

    lat_rad: float
    lon_rad: float


@dataclass(frozen=True)
class EarthModel:
    """Spherical earth"""

    radius_m: float = EARTH_RADIUS_M

    def __post_init__(self):
        if not self.radius_m > 0:
            raise InvalidParameter(f"earth radius must be positive, got {self.radius_m}")

    def angle_of(self, distance_m: float) -> float:
        """Central angle (radians) subtending ``distance_m`` on this sphere"""
        return distance_m / self.radius_m


EARTH = EarthModel()


def to_radians(c: GeoCoord) -> RadCoord:
    return RadCoord(c.lat_deg * math.pi / 180.0, c.lon_deg * math.pi / 180.0)


def from_radians(r: RadCoord) -> GeoCoord:
    return GeoCoord(r.lat_rad * 180.0 / math.pi, r.lon_rad * 180.0 / math.pi)


def haversine_angle(a: RadCoord, b: RadCoord) -> float:
    """Central angle between two points given in radians"""
    sin_dlat = math.sin((b.lat_rad - a.lat_rad) / 2.0)
    sin_dlon = math.sin((b.lon_rad - a.lon_rad) / 2.0)
    h = sin_dlat * sin_dlat + math.cos(a.lat_rad) * math.cos(b.lat_rad) * sin_dlon * sin_dlon
    return 2.0 * math.asin(math.sqrt(min(1.0, h)))


def haversine_distance(a: GeoCoord, b: GeoCoord, earth: EarthModel = EARTH) -> float:
    """Great-circle distance in meters"""
    return earth.radius_m * haversine_angle(to_radians(a), to_radians(b))


def haversine_angles(lat_rad: np.ndarray, lon_rad: np.ndarray, center: RadCoord) -> np.ndarray:
    """Central angles from ``center`` to every (lat_rad[i], lon_rad[i])"""
    sin_dlat = np.sin((lat_rad - center.lat_rad) / 2.0)
    sin_dlon = np.sin((lon_rad - center.lon_rad) / 2.0)
    h = sin_dlat * sin_dlat + math.cos(center.lat_rad) * np.cos(lat_rad) * sin_dlon * sin_dlon
    return 2.0 * np.arcsin(np.sqrt(np.minimum(1.0, h)))


def initial_bearing(a: GeoCoord, b: GeoCoord) -> float:
    """Forward azimuth from ``a`` to ``b`` in degrees clockwise from north, in [0, 360).

    Raises:
        IdenticalPoints: when ``a`` and ``b`` coincide
    """
    ra, rb = to_radians(a), to_radians(b)
    if haversine_angle(ra, rb) == 0.0:
        raise IdenticalPoints(f"bearing undefined between coincident points {a}")
    dlon = rb.lon_rad - ra.lon_rad
    y = math.sin(dlon) * math.cos(rb.lat_rad)
    x = (math.cos(ra.lat_rad) * math.sin(rb.lat_rad)
         - math.sin(ra.lat_rad) * math.cos(rb.lat_rad) * math.cos(dlon))
    bearing = math.degrees(math.atan2(y, x)) % 360.0
    # -tiny % 360 rounds up to exactly 360.0
    return 0.0 if bearing >= 360.0 else bearing


def normalize_longitude(lon_deg: float) -> float:
    lon = (lon_deg + 180.0) % 360.0 - 180.0
    if lon == -180.0 and lon_deg > 0:
        return 180.0
    return lon


def destination_point(origin: GeoCoord, bearing_deg: float, distance_m: float,
                      earth: EarthModel = EARTH) -> GeoCoord:
    """Point reached after ``distance_m`` along the great circle leaving ``origin``
    with initial heading ``bearing_deg``.

    Computed with unit vectors so it stays well conditioned near the poles.

    Raises:
        InvalidResult: if the result is not finite (e.g. NaN input)
    """
    if distance_m == 0.0:
        if not (math.isfinite(origin.lat_deg) and math.isfinite(origin.lon_deg)):
            raise InvalidResult(f"non-finite origin {origin}")
        return origin

    phi, lam = math.radians(origin.lat_deg), math.radians(origin.lon_deg)
    theta = math.radians(bearing_deg)
    delta = earth.angle_of(distance_m)

    sin_phi, cos_phi = math.sin(phi), math.cos(phi)
    sin_lam, cos_lam = math.sin(lam), math.cos(lam)

    # position, local north and local east unit vectors
    p = (cos_phi * cos_lam, cos_phi * sin_lam, sin_phi)
    north = (-sin_phi * cos_lam, -sin_phi * sin_lam, cos_phi)
    east = (-sin_lam, cos_lam, 0.0)

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cos_d, sin_d = math.cos(delta), math.sin(delta)
    q = [p[i] * cos_d + (north[i] * cos_t + east[i] * sin_t) * sin_d for i in range(3)]

    lat = math.degrees(math.atan2(q[2], math.hypot(q[0], q[1])))
    lon = math.degrees(math.atan2(q[1], q[0]))
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise InvalidResult(
            f"destination from {origin} bearing {bearing_deg} distance {distance_m} is not finite")
    return GeoCoord(lat, normalize_longitude(lon))

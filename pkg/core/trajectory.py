"""Fixed-interval resampling of raw fixes and forward bearings per track point."""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.geodesy import GeoCoord, initial_bearing
from core.ingestion import RawFix, Trip
from utils.constants import DEFAULTS
from utils.errors import IdenticalPoints, InvalidParameter, TooShort
from utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class TrackPoint:
    t: float
    coord: GeoCoord
    bearing_deg: Optional[float] = None  # None: bearing INVALID

    @property
    def has_bearing(self) -> bool:
        return self.bearing_deg is not None


@dataclass(frozen=True)
class TripTrack:
    trip_id: str
    points: Tuple[TrackPoint, ...]
    interval_s: float


def interpolate_trip(fixes: Sequence[RawFix], interval_s: float = DEFAULTS['interval_s']) -> TripTrack:
    """Resample ``fixes`` onto t0, t0+interval, ... up to the last fix time.

    Positions are linear in lat/lon between the bracketing fixes.

    Raises:
        TooShort: fewer than 2 fixes or a span shorter than ``interval_s``
    """
    if not interval_s > 0:
        raise InvalidParameter(f"interval_s must be positive, got {interval_s}")
    if len(fixes) < 2:
        raise TooShort(f"trip has {len(fixes)} fix(es)")
    times = np.array([f.t for f in fixes], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise InvalidParameter("fix times must be strictly increasing")
    span = times[-1] - times[0]
    if span < interval_s:
        raise TooShort(f"trip spans {span:.3f}s, less than the {interval_s}s interval")

    steps = int(math.floor(span / interval_s + 1e-9)) + 1
    grid = times[0] + np.arange(steps, dtype=float) * interval_s
    lats = np.interp(grid, times, np.array([f.coord.lat_deg for f in fixes]))
    lons = np.interp(grid, times, np.array([f.coord.lon_deg for f in fixes]))

    points = tuple(
        TrackPoint(float(t), GeoCoord(float(lat), float(lon)))
        for t, lat, lon in zip(grid, lats, lons)
    )
    return TripTrack(fixes[0].trip_id, points, float(interval_s))


def assign_bearings(track: TripTrack) -> TripTrack:
    """Bearing of each point toward its successor.

    The terminal point, and any point coincident with its successor, get no bearing.
    """
    points = list(track.points)
    with_bearings = []
    for i, point in enumerate(points):
        bearing = None
        if i + 1 < len(points):
            try:
                bearing = initial_bearing(point.coord, points[i + 1].coord)
            except IdenticalPoints:
                bearing = None
        with_bearings.append(replace(point, bearing_deg=bearing))
    return replace(track, points=tuple(with_bearings))


def prepare_trips(trips: Sequence[Trip], interval_s: float = DEFAULTS['interval_s']) -> Tuple[List[TripTrack], int]:
    """Interpolate and attach bearings for every trip.

    Returns the tracks and the number of trips dropped as too short.
    """
    tracks = []
    dropped = 0
    for trip_id, fixes in trips:
        try:
            tracks.append(assign_bearings(interpolate_trip(fixes, interval_s)))
        except TooShort as e:
            dropped += 1
            logger.debug(f"Trip {trip_id} dropped: {e}")
    if dropped:
        logger.warning(f"Dropped {dropped} trips shorter than one {interval_s}s interval")
    return tracks, dropped

"""Forward viewing circles per trip and cross-trip aggregation of visibility counts."""

from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from core.densification import PointCorpus, PointId
from core.geodesy import EARTH, EarthModel, GeoCoord, RadCoord, destination_point, to_radians
from core.trajectory import TrackPoint, TripTrack
from utils.constants import CIRCLE_POLYGON_VERTICES, DEFAULTS
from utils.errors import InvalidBearing, InvalidParameter, InvalidResult, UnknownPointId
from utils.logger import setup_logger

logger = setup_logger(__name__)

PointKey = Tuple[float, float]


class RadiusQueryable(Protocol):
    def query_radius(self, center: RadCoord, radius_m: float, earth: EarthModel = EARTH) -> np.ndarray:
        ...


@dataclass(frozen=True)
class ViewParams:
    radius_m: float = DEFAULTS['radius_m']
    lead_m: float = DEFAULTS['lead_m']
    interval_s: float = DEFAULTS['interval_s']

    def __post_init__(self):
        if not self.radius_m > 0:
            raise InvalidParameter(f"radius_m must be > 0, got {self.radius_m}")
        if not self.lead_m >= 0:
            raise InvalidParameter(f"lead_m must be >= 0, got {self.lead_m}")
        if not self.interval_s > 0:
            raise InvalidParameter(f"interval_s must be > 0, got {self.interval_s}")


@dataclass
class VisibilityTally:
    """Per-run diagnostics of what the viewing-circle loop skipped or did"""

    track_points: int = 0
    invalid_bearings: int = 0
    invalid_centers: int = 0
    circles_queried: int = 0
    hits: int = 0

    def __add__(self, other: "VisibilityTally") -> "VisibilityTally":
        return VisibilityTally(
            self.track_points + other.track_points,
            self.invalid_bearings + other.invalid_bearings,
            self.invalid_centers + other.invalid_centers,
            self.circles_queried + other.circles_queried,
            self.hits + other.hits,
        )

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TripVisibility:
    trip_id: str
    counts: Dict[PointId, int]
    tally: VisibilityTally = field(default_factory=VisibilityTally)


@dataclass(frozen=True)
class AggregateEntry:
    coord: GeoCoord
    total_count: int
    # corpus ordinal the representative coord came from; None when read back from disk
    source_ordinal: Optional[int] = None


@dataclass
class AggregateVisibility:
    entries: Dict[PointKey, AggregateEntry] = field(default_factory=dict)
    precision: int = DEFAULTS['precision']

    def __len__(self) -> int:
        return len(self.entries)

    def totals(self) -> List[int]:
        """Totals in canonical key order"""
        return [self.entries[key].total_count for key in sorted(self.entries)]

    def grand_total(self) -> int:
        return sum(entry.total_count for entry in self.entries.values())

    def merge(self, other: "AggregateVisibility") -> "AggregateVisibility":
        if other.precision != self.precision:
            raise InvalidParameter(f"cannot merge aggregates keyed at {self.precision} and {other.precision} decimals")
        merged = dict(self.entries)
        for key, entry in other.entries.items():
            mine = merged.get(key)
            merged[key] = entry if mine is None else _combine(mine, entry)
        return AggregateVisibility(merged, self.precision)


def _combine(a: AggregateEntry, b: AggregateEntry) -> AggregateEntry:
    # the lower corpus ordinal supplies the coord, so merge order never matters
    keep = a
    if b.source_ordinal is not None and (a.source_ordinal is None or b.source_ordinal < a.source_ordinal):
        keep = b
    return AggregateEntry(keep.coord, a.total_count + b.total_count, keep.source_ordinal)


def point_key(coord: GeoCoord, precision: int) -> PointKey:
    return (round(coord.lat_deg, precision), round(coord.lon_deg, precision))


def viewing_center(p: TrackPoint, params: ViewParams, earth: EarthModel = EARTH) -> GeoCoord:
    """Center of the viewing circle ``lead_m`` ahead of the vehicle.

    Raises:
        InvalidBearing: the point has no bearing
        InvalidResult: the projected center is not finite
    """
    if not p.has_bearing:
        raise InvalidBearing(f"track point at t={p.t} has no bearing")
    return destination_point(p.coord, p.bearing_deg, params.lead_m, earth)


def trip_visibility(track: TripTrack, index: RadiusQueryable, corpus: PointCorpus,
                    params: ViewParams, earth: EarthModel = EARTH) -> TripVisibility:
    """Count, for one trip, how many viewing circles contain each corpus point.

    ``index`` is anything with ``query_radius`` over the corpus ordinals: the
    ball tree in production, the brute-force scan as its oracle.
    """
    counts = np.zeros(len(corpus), dtype=np.int64)
    tally = VisibilityTally(track_points=len(track.points))
    for point in track.points:
        if not point.has_bearing:
            tally.invalid_bearings += 1
            continue
        try:
            center = viewing_center(point, params, earth)
        except InvalidResult:
            tally.invalid_centers += 1
            continue
        hits = index.query_radius(to_radians(center), params.radius_m, earth)
        counts[hits] += 1
        tally.circles_queried += 1
        tally.hits += len(hits)

    seen = np.flatnonzero(counts)
    result = {corpus.id_of[i]: int(counts[i]) for i in seen}
    logger.debug(f"Trip {track.trip_id}: {tally.circles_queried} circles, {len(result)} points seen")
    return TripVisibility(track.trip_id, result, tally)


def aggregate_trip(trip: TripVisibility, corpus: PointCorpus,
                   precision: int = DEFAULTS['precision']) -> AggregateVisibility:
    result = AggregateVisibility(precision=precision)
    for point_id, count in trip.counts.items():
        ordinal = corpus.ordinal_of.get(point_id)
        if ordinal is None:
            raise UnknownPointId(f"trip {trip.trip_id} references unknown point {point_id}")
        coord = corpus.points[ordinal].coord
        entry = AggregateEntry(coord, int(count), ordinal)
        key = point_key(coord, precision)
        mine = result.entries.get(key)
        result.entries[key] = entry if mine is None else _combine(mine, entry)
    return result


def aggregate(per_trip: Iterable[TripVisibility], corpus: PointCorpus,
              precision: int = DEFAULTS['precision']) -> AggregateVisibility:
    """Sum per-trip counts by rounded-coordinate key.

    Raises:
        UnknownPointId: a trip references a point missing from ``corpus``
    """
    parts = (aggregate_trip(trip, corpus, precision) for trip in per_trip)
    return reduce(AggregateVisibility.merge, parts, AggregateVisibility(precision=precision))


def circle_polygon(center: GeoCoord, radius_m: float, vertices: int = CIRCLE_POLYGON_VERTICES,
                   earth: EarthModel = EARTH) -> List[List[float]]:
    """Closed GeoJSON ring ([lon, lat] pairs) approximating a geodesic circle"""
    ring = []
    for k in range(vertices):
        c = destination_point(center, 360.0 * k / vertices, radius_m, earth)
        ring.append([c.lon_deg, c.lat_deg])
    ring.append(list(ring[0]))
    return ring


def trip_geojson(track: TripTrack, params: ViewParams, earth: EarthModel = EARTH) -> dict:
    """Track LineString plus one circle Polygon per usable viewing circle"""
    features = [{
        'type': 'Feature',
        'properties': {'trip_id': track.trip_id, 'points': len(track.points)},
        'geometry': {
            'type': 'LineString',
            'coordinates': [[p.coord.lon_deg, p.coord.lat_deg] for p in track.points],
        },
    }]
    for point in track.points:
        try:
            center = viewing_center(point, params, earth)
        except (InvalidBearing, InvalidResult):
            continue
        features.append({
            'type': 'Feature',
            'properties': {'trip_id': track.trip_id, 't': point.t, 'bearing': point.bearing_deg},
            'geometry': {'type': 'Polygon', 'coordinates': [circle_polygon(center, params.radius_m, earth=earth)]},
        })
    return {'type': 'FeatureCollection', 'features': features}


def total_tally(results: Sequence[TripVisibility]) -> VisibilityTally:
    return reduce(lambda acc, r: acc + r.tally, results, VisibilityTally())

"""Loading, validation and bbox filtering of trajectory fixes and building footprints.

Trajectory CSV header: ``trip_id,t,lat,lon`` (epoch seconds, decimal degrees).
Buildings: GeoJSON FeatureCollection of Polygon / MultiPolygon features.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, TypeVar, Union

from core.geodesy import GeoCoord
from utils.errors import EmptyInput, InvalidParameter, ParseError, UnsupportedGeometry
from utils.logger import setup_logger
from utils.validators import Validators

logger = setup_logger(__name__)

TRAJECTORY_HEADER = ['trip_id', 't', 'lat', 'lon']


@dataclass(frozen=True)
class RawFix:
    trip_id: str
    t: float
    coord: GeoCoord


@dataclass(frozen=True)
class BoundingBox:
    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self):
        if not Validators.validate_bbox(self.min_lon, self.min_lat, self.max_lon, self.max_lat):
            raise InvalidParameter(
                f"invalid bbox ({self.min_lon}, {self.min_lat}, {self.max_lon}, {self.max_lat})")

    def contains(self, c: GeoCoord) -> bool:
        """Strict interior test"""
        return (self.min_lon < c.lon_deg < self.max_lon
                and self.min_lat < c.lat_deg < self.max_lat)

    @property
    def center(self) -> GeoCoord:
        return GeoCoord((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.min_lon, self.min_lat, self.max_lon, self.max_lat)

    @classmethod
    def parse(cls, text: str) -> "BoundingBox":
        """Parse ``min_lon,min_lat,max_lon,max_lat`` or the alias ``waterloo``"""
        from utils.constants import WATERLOO_BBOX

        if text.strip().lower() == 'waterloo':
            return cls(*WATERLOO_BBOX)
        parts = [p.strip() for p in text.split(',')]
        if len(parts) != 4:
            raise InvalidParameter(f"bbox needs 4 comma-separated numbers, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as e:
            raise InvalidParameter(f"bbox {text!r}: {e}") from e


@dataclass(frozen=True)
class BuildingFootprint:
    building_id: str
    rings: Tuple[Tuple[GeoCoord, ...], ...]


@dataclass(frozen=True)
class BuildingLayer:
    """Footprints loaded from one document plus the number of skipped geometries"""

    footprints: List[BuildingFootprint]
    skipped: int = 0


Trip = Tuple[str, List[RawFix]]


def _parse_float(value: str, name: str, path: str, row: int) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{name} is not a number: {value!r}", path, row)
    if not math.isfinite(number):
        raise ParseError(f"{name} is not finite: {value!r}", path, row)
    return number


def load_trajectories(path: Union[str, Path]) -> List[Trip]:
    """Read a trajectory CSV into trips ordered by first appearance.

    Fixes are sorted by time within a trip; a repeated timestamp keeps the
    last row seen for it.

    Raises:
        ParseError: malformed header or row (1-based row numbers, header is row 1)
        EmptyInput: no data rows
    """
    path = str(path)
    logger.info(f"Loading trajectories from {path}")
    trips: Dict[str, Dict[float, RawFix]] = {}
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise EmptyInput(f"{path}: trajectory file is empty")
            if [h.strip() for h in header] != TRAJECTORY_HEADER:
                raise ParseError(f"expected header {','.join(TRAJECTORY_HEADER)}, got {','.join(header)}",
                                 path, 1)
            for row_number, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != 4:
                    raise ParseError(f"expected 4 fields, got {len(row)}", path, row_number)
                trip_id = row[0].strip()
                if not Validators.validate_trip_id(trip_id):
                    raise ParseError(f"invalid trip_id {row[0]!r}", path, row_number)
                t = _parse_float(row[1], 't', path, row_number)
                lat = _parse_float(row[2], 'lat', path, row_number)
                lon = _parse_float(row[3], 'lon', path, row_number)
                if not Validators.validate_latitude(lat):
                    raise ParseError(f"lat {lat} outside [-90, 90]", path, row_number)
                if not Validators.validate_longitude(lon):
                    raise ParseError(f"lon {lon} outside [-180, 180]", path, row_number)
                trips.setdefault(trip_id, {})[t] = RawFix(trip_id, t, GeoCoord(lat, lon))
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e}", path)

    if not trips:
        raise EmptyInput(f"{path}: no trajectory rows")

    result = [(trip_id, [by_time[t] for t in sorted(by_time)]) for trip_id, by_time in trips.items()]
    logger.info(f"Loaded {sum(len(f) for _, f in result)} fixes in {len(result)} trips")
    return result


def write_trajectories(path: Union[str, Path], trips: Sequence[Trip]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRAJECTORY_HEADER)
        for trip_id, fixes in trips:
            for fix in fixes:
                writer.writerow([
                    trip_id,
                    repr(float(fix.t)),
                    repr(fix.coord.lat_deg),
                    repr(fix.coord.lon_deg),
                ])
    return path


def _parse_ring(raw_ring, feature_ref: str) -> Optional[Tuple[GeoCoord, ...]]:
    """Validate one ring; drops consecutive duplicates and closes it.
    Returns None when fewer than 4 coordinates remain."""
    if not isinstance(raw_ring, list):
        raise ParseError(f"feature {feature_ref}: ring is not an array")
    coords: List[GeoCoord] = []
    for position in raw_ring:
        if not isinstance(position, (list, tuple)) or len(position) < 2:
            raise ParseError(f"feature {feature_ref}: malformed position {position!r}")
        try:
            lon, lat = float(position[0]), float(position[1])
        except (TypeError, ValueError):
            raise ParseError(f"feature {feature_ref}: non-numeric position {position!r}")
        if not (Validators.validate_latitude(lat) and Validators.validate_longitude(lon)):
            raise ParseError(f"feature {feature_ref}: position {position!r} out of range")
        coord = GeoCoord(lat, lon)
        if coords and coords[-1] == coord:
            continue
        coords.append(coord)
    if len(coords) > 1 and coords[0] != coords[-1]:
        coords.append(coords[0])
    if len(coords) < 4:
        return None
    return tuple(coords)


def _feature_id(feature: dict, ordinal: int) -> str:
    if feature.get('id') is not None:
        return str(feature['id'])
    properties = feature.get('properties') or {}
    if properties.get('@id') is not None:
        return str(properties['@id'])
    return f"b{ordinal}"


def _polygon_footprint(building_id: str, polygon) -> Optional[BuildingFootprint]:
    if not isinstance(polygon, list) or not polygon:
        raise ParseError(f"feature {building_id}: polygon has no rings")
    rings = []
    for ring_index, raw_ring in enumerate(polygon):
        ring = _parse_ring(raw_ring, building_id)
        if ring is None:
            if ring_index == 0:
                logger.warning(f"Feature {building_id}: exterior ring has fewer than 4 distinct coordinates, skipped")
                return None
            logger.warning(f"Feature {building_id}: interior ring {ring_index} degenerate, dropped")
            continue
        rings.append(ring)
    return BuildingFootprint(building_id, tuple(rings))


def parse_buildings(document: dict, source: str = "<document>") -> BuildingLayer:
    """Convert a GeoJSON FeatureCollection into footprints.

    Non-areal geometries and degenerate polygons are skipped and counted.
    """
    if not isinstance(document, dict) or document.get('type') != 'FeatureCollection':
        raise ParseError("not a GeoJSON FeatureCollection", source)
    features = document.get('features')
    if not isinstance(features, list):
        raise ParseError("FeatureCollection has no features array", source)

    footprints: List[BuildingFootprint] = []
    skipped = 0
    for ordinal, feature in enumerate(features):
        if not isinstance(feature, dict):
            raise ParseError(f"feature {ordinal} is not an object", source)
        geometry = feature.get('geometry') or {}
        kind = geometry.get('type')
        building_id = _feature_id(feature, ordinal)
        if kind == 'Polygon':
            footprint = _polygon_footprint(building_id, geometry.get('coordinates'))
            if footprint is None:
                skipped += 1
            else:
                footprints.append(footprint)
        elif kind == 'MultiPolygon':
            members = geometry.get('coordinates')
            if not isinstance(members, list):
                raise ParseError(f"feature {building_id}: MultiPolygon without coordinates", source)
            for part, polygon in enumerate(members):
                footprint = _polygon_footprint(f"{building_id}-{part}", polygon)
                if footprint is None:
                    skipped += 1
                else:
                    footprints.append(footprint)
        else:
            error = UnsupportedGeometry(f"feature {building_id}: {kind} is not areal")
            logger.debug(f"Skipping geometry: {error}")
            skipped += 1

    if skipped:
        logger.warning(f"{source}: skipped {skipped} unsupported or degenerate geometries")
    return BuildingLayer(footprints, skipped)


def load_buildings(path: Union[str, Path]) -> BuildingLayer:
    path = str(path)
    logger.info(f"Loading buildings from {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", path, e.lineno)
    layer = parse_buildings(document, path)
    logger.info(f"Loaded {len(layer.footprints)} footprints ({layer.skipped} skipped)")
    return layer


def footprints_to_geojson(footprints: Sequence[BuildingFootprint]) -> dict:
    features = []
    for footprint in footprints:
        rings = [[[c.lon_deg, c.lat_deg] for c in ring] for ring in footprint.rings]
        features.append({
            'type': 'Feature',
            'id': footprint.building_id,
            'properties': {},
            'geometry': {'type': 'Polygon', 'coordinates': rings},
        })
    return {'type': 'FeatureCollection', 'features': features}


def write_buildings(path: Union[str, Path], footprints: Sequence[BuildingFootprint]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(footprints_to_geojson(footprints), f)
        f.write('\n')
    return path


Filterable = TypeVar('Filterable', RawFix, BuildingFootprint)


def filter_bbox(items: Sequence[Filterable], bbox: BoundingBox) -> List[Filterable]:
    """Keep fixes strictly inside ``bbox`` and footprints with any ring vertex inside.
    Order is preserved."""
    kept = []
    for item in items:
        if isinstance(item, RawFix):
            if bbox.contains(item.coord):
                kept.append(item)
        elif isinstance(item, BuildingFootprint):
            if any(bbox.contains(c) for ring in item.rings for c in ring):
                kept.append(item)
        else:
            raise TypeError(f"cannot bbox-filter {type(item).__name__}")
    return kept


def filter_trips(trips: Sequence[Trip], bbox: BoundingBox) -> List[Trip]:
    """Apply ``filter_bbox`` per trip, dropping trips left without fixes"""
    filtered = []
    for trip_id, fixes in trips:
        inside = filter_bbox(fixes, bbox)
        if inside:
            filtered.append((trip_id, inside))
    logger.info(f"bbox filter kept {len(filtered)} of {len(trips)} trips")
    return filtered

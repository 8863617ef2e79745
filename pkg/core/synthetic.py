"""Deterministic desk-scale trajectories and building footprints.

Streets form a regular grid inside the bounding box and rectangular buildings are
scattered between the street corridors. Every intersection gets a log-normal
attraction weight; trips chain legs between weighted hubs along the grid, so a
few corridors carry most of the traffic and their intersections become hotspots.
"""

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from core.ingestion import BoundingBox, TRAJECTORY_HEADER
from utils.constants import EARTH_RADIUS_M
from utils.errors import InvalidParameter, PlacementFailure
from utils.helpers import format_coord
from utils.logger import setup_logger

logger = setup_logger(__name__)

COORD_DECIMALS = 7
MAX_PLACEMENT_ATTEMPTS = 100
BUILDING_SIDE_RANGE_M = (8.0, 40.0)
BORDER_MARGIN_M = 2.0
SETBACK_M = 2.0
BUILDING_GAP_M = 1.0
FIX_GAP_RANGE_S = (1, 9)
# 2024-03-01T00:00:00Z
START_EPOCH_S = 1709251200


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    bbox: BoundingBox = BoundingBox(151.200, -33.905, 151.206, -33.900)
    n_trips: int = 20
    n_buildings: int = 60
    trip_duration_s: float = 300.0
    speed_mps: Tuple[float, float] = (5.0, 15.0)
    block_m: float = 120.0
    street_halfwidth_m: float = 8.0
    hub_sigma: float = 1.5

    def __post_init__(self):
        if self.n_trips < 1 or self.n_buildings < 1:
            raise InvalidParameter("n_trips and n_buildings must be >= 1")
        if not self.trip_duration_s >= FIX_GAP_RANGE_S[1]:
            raise InvalidParameter(f"trip_duration_s must be >= {FIX_GAP_RANGE_S[1]}")
        low, high = self.speed_mps
        if not 0 < low <= high:
            raise InvalidParameter(f"speed range must be positive and ordered, got {self.speed_mps}")
        if not self.block_m > 0 or not self.street_halfwidth_m > 0:
            raise InvalidParameter("block_m and street_halfwidth_m must be positive")
        if not self.hub_sigma >= 0:
            raise InvalidParameter(f"hub_sigma must be >= 0, got {self.hub_sigma}")


class _LocalFrame:
    """Equirectangular meters east/north of the bbox south-west corner"""

    def __init__(self, bbox: BoundingBox):
        self.bbox = bbox
        self.m_per_deg_lat = EARTH_RADIUS_M * math.pi / 180.0
        mid_lat = math.radians((bbox.min_lat + bbox.max_lat) / 2.0)
        self.m_per_deg_lon = self.m_per_deg_lat * math.cos(mid_lat)
        self.width = (bbox.max_lon - bbox.min_lon) * self.m_per_deg_lon
        self.height = (bbox.max_lat - bbox.min_lat) * self.m_per_deg_lat

    def to_lat_lon(self, x: float, y: float) -> Tuple[float, float]:
        lat = round(self.bbox.min_lat + y / self.m_per_deg_lat, COORD_DECIMALS)
        lon = round(self.bbox.min_lon + x / self.m_per_deg_lon, COORD_DECIMALS)
        return lat, lon


def _street_lines(extent: float, block: float) -> List[float]:
    lines = []
    k = 1
    while k * block < extent - 1e-6:
        lines.append(k * block)
        k += 1
    return lines


def _place_buildings(rng: np.random.Generator, frame: _LocalFrame, xs: List[float], ys: List[float],
                     config: SynthConfig) -> List[Tuple[float, float, float, float]]:
    clear = config.street_halfwidth_m + SETBACK_M
    placed: List[Tuple[float, float, float, float]] = []
    low, high = BUILDING_SIDE_RANGE_M
    for index in range(config.n_buildings):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            w, h = rng.uniform(low, high), rng.uniform(low, high)
            x0 = rng.uniform(BORDER_MARGIN_M, frame.width - BORDER_MARGIN_M - w)
            y0 = rng.uniform(BORDER_MARGIN_M, frame.height - BORDER_MARGIN_M - h)
            x1, y1 = x0 + w, y0 + h
            if any(x0 < s + clear and x1 > s - clear for s in xs):
                continue
            if any(y0 < s + clear and y1 > s - clear for s in ys):
                continue
            if any(x0 < bx1 + BUILDING_GAP_M and x1 > bx0 - BUILDING_GAP_M
                   and y0 < by1 + BUILDING_GAP_M and y1 > by0 - BUILDING_GAP_M
                   for bx0, by0, bx1, by1 in placed):
                continue
            placed.append((x0, y0, x1, y1))
            break
        else:
            raise PlacementFailure(
                f"could not place building {index + 1} of {config.n_buildings} "
                f"after {MAX_PLACEMENT_ATTEMPTS} attempts; bbox too crowded")
    return placed


def _draw_hub(rng: np.random.Generator, weights: np.ndarray,
              exclude: Optional[Tuple[int, int]] = None) -> Tuple[int, int]:
    p = weights.copy()
    if exclude is not None:
        p[exclude] = 0.0
    flat = p.ravel() / p.sum()
    i, j = divmod(int(rng.choice(flat.size, p=flat)), weights.shape[1])
    return i, j


def _drive(rng: np.random.Generator, xs: List[float], ys: List[float], weights: np.ndarray,
           length_m: float) -> List[Tuple[float, float]]:
    """Hub-to-hub legs along the street grid covering at least ``length_m``.

    Each leg turns once, at a corner picked by coin flip, so legs stay on the
    row or column lines of their endpoints.
    """
    i, j = _draw_hub(rng, weights)
    path = [(xs[i], ys[j])]
    travelled = 0.0
    while travelled < length_m:
        ti, tj = _draw_hub(rng, weights, exclude=(i, j))
        corner = (ti, j) if rng.random() < 0.5 else (i, tj)
        for ci, cj in (corner, (ti, tj)):
            nxt = (xs[ci], ys[cj])
            if nxt != path[-1]:
                travelled += math.hypot(nxt[0] - path[-1][0], nxt[1] - path[-1][1])
                path.append(nxt)
        i, j = ti, tj
    return path


def _position_along(path: List[Tuple[float, float]], cumulative: np.ndarray, distance: float) -> Tuple[float, float]:
    k = int(np.searchsorted(cumulative, distance, side='right')) - 1
    k = min(max(k, 0), len(path) - 2)
    seg = cumulative[k + 1] - cumulative[k]
    f = 0.0 if seg == 0 else (distance - cumulative[k]) / seg
    (ax, ay), (bx, by) = path[k], path[k + 1]
    return ax + f * (bx - ax), ay + f * (by - ay)


def generate(config: SynthConfig) -> Tuple[str, str]:
    """Return (trajectory CSV text, buildings GeoJSON text); identical seeds give identical bytes.

    Raises:
        PlacementFailure: the bbox cannot hold the street grid or the requested buildings
    """
    rng = np.random.default_rng(config.seed)
    frame = _LocalFrame(config.bbox)
    xs = _street_lines(frame.width, config.block_m)
    ys = _street_lines(frame.height, config.block_m)
    if len(xs) < 2 or len(ys) < 2:
        raise PlacementFailure(
            f"bbox of {frame.width:.0f} x {frame.height:.0f} m cannot hold a street grid of {config.block_m} m blocks")

    rectangles = _place_buildings(rng, frame, xs, ys, config)
    hub_weights = rng.lognormal(0.0, config.hub_sigma, size=(len(xs), len(ys)))
    features = []
    for n, (x0, y0, x1, y1) in enumerate(rectangles):
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]
        ring = [[lon, lat] for lat, lon in (frame.to_lat_lon(x, y) for x, y in corners)]
        features.append({
            'type': 'Feature',
            'id': f"bldg-{n:05d}",
            'properties': {'building': 'yes'},
            'geometry': {'type': 'Polygon', 'coordinates': [ring]},
        })
    geojson_text = json.dumps({'type': 'FeatureCollection', 'features': features}) + '\n'

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(TRAJECTORY_HEADER)
    gap_low, gap_high = FIX_GAP_RANGE_S
    for trip_number in range(config.n_trips):
        speed = float(rng.uniform(*config.speed_mps))
        path = _drive(rng, xs, ys, hub_weights, speed * config.trip_duration_s)
        steps = np.hypot(np.diff([p[0] for p in path]), np.diff([p[1] for p in path]))
        cumulative = np.concatenate([[0.0], np.cumsum(steps)])
        trip_id = f"trip-{trip_number:04d}"
        t = 0
        while t <= config.trip_duration_s:
            lat, lon = frame.to_lat_lon(*_position_along(path, cumulative, speed * t))
            writer.writerow([trip_id, START_EPOCH_S + t,
                             format_coord(lat, COORD_DECIMALS), format_coord(lon, COORD_DECIMALS)])
            t += int(rng.integers(gap_low, gap_high + 1))

    logger.info(f"Generated {config.n_trips} trips and {len(features)} buildings (seed {config.seed})")
    return buffer.getvalue(), geojson_text


def write_inputs(config: SynthConfig, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_text, geojson_text = generate(config)
    trajectories = out_dir / 'trajectories.csv'
    buildings = out_dir / 'buildings.geojson'
    for path, text in ((trajectories, csv_text), (buildings, geojson_text)):
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    return trajectories, buildings

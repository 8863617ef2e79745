"""Building outline densification and the indexed point corpus.

Every edge of length L becomes ceil(L / spacing) evenly spaced points placed
along the edge's great circle; the edge start is included and the edge end is
left to the following edge.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Union

import numpy as np

from core.geodesy import EARTH, EarthModel, GeoCoord, destination_point, haversine_distance, initial_bearing
from core.ingestion import BuildingFootprint
from utils.constants import DEFAULTS
from utils.errors import DegenerateEdge, EmptyCorpus, InvalidParameter
from utils.logger import setup_logger

logger = setup_logger(__name__)

# Edges at most this many meters over a spacing multiple are not split further.
_CEIL_SLACK_M = 1e-7


class PointId(NamedTuple):
    building_id: str
    ring_idx: int
    edge_idx: int
    step_idx: int


@dataclass(frozen=True)
class DensePoint:
    point_id: PointId
    coord: GeoCoord
    offset_m: float


@dataclass
class PointCorpus:
    points: List[DensePoint]
    id_of: List[PointId] = field(init=False)
    ordinal_of: Dict[PointId, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.id_of = [p.point_id for p in self.points]
        self.ordinal_of = {pid: i for i, pid in enumerate(self.id_of)}

    def __len__(self) -> int:
        return len(self.points)

    def lat_lon_radians(self) -> np.ndarray:
        """(N, 2) array of [lat_rad, lon_rad]"""
        degrees = np.array([[p.coord.lat_deg, p.coord.lon_deg] for p in self.points], dtype=float)
        return np.radians(degrees.reshape(-1, 2))


def edge_steps(length_m: float, spacing_m: float) -> int:
    return max(1, math.ceil((length_m - _CEIL_SLACK_M) / spacing_m))


def densify_ring(ring: Sequence[GeoCoord], spacing_m: float = DEFAULTS['spacing_m'],
                 building_id: str = "", ring_idx: int = 0,
                 earth: EarthModel = EARTH) -> List[DensePoint]:
    """Densify one closed ring. Zero-length edges are skipped with a warning."""
    if not spacing_m > 0:
        raise InvalidParameter(f"spacing_m must be positive, got {spacing_m}")
    if len(ring) < 4 or ring[0] != ring[-1]:
        raise InvalidParameter(f"ring of {building_id!r} must be closed with at least 4 coordinates")

    points: List[DensePoint] = []
    for edge_idx in range(len(ring) - 1):
        start, end = ring[edge_idx], ring[edge_idx + 1]
        length = haversine_distance(start, end, earth)
        if length == 0.0:
            error = DegenerateEdge(f"{building_id} ring {ring_idx} edge {edge_idx} has zero length")
            logger.warning(f"Skipping edge: {error}")
            continue
        n = edge_steps(length, spacing_m)
        step = length / n
        bearing = initial_bearing(start, end)
        for k in range(n):
            offset = k * step
            coord = start if k == 0 else destination_point(start, bearing, offset, earth)
            points.append(DensePoint(PointId(building_id, ring_idx, edge_idx, k), coord, offset))
    return points


def build_corpus(footprints: Sequence[BuildingFootprint], spacing_m: float = DEFAULTS['spacing_m'],
                 earth: EarthModel = EARTH) -> PointCorpus:
    """Concatenate densified rings of all footprints in input order.

    Raises:
        EmptyCorpus: nothing usable to densify
    """
    points: List[DensePoint] = []
    for footprint in footprints:
        for ring_idx, ring in enumerate(footprint.rings):
            points.extend(densify_ring(ring, spacing_m, footprint.building_id, ring_idx, earth))
    if not points:
        raise EmptyCorpus("no usable building rings to densify")
    logger.info(f"Densified {len(footprints)} footprints into {len(points)} points at {spacing_m} m spacing")
    return PointCorpus(points)


def write_corpus_csv(path: Union[str, Path], corpus: PointCorpus) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['building_id', 'ring_idx', 'edge_idx', 'step_idx', 'lat', 'lon'])
        for point in corpus.points:
            pid = point.point_id
            writer.writerow([pid.building_id, pid.ring_idx, pid.edge_idx, pid.step_idx,
                             repr(point.coord.lat_deg), repr(point.coord.lon_deg)])
    return path

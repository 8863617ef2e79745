"""Ball tree over densified building points with the haversine metric.

Node data lives in flat arrays (center, radius, span into ``order``, children)
rather than linked objects; node ``i``'s members are
``order[start[i]:end[i]]`` and every internal node's span is the union of its
children's spans.

Construction: split a node at the point farthest from its centroid (pole A)
and the point farthest from A (pole B), members going to the nearer pole.
If that leaves one side empty (coincident points) the members are split at the
median distance from A instead.
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.densification import PointCorpus
from core.geodesy import EARTH, EarthModel, RadCoord, haversine_angles
from utils.constants import DEFAULTS
from utils.errors import EmptyCorpus, InvalidParameter
from utils.logger import setup_logger

logger = setup_logger(__name__)

# Absolute slack (radians, ~6 micrometres) on pruning and whole-node acceptance
# so rounding never decides membership; near-boundary points get an exact check.
_SLACK_RAD = 1e-12


@dataclass(frozen=True)
class BallNode:
    center: RadCoord
    radius_rad: float
    start: int
    end: int
    children: Optional[Tuple[int, int]]

    @property
    def is_leaf(self) -> bool:
        return self.children is None


def _within(lat_rad: np.ndarray, lon_rad: np.ndarray, center: RadCoord,
            radius_m: float, earth: EarthModel) -> np.ndarray:
    """Boolean mask of points whose great-circle distance to center is <= radius_m"""
    return earth.radius_m * haversine_angles(lat_rad, lon_rad, center) <= radius_m


def _centroid(lat_rad: np.ndarray, lon_rad: np.ndarray) -> RadCoord:
    """Spherical centroid: normalized mean of unit vectors"""
    cos_lat = np.cos(lat_rad)
    x = float(np.mean(cos_lat * np.cos(lon_rad)))
    y = float(np.mean(cos_lat * np.sin(lon_rad)))
    z = float(np.mean(np.sin(lat_rad)))
    if math.hypot(x, y, z) < 1e-12:
        return RadCoord(float(lat_rad[0]), float(lon_rad[0]))
    return RadCoord(math.atan2(z, math.hypot(x, y)), math.atan2(y, x))


class SpatialIndex:
    """Immutable ball tree; safe for concurrent read-only queries"""

    def __init__(self, points_rad: np.ndarray, leaf_size: int = DEFAULTS['leaf_size']):
        points_rad = np.ascontiguousarray(points_rad, dtype=float).reshape(-1, 2)
        if len(points_rad) == 0:
            raise EmptyCorpus("cannot index an empty corpus")
        if leaf_size < 1:
            raise InvalidParameter(f"leaf_size must be >= 1, got {leaf_size}")

        self.leaf_size = int(leaf_size)
        self.lat_rad = np.ascontiguousarray(points_rad[:, 0])
        self.lon_rad = np.ascontiguousarray(points_rad[:, 1])
        self.order = np.arange(len(points_rad), dtype=np.int64)

        self._center_lat: List[float] = []
        self._center_lon: List[float] = []
        self._center_cos: List[float] = []
        self._radius: List[float] = []
        self._start: List[int] = []
        self._end: List[int] = []
        self._left: List[int] = []
        self._right: List[int] = []
        self._depth: List[int] = []
        self._build()

    def __len__(self) -> int:
        return len(self.order)

    @property
    def node_count(self) -> int:
        return len(self._radius)

    def _add_node(self, start: int, end: int, depth: int) -> int:
        members = self.order[start:end]
        lat, lon = self.lat_rad[members], self.lon_rad[members]
        center = _centroid(lat, lon)
        radius = float(np.max(haversine_angles(lat, lon, center)))
        self._center_lat.append(center.lat_rad)
        self._center_lon.append(center.lon_rad)
        self._center_cos.append(math.cos(center.lat_rad))
        self._radius.append(radius)
        self._start.append(start)
        self._end.append(end)
        self._left.append(-1)
        self._right.append(-1)
        self._depth.append(depth)
        return len(self._radius) - 1

    def _build(self):
        stack = [self._add_node(0, len(self.order), 0)]
        while stack:
            node = stack.pop()
            start, end = self._start[node], self._end[node]
            if end - start <= self.leaf_size:
                continue
            members = self.order[start:end]
            lat, lon = self.lat_rad[members], self.lon_rad[members]

            center = RadCoord(self._center_lat[node], self._center_lon[node])
            pole_a = int(np.argmax(haversine_angles(lat, lon, center)))
            dist_a = haversine_angles(lat, lon, RadCoord(float(lat[pole_a]), float(lon[pole_a])))
            pole_b = int(np.argmax(dist_a))
            dist_b = haversine_angles(lat, lon, RadCoord(float(lat[pole_b]), float(lon[pole_b])))

            to_a = dist_a <= dist_b
            n_left = int(np.count_nonzero(to_a))
            if n_left == 0 or n_left == len(members):
                ranked = np.argsort(dist_a, kind='stable')
                n_left = len(members) // 2
                to_a = np.zeros(len(members), dtype=bool)
                to_a[ranked[:n_left]] = True

            self.order[start:end] = np.concatenate([members[to_a], members[~to_a]])
            mid = start + n_left
            depth = self._depth[node] + 1
            left = self._add_node(start, mid, depth)
            right = self._add_node(mid, end, depth)
            self._left[node], self._right[node] = left, right
            stack.extend((right, left))

    def node(self, i: int) -> BallNode:
        children = None if self._left[i] < 0 else (self._left[i], self._right[i])
        return BallNode(RadCoord(self._center_lat[i], self._center_lon[i]),
                        self._radius[i], self._start[i], self._end[i], children)

    def query_radius(self, center: RadCoord, radius_m: float, earth: EarthModel = EARTH) -> np.ndarray:
        """Sorted ordinals of all points within ``radius_m`` (inclusive) of ``center``"""
        if radius_m < 0:
            raise InvalidParameter(f"radius_m must be >= 0, got {radius_m}")
        r_query = earth.angle_of(radius_m)
        c_lat, c_lon = center.lat_rad, center.lon_rad
        c_cos = math.cos(c_lat)
        center_lat, center_lon, center_cos = self._center_lat, self._center_lon, self._center_cos
        radius, left, right = self._radius, self._left, self._right

        accepted: List[np.ndarray] = []
        candidates: List[np.ndarray] = []
        stack = [0]
        while stack:
            n = stack.pop()
            s_lat = math.sin((center_lat[n] - c_lat) / 2.0)
            s_lon = math.sin((center_lon[n] - c_lon) / 2.0)
            h = s_lat * s_lat + c_cos * center_cos[n] * s_lon * s_lon
            d = 2.0 * math.asin(math.sqrt(min(1.0, h)))
            if d > radius[n] + r_query + _SLACK_RAD:
                continue
            if d + radius[n] <= r_query - _SLACK_RAD:
                accepted.append(self.order[self._start[n]:self._end[n]])
            elif left[n] < 0:
                candidates.append(self.order[self._start[n]:self._end[n]])
            else:
                stack.append(right[n])
                stack.append(left[n])

        if candidates:
            pool = np.concatenate(candidates)
            accepted.append(pool[_within(self.lat_rad[pool], self.lon_rad[pool], center, radius_m, earth)])
        if not accepted:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(accepted))

    def audit(self) -> List[str]:
        """Check every structural invariant; returns the violations found"""
        problems = []
        if not np.array_equal(np.sort(self.order), np.arange(len(self.order))):
            problems.append("order is not a permutation of the corpus ordinals")
        if self._start[0] != 0 or self._end[0] != len(self.order):
            problems.append("root does not span all points")
        for i in range(self.node_count):
            node = self.node(i)
            members = self.order[node.start:node.end]
            if len(members) == 0:
                problems.append(f"node {i} is empty")
                continue
            angles = haversine_angles(self.lat_rad[members], self.lon_rad[members], node.center)
            if float(np.max(angles)) > node.radius_rad + _SLACK_RAD:
                problems.append(f"node {i} does not contain all members")
            if node.is_leaf:
                if node.end - node.start > self.leaf_size:
                    problems.append(f"leaf {i} holds {node.end - node.start} > {self.leaf_size} points")
            else:
                left, right = self.node(node.children[0]), self.node(node.children[1])
                if not (left.start == node.start and left.end == right.start and right.end == node.end):
                    problems.append(f"children of node {i} do not partition its span")
        return problems

    def stats(self) -> dict:
        leaves = [self._end[i] - self._start[i] for i in range(self.node_count) if self._left[i] < 0]
        occupancy = Counter(leaves)
        return {
            'n_points': len(self.order),
            'leaf_size': self.leaf_size,
            'node_count': self.node_count,
            'leaf_count': len(leaves),
            'depth': max(self._depth),
            'leaf_occupancy': {str(size): occupancy[size] for size in sorted(occupancy)},
        }


def build_index(corpus: PointCorpus, leaf_size: int = DEFAULTS['leaf_size']) -> SpatialIndex:
    """Build the ball tree over ``corpus`` in radian space.

    Raises:
        EmptyCorpus: corpus has no points
    """
    if len(corpus) == 0:
        raise EmptyCorpus("cannot index an empty corpus")
    index = SpatialIndex(corpus.lat_lon_radians(), leaf_size)
    logger.debug(f"Built ball tree: {index.node_count} nodes over {len(index)} points")
    return index


def query_radius(index: SpatialIndex, center: RadCoord, radius_m: float,
                 earth: EarthModel = EARTH) -> np.ndarray:
    return index.query_radius(center, radius_m, earth)


class BruteForceScan:
    """Linear-scan stand-in for ``SpatialIndex`` with the same query interface"""

    def __init__(self, points_rad: np.ndarray):
        points_rad = np.asarray(points_rad, dtype=float).reshape(-1, 2)
        self.lat_rad = np.ascontiguousarray(points_rad[:, 0])
        self.lon_rad = np.ascontiguousarray(points_rad[:, 1])

    def __len__(self) -> int:
        return len(self.lat_rad)

    def query_radius(self, center: RadCoord, radius_m: float, earth: EarthModel = EARTH) -> np.ndarray:
        if radius_m < 0:
            raise InvalidParameter(f"radius_m must be >= 0, got {radius_m}")
        return np.flatnonzero(_within(self.lat_rad, self.lon_rad, center, radius_m, earth))


def brute_force_radius(corpus: PointCorpus, center: RadCoord, radius_m: float,
                       earth: EarthModel = EARTH) -> np.ndarray:
    """Definitional answer: every corpus ordinal within ``radius_m`` of ``center``"""
    return BruteForceScan(corpus.lat_lon_radians()).query_radius(center, radius_m, earth)

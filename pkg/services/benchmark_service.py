"""Ball tree vs linear scan latency benchmark"""

import statistics as pystats
import time
from typing import List

import numpy as np

from core.geodesy import RadCoord
from core.ingestion import BoundingBox
from core.spatial_index import BruteForceScan, SpatialIndex
from utils.constants import DEFAULTS, WATERLOO_BBOX
from utils.errors import InvalidParameter
from utils.helpers import stopwatch
from utils.logger import setup_logger, log_stage

logger = setup_logger(__name__)


def _uniform_points(rng: np.random.Generator, bbox: BoundingBox, n: int) -> np.ndarray:
    lat = rng.uniform(bbox.min_lat, bbox.max_lat, n)
    lon = rng.uniform(bbox.min_lon, bbox.max_lon, n)
    return np.radians(np.column_stack([lat, lon]))


def _latency_summary(samples: List[float]) -> dict:
    return {
        'mean_s': pystats.fmean(samples),
        'median_s': pystats.median(samples),
        'max_s': max(samples),
    }


class BenchmarkService:
    """Times radius queries on a uniformly scattered corpus"""

    @staticmethod
    def run(n_points: int = 100_000, n_queries: int = 10_000, radius_m: float = DEFAULTS['radius_m'],
            bbox: BoundingBox = BoundingBox(*WATERLOO_BBOX), leaf_size: int = DEFAULTS['leaf_size'],
            seed: int = 0) -> dict:
        if n_points < 1 or n_queries < 1:
            raise InvalidParameter("n_points and n_queries must be >= 1")
        rng = np.random.default_rng(seed)
        points = _uniform_points(rng, bbox, n_points)
        centers = _uniform_points(rng, bbox, n_queries)

        with stopwatch() as timer:
            tree = SpatialIndex(points, leaf_size)
        build_s = timer['elapsed_s']
        log_stage(logger, 'bench-build', build_s, points=n_points, nodes=tree.node_count)
        scan = BruteForceScan(points)

        tree_times: List[float] = []
        scan_times: List[float] = []
        returned = 0
        mismatches = 0
        for lat, lon in centers:
            center = RadCoord(float(lat), float(lon))
            start = time.perf_counter()
            from_tree = tree.query_radius(center, radius_m)
            tree_times.append(time.perf_counter() - start)
            start = time.perf_counter()
            from_scan = scan.query_radius(center, radius_m)
            scan_times.append(time.perf_counter() - start)
            returned += len(from_tree)
            if not np.array_equal(from_tree, from_scan):
                mismatches += 1

        tree_summary = _latency_summary(tree_times)
        scan_summary = _latency_summary(scan_times)
        speedup = scan_summary['mean_s'] / tree_summary['mean_s'] if tree_summary['mean_s'] > 0 else float('inf')
        report = {
            'n_points': n_points,
            'n_queries': n_queries,
            'radius_m': radius_m,
            'leaf_size': leaf_size,
            'seed': seed,
            'bbox': list(bbox.as_tuple()),
            'build_s': build_s,
            'mean_fraction_returned': returned / (n_queries * n_points),
            'tree': tree_summary,
            'brute_force': scan_summary,
            'speedup_mean': speedup,
            'speedup_median': scan_summary['median_s'] / tree_summary['median_s'] if tree_summary['median_s'] > 0 else float('inf'),
            'mismatches': mismatches,
            'index_stats': tree.stats(),
        }
        logger.info(f"Benchmark: tree {tree_summary['mean_s'] * 1e6:.1f}us vs scan "
                    f"{scan_summary['mean_s'] * 1e6:.1f}us per query ({speedup:.1f}x), {mismatches} mismatches")
        return report

"""End-to-end visibility run: filter, interpolate, densify, index, count, aggregate.

Per-trip counting is a map over an immutable index; the reduction walks the
results in trip order, so the aggregate does not depend on the worker count.
"""

import multiprocessing
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from core.densification import PointCorpus, build_corpus
from core.ingestion import BoundingBox, filter_bbox, filter_trips, load_buildings, load_trajectories
from core.spatial_index import BruteForceScan, build_index
from core.trajectory import TripTrack, prepare_trips
from core.visibility import (AggregateVisibility, ViewParams, VisibilityTally, aggregate_trip,
                             trip_visibility)
from utils.constants import DEFAULTS
from utils.errors import InvalidParameter
from utils.helpers import stopwatch
from utils.logger import setup_logger, log_stage

logger = setup_logger(__name__)

_WORKER_STATE: dict = {}


@dataclass(frozen=True)
class RunParams:
    view: ViewParams = field(default_factory=ViewParams)
    spacing_m: float = DEFAULTS['spacing_m']
    precision: int = DEFAULTS['precision']
    leaf_size: int = DEFAULTS['leaf_size']
    bbox: Optional[BoundingBox] = None
    workers: int = DEFAULTS['workers']
    brute_force: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidParameter(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.precision <= 12:
            raise InvalidParameter(f"precision must be within [0, 12], got {self.precision}")

    def as_dict(self) -> dict:
        return {
            'radius_m': self.view.radius_m,
            'lead_m': self.view.lead_m,
            'interval_s': self.view.interval_s,
            'spacing_m': self.spacing_m,
            'precision': self.precision,
            'leaf_size': self.leaf_size,
            'bbox': None if self.bbox is None else list(self.bbox.as_tuple()),
            'brute_force': self.brute_force,
        }


@dataclass
class RunResult:
    aggregate: AggregateVisibility
    tally: VisibilityTally
    trips_loaded: int = 0
    trips_in_bbox: int = 0
    trips_dropped: int = 0
    footprints_loaded: int = 0
    footprints_in_bbox: int = 0
    skipped_geometries: int = 0
    corpus_size: int = 0
    index_stats: Optional[dict] = None
    timings_s: Dict[str, float] = field(default_factory=dict)
    per_trip: Dict[str, dict] = field(default_factory=dict)
    corpus: Optional[PointCorpus] = None

    def diagnostics(self) -> dict:
        return {
            'trips_loaded': self.trips_loaded,
            'trips_in_bbox': self.trips_in_bbox,
            'trips_dropped_too_short': self.trips_dropped,
            'footprints_loaded': self.footprints_loaded,
            'footprints_in_bbox': self.footprints_in_bbox,
            'skipped_geometries': self.skipped_geometries,
            'corpus_size': self.corpus_size,
            'aggregate_entries': len(self.aggregate),
            'visibility': self.tally.as_dict(),
        }


def _init_worker(index, corpus: PointCorpus, view: ViewParams, precision: int):
    _WORKER_STATE.update(index=index, corpus=corpus, view=view, precision=precision)


def _visibility_task(track: TripTrack) -> Tuple[str, AggregateVisibility, VisibilityTally]:
    state = _WORKER_STATE
    result = trip_visibility(track, state['index'], state['corpus'], state['view'])
    return track.trip_id, aggregate_trip(result, state['corpus'], state['precision']), result.tally


class PipelineService:
    """Runs the visibility pipeline over files on disk"""

    @staticmethod
    def count_visibility(tracks: List[TripTrack], index, corpus: PointCorpus, params: RunParams
                         ) -> List[Tuple[str, AggregateVisibility, VisibilityTally]]:
        """Map step, in trip order, over ``params.workers`` processes"""
        if params.workers == 1 or len(tracks) <= 1:
            _init_worker(index, corpus, params.view, params.precision)
            try:
                return [_visibility_task(track) for track in tracks]
            finally:
                _WORKER_STATE.clear()

        chunksize = max(1, len(tracks) // (params.workers * 4))
        with multiprocessing.Pool(processes=params.workers, initializer=_init_worker,
                                  initargs=(index, corpus, params.view, params.precision)) as pool:
            return list(pool.imap(_visibility_task, tracks, chunksize=chunksize))

    @staticmethod
    def run(trajectories: Union[str, Path], buildings: Union[str, Path], params: RunParams) -> RunResult:
        timings: Dict[str, float] = {}
        empty = AggregateVisibility(precision=params.precision)

        with stopwatch() as timer:
            trips = load_trajectories(trajectories)
            layer = load_buildings(buildings)
        timings['load'] = timer['elapsed_s']
        log_stage(logger, 'load', timer['elapsed_s'], trips=len(trips), footprints=len(layer.footprints))

        result = RunResult(empty, VisibilityTally(), trips_loaded=len(trips),
                           footprints_loaded=len(layer.footprints), skipped_geometries=layer.skipped,
                           timings_s=timings)

        with stopwatch() as timer:
            footprints = layer.footprints
            if params.bbox is not None:
                trips = filter_trips(trips, params.bbox)
                footprints = filter_bbox(footprints, params.bbox)
        timings['filter'] = timer['elapsed_s']
        result.trips_in_bbox, result.footprints_in_bbox = len(trips), len(footprints)

        if not trips or not footprints:
            logger.warning(f"Nothing to analyse after filtering ({len(trips)} trips, "
                           f"{len(footprints)} footprints); writing an empty aggregate")
            return result

        with stopwatch() as timer:
            tracks, result.trips_dropped = prepare_trips(trips, params.view.interval_s)
        timings['interpolate'] = timer['elapsed_s']
        log_stage(logger, 'interpolate', timer['elapsed_s'], tracks=len(tracks), dropped=result.trips_dropped)

        with stopwatch() as timer:
            corpus = build_corpus(footprints, params.spacing_m)
        timings['densify'] = timer['elapsed_s']
        result.corpus, result.corpus_size = corpus, len(corpus)
        log_stage(logger, 'densify', timer['elapsed_s'], points=len(corpus))

        with stopwatch() as timer:
            if params.brute_force:
                index = BruteForceScan(corpus.lat_lon_radians())
            else:
                index = build_index(corpus, params.leaf_size)
                result.index_stats = index.stats()
        timings['index'] = timer['elapsed_s']
        log_stage(logger, 'index', timer['elapsed_s'], brute_force=params.brute_force)

        with stopwatch() as timer:
            mapped = PipelineService.count_visibility(tracks, index, corpus, params)
            result.aggregate = reduce(AggregateVisibility.merge, (agg for _, agg, _ in mapped), empty)
            result.tally = reduce(lambda acc, item: acc + item[2], mapped, VisibilityTally())
            result.per_trip = {trip_id: tally.as_dict() for trip_id, _, tally in mapped}
        timings['visibility'] = timer['elapsed_s']
        log_stage(logger, 'visibility', timer['elapsed_s'], workers=params.workers,
                  circles=result.tally.circles_queried, entries=len(result.aggregate))

        if result.tally.invalid_bearings or result.tally.invalid_centers:
            logger.info(f"Skipped {result.tally.invalid_bearings} points without bearing and "
                        f"{result.tally.invalid_centers} invalid circle centers")
        return result

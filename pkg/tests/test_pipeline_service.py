import pytest

from core.densification import build_corpus
from core.geodesy import to_radians
from core.ingestion import BoundingBox, load_buildings, load_trajectories
from core.spatial_index import BruteForceScan, brute_force_radius, build_index
from core.statistics import fit_all, rank_fits
from core.synthetic import SynthConfig, write_inputs
from core.trajectory import prepare_trips
from core.visibility import ViewParams, trip_visibility, viewing_center
from services.export_service import ExportService
from services.pipeline_service import PipelineService, RunParams
from utils.errors import InvalidParameter


def _run(inputs, **kwargs):
    trajectories, buildings = inputs
    return PipelineService.run(trajectories, buildings, RunParams(**kwargs))


def test_end_to_end_counts_are_conserved(synthetic_inputs):
    result = _run(synthetic_inputs)
    assert len(result.aggregate) > 0
    assert result.aggregate.grand_total() == result.tally.hits
    assert result.tally.hits == sum(t['hits'] for t in result.per_trip.values())
    assert result.trips_loaded == 6
    assert result.corpus_size == len(result.corpus)
    assert result.index_stats['n_points'] == result.corpus_size
    assert set(result.timings_s) == {'load', 'filter', 'interpolate', 'densify', 'index', 'visibility'}


def test_tree_matches_brute_force(synthetic_inputs):
    tree = _run(synthetic_inputs)
    scan = _run(synthetic_inputs, brute_force=True)
    assert tree.aggregate.entries == scan.aggregate.entries
    assert scan.index_stats is None


def test_worker_count_does_not_change_output(synthetic_inputs, tmp_path):
    one = _run(synthetic_inputs, workers=1)
    three = _run(synthetic_inputs, workers=3)
    a = ExportService.write_aggregate_csv(tmp_path / 'one.csv', one.aggregate)
    b = ExportService.write_aggregate_csv(tmp_path / 'three.csv', three.aggregate)
    assert a.read_bytes() == b.read_bytes()
    assert one.per_trip == three.per_trip


def test_every_aggregate_entry_is_a_corpus_point(synthetic_inputs):
    result = _run(synthetic_inputs, precision=7)
    corpus_keys = {(round(p.coord.lat_deg, 7), round(p.coord.lon_deg, 7)) for p in result.corpus.points}
    assert set(result.aggregate.entries) <= corpus_keys


def test_larger_radius_sees_at_least_as_much(synthetic_inputs):
    small = _run(synthetic_inputs, view=ViewParams(radius_m=30.0))
    large = _run(synthetic_inputs, view=ViewParams(radius_m=60.0))
    assert set(small.aggregate.entries) <= set(large.aggregate.entries)
    for key, entry in small.aggregate.entries.items():
        assert entry.total_count <= large.aggregate.entries[key].total_count


def test_bbox_excluding_everything_gives_empty_aggregate(synthetic_inputs):
    result = _run(synthetic_inputs, bbox=BoundingBox(0.0, 0.0, 1.0, 1.0))
    assert len(result.aggregate) == 0
    assert result.trips_in_bbox == 0
    assert result.corpus is None


def test_short_trips_are_dropped(tmp_path, synthetic_inputs):
    _, buildings = synthetic_inputs
    trajectories = tmp_path / 'short.csv'
    trajectories.write_text('trip_id,t,lat,lon\nA,0,-33.902,151.203\nA,2,-33.90201,151.203\n')
    result = PipelineService.run(trajectories, buildings, RunParams())
    assert result.trips_dropped == 1
    assert len(result.aggregate) == 0


def test_params_validated():
    with pytest.raises(InvalidParameter):
        RunParams(workers=0)
    with pytest.raises(InvalidParameter):
        RunParams(precision=20)


def test_hundred_synthetic_trips_tree_equals_scan(tmp_path):
    trajectories, buildings = write_inputs(SynthConfig(seed=42, n_trips=100, n_buildings=40, trip_duration_s=60.0),
                                           tmp_path)
    tracks, _ = prepare_trips(load_trajectories(trajectories))
    corpus = build_corpus(load_buildings(buildings).footprints)
    tree, scan = build_index(corpus), BruteForceScan(corpus.lat_lon_radians())
    view = ViewParams()
    assert len(tracks) == 100
    for track in tracks:
        assert trip_visibility(track, tree, corpus, view).counts == trip_visibility(track, scan, corpus, view).counts


class TestSeed42Scene:
    def test_totals_equal_summed_circle_cardinalities(self, seed42_inputs, seed42_run):
        trajectories, buildings = seed42_inputs
        view = ViewParams()
        tracks, _ = prepare_trips(load_trajectories(trajectories), view.interval_s)
        corpus = build_corpus(load_buildings(buildings).footprints)
        cardinalities = sum(len(brute_force_radius(corpus, to_radians(viewing_center(p, view)), view.radius_m))
                            for track in tracks for p in track.points if p.has_bearing)
        assert cardinalities > 0
        assert seed42_run.aggregate.grand_total() == cardinalities
        assert seed42_run.tally.hits == cardinalities

    def test_lognormal_beats_normal(self, seed42_run):
        results, failures = fit_all(seed42_run.aggregate.totals(), ['LogNormal', 'Normal'])
        assert failures == {}
        lognormal, normal = sorted(results, key=lambda r: r.family != 'LogNormal')
        assert lognormal.ks_D < normal.ks_D
        assert [r.family for r in rank_fits(results)] == ['LogNormal', 'Normal']

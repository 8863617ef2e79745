import json
from pathlib import Path

import httpx
import pytest

import cli.commands as commands
from main import main
from services.overpass_service import OverpassService
from utils.constants import EXIT_INPUT_ERROR, EXIT_OK

GOLDEN_AGGREGATE = Path(__file__).parent / 'data' / 'seed42_aggregate.csv'


@pytest.fixture
def cli(config_path):
    def invoke(*argv):
        return main(['--config', str(config_path), *map(str, argv)])
    return invoke


@pytest.fixture
def run_outputs(cli, synthetic_inputs, tmp_path):
    trajectories, buildings = synthetic_inputs
    out_dir = tmp_path / 'out'
    assert cli('run', '--trajectories', trajectories, '--buildings', buildings, '--out-dir', out_dir) == EXIT_OK
    return out_dir


def _manifest(directory):
    return json.loads((directory / 'manifest.json').read_text())['commands']


class TestRun:
    def test_writes_aggregate_and_manifest(self, run_outputs, synthetic_inputs):
        lines = (run_outputs / 'aggregate.csv').read_text().splitlines()
        assert lines[0] == 'lat,lon,total_count'
        assert len(lines) > 1
        entry = _manifest(run_outputs)['run']
        assert entry['parameters']['radius_m'] == 50.0
        assert [i['path'] for i in entry['inputs']] == [str(p) for p in synthetic_inputs]
        assert all(len(i['sha256']) == 64 for i in entry['inputs'])
        assert entry['diagnostics']['trips_loaded'] == 6

    def test_workers_and_brute_force_are_byte_identical(self, cli, synthetic_inputs, tmp_path, run_outputs):
        trajectories, buildings = synthetic_inputs
        base = ['run', '--trajectories', trajectories, '--buildings', buildings]
        assert cli(*base, '--out-dir', tmp_path / 'w2', '--workers', 2) == EXIT_OK
        assert cli(*base, '--out-dir', tmp_path / 'bf', '--brute-force') == EXIT_OK
        expected = (run_outputs / 'aggregate.csv').read_bytes()
        assert (tmp_path / 'w2' / 'aggregate.csv').read_bytes() == expected
        assert (tmp_path / 'bf' / 'aggregate.csv').read_bytes() == expected

    def test_dump_corpus(self, cli, synthetic_inputs, tmp_path):
        trajectories, buildings = synthetic_inputs
        assert cli('run', '--trajectories', trajectories, '--buildings', buildings,
                   '--out-dir', tmp_path / 'c', '--dump-corpus') == EXIT_OK
        assert (tmp_path / 'c' / 'corpus.csv').exists()

    def test_empty_trajectory_file(self, cli, synthetic_inputs, tmp_path):
        _, buildings = synthetic_inputs
        empty = tmp_path / 'empty.csv'
        empty.write_text('')
        assert cli('run', '--trajectories', empty, '--buildings', buildings, '--out-dir', tmp_path / 'e') == EXIT_INPUT_ERROR

    def test_missing_file(self, cli, synthetic_inputs, tmp_path):
        trajectories, _ = synthetic_inputs
        assert cli('run', '--trajectories', trajectories, '--buildings', tmp_path / 'nope.geojson',
                   '--out-dir', tmp_path / 'm') == EXIT_INPUT_ERROR

    def test_invalid_radius(self, cli, synthetic_inputs, tmp_path):
        trajectories, buildings = synthetic_inputs
        assert cli('run', '--trajectories', trajectories, '--buildings', buildings,
                   '--out-dir', tmp_path / 'r', '--radius', -5) == EXIT_INPUT_ERROR

    def test_bbox_excluding_all_data(self, cli, synthetic_inputs, tmp_path):
        trajectories, buildings = synthetic_inputs
        out_dir = tmp_path / 'x'
        assert cli('run', '--trajectories', trajectories, '--buildings', buildings,
                   '--out-dir', out_dir, '--bbox', '0,0,1,1') == EXIT_OK
        assert (out_dir / 'aggregate.csv').read_text() == 'lat,lon,total_count\n'

    def test_config_file_supplies_defaults(self, cli, config_path, synthetic_inputs, tmp_path, run_outputs):
        config_path.write_text('[view]\nradius_m = 20\n')
        trajectories, buildings = synthetic_inputs
        assert cli('run', '--trajectories', trajectories, '--buildings', buildings,
                   '--out-dir', tmp_path / 'cfg') == EXIT_OK
        assert _manifest(tmp_path / 'cfg')['run']['parameters']['radius_m'] == 20.0


class TestSeed42Run:
    def test_worker_counts_brute_force_and_golden_agree(self, cli, seed42_inputs, tmp_path, request):
        trajectories, buildings = seed42_inputs
        base = ['run', '--trajectories', trajectories, '--buildings', buildings]
        assert cli(*base, '--out-dir', tmp_path / 'w1', '--workers', 1) == EXIT_OK
        assert cli(*base, '--out-dir', tmp_path / 'w8', '--workers', 8) == EXIT_OK
        assert cli(*base, '--out-dir', tmp_path / 'bf', '--brute-force') == EXIT_OK
        produced = (tmp_path / 'w1' / 'aggregate.csv').read_bytes()
        assert produced.count(b'\n') > 1
        assert (tmp_path / 'w8' / 'aggregate.csv').read_bytes() == produced
        assert (tmp_path / 'bf' / 'aggregate.csv').read_bytes() == produced

        if request.config.getoption('--update-golden'):
            GOLDEN_AGGREGATE.parent.mkdir(parents=True, exist_ok=True)
            GOLDEN_AGGREGATE.write_bytes(produced)
        if not GOLDEN_AGGREGATE.exists():
            pytest.skip(f"{GOLDEN_AGGREGATE} missing; create it with pytest --update-golden")
        assert produced == GOLDEN_AGGREGATE.read_bytes()


class TestAnalysis:
    def test_fit(self, cli, run_outputs):
        out = run_outputs / 'fit_report.json'
        assert cli('fit', '--aggregate', run_outputs / 'aggregate.csv', '--out', out,
                   '--families', 'LogNormal,Normal,Exponential') == EXIT_OK
        report = json.loads(out.read_text())
        assert set(report['ranking']) | set(report['failures']) == {'LogNormal', 'Normal', 'Exponential'}
        assert 'fit' in _manifest(run_outputs)

    def test_fit_unknown_family(self, cli, run_outputs):
        assert cli('fit', '--aggregate', run_outputs / 'aggregate.csv', '--families', 'Cauchy',
                   '--out', run_outputs / 'f.json') == EXIT_INPUT_ERROR

    def test_hotspots(self, cli, run_outputs):
        out = run_outputs / 'hotspots.geojson'
        assert cli('hotspots', '--aggregate', run_outputs / 'aggregate.csv', '--out', out) == EXIT_OK
        features = json.loads(out.read_text())['features']
        rows = (run_outputs / 'aggregate.csv').read_text().splitlines()[1:]
        assert len(features) == len(rows)
        assert {f['properties']['quantile_group'] for f in features} <= {'Bottom90', 'Q90_95', 'Q95_99', 'Top1'}
        shares = _manifest(run_outputs)['hotspots']['diagnostics']['shares']
        assert sum(shares.values()) == pytest.approx(1.0)

    def test_stats(self, cli, run_outputs, capsys):
        out = run_outputs / 'histogram.csv'
        assert cli('stats', '--aggregate', run_outputs / 'aggregate.csv', '--bins', 5, '--out', out) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == 'bin_low,bin_high,count'
        assert len(lines) == 6
        total_rows = len((run_outputs / 'aggregate.csv').read_text().splitlines()) - 1
        assert sum(int(line.split(',')[2]) for line in lines[1:]) == total_rows
        assert 'top 10%' in capsys.readouterr().out

    def test_trip_geojson(self, cli, synthetic_inputs, tmp_path):
        trajectories, _ = synthetic_inputs
        out = tmp_path / 'trip.geojson'
        assert cli('trip-geojson', '--trajectories', trajectories, '--trip-id', 'trip-0000', '--out', out) == EXIT_OK
        features = json.loads(out.read_text())['features']
        assert features[0]['geometry']['type'] == 'LineString'
        assert len(features) > 1

    def test_trip_geojson_unknown_trip(self, cli, synthetic_inputs, tmp_path):
        trajectories, _ = synthetic_inputs
        assert cli('trip-geojson', '--trajectories', trajectories, '--trip-id', 'nope',
                   '--out', tmp_path / 't.geojson') == EXIT_INPUT_ERROR


class TestTools:
    def test_synth(self, cli, tmp_path):
        out_dir = tmp_path / 'synth'
        assert cli('synth', '--out-dir', out_dir, '--seed', 3, '--trips', 2, '--buildings', 10) == EXIT_OK
        assert (out_dir / 'trajectories.csv').exists()
        assert (out_dir / 'buildings.geojson').exists()
        assert _manifest(out_dir)['synth']['parameters']['seed'] == 3

    def test_synth_overcrowded(self, cli, tmp_path):
        assert cli('synth', '--out-dir', tmp_path / 's', '--buildings', 5000) == EXIT_INPUT_ERROR

    def test_bench(self, cli, tmp_path):
        out = tmp_path / 'bench.json'
        assert cli('bench', '--points', 2000, '--queries', 50, '--out', out) == EXIT_OK
        report = json.loads(out.read_text())
        assert report['mismatches'] == 0
        assert report['n_points'] == 2000

    def test_fetch(self, cli, tmp_path, monkeypatch):
        way = {'type': 'way', 'id': 1, 'geometry': [{'lat': -33.9, 'lon': 151.2}, {'lat': -33.9, 'lon': 151.2001},
                                                    {'lat': -33.9001, 'lon': 151.2001}]}
        client = httpx.Client(transport=httpx.MockTransport(lambda request: httpx.Response(200, json={'elements': [way]})))
        monkeypatch.setattr(commands, 'OverpassService',
                            lambda endpoint, **kwargs: OverpassService(endpoint, client=client, **kwargs))
        out = tmp_path / 'buildings.geojson'
        assert cli('fetch', '--bbox', 'waterloo', '--endpoint', 'https://overpass.test/api/interpreter',
                   '--cache-dir', tmp_path / 'cache', '--out', out) == EXIT_OK
        assert len(json.loads(out.read_text())['features']) == 1
        assert _manifest(tmp_path)['fetch']['diagnostics']['usable_footprints'] == 1
        assert client.is_closed


@pytest.mark.slow
def test_bench_at_full_scale(tmp_path):
    from services.benchmark_service import BenchmarkService
    report = BenchmarkService.run(n_points=100_000, n_queries=2_000)
    assert report['mismatches'] == 0
    assert report['speedup_mean'] >= 10.0

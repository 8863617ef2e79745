import json

import pytest

from cli.manifest import RunManifest
from config.config_manager import ConfigManager
from utils.constants import OVERPASS_DEFAULT_ENDPOINT, OVERPASS_ENV_VAR
from utils.helpers import file_digest, format_coord, stopwatch, write_json
from utils.validators import Validators


class TestConfigManager:
    def test_creates_default_file(self, config_path):
        config = ConfigManager(config_path)
        assert config_path.exists()
        assert config.get_float('view', 'radius_m', 0.0) == 50.0
        assert config.get_int('index', 'leaf_size', 0) == 32

    def test_bad_number_falls_back(self, config_path):
        config_path.write_text('[view]\nradius_m = wide\n')
        assert ConfigManager(config_path).get_float('view', 'radius_m', 50.0) == 50.0

    def test_set_persists(self, config_path):
        ConfigManager(config_path).set('run', 'workers', '4')
        assert ConfigManager(config_path).get_int('run', 'workers', 1) == 4

    def test_endpoint_precedence(self, config_path, monkeypatch):
        config = ConfigManager(config_path)
        monkeypatch.delenv(OVERPASS_ENV_VAR, raising=False)
        assert config.overpass_endpoint() == OVERPASS_DEFAULT_ENDPOINT
        monkeypatch.setenv(OVERPASS_ENV_VAR, 'https://env.test/api')
        assert config.overpass_endpoint() == 'https://env.test/api'
        assert config.overpass_endpoint('https://flag.test/api') == 'https://flag.test/api'


class TestManifest:
    def test_entries_merge_by_command(self, tmp_path):
        data = tmp_path / 'in.txt'
        data.write_text('abc')
        first = RunManifest('run')
        first.add_inputs([data])
        first.parameters = {'radius_m': 50.0}
        first.write(tmp_path)
        second = RunManifest('fit')
        second.add_outputs([tmp_path / 'fit.json'])
        second.write(tmp_path)

        document = json.loads((tmp_path / 'manifest.json').read_text())
        assert set(document['commands']) == {'run', 'fit'}
        run = document['commands']['run']
        assert run['inputs'] == [{'path': str(data), 'sha256': file_digest(data)}]
        assert run['tool']['name'] == 'vehicle-visibility'
        assert 'finished_at' in run['timing']

    def test_corrupt_manifest_replaced(self, tmp_path):
        (tmp_path / 'manifest.json').write_text('{not json')
        RunManifest('synth').write(tmp_path)
        assert list(json.loads((tmp_path / 'manifest.json').read_text())['commands']) == ['synth']


class TestHelpers:
    @pytest.mark.parametrize('value, decimals, expected', [
        (-33.9, 6, '-33.900000'),
        (-0.0000001, 6, '0.000000'),
        (151.2000004, 6, '151.200000'),
        (0.5, 0, '0'),
    ])
    def test_format_coord(self, value, decimals, expected):
        assert format_coord(value, decimals) == expected

    def test_stopwatch(self):
        with stopwatch() as timer:
            sum(range(1000))
        assert timer['elapsed_s'] >= 0.0

    def test_write_json_is_sorted(self, tmp_path):
        path = write_json(tmp_path / 'nested' / 'x.json', {'b': 1, 'a': 2})
        assert path.read_text().index('"a"') < path.read_text().index('"b"')


class TestValidators:
    def test_urls(self):
        assert Validators.validate_url('https://overpass-api.de/api/interpreter')
        assert not Validators.validate_url('overpass-api.de')
        assert not Validators.validate_url('file:///etc/passwd')

    def test_coordinates(self):
        assert Validators.validate_latitude(-90.0)
        assert not Validators.validate_latitude(float('inf'))
        assert not Validators.validate_longitude(180.5)

    def test_bbox_ordering(self):
        assert Validators.validate_bbox(0, 0, 1, 1)
        assert not Validators.validate_bbox(1, 0, 0, 1)

    def test_trip_ids(self):
        assert Validators.validate_trip_id('trip-0001')
        assert not Validators.validate_trip_id('a,b')
        assert not Validators.validate_trip_id('')

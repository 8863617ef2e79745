"""Shared pytest fixtures"""

import os
import tempfile
from pathlib import Path

# loggers are created at import time, so point them away from the working tree first
os.environ.setdefault('VEHICLE_VIS_LOG_DIR', str(Path(tempfile.gettempdir()) / 'vehicle_visibility_test_logs'))

import numpy as np
import pytest

from core.geodesy import GeoCoord, destination_point
from core.ingestion import BoundingBox
from core.synthetic import SynthConfig, write_inputs
from services.pipeline_service import PipelineService, RunParams


def pytest_addoption(parser):
    parser.addoption('--update-golden', action='store_true', default=False,
                     help='rewrite tests/data golden files after their brute-force audit passes')


@pytest.fixture
def rng():
    return np.random.default_rng(20240301)


@pytest.fixture
def config_path(tmp_path) -> Path:
    return tmp_path / 'config.ini'


@pytest.fixture
def small_synth_config() -> SynthConfig:
    return SynthConfig(seed=7, bbox=BoundingBox(151.200, -33.905, 151.206, -33.900),
                       n_trips=6, n_buildings=25, trip_duration_s=120.0)


@pytest.fixture
def synthetic_inputs(tmp_path, small_synth_config):
    """(trajectories.csv, buildings.geojson) written under tmp_path/inputs"""
    return write_inputs(small_synth_config, tmp_path / 'inputs')


@pytest.fixture(scope='session')
def seed42_inputs(tmp_path_factory):
    """Default-config synthetic scene (seed 42)"""
    return write_inputs(SynthConfig(), tmp_path_factory.mktemp('seed42'))


@pytest.fixture(scope='session')
def seed42_run(seed42_inputs):
    trajectories, buildings = seed42_inputs
    return PipelineService.run(trajectories, buildings, RunParams())


def square_ring(corner: GeoCoord, side_m: float):
    """Closed ring: corner, then east, north-east, north of it"""
    east = destination_point(corner, 90.0, side_m)
    north = destination_point(corner, 0.0, side_m)
    north_east = destination_point(east, 0.0, side_m)
    return (corner, east, north_east, north, corner)


@pytest.fixture
def make_square():
    return square_ring

import math

import numpy as np
import pytest

from core.geodesy import (EARTH, EarthModel, GeoCoord, RadCoord, destination_point, from_radians,
                          haversine_angles, haversine_distance, initial_bearing, normalize_longitude,
                          to_radians)
from utils.errors import IdenticalPoints, InvalidParameter, InvalidResult


class TestConversions:
    def test_origin_is_identity(self):
        assert to_radians(GeoCoord(0.0, 0.0)) == RadCoord(0.0, 0.0)

    def test_boundary(self):
        r = to_radians(GeoCoord(90.0, 180.0))
        assert r.lat_rad == pytest.approx(math.pi / 2)
        assert r.lon_rad == pytest.approx(math.pi)

    def test_sydney(self):
        r = to_radians(GeoCoord(-33.9, 151.2))
        assert r.lat_rad == pytest.approx(-0.5916666164, abs=1e-9)
        assert r.lon_rad == pytest.approx(2.6389378290, abs=1e-9)

    def test_back_and_forth(self):
        c = GeoCoord(-33.91441, 151.18943)
        back = from_radians(to_radians(c))
        assert back.lat_deg == pytest.approx(c.lat_deg, abs=1e-12)
        assert back.lon_deg == pytest.approx(c.lon_deg, abs=1e-12)

    def test_validity(self):
        assert GeoCoord(90.0, -180.0).is_valid()
        assert not GeoCoord(90.5, 0.0).is_valid()
        assert not GeoCoord(0.0, 181.0).is_valid()


class TestHaversine:
    def test_identical_points(self):
        assert haversine_distance(GeoCoord(0, 0), GeoCoord(0, 0)) == 0.0

    def test_one_degree_along_equator(self):
        assert haversine_distance(GeoCoord(0, 0), GeoCoord(0, 1)) == pytest.approx(111194.93, abs=0.01)

    def test_quarter_of_equator(self):
        assert haversine_distance(GeoCoord(0, 0), GeoCoord(0, 90)) == pytest.approx(10007543.4, abs=0.1)

    def test_antipodes_do_not_overflow(self):
        d = haversine_distance(GeoCoord(0, 0), GeoCoord(0, 180))
        assert d == pytest.approx(math.pi * EARTH.radius_m)

    def test_symmetry_and_triangle_inequality(self, rng):
        for _ in range(200):
            a, b, c = (GeoCoord(rng.uniform(-80, 80), rng.uniform(-180, 180)) for _ in range(3))
            ab, ba = haversine_distance(a, b), haversine_distance(b, a)
            assert ab == pytest.approx(ba, rel=1e-12, abs=1e-9)
            assert haversine_distance(a, c) <= ab + haversine_distance(b, c) + 1e-6

    def test_vectorized_matches_scalar(self, rng):
        center = GeoCoord(-33.9, 151.2)
        lats = rng.uniform(-33.95, -33.85, 50)
        lons = rng.uniform(151.15, 151.25, 50)
        angles = haversine_angles(np.radians(lats), np.radians(lons), to_radians(center))
        for lat, lon, angle in zip(lats, lons, angles):
            expected = haversine_distance(center, GeoCoord(lat, lon))
            assert EARTH.radius_m * angle == pytest.approx(expected, rel=1e-12, abs=1e-9)

    def test_custom_radius(self):
        unit = EarthModel(1.0)
        assert haversine_distance(GeoCoord(0, 0), GeoCoord(0, 90), unit) == pytest.approx(math.pi / 2)

    def test_non_positive_radius_rejected(self):
        with pytest.raises(InvalidParameter):
            EarthModel(0.0)


class TestBearing:
    def test_due_north(self):
        assert initial_bearing(GeoCoord(0, 0), GeoCoord(1, 0)) == pytest.approx(0.0, abs=1e-12)

    def test_due_east(self):
        assert initial_bearing(GeoCoord(0, 0), GeoCoord(0, 1)) == pytest.approx(90.0)

    def test_diagonal(self):
        assert initial_bearing(GeoCoord(0, 0), GeoCoord(1, 1)) == pytest.approx(44.9956, abs=1e-4)

    def test_due_south_and_west(self):
        assert initial_bearing(GeoCoord(1, 0), GeoCoord(0, 0)) == pytest.approx(180.0)
        assert initial_bearing(GeoCoord(0, 1), GeoCoord(0, 0)) == pytest.approx(270.0)

    def test_identical_points_raise(self):
        with pytest.raises(IdenticalPoints):
            initial_bearing(GeoCoord(10, 10), GeoCoord(10, 10))

    def test_range(self, rng):
        for _ in range(500):
            a = GeoCoord(rng.uniform(-89, 89), rng.uniform(-180, 180))
            b = GeoCoord(rng.uniform(-89, 89), rng.uniform(-180, 180))
            assert 0.0 <= initial_bearing(a, b) < 360.0


class TestDestination:
    def test_zero_distance(self):
        assert destination_point(GeoCoord(0, 0), 123.0, 0.0) == GeoCoord(0, 0)

    def test_one_degree_north(self):
        c = destination_point(GeoCoord(0, 0), 0.0, 111194.93)
        assert c.lat_deg == pytest.approx(1.0, abs=1e-6)
        assert c.lon_deg == pytest.approx(0.0, abs=1e-12)

    def test_fifty_meters_east(self):
        c = destination_point(GeoCoord(0, 0), 90.0, 50.0)
        assert c.lat_deg == pytest.approx(0.0, abs=1e-12)
        assert c.lon_deg == pytest.approx(0.000449661, abs=1e-9)

    def test_longitude_wraps(self):
        c = destination_point(GeoCoord(0, 179.9999), 90.0, 50.0)
        assert -180.0 <= c.lon_deg <= 180.0
        assert c.lon_deg < 0

    def test_nan_input_raises(self):
        with pytest.raises(InvalidResult):
            destination_point(GeoCoord(float('nan'), 0.0), 0.0, 10.0)

    def test_round_trip(self, rng):
        for _ in range(10_000):
            a = GeoCoord(rng.uniform(-80, 80), rng.uniform(-180, 180))
            bearing = rng.uniform(0, 360)
            distance = 10_000.0 * (1.0 - rng.random())
            b = destination_point(a, bearing, distance)
            # below a metre the float64 coordinates themselves limit the relative error
            assert haversine_distance(a, b) == pytest.approx(distance, rel=1e-9, abs=1e-7)
            again = destination_point(a, initial_bearing(a, b), haversine_distance(a, b))
            assert haversine_distance(again, b) < 1e-6

    def test_normalize_longitude(self):
        assert normalize_longitude(190.0) == pytest.approx(-170.0)
        assert normalize_longitude(-190.0) == pytest.approx(170.0)
        assert normalize_longitude(180.0) == 180.0
        assert normalize_longitude(-180.0) == -180.0

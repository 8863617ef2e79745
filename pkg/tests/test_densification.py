import pytest

from core.densification import PointId, build_corpus, densify_ring, edge_steps, write_corpus_csv
from core.geodesy import GeoCoord, destination_point, haversine_distance
from core.ingestion import BuildingFootprint
from utils.errors import EmptyCorpus, InvalidParameter


class TestDensifyRing:
    def test_ten_metre_square_gives_corners(self, make_square):
        ring = make_square(GeoCoord(0.0, 0.0), 10.0)
        points = densify_ring(ring, 10.0, 'sq')
        assert len(points) == 4
        assert [p.coord for p in points] == list(ring[:4])
        assert [p.point_id.edge_idx for p in points] == [0, 1, 2, 3]

    def test_twenty_five_metre_edge(self):
        start = GeoCoord(0.0, 0.0)
        end = destination_point(start, 90.0, 25.0)
        ring = (start, end, start, start)
        points = [p for p in densify_ring(ring, 10.0, 'e') if p.point_id.edge_idx == 0]
        assert len(points) == 3
        assert [p.offset_m for p in points] == pytest.approx([0.0, 25 / 3, 50 / 3])
        coords = [p.coord for p in points] + [end]
        gaps = [haversine_distance(a, b) for a, b in zip(coords, coords[1:])]
        assert max(gaps) <= 10.0
        assert gaps == pytest.approx([25 / 3] * 3, rel=1e-7)

    def test_zero_length_edge_skipped(self, make_square):
        a, b, c, d, _ = make_square(GeoCoord(10.0, 10.0), 20.0)
        ring = (a, b, b, c, d, a)
        points = densify_ring(ring, 10.0, 'z')
        assert 1 not in {p.point_id.edge_idx for p in points}
        assert len(points) == 8

    def test_vertices_present_and_gaps_bounded(self, rng):
        for _ in range(500):
            center = GeoCoord(rng.uniform(-60, 60), rng.uniform(-170, 170))
            vertices = [destination_point(center, bearing, rng.uniform(5, 80))
                        for bearing in sorted(rng.uniform(0, 360, int(rng.integers(3, 9))))]
            ring = tuple(vertices + [vertices[0]])
            points = densify_ring(ring, 10.0, 'poly')
            coords = [p.coord for p in points]
            for vertex in vertices:
                assert vertex in coords
            for edge_idx in range(len(vertices)):
                edge = [p.coord for p in points if p.point_id.edge_idx == edge_idx] + [ring[edge_idx + 1]]
                for a, b in zip(edge, edge[1:]):
                    assert haversine_distance(a, b) <= 10.0 + 1e-6

    def test_ids_are_unique(self, make_square):
        points = densify_ring(make_square(GeoCoord(45.0, 7.0), 33.0), 4.0, 'u', ring_idx=2)
        ids = [p.point_id for p in points]
        assert len(set(ids)) == len(ids)
        assert all(pid.ring_idx == 2 for pid in ids)

    def test_open_ring_rejected(self):
        with pytest.raises(InvalidParameter):
            densify_ring((GeoCoord(0, 0), GeoCoord(0, 1e-4), GeoCoord(1e-4, 1e-4), GeoCoord(1e-4, 0)), 10.0)

    def test_bad_spacing(self, make_square):
        with pytest.raises(InvalidParameter):
            densify_ring(make_square(GeoCoord(0, 0), 10.0), 0.0)

    def test_edge_steps(self):
        assert edge_steps(10.0, 10.0) == 1
        assert edge_steps(10.000000001, 10.0) == 1
        assert edge_steps(10.1, 10.0) == 2
        assert edge_steps(3.0, 10.0) == 1

    @pytest.mark.parametrize('spacing', [10.0, 1_000.0, 10_000.0])
    def test_steps_never_exceed_spacing(self, spacing):
        for length in (2 * spacing + 1e-5, 2 * spacing + 1e-7, 7.3 * spacing, spacing - 1e-3):
            n = edge_steps(length, spacing)
            assert length / n <= spacing + 1e-6
        assert edge_steps(20_000.00001, 10_000.0) == 3


class TestCorpus:
    def test_single_square(self, make_square):
        corpus = build_corpus([BuildingFootprint('a', (make_square(GeoCoord(0, 0), 10.0),))], 10.0)
        assert len(corpus) == 4
        assert [corpus.ordinal_of[pid] for pid in corpus.id_of] == [0, 1, 2, 3]
        assert corpus.id_of[0] == PointId('a', 0, 0, 0)

    def test_identical_buildings_keep_distinct_ids(self, make_square):
        ring = make_square(GeoCoord(0, 0), 10.0)
        corpus = build_corpus([BuildingFootprint('a', (ring,)), BuildingFootprint('b', (ring,))], 10.0)
        assert len(corpus) == 8
        assert len(set(corpus.id_of)) == 8
        assert {pid.building_id for pid in corpus.id_of} == {'a', 'b'}

    def test_radians_array(self, make_square):
        corpus = build_corpus([BuildingFootprint('a', (make_square(GeoCoord(0, 0), 10.0),))], 10.0)
        assert corpus.lat_lon_radians().shape == (4, 2)

    def test_empty(self):
        with pytest.raises(EmptyCorpus):
            build_corpus([], 10.0)

    def test_corpus_csv(self, tmp_path, make_square):
        corpus = build_corpus([BuildingFootprint('a', (make_square(GeoCoord(0, 0), 10.0),))], 10.0)
        lines = write_corpus_csv(tmp_path / 'corpus.csv', corpus).read_text().splitlines()
        assert lines[0] == 'building_id,ring_idx,edge_idx,step_idx,lat,lon'
        assert len(lines) == 5
        assert lines[1].startswith('a,0,0,0,')

"""Readers and writers for pipeline artifacts: aggregate CSV, histogram CSV, GeoJSON layers"""

import csv
import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from core.geodesy import GeoCoord
from core.statistics import QuantileClassification
from core.visibility import AggregateEntry, AggregateVisibility, point_key
from utils.errors import EmptyInput, ParseError
from utils.helpers import format_coord
from utils.logger import setup_logger
from utils.validators import Validators

logger = setup_logger(__name__)

AGGREGATE_HEADER = ['lat', 'lon', 'total_count']
HISTOGRAM_HEADER = ['bin_low', 'bin_high', 'count']


class ExportService:
    """Serializes analysis outputs in canonical (sorted) order"""

    @staticmethod
    def write_aggregate_csv(path: Union[str, Path], agg: AggregateVisibility) -> Path:
        """``lat,lon,total_count`` rows sorted by rounded key"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(AGGREGATE_HEADER)
            for lat, lon in sorted(agg.entries):
                entry = agg.entries[(lat, lon)]
                writer.writerow([format_coord(lat, agg.precision), format_coord(lon, agg.precision),
                                 entry.total_count])
        logger.info(f"Wrote {len(agg)} aggregate rows to {path}")
        return path

    @staticmethod
    def read_aggregate_csv(path: Union[str, Path], precision: int = 6) -> AggregateVisibility:
        path = str(path)
        agg = AggregateVisibility(precision=precision)
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise EmptyInput(f"{path}: aggregate file is empty")
            if [h.strip() for h in header] != AGGREGATE_HEADER:
                raise ParseError(f"expected header {','.join(AGGREGATE_HEADER)}", path, 1)
            for row_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ParseError(f"expected 3 fields, got {len(row)}", path, row_number)
                try:
                    lat, lon, total = float(row[0]), float(row[1]), int(row[2])
                except ValueError as e:
                    raise ParseError(str(e), path, row_number)
                if not (Validators.validate_latitude(lat) and Validators.validate_longitude(lon)):
                    raise ParseError("coordinate out of range", path, row_number)
                if total < 1:
                    raise ParseError(f"total_count must be >= 1, got {total}", path, row_number)
                coord = GeoCoord(lat, lon)
                key = point_key(coord, precision)
                if key in agg.entries:
                    raise ParseError(f"duplicate key {key}", path, row_number)
                agg.entries[key] = AggregateEntry(coord, total)
        return agg

    @staticmethod
    def write_histogram_csv(path: Union[str, Path], edges: np.ndarray, frequencies: np.ndarray) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(HISTOGRAM_HEADER)
            for low, high, count in zip(edges[:-1], edges[1:], frequencies):
                writer.writerow([repr(float(low)), repr(float(high)), int(count)])
        return path

    @staticmethod
    def quantile_geojson(agg: AggregateVisibility, classification: QuantileClassification) -> dict:
        """One point feature per aggregate entry (canonical key order) with its quantile group"""
        features = []
        for key, label in zip(sorted(agg.entries), classification.labels):
            entry = agg.entries[key]
            features.append({
                'type': 'Feature',
                'properties': {'total_count': entry.total_count, 'quantile_group': label},
                'geometry': {'type': 'Point', 'coordinates': [entry.coord.lon_deg, entry.coord.lat_deg]},
            })
        return {'type': 'FeatureCollection', 'features': features}

    @staticmethod
    def write_geojson(path: Union[str, Path], document: dict) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(document, f)
            f.write('\n')
        return path

    @staticmethod
    def format_shares_table(classification: QuantileClassification) -> str:
        lines = [f"{'group':<12}{'threshold':>12}{'entries':>10}{'share':>10}"]
        thresholds: Sequence = ('',) + tuple(f"> {t:g}" for t in classification.thresholds)
        for name, threshold in zip(classification.group_names, thresholds):
            lines.append(f"{name:<12}{threshold:>12}{classification.group_sizes[name]:>10}"
                         f"{classification.shares[name]:>10.4f}")
        return '\n'.join(lines)

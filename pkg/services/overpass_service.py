"""Overpass API client for OpenStreetMap building footprints, with retries and an on-disk cache"""

import hashlib
import json
import threading
import time
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import httpx

from core.ingestion import BoundingBox
from utils.constants import OVERPASS_TIMEOUT_S
from utils.errors import InvalidParameter, MalformedResponse, NetworkError, RateLimited
from utils.logger import setup_logger, log_api_call
from utils.validators import Validators

# Set up logging
logger = setup_logger(__name__)

RETRYABLE_STATUS = {429, 502, 503, 504}


class OverpassService:
    """Fetches building ways inside a bbox and converts them to GeoJSON polygons"""

    _endpoint_locks: Dict[str, threading.Lock] = {}
    _locks_guard = threading.Lock()

    def __init__(self, endpoint: str, cache_dir: Union[str, Path] = '.overpass_cache',
                 timeout_s: float = OVERPASS_TIMEOUT_S, max_attempts: int = 3, backoff_s: float = 1.0,
                 client: Optional[httpx.Client] = None, sleep: Callable[[float], None] = time.sleep):
        if not Validators.validate_url(endpoint):
            raise InvalidParameter(f"invalid Overpass endpoint URL: {endpoint!r}")
        if max_attempts < 1:
            raise InvalidParameter("max_attempts must be >= 1")
        self.endpoint = endpoint
        self.cache_dir = Path(cache_dir)
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.backoff_s = backoff_s
        self.client = client or httpx.Client(timeout=timeout_s + 5.0)
        self.sleep = sleep
        logger.debug(f"OverpassService for {endpoint} (cache {self.cache_dir})")

    def close(self):
        """Close the HTTP client, including one passed in by the caller"""
        self.client.close()

    def __enter__(self) -> "OverpassService":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()

    @classmethod
    def _lock_for(cls, endpoint: str) -> threading.Lock:
        with cls._locks_guard:
            return cls._endpoint_locks.setdefault(endpoint, threading.Lock())

    def build_query(self, bbox: BoundingBox) -> str:
        """Overpass QL for every building way in bbox (south, west, north, east)"""
        return (f'[out:json][timeout:{int(self.timeout_s)}];'
                f'(way["building"]({bbox.min_lat},{bbox.min_lon},{bbox.max_lat},{bbox.max_lon}););'
                f'out geom;')

    def cache_path(self, bbox: BoundingBox) -> Path:
        key = f"{self.endpoint}|{bbox.min_lon!r},{bbox.min_lat!r},{bbox.max_lon!r},{bbox.max_lat!r}"
        digest = hashlib.sha256(key.encode('utf-8')).hexdigest()[:16]
        return self.cache_dir / f"buildings_{digest}.geojson"

    def _post(self, query: str) -> dict:
        last_error: Optional[Exception] = None
        for attempt in range(1, self.max_attempts + 1):
            start = time.perf_counter()
            try:
                response = self.client.post(self.endpoint, data={'data': query})
            except httpx.HTTPError as e:
                last_error = NetworkError(f"{self.endpoint} unreachable: {e}")
                logger.warning(f"Overpass attempt {attempt}/{self.max_attempts} failed: {e}")
            else:
                log_api_call(logger, 'POST', self.endpoint, response.status_code, time.perf_counter() - start)
                if response.status_code == 200:
                    try:
                        return response.json()
                    except ValueError as e:
                        raise MalformedResponse(f"Overpass answered with invalid JSON: {e}")
                if response.status_code in RETRYABLE_STATUS:
                    error_type = RateLimited if response.status_code == 429 else NetworkError
                    last_error = error_type(f"{self.endpoint} answered HTTP {response.status_code}")
                    logger.warning(f"Overpass attempt {attempt}/{self.max_attempts}: HTTP {response.status_code}")
                else:
                    raise NetworkError(f"{self.endpoint} answered HTTP {response.status_code}: "
                                       f"{response.text[:200]}")
            if attempt < self.max_attempts:
                self.sleep(self.backoff_s * 2 ** (attempt - 1))
        raise last_error

    @staticmethod
    def elements_to_geojson(payload: dict) -> dict:
        """Convert ``out geom`` ways to a FeatureCollection of Polygons"""
        if not isinstance(payload, dict) or not isinstance(payload.get('elements'), list):
            raise MalformedResponse("Overpass response has no 'elements' array")
        features = []
        for element in payload['elements']:
            if not isinstance(element, dict) or element.get('type') != 'way':
                continue
            geometry = element.get('geometry')
            if not isinstance(geometry, list):
                raise MalformedResponse(f"way {element.get('id')} has no geometry; query must use 'out geom'")
            try:
                ring = [[float(node['lon']), float(node['lat'])] for node in geometry]
            except (KeyError, TypeError, ValueError):
                raise MalformedResponse(f"way {element.get('id')} has malformed geometry")
            if len(ring) > 1 and ring[0] != ring[-1]:
                ring.append(list(ring[0]))
            if len(ring) < 4:
                logger.debug(f"way {element.get('id')} has fewer than 4 coordinates, skipped")
                continue
            features.append({
                'type': 'Feature',
                'id': f"way/{element.get('id')}",
                'properties': dict(element.get('tags') or {}),
                'geometry': {'type': 'Polygon', 'coordinates': [ring]},
            })
        return {'type': 'FeatureCollection', 'features': features}

    def fetch_buildings(self, bbox: BoundingBox) -> dict:
        """Return the bbox's buildings as GeoJSON, serving repeats from the cache.

        Raises:
            NetworkError: endpoint unreachable after all attempts
            RateLimited: endpoint kept answering 429
            MalformedResponse: response could not be interpreted
        """
        path = self.cache_path(bbox)
        with self._lock_for(self.endpoint):
            if path.exists():
                logger.info(f"Overpass cache hit: {path}")
                with open(path, 'r', encoding='utf-8') as f:
                    return json.load(f)

            logger.info(f"Querying Overpass for buildings in {bbox.as_tuple()}")
            document = self.elements_to_geojson(self._post(self.build_query(bbox)))
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix('.tmp')
            with open(tmp, 'w', encoding='utf-8') as f:
                json.dump(document, f)
            tmp.replace(path)
            logger.info(f"Cached {len(document['features'])} buildings at {path}")
            return document

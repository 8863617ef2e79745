"""Input validation utilities"""

import math
from urllib.parse import urlparse


class Validators:
    """Input validation methods"""

    @staticmethod
    def validate_url(url: str) -> bool:
        """Validate URL format"""
        try:
            result = urlparse(url)
            return result.scheme in ('http', 'https') and bool(result.netloc)
        except (TypeError, ValueError, AttributeError):
            return False

    @staticmethod
    def validate_latitude(lat: float) -> bool:
        """Latitude in degrees, finite and within [-90, 90]"""
        return math.isfinite(lat) and -90.0 <= lat <= 90.0

    @staticmethod
    def validate_longitude(lon: float) -> bool:
        """Longitude in degrees, finite and within [-180, 180]"""
        return math.isfinite(lon) and -180.0 <= lon <= 180.0

    @staticmethod
    def validate_bbox(min_lon: float, min_lat: float, max_lon: float, max_lat: float) -> bool:
        """Bounding box corners valid and strictly ordered"""
        return (
            Validators.validate_longitude(min_lon)
            and Validators.validate_longitude(max_lon)
            and Validators.validate_latitude(min_lat)
            and Validators.validate_latitude(max_lat)
            and min_lon < max_lon
            and min_lat < max_lat
        )

    @staticmethod
    def validate_trip_id(trip_id: str) -> bool:
        """Trip ids are free text without commas or line breaks"""
        return bool(trip_id) and not any(ch in trip_id for ch in ',\r\n')

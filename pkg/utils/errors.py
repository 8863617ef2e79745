"""Exception hierarchy for the visibility pipeline.

Everything the pipeline raises on purpose derives from ``VisibilityError``.
``InputError`` marks problems caused by operator input (exit code 2); the
rest are computation or network failures (exit code 1 when they escape).
"""

from typing import Optional


class VisibilityError(Exception):
    """Base class for pipeline errors"""

    exit_code = 1


class InputError(VisibilityError):
    """Bad operator input"""

    exit_code = 2


class ParseError(InputError):
    """A file could not be parsed; carries the path and 1-based row when known"""

    def __init__(self, reason: str, path: Optional[str] = None, row: Optional[int] = None):
        self.reason = reason
        self.path = path
        self.row = row
        where = ""
        if path is not None:
            where = f"{path}"
            if row is not None:
                where += f":{row}"
            where += ": "
        elif row is not None:
            where = f"row {row}: "
        super().__init__(f"{where}{reason}")


class EmptyInput(InputError):
    """Input contained no usable records"""


class UnsupportedGeometry(InputError):
    """GeoJSON geometry type that cannot describe a building outline"""


class UnknownTrip(InputError):
    """Requested trip id is not present in the trajectory file"""


class UnknownPointId(InputError):
    """A per-trip visibility result references a point missing from the corpus"""


class PlacementFailure(InputError):
    """Synthetic generator could not place features inside the bounding box"""


class InvalidParameter(InputError):
    """A parameter value violates its documented range"""


class IdenticalPoints(VisibilityError):
    """Bearing requested between coincident points"""


class InvalidResult(VisibilityError):
    """A geodesic computation produced a non-finite coordinate"""


class InvalidBearing(VisibilityError):
    """A track point has no usable bearing"""


class TooShort(VisibilityError):
    """Trip has fewer than two fixes or spans less than one resample interval"""


class DegenerateEdge(VisibilityError):
    """Polygon edge of zero length"""


class EmptyCorpus(VisibilityError):
    """No densified building points to index"""


class DegenerateSample(VisibilityError):
    """Sample cannot be fitted (zero variance)"""


class NonConvergence(VisibilityError):
    """A parameter search ended without meeting its tolerance"""


class NetworkError(VisibilityError):
    """Remote endpoint unreachable or failing"""


class RateLimited(NetworkError):
    """Remote endpoint asked us to slow down"""


class MalformedResponse(VisibilityError):
    """Remote endpoint answered with something we cannot interpret"""

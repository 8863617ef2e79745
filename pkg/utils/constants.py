"""Application constants"""

APP_NAME = "vehicle-visibility"
APP_VERSION = "1.0.0"

# Mean spherical earth radius (meters)
EARTH_RADIUS_M = 6_371_000.0

# Viewing circle and processing defaults
DEFAULTS = {
    'radius_m': 50.0,
    'lead_m': 50.0,
    'interval_s': 5.0,
    'spacing_m': 10.0,
    'precision': 6,
    'leaf_size': 32,
    'workers': 1,
    'histogram_bins': 50,
}

# Waterloo (Sydney) study area: min_lon, min_lat, max_lon, max_lat
WATERLOO_BBOX = (151.18943, -33.91441, 151.21681, -33.89325)

DEFAULT_QUANTILE_CUTS = (0.90, 0.95, 0.99)

FIT_FAMILIES = (
    'LogNormal',
    'Gamma',
    'Exponential',
    'WeibullMin',
    'Normal',
    'InverseGamma',
    'GumbelR',
)

OVERPASS_DEFAULT_ENDPOINT = "https://overpass-api.de/api/interpreter"
OVERPASS_ENV_VAR = "OVERPASS_ENDPOINT"
OVERPASS_TIMEOUT_S = 25

# Process exit codes
EXIT_OK = 0
EXIT_INTERNAL_ERROR = 1
EXIT_INPUT_ERROR = 2

CIRCLE_POLYGON_VERTICES = 64

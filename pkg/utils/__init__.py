"""Utilities module for the vehicle visibility pipeline"""

from .constants import DEFAULTS, EARTH_RADIUS_M
from .validators import Validators
from .logger import setup_logger

__all__ = ['DEFAULTS', 'EARTH_RADIUS_M', 'Validators', 'setup_logger']

"""Configuration manager for pipeline settings with logging"""

import configparser
import os
from pathlib import Path
from typing import Optional, Union

from utils.constants import DEFAULTS, OVERPASS_DEFAULT_ENDPOINT, OVERPASS_ENV_VAR, OVERPASS_TIMEOUT_S
from utils.logger import setup_logger

# Set up logging
logger = setup_logger(__name__)


class ConfigManager:
    """Manages pipeline configuration using an INI file"""

    def __init__(self, config_path: Union[str, Path] = 'config.ini'):
        self.config_path = Path(config_path)
        self.config = configparser.ConfigParser()
        logger.debug(f"Initializing ConfigManager with config path: {self.config_path}")
        self.load_config()

    def load_config(self):
        """Load configuration from file"""
        if self.config_path.exists():
            logger.debug(f"Loading existing configuration from {self.config_path}")
            try:
                self.config.read(self.config_path, encoding='utf-8')
                logger.debug(f"Configuration sections loaded: {self.config.sections()}")
            except configparser.Error as e:
                logger.error(f"Failed to load configuration: {str(e)}", exc_info=True)
                self.create_default_config()
        else:
            logger.info("No existing configuration found, creating default")
            self.create_default_config()

    def create_default_config(self):
        """Create default configuration"""
        self.config['view'] = {
            'radius_m': str(DEFAULTS['radius_m']),
            'lead_m': str(DEFAULTS['lead_m']),
            'interval_s': str(DEFAULTS['interval_s']),
        }
        self.config['densify'] = {
            'spacing_m': str(DEFAULTS['spacing_m']),
        }
        self.config['index'] = {
            'leaf_size': str(DEFAULTS['leaf_size']),
        }
        self.config['aggregate'] = {
            'precision': str(DEFAULTS['precision']),
        }
        self.config['run'] = {
            'workers': str(DEFAULTS['workers']),
        }
        self.config['overpass'] = {
            'endpoint': OVERPASS_DEFAULT_ENDPOINT,
            'timeout_s': str(OVERPASS_TIMEOUT_S),
            'max_attempts': '3',
            'backoff_s': '1.0',
            'cache_dir': '.overpass_cache',
        }
        self.config['synthetic'] = {
            'seed': '42',
            'n_trips': '20',
            'n_buildings': '60',
            'trip_duration_s': '300',
            'speed_min_mps': '5',
            'speed_max_mps': '15',
            'block_m': '120',
            'hub_sigma': '1.5',
        }

        self.save_config()
        logger.info("Default configuration created and saved")

    def save_config(self):
        """Save configuration to file"""
        try:
            if self.config_path.parent != Path('.'):
                self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, 'w', encoding='utf-8') as f:
                self.config.write(f)
            logger.debug(f"Configuration saved to {self.config_path}")
        except OSError as e:
            logger.error(f"Failed to save configuration: {str(e)}", exc_info=True)

    def get(self, section: str, key: str, fallback: str = '') -> str:
        """Get configuration value with logging"""
        value = self.config.get(section, key, fallback=fallback)
        logger.debug(f"Config get: [{section}][{key}] = {value}")
        return value

    def get_float(self, section: str, key: str, fallback: float) -> float:
        try:
            return self.config.getfloat(section, key, fallback=fallback)
        except ValueError:
            logger.warning(f"Config [{section}][{key}] is not a number, using fallback: {fallback}")
            return fallback

    def get_int(self, section: str, key: str, fallback: int) -> int:
        try:
            return self.config.getint(section, key, fallback=fallback)
        except ValueError:
            logger.warning(f"Config [{section}][{key}] is not an integer, using fallback: {fallback}")
            return fallback

    def set(self, section: str, key: str, value: str):
        """Set configuration value with logging"""
        if section not in self.config:
            self.config[section] = {}
            logger.debug(f"Created new config section: {section}")

        old_value = self.config[section].get(key, '<not set>')
        self.config[section][key] = str(value)
        self.save_config()

        logger.info(f"Config updated: [{section}][{key}] = {value} (was: {old_value})")

    def overpass_endpoint(self, override: Optional[str] = None) -> str:
        """Flag beats environment beats file"""
        if override:
            return override
        from_env = os.environ.get(OVERPASS_ENV_VAR)
        if from_env:
            logger.debug(f"Overpass endpoint taken from ${OVERPASS_ENV_VAR}")
            return from_env
        return self.get('overpass', 'endpoint', OVERPASS_DEFAULT_ENDPOINT)

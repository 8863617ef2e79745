"""Configuration module for the vehicle visibility pipeline"""

from .config_manager import ConfigManager

__all__ = ['ConfigManager']

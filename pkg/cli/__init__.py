"""Command-line surface for the vehicle visibility pipeline"""

from .commands import HANDLERS
from .parser import build_parser

__all__ = ['HANDLERS', 'build_parser']

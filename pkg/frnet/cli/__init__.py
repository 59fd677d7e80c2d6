"""
The 'cli' package is the frnet command line.
"""

from .main import build_parser, main

__all__ = ['main', 'build_parser']

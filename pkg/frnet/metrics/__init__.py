"""
The 'metrics' package converts gaze angles to vectors and measures angular errors.
"""

from .gaze import GazeAngles, GazeVector, angles_to_vector, angular_error, mean_angular_error

__all__ = [
    'GazeAngles', 'GazeVector',
    'angles_to_vector', 'angular_error', 'mean_angular_error'
]

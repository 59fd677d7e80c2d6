"""
The 'core' package contains frnet's tensor types and basic infrastructure.
"""

from .errors import FormatError, IntegrityError, ShapeError, UnsupportedSizeError
from .profiling import Profiler, profile
from .serialization import load_tensor, read_tensor, save_tensor, write_tensor
from .settings import log, settings, warn
from .tensor import (ComplexTensor, Tensor, complex_hadamard, concat_channels, crop2d,
                     elementwise, matmul, ones, pad2d_zero, reshape, slice_channels, zeros)

__all__ = [
    'Tensor', 'ComplexTensor',
    'zeros', 'ones', 'elementwise', 'complex_hadamard', 'pad2d_zero', 'crop2d',
    'concat_channels', 'slice_channels', 'matmul', 'reshape',
    'save_tensor', 'load_tensor', 'write_tensor', 'read_tensor',
    'ShapeError', 'UnsupportedSizeError', 'FormatError', 'IntegrityError',
    'settings', 'log', 'warn',
    'profile', 'Profiler'
]

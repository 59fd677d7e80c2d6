"""
frnet: the FFT Residual Block of FR-Net (spectral convolution with a trainable
frequency-domain mask) on a small tensor / reverse-mode autodiff core, with
oracle verification, cost profiling and a desk-scale gaze training harness.
"""

# import core namespace, so we can e.g. use frnet.Tensor
from .core import *

__all__ = []

# 'from frnet import *' should import everything defined in core.__all__
from . import core

__all__.extend(core.__all__)

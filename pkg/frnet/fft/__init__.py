"""
The 'fft' package provides power-of-two fast Fourier transforms and
spectral convolution.
"""

from .plan import FftPlan, fft1d, fft2d, get_plan
from .spectral import apply_mask, spectral_conv2d

__all__ = [
    'FftPlan', 'get_plan', 'fft1d', 'fft2d',
    'spectral_conv2d', 'apply_mask'
]

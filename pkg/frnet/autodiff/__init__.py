"""
The 'autodiff' package provides tape-based reverse-mode differentiation.
"""

from . import layer_ops
from .gradcheck import GradCheckResult, check_gradients
from .ops import REGISTRY, Op, inject_fault, register
from .tape import Parameter, Tape, backward, zero_grad

__all__ = [
    'Tape', 'Parameter', 'backward', 'zero_grad',
    'Op', 'register', 'REGISTRY', 'inject_fault',
    'check_gradients', 'GradCheckResult'
]

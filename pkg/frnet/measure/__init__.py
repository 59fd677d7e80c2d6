"""
The 'measure' package counts parameters and FLOPs and benchmarks wall-clock time.
"""

from .benchmarks import (InferenceReport, ScalingReport, bench_inference, bench_scaling,
                         direct_circular_conv2d, hardware_descriptor)
from .costs import CONVENTION, CostReport, LayerCost, cost_report, count_flops, count_params

__all__ = [
    'CostReport', 'LayerCost', 'CONVENTION', 'cost_report', 'count_params', 'count_flops',
    'ScalingReport', 'InferenceReport', 'bench_scaling', 'bench_inference',
    'direct_circular_conv2d', 'hardware_descriptor'
]

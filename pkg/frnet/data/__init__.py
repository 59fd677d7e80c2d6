"""
The 'data' package renders synthetic gaze samples and reads/writes datasets.
"""

from .dataset import DatasetManifest, generate_dataset, load_dataset
from .synthetic import SyntheticSample, estimate_label, render_sample

__all__ = [
    'SyntheticSample', 'render_sample', 'estimate_label',
    'DatasetManifest', 'generate_dataset', 'load_dataset'
]

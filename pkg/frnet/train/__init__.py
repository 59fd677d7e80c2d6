"""
The 'train' package holds the loss, the AdamW optimizer, the learning-rate
schedule and the training loop.
"""

from .losses import smooth_l1
from .optimizers import AdamWState, Schedule, adamw_step
from .trainer import EpochRecord, TrainingLog, evaluate, train_loop

__all__ = [
    'smooth_l1', 'AdamWState', 'Schedule', 'adamw_step',
    'train_loop', 'evaluate', 'TrainingLog', 'EpochRecord'
]

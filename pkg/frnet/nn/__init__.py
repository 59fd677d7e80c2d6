"""
The 'nn' package contains the layers, blocks and the FR-Net model.
"""

from .blocks import FeedForward, FFTEncoder, FFTResidualBlock, InvertedResidualBlock
from .checkpoint import load_checkpoint, save_checkpoint
from .layers import (ChannelAffine, ChannelLayerNorm, Conv2d, ConvNormAct, DepthwiseConv2d,
                     GlobalAvgPool, Linear, PointwiseConv2d, SiLU, SpectralMask)
from .model import ABLATIONS, FrNet, ModelConfig
from .module import Module, Sequential

__all__ = [
    'Module', 'Sequential',
    'Conv2d', 'PointwiseConv2d', 'DepthwiseConv2d', 'ChannelAffine', 'ChannelLayerNorm',
    'SiLU', 'GlobalAvgPool', 'Linear', 'SpectralMask', 'ConvNormAct',
    'InvertedResidualBlock', 'FeedForward', 'FFTEncoder', 'FFTResidualBlock',
    'ModelConfig', 'FrNet', 'ABLATIONS',
    'save_checkpoint', 'load_checkpoint'
]

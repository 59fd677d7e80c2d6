"""
The building blocks of FR-Net: the inverted residual block of the convolutional
stages, the FFT Encoder and the FFT Residual Block.
"""

from typing import Optional

import numpy as np

from ..autodiff.tape import Tape
from ..core.profiling import profile
from .layers import SILU_GAIN, ChannelLayerNorm, ConvNormAct, PointwiseConv2d, SiLU, SpectralMask
from .module import Module, Sequential, default_rng


class InvertedResidualBlock(Module):
    """
    pointwise expansion -> depthwise 3x3 (stride s) -> pointwise projection,
    with a residual add if stride == 1 and the channels are kept.
    """

    def __init__(self, in_channels: int, out_channels: int, stride: int = 1, expansion: int = 4,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        if expansion < 1:
            raise ValueError(f"Expansion ratio must be >= 1, got {expansion}")
        if stride not in (1, 2):
            raise ValueError(f"Stride must be 1 or 2, got {stride}")
        rng = default_rng(rng)
        hidden = in_channels * expansion
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.stride = stride
        self.expand = self.add_module("expand", ConvNormAct(in_channels, hidden, 1, rng=rng))
        self.depthwise = self.add_module(
            "depthwise", ConvNormAct(hidden, hidden, 3, stride, depthwise=True, rng=rng))
        self.project = self.add_module(
            "project", ConvNormAct(hidden, out_channels, 1, activation=False, rng=rng))

    @property
    def use_residual(self) -> bool:
        return self.stride == 1 and self.in_channels == self.out_channels

    def forward(self, tape: Tape, x: int) -> int:
        # expand to the hidden width, filter spatially, project without activation
        y = self.project(tape, self.depthwise(tape, self.expand(tape, x)))
        # identity shortcut, only if the shapes agree
        if self.use_residual:
            y = tape.record("add", [x, y])
        return y


class FeedForward(Module):
    """pointwise expansion, SiLU, pointwise projection"""

    def __init__(self, dim: int, expansion: int = 2, rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        rng = default_rng(rng)
        self.fc1 = self.add_module("fc1", PointwiseConv2d(dim, dim * expansion, gain=SILU_GAIN, rng=rng))
        self.act = self.add_module("act", SiLU())
        self.fc2 = self.add_module("fc2", PointwiseConv2d(dim * expansion, dim, rng=rng))

    def forward(self, tape: Tape, x: int) -> int:
        return self.fc2(tape, self.act(tape, self.fc1(tape, x)))


class FFTEncoder(Module):
    """
    Pre-norm transformer encoder whose token mixer is a global spectral filter:
        u = x + mask(norm1(x))
        y = u + ffn(norm2(u))
    Without the encoder shortcut the first add is dropped, u = mask(norm1(x)).
    """

    def __init__(self, dim: int, height: int, width: int, ffn_expansion: int = 2,
                 shortcut: bool = True, mask_noise: float = 0.02,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        rng = default_rng(rng)
        #: whether the filter branch is added to its input
        self.shortcut = shortcut
        self.norm1 = self.add_module("norm1", ChannelLayerNorm(dim))
        self.mask = self.add_module("mask", SpectralMask(dim, height, width, mask_noise, rng))
        self.norm2 = self.add_module("norm2", ChannelLayerNorm(dim))
        self.ffn = self.add_module("ffn", FeedForward(dim, ffn_expansion, rng))

    def forward(self, tape: Tape, x: int) -> int:
        # token mixing: global filter in frequency space
        u = self.mask(tape, self.norm1(tape, x))
        # encoder shortcut around the filter
        if self.shortcut:
            u = tape.record("add", [x, u])
        # channel mixing, always with a residual add
        return tape.record("add", [u, self.ffn(tape, self.norm2(tape, u))])


class FFTResidualBlock(Module):
    """
    Local 3x3 features, a 1x1 projection to the encoder dimension, a stack of FFT
    Encoders at the block's spatial size and a 1x1 fusion of the encoder output
    concatenated with the block input, back to the input channels.
    """

    def __init__(self, channels: int, dim: int, height: int, width: int, depth: int,
                 ffn_expansion: int = 2, encoder_shortcut: bool = True, use_encoders: bool = True,
                 concat_shortcut: bool = True, depthwise_local: bool = True, mask_noise: float = 0.02,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        rng = default_rng(rng)
        self.channels = channels
        self.dim = dim
        #: whether the block input is concatenated to the encoder output before fusion
        self.concat_shortcut = concat_shortcut
        self.local = self.add_module(
            "local", ConvNormAct(channels, channels, 3, depthwise=depthwise_local, rng=rng))
        self.proj = self.add_module("proj", PointwiseConv2d(channels, dim, rng=rng))
        encoders = []
        if use_encoders:
            encoders = [FFTEncoder(dim, height, width, ffn_expansion, encoder_shortcut, mask_noise, rng)
                        for _ in range(depth)]
        self.encoders = self.add_module("encoders", Sequential(*encoders))
        fusion_in = dim + channels if concat_shortcut else dim
        self.fusion = self.add_module("fusion", ConvNormAct(fusion_in, channels, 1, rng=rng))

    @property
    def fusion_in_channels(self) -> int:
        return self.fusion.conv.in_channels

    @profile
    def forward(self, tape: Tape, x: int) -> int:
        # local 3x3 features, projected to the encoder dimension
        z = self.proj(tape, self.local(tape, x))
        # global features from the stacked FFT Encoders (none in the ablated variant)
        z = self.encoders(tape, z)
        # concatenation shortcut: [encoder output, block input]
        if self.concat_shortcut:
            z = tape.record("concat_channels", [z, x])
        # 1x1 fusion back to the block's channels
        return self.fusion(tape, z)

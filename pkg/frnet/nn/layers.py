"""
Basic layers. Convolution and linear weights are drawn fan-in scaled uniform,
U(-b, b) with b = gain * sqrt(3 / fan_in), biases start at zero.
"""

import math
from typing import Optional

import numpy as np

from ..autodiff.tape import Tape
from ..core.settings import settings
from ..core.tensor import ComplexTensor
from .module import Module, default_rng

# gain of weights that feed a SiLU activation
SILU_GAIN = math.sqrt(2.)


def fan_in_uniform(rng: np.random.Generator, shape, fan_in: int, gain: float = 1.) -> np.ndarray:
    bound = gain * math.sqrt(3. / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(settings.dtype)


class Conv2d(Module):
    """k x k convolution with 'same' zero padding and optional stride"""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 1, stride: int = 1,
                 bias: bool = True, gain: float = 1., rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        if kernel_size % 2 != 1:
            raise ValueError(f"Kernel size must be odd, got {kernel_size}")
        rng = default_rng(rng)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = (kernel_size - 1) // 2
        fan_in = in_channels * kernel_size ** 2
        self.weight = self.add_parameter(
            "weight", fan_in_uniform(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in, gain))
        self.bias = self.add_parameter("bias", np.zeros(out_channels)) if bias else None

    def forward(self, tape: Tape, x: int) -> int:
        inputs = [x, tape.parameter(self.weight)]
        if self.bias is not None:
            inputs.append(tape.parameter(self.bias))
        return tape.record("conv2d", inputs, stride=self.stride, padding=self.padding)


class PointwiseConv2d(Conv2d):
    """1 x 1 convolution, mixes channels only"""

    def __init__(self, in_channels: int, out_channels: int, bias: bool = True, gain: float = 1.,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__(in_channels, out_channels, 1, 1, bias, gain, rng)


class DepthwiseConv2d(Module):
    """one k x k filter per channel, no mixing across channels"""

    def __init__(self, channels: int, kernel_size: int = 3, stride: int = 1, bias: bool = True,
                 gain: float = 1., rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        if kernel_size % 2 != 1:
            raise ValueError(f"Kernel size must be odd, got {kernel_size}")
        rng = default_rng(rng)
        self.channels = channels
        self.stride = stride
        self.padding = (kernel_size - 1) // 2
        self.weight = self.add_parameter(
            "weight", fan_in_uniform(rng, (channels, kernel_size, kernel_size), kernel_size ** 2, gain))
        self.bias = self.add_parameter("bias", np.zeros(channels)) if bias else None

    def forward(self, tape: Tape, x: int) -> int:
        inputs = [x, tape.parameter(self.weight)]
        if self.bias is not None:
            inputs.append(tape.parameter(self.bias))
        return tape.record("depthwise_conv2d", inputs, stride=self.stride, padding=self.padding)


class ChannelAffine(Module):
    """batch-free normalization of the conv stages: a learned scale and shift per channel"""

    def __init__(self, channels: int) -> None:
        super().__init__()
        self.gamma = self.add_parameter("gamma", np.ones(channels))
        self.beta = self.add_parameter("beta", np.zeros(channels))

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("channel_affine", [x, tape.parameter(self.gamma), tape.parameter(self.beta)])


class ChannelLayerNorm(Module):
    """layer normalization across the channels at every spatial position"""

    def __init__(self, channels: int, eps: float = 1e-5) -> None:
        super().__init__()
        self.eps = eps
        self.gamma = self.add_parameter("gamma", np.ones(channels))
        self.beta = self.add_parameter("beta", np.zeros(channels))

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("layer_norm", [x, tape.parameter(self.gamma), tape.parameter(self.beta)],
                           eps=self.eps)


class SiLU(Module):

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("silu", [x])


class GlobalAvgPool(Module):

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("global_avg_pool", [x])


class Linear(Module):
    """fully connected layer on a vector"""

    def __init__(self, in_features: int, out_features: int,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        rng = default_rng(rng)
        # U(-1/sqrt(n), 1/sqrt(n)) keeps the untrained head output small
        bound = 1. / math.sqrt(in_features)
        self.weight = self.add_parameter(
            "weight", rng.uniform(-bound, bound, size=(out_features, in_features)).astype(settings.dtype))
        self.bias = self.add_parameter("bias", np.zeros(out_features))

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("linear", [x, tape.parameter(self.weight), tape.parameter(self.bias)])


class SpectralMask(Module):
    """
    Trainable complex frequency-domain filter of shape [c,h,w], stored as two real
    parameters 're' and 'im'. It starts as the identity filter 1+0i plus
    Gaussian noise of the given standard deviation.
    """

    def __init__(self, channels: int, height: int, width: int, noise: float = 0.02,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        rng = default_rng(rng)
        shape = (channels, height, width)
        self.re = self.add_parameter("re", 1. + noise * rng.standard_normal(shape))
        self.im = self.add_parameter("im", noise * rng.standard_normal(shape))

    @property
    def shape(self):
        return self.re.shape

    def as_complex(self) -> ComplexTensor:
        return ComplexTensor(self.re.value.data, self.im.value.data)

    def forward(self, tape: Tape, x: int) -> int:
        return tape.record("apply_mask", [x, tape.parameter(self.re), tape.parameter(self.im)])


class ConvNormAct(Module):
    """convolution (full or depthwise), channel affine normalization, optional SiLU"""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 1, stride: int = 1,
                 depthwise: bool = False, activation: bool = True,
                 rng: Optional[np.random.Generator] = None) -> None:
        super().__init__()
        gain = SILU_GAIN if activation else 1.
        if depthwise:
            if in_channels != out_channels:
                raise ValueError(f"A depthwise convolution keeps the channels, got {in_channels} -> {out_channels}")
            conv = DepthwiseConv2d(in_channels, kernel_size, stride, gain=gain, rng=rng)
        else:
            conv = Conv2d(in_channels, out_channels, kernel_size, stride, gain=gain, rng=rng)
        self.conv = self.add_module("conv", conv)
        self.norm = self.add_module("norm", ChannelAffine(out_channels))
        self.act = self.add_module("act", SiLU()) if activation else None

    def forward(self, tape: Tape, x: int) -> int:
        x = self.norm(tape, self.conv(tape, x))
        if self.act is not None:
            x = self.act(tape, x)
        return x

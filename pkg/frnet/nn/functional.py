"""
Tensor-in, Tensor-out versions of the layers and blocks, for use outside of a
training step. Each call records a throwaway tape.
"""

from typing import Optional

from ..autodiff.tape import Tape
from ..core.tensor import Tensor
from .module import Module


def _run(op: str, *tensors: Optional[Tensor], **attrs) -> Tensor:
    tape = Tape()
    ids = [tape.constant(t) for t in tensors if t is not None]
    return tape.value(tape.record(op, ids, **attrs))


def _same_padding(k: int) -> int:
    if k % 2 != 1:
        raise ValueError(f"'same' padding needs an odd kernel size, got {k}")
    return (k - 1) // 2


def conv2d(x: Tensor, w: Tensor, bias: Optional[Tensor] = None, stride: int = 1,
           padding: Optional[int] = None) -> Tensor:
    """cross-correlation of x [cin,h,w] with w [cout,cin,kh,kw]; 'same' padding by default"""
    if padding is None:
        padding = _same_padding(w.shape[-1]) if w.ndim == 4 else 0
    return _run("conv2d", x, w, bias, stride=stride, padding=padding)


def depthwise_conv2d(x: Tensor, w: Tensor, bias: Optional[Tensor] = None, stride: int = 1,
                     padding: Optional[int] = None) -> Tensor:
    """per-channel filtering of x [c,h,w] with w [c,kh,kw]"""
    if padding is None:
        padding = _same_padding(w.shape[-1]) if w.ndim == 3 else 0
    return _run("depthwise_conv2d", x, w, bias, stride=stride, padding=padding)


def pointwise_conv2d(x: Tensor, w: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """1x1 convolution with w [cout,cin,1,1]"""
    return _run("conv2d", x, w, bias, stride=1, padding=0)


def channel_affine(x: Tensor, gamma: Tensor, beta: Tensor) -> Tensor:
    return _run("channel_affine", x, gamma, beta)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    return _run("layer_norm", x, gamma, beta, eps=eps)


def silu(x: Tensor) -> Tensor:
    return _run("silu", x)


def global_avg_pool(x: Tensor) -> Tensor:
    return _run("global_avg_pool", x)


def linear(x: Tensor, w: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    return _run("linear", x, w, bias)


def apply_module(module: Module, x: Tensor) -> Tensor:
    """run a module (block, encoder, layer) on a single feature map"""
    tape = Tape()
    return tape.value(module(tape, tape.constant(x)))


# the blocks of the network, by their operation names
inverted_residual_block = apply_module
fft_encoder = apply_module
fft_residual_block = apply_module


def frnet_forward(image: Tensor, model) -> Tensor:
    """[yaw, pitch] of one image"""
    return model.predict(image)

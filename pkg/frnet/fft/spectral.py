"""
Spectral convolution: pad the kernel, transform both operands, multiply the
spectra elementwise, transform back and keep the real part. With same-size
transforms this is a circular convolution with the kernel anchored at (0, 0).
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Tuple

import numpy as np

from ..core.errors import ShapeError
from ..core.profiling import profile
from ..core.settings import settings
from ..core.tensor import ComplexTensor, Tensor, complex_hadamard, pad2d_zero
from ..core.types import Array, ComplexArray
from .plan import check_power_of_two, fft2d, fft2d_array, fft_flops


@profile
def spectral_conv2d(x: Tensor, k: Tensor) -> Tensor:
    """circular 2d convolution of x [h,w] with the kernel k [kh,kw] via the FFT"""
    if x.ndim != 2 or k.ndim != 2:
        raise ShapeError(f"spectral_conv2d needs 2d operands, got {list(x.shape)} and {list(k.shape)}")
    h, w = x.shape
    kh, kw = k.shape
    if kh > h or kw > w:
        raise ValueError(f"Kernel {kh}x{kw} is larger than the input {h}x{w}")
    check_power_of_two(h, "input height")
    check_power_of_two(w, "input width")
    # 1. pad the kernel
    k_padded = pad2d_zero(k, h, w)
    # 2. transform both
    x_hat = fft2d(x)
    k_hat = fft2d(k_padded)
    # 3. multiply spectra
    y_hat = complex_hadamard(x_hat, k_hat)
    # 4. transform back
    y = fft2d(y_hat, "inverse")
    # 5. drop the imaginary part
    return y.real()


def _channel_chunks(c: int, threads: int):
    bounds = np.linspace(0, c, min(threads, c) + 1).astype(int)
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def apply_mask_array(x: Array, mask: ComplexArray) -> Tuple[Array, ComplexArray]:
    """
    real(ifft2d(fft2d(x) * mask)) of a [c,h,w] array, channel by channel.
    Returns the output and the input spectrum.
    """
    threads = settings.threads
    if threads <= 1 or x.shape[0] == 1:
        x_hat = fft2d_array(x.astype(np.complex128))
        y = fft2d_array(x_hat * mask, "inverse").real
        return y.astype(x.dtype, copy=False), x_hat
    x_hat = np.empty(x.shape, dtype=np.complex128)
    y = np.empty(x.shape, dtype=x.dtype)

    def run(bounds):
        a, b = bounds
        x_hat[a:b] = fft2d_array(x[a:b].astype(np.complex128))
        y[a:b] = fft2d_array(x_hat[a:b] * mask[a:b], "inverse").real

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(run, _channel_chunks(x.shape[0], threads)))
    return y, x_hat


def _mask_values(mask) -> ComplexArray:
    if isinstance(mask, ComplexTensor):
        return mask.values
    if hasattr(mask, "as_complex"):
        return mask.as_complex().values
    raise TypeError(f"Expected a ComplexTensor or SpectralMask, got {type(mask).__name__}")


@profile
def apply_mask(x: Tensor, mask) -> Tensor:
    """
    Global filter: every channel of x [c,h,w] is filtered with its own
    frequency-domain mask of the same shape.
    """
    m = _mask_values(mask)
    if x.ndim != 3 or m.shape != x.shape:
        raise ShapeError(f"Mask of shape {list(m.shape)} does not match the input {list(x.shape)}")
    check_power_of_two(x.shape[1], "input height")
    check_power_of_two(x.shape[2], "input width")
    y, _ = apply_mask_array(x.data, m)
    return Tensor.wrap(y)


def fft2d_flops(h: int, w: int) -> int:
    """h transforms of length w plus w transforms of length h"""
    return h * fft_flops(w) + w * fft_flops(h)


def apply_mask_flops(c: int, h: int, w: int) -> int:
    """forward and inverse 2d transform plus a complex product (6 flops) per element and channel"""
    return c * (2 * fft2d_flops(h, w) + 6 * h * w)

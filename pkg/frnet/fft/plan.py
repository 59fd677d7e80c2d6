"""
Radix-2 iterative Cooley-Tukey transforms. A plan holds the bit-reversal
permutation and the twiddle factors of one length and direction; plans are
immutable and cached, so they are shared freely between threads.
"""

from functools import lru_cache

import numpy as np

from ..core.errors import UnsupportedSizeError
from ..core.profiling import profile
from ..core.tensor import ComplexTensor, Tensor
from ..core.types import ComplexArray

DIRECTIONS = ("forward", "inverse")


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def check_power_of_two(n: int, what: str = "transform length") -> None:
    if not is_power_of_two(n):
        raise UnsupportedSizeError(
            f"The {what} must be a power of two, got {n}; pad the input first")


def bit_reversal_permutation(n: int) -> np.ndarray:
    """index permutation that reverses the log2(n) bits of every index"""
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_flops(n: int) -> int:
    """real floating point operations of a complex length-n transform: 5 n log2(n)"""
    return 5 * n * (n.bit_length() - 1)


class FftPlan():
    """
    Transform plan of a fixed power-of-two length and direction.
    The forward transform is unscaled, the inverse one is divided by the length.
    """

    def __init__(self, length: int, direction: str = "forward") -> None:
        check_power_of_two(length)
        if direction not in DIRECTIONS:
            raise ValueError(f"Unknown transform direction '{direction}', expected one of {DIRECTIONS}")
        #: the transform length
        self.length = length
        #: 'forward' or 'inverse'
        self.direction = direction
        sign = -1. if direction == "forward" else 1.
        #: roots of unity exp(-+2 pi i j / length) for j < length; stage s uses every (length/s)-th
        self.twiddles = np.exp(sign * 2j * np.pi * np.arange(length) / length)
        self.twiddles.flags.writeable = False
        #: input order of the iterative butterflies
        self.permutation = bit_reversal_permutation(length)
        self.permutation.flags.writeable = False

    @profile
    def execute(self, z: ComplexArray) -> ComplexArray:
        """Transform along the last axis, all leading axes are batched"""
        n = self.length
        if z.shape[-1] != n:
            raise UnsupportedSizeError(f"Plan of length {n} applied to an axis of length {z.shape[-1]}")
        lead = z.shape[:-1]
        x = np.asarray(z, dtype=np.complex128)[..., self.permutation]
        size = 2
        while size <= n:
            half = size // 2
            w = self.twiddles[::n // size][:half]
            x = x.reshape(lead + (n // size, size))
            even = x[..., :half]
            odd = x[..., half:] * w
            x = np.concatenate([even + odd, even - odd], axis=-1)
            size *= 2
        x = x.reshape(lead + (n,))
        if self.direction == "inverse":
            x = x / n
        return x

    def __repr__(self) -> str:
        return f"FftPlan(length={self.length}, direction={self.direction!r})"


@lru_cache(maxsize=None)
def get_plan(length: int, direction: str = "forward") -> FftPlan:
    """cached plan of the given length and direction"""
    return FftPlan(length, direction)


def fft_array(z: ComplexArray, direction: str = "forward") -> ComplexArray:
    """1d transform of the last axis of an array"""
    return get_plan(z.shape[-1], direction).execute(z)


def fft2d_array(z: ComplexArray, direction: str = "forward") -> ComplexArray:
    """2d transform of the last two axes of an array: rows first, then columns"""
    h, w = z.shape[-2:]
    check_power_of_two(h, "transform height")
    check_power_of_two(w, "transform width")
    rows = get_plan(w, direction).execute(z)
    cols = get_plan(h, direction).execute(np.swapaxes(rows, -1, -2))
    return np.ascontiguousarray(np.swapaxes(cols, -1, -2))


def _as_complex(x) -> ComplexArray:
    if isinstance(x, ComplexTensor):
        return x.values
    if isinstance(x, Tensor):
        return x.data.astype(np.complex128)
    raise TypeError(f"Expected a Tensor or ComplexTensor, got {type(x).__name__}")


def fft1d(x, direction: str = "forward") -> ComplexTensor:
    """
    Fast Fourier transform along the last axis of x (a ComplexTensor, or a real Tensor).
    forward: X[u] = sum_m x[m] exp(-2 pi i u m / n); inverse divides by n.
    """
    z = _as_complex(x)
    check_power_of_two(z.shape[-1])
    dtype = x.re.dtype if isinstance(x, ComplexTensor) else x.dtype
    return ComplexTensor.from_complex(fft_array(z, direction), dtype=dtype)


def fft2d(x, direction: str = "forward") -> ComplexTensor:
    """
    2d fast Fourier transform of the last two axes: row-wise, then column-wise.
    """
    z = _as_complex(x)
    if z.ndim < 2:
        raise UnsupportedSizeError(f"fft2d needs at least two axes, got shape {list(z.shape)}")
    dtype = x.re.dtype if isinstance(x, ComplexTensor) else x.dtype
    return ComplexTensor.from_complex(fft2d_array(z, direction), dtype=dtype)

"""
Dense real and complex tensors. A Tensor is an immutable wrapper around a
row-major numpy array in channel-first layout. There is no broadcasting:
every binary operation requires identical shapes.
"""

from typing import Optional, Sequence

import numpy as np

from .errors import ShapeError
from .settings import settings
from .types import Array, ArrayLike, ComplexArray, Shape, ShapeLike


def as_shape(shape: ShapeLike) -> Shape:
    """Validate a shape: non-empty, every dimension at least 1"""
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ShapeError("A tensor needs at least one dimension, got shape ()")
    if any(s < 1 for s in shape):
        raise ShapeError(f"All tensor dimensions must be >= 1, got shape {shape}")
    return shape


class Tensor():
    """
    Dense n-dimensional real array. The payload is stored read-only, so a Tensor
    can be shared between threads without copying.
    """

    __slots__ = ("data",)

    def __init__(self, data: ArrayLike, dtype=None) -> None:
        arr = np.array(data, dtype=dtype or settings.dtype, order="C")
        as_shape(arr.shape)
        arr.flags.writeable = False
        #: the read-only, row-major payload
        self.data: Array = arr

    @classmethod
    def wrap(cls, arr: Array) -> "Tensor":
        """Wrap an array that nobody else holds a reference to, without copying"""
        if arr.dtype.kind != "f" or not arr.flags.c_contiguous:
            return cls(arr)
        as_shape(arr.shape)
        t = cls.__new__(cls)
        arr.flags.writeable = False
        t.data = arr
        return t

    @property
    def shape(self) -> Shape:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> Array:
        """a writable copy of the payload"""
        return self.data.copy()

    def item(self) -> float:
        """the value of a single-element tensor"""
        if self.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __len__(self) -> int:
        return self.shape[0]

    def __repr__(self) -> str:
        return f"Tensor(shape={list(self.shape)}, dtype={self.dtype.name})"


class ComplexTensor():
    """
    A complex array stored as separate real and imaginary parts of equal shape.
    This is the value type of spectra.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: ArrayLike, im: Optional[ArrayLike] = None, dtype=None) -> None:
        dtype = dtype or settings.dtype
        re = np.array(re, dtype=dtype, order="C")
        im = np.zeros_like(re) if im is None else np.array(im, dtype=dtype, order="C")
        as_shape(re.shape)
        if re.shape != im.shape:
            raise ShapeError(f"Real part {re.shape} and imaginary part {im.shape} differ in shape")
        re.flags.writeable = False
        im.flags.writeable = False
        #: real part
        self.re: Array = re
        #: imaginary part
        self.im: Array = im

    @classmethod
    def from_complex(cls, z: ComplexArray, dtype=None) -> "ComplexTensor":
        """Split a numpy complex array into real and imaginary parts"""
        z = np.asarray(z)
        return cls(z.real, z.imag, dtype=dtype)

    @classmethod
    def from_real(cls, x: Tensor) -> "ComplexTensor":
        return cls(x.data, None, dtype=x.dtype)

    @property
    def values(self) -> ComplexArray:
        """the numpy complex representation"""
        return self.re + 1j * self.im

    @property
    def shape(self) -> Shape:
        return self.re.shape

    def real(self) -> Tensor:
        return Tensor(self.re, dtype=self.re.dtype)

    def __repr__(self) -> str:
        return f"ComplexTensor(shape={list(self.shape)}, dtype={self.re.dtype.name})"


def zeros(shape: ShapeLike) -> Tensor:
    return Tensor.wrap(np.zeros(as_shape(shape), dtype=settings.dtype))


def ones(shape: ShapeLike) -> Tensor:
    return Tensor.wrap(np.ones(as_shape(shape), dtype=settings.dtype))


def check_same_shape(a, b, what: str = "operands") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch of {what}: {list(a.shape)} vs. {list(b.shape)}")


_ELEMENTWISE = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def elementwise(a: Tensor, b: Tensor, op: str) -> Tensor:
    """out[i] = a[i] op b[i], op one of 'add', 'sub', 'mul'"""
    if op not in _ELEMENTWISE:
        raise ValueError(f"Unknown elementwise op '{op}', expected one of {sorted(_ELEMENTWISE)}")
    check_same_shape(a, b, f"elementwise {op}")
    return Tensor.wrap(_ELEMENTWISE[op](a.data, b.data))


def add(a: Tensor, b: Tensor) -> Tensor:
    return elementwise(a, b, "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    return elementwise(a, b, "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    return elementwise(a, b, "mul")


def complex_hadamard(a: ComplexTensor, b: ComplexTensor) -> ComplexTensor:
    """Elementwise complex product"""
    check_same_shape(a, b, "complex Hadamard product")
    re = a.re * b.re - a.im * b.im
    im = a.re * b.im + a.im * b.re
    return ComplexTensor(re, im, dtype=re.dtype)


def pad2d_zero(x: Tensor, target_h: int, target_w: int) -> Tensor:
    """
    Zero-pad the last two axes of x to target_h x target_w.
    The input is anchored in the top-left corner.
    """
    if x.ndim < 2:
        raise ShapeError(f"pad2d_zero needs at least 2 dimensions, got shape {list(x.shape)}")
    h, w = x.shape[-2:]
    if target_h < h or target_w < w:
        raise ValueError(f"Cannot pad {h}x{w} to the smaller size {target_h}x{target_w}")
    out = np.zeros(x.shape[:-2] + (target_h, target_w), dtype=x.dtype)
    out[..., :h, :w] = x.data
    return Tensor.wrap(out)


def crop2d(x: Tensor, h: int, w: int) -> Tensor:
    """Keep the top-left h x w region of the last two axes"""
    if x.ndim < 2 or h > x.shape[-2] or w > x.shape[-1]:
        raise ValueError(f"Cannot crop shape {list(x.shape)} to {h}x{w}")
    return Tensor(x.data[..., :h, :w], dtype=x.dtype)


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    """Stack [c1,h,w] and [c2,h,w] into [c1+c2,h,w]"""
    if a.ndim != 3 or b.ndim != 3 or a.shape[1:] != b.shape[1:]:
        raise ShapeError(f"Cannot concatenate channels of {list(a.shape)} and {list(b.shape)}")
    return Tensor.wrap(np.concatenate([a.data, b.data], axis=0))


def slice_channels(x: Tensor, start: int, stop: int) -> Tensor:
    """The channels start..stop-1 of a [c,h,w] tensor"""
    if not 0 <= start < stop <= x.shape[0]:
        raise ValueError(f"Invalid channel range {start}..{stop} for {x.shape[0]} channels")
    return Tensor(x.data[start:stop], dtype=x.dtype)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of [m,k] and [k,n]"""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"Cannot multiply matrices of shape {list(a.shape)} and {list(b.shape)}")
    return Tensor.wrap(np.ascontiguousarray(a.data @ b.data))


def reshape(x: Tensor, shape: ShapeLike) -> Tensor:
    shape = as_shape(shape)
    if int(np.prod(shape)) != x.size:
        raise ShapeError(f"Cannot reshape {list(x.shape)} into {list(shape)}")
    return Tensor(x.data.reshape(shape), dtype=x.dtype)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack equally shaped tensors along a new leading axis"""
    if len(tensors) == 0:
        raise ValueError("Cannot stack an empty list of tensors")
    for t in tensors[1:]:
        check_same_shape(tensors[0], t, "stacked tensors")
    return Tensor.wrap(np.stack([t.data for t in tensors]))

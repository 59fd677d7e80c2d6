"""
Binary tensor records ("FRTN"): a little-endian header
{magic, version u32, rank u32, dims u32 x rank, dtype u8} followed by the raw
row-major payload. Checkpoints and datasets are sequences of such records.
"""

import struct
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

import numpy as np

from .errors import FormatError, IntegrityError
from .tensor import Tensor

MAGIC = b"FRTN"
VERSION = 1

# dtype codes of the header
DTYPE_CODES = {0: np.dtype("<f8"), 1: np.dtype("<f4")}
CODES = {np.dtype(np.float64): 0, np.dtype(np.float32): 1}

PathLike = Union[str, Path]


def _source(stream: BinaryIO) -> str:
    """the file name of a stream, for error messages"""
    return str(getattr(stream, "name", "<stream>"))


def _read_exact(stream: BinaryIO, n: int, what: str, label: str) -> bytes:
    buf = stream.read(n)
    if len(buf) != n:
        raise IntegrityError(f"Truncated tensor record{label} in '{_source(stream)}': "
                             f"expected {n} bytes of {what}, got {len(buf)}")
    return buf


def write_tensor(stream: BinaryIO, t: Tensor) -> int:
    """Append a tensor record to a binary stream, returns the number of bytes written"""
    code = CODES.get(t.dtype)
    if code is None:
        raise ValueError(f"Cannot serialize dtype {t.dtype}")
    header = MAGIC + struct.pack(f"<II{t.ndim}IB", VERSION, t.ndim, *t.shape, code)
    payload = t.data.astype(DTYPE_CODES[code], copy=False).tobytes(order="C")
    stream.write(header)
    stream.write(payload)
    return len(header) + len(payload)


def read_tensor(stream: BinaryIO, label: Optional[str] = None) -> Optional[Tensor]:
    """
    Read the next tensor record of a stream.
    Returns None at a clean end of the stream. Errors name the stream's file and,
    if given, the label of the record (e.g. "image 3").
    """
    label = f" ({label})" if label else ""
    magic = stream.read(4)
    if len(magic) == 0:
        return None
    if magic != MAGIC:
        raise FormatError(f"Bad tensor magic {magic!r}{label} in '{_source(stream)}', expected {MAGIC!r}")
    version, rank = struct.unpack("<II", _read_exact(stream, 8, "header", label))
    if version != VERSION:
        raise FormatError(f"Unsupported tensor record version {version}, expected {VERSION}")
    if rank == 0:
        raise FormatError("Tensor record of rank 0")
    dims = struct.unpack(f"<{rank}I", _read_exact(stream, 4 * rank, "dimensions", label))
    (code,) = struct.unpack("<B", _read_exact(stream, 1, "dtype", label))
    if code not in DTYPE_CODES:
        raise FormatError(f"Unknown dtype code {code} in tensor record")
    dtype = DTYPE_CODES[code]
    count = int(np.prod(dims))
    payload = _read_exact(stream, count * dtype.itemsize, "payload", label)
    arr = np.frombuffer(payload, dtype=dtype).reshape(dims)
    return Tensor(arr, dtype=dtype.newbyteorder("="))


def iter_tensors(stream: BinaryIO) -> Iterator[Tensor]:
    """Yield all tensor records of a stream in stored order"""
    while True:
        t = read_tensor(stream)
        if t is None:
            return
        yield t


def save_tensor(path: PathLike, t: Tensor) -> None:
    with open(path, "wb") as f:
        write_tensor(f, t)


def load_tensor(path: PathLike) -> Tensor:
    """Load a file holding exactly one tensor record"""
    with open(path, "rb") as f:
        t = read_tensor(f)
        if t is None:
            raise IntegrityError(f"'{path}' holds no tensor record")
        if f.read(1):
            raise IntegrityError(f"'{path}' holds trailing data after its tensor record")
    return t

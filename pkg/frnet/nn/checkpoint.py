"""
Checkpoint files ("FRCK"): magic, version u32, the model configuration as INI text,
a manifest of (name, shape, offset) per parameter and the parameter values as
tensor records, in manifest order. Offsets count from the first record.
"""

import struct
from pathlib import Path
from typing import BinaryIO, List, Optional, Tuple, Union

from ..core.errors import FormatError, IntegrityError
from ..core.serialization import read_tensor, write_tensor
from ..core.settings import log
from .model import FrNet, ModelConfig

MAGIC = b"FRCK"
VERSION = 1

PathLike = Union[str, Path]
ManifestEntry = Tuple[str, Tuple[int, ...], int]


def _record_size(shape: Tuple[int, ...], itemsize: int) -> int:
    n = 1
    for s in shape:
        n *= s
    return 4 + 8 + 4 * len(shape) + 1 + n * itemsize


def _read_exact(f: BinaryIO, n: int, path: PathLike) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise IntegrityError(f"Checkpoint '{path}' is truncated")
    return buf


def save_checkpoint(path: PathLike, model: FrNet) -> None:
    """write the configuration and all parameters of a model"""
    params = list(model.named_parameters())
    manifest: List[ManifestEntry] = []
    offset = 0
    for name, p in params:
        manifest.append((name, tuple(p.shape), offset))
        offset += _record_size(p.shape, p.value.dtype.itemsize)
    config = model.config.to_ini().encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC + struct.pack("<II", VERSION, len(config)))
        f.write(config)
        f.write(struct.pack("<I", len(manifest)))
        for name, shape, off in manifest:
            encoded = name.encode("utf-8")
            f.write(struct.pack(f"<H{len(encoded)}sI{len(shape)}IQ", len(encoded), encoded,
                                len(shape), *shape, off))
        for _, p in params:
            write_tensor(f, p.value)
    log(f"saved checkpoint '{path}' ({len(params)} tensors)")


def read_manifest(f: BinaryIO, path: PathLike) -> Tuple[ModelConfig, List[ManifestEntry]]:
    magic = f.read(4)
    if magic != MAGIC:
        raise FormatError(f"'{path}' is not a checkpoint (magic {magic!r})")
    version, n = struct.unpack("<II", _read_exact(f, 8, path))
    if version != VERSION:
        raise FormatError(f"Unsupported checkpoint version {version} in '{path}'")
    config = ModelConfig.from_ini(_read_exact(f, n, path).decode("utf-8"), source=str(path))
    (count,) = struct.unpack("<I", _read_exact(f, 4, path))
    manifest = []
    for _ in range(count):
        (length,) = struct.unpack("<H", _read_exact(f, 2, path))
        name = _read_exact(f, length, path).decode("utf-8")
        (rank,) = struct.unpack("<I", _read_exact(f, 4, path))
        shape = struct.unpack(f"<{rank}I", _read_exact(f, 4 * rank, path))
        (offset,) = struct.unpack("<Q", _read_exact(f, 8, path))
        manifest.append((name, tuple(shape), offset))
    return config, manifest


def load_checkpoint(path: PathLike, config: Optional[ModelConfig] = None) -> FrNet:
    """
    Rebuild the model stored in a checkpoint. If a configuration is given, it must
    equal the stored one.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Checkpoint '{path}' does not exist")
    with open(path, "rb") as f:
        stored, manifest = read_manifest(f, path)
        if config is not None and config != stored:
            raise FormatError(f"Checkpoint '{path}' was written for a different model configuration")
        model = FrNet(stored)
        expected = [(name, tuple(p.shape)) for name, p in model.named_parameters()]
        if [(name, shape) for name, shape, _ in manifest] != expected:
            raise FormatError(f"The parameters of checkpoint '{path}' do not match its configuration")
        params = dict(model.named_parameters())
        # records follow the manifest back to back; offsets count from the first record
        start = f.tell()
        for name, shape, offset in manifest:
            if f.tell() - start != offset:
                raise IntegrityError(f"Parameter '{name}' of '{path}' starts at byte {f.tell() - start} "
                                     f"of the records, the manifest says {offset}")
            t = read_tensor(f, label=f"parameter '{name}'")
            if t is None:
                raise IntegrityError(f"Checkpoint '{path}' is truncated at parameter '{name}'")
            if tuple(t.shape) != shape:
                raise FormatError(f"Parameter '{name}' of '{path}' has shape {list(t.shape)}, "
                                  f"expected {list(shape)}")
            params[name].assign(t)
        if f.read(1):
            raise IntegrityError(f"Checkpoint '{path}' has trailing data")
    log(f"loaded checkpoint '{path}'")
    return model

"""
On-disk synthetic datasets: a directory with manifest.ini, labels.csv
(index,pitch_rad,yaw_rad) and images.frtn (one tensor record per sample, in
CSV order).
"""

import configparser
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np

from ..core.errors import FormatError, IntegrityError
from ..core.serialization import read_tensor, write_tensor
from ..core.settings import log, settings
from ..metrics.gaze import GazeAngles
from .synthetic import SyntheticSample, check_size, render_sample

PathLike = Union[str, Path]

MANIFEST_FILE = "manifest.ini"
LABELS_FILE = "labels.csv"
IMAGES_FILE = "images.frtn"
CSV_HEADER = ["index", "pitch_rad", "yaw_rad"]

DEFAULT_PITCH_RANGE = (-0.4, 0.4)
DEFAULT_YAW_RANGE = (-0.6, 0.6)


@dataclass(frozen=True)
class DatasetManifest:
    """description of a dataset directory"""
    #: number of samples
    count: int
    #: side length of the square images
    image_size: int
    #: the label CSV
    labels_path: Path
    #: the tensor blob
    images_path: Path
    #: generator seed
    seed: int = 0
    pitch_range: Tuple[float, float] = DEFAULT_PITCH_RANGE
    yaw_range: Tuple[float, float] = DEFAULT_YAW_RANGE

    def save(self, path: PathLike) -> None:
        parser = configparser.ConfigParser()
        parser["dataset"] = {
            "count": str(self.count),
            "image_size": str(self.image_size),
            "labels": self.labels_path.name,
            "images": self.images_path.name,
            "seed": str(self.seed),
            "pitch_range": ", ".join(repr(v) for v in self.pitch_range),
            "yaw_range": ", ".join(repr(v) for v in self.yaw_range),
        }
        with open(path, "w") as f:
            parser.write(f)

    @classmethod
    def load(cls, path: PathLike) -> "DatasetManifest":
        """read a manifest file, or the manifest of a dataset directory"""
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_FILE
        if not path.is_file():
            raise FileNotFoundError(f"Dataset manifest '{path}' does not exist")
        parser = configparser.ConfigParser()
        try:
            parser.read(path)
            section = parser["dataset"]
            base = path.parent
            return cls(count=section.getint("count"),
                       image_size=section.getint("image_size"),
                       labels_path=base / section["labels"],
                       images_path=base / section["images"],
                       seed=section.getint("seed", 0),
                       pitch_range=tuple(float(v) for v in section["pitch_range"].split(",")),
                       yaw_range=tuple(float(v) for v in section["yaw_range"].split(",")))
        except (configparser.Error, KeyError, ValueError) as e:
            raise FormatError(f"Invalid dataset manifest '{path}': {e}") from None


def _check_range(name: str, r: Tuple[float, float], low: float, high: float) -> None:
    if len(r) != 2 or not low <= r[0] <= r[1] <= high:
        raise ValueError(f"Invalid {name} range {r}, must be ordered and within [{low:.4f}, {high:.4f}]")


def generate_dataset(out_dir: PathLike, n: int, size: int = 64, seed: int = 0,
                     pitch_range: Tuple[float, float] = DEFAULT_PITCH_RANGE,
                     yaw_range: Tuple[float, float] = DEFAULT_YAW_RANGE) -> DatasetManifest:
    """
    Draw n labels uniformly from the angle ranges, render them and write the
    dataset directory. Everything is a function of the arguments and the seed.
    """
    if n < 1:
        raise ValueError(f"A dataset needs at least one sample, got n={n}")
    check_size(size)
    _check_range("pitch", pitch_range, -np.pi / 2, np.pi / 2)
    _check_range("yaw", yaw_range, -np.pi + 1e-12, np.pi)
    rng = np.random.default_rng(seed)
    pitches = rng.uniform(pitch_range[0], pitch_range[1], size=n)
    yaws = rng.uniform(yaw_range[0], yaw_range[1], size=n)
    sample_seeds = rng.integers(0, 2 ** 31 - 1, size=n)
    labels = [GazeAngles(float(p), float(y)) for p, y in zip(pitches, yaws)]

    def render(i: int) -> SyntheticSample:
        return render_sample(labels[i], size, int(sample_seeds[i]))

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            samples = list(pool.map(render, range(n)))
    else:
        samples = [render(i) for i in range(n)]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(n, size, out_dir / LABELS_FILE, out_dir / IMAGES_FILE, seed,
                               tuple(pitch_range), tuple(yaw_range))
    with open(manifest.labels_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for i, label in enumerate(labels):
            writer.writerow([i, f"{label.pitch:.17g}", f"{label.yaw:.17g}"])
    with open(manifest.images_path, "wb") as f:
        for sample in samples:
            write_tensor(f, sample.image)
    manifest.save(out_dir / MANIFEST_FILE)
    log(f"wrote {n} samples of size {size} to '{out_dir}'")
    return manifest


def read_labels(path: PathLike) -> List[GazeAngles]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise FormatError(f"'{path}' has the header {header}, expected {CSV_HEADER}")
        labels = []
        for row in reader:
            if len(row) != 3 or int(row[0]) != len(labels):
                raise FormatError(f"Malformed row {row} in '{path}'")
            labels.append(GazeAngles(float(row[1]), float(row[2])))
    return labels


def load_dataset(manifest: Union[DatasetManifest, PathLike]) -> Iterator[SyntheticSample]:
    """
    Yield the samples of a dataset in stored order. The image blob must hold
    exactly one record per CSV row.
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)
    labels = read_labels(manifest.labels_path)
    if len(labels) != manifest.count:
        raise IntegrityError(f"'{manifest.labels_path}' has {len(labels)} rows, "
                             f"the manifest announces {manifest.count}")
    shape = (3, manifest.image_size, manifest.image_size)
    with open(manifest.images_path, "rb") as f:
        for i, label in enumerate(labels):
            image = read_tensor(f, label=f"image {i}")
            if image is None:
                raise IntegrityError(f"'{manifest.images_path}' ends after {i} of {manifest.count} images")
            if tuple(image.shape) != shape:
                raise FormatError(f"Image {i} of '{manifest.images_path}' has shape {list(image.shape)}, "
                                  f"expected {list(shape)}")
            yield SyntheticSample(image, label)
        if f.read(1):
            raise IntegrityError(f"'{manifest.images_path}' holds more than {manifest.count} images")

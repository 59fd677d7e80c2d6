"""
Rendering of stylized eye images whose gaze label is recoverable from the
geometry: two sclera ellipses, each with a dark iris disk displaced by
(k * yaw, k * pitch) pixels, k = size / 8.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..core.tensor import Tensor
from ..fft.plan import is_power_of_two
from ..metrics.gaze import GazeAngles

SKIN = np.array([0.85, 0.65, 0.55])
SCLERA = np.array([0.95, 0.95, 0.95])
IRIS = np.array([0.10, 0.10, 0.15])

# eye centers and semi-axes, iris radius, all relative to the image size
EYE_CENTERS = ((0.3, 0.4), (0.7, 0.4))
EYE_AXES = (0.17, 0.14)
IRIS_RADIUS = 0.04

NOISE_SIGMA = 0.05
BRIGHTNESS_JITTER = (0.9, 1.1)


@dataclass(frozen=True)
class SyntheticSample:
    """an image [3,s,s] with values in [0,1] and its gaze label"""
    image: Tensor
    label: GazeAngles

    @property
    def target(self) -> np.ndarray:
        """the regression target [yaw, pitch]"""
        return np.array([self.label.yaw, self.label.pitch])


def pixels_per_radian(size: int) -> float:
    return size / 8


def check_size(size: int) -> None:
    if not is_power_of_two(size) or size < 32:
        raise ValueError(f"Image size must be a power of two >= 32, got {size}")


def _pixel_grid(size: int) -> Tuple[np.ndarray, np.ndarray]:
    # pixel centers
    c = np.arange(size) + 0.5
    return np.meshgrid(c, c, indexing="ij")


def _ellipse_coverage(yy, xx, cy, cx, ay, ax) -> np.ndarray:
    """anti-aliased coverage of an ellipse with a soft edge of one pixel"""
    r = np.sqrt(((xx - cx) / ax) ** 2 + ((yy - cy) / ay) ** 2)
    dist = (r - 1.) * min(ax, ay)
    return np.clip(0.5 - dist, 0., 1.)


def iris_centers(label: GazeAngles, size: int):
    """(row, column) pixel position of both iris centers"""
    k = pixels_per_radian(size)
    return [(cy * size + k * label.pitch, cx * size + k * label.yaw) for cx, cy in EYE_CENTERS]


def render_sample(label: GazeAngles, size: int = 64, seed: int = 0, clean: bool = False) -> SyntheticSample:
    """
    Render the eye image of a gaze label. Unless clean, a seeded global brightness
    jitter and Gaussian pixel noise are applied.
    """
    check_size(size)
    label.check()
    yy, xx = _pixel_grid(size)
    img = np.broadcast_to(SKIN[:, None, None], (3, size, size)).copy()
    for (cx, cy), (icy, icx) in zip(EYE_CENTERS, iris_centers(label, size)):
        sclera = _ellipse_coverage(yy, xx, cy * size, cx * size, EYE_AXES[1] * size, EYE_AXES[0] * size)
        r = IRIS_RADIUS * size
        iris = _ellipse_coverage(yy, xx, icy, icx, r, r) * sclera
        img = img * (1. - sclera) + SCLERA[:, None, None] * sclera
        img = img * (1. - iris) + IRIS[:, None, None] * iris
    if not clean:
        rng = np.random.default_rng(seed)
        img = img * rng.uniform(*BRIGHTNESS_JITTER)
        img = img + rng.normal(0., NOISE_SIGMA, size=img.shape)
    return SyntheticSample(Tensor(np.clip(img, 0., 1.)), label)


def estimate_label(image: Tensor) -> GazeAngles:
    """
    Closed-form label estimate: the darkness-weighted centroid of the iris in each
    eye, inverted through the rendering geometry and averaged over both eyes.
    """
    size = image.shape[-1]
    check_size(size)
    gray = image.data.mean(axis=0)
    yy, xx = _pixel_grid(size)
    k = pixels_per_radian(size)
    offsets = []
    for cx, cy in EYE_CENTERS:
        cx, cy = cx * size, cy * size
        inner = np.sqrt(((xx - cx) / (EYE_AXES[0] * size)) ** 2 + ((yy - cy) / (EYE_AXES[1] * size)) ** 2) < 0.9
        level = np.percentile(gray[inner], 90)
        dark = inner & (gray < 0.5 * (level + IRIS.mean()))
        labels, n = ndimage.label(dark)
        if n == 0:
            offsets.append((0., 0.))
            continue
        sizes = ndimage.sum(dark, labels, index=np.arange(1, n + 1))
        iris = ndimage.binary_dilation(labels == 1 + int(np.argmax(sizes))) & inner
        weights = np.clip(level - gray, 0., None) * iris
        row, col = ndimage.center_of_mass(weights)
        offsets.append((row + 0.5 - cy, col + 0.5 - cx))
    dy, dx = np.mean(offsets, axis=0)
    return GazeAngles.canonical(dy / k, dx / k)

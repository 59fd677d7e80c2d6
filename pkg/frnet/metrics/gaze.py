"""
Gaze directions and the angular error. The camera looks along +z; a gaze
straight at the camera is (0, 0, -1).
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class GazeAngles:
    """gaze direction as pitch in [-pi/2, pi/2] and yaw in (-pi, pi], radians"""
    pitch: float
    yaw: float

    def check(self) -> "GazeAngles":
        if not -math.pi / 2 <= self.pitch <= math.pi / 2:
            raise ValueError(f"Pitch {self.pitch} outside of [-pi/2, pi/2]")
        if not -math.pi < self.yaw <= math.pi:
            raise ValueError(f"Yaw {self.yaw} outside of (-pi, pi]")
        return self

    @classmethod
    def canonical(cls, pitch: float, yaw: float) -> "GazeAngles":
        """clip the pitch and wrap the yaw of an unconstrained prediction into range"""
        pitch = min(max(float(pitch), -math.pi / 2), math.pi / 2)
        yaw = math.pi - math.fmod(math.pi - float(yaw), 2 * math.pi)
        if yaw > math.pi:
            yaw -= 2 * math.pi
        return cls(pitch, yaw)

    @property
    def degrees(self) -> Tuple[float, float]:
        """(pitch, yaw) in degrees"""
        return math.degrees(self.pitch), math.degrees(self.yaw)


@dataclass(frozen=True)
class GazeVector:
    """3d gaze direction"""
    x: float
    y: float
    z: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "GazeVector":
        n = self.norm
        if n == 0:
            raise ValueError("Cannot normalize a zero gaze vector")
        return GazeVector(self.x / n, self.y / n, self.z / n)


def angles_to_vector(a: GazeAngles) -> GazeVector:
    """g = (-cos(pitch) sin(yaw), -sin(pitch), -cos(pitch) cos(yaw))"""
    a.check()
    cp = math.cos(a.pitch)
    return GazeVector(-cp * math.sin(a.yaw), -math.sin(a.pitch), -cp * math.cos(a.yaw)).normalized()


def angular_error(g, g_hat) -> float:
    """angle between two (not necessarily unit) gaze vectors, in degrees"""
    u = np.asarray(g, dtype=np.float64)
    v = np.asarray(g_hat, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("The angular error is undefined for zero gaze vectors")
    cos = float(np.dot(u, v)) / (nu * nv)
    return math.degrees(math.acos(min(1., max(-1., cos))))


def mean_angular_error(pred_angles: Sequence[GazeAngles], true_angles: Sequence[GazeAngles]) -> float:
    """mean angular error in degrees over pairs of gaze angles"""
    if len(pred_angles) != len(true_angles):
        raise ValueError(f"Got {len(pred_angles)} predictions for {len(true_angles)} labels")
    if len(pred_angles) == 0:
        raise ValueError("The mean angular error of zero samples is undefined")
    errors = [angular_error(angles_to_vector(p), angles_to_vector(t))
              for p, t in zip(pred_angles, true_angles)]
    return float(np.mean(errors))

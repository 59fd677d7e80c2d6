import os
import sys

import numpy as np


def threads_from_env(value) -> int:
    """the worker thread count of an FRNET_THREADS value; unset or invalid values give 1"""
    if not value:
        return 1
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads < 1:
        print(f"Warning: ignoring FRNET_THREADS={value!r}, expected a positive integer", file=sys.stderr)
        return 1
    return threads


class Settings():
    """
    Global switches of frnet: numerical precision, worker threads and verbosity.
    There is a single instance of this class, frnet.core.settings.settings.
    """

    def __init__(self) -> None:
        #: element precision of newly created tensors: "f64" (verification) or "f32" (benchmarks)
        self.precision = "f64"
        #: number of worker threads for per-sample / per-channel work,
        #: defaults to the FRNET_THREADS environment variable
        self.threads = threads_from_env(os.environ.get("FRNET_THREADS"))
        #: whether log() prints anything
        self.verbose = False

    @property
    def dtype(self) -> np.dtype:
        """the numpy dtype that corresponds to the precision switch"""
        if self.precision == "f64":
            return np.dtype(np.float64)
        if self.precision == "f32":
            return np.dtype(np.float32)
        raise ValueError(f"Unknown precision '{self.precision}', expected 'f64' or 'f32'")

    def __repr__(self) -> str:
        return f"Settings(precision={self.precision!r}, threads={self.threads}, verbose={self.verbose})"


#: the global settings object
settings = Settings()


def log(*args) -> None:
    """print() wrapper that only prints in verbose mode"""
    if settings.verbose:
        print(*args)


def warn(*args) -> None:
    """print a warning, regardless of the verbosity"""
    print("Warning:", *args)

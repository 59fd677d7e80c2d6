"""
Wall-clock benchmarks: scaling of spectral against direct circular convolution,
and single-image inference latency. Benchmarks run single-threaded.
"""

import csv
import io
import os
import platform
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.settings import settings
from ..core.tensor import Tensor
from ..fft.plan import check_power_of_two
from ..fft.spectral import spectral_conv2d

OPS = ("spectral_conv", "direct_conv")


def hardware_descriptor() -> str:
    return (f"{platform.machine()} {platform.processor() or 'cpu'}, {os.cpu_count()} cores, "
            f"{platform.system()} {platform.release()}, python {platform.python_version()}, "
            f"numpy {np.__version__}")


def direct_circular_conv2d(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """
    Circular convolution y[i,j] = sum_ab k[a,b] x[(i-a)%h, (j-b)%w] with the kernel
    anchored at (0, 0), computed row by row in O(h w kh kw).
    """
    h, w = x.shape
    kh, kw = k.shape
    if kh * kw <= 64:
        y = np.zeros_like(x)
        for a in range(kh):
            for b in range(kw):
                y += k[a, b] * np.roll(x, (a, b), axis=(0, 1))
        return y
    y = np.empty_like(x)
    kflip = k[:, ::-1]
    rows_a = np.arange(kh)
    for i in range(h):
        r = x[(i - rows_a) % h]
        # window s of column j holds r[:, (j + s + 1 - kw) % w]
        rw = np.concatenate([r[:, w - kw + 1:], r], axis=1) if kw > 1 else r
        win = sliding_window_view(rw, kw, axis=1)
        y[i] = np.tensordot(win, kflip, axes=([0, 2], [0, 1]))
    return y


def _kernel_size(size: int, kernel_policy: Union[str, int]) -> int:
    if kernel_policy == "full":
        return size
    k = int(kernel_policy)
    if not 1 <= k <= size:
        raise ValueError(f"Kernel size {k} does not fit the input size {size}")
    return k


def _median_time(fn: Callable[[], object], repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


@dataclass
class ScalingRow:
    op: str
    size: int
    kernel: int
    median_seconds: float
    #: median time relative to the previous (half) size
    ratio: Optional[float] = None


@dataclass
class ScalingReport:
    rows: List[ScalingRow] = field(default_factory=list)
    hardware: str = ""

    def times(self, op: str) -> List[Tuple[int, float]]:
        return [(r.size, r.median_seconds) for r in self.rows if r.op == op]

    def ratios(self, op: str) -> List[Tuple[int, float]]:
        """(size, time(size) / time(size / 2)) for consecutive doubled sizes"""
        return [(r.size, r.ratio) for r in self.rows if r.op == op and r.ratio is not None]

    def crossover(self) -> Optional[int]:
        """the smallest size from which on the spectral path is faster than the direct one"""
        spectral = dict(self.times("spectral_conv"))
        direct = dict(self.times("direct_conv"))
        sizes = sorted(set(spectral) & set(direct))
        result = None
        for n in reversed(sizes):
            if spectral[n] < direct[n]:
                result = n
            else:
                break
        return result

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["op", "size", "kernel", "median_seconds", "ratio"])
        for r in self.rows:
            writer.writerow([r.op, r.size, r.kernel, f"{r.median_seconds:.6e}",
                             "" if r.ratio is None else f"{r.ratio:.3f}"])
        return buf.getvalue()

    def plot(self, ax) -> None:
        """log-log plot of the median times into a matplotlib axes object"""
        for op, marker in zip(OPS, "os"):
            data = self.times(op)
            if data:
                ax.loglog(*zip(*data), marker + "-", base=2, label=op)
        ax.set_xlabel("input size N (N x N)")
        ax.set_ylabel("median time [s]")
        ax.legend()


def bench_scaling(op: str, sizes: Sequence[int], kernel_policy: Union[str, int] = "full",
                  repeats: int = 5, seed: int = 0) -> ScalingReport:
    """median wall time of spectral or direct circular convolution of random N x N inputs"""
    if op not in OPS:
        raise ValueError(f"Unknown benchmark op '{op}', expected one of {OPS}")
    if repeats < 5:
        raise ValueError(f"At least 5 repeats are needed, got {repeats}")
    rng = np.random.default_rng(seed)
    report = ScalingReport(hardware=hardware_descriptor())
    threads, settings.threads = settings.threads, 1
    try:
        previous = None
        for n in sizes:
            check_power_of_two(n, "benchmark size")
            k = _kernel_size(n, kernel_policy)
            x = rng.standard_normal((n, n))
            kernel = rng.standard_normal((k, k))
            if op == "spectral_conv":
                xt, kt = Tensor(x), Tensor(kernel)
                t = _median_time(lambda: spectral_conv2d(xt, kt), repeats)
            else:
                t = _median_time(lambda: direct_circular_conv2d(x, kernel), repeats)
            ratio = t / previous[1] if previous is not None and n == 2 * previous[0] else None
            report.rows.append(ScalingRow(op, n, k, t, ratio))
            previous = (n, t)
    finally:
        settings.threads = threads
    return report


@dataclass
class InferenceReport:
    median_ms: float
    repeats: int
    input_shape: Tuple[int, ...]
    hardware: str

    def __str__(self) -> str:
        return (f"median latency {self.median_ms:.2f} ms over {self.repeats} runs, "
                f"input {list(self.input_shape)}\nhardware: {self.hardware}")


def bench_inference(model, repeats: int = 10, warmup: int = 2, seed: int = 0) -> InferenceReport:
    """median single-image forward latency of a model, after warmup runs"""
    if repeats < 10:
        raise ValueError(f"At least 10 repeats are needed, got {repeats}")
    image = Tensor(np.random.default_rng(seed).uniform(0., 1., size=model.input_shape))
    threads, settings.threads = settings.threads, 1
    try:
        for _ in range(max(warmup, 1)):
            model.predict(image)
        t = _median_time(lambda: model.predict(image), repeats)
    finally:
        settings.threads = threads
    return InferenceReport(1e3 * t, repeats, tuple(model.input_shape), hardware_descriptor())

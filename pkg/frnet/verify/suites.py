"""
Named verification suites: each compares a fast path against an oracle or checks
a mathematical property, and reports one result per case.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..autodiff.gradcheck import check_gradients
from ..core.profiling import profile
from ..core.settings import log
from ..core.tensor import ComplexTensor, Tensor, matmul, pad2d_zero
from ..fft.plan import fft1d, fft2d
from ..fft.spectral import apply_mask, spectral_conv2d
from ..metrics.gaze import GazeAngles, angles_to_vector, angular_error
from ..nn import functional as F
from ..nn.blocks import FeedForward, FFTEncoder, FFTResidualBlock, InvertedResidualBlock
from . import oracles


@dataclass
class CaseResult:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        return f"  {'ok    ' if self.passed else 'FAILED'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class SuiteResult:
    name: str
    cases: List[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> List[CaseResult]:
        return [c for c in self.cases if not c.passed]

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {len(self.cases) - len(self.failures)}/{len(self.cases)} cases passed"


def _compare(name: str, actual, expected, tol: float) -> CaseResult:
    err = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected))))
    return CaseResult(name, err < tol, f"max abs. diff {err:.2e} (tol {tol:.0e})")


def _complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def fft_suite(rng: np.random.Generator, quick: bool = False) -> List[CaseResult]:
    cases = []
    max_exp = 6 if quick else 8
    cases.append(_compare("fft1d impulse", fft1d(ComplexTensor([1., 0., 0., 0.])).values, np.ones(4), 1e-12))
    cases.append(_compare("fft1d constant", fft1d(ComplexTensor([3.] * 4)).values, [12., 0., 0., 0.], 1e-12))
    for e in range(max_exp + 1):
        n = 2 ** e
        z = _complex(rng, n)
        cases.append(_compare(f"fft1d n={n} vs naive DFT", fft1d(ComplexTensor.from_complex(z)).values,
                              oracles.naive_dft(z), 1e-9))
        cases.append(_compare(f"inverse fft1d n={n} vs naive DFT",
                              fft1d(ComplexTensor.from_complex(z), "inverse").values,
                              oracles.naive_dft(z, inverse=True), 1e-9))
    delta = np.zeros((4, 4))
    delta[0, 0] = 1.
    cases.append(_compare("fft2d delta", fft2d(Tensor(delta)).values, np.ones((4, 4)), 1e-12))
    u, v = rng.standard_normal(8), rng.standard_normal(4)
    cases.append(_compare("fft2d separable", fft2d(Tensor(np.outer(u, v))).values,
                          np.outer(fft1d(Tensor(u)).values, fft1d(Tensor(v)).values), 1e-10))
    for h, w in [(1, 1), (2, 4), (4, 4), (8, 8), (8, 16), (16, 16), (32, 32)]:
        z = _complex(rng, (h, w))
        cases.append(_compare(f"fft2d {h}x{w} vs direct double sum",
                              fft2d(ComplexTensor.from_complex(z)).values, oracles.direct_dft2d(z), 1e-9))
    for n in [2 ** e for e in range(6, max_exp + 1)]:
        z = _complex(rng, (n, n))
        cases.append(_compare(f"fft2d {n}x{n} vs DFT matrices",
                              fft2d(ComplexTensor.from_complex(z)).values, oracles.matrix_dft2d(z), 1e-9))
    for e in range(max_exp + 1):
        n = 2 ** e
        for h, w in [(n, n), (n, max(n // 2, 1))]:
            x = rng.standard_normal((h, w))
            xh = fft2d(Tensor(x))
            cases.append(_compare(f"inverse(fft2d) {h}x{w}", fft2d(xh, "inverse").values, x, 1e-10))
            energy = np.sum(x ** 2)
            spectral = np.sum(np.abs(xh.values) ** 2) / (h * w)
            rel = abs(energy - spectral) / energy
            cases.append(CaseResult(f"Parseval {h}x{w}", rel < 1e-9, f"rel. diff {rel:.2e}"))
    x, y = _complex(rng, (32, 32)), _complex(rng, (32, 32))
    a, b = 1.5 - 0.5j, -0.25 + 2j
    lhs = fft2d(ComplexTensor.from_complex(a * x + b * y)).values
    rhs = a * fft2d(ComplexTensor.from_complex(x)).values + b * fft2d(ComplexTensor.from_complex(y)).values
    cases.append(_compare("fft2d linearity", lhs, rhs, 1e-10))
    return cases


def conv_suite(rng: np.random.Generator, quick: bool = False) -> List[CaseResult]:
    cases = []
    x = rng.standard_normal((16, 16))
    delta = np.zeros((3, 3))
    delta[0, 0] = 1.
    cases.append(_compare("spectral_conv2d delta kernel", spectral_conv2d(Tensor(x), Tensor(delta)).data, x, 1e-10))
    cases.append(_compare("spectral_conv2d scalar kernel",
                          spectral_conv2d(Tensor(x), Tensor([[2.5]])).data, 2.5 * x, 1e-10))
    n_cases = 20 if quick else 200
    worst = 0.
    worst_case = ""
    for i in range(n_cases):
        h, w = (int(s) for s in rng.choice([8, 16, 32, 64], size=2))
        kh, kw = int(rng.integers(1, h + 1)), int(rng.integers(1, w + 1))
        x = rng.standard_normal((h, w))
        k = rng.standard_normal((kh, kw))
        y = spectral_conv2d(Tensor(x), Tensor(k)).data
        err = float(np.max(np.abs(y - oracles.direct_circular_conv(x, k))))
        if i % 10 == 0:
            err = max(err, float(np.max(np.abs(y - oracles.folded_linear_conv(x, k)))))
        if err >= worst:
            worst, worst_case = err, f"{h}x{w} * {kh}x{kw}"
    cases.append(CaseResult(f"spectral_conv2d vs direct circular convolution ({n_cases} cases)",
                            worst < 1e-8, f"max abs. diff {worst:.2e} at {worst_case}"))

    x = rng.standard_normal((1, 8, 8))
    w = rng.standard_normal((1, 1, 3, 3))
    cases.append(_compare("conv2d 1x8x8 3x3 vs nested loops", F.conv2d(Tensor(x), Tensor(w)).data,
                          oracles.direct_conv2d(x, w, padding=1), 1e-12))
    x = rng.standard_normal((3, 8, 8))
    w = rng.standard_normal((4, 3, 3, 3))
    b = rng.standard_normal(4)
    cases.append(_compare("conv2d 3->4 stride 2 vs nested loops",
                          F.conv2d(Tensor(x), Tensor(w), Tensor(b), stride=2).data,
                          oracles.direct_conv2d(x, w, b, stride=2, padding=1), 1e-12))
    w = rng.standard_normal((5, 3, 1, 1))
    cases.append(_compare("pointwise_conv2d vs nested loops", F.pointwise_conv2d(Tensor(x), Tensor(w)).data,
                          oracles.direct_conv2d(x, w), 1e-12))
    eye = np.eye(3)[:, :, None, None]
    cases.append(_compare("conv2d 1x1 identity", F.conv2d(Tensor(x), Tensor(eye)).data, x, 0.))
    deltas = np.zeros((3, 3, 3))
    deltas[:, 1, 1] = 1.
    cases.append(_compare("depthwise_conv2d delta kernels", F.depthwise_conv2d(Tensor(x), Tensor(deltas)).data,
                          x, 0.))
    x = rng.standard_normal((2, 4, 4))
    dw = rng.standard_normal((2, 3, 3))
    pw = rng.standard_normal((3, 2, 1, 1))
    separable = F.pointwise_conv2d(F.depthwise_conv2d(Tensor(x), Tensor(dw)), Tensor(pw)).data
    cases.append(_compare("depthwise + pointwise vs grouped direct conv", separable,
                          oracles.direct_conv2d(x, oracles.separable_weight(dw, pw[:, :, 0, 0]), padding=1), 1e-12))
    a, m = rng.standard_normal((5, 4)), rng.standard_normal((4, 5))
    cases.append(_compare("matmul vs triple loop", matmul(Tensor(a), Tensor(m)).data,
                          oracles.naive_matmul(a, m), 1e-12))
    return cases


def mask_suite(rng: np.random.Generator, quick: bool = False) -> List[CaseResult]:
    cases = []
    x = rng.standard_normal((2, 8, 8))
    ones = ComplexTensor(np.ones(x.shape), np.zeros(x.shape))
    cases.append(_compare("apply_mask identity filter", apply_mask(Tensor(x), ones).data, x, 1e-10))
    zero = ComplexTensor(np.zeros(x.shape))
    cases.append(_compare("apply_mask zero filter", apply_mask(Tensor(x), zero).data, 0., 0.))
    n_cases = 10 if quick else 50
    worst = 0.
    for _ in range(n_cases):
        c = int(rng.integers(1, 4))
        h, w = (int(s) for s in rng.choice([8, 16, 32], size=2))
        x = rng.standard_normal((c, h, w))
        kernels = [rng.standard_normal((int(rng.integers(1, h + 1)), int(rng.integers(1, w + 1))))
                   for _ in range(c)]
        mask = np.stack([fft2d(pad2d_zero(Tensor(k), h, w)).values for k in kernels])
        y = apply_mask(Tensor(x), ComplexTensor.from_complex(mask)).data
        expected = np.stack([spectral_conv2d(Tensor(x[i]), Tensor(k)).data for i, k in enumerate(kernels)])
        worst = max(worst, float(np.max(np.abs(y - expected))))
    cases.append(CaseResult(f"apply_mask with FFT of padded kernel vs spectral_conv2d ({n_cases} cases)",
                            worst < 1e-9, f"max abs. diff {worst:.2e}"))
    return cases


def _grad_case(name: str, build, inputs: Dict[str, np.ndarray], parameters=(), seed: int = 0) -> CaseResult:
    results = check_gradients(build, inputs, parameters, n_coords=10, eps=1e-5, tol=1e-4, seed=seed)
    worst = max(results, key=lambda r: r.max_rel_error)
    return CaseResult(name, all(r.passed for r in results), str(worst))


def _op(name: str, *order: str, **attrs):
    def build(tape, ids):
        return tape.record(name, [ids[k] for k in order], **attrs)
    return build


def _module(module):
    def build(tape, ids):
        return module(tape, ids["x"])
    return build


def grad_suite(rng: np.random.Generator, quick: bool = False) -> List[CaseResult]:
    def r(*shape):
        return rng.standard_normal(shape)

    cases = [
        _grad_case("add", _op("add", "a", "b"), {"a": r(2, 3), "b": r(2, 3)}),
        _grad_case("sub", _op("sub", "a", "b"), {"a": r(2, 3), "b": r(2, 3)}),
        _grad_case("mul", _op("mul", "a", "b"), {"a": r(2, 3), "b": r(2, 3)}),
        _grad_case("scale", _op("scale", "a", factor=-1.75), {"a": r(5)}),
        _grad_case("sum", _op("sum", "a"), {"a": r(3, 4)}),
        _grad_case("mean", _op("mean", "a"), {"a": r(3, 4)}),
        _grad_case("conv2d 3x3", _op("conv2d", "x", "w", "b", stride=1, padding=1),
                   {"x": r(3, 6, 6), "w": r(4, 3, 3, 3), "b": r(4)}),
        _grad_case("conv2d 3x3 stride 2", _op("conv2d", "x", "w", "b", stride=2, padding=1),
                   {"x": r(2, 8, 8), "w": r(3, 2, 3, 3), "b": r(3)}),
        _grad_case("conv2d 1x1", _op("conv2d", "x", "w", "b"), {"x": r(3, 4, 4), "w": r(5, 3, 1, 1), "b": r(5)}),
        _grad_case("depthwise_conv2d", _op("depthwise_conv2d", "x", "w", "b", stride=1, padding=1),
                   {"x": r(3, 6, 6), "w": r(3, 3, 3), "b": r(3)}),
        _grad_case("depthwise_conv2d stride 2", _op("depthwise_conv2d", "x", "w", stride=2, padding=1),
                   {"x": r(2, 8, 8), "w": r(2, 3, 3)}),
        _grad_case("channel_affine", _op("channel_affine", "x", "g", "b"), {"x": r(3, 4, 4), "g": r(3), "b": r(3)}),
        _grad_case("layer_norm", _op("layer_norm", "x", "g", "b", eps=1e-5),
                   {"x": r(4, 3, 3), "g": r(4), "b": r(4)}),
        _grad_case("silu", _op("silu", "x"), {"x": r(3, 4, 4)}),
        _grad_case("global_avg_pool", _op("global_avg_pool", "x"), {"x": r(3, 4, 4)}),
        _grad_case("linear", _op("linear", "x", "w", "b"), {"x": r(6), "w": r(2, 6), "b": r(2)}),
        _grad_case("concat_channels", _op("concat_channels", "a", "b"), {"a": r(2, 4, 4), "b": r(3, 4, 4)}),
        _grad_case("apply_mask", _op("apply_mask", "x", "re", "im"),
                   {"x": r(2, 8, 8), "re": r(2, 8, 8), "im": r(2, 8, 8)}),
        _grad_case("apply_mask 4x16", _op("apply_mask", "x", "re", "im"),
                   {"x": r(1, 4, 16), "re": r(1, 4, 16), "im": r(1, 4, 16)}),
        _grad_case("smooth_l1", _op("smooth_l1", "p", "t", beta=1.), {"p": 2 * r(2), "t": r(2)}),
    ]
    seed = int(rng.integers(2 ** 31))
    irb = InvertedResidualBlock(4, 4, 1, 2, np.random.default_rng(seed))
    cases.append(_grad_case("inverted_residual_block", _module(irb), {"x": r(4, 8, 8)}, irb.parameters()))
    irb2 = InvertedResidualBlock(3, 5, 2, 2, np.random.default_rng(seed + 1))
    cases.append(_grad_case("inverted_residual_block stride 2", _module(irb2), {"x": r(3, 8, 8)}, irb2.parameters()))
    ffn = FeedForward(4, 2, np.random.default_rng(seed + 2))
    cases.append(_grad_case("feed_forward", _module(ffn), {"x": r(4, 4, 4)}, ffn.parameters()))
    enc = FFTEncoder(4, 8, 8, rng=np.random.default_rng(seed + 3), mask_noise=0.3)
    cases.append(_grad_case("fft_encoder", _module(enc), {"x": r(4, 8, 8)}, enc.parameters()))
    if not quick:
        frb = FFTResidualBlock(4, 8, 8, 8, 1, mask_noise=0.3, rng=np.random.default_rng(seed + 4))
        cases.append(_grad_case("fft_residual_block", _module(frb), {"x": r(4, 8, 8)}, frb.parameters()))
        frb2 = FFTResidualBlock(3, 8, 8, 8, 2, encoder_shortcut=False, concat_shortcut=False,
                                depthwise_local=False, mask_noise=0.3, rng=np.random.default_rng(seed + 5))
        cases.append(_grad_case("fft_residual_block without shortcuts", _module(frb2), {"x": r(3, 8, 8)},
                                frb2.parameters()))
    return cases


def metrics_suite(rng: np.random.Generator, quick: bool = False) -> List[CaseResult]:
    cases = []
    forward = angles_to_vector(GazeAngles(0., 0.))
    cases.append(_compare("angles_to_vector (0,0)", forward, [0., 0., -1.], 1e-15))
    cases.append(_compare("angles_to_vector (pi/2,0)", angles_to_vector(GazeAngles(math.pi / 2, 0.)),
                          [0., -1., 0.], 1e-15))
    cases.append(_compare("identical directions", angular_error(forward, forward), 0., 1e-10))
    cases.append(_compare("orthogonal directions", angular_error((1., 0., 0.), (0., 1., 0.)), 90., 1e-10))
    cases.append(_compare("antiparallel directions", angular_error(forward, (0., 0., 1.)), 180., 0.))
    cases.append(_compare("yaw 0.1 rad", angular_error(forward, angles_to_vector(GazeAngles(0., 0.1))),
                          math.degrees(0.1), 1e-10))
    worst_sym, worst_scale, worst_norm = 0., 0., 0.
    for _ in range(100):
        a = angles_to_vector(GazeAngles(rng.uniform(-1.5, 1.5), rng.uniform(-3., 3.)))
        b = angles_to_vector(GazeAngles(rng.uniform(-1.5, 1.5), rng.uniform(-3., 3.)))
        worst_sym = max(worst_sym, abs(angular_error(a, b) - angular_error(b, a)))
        c = rng.uniform(0.01, 100.)
        worst_scale = max(worst_scale, abs(angular_error(c * np.asarray(a), b) - angular_error(a, b)))
        worst_norm = max(worst_norm, abs(a.norm - 1.))
    cases.append(CaseResult("symmetry", worst_sym == 0., f"max diff {worst_sym:.2e}"))
    cases.append(CaseResult("positive scale invariance", worst_scale < 1e-10, f"max diff {worst_scale:.2e}"))
    cases.append(CaseResult("unit norm", worst_norm < 1e-12, f"max diff {worst_norm:.2e}"))
    return cases


#: all suites by name, in the order they run
SUITES: Dict[str, Callable[[np.random.Generator, bool], List[CaseResult]]] = {
    "fft": fft_suite,
    "conv": conv_suite,
    "mask": mask_suite,
    "grad": grad_suite,
    "metrics": metrics_suite,
}


@profile
def run_suites(names: Optional[Sequence[str]] = None, seed: int = 0, quick: bool = False) -> List[SuiteResult]:
    """run the named suites (all by default) with a generator seeded per suite"""
    names = list(SUITES) if not names else list(names)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"Unknown suite '{name}', expected one of {list(SUITES)}")
    results = []
    for name in names:
        log(f"running suite '{name}'")
        rng = np.random.default_rng([seed, list(SUITES).index(name)])
        results.append(SuiteResult(name, SUITES[name](rng, quick)))
    return results

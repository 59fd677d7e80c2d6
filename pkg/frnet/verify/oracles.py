"""
Slow, obviously correct reference implementations the fast paths are checked against.
"""

import numpy as np
from scipy.signal import convolve2d

from ..core.types import Array, ComplexArray


def naive_dft(z: ComplexArray, inverse: bool = False) -> ComplexArray:
    """X[u] = sum_m x[m] exp(-+2 pi i u m / n), the inverse divided by n"""
    n = len(z)
    sign = 1. if inverse else -1.
    out = np.zeros(n, dtype=np.complex128)
    for u in range(n):
        for m in range(n):
            out[u] += z[m] * np.exp(sign * 2j * np.pi * u * m / n)
    return out / n if inverse else out


def direct_dft2d(f: ComplexArray) -> ComplexArray:
    """F(u,v) = sum_mn f(m,n) exp(-2 pi i (u m / M + v n / N)) as a direct double sum"""
    M, N = f.shape
    m = np.arange(M)
    n = np.arange(N)
    out = np.zeros((M, N), dtype=np.complex128)
    for u in range(M):
        for v in range(N):
            phase = np.exp(-2j * np.pi * (u * m[:, None] / M + v * n[None, :] / N))
            out[u, v] = np.sum(f * phase)
    return out


def direct_circular_conv(x: Array, k: Array) -> Array:
    """y[i,j] = sum_ab k[a,b] x[(i-a)%h, (j-b)%w] with explicit index arithmetic"""
    h, w = x.shape
    kh, kw = k.shape
    y = np.zeros((h, w))
    for a in range(kh):
        for b in range(kw):
            if k[a, b] != 0:
                rows = (np.arange(h) - a) % h
                cols = (np.arange(w) - b) % w
                y += k[a, b] * x[np.ix_(rows, cols)]
    return y


def direct_conv2d(x: Array, w: Array, bias=None, stride: int = 1, padding: int = 0) -> Array:
    """cross-correlation with zero padding as six nested loops"""
    cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (wd + 2 * padding - kw) // stride + 1
    y = np.zeros((cout, ho, wo))
    for o in range(cout):
        for i in range(ho):
            for j in range(wo):
                acc = 0. if bias is None else bias[o]
                for c in range(cin):
                    for a in range(kh):
                        for b in range(kw):
                            r = i * stride + a - padding
                            s = j * stride + b - padding
                            if 0 <= r < h and 0 <= s < wd:
                                acc += w[o, c, a, b] * x[c, r, s]
                y[o, i, j] = acc
    return y


def separable_weight(depthwise: Array, pointwise: Array) -> Array:
    """full conv weight [cout,cin,kh,kw] equal to a depthwise [cin,kh,kw] then pointwise [cout,cin] conv"""
    return pointwise[:, :, None, None] * depthwise[None]


def naive_matmul(a: Array, b: Array) -> Array:
    m, k = a.shape
    _, n = b.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for t in range(k):
                out[i, j] += a[i, t] * b[t, j]
    return out


def matrix_dft2d(f: ComplexArray) -> ComplexArray:
    """the 2d DFT as products with the dense DFT matrices, for sizes the double sum is too slow for"""
    M, N = f.shape
    em = np.exp(-2j * np.pi * np.outer(np.arange(M), np.arange(M)) / M)
    en = np.exp(-2j * np.pi * np.outer(np.arange(N), np.arange(N)) / N)
    return em @ f @ en.T


def folded_linear_conv(x: Array, k: Array) -> Array:
    """circular convolution as the full linear convolution (scipy.signal) folded onto the grid"""
    h, w = x.shape
    z = convolve2d(x, k, mode="full")
    y = np.zeros((h, w))
    for p in range(0, z.shape[0], h):
        for q in range(0, z.shape[1], w):
            block = z[p:p + h, q:q + w]
            y[:block.shape[0], :block.shape[1]] += block
    return y

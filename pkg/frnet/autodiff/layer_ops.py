"""
Gradient rules of the network layers: convolutions, normalizations, activation,
pooling, the linear head, channel concatenation, the spectral global filter and
the smooth L1 loss. Feature maps are [c,h,w] arrays of a single sample.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..core.errors import ShapeError
from ..fft.plan import fft2d_array
from ..fft.spectral import apply_mask_array, apply_mask_flops
from .ops import Op, check_same, register


def conv_output_size(n: int, k: int, stride: int, padding: int) -> int:
    return (n + 2 * padding - k) // stride + 1


def _windows(x, kh, kw, stride, padding):
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding))) if padding else x
    win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    return xp.shape, win


def _scatter_windows(dwin_taps, xp_shape, kh, kw, stride, ho, wo, padding, dtype):
    """sum window gradients of shape [c,ho,wo,kh,kw] (given tap by tap) back onto the input"""
    dxp = np.zeros(xp_shape, dtype=dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i:i + stride * ho:stride, j:j + stride * wo:stride] += dwin_taps(i, j)
    if padding:
        dxp = dxp[:, padding:-padding, padding:-padding]
    return dxp


@register
class Conv2d(Op):
    """cross-correlation of x [cin,h,w] with w [cout,cin,kh,kw], optional bias [cout]"""
    name = "conv2d"

    def check_arity(self, n):
        if n not in (2, 3):
            raise ValueError(f"Op '{self.name}' takes 2 or 3 inputs, got {n}")

    def forward(self, xs, stride=1, padding=0, **attrs):
        x, w = xs[0], xs[1]
        if x.ndim != 3 or w.ndim != 4 or w.shape[1] != x.shape[0]:
            raise ShapeError(f"conv2d: input {list(x.shape)} does not fit the weight {list(w.shape)}")
        cout, cin, kh, kw = w.shape
        if kh == kw == 1 and stride == 1 and padding == 0:
            out = (w[:, :, 0, 0] @ x.reshape(cin, -1)).reshape((cout,) + x.shape[1:])
            saved = (x, w, None)
        else:
            xp_shape, win = _windows(x, kh, kw, stride, padding)
            out = np.tensordot(w, win, axes=([1, 2, 3], [0, 3, 4]))
            saved = (win, w, xp_shape)
        if len(xs) == 3:
            out = out + xs[2][:, None, None]
        return out, saved

    def backward(self, g, saved, needs, stride=1, padding=0, **attrs):
        data, w, xp_shape = saved
        cout, cin, kh, kw = w.shape
        grads = [None, None, None]
        if xp_shape is None:
            # 1x1 convolution is a matrix product over the flattened pixels: Y = W X
            x = data
            g2 = g.reshape(cout, -1)
            if needs[0]:
                # dX = W^T dY
                grads[0] = (w[:, :, 0, 0].T @ g2).reshape(x.shape)
            if needs[1]:
                # dW = dY X^T
                grads[1] = (g2 @ x.reshape(cin, -1).T)[:, :, None, None]
        else:
            win = data
            ho, wo = g.shape[1:]
            if needs[0]:
                # every tap (i, j) sends W[:, :, i, j]^T dY back to the pixels it read
                grads[0] = _scatter_windows(
                    lambda i, j: np.tensordot(w[:, :, i, j], g, axes=([0], [0])),
                    xp_shape, kh, kw, stride, ho, wo, padding, g.dtype)
            if needs[1]:
                # dW[o, c, i, j] = sum over output pixels of dY[o] * window[c, i, j]
                grads[1] = np.tensordot(g, win, axes=([1, 2], [1, 2]))
        if len(needs) == 3 and needs[2]:
            # the bias is broadcast over all pixels
            grads[2] = g.sum(axis=(1, 2))
        return grads[:len(needs)]

    def flops(self, in_shapes, out_shape, **attrs):
        cout, cin, kh, kw = in_shapes[1]
        return 2 * cout * cin * kh * kw * out_shape[1] * out_shape[2]


@register
class DepthwiseConv2d(Op):
    """one kh x kw filter per channel: x [c,h,w], w [c,kh,kw], optional bias [c]"""
    name = "depthwise_conv2d"

    def check_arity(self, n):
        if n not in (2, 3):
            raise ValueError(f"Op '{self.name}' takes 2 or 3 inputs, got {n}")

    def forward(self, xs, stride=1, padding=0, **attrs):
        x, w = xs[0], xs[1]
        if x.ndim != 3 or w.ndim != 3 or w.shape[0] != x.shape[0]:
            raise ShapeError(f"depthwise_conv2d: input {list(x.shape)} does not fit the weight {list(w.shape)}")
        c, kh, kw = w.shape
        xp_shape, win = _windows(x, kh, kw, stride, padding)
        out = np.einsum("cijkl,ckl->cij", win, w)
        if len(xs) == 3:
            out = out + xs[2][:, None, None]
        return out, (win, w, xp_shape)

    def backward(self, g, saved, needs, stride=1, padding=0, **attrs):
        win, w, xp_shape = saved
        c, kh, kw = w.shape
        ho, wo = g.shape[1:]
        grads = [None, None, None]
        if needs[0]:
            # same as conv2d, but no mixing: channel c only sees its own filter
            grads[0] = _scatter_windows(lambda i, j: w[:, i, j, None, None] * g,
                                        xp_shape, kh, kw, stride, ho, wo, padding, g.dtype)
        if needs[1]:
            # dW[c, k, l] = sum over output pixels of dY[c] * window[c, k, l]
            grads[1] = np.einsum("cij,cijkl->ckl", g, win)
        if len(needs) == 3 and needs[2]:
            grads[2] = g.sum(axis=(1, 2))
        return grads[:len(needs)]

    def flops(self, in_shapes, out_shape, **attrs):
        c, kh, kw = in_shapes[1]
        return 2 * c * kh * kw * out_shape[1] * out_shape[2]


@register
class ChannelAffine(Op):
    """batch-free normalization: y = gamma_c * x + beta_c"""
    name = "channel_affine"
    arity = 3

    def forward(self, xs, **attrs):
        x, gamma, beta = xs
        if gamma.shape != (x.shape[0],) or beta.shape != (x.shape[0],):
            raise ShapeError(f"channel_affine: {x.shape[0]} channels, but scale {list(gamma.shape)} "
                             f"and shift {list(beta.shape)}")
        return gamma[:, None, None] * x + beta[:, None, None], (x, gamma)

    def backward(self, g, saved, needs, **attrs):
        x, gamma = saved
        return [gamma[:, None, None] * g if needs[0] else None,
                (g * x).sum(axis=(1, 2)) if needs[1] else None,
                g.sum(axis=(1, 2)) if needs[2] else None]

    def flops(self, in_shapes, out_shape, **attrs):
        return 2 * int(np.prod(out_shape))


@register
class LayerNorm(Op):
    """normalization across the channels of every spatial position, then a per-channel affine map"""
    name = "layer_norm"
    arity = 3

    def forward(self, xs, eps=1e-5, **attrs):
        x, gamma, beta = xs
        if gamma.shape != (x.shape[0],) or beta.shape != (x.shape[0],):
            raise ShapeError(f"layer_norm: {x.shape[0]} channels, but scale {list(gamma.shape)} "
                             f"and shift {list(beta.shape)}")
        # statistics over the channel axis, one pair per pixel
        mu = x.mean(axis=0, keepdims=True)
        xc = x - mu
        inv = 1. / np.sqrt((xc * xc).mean(axis=0, keepdims=True) + eps)
        # normalized input
        xh = xc * inv
        return gamma[:, None, None] * xh + beta[:, None, None], (xh, inv, gamma)

    def backward(self, g, saved, needs, **attrs):
        xh, inv, gamma = saved
        grads = [None, None, None]
        if needs[0]:
            # gradient w.r.t. the normalized input
            dxh = g * gamma[:, None, None]
            # through the normalization: remove the components along the mean and along xh
            grads[0] = inv * (dxh - dxh.mean(axis=0, keepdims=True)
                              - xh * (dxh * xh).mean(axis=0, keepdims=True))
        if needs[1]:
            grads[1] = (g * xh).sum(axis=(1, 2))
        if needs[2]:
            grads[2] = g.sum(axis=(1, 2))
        return grads

    def flops(self, in_shapes, out_shape, **attrs):
        return 8 * int(np.prod(out_shape))


@register
class Silu(Op):
    """x * sigmoid(x)"""
    name = "silu"
    arity = 1

    def forward(self, xs, **attrs):
        x = xs[0]
        s = expit(x)
        return x * s, (x, s)

    def backward(self, g, saved, needs, **attrs):
        x, s = saved
        # d/dx x s(x) = s + x s (1 - s)
        return [g * s * (1. + x * (1. - s))]

    def flops(self, in_shapes, out_shape, **attrs):
        return 4 * int(np.prod(out_shape))


@register
class GlobalAvgPool(Op):
    """[c,h,w] -> [c]"""
    name = "global_avg_pool"
    arity = 1

    def forward(self, xs, **attrs):
        x = xs[0]
        if x.ndim != 3:
            raise ShapeError(f"global_avg_pool needs a [c,h,w] input, got {list(x.shape)}")
        return x.mean(axis=(1, 2)), (x.shape,)

    def backward(self, g, saved, needs, **attrs):
        (shape,) = saved
        return [np.broadcast_to(g[:, None, None] / (shape[1] * shape[2]), shape).copy()]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(in_shapes[0]))


@register
class Linear(Op):
    """y = W x + b with x [n], W [m,n], b [m]"""
    name = "linear"

    def check_arity(self, n):
        if n not in (2, 3):
            raise ValueError(f"Op '{self.name}' takes 2 or 3 inputs, got {n}")

    def forward(self, xs, **attrs):
        x, w = xs[0], xs[1]
        if x.ndim != 1 or w.ndim != 2 or w.shape[1] != x.shape[0]:
            raise ShapeError(f"linear: input {list(x.shape)} does not fit the weight {list(w.shape)}")
        out = w @ x
        if len(xs) == 3:
            out = out + xs[2]
        return out, (x, w)

    def backward(self, g, saved, needs, **attrs):
        x, w = saved
        grads = [w.T @ g if needs[0] else None,
                 np.outer(g, x) if needs[1] else None,
                 g if len(needs) == 3 and needs[2] else None]
        return grads[:len(needs)]

    def flops(self, in_shapes, out_shape, **attrs):
        m, n = in_shapes[1]
        return 2 * m * n


@register
class ConcatChannels(Op):
    name = "concat_channels"
    arity = 2

    def forward(self, xs, **attrs):
        a, b = xs
        if a.ndim != 3 or b.ndim != 3 or a.shape[1:] != b.shape[1:]:
            raise ShapeError(f"Cannot concatenate channels of {list(a.shape)} and {list(b.shape)}")
        return np.concatenate([a, b], axis=0), (a.shape[0],)

    def backward(self, g, saved, needs, **attrs):
        (c1,) = saved
        return [g[:c1], g[c1:]]


@register
class ApplyMask(Op):
    """
    global filter real(ifft2d(fft2d(x) * M)) with M = re + i im, all of shape [c,h,w]
    """
    name = "apply_mask"
    arity = 3

    def forward(self, xs, **attrs):
        x, re, im = xs
        check_same(x, re, self.name)
        check_same(x, im, self.name)
        m = re + 1j * im
        y, x_hat = apply_mask_array(x, m)
        return y, (x_hat, m)

    def backward(self, g, saved, needs, **attrs):
        x_hat, m = saved
        h, w = g.shape[1:]
        # the upstream gradient in frequency space
        g_hat = fft2d_array(g.astype(np.complex128))
        grads = [None, None, None]
        if needs[0]:
            # y = real(F^-1 (M F x)), so dx = real(F^-1 (conj(M) F dy))
            grads[0] = fft2d_array(g_hat * np.conj(m), "inverse").real.astype(g.dtype, copy=False)
        if needs[1] or needs[2]:
            # dM = F dy * conj(F x) / (h w), the 1/(h w) comes from the inverse transform;
            # real and imaginary part are the gradients of re and im
            dm = g_hat * np.conj(x_hat) / (h * w)
            grads[1] = dm.real.astype(g.dtype, copy=False)
            grads[2] = dm.imag.astype(g.dtype, copy=False)
        return grads

    def flops(self, in_shapes, out_shape, **attrs):
        return apply_mask_flops(*out_shape)


@register
class SmoothL1(Op):
    """mean over elements of 0.5 d^2 / beta for |d| < beta, |d| - 0.5 beta otherwise"""
    name = "smooth_l1"
    arity = 2

    def forward(self, xs, beta=1., **attrs):
        pred, target = xs
        check_same(pred, target, self.name)
        d = pred - target
        ad = np.abs(d)
        loss = np.where(ad < beta, 0.5 * d * d / beta, ad - 0.5 * beta)
        return np.array([loss.mean()], dtype=pred.dtype), (d,)

    def backward(self, g, saved, needs, beta=1., **attrs):
        (d,) = saved
        # quadratic part: d / beta, linear part: sign(d); the mean divides by the size
        gd = np.where(np.abs(d) < beta, d / beta, np.sign(d)) * (g[0] / d.size)
        return [gd, -gd]

    def flops(self, in_shapes, out_shape, **attrs):
        return 4 * int(np.prod(in_shapes[0]))

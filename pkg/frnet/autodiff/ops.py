"""
The differentiable operations a Tape can record. Every op maps input arrays to an
output array and the minimal saved values its gradient rule needs, and reports its
analytic FLOP count. Ops are registered by name in REGISTRY.
"""

from contextlib import contextmanager
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ShapeError
from ..core.types import Array, Shape

#: all known ops, by name
REGISTRY: Dict[str, "Op"] = {}

#: gradient rules that are deliberately perturbed, by op name (test hook)
FAULTS: Dict[str, float] = {}


def register(cls):
    """class decorator that adds an instance of the op to the registry"""
    op = cls()
    REGISTRY[op.name] = op
    return cls


def get_op(name: str) -> "Op":
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"Unknown op '{name}'") from None


@contextmanager
def inject_fault(name: str, factor: float = 1.01):
    """Scale the gradients produced by the named op's backward rule while active"""
    get_op(name)
    FAULTS[name] = factor
    try:
        yield
    finally:
        del FAULTS[name]


class Op():
    """
    Abstract base class of all differentiable operations.
    """

    #: the name under which the op is recorded
    name = ""
    #: the number of inputs, None for a variable number
    arity: Optional[int] = None

    def check_arity(self, n: int) -> None:
        if self.arity is not None and n != self.arity:
            raise ValueError(f"Op '{self.name}' takes {self.arity} inputs, got {n}")

    def forward(self, xs: Sequence[Array], **attrs) -> Tuple[Array, tuple]:
        """compute the output and the values saved for backward"""
        raise NotImplementedError(f"Op '{self.name}' has no forward rule")

    def backward(self, g: Array, saved: tuple, needs: Sequence[bool], **attrs) -> List[Optional[Array]]:
        """gradients w.r.t. each input given the upstream gradient g, None where not needed"""
        raise NotImplementedError(f"Op '{self.name}' has no backward rule")

    def flops(self, in_shapes: Sequence[Shape], out_shape: Shape, **attrs) -> int:
        """analytic floating point operations of one forward evaluation"""
        return 0


def check_same(a: Array, b: Array, name: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"Op '{name}': shape mismatch {list(a.shape)} vs. {list(b.shape)}")


@register
class Add(Op):
    name = "add"
    arity = 2

    def forward(self, xs, **attrs):
        check_same(xs[0], xs[1], self.name)
        return xs[0] + xs[1], ()

    def backward(self, g, saved, needs, **attrs):
        return [g, g]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(out_shape))


@register
class Sub(Op):
    name = "sub"
    arity = 2

    def forward(self, xs, **attrs):
        check_same(xs[0], xs[1], self.name)
        return xs[0] - xs[1], ()

    def backward(self, g, saved, needs, **attrs):
        return [g, -g]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(out_shape))


@register
class Mul(Op):
    name = "mul"
    arity = 2

    def forward(self, xs, **attrs):
        check_same(xs[0], xs[1], self.name)
        return xs[0] * xs[1], (xs[0], xs[1])

    def backward(self, g, saved, needs, **attrs):
        a, b = saved
        return [g * b if needs[0] else None, g * a if needs[1] else None]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(out_shape))


@register
class Scale(Op):
    name = "scale"
    arity = 1

    def forward(self, xs, factor=1., **attrs):
        return xs[0] * factor, ()

    def backward(self, g, saved, needs, factor=1., **attrs):
        return [g * factor]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(out_shape))


@register
class Sum(Op):
    name = "sum"
    arity = 1

    def forward(self, xs, **attrs):
        return np.array([xs[0].sum()], dtype=xs[0].dtype), (xs[0].shape,)

    def backward(self, g, saved, needs, **attrs):
        (shape,) = saved
        return [np.full(shape, g[0], dtype=g.dtype)]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(in_shapes[0]))


@register
class Mean(Op):
    name = "mean"
    arity = 1

    def forward(self, xs, **attrs):
        return np.array([xs[0].mean()], dtype=xs[0].dtype), (xs[0].shape,)

    def backward(self, g, saved, needs, **attrs):
        (shape,) = saved
        return [np.full(shape, g[0] / np.prod(shape), dtype=g.dtype)]

    def flops(self, in_shapes, out_shape, **attrs):
        return int(np.prod(in_shapes[0]))

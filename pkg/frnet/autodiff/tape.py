"""
Define-by-run reverse-mode differentiation. Forward operations are appended to a
Tape as they execute; backward walks the tape in strict reverse append order.
"""

from contextlib import contextmanager
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..core.errors import ShapeError
from ..core.profiling import profile
from ..core.tensor import Tensor
from ..core.types import Array, ArrayLike
from .ops import FAULTS, get_op


class Parameter():
    """
    A named trainable tensor and its accumulated gradient.
    """

    def __init__(self, name: str, value: ArrayLike, trainable: bool = True) -> None:
        #: the qualified name, e.g. 'block1.fusion.conv.weight'
        self.name = name
        #: the current value
        self.value = value if isinstance(value, Tensor) else Tensor(value)
        #: the gradient accumulated since the last zero_grad
        self.grad = Tensor.wrap(np.zeros(self.value.shape, dtype=self.value.dtype))
        #: whether the optimizer updates this parameter and counts include it
        self.trainable = trainable

    @property
    def shape(self):
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def assign(self, value: ArrayLike) -> None:
        """replace the value, keeping the shape"""
        value = value if isinstance(value, Tensor) else Tensor(value, dtype=self.value.dtype)
        if value.shape != self.shape:
            raise ShapeError(f"Cannot assign shape {list(value.shape)} to parameter "
                             f"'{self.name}' of shape {list(self.shape)}")
        self.value = value

    def accumulate(self, g: Array) -> None:
        self.grad = Tensor.wrap(self.grad.data + g.astype(self.grad.dtype, copy=False))

    def zero_grad(self) -> None:
        self.grad = Tensor.wrap(np.zeros(self.shape, dtype=self.value.dtype))

    def __repr__(self) -> str:
        return f"Parameter('{self.name}', shape={list(self.shape)})"


class Node():
    """A recorded operation"""

    __slots__ = ("op", "inputs", "value", "saved", "attrs", "parameter", "scope", "requires_grad")

    def __init__(self, op: str, inputs: tuple, value: Array, saved: tuple, attrs: dict,
                 parameter: Optional[Parameter], scope: str, requires_grad: bool) -> None:
        self.op = op
        self.inputs = inputs
        self.value = value
        self.saved = saved
        self.attrs = attrs
        self.parameter = parameter
        self.scope = scope
        self.requires_grad = requires_grad


class Tape():
    """
    Append-only record of a forward computation. Node ids are list indices, so
    every node's inputs precede it. A tape is used by a single thread.
    """

    def __init__(self) -> None:
        #: the recorded nodes in append (= topological) order
        self.nodes: List[Node] = []
        # node ids of the parameters already on the tape
        self._parameter_ids: Dict[int, int] = {}
        # names of the enclosing modules
        self._scope: List[str] = []

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def current_scope(self) -> str:
        return ".".join(self._scope)

    @contextmanager
    def scope(self, name: str):
        """record the enclosed nodes under a (nested) module name"""
        if name:
            self._scope.append(name)
        try:
            yield
        finally:
            if name:
                self._scope.pop()

    def _append(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def constant(self, value: ArrayLike, requires_grad: bool = False) -> int:
        """put an input on the tape; with requires_grad its gradient is reported by gradients()"""
        t = value if isinstance(value, Tensor) else Tensor(value)
        return self._append(Node("constant", (), t.data, (), {}, None, self.current_scope, requires_grad))

    def parameter(self, p: Parameter) -> int:
        """put a parameter on the tape, once per tape"""
        key = id(p)
        if key not in self._parameter_ids:
            node = Node("parameter", (), p.value.data, (), {}, p, self.current_scope, p.trainable)
            self._parameter_ids[key] = self._append(node)
        return self._parameter_ids[key]

    def parameter_node(self, p: Parameter) -> Optional[int]:
        """the node id of a parameter, None if it is not on the tape"""
        return self._parameter_ids.get(id(p))

    def record(self, op: str, inputs: Sequence[int], **attrs) -> int:
        """evaluate op on the values of the input nodes and append the result"""
        impl = get_op(op)
        inputs = tuple(int(i) for i in inputs)
        impl.check_arity(len(inputs))
        for i in inputs:
            if not 0 <= i < len(self.nodes):
                raise ValueError(f"Op '{op}' refers to node {i}, but the tape holds {len(self.nodes)} nodes")
        value, saved = impl.forward([self.nodes[i].value for i in inputs], **attrs)
        requires_grad = any(self.nodes[i].requires_grad for i in inputs)
        if not requires_grad:
            saved = ()
        return self._append(Node(op, inputs, value, saved, attrs, None, self.current_scope, requires_grad))

    def value(self, node_id: int) -> Tensor:
        return Tensor(self.nodes[node_id].value)

    @profile
    def gradients(self, loss: int) -> Dict[int, Array]:
        """d(loss)/d(node) for every node that requires a gradient"""
        if self.nodes[loss].value.size != 1:
            raise ValueError(f"The loss must be a scalar, got shape {list(self.nodes[loss].value.shape)}")
        grads: Dict[int, Array] = {loss: np.ones_like(self.nodes[loss].value)}
        for idx in range(loss, -1, -1):
            node = self.nodes[idx]
            g = grads.get(idx)
            if g is None or not node.inputs:
                continue
            needs = [self.nodes[i].requires_grad for i in node.inputs]
            input_grads = get_op(node.op).backward(g, node.saved, needs, **node.attrs)
            factor = FAULTS.get(node.op)
            for i, gi, need in zip(node.inputs, input_grads, needs):
                if gi is None or not need:
                    continue
                if factor is not None:
                    gi = gi * factor
                if i in grads:
                    grads[i] = grads[i] + gi
                else:
                    grads[i] = gi
        return {i: g for i, g in grads.items() if self.nodes[i].requires_grad}

    def parameter_gradients(self, loss: int) -> Dict[Parameter, Array]:
        """d(loss)/d(p) of every trainable parameter on the tape, without accumulating"""
        grads = self.gradients(loss)
        result = {}
        for idx in self._parameter_ids.values():
            p = self.nodes[idx].parameter
            if not p.trainable:
                continue
            g = grads.get(idx)
            result[p] = np.zeros(p.shape, dtype=p.value.dtype) if g is None else g
        return result

    def backward(self, loss: int) -> Dict[Parameter, Tensor]:
        """
        Accumulate d(loss)/d(p) into p.grad of every trainable parameter on the tape
        and return the gradients of this pass.
        """
        result = {}
        for p, g in self.parameter_gradients(loss).items():
            p.accumulate(g)
            result[p] = Tensor(g)
        return result


def backward(tape: Tape, loss: int) -> Dict[Parameter, Tensor]:
    return tape.backward(loss)


def zero_grad(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()

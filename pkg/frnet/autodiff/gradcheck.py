"""
Finite-difference checks of the analytic gradients recorded on a Tape.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import numdifftools.fornberg as fornberg
import numpy as np

from ..core.types import Array
from .tape import Parameter, Tape

# builds the computation on a fresh tape from the input node ids, returns the output node id
Builder = Callable[[Tape, Dict[str, int]], int]


@dataclass
class GradCheckResult:
    """Outcome of the finite-difference check of one input or parameter"""
    #: the checked input
    name: str
    #: the worst relative error over the sampled coordinates
    max_rel_error: float
    #: the flat index of the worst coordinate
    worst_index: int
    #: analytic and numerical derivative at the worst coordinate
    analytic: float
    numerical: float
    #: the tolerance the error was compared to
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAILED"
        return (f"{self.name}: max rel. error {self.max_rel_error:.2e} at index {self.worst_index} "
                f"(analytic {self.analytic:.6e}, numerical {self.numerical:.6e}) {status}")


def relative_error(a: float, n: float, floor: float = 1e-4) -> float:
    return abs(a - n) / max(abs(a), abs(n), floor)


def central_difference_weights(eps: float) -> Array:
    """first derivative weights of the stencil (-eps, +eps) around 0"""
    return fornberg.fd_weights(x=np.array([-eps, eps]), x0=0., n=1)


def check_gradients(build: Builder, inputs: Mapping[str, Array], parameters: Sequence[Parameter] = (),
                    n_coords: int = 10, eps: float = 1e-5, tol: float = 1e-4,
                    seed: int = 0) -> List[GradCheckResult]:
    """
    Compare the tape gradients of L = sum(y * r), with y the output of build() and a
    fixed random r, to central finite differences at n_coords random coordinates of
    every input and of every given parameter (which build() must put on the tape).
    """
    rng = np.random.default_rng(seed)
    inputs = {name: np.array(v, dtype=np.float64) for name, v in inputs.items()}

    def evaluate(values: Mapping[str, Array], weights=None) -> Tuple[Tape, int, Dict[str, int], Array]:
        tape = Tape()
        ids = {name: tape.constant(v, requires_grad=True) for name, v in values.items()}
        out = build(tape, ids)
        if weights is None:
            weights = rng.standard_normal(tape.nodes[out].value.shape)
        r = tape.constant(weights)
        loss = tape.record("sum", [tape.record("mul", [out, r])])
        return tape, loss, ids, weights

    def loss_value(values: Mapping[str, Array]) -> float:
        tape, loss, _, _ = evaluate(values, weights)
        return float(tape.nodes[loss].value[0])

    tape, loss, ids, weights = evaluate(inputs)
    grads = tape.gradients(loss)
    stencil = central_difference_weights(eps)

    def worst_of(name: str, analytic: Array, size: int, loss_at) -> GradCheckResult:
        worst = None
        for index in rng.choice(size, size=min(n_coords, size), replace=False):
            index = int(index)
            numerical = stencil[0] * loss_at(index, -eps) + stencil[1] * loss_at(index, eps)
            err = relative_error(analytic[index], numerical)
            if worst is None or err > worst.max_rel_error:
                worst = GradCheckResult(name, err, index, float(analytic[index]), float(numerical), tol)
        return worst

    results = []
    for name, value in inputs.items():
        def input_loss(index, delta, name=name):
            values = dict(inputs)
            v = values[name].copy()
            v.reshape(-1)[index] += delta
            values[name] = v
            return loss_value(values)
        analytic = grads.get(ids[name], np.zeros_like(value)).reshape(-1)
        results.append(worst_of(name, analytic, value.size, input_loss))

    for p in parameters:
        node = tape.parameter_node(p)
        analytic = np.zeros(p.size) if node is None else grads.get(node, np.zeros(p.shape)).reshape(-1)
        original = p.value

        def parameter_loss(index, delta, p=p, original=original):
            v = original.numpy()
            v.reshape(-1)[index] += delta
            p.assign(v)
            try:
                return loss_value(inputs)
            finally:
                p.assign(original)
        results.append(worst_of(p.name, analytic, p.size, parameter_loss))
    return results

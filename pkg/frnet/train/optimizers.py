from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from ..autodiff.tape import Parameter
from ..core.profiling import profile


@dataclass(frozen=True)
class Schedule:
    """two-level step schedule of the learning rate over (0-based) epochs"""
    base_lr: float = 4e-4
    decayed_lr: float = 4e-5
    decay_epoch: int = 10

    def lr(self, epoch: int) -> float:
        return self.base_lr if epoch < self.decay_epoch else self.decayed_lr

    def __str__(self) -> str:
        return f"lr {self.base_lr:g} until epoch {self.decay_epoch}, then {self.decayed_lr:g}"


class AdamWState():
    """
    Moments of the AdamW optimizer for a fixed list of parameters.
    """

    def __init__(self, params: Iterable[Parameter], beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, weight_decay: float = 0.01) -> None:
        #: the optimized parameters
        self.params: List[Parameter] = [p for p in params if p.trainable]
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        #: first moments, by parameter
        self.m: Dict[int, np.ndarray] = {id(p): np.zeros(p.shape) for p in self.params}
        #: second moments, by parameter
        self.v: Dict[int, np.ndarray] = {id(p): np.zeros(p.shape) for p in self.params}
        #: number of steps taken
        self.t = 0


@profile
def adamw_step(state: AdamWState, lr: float) -> None:
    """
    One AdamW update with decoupled weight decay:
    theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
    """
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1. - b1 ** state.t
    c2 = 1. - b2 ** state.t
    for p in state.params:
        g = p.grad.data
        m = state.m[id(p)]
        v = state.v[id(p)]
        m *= b1
        m += (1. - b1) * g
        v *= b2
        v += (1. - b2) * g * g
        theta = p.value.data
        update = (m / c1) / (np.sqrt(v / c2) + state.eps) + state.weight_decay * theta
        p.assign((theta - lr * update).astype(theta.dtype))

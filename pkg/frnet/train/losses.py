from ..autodiff.tape import Tape
from ..core.tensor import Tensor


def smooth_l1_node(tape: Tape, pred: int, target: int, beta: float = 1.) -> int:
    """record the smooth L1 loss of two nodes, returns the scalar loss node"""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return tape.record("smooth_l1", [pred, target], beta=beta)


def smooth_l1(pred: Tensor, target: Tensor, beta: float = 1.) -> float:
    """
    Mean over elements of 0.5 d^2 / beta if |d| < beta, else |d| - 0.5 beta,
    with d = pred - target.
    """
    tape = Tape()
    return tape.value(smooth_l1_node(tape, tape.constant(pred), tape.constant(target), beta)).item()

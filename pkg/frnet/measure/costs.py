"""
Parameter and analytic FLOP counts of a model, traced through one forward pass
and broken down by module.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from ..autodiff.ops import get_op
from ..core.tensor import zeros
from ..nn.model import FrNet

#: the counting convention printed with every report
CONVENTION = ("FLOPs: conv = 2 x MACs (bias not counted); complex FFT of length n = 5 n log2(n), "
              "2d = rows + columns; complex product = 6 per element; affine 2, layer norm 8, SiLU 4, "
              "add 1, average pool 1 per element; linear 2 x in x out; concat 0")

#: published totals of the full model
PUBLISHED_PARAMS = 670_000
PUBLISHED_FLOPS = 0.22e9
#: accepted relative deviation of the parameter count
PARAM_TOLERANCE = 0.10
#: accepted FLOP range of the full model at 3x256x256
FLOP_BAND = (0.18e9, 0.30e9)


@dataclass
class LayerCost:
    """costs of the operations recorded in one module scope"""
    name: str
    params: int = 0
    flops: int = 0
    output_shape: Tuple[int, ...] = ()


@dataclass
class CostReport:
    """per-module breakdown of the parameters and FLOPs of one forward pass"""
    input_shape: Tuple[int, ...]
    rows: List[LayerCost] = field(default_factory=list)
    convention: str = CONVENTION

    @property
    def total_params(self) -> int:
        return sum(r.params for r in self.rows)

    @property
    def total_flops(self) -> int:
        return sum(r.flops for r in self.rows)

    def by_module(self, depth: int = 1) -> Dict[str, LayerCost]:
        """rows merged by the first depth components of their names"""
        merged: Dict[str, LayerCost] = {}
        for r in self.rows:
            key = ".".join(r.name.split(".")[:depth]) or "<input>"
            row = merged.setdefault(key, LayerCost(key))
            row.params += r.params
            row.flops += r.flops
            row.output_shape = r.output_shape
        return merged

    def budget_violations(self) -> List[str]:
        """the budget bands the report violates, empty if none"""
        violations = []
        low, high = PUBLISHED_PARAMS * (1 - PARAM_TOLERANCE), PUBLISHED_PARAMS * (1 + PARAM_TOLERANCE)
        if not low <= self.total_params <= high:
            violations.append(f"parameter count {self.total_params:,} outside of [{low:,.0f}, {high:,.0f}]")
        if not FLOP_BAND[0] <= self.total_flops <= FLOP_BAND[1]:
            violations.append(f"FLOPs {self.total_flops / 1e9:.4f}B outside of "
                              f"[{FLOP_BAND[0] / 1e9:.2f}B, {FLOP_BAND[1] / 1e9:.2f}B]")
        return violations

    def format_table(self) -> str:
        lines = [f"{'module':<44} {'params':>10} {'FLOPs':>14}  output shape", "-" * 90]
        for r in self.rows:
            lines.append(f"{r.name:<44} {r.params:>10,d} {r.flops:>14,d}  {list(r.output_shape)}")
        lines.append("-" * 90)
        lines.append(f"{'total':<44} {self.total_params:>10,d} {self.total_flops:>14,d}")
        lines.append("")
        lines.append(f"input shape {list(self.input_shape)}")
        lines.append(f"params: {self.total_params / 1e6:.3f}M  (published: {PUBLISHED_PARAMS / 1e6:.2f}M)")
        lines.append(f"FLOPs:  {self.total_flops / 1e9:.4f}B  (published: {PUBLISHED_FLOPS / 1e9:.2f}B)")
        lines.append(self.convention)
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["name", "params", "flops", "output_shape"])
        for r in self.rows:
            writer.writerow([r.name, r.params, r.flops, "x".join(str(s) for s in r.output_shape)])
        writer.writerow(["total", self.total_params, self.total_flops, ""])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "input_shape": list(self.input_shape),
            "total_params": self.total_params,
            "total_flops": self.total_flops,
            "published_params": PUBLISHED_PARAMS,
            "published_flops": PUBLISHED_FLOPS,
            "convention": self.convention,
            "rows": [dict(asdict(r), output_shape=list(r.output_shape)) for r in self.rows],
        }, indent=2)


def count_params(model) -> int:
    """number of trainable scalars; a spectral mask counts its real and imaginary part"""
    return sum(p.size for p in model.parameters())


def cost_report(model: FrNet, input_shape: Optional[Tuple[int, ...]] = None) -> CostReport:
    """trace one forward pass of a zero image and count every recorded operation"""
    input_shape = tuple(input_shape or model.input_shape)
    tape, _ = model.trace(zeros(input_shape))
    rows: Dict[str, LayerCost] = {}
    for node in tape.nodes:
        if node.op == "constant":
            continue
        row = rows.setdefault(node.scope, LayerCost(node.scope))
        if node.op == "parameter":
            if node.parameter.trainable:
                row.params += node.parameter.size
            continue
        in_shapes = [tape.nodes[i].value.shape for i in node.inputs]
        row.flops += get_op(node.op).flops(in_shapes, node.value.shape, **node.attrs)
        row.output_shape = tuple(node.value.shape)
    return CostReport(input_shape, list(rows.values()))


def count_flops(model: FrNet, input_shape: Optional[Tuple[int, ...]] = None) -> int:
    return cost_report(model, input_shape).total_flops

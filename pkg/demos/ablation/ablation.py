#!/usr/bin/python3
"""
Parameters and FLOPs of the full model and of every single ablation, as in an
ablation table.
"""
from frnet.measure import CONVENTION, cost_report
from frnet.nn import ABLATIONS, FrNet, ModelConfig

configs = [("FR-Net", ModelConfig())]
configs += [("- " + name.replace("disable_", "").replace("_", " "), ModelConfig().with_ablation(name))
            for name in ABLATIONS]

print(f"{'variant':<28} {'params':>10} {'GFLOPs':>8}")
for label, config in configs:
    report = cost_report(FrNet(config))
    print(f"{label:<28} {report.total_params:>10,d} {report.total_flops / 1e9:>8.4f}")
print(CONVENTION)

# per-module breakdown of the full model
print(cost_report(FrNet()).format_table())

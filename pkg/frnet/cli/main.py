"""
The frnet command line: verification, cost counting, benchmarks, data generation,
training, evaluation and inference.

Exit codes: 0 success, 1 failed verification or budget assertion, 2 usage or input error.
"""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from ..autodiff.ops import REGISTRY, inject_fault
from ..core.errors import FormatError, ShapeError
from ..core.profiling import Profiler
from ..core.serialization import load_tensor
from ..core.settings import settings
from ..data.dataset import (DEFAULT_PITCH_RANGE, DEFAULT_YAW_RANGE, DatasetManifest, generate_dataset,
                            load_dataset)
from ..measure.benchmarks import OPS, bench_inference, bench_scaling
from ..measure.costs import cost_report
from ..nn.checkpoint import load_checkpoint
from ..nn.model import ABLATIONS, FrNet, ModelConfig
from ..train.optimizers import Schedule
from ..train.trainer import TrainingLog, evaluate, train_loop
from ..verify.suites import SUITES, run_suites


class CheckFailed(Exception):
    """a verification or budget assertion did not hold (exit code 1)"""


def echo(*lines: str) -> None:
    """echo effective settings on stderr, keeping stdout machine readable"""
    for line in lines:
        print(f"# {line}", file=sys.stderr)


def resolve_config(args, input_size: Optional[int] = None) -> ModelConfig:
    """model configuration from --config/--small, --input-size and --ablate"""
    if getattr(args, "config", None):
        config = ModelConfig.load(args.config)
    elif getattr(args, "small", False):
        config = ModelConfig.small()
    else:
        config = ModelConfig()
    size = getattr(args, "input_size", None) or input_size
    if size:
        config = replace(config, input_size=size)
    if getattr(args, "ablate", None):
        config = config.with_ablation(*args.ablate)
    echo("effective model configuration:", *config.to_ini().strip().splitlines())
    return config


def save_figure(plot, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    plot(ax)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --- subcommands ---

def cmd_verify(args) -> int:
    names = args.suite or list(SUITES)
    if args.inject_fault:
        with inject_fault(args.inject_fault, args.fault_factor):
            results = run_suites(names, seed=args.seed, quick=args.quick)
    else:
        results = run_suites(names, seed=args.seed, quick=args.quick)
    for suite in results:
        print(suite.summary())
        for case in (suite.cases if settings.verbose else suite.failures):
            print(case)
    failed = [f"{s.name}/{c.name}" for s in results for c in s.failures]
    if failed:
        fault = f" (fault injected into op '{args.inject_fault}')" if args.inject_fault else ""
        raise CheckFailed("failing cases: " + ", ".join(failed) + fault)
    return 0


def cmd_count(args) -> int:
    config = resolve_config(args)
    report = cost_report(FrNet(config, seed=args.seed))
    if args.json:
        print(report.to_json())
    else:
        print(report.format_table())
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.assert_budget:
        violations = report.budget_violations()
        if violations:
            raise CheckFailed("budget violated: " + "; ".join(violations))
        print("budget: ok")
    return 0


def cmd_bench(args) -> int:
    if args.kind == "scaling":
        ops = OPS if args.op == "both" else (args.op,)
        kernel = args.kernel if args.kernel == "full" else int(args.kernel)
        report = None
        for op in ops:
            r = bench_scaling(op, args.sizes, kernel, args.repeats, args.seed)
            if report is None:
                report = r
            else:
                report.rows += r.rows
        print(report.to_csv(), end="")
        print(f"# hardware: {report.hardware}")
        if len(ops) == 2:
            print(f"# spectral faster than direct from N = {report.crossover()}")
        if args.csv:
            Path(args.csv).write_text(report.to_csv())
        if args.plot:
            save_figure(report.plot, args.plot)
        return 0
    if args.checkpoint:
        model = load_checkpoint(args.checkpoint)
    else:
        model = FrNet(resolve_config(args), seed=args.seed)
    if args.profile:
        Profiler.start()
    report = bench_inference(model, args.repeats, args.warmup, args.seed)
    print(report)
    if args.profile:
        Profiler.print_summary()
        Profiler.stop()
    return 0


def cmd_gen_data(args) -> int:
    manifest = generate_dataset(args.out, args.n, args.size, args.seed,
                                tuple(args.pitch_range), tuple(args.yaw_range))
    print(f"wrote {manifest.count} samples of size {manifest.image_size} to '{args.out}'")
    return 0


def cmd_train(args) -> int:
    out = Path(args.out)
    if args.data:
        manifest = DatasetManifest.load(args.data)
    elif args.n:
        manifest = generate_dataset(out / "data", args.n, args.size, args.seed)
    else:
        raise ValueError("Either --data or --n is required")
    samples = list(load_dataset(manifest))
    config = resolve_config(args, input_size=manifest.image_size)
    schedule = Schedule(args.lr_base, args.lr_decayed, args.lr_decay_epoch)
    echo(*TrainingLog(schedule, args.seed, args.batch).header(), f"epochs={args.epochs}")
    model = FrNet(config, seed=args.seed)
    training_log = train_loop(model, samples, args.epochs, args.batch, schedule, args.seed, out,
                              threads=settings.threads)
    training_log.write_csv(out / "train_log.csv", timing=not args.no_timing)
    for r in training_log.records:
        print(f"epoch {r.epoch}: lr {r.lr:g}, loss {r.mean_loss:.6f}, "
              f"mean angular error {r.mean_angular_error_deg:.3f} deg")
    print(f"wrote {len(training_log.checkpoints)} checkpoint(s) and '{out / 'train_log.csv'}'")
    if args.plot:
        save_figure(training_log.plot, args.plot)
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    manifest = DatasetManifest.load(args.data)
    if manifest.image_size != model.config.input_size:
        raise FormatError(f"Dataset images are {manifest.image_size}x{manifest.image_size}, "
                          f"the model expects {model.config.input_size}x{model.config.input_size}")
    error = evaluate(model, load_dataset(manifest))
    print(f"mean angular error: {error:.4f} deg over {manifest.count} samples")
    return 0


def cmd_infer(args) -> int:
    model = load_checkpoint(args.checkpoint)
    image = load_tensor(args.image)
    try:
        yaw, pitch = (float(v) for v in model.predict(image).data)
    except ShapeError:
        raise FormatError(f"Input tensor '{args.image}' has shape {list(image.shape)}, "
                          f"the model expects {list(model.input_shape)}") from None
    if args.json:
        print(json.dumps({"yaw_rad": yaw, "pitch_rad": pitch,
                          "yaw_deg": math.degrees(yaw), "pitch_deg": math.degrees(pitch)}))
    else:
        print(f"yaw   {yaw:+.6f} rad  {math.degrees(yaw):+9.4f} deg")
        print(f"pitch {pitch:+.6f} rad  {math.degrees(pitch):+9.4f} deg")
    return 0


# --- argument parsing ---

def _model_options(p: argparse.ArgumentParser, input_size: bool = True) -> None:
    p.add_argument("--config", help="model configuration file (INI), default: the full model")
    p.add_argument("--small", action="store_true", help="use the desk-scale model preset")
    if input_size:
        p.add_argument("--input-size", type=int, help="override the input image size")
    p.add_argument("--ablate", action="append", choices=ABLATIONS, metavar="FLAG",
                   help=f"turn on an ablation switch, one of {', '.join(ABLATIONS)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    common.add_argument("--threads", type=int, default=settings.threads,
                        help="worker threads, default from FRNET_THREADS (currently %(default)s)")
    common.add_argument("--precision", choices=("f64", "f32"), default="f64", help="element precision")
    common.add_argument("-v", "--verbose", action="store_true", help="print progress")

    parser = argparse.ArgumentParser(prog="frnet", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the oracle and gradient suites")
    p.add_argument("--suite", action="append", choices=list(SUITES), help="run only this suite")
    p.add_argument("--inject-fault", choices=sorted(REGISTRY), metavar="OP",
                   help="perturb the gradient rule of an op, the suites must fail")
    p.add_argument("--fault-factor", type=float, default=1.01, help=argparse.SUPPRESS)
    p.add_argument("--quick", action="store_true", help="fewer random cases")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("count", parents=[common], help="count parameters and FLOPs")
    _model_options(p)
    p.add_argument("--assert-budget", action="store_true", help="fail unless the budgets hold")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--csv", help="also write the breakdown as CSV to this file")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bench", parents=[common], help="wall-clock benchmarks")
    p.add_argument("kind", choices=("scaling", "inference"))
    p.add_argument("--op", choices=OPS + ("both",), default="both", help="scaling: which convolution")
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128], help="scaling: input sizes N")
    p.add_argument("--kernel", default="full", help="scaling: 'full' or a kernel size")
    p.add_argument("--repeats", type=int, help="timed repetitions (default: 5 for scaling, 10 for inference)")
    p.add_argument("--warmup", type=int, default=2, help="inference: untimed runs")
    p.add_argument("--checkpoint", help="inference: load the model from a checkpoint")
    p.add_argument("--profile", action="store_true", help="inference: print the method profile")
    p.add_argument("--csv", help="scaling: write the rows to this file")
    p.add_argument("--plot", help="scaling: save a log-log plot to this file")
    _model_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-data", parents=[common], help="render a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--size", type=int, default=64, help="image size (default: 64)")
    p.add_argument("--pitch-range", type=float, nargs=2, default=list(DEFAULT_PITCH_RANGE))
    p.add_argument("--yaw-range", type=float, nargs=2, default=list(DEFAULT_YAW_RANGE))
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", parents=[common], help="train on a synthetic dataset")
    p.add_argument("--data", help="dataset directory or manifest")
    p.add_argument("--n", type=int, help="generate a dataset of this many samples instead")
    p.add_argument("--size", type=int, default=64, help="image size of a generated dataset")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=16, help="batch size (default: 16)")
    p.add_argument("--lr-base", type=float, default=Schedule.base_lr)
    p.add_argument("--lr-decayed", type=float, default=Schedule.decayed_lr)
    p.add_argument("--lr-decay-epoch", type=int, default=Schedule.decay_epoch)
    p.add_argument("--out", default="frnet_run", help="output directory for checkpoints and the log")
    p.add_argument("--no-timing", action="store_true", help="log wall_seconds as 0")
    p.add_argument("--plot", help="save the training curve to this file")
    _model_options(p, input_size=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="mean angular error of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="dataset directory or manifest")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("infer", parents=[common], help="predict yaw and pitch of one image tensor")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True, help="tensor file of shape [3, size, size]")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings.threads = max(1, args.threads)
    settings.precision = args.precision
    settings.verbose = args.verbose
    if getattr(args, "repeats", 0) is None:
        args.repeats = 5 if args.kind == "scaling" else 10
    try:
        return args.func(args)
    except CheckFailed as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

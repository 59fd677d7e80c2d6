"""
Desk-scale training of FR-Net on synthetic gaze samples.
"""

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..autodiff.tape import Parameter, Tape, zero_grad
from ..core.profiling import profile
from ..core.settings import log, settings
from ..core.tensor import Tensor
from ..data.synthetic import SyntheticSample
from ..metrics.gaze import GazeAngles, mean_angular_error
from ..nn.checkpoint import save_checkpoint
from ..nn.model import FrNet
from .losses import smooth_l1_node
from .optimizers import AdamWState, Schedule, adamw_step

CSV_COLUMNS = ["epoch", "lr", "mean_loss", "mean_angular_error_deg", "wall_seconds"]


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    mean_loss: float
    mean_angular_error_deg: float
    wall_seconds: float


@dataclass
class TrainingLog:
    """per-epoch training statistics and the settings they were obtained with"""
    schedule: Schedule
    seed: int
    batch_size: int
    records: List[EpochRecord] = field(default_factory=list)
    #: checkpoints written, one per epoch
    checkpoints: List[Path] = field(default_factory=list)

    def header(self) -> List[str]:
        return [f"lr_base={self.schedule.base_lr!r} lr_decayed={self.schedule.decayed_lr!r} "
                f"lr_decay_epoch={self.schedule.decay_epoch}",
                f"seed={self.seed} batch_size={self.batch_size}"]

    def write_csv(self, path: Union[str, Path], timing: bool = True) -> None:
        """
        Write the log as CSV with '#' comment lines echoing the schedule.
        Without timing the wall_seconds column is 0, so same-seed logs are identical.
        """
        with open(path, "w", newline="") as f:
            for line in self.header():
                f.write(f"# {line}\n")
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for r in self.records:
                writer.writerow([r.epoch, f"{r.lr:.17g}", f"{r.mean_loss:.17g}",
                                 f"{r.mean_angular_error_deg:.17g}",
                                 f"{r.wall_seconds if timing else 0.:.3f}"])

    def plot(self, ax) -> None:
        """plot loss and angular error over the epochs into a matplotlib axes object"""
        epochs = [r.epoch for r in self.records]
        ax.plot(epochs, [r.mean_loss for r in self.records], "o-", color="C0", label="smooth L1 loss")
        ax.set_xlabel("epoch")
        ax.set_ylabel("mean loss", color="C0")
        ax.set_yscale("log")
        ax2 = ax.twinx()
        ax2.plot(epochs, [r.mean_angular_error_deg for r in self.records], "s--", color="C1")
        ax2.set_ylabel("mean angular error [deg]", color="C1")


def prediction_angles(pred: np.ndarray) -> GazeAngles:
    """gaze angles of a network output [yaw, pitch], brought into range"""
    return GazeAngles.canonical(pitch=pred[1], yaw=pred[0])


def sample_step(model: FrNet, sample: SyntheticSample,
                beta: float = 1.) -> Tuple[float, np.ndarray, Dict[Parameter, np.ndarray]]:
    """forward and backward pass of one sample: loss, prediction and parameter gradients"""
    tape = Tape()
    pred = model(tape, tape.constant(sample.image))
    loss = smooth_l1_node(tape, pred, tape.constant(sample.target), beta)
    grads = tape.parameter_gradients(loss)
    return float(tape.nodes[loss].value[0]), tape.nodes[pred].value.copy(), grads


@profile
def train_step(model: FrNet, state: AdamWState, batch: Sequence[SyntheticSample], lr: float,
               threads: int = 1) -> Tuple[List[float], List[np.ndarray]]:
    """one optimizer step on the gradient averaged over the batch"""
    params = state.params
    zero_grad(params)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: sample_step(model, s), batch))
    else:
        results = [sample_step(model, s) for s in batch]
    # accumulate in sample order, so the sum does not depend on the threads
    for _, _, grads in results:
        for p, g in grads.items():
            p.accumulate(g)
    for p in params:
        p.grad = Tensor.wrap(p.grad.data / len(batch))
    adamw_step(state, lr)
    return [r[0] for r in results], [r[1] for r in results]


def train_loop(model: FrNet, dataset: Sequence[SyntheticSample], epochs: int, batch_size: int = 16,
               schedule: Optional[Schedule] = None, seed: int = 0,
               out_dir: Optional[Union[str, Path]] = None, threads: Optional[int] = None,
               state: Optional[AdamWState] = None) -> TrainingLog:
    """
    Train with AdamW on the smooth L1 loss. The samples are shuffled every epoch by
    a generator seeded with seed; a checkpoint is written to out_dir after each epoch.
    """
    dataset = list(dataset)
    if len(dataset) == 0:
        raise ValueError("Cannot train on an empty dataset")
    if epochs < 0 or batch_size < 1:
        raise ValueError(f"Invalid epochs={epochs} or batch_size={batch_size}")
    schedule = schedule or Schedule()
    threads = settings.threads if threads is None else threads
    state = state or AdamWState(model.parameters())
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    training_log = TrainingLog(schedule, seed, batch_size)
    log(f"training on {len(dataset)} samples, {schedule}, batch size {batch_size}, seed {seed}")
    for epoch in range(epochs):
        t0 = time.perf_counter()
        lr = schedule.lr(epoch)
        order = rng.permutation(len(dataset))
        losses, preds, labels = [], [], []
        for start in range(0, len(dataset), batch_size):
            batch = [dataset[i] for i in order[start:start + batch_size]]
            batch_losses, batch_preds = train_step(model, state, batch, lr, threads)
            losses += batch_losses
            preds += [prediction_angles(p) for p in batch_preds]
            labels += [s.label for s in batch]
        record = EpochRecord(epoch, lr, float(np.mean(losses)), mean_angular_error(preds, labels),
                             time.perf_counter() - t0)
        training_log.records.append(record)
        if out_dir is not None:
            path = out_dir / f"checkpoint_epoch{epoch:03d}.frck"
            save_checkpoint(path, model)
            training_log.checkpoints.append(path)
        log(f"epoch {epoch:3d}  lr {lr:.1e}  loss {record.mean_loss:.6f}  "
            f"error {record.mean_angular_error_deg:7.3f} deg  ({record.wall_seconds:.1f}s)")
    return training_log


def evaluate(model: FrNet, samples: Sequence[SyntheticSample]) -> float:
    """mean angular error of the model's predictions in degrees"""
    samples = list(samples)
    if len(samples) == 0:
        raise ValueError("Cannot evaluate on an empty dataset")
    preds = [prediction_angles(model.predict(s.image).data) for s in samples]
    return mean_angular_error(preds, [s.label for s in samples])

#!/usr/bin/python3
"""
Training of the desk-scale FR-Net on rendered eye images, followed by a comparison
with the closed-form iris-centroid estimator on held-out samples.
"""
import shutil
import os
import matplotlib.pyplot as plt
import numpy as np
from frnet import Profiler
from frnet.data import generate_dataset, load_dataset, estimate_label
from frnet.metrics import mean_angular_error
from frnet.nn import FrNet, ModelConfig
from frnet.train import Schedule, evaluate, train_loop

# create output folder
shutil.rmtree("out", ignore_errors=True)
os.makedirs("out/img", exist_ok=True)

# render a training and a test set
train_set = list(load_dataset(generate_dataset("out/train", n=256, size=64, seed=0)))
test_set = list(load_dataset(generate_dataset("out/test", n=64, size=64, seed=1)))

# create the model
model = FrNet(ModelConfig.small(), seed=0)
print(model)
print(f"parameters: {model.num_parameters():,}")

# train
Profiler.start()
log = train_loop(model, train_set, epochs=20, batch_size=16, schedule=Schedule(), seed=0,
                 out_dir="out/checkpoints")
Profiler.print_summary()
log.write_csv("out/train_log.csv")

# plot the training curve
fig, ax = plt.subplots(figsize=(8, 5))
log.plot(ax)
fig.tight_layout()
fig.savefig("out/img/training.svg")

# compare with the geometric estimator
baseline = mean_angular_error([estimate_label(s.image) for s in test_set], [s.label for s in test_set])
print(f"test error FR-Net:              {evaluate(model, test_set):.3f} deg")
print(f"test error iris-centroid model: {baseline:.3f} deg")
print(f"final training loss:            {np.mean([r.mean_loss for r in log.records[-3:]]):.5f}")

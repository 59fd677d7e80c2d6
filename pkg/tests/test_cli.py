#!/usr/bin/python3
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

from frnet import Tensor, save_tensor
from frnet.cli import main
from frnet.core.settings import settings
from frnet.data import DatasetManifest
from frnet.data.dataset import CSV_HEADER


def run(*argv):
    """run the command line, returns the exit code, stdout and stderr"""
    out, err = io.StringIO(), io.StringIO()
    threads = settings.threads
    try:
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
    finally:
        settings.threads = threads
        settings.verbose = False
    return code, out.getvalue(), err.getvalue()


class TestCommandLine(unittest.TestCase):
    """
    Exit codes and outputs of the subcommands.
    """

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)

    def test_verify(self):
        code, out, _ = run("verify", "--suite", "fft", "--quick")
        self.assertEqual(code, 0)
        self.assertIn("fft", out)
        self.assertNotIn("conv", out)

    def test_verify_fault(self):
        code, _, err = run("verify", "--suite", "grad", "--quick", "--inject-fault", "silu")
        self.assertEqual(code, 1)
        self.assertIn("silu", err)

    def test_count(self):
        code, out, _ = run("count", "--small", "--json")
        self.assertEqual(code, 0)
        small = json.loads(out)["total_params"]
        code, out, _ = run("count", "--small", "--json", "--ablate", "disable_fft_encoder")
        self.assertEqual(code, 0)
        self.assertLess(json.loads(out)["total_params"], small)
        code, _, err = run("count", "--config", self.path("missing.ini"))
        self.assertEqual(code, 2)
        self.assertIn("missing.ini", err)
        # the desk-scale model is far off the published budget
        code, _, _ = run("count", "--small", "--assert-budget")
        self.assertEqual(code, 1)

    def test_count_budget(self):
        code, out, _ = run("count", "--assert-budget", "--csv", self.path("costs.csv"))
        self.assertEqual(code, 0)
        self.assertIn("budget: ok", out)
        self.assertTrue(os.path.isfile(self.path("costs.csv")))

    def test_usage_error(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as cm:
                main(["count", "--ablate", "disable_everything"])
        self.assertEqual(cm.exception.code, 2)

    def test_bench_scaling(self):
        code, out, _ = run("bench", "scaling", "--op", "spectral_conv", "--sizes", "8", "16")
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("op,size,kernel,median_seconds,ratio"))

    def test_train_eval_infer(self):
        train = ("train", "--n", "8", "--size", "32", "--small", "--epochs", "1", "--batch", "4",
                 "--seed", "7", "--no-timing")
        code, out, err = run(*train, "--out", self.path("run1"))
        self.assertEqual(code, 0, err)
        self.assertIn("wrote 1 checkpoint(s)", out)
        self.assertIn("lr_base=0.0004", err)
        checkpoint = self.path("run1", "checkpoint_epoch000.frck")
        self.assertTrue(os.path.isfile(checkpoint))
        code, _, _ = run(*train, "--out", self.path("run2"))
        self.assertEqual(code, 0)
        with open(self.path("run1", "train_log.csv")) as f1, open(self.path("run2", "train_log.csv")) as f2:
            self.assertEqual(f1.read(), f2.read())

        code, out, _ = run("eval", "--checkpoint", checkpoint, "--data", self.path("run1", "data"))
        self.assertEqual(code, 0)
        self.assertIn("mean angular error", out)

        image = self.path("image.frtn")
        save_tensor(image, Tensor(np.random.default_rng(0).uniform(size=(3, 32, 32))))
        first = run("infer", "--checkpoint", checkpoint, "--image", image, "--json")
        second = run("infer", "--checkpoint", checkpoint, "--image", image, "--json")
        self.assertEqual(first[0], 0)
        self.assertEqual(first[1], second[1])
        self.assertEqual(set(json.loads(first[1])), {"yaw_rad", "pitch_rad", "yaw_deg", "pitch_deg"})

        save_tensor(image, Tensor(np.zeros((3, 64, 64))))
        code, _, err = run("infer", "--checkpoint", checkpoint, "--image", image)
        self.assertEqual(code, 2)
        self.assertIn("[3, 64, 64]", err)
        self.assertIn("[3, 32, 32]", err)

        empty = self.path("empty")
        os.mkdir(empty)
        with open(os.path.join(empty, "labels.csv"), "w") as f:
            f.write(",".join(CSV_HEADER) + "\n")
        open(os.path.join(empty, "images.frtn"), "wb").close()
        manifest = DatasetManifest(0, 32, Path(empty, "labels.csv"), Path(empty, "images.frtn"))
        manifest.save(Path(empty, "manifest.ini"))
        code, _, _ = run("eval", "--checkpoint", checkpoint, "--data", empty)
        self.assertEqual(code, 2)

    def test_gen_data(self):
        code, out, _ = run("gen-data", "--out", self.path("data"), "--n", "3", "--size", "32")
        self.assertEqual(code, 0)
        self.assertEqual(DatasetManifest.load(self.path("data")).count, 3)
        code, _, err = run("train", "--data", self.path("nowhere"), "--epochs", "1")
        self.assertEqual(code, 2)
        self.assertIn("nowhere", err)

#!/usr/bin/python3
import itertools
import os
import struct
import tempfile
import unittest
from dataclasses import replace

import numpy as np

from frnet import Tensor
from frnet.autodiff import Tape
from frnet.core.errors import FormatError, IntegrityError, ShapeError
from frnet.data import render_sample
from frnet.metrics import GazeAngles
from frnet.nn import (ABLATIONS, Conv2d, FFTEncoder, FFTResidualBlock, FrNet, InvertedResidualBlock,
                      ModelConfig, load_checkpoint, save_checkpoint)
from frnet.nn import functional as F
from frnet.nn.checkpoint import MAGIC
from frnet.train import AdamWState, train_loop
from frnet.train.trainer import train_step
from frnet.verify.oracles import direct_conv2d, separable_weight


class TestFunctional(unittest.TestCase):
    """
    Convolutions against nested-loop oracles.
    """

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_identity_kernels(self):
        x = Tensor(self.rng.standard_normal((3, 8, 8)))
        w = np.eye(3)[:, :, None, None]
        np.testing.assert_array_equal(F.conv2d(x, Tensor(w)).data, x.data)
        w = np.zeros((3, 3, 3, 3))
        for c in range(3):
            w[c, c, 1, 1] = 1.
        np.testing.assert_allclose(F.conv2d(x, Tensor(w)).data, x.data, atol=1e-15)
        d = np.zeros((3, 3, 3))
        d[:, 1, 1] = 1.
        np.testing.assert_allclose(F.depthwise_conv2d(x, Tensor(d)).data, x.data, atol=1e-15)

    def test_conv_against_oracle(self):
        x = self.rng.standard_normal((1, 8, 8))
        w = self.rng.standard_normal((2, 1, 3, 3))
        b = self.rng.standard_normal(2)
        np.testing.assert_allclose(F.conv2d(Tensor(x), Tensor(w), Tensor(b)).data,
                                   direct_conv2d(x, w, b, padding=1), atol=1e-12)
        x = self.rng.standard_normal((3, 8, 8))
        w = self.rng.standard_normal((4, 3, 3, 3))
        np.testing.assert_allclose(F.conv2d(Tensor(x), Tensor(w), stride=2).data,
                                   direct_conv2d(x, w, stride=2, padding=1), atol=1e-12)

    def test_separable_against_oracle(self):
        x = self.rng.standard_normal((2, 4, 4))
        dw = self.rng.standard_normal((2, 3, 3))
        pw = self.rng.standard_normal((3, 2))
        y = F.pointwise_conv2d(F.depthwise_conv2d(Tensor(x), Tensor(dw)), Tensor(pw[:, :, None, None]))
        np.testing.assert_allclose(y.data, direct_conv2d(x, separable_weight(dw, pw), padding=1), atol=1e-12)

    def test_shape_errors(self):
        with self.assertRaises(ShapeError):
            F.conv2d(Tensor(np.ones((2, 4, 4))), Tensor(np.ones((1, 3, 3, 3))))
        with self.assertRaises(ValueError):
            F.conv2d(Tensor(np.ones((2, 4, 4))), Tensor(np.ones((1, 2, 2, 2))))


class TestBlocks(unittest.TestCase):
    """
    Shapes, shortcut behaviour and parameter counts of the building blocks.
    """

    def setUp(self):
        self.rng = np.random.default_rng(12)

    def test_parameter_counts(self):
        self.assertEqual(Conv2d(3, 16, 3).num_parameters(), 448)
        self.assertEqual(Conv2d(5, 5, 1).num_parameters(), 30)

    def test_inverted_residual_block(self):
        x = Tensor(self.rng.standard_normal((4, 8, 8)))
        block = InvertedResidualBlock(4, 4, 1, 2, self.rng)
        self.assertTrue(block.use_residual)
        block.zero_weights()
        np.testing.assert_array_equal(F.inverted_residual_block(block, x).data, x.data)
        down = InvertedResidualBlock(4, 6, 2, 2, self.rng)
        self.assertEqual(F.inverted_residual_block(down, x).shape, (6, 4, 4))

    def test_fft_encoder(self):
        x = Tensor(self.rng.standard_normal((4, 8, 16)))
        encoder = FFTEncoder(4, 8, 16, rng=self.rng)
        self.assertEqual(F.fft_encoder(encoder, x).shape, x.shape)
        encoder.zero_weights()
        np.testing.assert_array_equal(F.fft_encoder(encoder, x).data, x.data)

    def test_fft_residual_block(self):
        x = Tensor(self.rng.standard_normal((6, 8, 8)))
        block = FFTResidualBlock(6, 10, 8, 8, 2, rng=self.rng)
        self.assertEqual(block.fusion_in_channels, 10 + 6)
        self.assertEqual(F.fft_residual_block(block, x).shape, (6, 8, 8))
        plain = FFTResidualBlock(6, 10, 8, 8, 2, use_encoders=False, rng=self.rng)
        self.assertEqual(len(plain.encoders), 0)
        plain.proj.zero_weights()
        self.assertEqual(F.fft_residual_block(plain, x).shape, (6, 8, 8))
        no_concat = FFTResidualBlock(6, 10, 8, 8, 1, concat_shortcut=False, rng=self.rng)
        self.assertEqual(no_concat.fusion_in_channels, 10)


class TestModel(unittest.TestCase):
    """
    The FR-Net model, its configuration and checkpoints.
    """

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            ModelConfig(input_size=96)
        with self.assertRaises(ValueError):
            ModelConfig(stage_channels=(16, 24, 48))
        with self.assertRaises(ValueError):
            ModelConfig().with_ablation("disable_everything")

    def test_config_ini(self):
        config = ModelConfig.small().with_ablation("disable_concat_shortcut")
        self.assertEqual(ModelConfig.from_ini(config.to_ini()), config)
        self.assertEqual(config.ablations, ["disable_concat_shortcut"])
        with self.assertRaises(ValueError):
            ModelConfig.from_ini("[model]\nno_such_key = 1\n")
        with self.assertRaises(ValueError):
            ModelConfig.from_ini("[model]\ndisable_fft_encoder = true\n")
        with self.assertRaises(FileNotFoundError):
            ModelConfig.load("/nonexistent/frnet.ini")

    def test_shape_ladder(self):
        self.assertEqual(ModelConfig().feature_sizes(), [128, 64, 32, 16, 8])

    def test_forward(self):
        model = FrNet(ModelConfig.small(), seed=1)
        image = Tensor(np.random.default_rng(0).uniform(size=(3, 64, 64)))
        y = F.frnet_forward(image, model)
        self.assertEqual(y.shape, (2,))
        self.assertEqual(y.data.tobytes(), model.predict(image).data.tobytes())
        with self.assertRaises(ShapeError):
            model.predict(Tensor(np.zeros((3, 32, 32))))
        model.zero_weights()
        np.testing.assert_array_equal(model.predict(image).data, [0., 0.])

    def test_module_tree(self):
        model = FrNet(ModelConfig.small())
        self.assertIn("block1: FFTResidualBlock", repr(model))
        names = [name for name, _ in model.named_parameters()]
        self.assertIn("block2.encoders.0.mask.re", names)
        self.assertEqual(len(names), len(set(names)))
        self.assertEqual(model.parameters()[0].name, names[0])

    def test_ablations(self):
        base = FrNet(ModelConfig()).num_parameters()
        self.assertEqual(
            FrNet(ModelConfig().with_ablation("disable_encoder_shortcut")).num_parameters(), base)
        # only the fusion convs lose their fan-in from the block input
        no_concat = FrNet(ModelConfig().with_ablation("disable_concat_shortcut")).num_parameters()
        self.assertEqual(base - no_concat, 48 * 48 + 64 * 64 + 80 * 80)
        self.assertLess(FrNet(ModelConfig().with_ablation("disable_fft_encoder")).num_parameters(), base)
        replaced = FrNet(ModelConfig().with_ablation("disable_fft_residual_block"))
        self.assertIsInstance(replaced.block2, InvertedResidualBlock)
        # without encoders exactly the encoder parameters are gone
        encoder_params = sum(p.size for name, p in FrNet(ModelConfig()).named_parameters()
                             if ".encoders." in name)
        self.assertEqual(base - FrNet(ModelConfig().with_ablation("disable_fft_encoder")).num_parameters(),
                         encoder_params)

    def test_ablations_train(self):
        """every ablated model trains an epoch, every flag combination runs a training step"""
        config = ModelConfig.small(input_size=32)
        samples = [render_sample(GazeAngles(0.1 * i - 0.1, 0.2 - 0.1 * i), 32, seed=i) for i in range(3)]
        for name in ABLATIONS:
            model = FrNet(config.with_ablation(name), seed=0)
            before = [p.value.numpy() for p in model.parameters()]
            log = train_loop(model, samples, 1, batch_size=3, seed=0)
            self.assertTrue(np.isfinite(log.records[0].mean_loss), name)
            changed = [not np.array_equal(b, p.value.data) for b, p in zip(before, model.parameters())]
            self.assertTrue(any(changed), name)
            for p in model.parameters():
                self.assertTrue(np.all(np.isfinite(p.value.data)), p.name)
        for flags in itertools.product((False, True), repeat=len(ABLATIONS)):
            names = [name for name, on in zip(ABLATIONS, flags) if on]
            model = FrNet(config.with_ablation(*names), seed=1)
            self.assertEqual(model.predict(samples[0].image).shape, (2,))
            losses, _ = train_step(model, AdamWState(model.parameters()), samples[:2], 1e-3)
            self.assertTrue(np.all(np.isfinite(losses)), names)

    def test_no_dead_parameters(self):
        """every parameter tensor receives a nonzero gradient"""
        config = ModelConfig.small(input_size=128)
        model = FrNet(config, seed=3)
        rng = np.random.default_rng(4)
        tape = Tape()
        pred = model(tape, tape.constant(rng.uniform(size=model.input_shape)))
        loss = tape.record("smooth_l1", [pred, tape.constant(rng.standard_normal(2))], beta=1.)
        grads = tape.parameter_gradients(loss)
        self.assertEqual(len(grads), len(model.parameters()))
        for p, g in grads.items():
            self.assertGreater(np.abs(g).max(), 0., p.name)

    def test_checkpoint(self):
        config = replace(ModelConfig.small(), head_channels=48)
        model = FrNet(config, seed=5)
        image = Tensor(np.random.default_rng(6).uniform(size=(3, 64, 64)))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "model.frck")
            save_checkpoint(path, model)
            with open(path, "rb") as f:
                self.assertEqual(f.read(4), MAGIC)
            loaded = load_checkpoint(path)
            self.assertEqual(loaded.config, config)
            self.assertEqual(loaded.predict(image).data.tobytes(), model.predict(image).data.tobytes())
            with self.assertRaises(FormatError):
                load_checkpoint(path, ModelConfig.small())
            with open(path, "rb") as f:
                data = f.read()
            # shift the manifest offset of the second parameter by one element
            name, p = list(model.named_parameters())[1]
            at = data.find(name.encode("utf-8")) + len(name) + 4 + 4 * len(p.shape)
            (offset,) = struct.unpack("<Q", data[at:at + 8])
            self.assertGreater(offset, 0)
            with open(path, "wb") as f:
                f.write(data[:at] + struct.pack("<Q", offset + 8) + data[at + 8:])
            with self.assertRaises(IntegrityError) as cm:
                load_checkpoint(path)
            self.assertIn(name, str(cm.exception))
            with open(path, "wb") as f:
                f.write(data[:-10])
            with self.assertRaises(IntegrityError) as cm:
                load_checkpoint(path)
            self.assertIn(path, str(cm.exception))
        with self.assertRaises(FileNotFoundError):
            load_checkpoint("/nonexistent/model.frck")

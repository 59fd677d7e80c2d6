#!/usr/bin/python3
import contextlib
import io
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from frnet import Tensor, ComplexTensor, settings
from frnet.core import tensor as T
from frnet.core.errors import FormatError, IntegrityError, ShapeError
from frnet.core.serialization import iter_tensors, load_tensor, read_tensor, save_tensor, write_tensor
from frnet.core.settings import Settings, threads_from_env
from frnet.verify.oracles import naive_matmul


class TestTensor(unittest.TestCase):
    """
    Construction, element-wise arithmetic and shape manipulation of tensors.
    """

    def test_zeros(self):
        np.testing.assert_array_equal(T.zeros([2, 2]).data, [[0, 0], [0, 0]])
        np.testing.assert_array_equal(T.zeros([1]).data, [0])
        self.assertEqual(T.zeros([3, 5, 7]).data.sum(), 0)

    def test_invalid_shape(self):
        with self.assertRaises(ShapeError):
            T.zeros([2, 0])
        with self.assertRaises(ShapeError):
            T.zeros([])

    def test_read_only(self):
        t = T.ones([3])
        with self.assertRaises(ValueError):
            t.data[0] = 2.

    def test_elementwise(self):
        np.testing.assert_array_equal(T.add(Tensor([1, 2]), Tensor([3, 4])).data, [4, 6])
        np.testing.assert_array_equal(T.mul(Tensor([2, 3]), Tensor([4, 5])).data, [8, 15])
        x = Tensor(np.random.default_rng(0).standard_normal((3, 4)))
        np.testing.assert_array_equal(T.mul(x, T.ones([3, 4])).data, x.data)
        with self.assertRaises(ShapeError):
            T.add(Tensor([1, 2]), Tensor([1, 2, 3]))
        with self.assertRaises(ValueError):
            T.elementwise(x, x, "div")

    def test_complex_hadamard(self):
        rng = np.random.default_rng(1)
        z = ComplexTensor(rng.standard_normal((4, 4)), rng.standard_normal((4, 4)))
        one = ComplexTensor(np.ones((4, 4)))
        np.testing.assert_array_equal(T.complex_hadamard(one, z).values, z.values)
        i = ComplexTensor([0.], [1.])
        np.testing.assert_array_equal(T.complex_hadamard(i, i).values, [-1. + 0j])
        a = ComplexTensor(rng.standard_normal(6), rng.standard_normal(6))
        b = ComplexTensor(rng.standard_normal(6), rng.standard_normal(6))
        expected = [complex(x) * complex(y) for x, y in zip(a.values, b.values)]
        np.testing.assert_allclose(T.complex_hadamard(a, b).values, expected, atol=1e-15)

    def test_pad_and_crop(self):
        np.testing.assert_array_equal(T.pad2d_zero(Tensor([[1]]), 2, 2).data, [[1, 0], [0, 0]])
        k = Tensor(np.random.default_rng(2).standard_normal((3, 5)))
        np.testing.assert_array_equal(T.pad2d_zero(k, 3, 5).data, k.data)
        padded = T.pad2d_zero(k, 8, 8)
        self.assertAlmostEqual(padded.data.sum(), k.data.sum(), places=12)
        np.testing.assert_array_equal(T.crop2d(padded, 3, 5).data, k.data)
        with self.assertRaises(ValueError):
            T.pad2d_zero(k, 2, 8)

    def test_concat_and_slice(self):
        rng = np.random.default_rng(3)
        a = Tensor(rng.standard_normal((2, 4, 4)))
        b = Tensor(rng.standard_normal((3, 4, 4)))
        c = T.concat_channels(a, b)
        self.assertEqual(c.shape, (5, 4, 4))
        np.testing.assert_array_equal(T.slice_channels(c, 0, 2).data, a.data)
        np.testing.assert_array_equal(T.slice_channels(c, 2, 5).data, b.data)
        with self.assertRaises(ShapeError):
            T.concat_channels(a, Tensor(rng.standard_normal((1, 4, 2))))

    def test_matmul(self):
        b = Tensor([[1., 2.], [3., 4.]])
        np.testing.assert_array_equal(T.matmul(Tensor(np.eye(2)), b).data, b.data)
        np.testing.assert_array_equal(T.matmul(b, Tensor([[1.], [1.]])).data, [[3.], [7.]])
        rng = np.random.default_rng(4)
        x, y = rng.standard_normal((5, 5)), rng.standard_normal((5, 5))
        np.testing.assert_allclose(T.matmul(Tensor(x), Tensor(y)).data, naive_matmul(x, y), atol=1e-12)
        with self.assertRaises(ShapeError):
            T.matmul(Tensor(x), Tensor(np.ones((4, 2))))

    def test_reshape_round_trip(self):
        x = Tensor(np.random.default_rng(5).standard_normal((2, 3, 4)))
        back = T.reshape(T.reshape(x, [6, 4]), [2, 3, 4])
        self.assertEqual(back.data.tobytes(), x.data.tobytes())
        with self.assertRaises(ShapeError):
            T.reshape(x, [5, 5])

    def test_precision_switch(self):
        try:
            settings.precision = "f32"
            self.assertEqual(T.zeros([2]).dtype, np.float32)
        finally:
            settings.precision = "f64"
        self.assertEqual(T.zeros([2]).dtype, np.float64)


class TestSerialization(unittest.TestCase):
    """
    The binary tensor record format.
    """

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        tensors = [Tensor(rng.standard_normal((3, 4, 5))),
                   Tensor(rng.standard_normal(7), dtype=np.float32)]
        buf = io.BytesIO()
        for t in tensors:
            write_tensor(buf, t)
        buf.seek(0)
        loaded = list(iter_tensors(buf))
        self.assertEqual(len(loaded), 2)
        for t, u in zip(tensors, loaded):
            self.assertEqual(t.dtype, u.dtype)
            self.assertEqual(t.data.tobytes(), u.data.tobytes())

    def test_header_layout(self):
        buf = io.BytesIO()
        write_tensor(buf, Tensor([[1., 2.]]))
        raw = buf.getvalue()
        self.assertEqual(raw[:4], b"FRTN")
        # version, rank, dims, dtype code and 2 doubles
        self.assertEqual(len(raw), 4 + 4 + 4 + 2 * 4 + 1 + 16)
        self.assertEqual(raw[20], 0)

    def test_truncated(self):
        buf = io.BytesIO()
        write_tensor(buf, Tensor(np.ones((4, 4))))
        with self.assertRaises(IntegrityError):
            read_tensor(io.BytesIO(buf.getvalue()[:-3]))
        self.assertIsNone(read_tensor(io.BytesIO(b"")))

    def test_bad_magic(self):
        with self.assertRaises(FormatError):
            read_tensor(io.BytesIO(b"XXXX" + bytes(20)))

    def test_file(self):
        t = Tensor(np.arange(6.).reshape(2, 3))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.frtn")
            save_tensor(path, t)
            np.testing.assert_array_equal(load_tensor(path).data, t.data)
            with open(path, "ab") as f:
                f.write(b"\0")
            with self.assertRaises(IntegrityError):
                load_tensor(path)

    def test_truncation_names_file_and_record(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "cut.frtn")
            buf = io.BytesIO()
            write_tensor(buf, Tensor(np.ones((4, 4))))
            with open(path, "wb") as f:
                f.write(buf.getvalue()[:-3])
            with open(path, "rb") as f:
                with self.assertRaises(IntegrityError) as cm:
                    read_tensor(f, label="image 7")
            self.assertIn(path, str(cm.exception))
            self.assertIn("image 7", str(cm.exception))


class TestSettings(unittest.TestCase):
    """
    The FRNET_THREADS environment variable.
    """

    def test_threads_from_env(self):
        self.assertEqual(threads_from_env(None), 1)
        self.assertEqual(threads_from_env(""), 1)
        self.assertEqual(threads_from_env("4"), 4)
        with contextlib.redirect_stderr(io.StringIO()) as err:
            self.assertEqual(threads_from_env("many"), 1)
            self.assertEqual(threads_from_env("-2"), 1)
        self.assertIn("FRNET_THREADS='many'", err.getvalue())

    def test_invalid_env_does_not_raise(self):
        with mock.patch.dict(os.environ, {"FRNET_THREADS": "four"}):
            with contextlib.redirect_stderr(io.StringIO()):
                self.assertEqual(Settings().threads, 1)
        with mock.patch.dict(os.environ, {"FRNET_THREADS": "3"}):
            self.assertEqual(Settings().threads, 3)

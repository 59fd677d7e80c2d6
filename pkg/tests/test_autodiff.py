#!/usr/bin/python3
import unittest

import numpy as np

from frnet.autodiff import REGISTRY, Parameter, Tape, backward, check_gradients, inject_fault, zero_grad
from frnet.autodiff.ops import FAULTS, get_op
from frnet.verify.suites import grad_suite


class TestTape(unittest.TestCase):
    """
    Recording on the tape and the basic gradient rules.
    """

    def test_record(self):
        tape = Tape()
        a = tape.constant([1., 2.])
        b = tape.constant([3., 5.])
        n = len(tape)
        c = tape.record("add", [a, b])
        self.assertEqual(len(tape), n + 1)
        np.testing.assert_array_equal(tape.value(c).data, [4., 7.])

    def test_invalid_records(self):
        tape = Tape()
        a = tape.constant([1.])
        with self.assertRaises(ValueError):
            tape.record("add", [a, 5])
        with self.assertRaises(ValueError):
            tape.record("add", [a])
        with self.assertRaises(KeyError):
            tape.record("no_such_op", [a])

    def test_simple_gradients(self):
        x = np.random.default_rng(0).standard_normal((3, 4))
        tape = Tape()
        xi = tape.constant(x, requires_grad=True)
        loss = tape.record("sum", [xi])
        np.testing.assert_array_equal(tape.gradients(loss)[xi], np.ones((3, 4)))
        tape = Tape()
        xi = tape.constant(x, requires_grad=True)
        loss = tape.record("sum", [tape.record("mul", [xi, xi])])
        np.testing.assert_allclose(tape.gradients(loss)[xi], 2 * x, atol=1e-15)

    def test_non_scalar_loss(self):
        tape = Tape()
        x = tape.constant([1., 2.], requires_grad=True)
        with self.assertRaises(ValueError):
            tape.gradients(x)

    def test_concat_routing(self):
        rng = np.random.default_rng(1)
        tape = Tape()
        a = tape.constant(rng.standard_normal((2, 4, 4)), requires_grad=True)
        b = tape.constant(rng.standard_normal((3, 4, 4)), requires_grad=True)
        c = tape.record("concat_channels", [a, b])
        r = rng.standard_normal((5, 4, 4))
        loss = tape.record("sum", [tape.record("mul", [c, tape.constant(r)])])
        grads = tape.gradients(loss)
        np.testing.assert_array_equal(grads[a], r[:2])
        np.testing.assert_array_equal(grads[b], r[2:])

    def test_parameters(self):
        p = Parameter("w", np.arange(4.))
        tape = Tape()
        self.assertEqual(tape.parameter(p), tape.parameter(p))
        loss = tape.record("sum", [tape.record("mul", [tape.parameter(p), tape.constant(np.full(4, 3.))])])
        grads = backward(tape, loss)
        np.testing.assert_array_equal(grads[p].data, np.full(4, 3.))
        np.testing.assert_array_equal(p.grad.data, np.full(4, 3.))

    def test_zero_grad(self):
        p = Parameter("w", np.ones((2, 2)))

        def run():
            tape = Tape()
            loss = tape.record("sum", [tape.record("mul", [tape.parameter(p), tape.parameter(p)])])
            tape.backward(loss)

        run()
        single = p.grad.numpy()
        zero_grad([p])
        self.assertEqual(p.grad.data.sum(), 0.)
        run()
        run()
        np.testing.assert_array_equal(p.grad.data, 2 * single)
        zero_grad([p])
        run()
        np.testing.assert_array_equal(p.grad.data, single)
        zero_grad([])

    def test_scope(self):
        tape = Tape()
        with tape.scope("block1"):
            with tape.scope("fusion"):
                x = tape.constant([1.])
        self.assertEqual(tape.nodes[x].scope, "block1.fusion")
        self.assertEqual(tape.current_scope, "")


class TestGradientRules(unittest.TestCase):
    """
    Every gradient rule against central finite differences.
    """

    def test_all_ops_covered(self):
        names = [c.name for c in grad_suite(np.random.default_rng(0), quick=True)]
        for op in REGISTRY:
            self.assertTrue(any(name.split()[0] == op for name in names), f"no gradient check of '{op}'")

    def test_grad_suite(self):
        for case in grad_suite(np.random.default_rng(3), quick=True):
            self.assertTrue(case.passed, str(case))

    def test_apply_mask_identity(self):
        x = np.random.default_rng(2).standard_normal((2, 8, 8))
        tape = Tape()
        xi = tape.constant(x, requires_grad=True)
        y = tape.record("apply_mask", [xi, tape.constant(np.ones(x.shape)), tape.constant(np.zeros(x.shape))])
        grads = tape.gradients(tape.record("sum", [y]))
        np.testing.assert_allclose(grads[xi], np.ones(x.shape), atol=1e-12)

    def test_apply_mask_zero_upstream(self):
        rng = np.random.default_rng(3)
        op = get_op("apply_mask")
        x, re, im = (rng.standard_normal((2, 4, 8)) for _ in range(3))
        _, saved = op.forward([x, re, im])
        _, dre, dim = op.backward(np.zeros(x.shape), saved, [True, True, True])
        self.assertEqual(np.abs(dre).max(), 0.)
        self.assertEqual(np.abs(dim).max(), 0.)

    def test_mask_parameters(self):
        rng = np.random.default_rng(4)
        re = Parameter("re", rng.standard_normal((2, 8, 8)))
        im = Parameter("im", rng.standard_normal((2, 8, 8)))

        def build(tape, ids):
            return tape.record("apply_mask", [ids["x"], tape.parameter(re), tape.parameter(im)])

        results = check_gradients(build, {"x": rng.standard_normal((2, 8, 8))}, [re, im])
        self.assertEqual([r.name for r in results], ["x", "re", "im"])
        for r in results:
            self.assertTrue(r.passed, str(r))

    def test_injected_fault_is_detected(self):
        rng = np.random.default_rng(5)
        inputs = {"x": rng.standard_normal((3, 4, 4))}

        def build(tape, ids):
            return tape.record("silu", [ids["x"]])

        with inject_fault("silu"):
            self.assertFalse(all(r.passed for r in check_gradients(build, inputs)))
        self.assertNotIn("silu", FAULTS)
        self.assertTrue(all(r.passed for r in check_gradients(build, inputs)))

    def test_determinism(self):
        x = np.random.default_rng(6).standard_normal((3, 8, 8))
        w = np.random.default_rng(7).standard_normal((4, 3, 3, 3))

        def grads():
            tape = Tape()
            xi = tape.constant(x, requires_grad=True)
            wi = tape.constant(w, requires_grad=True)
            y = tape.record("silu", [tape.record("conv2d", [xi, wi], stride=1, padding=1)])
            g = tape.gradients(tape.record("mean", [y]))
            return g[xi].tobytes(), g[wi].tobytes()

        self.assertEqual(grads(), grads())

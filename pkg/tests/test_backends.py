"""Compiled extension vs pure-NumPy twin: same inputs, same outputs."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gaitphase import _kernels_py as pure

compiled = pytest.importorskip(
    "gaitphase._kernels", reason="compiled extension not built"
)


def test_backend_tags_differ():
    assert pure.BACKEND != compiled.BACKEND


def test_env_var_forces_pure_backend():
    code = "import gaitphase.backend as b; print(b.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**os.environ, "GAITPHASE_PURE": "1"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == pure.BACKEND


def test_default_prefers_compiled():
    code = "import gaitphase.backend as b; print(b.BACKEND)"
    env = {k: v for k, v in os.environ.items() if k != "GAITPHASE_PURE"}
    out = subprocess.run(
        [sys.executable, "-c", code],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == compiled.BACKEND


class TestWindowFeatures:
    def test_close_on_random_signals(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(50, 3000))
            x = rng.standard_normal(n) * float(rng.uniform(0.01, 100))
            width = int(rng.integers(2, min(n, 400) + 1))
            starts = np.arange(0, n - width + 1, int(rng.integers(1, 50)), dtype=np.int64)
            a = pure.window_features(x, starts, width)
            b = compiled.window_features(x, starts, width)
            np.testing.assert_allclose(a, b, atol=1e-12, rtol=1e-12)

    def test_zero_crossings_exactly_equal(self):
        rng = np.random.default_rng(2)
        x = rng.integers(-3, 4, 5000).astype(np.float64)  # many zeros and ties
        starts = np.arange(0, 4800, 7, dtype=np.int64)
        a = pure.window_features(x, starts, 200)
        b = compiled.window_features(x, starts, 200)
        np.testing.assert_array_equal(a[:, 0], b[:, 0])


class TestGrowTree:
    @pytest.mark.parametrize("mode", [0, 1])
    @pytest.mark.parametrize("mtry", [2, 4])
    def test_bit_identical_trees(self, mode, mtry):
        rng = np.random.default_rng(3)
        for seed in (1, 99, 2**40):
            n = 300
            X = rng.standard_normal((n, 4))
            if mode == 0:
                y1 = rng.integers(0, 2, n).astype(np.float64)
                y2 = None
            else:
                y1 = rng.standard_normal(n)  # gradients
                y2 = rng.uniform(0.01, 0.25, n)  # hessians
            idx = np.arange(n, dtype=np.int64)
            args = (X, y1, y2, idx, mtry, 8, 2, 2, mode, 1e-6, seed)
            a = pure.grow_tree(*args)
            b = compiled.grow_tree(*args)
            for arr_a, arr_b in zip(a, b):
                np.testing.assert_array_equal(arr_a, arr_b)

    def test_predictions_identical(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((500, 4))
        y = (X[:, 0] + X[:, 2] > 0).astype(np.float64)
        idx = np.arange(500, dtype=np.int64)
        nodes = pure.grow_tree(X, y, None, idx, 4, 10, 1, 2, 0, 0.0, 5)
        Xq = rng.standard_normal((200, 4))
        np.testing.assert_array_equal(
            pure.predict_tree(*nodes, Xq), compiled.predict_tree(*nodes, Xq)
        )


class TestSmoSolve:
    def test_identical_solutions(self):
        rng = np.random.default_rng(6)
        for trial in range(5):
            n = 80
            X = rng.standard_normal((n, 4))
            y = np.where(X[:, 0] + 0.3 * rng.standard_normal(n) > 0, 1.0, -1.0)
            d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
            K = np.exp(-0.5 * d2)
            for record in (False, True):
                a_p, rho_p, it_p, obj_p, tr_p = pure.smo_solve(K, y, 2.0, 1e-3, 10_000, record)
                a_c, rho_c, it_c, obj_c, tr_c = compiled.smo_solve(K, y, 2.0, 1e-3, 10_000, record)
                np.testing.assert_array_equal(a_p, a_c)
                assert it_p == it_c
                # summation order differs between the twins, so the scalar
                # reductions may disagree in the last bit
                assert rho_p == pytest.approx(rho_c, abs=1e-12)
                assert obj_p == pytest.approx(obj_c, abs=1e-12)
                if record:
                    np.testing.assert_allclose(tr_p, tr_c, atol=1e-12)

import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from qdcavity import integrate

from conftest import random_matrix

compiled = pytest.mark.skipif(integrate.compiled_rk4_linear is None, reason="extension not built")


def _cases(rng):
    for n, m in ((4, 1), (16, 2), (16, 16), (64, 1)):
        L = random_matrix(rng, n) * 0.3
        yield L, random_matrix(rng, n, m)


@compiled
def test_backends_agree(rng):
    for L, y0 in _cases(rng):
        a = integrate.compiled_rk4_linear(L, y0, 0.01, 3, 20)
        b = integrate.python_rk4_linear(L, y0, 0.01, 3, 20)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_exponential_of_scalar(backend):
    fn = integrate.python_rk4_linear if backend == "python" else integrate.compiled_rk4_linear
    if fn is None:
        pytest.skip("extension not built")
    L = np.array([[-0.5 + 2j]])
    out = fn(L, np.array([1.0 + 0j]), 0.001, 10, 101)
    t = np.arange(101) * 0.01
    np.testing.assert_allclose(out[:, 0, 0], np.exp(L[0, 0] * t), atol=1e-12)


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_shape_mismatch(backend):
    fn = integrate.python_rk4_linear if backend == "python" else integrate.compiled_rk4_linear
    if fn is None:
        pytest.skip("extension not built")
    with pytest.raises(ValueError):
        fn(np.eye(3), np.ones(4), 0.1, 1, 2)


def test_input_not_mutated(rng):
    L = random_matrix(rng, 4)
    y0 = random_matrix(rng, 4, 1)
    keep = y0.copy()
    integrate.rk4_linear(L, y0, 0.01, 2, 5)
    np.testing.assert_array_equal(y0, keep)


def test_pure_python_switch():
    env = dict(os.environ, QDCAVITY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import qdcavity; print(qdcavity.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@compiled
@pytest.mark.parametrize("n, expect", [(16, "compiled"), (integrate.COMPILED_MAX_DIM + 1, "python")])
def test_size_dispatch(rng, n, expect):
    L = random_matrix(rng, n) * 0.1
    y0 = random_matrix(rng, n, 1)
    ref = getattr(integrate, f"{expect}_rk4_linear")(L, y0, 0.01, 2, 3)
    np.testing.assert_array_equal(integrate.rk4_linear(L, y0, 0.01, 2, 3), ref)

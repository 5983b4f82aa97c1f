"""Backend selection for the RK4 kernel.

The compiled extension is used when it imports; otherwise the numpy version
is used.  Setting ``QDCAVITY_PURE_PYTHON=1`` forces the numpy version.
Even with the extension loaded, generators larger than
``COMPILED_MAX_DIM`` go to numpy, whose BLAS matmul wins at that size.
"""
import os

from . import _rk4_py

python_rk4_linear = _rk4_py.rk4_linear

try:
    if os.environ.get("QDCAVITY_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from ._kernels import rk4_linear as compiled_rk4_linear
except ImportError:
    compiled_rk4_linear = None

#: crossover measured with benchmarks/bench_kernels.py
COMPILED_MAX_DIM = 48

if compiled_rk4_linear is not None:
    BACKEND = "cython"

    def rk4_linear(L, y0, h, substeps, n_samples):
        kernel = compiled_rk4_linear if L.shape[0] <= COMPILED_MAX_DIM else python_rk4_linear
        return kernel(L, y0, h, substeps, n_samples)
else:
    BACKEND = "python"
    rk4_linear = python_rk4_linear

__all__ = ["BACKEND", "COMPILED_MAX_DIM", "rk4_linear", "python_rk4_linear", "compiled_rk4_linear"]

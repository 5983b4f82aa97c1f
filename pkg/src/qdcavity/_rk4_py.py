"""Numpy implementation of the RK4 kernel, used when the extension is absent."""
import numpy as np


def rk4_linear(L, y0, h, substeps, n_samples):
    """Integrate ``dY/dt = L Y`` with classical RK4.

    Returns an array of shape ``(n_samples, n, m)``; sample ``s`` is the state
    after ``s * substeps`` steps of size ``h``.
    """
    L = np.ascontiguousarray(L, dtype=complex)
    y = np.array(y0, dtype=complex, copy=True)
    if y.ndim == 1:
        y = y[:, None]
    if L.shape != (y.shape[0], y.shape[0]):
        raise ValueError("generator and state dimensions disagree")
    out = np.empty((n_samples,) + y.shape, dtype=complex)
    out[0] = y
    half, sixth = 0.5 * h, h / 6.0
    for s in range(1, n_samples):
        for _ in range(substeps):
            k1 = L @ y
            k2 = L @ (y + half * k1)
            k3 = L @ (y + half * k2)
            k4 = L @ (y + h * k3)
            y = y + sixth * (k1 + 2 * k2 + 2 * k3 + k4)
        out[s] = y
    return out

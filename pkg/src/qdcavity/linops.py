"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.

Vectorization convention
------------------------
Column stacking is used everywhere: ``vec(X)[i + d*j] = X[i, j]``, which is
``X.reshape(-1, order="F")``.  With this convention

    vec(A @ X @ B) = kron(B.T, A) @ vec(X)

and every superoperator in the package is built from :func:`spre` and
:func:`spost` so that the rule is applied in exactly one place.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Tolerance for the density-matrix checks (Hermiticity, trace, positivity).
DM_ATOL = 1e-9


class FactorizationError(ValueError):
    """Matrix dimension does not match a tensor factorization."""


class DensityMatrixError(ValueError):
    """Input is not a valid density matrix."""


@dataclass(frozen=True)
class TensorFactorization:
    """Ordered factor dimensions of a tensor-product Hilbert space."""

    factor_dims: tuple[int, ...]

    def __init__(self, factor_dims: Iterable[int]):
        dims = tuple(int(d) for d in factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise FactorizationError(f"factor dimensions must be positive, got {dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def __len__(self) -> int:
        return len(self.factor_dims)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; row and column dimensions multiply."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Sequence) -> np.ndarray:
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = kron(out, m)
    return out


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def partial_trace(rho, fact: TensorFactorization | Sequence[int], keep) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Parameters
    ----------
    rho : array_like
        Square matrix on the full space.
    fact : TensorFactorization or sequence of int
        Factor dimensions; their product must equal ``rho.shape[0]``.
    keep : int or iterable of int
        Indices of the factors to keep.  The result is ordered as the factors
        appear in ``fact`` regardless of the order given here.

    Raises
    ------
    FactorizationError
        If ``rho`` is not square or its dimension disagrees with ``fact``.
    """
    if not isinstance(fact, TensorFactorization):
        fact = TensorFactorization(fact)
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1] or rho.shape[0] != fact.dim:
        raise FactorizationError(
            f"matrix of shape {rho.shape} does not match factorization {fact.factor_dims}"
        )
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted(set(int(k) for k in keep))
    n = len(fact)
    if any(k < 0 or k >= n for k in keep):
        raise FactorizationError(f"keep indices {keep} out of range for {n} factors")

    dims = fact.factor_dims
    t = rho.reshape(dims + dims)
    # contract traced factors pairwise, highest index first so axis numbers stay valid
    for k in sorted(set(range(n)) - set(keep), reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def vectorize(rho) -> np.ndarray:
    """Column-stack a matrix into a 1-D vector."""
    return as_matrix(rho).reshape(-1, order="F")


def devectorize(v, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise FactorizationError(f"vector of length {v.size} is not a {dim}x{dim} matrix")
    return v.reshape(dim, dim, order="F")


def apply_superop(S, rho) -> np.ndarray:
    """Apply a ``d²×d²`` superoperator to a ``d×d`` matrix."""
    S = as_matrix(S)
    rho = as_matrix(rho)
    d = rho.shape[0]
    if rho.shape != (d, d) or S.shape != (d * d, d * d):
        raise FactorizationError(
            f"superoperator of shape {S.shape} cannot act on matrix of shape {rho.shape}"
        )
    return devectorize(S @ vectorize(rho), d)


def spre(a) -> np.ndarray:
    """Superoperator of ``X -> a @ X``."""
    a = as_matrix(a)
    return np.kron(np.eye(a.shape[1]), a)


def spost(b) -> np.ndarray:
    """Superoperator of ``X -> X @ b``."""
    b = as_matrix(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a, b) -> np.ndarray:
    """Superoperator of ``X -> a @ X @ b``."""
    return np.kron(as_matrix(b).T, as_matrix(a))


def identity_superop(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


def hermiticity_error(rho) -> float:
    rho = as_matrix(rho)
    return float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0


def density_matrix_violations(rho, atol: float = DM_ATOL) -> list[str]:
    """Describe every density-matrix invariant ``rho`` breaks (empty if valid)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return [f"not square: shape {rho.shape}"]
    problems = []
    herm = hermiticity_error(rho)
    if herm > atol:
        problems.append(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        problems.append(f"trace {tr:.12g} differs from 1")
    # positivity on the Hermitian part so a tiny anti-Hermitian residue does not mask it
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam[0] < -atol:
        problems.append(f"negative eigenvalue {lam[0]:.3e}")
    return problems


def is_density_matrix(rho, atol: float = DM_ATOL) -> bool:
    return not density_matrix_violations(rho, atol)


def check_density_matrix(rho, atol: float = DM_ATOL, name: str = "rho") -> np.ndarray:
    """Return ``rho`` as a complex array or raise :class:`DensityMatrixError`."""
    problems = density_matrix_violations(rho, atol)
    if problems:
        raise DensityMatrixError(f"{name}: " + "; ".join(problems))
    return np.asarray(rho, dtype=complex)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())

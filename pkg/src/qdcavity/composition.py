"""Joint state of two independent subsystems and its reduced pair states.

The joint space is ordered ``q_A ⊗ c_A ⊗ q_B ⊗ c_B``.  Two-qubit matrices use
the computational basis ``|11>, |10>, |01>, |00>``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import integrate
from .dynamics import (
    CoefficientTrajectory,
    NumericalInvariantError,
    Propagator,
    TimeGrid,
    _check_states,
    _unvec_batch,
    step_plan,
)
from .linops import (
    check_density_matrix,
    devectorize,
    kron,
    partial_trace,
    projector,
    spost,
    spre,
    sprepost,
    vectorize,
)
from .model import (
    SubsystemParams,
    TruncationSpec,
    basis_index,
    build_hamiltonian,
    subsystem_operators,
)

Family = Literal["two-excitation", "one-excitation"]
FAMILIES = ("two-excitation", "one-excitation")


class GridMismatchError(ValueError):
    """Two propagators were sampled on different time grids."""


@dataclass(frozen=True)
class InitialJointState:
    """Bell-like qubit state with both cavities in vacuum.

    ``two-excitation``: ``α|00>_q + β|11>_q``; ``one-excitation``:
    ``α|10>_q + β|01>_q``.  ``beta`` defaults to ``+sqrt(1 - α²)``.
    """

    alpha: float
    beta: complex | None = None
    family: Family = "two-excitation"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta is None:
            object.__setattr__(self, "beta", complex(math.sqrt(max(0.0, 1 - self.alpha ** 2))))
        else:
            object.__setattr__(self, "beta", complex(self.beta))
        norm = self.alpha ** 2 + abs(self.beta) ** 2
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def with_phase(cls, alpha: float, beta_phase: float = 0.0,
                   family: Family = "two-excitation") -> InitialJointState:
        beta = math.sqrt(max(0.0, 1 - alpha ** 2)) * cmath.exp(1j * beta_phase)
        return cls(alpha, beta, family)

    @property
    def initial_concurrence(self) -> float:
        return 2 * abs(self.alpha * self.beta)

    def qubit_ket(self) -> np.ndarray:
        """Two-qubit ket in the computational basis."""
        psi = np.zeros(4, dtype=complex)
        if self.family == "two-excitation":
            psi[3], psi[0] = self.alpha, self.beta
        else:
            psi[1], psi[2] = self.alpha, self.beta
        return psi

    def density_matrix(self, trunc: TruncationSpec = TruncationSpec()) -> JointState:
        d = trunc.dim
        psi = np.zeros(d * d, dtype=complex)
        # computational index (x_A, x_B) -> subsystem states |x_A 0_c>, |x_B 0_c>
        for idx, amp in enumerate(self.qubit_ket()):
            if amp == 0:
                continue
            xa, xb = 1 - idx // 2, 1 - idx % 2
            k = basis_index(xa, 0, trunc) * d + basis_index(xb, 0, trunc)
            psi[k] = amp
        return JointState(projector(psi), trunc)


@dataclass(frozen=True)
class JointState:
    matrix: np.ndarray = field(repr=False)
    trunc: TruncationSpec = TruncationSpec()

    def __post_init__(self):
        m = check_density_matrix(self.matrix, name="joint state")
        d = self.trunc.dim
        if m.shape != (d * d, d * d):
            raise ValueError(f"joint state has shape {m.shape}, expected {(d * d, d * d)}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def factor_dims(self) -> tuple[int, int, int, int]:
        c = self.trunc.cavity_dim
        return (2, c, 2, c)


def superop_tensor(phi: np.ndarray) -> np.ndarray:
    """View ``Φ[i + d j, k + d l]`` as a rank-4 tensor ``T[i, j, k, l]``."""
    d = int(round(math.sqrt(phi.shape[0])))
    return phi.reshape(d, d, d, d).transpose(1, 0, 3, 2)


def tensor_superops(phi_a: np.ndarray, phi_b: np.ndarray) -> np.ndarray:
    """Superoperator of ``Λ_A ⊗ Λ_B`` on the ``(A, B)`` ordered joint space.

    ``kron(phi_a, phi_b)`` would act on ``vec ρ_A ⊗ vec ρ_B``, which is not
    ``vec ρ_AB``; the row and column indices are interleaved here instead.
    """
    ta, tb = superop_tensor(phi_a), superop_tensor(phi_b)
    da, db = ta.shape[0], tb.shape[0]
    D = da * db
    # T[iA,iB,jA,jB,kA,kB,lA,lB] = Ta[iA,jA,kA,lA] Tb[iB,jB,kB,lB]
    t = np.einsum("aceg,bdfh->abcdefgh", ta, tb).reshape(D, D, D, D)
    return t.transpose(1, 0, 3, 2).reshape(D * D, D * D)


def apply_local_channels(phi_a: np.ndarray, phi_b: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``(Λ_A ⊗ Λ_B) ρ`` without forming the joint superoperator."""
    ta, tb = superop_tensor(phi_a), superop_tensor(phi_b)
    da, db = ta.shape[0], tb.shape[0]
    r = rho.reshape(da, db, da, db)
    out = np.einsum("acxy,bdzw,xzyw->abcd", ta, tb, r, optimize=True)
    return out.reshape(da * db, da * db)


def _check_grids(prop_a: Propagator, prop_b: Propagator):
    ga, gb = prop_a.grid, prop_b.grid
    if ga != gb:
        raise GridMismatchError(f"propagators sampled on different grids: {ga} vs {gb}")


def compose_joint(prop_a: Propagator, prop_b: Propagator, rho0: JointState, k: int) -> JointState:
    """Joint state at sample ``k`` from two independent subsystem channels."""
    _check_grids(prop_a, prop_b)
    phi = tensor_superops(prop_a[k], prop_b[k])
    d = rho0.matrix.shape[0]
    return JointState(devectorize(phi @ vectorize(rho0.matrix), d), rho0.trunc)


def compose_joint_series(prop_a: Propagator, prop_b: Propagator, rho0: JointState) -> np.ndarray:
    """Joint density matrices at every sample, shape ``(n, D, D)``."""
    _check_grids(prop_a, prop_b)
    return np.stack([
        apply_local_channels(prop_a[k], prop_b[k], rho0.matrix)
        for k in range(len(prop_a.grid))
    ])


def joint_liouvillian(params_a: SubsystemParams, params_b: SubsystemParams,
                      trunc: TruncationSpec = TruncationSpec()) -> np.ndarray:
    """Generator of the joint master equation, assembled on the joint space.

    Built from joint operators (``X ⊗ 1`` and ``1 ⊗ X``) rather than by
    tensoring subsystem generators, so it serves as an independent check of
    :func:`tensor_superops`.
    """
    d = trunc.dim
    eye = np.eye(d)
    ops = subsystem_operators(trunc)
    h = kron(build_hamiltonian(params_a, trunc), eye) + kron(eye, build_hamiltonian(params_b, trunc))
    D2 = (d * d) ** 2
    gen = 1j * (spost(h) - spre(h))
    for params, embed in ((params_a, lambda x: kron(x, eye)), (params_b, lambda x: kron(eye, x))):
        for rate, c in ((params.gamma_c, ops["a"]), (params.gamma_q, ops["sigma_minus"])):
            cj = embed(c)
            cdc = cj.conj().T @ cj
            gen = gen + rate * (sprepost(cj, cj.conj().T) - 0.5 * spre(cdc) - 0.5 * spost(cdc))
        sz = embed(ops["sigma_z"])
        gen = gen + 0.25 * params.gamma_d * (sprepost(sz, sz) - np.eye(D2))
    return gen


def evolve_joint(params_a: SubsystemParams, params_b: SubsystemParams, rho0: JointState,
                 grid: TimeGrid, *, refine: int = 1, check: bool = True) -> np.ndarray:
    """Integrate the joint master equation directly on the joint space."""
    gen = joint_liouvillian(params_a, params_b, rho0.trunc)
    fastest = params_a if params_a.max_rate >= params_b.max_rate else params_b
    h, substeps = step_plan(fastest, grid, refine=refine)
    vecs = integrate.rk4_linear(gen, vectorize(rho0.matrix), h, substeps, len(grid))[:, :, 0]
    states = _unvec_batch(vecs, rho0.matrix.shape[0])
    if check:
        _check_states(states, grid)
    return states


def _xform(family: Family, alpha: float, beta: complex, Pa, pa, Pb, pb) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    if family == "two-excitation":
        rho[0, 0] = b2 * Pa * Pb
        rho[1, 1] = b2 * Pa * (1 - Pb)
        rho[2, 2] = b2 * (1 - Pa) * Pb
        rho[3, 3] = a2 + b2 * (1 - Pa) * (1 - Pb)
        rho[0, 3] = beta * np.conj(alpha) * pa * pb
        rho[3, 0] = np.conj(rho[0, 3])
    else:
        rho[1, 1] = a2 * Pa
        rho[2, 2] = b2 * Pb
        rho[3, 3] = 1 - a2 * Pa - b2 * Pb
        rho[1, 2] = alpha * np.conj(beta) * pa * np.conj(pb)
        rho[2, 1] = np.conj(rho[1, 2])
    return rho


def _validate_coeffs(coeffs: CoefficientTrajectory, name: str):
    problems = coeffs.violations()
    if problems:
        raise NumericalInvariantError(f"{name}: " + "; ".join(problems))


def two_qubit_state(init: InitialJointState, coeffs_a: CoefficientTrajectory,
                    coeffs_b: CoefficientTrajectory, k: int) -> np.ndarray:
    """Two-qubit reduced state at sample ``k`` built from coefficients.

    For the two-excitation family this is the X-form matrix with
    ``ρ11 = |β|² P_A P_B`` ... ``ρ14 = β α* p_A p_B``; the one-excitation
    family fills the inner ``|10>, |01>`` block instead.
    """
    _validate_coeffs(coeffs_a, "subsystem A")
    _validate_coeffs(coeffs_b, "subsystem B")
    return _xform(init.family, init.alpha, init.beta,
                  coeffs_a.P[k], coeffs_a.p[k], coeffs_b.P[k], coeffs_b.p[k])


def two_cavity_state(init: InitialJointState, coeffs_a: CoefficientTrajectory,
                     coeffs_b: CoefficientTrajectory, k: int) -> np.ndarray:
    """As :func:`two_qubit_state` with ``(Q, q)`` in place of ``(P, p)``."""
    _validate_coeffs(coeffs_a, "subsystem A")
    _validate_coeffs(coeffs_b, "subsystem B")
    return _xform(init.family, init.alpha, init.beta,
                  coeffs_a.Q[k], coeffs_a.q[k], coeffs_b.Q[k], coeffs_b.q[k])


#: factor indices of each pair selector in (q_A, c_A, q_B, c_B)
PAIRS = {
    "qq": (0, 2),
    "cc": (1, 3),
    "qAcB": (0, 3),
    "cAqB": (1, 2),
    "A": (0, 1),
    "B": (2, 3),
}


def reduce_pair(joint: JointState | np.ndarray, pair: str,
                trunc: TruncationSpec | None = None) -> np.ndarray:
    """Reduced 4×4 state of two of the four parties.

    ``pair`` is one of ``qq``, ``cc``, ``qAcB``, ``cAqB`` or the
    intra-subsystem pairs ``A`` and ``B``.  Cavity factors are restricted to
    ``|1>, |0>``, which holds the whole support for the states in scope.
    """
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; expected one of {sorted(PAIRS)}")
    if isinstance(joint, JointState):
        matrix, trunc = joint.matrix, joint.trunc
    else:
        matrix, trunc = np.asarray(joint, dtype=complex), trunc or TruncationSpec()
    c = trunc.cavity_dim
    keep = PAIRS[pair]
    red = partial_trace(matrix, (2, c, 2, c), keep)
    if c == 2:
        return red
    # keep only the |1>, |0> photon states of each cavity factor
    dims = [2 if f in (0, 2) else c for f in keep]
    sub = [[0, 1] if d == 2 else [c - 2, c - 1] for d in dims]
    idx = [i * dims[1] + j for i in sub[0] for j in sub[1]]
    return red[np.ix_(idx, idx)]


def excitation_number(joint: JointState | np.ndarray,
                      trunc: TruncationSpec = TruncationSpec()) -> float:
    """Expectation of total excitations (qubit populations + photons)."""
    if isinstance(joint, JointState):
        joint, trunc = joint.matrix, joint.trunc
    d = trunc.dim
    ops = subsystem_operators(trunc)
    n_sub = ops["n_c"] + 0.5 * (ops["sigma_z"] + np.eye(d))
    n_tot = kron(n_sub, np.eye(d)) + kron(np.eye(d), n_sub)
    return float(np.real(np.trace(n_tot @ joint)))

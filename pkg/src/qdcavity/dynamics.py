"""Time evolution of a single qubit-cavity subsystem."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import integrate
from .linops import (
    DM_ATOL,
    check_density_matrix,
    density_matrix_violations,
    devectorize,
    partial_trace,
    projector,
    vectorize,
)
from .model import (
    Frame,
    SubsystemParams,
    TruncationSpec,
    basis_index,
    build_liouvillian,
    subsystem_operators,
)

#: Upper bound on ``rate * h`` for the fixed RK4 step.  At 0.01 the global
#: error (~2e-9 over gt = 20) pushes zero eigenvalues of rank-deficient
#: states past the 1e-9 positivity tolerance; 0.005 keeps it near 1e-10.
STEP_RATE_LIMIT = 0.005


class NumericalInvariantError(RuntimeError):
    """An evolved quantity broke a physical invariant."""


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start = 0 ... t_end`` with ``n_samples`` points."""

    t_end: float
    n_samples: int

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValueError(f"n_samples must be an integer >= 2, got {self.n_samples}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, int(self.n_samples))

    @property
    def dt(self) -> float:
        return self.t_end / (self.n_samples - 1)

    def __len__(self) -> int:
        return int(self.n_samples)


def step_plan(params: SubsystemParams, grid: TimeGrid, frame: Frame = "rotating",
              refine: int = 1) -> tuple[float, int]:
    """RK4 step size and number of substeps per grid interval.

    The step satisfies ``h * max(g, gamma_c, gamma_q, gamma_d) <= STEP_RATE_LIMIT`` (and
    the same for ``omega0`` in the lab frame).  ``refine`` multiplies the
    substep count, e.g. ``refine=2`` halves the step.
    """
    rate = params.max_rate
    if frame == "lab" and params.omega0 is not None:
        rate = max(rate, params.omega0)
    substeps = 1
    if rate > 0:
        # tolerance keeps exact multiples (0.01 / 0.01) from rounding up
        substeps = max(1, math.ceil(grid.dt * rate / STEP_RATE_LIMIT - 1e-9))
    substeps *= int(refine)
    return grid.dt / substeps, substeps


def _integrate(generator, y0, params, grid, frame, refine):
    h, substeps = step_plan(params, grid, frame, refine)
    return integrate.rk4_linear(generator, y0, h, substeps, len(grid))


def evolve_subsystem(
    params: SubsystemParams,
    rho0,
    grid: TimeGrid,
    trunc: TruncationSpec = TruncationSpec(),
    *,
    frame: Frame = "rotating",
    refine: int = 1,
    check: bool = True,
) -> np.ndarray:
    """Integrate the master equation from ``rho0``.

    Returns an array of shape ``(n_samples, d, d)``.  Every output state is
    checked against the density-matrix invariants unless ``check=False``.
    """
    rho0 = check_density_matrix(rho0, name="rho0")
    d = trunc.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 has shape {rho0.shape}, expected {(d, d)}")
    gen = build_liouvillian(params, trunc, frame)
    vecs = _integrate(gen, vectorize(rho0), params, grid, frame, refine)[:, :, 0]
    states = _unvec_batch(vecs, d)
    if check:
        _check_states(states, grid)
    return states


def _unvec_batch(vecs, d):
    # column stacking: vec index i + d*j is (j, i) in a C-order reshape
    return np.ascontiguousarray(vecs.reshape(len(vecs), d, d).transpose(0, 2, 1))


def _check_states(states, grid):
    times = grid.times
    for k, rho in enumerate(states):
        problems = density_matrix_violations(rho, DM_ATOL)
        if problems:
            raise NumericalInvariantError(f"state at t={times[k]:.6g}: " + "; ".join(problems))


@dataclass(frozen=True)
class Propagator:
    """Sampled superoperators ``Φ(t)`` with ``vec ρ(t) = Φ(t) vec ρ(0)``."""

    grid: TimeGrid
    superops: np.ndarray = field(repr=False)

    def __post_init__(self):
        _freeze(self.superops)

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.superops.shape[1])))

    def __getitem__(self, k) -> np.ndarray:
        return self.superops[k]

    def apply(self, rho0, k) -> np.ndarray:
        return devectorize(self.superops[k] @ vectorize(rho0), self.dim)


def propagator(
    params: SubsystemParams,
    grid: TimeGrid,
    trunc: TruncationSpec = TruncationSpec(),
    *,
    frame: Frame = "rotating",
    refine: int = 1,
) -> Propagator:
    """Propagator built by evolving all ``d²`` elementary matrices at once.

    Column ``k`` of the identity is ``vec(E_ij)``, so integrating the identity
    as the initial condition evolves every elementary matrix simultaneously.
    """
    d2 = trunc.dim ** 2
    gen = build_liouvillian(params, trunc, frame)
    phi = _integrate(gen, np.eye(d2, dtype=complex), params, grid, frame, refine)
    return Propagator(grid, phi)


@dataclass(frozen=True)
class CoefficientTrajectory:
    """Sampled ``P_t, p_t, Q_t, q_t`` of one subsystem.

    ``P``: qubit excited population after starting in ``|1_q 0_c>``.
    ``p``: qubit coherence relative to its initial value.
    ``Q``: cavity photon number after starting in ``|1_q 0_c>``.
    ``q``: cavity coherence transferred from a unit qubit coherence.
    """

    grid: TimeGrid
    P: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("P", "p", "Q", "q"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
        _freeze(self.P, self.p, self.Q, self.q)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def violations(self, atol: float = DM_ATOL) -> list[str]:
        problems = []
        for name in ("P", "Q"):
            arr = getattr(self, name)
            if arr.min() < -atol or arr.max() > 1 + atol:
                problems.append(f"{name} leaves [0, 1]: range [{arr.min():.3e}, {arr.max():.6g}]")
        for name in ("p", "q"):
            m = np.abs(getattr(self, name)).max()
            if m > 1 + atol:
                problems.append(f"|{name}| exceeds 1: {m:.6g}")
        return problems

    def at(self, k: int) -> tuple[float, complex, float, complex]:
        return float(self.P[k]), complex(self.p[k]), float(self.Q[k]), complex(self.q[k])


def characteristic_frequency_squared(params: SubsystemParams) -> float:
    return params.g ** 2 - ((params.gamma_c - params.gamma_q) / 4) ** 2


def analytic_coefficients(params: SubsystemParams, grid: TimeGrid) -> CoefficientTrajectory:
    """Closed-form coefficients for zero dephasing.

    With ``Ω² = g² - ((γc - γq)/4)²`` and ``Γ = (γc + γq)/4``::

        p_t = e^{-Γt} [cos Ωt + (γc - γq)/(4Ω) sin Ωt]
        q_t = -i e^{-Γt} (g/Ω) sin Ωt

    and ``P = p²``, ``Q = |q|²``.  For ``Ω² < 0`` the trigonometric functions
    become hyperbolic ones of ``|Ω|``; at ``Ω = 0`` the linear limits are used.

    The factor ``-i`` on ``q_t`` is the phase the excitation picks up when
    it moves from qubit to cavity under the exchange term.  The numerical
    extraction reproduces it, so both paths can be compared entry by entry.
    """
    if params.gamma_d != 0:
        raise ValueError("analytic path requires zero dephasing")
    t = grid.times
    g = params.g
    delta = (params.gamma_c - params.gamma_q) / 4
    env = np.exp(-(params.gamma_c + params.gamma_q) / 4 * t)
    omega2 = characteristic_frequency_squared(params)
    if omega2 > 0:
        om = math.sqrt(omega2)
        c, s = np.cos(om * t), np.sin(om * t) / om
    elif omega2 < 0:
        om = math.sqrt(-omega2)
        c, s = np.cosh(om * t), np.sinh(om * t) / om
    else:
        c, s = np.ones_like(t), t.copy()
    p = env * (c + delta * s)
    q_amp = env * g * s
    return CoefficientTrajectory(
        grid,
        P=p ** 2,
        p=p.astype(complex),
        Q=q_amp ** 2,
        q=-1j * q_amp,
    )


def coefficient_initial_states(trunc: TruncationSpec = TruncationSpec()):
    """The two initial states used for coefficient extraction.

    ``|1_q 0_c><1_q 0_c|`` yields ``P`` and ``Q``; ``|+><+| ⊗ |0_c><0_c|``
    with ``|+> = (|1_q> + |0_q>)/√2`` yields ``p`` and ``q`` (its coherences
    start at 1/2, hence the factor 2 on read-out).
    """
    d = trunc.dim
    excited = np.zeros(d, dtype=complex)
    excited[basis_index(1, 0, trunc)] = 1
    plus = np.zeros(d, dtype=complex)
    plus[basis_index(1, 0, trunc)] = 1 / math.sqrt(2)
    plus[basis_index(0, 0, trunc)] = 1 / math.sqrt(2)
    return projector(excited), projector(plus)


def coefficients_from_states(excited_states, plus_states, trunc: TruncationSpec = TruncationSpec()):
    """Read ``(P, p, Q, q)`` arrays off evolved states of the two probes."""
    fact = (2, trunc.cavity_dim)
    n_c = subsystem_operators(trunc)["n_c"]
    P = np.array([partial_trace(r, fact, 0)[0, 0].real for r in excited_states])
    Q = np.einsum("kij,ji->k", excited_states, n_c).real
    p = np.array([2 * partial_trace(r, fact, 0)[0, 1] for r in plus_states])
    one, zero = trunc.n_max - 1, trunc.n_max  # cavity indices of |1_c>, |0_c>
    q = np.array([2 * partial_trace(r, fact, 1)[one, zero] for r in plus_states])
    return P, p, Q, q


def extract_coefficients(
    params: SubsystemParams,
    grid: TimeGrid,
    trunc: TruncationSpec = TruncationSpec(),
    *,
    frame: Frame = "rotating",
    refine: int = 1,
    check: bool = True,
) -> CoefficientTrajectory:
    """Numerical coefficients for any dephasing rate.

    Both probe states are integrated in one kernel call as two columns.
    """
    if frame != "rotating":
        # lab-frame coherences carry e^{-i ω0 t}; the coefficients are defined in the rotating frame
        raise ValueError("coefficients are defined in the rotating frame")
    r_exc, r_plus = coefficient_initial_states(trunc)
    d = trunc.dim
    gen = build_liouvillian(params, trunc, frame)
    y0 = np.stack([vectorize(r_exc), vectorize(r_plus)], axis=1)
    out = _integrate(gen, y0, params, grid, frame, refine)
    exc = _unvec_batch(out[:, :, 0], d)
    plus = _unvec_batch(out[:, :, 1], d)
    if check:
        _check_states(exc, grid)
        _check_states(plus, grid)
    traj = CoefficientTrajectory(grid, *coefficients_from_states(exc, plus, trunc))
    if check:
        problems = traj.violations()
        if problems:
            raise NumericalInvariantError("; ".join(problems))
    return traj

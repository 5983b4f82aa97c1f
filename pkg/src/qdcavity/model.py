"""Physical model of one qubit-cavity subsystem.

Basis ordering
--------------
The qubit factor is ordered ``(|1_q>, |0_q>)`` and the cavity factor by
descending photon number ``(|n_max>, ..., |1>, |0>)``; the subsystem space is
``qubit ⊗ cavity``.  For ``n_max = 1`` this gives

    0: |1_q 1_c>,  1: |1_q 0_c>,  2: |0_q 1_c>,  3: |0_q 0_c>

Frames
------
By default the Hamiltonian is written in the frame rotating at the common
resonance frequency, where the bare energies drop out and only the
Jaynes-Cummings exchange ``g (a† σ- + a σ+)`` remains.  Pass
``frame="lab"`` to keep ``(ω0/2) σz + ωc a†a``.  Populations, coherence
magnitudes and concurrences are identical in both frames.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .linops import kron, spost, spre, sprepost

#: Reduced Planck constant in μeV·ps (CODATA).
HBAR_UEV_PS = 658.2119569

Frame = Literal["rotating", "lab"]

# qubit operators in the (|1>, |0>) basis
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.T.copy()


class RWAWarning(UserWarning):
    """A rate is not small compared with the transition frequency."""


@dataclass(frozen=True)
class SubsystemParams:
    """Rates and frequencies of one qubit-cavity pair.

    All quantities share one unit: either energies in μeV or multiples of
    ``g``.  ``omega0`` is optional; when given it is only used for the RWA
    guard, unit metadata and the lab frame.
    """

    g: float
    gamma_c: float = 0.0
    gamma_q: float = 0.0
    gamma_d: float = 0.0
    omega0: float | None = None
    omega_c: float | None = None

    def __post_init__(self):
        for name in ("g", "gamma_c", "gamma_q", "gamma_d"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite non-negative number, got {value}")
        if self.omega0 is None and self.omega_c is not None:
            object.__setattr__(self, "omega0", self.omega_c)
        if self.omega_c is None and self.omega0 is not None:
            object.__setattr__(self, "omega_c", self.omega0)
        if self.omega0 is not None and not math.isclose(
            self.omega0, self.omega_c, rel_tol=1e-12, abs_tol=0.0
        ):
            raise ValueError(
                f"qubit and cavity must be resonant: omega0={self.omega0}, omega_c={self.omega_c}"
            )
        if self.omega0 is not None:
            limit = self.omega0 / 10
            for name in ("g", "gamma_c", "gamma_q", "gamma_d"):
                if getattr(self, name) >= limit:
                    warnings.warn(
                        f"{name}={getattr(self, name)} is not below omega0/10={limit}; "
                        "the rotating wave approximation may not hold",
                        RWAWarning,
                        stacklevel=3,
                    )

    @property
    def max_rate(self) -> float:
        return max(self.g, self.gamma_c, self.gamma_q, self.gamma_d)

    def scaled(self, factor: float) -> SubsystemParams:
        """All rates and frequencies multiplied by ``factor``."""
        om = None if self.omega0 is None else self.omega0 * factor
        return replace(
            self,
            g=self.g * factor,
            gamma_c=self.gamma_c * factor,
            gamma_q=self.gamma_q * factor,
            gamma_d=self.gamma_d * factor,
            omega0=om,
            omega_c=om,
        )

    def in_units_of_g(self) -> SubsystemParams:
        if self.g <= 0:
            raise ValueError("g must be positive to express rates in units of g")
        return self.scaled(1.0 / self.g)


@dataclass(frozen=True)
class TruncationSpec:
    n_max: int = 1

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class UnitContext:
    mode: Literal["dimensionless", "physical"] = "dimensionless"
    hbar: float = HBAR_UEV_PS


def annihilation(n_max: int) -> np.ndarray:
    """Cavity lowering operator in the descending-photon-number basis."""
    d = n_max + 1
    a = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        n = n_max - i
        a[i + 1, i] = math.sqrt(n)
    return a


def subsystem_operators(trunc: TruncationSpec = TruncationSpec()) -> dict[str, np.ndarray]:
    """``a``, ``sigma_minus``, ``sigma_z`` and ``n_c`` on qubit ⊗ cavity."""
    a = annihilation(trunc.n_max)
    iq = np.eye(2)
    ic = np.eye(trunc.cavity_dim)
    ops = {
        "a": kron(iq, a),
        "sigma_minus": kron(SIGMA_MINUS, ic),
        "sigma_z": kron(SIGMA_Z, ic),
    }
    ops["n_c"] = ops["a"].conj().T @ ops["a"]
    ops["sigma_plus"] = ops["sigma_minus"].conj().T
    return ops


def basis_index(qubit: int, photons: int, trunc: TruncationSpec = TruncationSpec()) -> int:
    """Index of ``|qubit, photons>`` in the subsystem basis."""
    if qubit not in (0, 1) or not 0 <= photons <= trunc.n_max:
        raise ValueError(f"no basis state |{qubit}_q {photons}_c> at n_max={trunc.n_max}")
    return (1 - qubit) * trunc.cavity_dim + (trunc.n_max - photons)


def build_hamiltonian(
    params: SubsystemParams,
    trunc: TruncationSpec = TruncationSpec(),
    frame: Frame = "rotating",
) -> np.ndarray:
    ops = subsystem_operators(trunc)
    a, sm = ops["a"], ops["sigma_minus"]
    h = params.g * (a.conj().T @ sm + a @ sm.conj().T)
    if frame == "lab":
        if params.omega0 is None:
            raise ValueError("lab frame needs omega0")
        h = h + 0.5 * params.omega0 * ops["sigma_z"] + params.omega_c * ops["n_c"]
    elif frame != "rotating":
        raise ValueError(f"unknown frame {frame!r}")
    return h


def dissipator(c: np.ndarray) -> np.ndarray:
    """Superoperator of ``c ρ c† - ½{c†c, ρ}``."""
    cdc = c.conj().T @ c
    return sprepost(c, c.conj().T) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def build_liouvillian(
    params: SubsystemParams,
    trunc: TruncationSpec = TruncationSpec(),
    frame: Frame = "rotating",
) -> np.ndarray:
    """Generator of ``dρ/dt = i[ρ, H] + L_cav ρ + L_SE ρ + L_D ρ``.

    The cavity-loss and spontaneous-emission terms are standard dissipators
    with rates ``gamma_c`` and ``gamma_q``; the dephasing term is
    ``(gamma_d/4)(σz ρ σz - ρ)``, so an isolated qubit coherence decays as
    ``exp(-gamma_d t / 2)``.
    """
    ops = subsystem_operators(trunc)
    h = build_hamiltonian(params, trunc, frame)
    d = trunc.dim
    gen = 1j * (spost(h) - spre(h))
    gen = gen + params.gamma_c * dissipator(ops["a"])
    gen = gen + params.gamma_q * dissipator(ops["sigma_minus"])
    sz = ops["sigma_z"]
    gen = gen + 0.25 * params.gamma_d * (sprepost(sz, sz) - np.eye(d * d))
    return gen


def master_equation_rhs(
    params: SubsystemParams,
    rho: np.ndarray,
    trunc: TruncationSpec = TruncationSpec(),
    frame: Frame = "rotating",
) -> np.ndarray:
    """Right-hand side evaluated term by term with matrix products."""
    ops = subsystem_operators(trunc)
    h = build_hamiltonian(params, trunc, frame)
    a, sm, sz = ops["a"], ops["sigma_minus"], ops["sigma_z"]
    ad, sp = a.conj().T, sm.conj().T
    out = 1j * (rho @ h - h @ rho)
    out += 0.5 * params.gamma_c * (2 * a @ rho @ ad - ad @ a @ rho - rho @ ad @ a)
    out += 0.5 * params.gamma_q * (2 * sm @ rho @ sp - sp @ sm @ rho - rho @ sp @ sm)
    out += 0.25 * params.gamma_d * (sz @ rho @ sz - rho)
    return out


def time_to_physical(t_dimensionless, g_ueV: float, ctx: UnitContext = UnitContext("physical")):
    """Convert ``g·t`` to picoseconds for a coupling ``g`` given in μeV."""
    if ctx.mode != "physical":
        raise ValueError("time conversion needs a physical unit context (rates in μeV)")
    if g_ueV <= 0:
        raise ValueError("g must be positive")
    return np.asarray(t_dimensionless, dtype=float) * ctx.hbar / g_ueV


def physical_to_time(t_ps, g_ueV: float, ctx: UnitContext = UnitContext("physical")):
    """Inverse of :func:`time_to_physical`."""
    if ctx.mode != "physical":
        raise ValueError("time conversion needs a physical unit context (rates in μeV)")
    if g_ueV <= 0:
        raise ValueError("g must be positive")
    return np.asarray(t_ps, dtype=float) * g_ueV / ctx.hbar

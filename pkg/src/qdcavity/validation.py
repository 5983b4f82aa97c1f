"""Invariant suite run by ``qdcavity --validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .composition import (
    InitialJointState,
    compose_joint_series,
    evolve_joint,
    excitation_number,
    reduce_pair,
    two_cavity_state,
    two_qubit_state,
)
from .dynamics import TimeGrid, analytic_coefficients, extract_coefficients, propagator
from .entanglement import wootters_concurrence, xstate_concurrence
from .linops import apply_superop, density_matrix_violations
from .model import SubsystemParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_density_matrix(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


FIG2A = SubsystemParams(1.0, 0.3, 0.3, 0.0)
FIG2B = SubsystemParams(1.0, 0.3, 0.0, 0.3)


def check_analytic_agreement():
    grid = TimeGrid(20.0, 2001)
    num = extract_coefficients(FIG2A, grid)
    ana = analytic_coefficients(FIG2A, grid)
    err = max(np.abs(getattr(num, k) - getattr(ana, k)).max() for k in "PpQq")
    return err <= 1e-8, f"max |numeric - closed form| = {err:.2e} (tol 1e-8)"


def check_step_halving():
    grid = TimeGrid(20.0, 2001)
    a = extract_coefficients(FIG2B, grid)
    b = extract_coefficients(FIG2B, grid, refine=2)
    err = max(np.abs(getattr(a, k) - getattr(b, k)).max() for k in "PpQq")
    return err <= 1e-8, f"max change on halving the step = {err:.2e} (tol 1e-8)"


def check_propagator_channel():
    rng = np.random.default_rng(7)
    grid = TimeGrid(10.0, 11)
    phi = propagator(FIG2B, grid)
    worst_tr, worst_eig = 0.0, np.inf
    for k in range(len(grid)):
        for _ in range(20):
            out = apply_superop(phi[k], random_density_matrix(rng, 4))
            worst_tr = max(worst_tr, abs(np.trace(out) - 1))
            worst_eig = min(worst_eig, np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0])
    ok = worst_tr <= 1e-9 and worst_eig >= -1e-8
    return ok, f"max trace error {worst_tr:.2e}, min eigenvalue {worst_eig:.2e}"


def check_composition():
    grid = TimeGrid(5.0, 21)
    init = InitialJointState(0.8)
    rho0 = init.density_matrix()
    worst = 0.0
    for params in (FIG2A, FIG2B):
        phi = propagator(params, grid)
        composed = compose_joint_series(phi, phi, rho0)
        direct = evolve_joint(params, params, rho0, grid)
        coeffs = extract_coefficients(params, grid)
        for k in range(len(grid)):
            worst = max(worst, np.abs(composed[k] - direct[k]).max())
            worst = max(worst, np.abs(reduce_pair(composed[k], "qq") - two_qubit_state(init, coeffs, coeffs, k)).max())
            worst = max(worst, np.abs(reduce_pair(composed[k], "cc") - two_cavity_state(init, coeffs, coeffs, k)).max())
    return worst <= 1e-7, f"max entry difference {worst:.2e} (tol 1e-7)"


def check_joint_states():
    grid = TimeGrid(10.0, 51)
    rho0 = InitialJointState(0.8).density_matrix()
    problems, rises = [], 0.0
    phi = propagator(FIG2B, grid)
    states = compose_joint_series(phi, phi, rho0)
    n_prev = math.inf
    for k, rho in enumerate(states):
        problems += density_matrix_violations(rho)
        for pair in ("qq", "cc", "qAcB", "cAqB", "A", "B"):
            problems += density_matrix_violations(reduce_pair(rho, pair))
        n = excitation_number(rho)
        rises = max(rises, n - n_prev)
        n_prev = n
    ok = not problems and rises <= 1e-12
    detail = f"{len(problems)} density-matrix violations, largest excitation rise {rises:.2e}"
    return ok, detail


def check_concurrence():
    rng = np.random.default_rng(11)
    worst_lu, worst_x = 0.0, 0.0
    for _ in range(50):
        rho = random_density_matrix(rng, 4)
        u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
        worst_lu = max(worst_lu, abs(wootters_concurrence(rho) - wootters_concurrence(u @ rho @ u.conj().T)))
    for _ in range(200):
        P, Pb = rng.uniform(size=2)
        a = rng.uniform()
        init = InitialJointState(a)
        p = math.sqrt(P) * rng.uniform() * np.exp(1j * rng.uniform(0, 2 * np.pi))
        rho = np.zeros((4, 4), dtype=complex)
        b2 = abs(init.beta) ** 2
        rho[0, 0], rho[1, 1], rho[2, 2] = b2 * P * Pb, b2 * P * (1 - Pb), b2 * (1 - P) * Pb
        rho[3, 3] = 1 - rho[0, 0] - rho[1, 1] - rho[2, 2]
        rho[0, 3] = init.beta * a * p * math.sqrt(Pb)
        rho[3, 0] = np.conj(rho[0, 3])
        worst_x = max(worst_x, abs(xstate_concurrence(rho[0, 3], rho[1, 1].real, rho[2, 2].real)
                                   - wootters_concurrence(rho)))
    ok = worst_lu <= 1e-9 and worst_x <= 1e-9
    return ok, f"local-unitary deviation {worst_lu:.2e}, X-form deviation {worst_x:.2e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "analytic vs numeric coefficients": check_analytic_agreement,
    "step-halving convergence": check_step_halving,
    "propagator trace/positivity": check_propagator_channel,
    "channel composition vs joint integration": check_composition,
    "joint and reduced density matrices": check_joint_states,
    "concurrence invariances": check_concurrence,
}


def run_validation() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash inside a check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results

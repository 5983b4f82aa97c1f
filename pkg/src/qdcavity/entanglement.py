"""Concurrence, output photon flux, and sudden-death detection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import CoefficientTrajectory, TimeGrid
from .linops import check_density_matrix

#: Concurrence at or below this value counts as zero.
ESD_THRESHOLD = 1e-6
#: A zero (or non-zero) stretch must last this many samples to count.
ESD_PERSISTENCE = 3

_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


class LifetimeGridError(ValueError):
    """The time grid is too short to support a lifetime claim."""


def wootters_concurrence(rho) -> float:
    """Concurrence of a two-qubit density matrix.

    The values ``λ_i`` (square roots of the eigenvalues of
    ``ρ (σy⊗σy) ρ* (σy⊗σy)``) are computed as the singular values of
    ``Wᵀ (σy⊗σy) W`` with ``ρ = W W†``, which avoids square roots of
    round-off-sized eigenvalues.  Tiny negative eigenvalues of ``ρ`` are
    clamped to zero.
    """
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit matrix, got shape {rho.shape}")
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    W = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(W.T @ _YY @ W, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def xstate_concurrence(rho14, rho22, rho33):
    """Closed-form concurrence ``max(0, 2|ρ14| - 2 sqrt(ρ22 ρ33))``.

    Works elementwise on arrays.
    """
    rho22 = np.asarray(rho22, dtype=float)
    rho33 = np.asarray(rho33, dtype=float)
    if np.any(rho22 < 0) or np.any(rho33 < 0):
        raise ValueError("populations must be non-negative")
    c = np.maximum(0.0, 2 * np.abs(rho14) - 2 * np.sqrt(rho22 * rho33))
    return float(c) if c.ndim == 0 else c


@dataclass(frozen=True)
class FluxSeries:
    grid: TimeGrid
    photon_number: np.ndarray = field(repr=False)
    output_flux: np.ndarray = field(repr=False)


def output_flux(coeffs: CoefficientTrajectory, gamma_c: float) -> FluxSeries:
    """Detectable output flux ``γc Q_t`` for a cavity with no input field."""
    if gamma_c < 0:
        raise ValueError("gamma_c must be non-negative")
    # tiny negative round-off would make a negative flux
    n = np.clip(np.asarray(coeffs.Q, dtype=float), 0.0, None)
    return FluxSeries(coeffs.grid, n, gamma_c * n)


def _runs(mask):
    """Yield ``(start, stop, value)`` for runs of equal values in ``mask``."""
    edges = np.flatnonzero(np.diff(mask.astype(np.int8))) + 1
    bounds = np.concatenate(([0], edges, [mask.size]))
    for a, b in zip(bounds[:-1], bounds[1:]):
        yield int(a), int(b), bool(mask[a])


def _crossing(times, values, k, eps):
    """Time where the segment ``k-1 -> k`` crosses the level ``eps``."""
    v0, v1 = values[k - 1], values[k]
    if v1 == v0:
        return float(times[k])
    frac = (v0 - eps) / (v0 - v1)
    return float(times[k - 1] + np.clip(frac, 0.0, 1.0) * (times[k] - times[k - 1]))


def detect_esd(times, values, eps: float = ESD_THRESHOLD,
               persistence: int = ESD_PERSISTENCE) -> tuple[list[float], list[float]]:
    """Death and revival times of a sampled concurrence.

    A death is a drop from above ``eps`` to at most ``eps`` that then stays
    there for ``persistence`` samples; a revival is the converse.  Shorter
    excursions are absorbed into the surrounding stretch.  A series that
    starts at zero is not dead, merely not yet entangled, so its first rise
    is not a revival.  Crossing times are linearly interpolated.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if values.size < 3:
        raise ValueError("grid too coarse: need at least 3 samples")

    alive = values > eps
    deaths: list[float] = []
    revivals: list[float] = []
    state = None  # True alive, False dead, None not yet entangled
    for start, stop, is_alive in _runs(alive):
        if state is None:
            if is_alive and (stop - start >= persistence or stop == values.size):
                state = True
            continue
        if is_alive == state or stop - start < persistence:
            continue
        if is_alive:
            revivals.append(_crossing(times, values, start, eps))
        else:
            deaths.append(_crossing(times, values, start, eps))
        state = is_alive
    return deaths, revivals


@dataclass(frozen=True)
class ConcurrenceSeries:
    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    death_times: tuple[float, ...] = ()
    revival_times: tuple[float, ...] = ()

    @classmethod
    def from_values(cls, grid: TimeGrid, values) -> ConcurrenceSeries:
        values = np.asarray(values, dtype=float)
        deaths, revivals = detect_esd(grid.times, values)
        values.flags.writeable = False
        return cls(grid, values, tuple(deaths), tuple(revivals))

    @property
    def final_death_time(self) -> float | None:
        """Last death not followed by a revival, or ``None`` if still entangled."""
        if self.death_times and len(self.revival_times) < len(self.death_times):
            return self.death_times[-1]
        return None

    def lifetime(self) -> float:
        """Entanglement lifetime, checked against the grid length.

        Raises :class:`LifetimeGridError` when the series is still entangled
        at the end of the grid or the grid is shorter than twice the
        lifetime.
        """
        t_death = self.final_death_time
        if t_death is None:
            raise LifetimeGridError(
                f"entanglement survives to the end of the grid (t_end={self.grid.t_end:g})"
            )
        if self.grid.t_end < 2 * t_death:
            raise LifetimeGridError(
                f"grid ends at {self.grid.t_end:g}, shorter than twice the lifetime {t_death:g}"
            )
        return t_death

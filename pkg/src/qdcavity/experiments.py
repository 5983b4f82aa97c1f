"""Scenario presets, parameter sweeps, config files and CSV output."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Literal, Sequence

import numpy as np

from .composition import InitialJointState, two_cavity_state, two_qubit_state
from .dynamics import CoefficientTrajectory, TimeGrid, extract_coefficients
from .entanglement import ConcurrenceSeries, output_flux, wootters_concurrence, xstate_concurrence
from .model import HBAR_UEV_PS, SubsystemParams, TruncationSpec, UnitContext, time_to_physical

UnitMode = Literal["dimensionless", "physical"]

CSV_HEADER = ("t_g", "t_ps", "C_q", "C_c", "Q_t", "flux")
CONFIG_KEYS = frozenset({
    "g", "gamma_c", "gamma_q", "gamma_d", "alpha", "beta_phase",
    "unit_mode", "t_end", "n_samples", "family",
})
SWEEPABLE = ("gamma_d", "gamma_c", "gamma_q", "alpha")

#: default grids: gt in [0, 20] for dimensionless runs, [0, 100] ps for physical ones
DEFAULT_GRID = MappingProxyType({
    "dimensionless": (20.0, 2001),
    "physical": (100.0, 4001),
})
#: quantum-dot transition energy of the physical presets (~1.3 eV), used by the RWA guard
QD_OMEGA0_UEV = 1.3e6


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending entry."""

    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass(frozen=True)
class Scenario:
    """One simulation: two subsystems, an initial state and a time grid.

    Rates and ``grid`` share units: multiples of ``g`` and ``g t`` in
    dimensionless mode, μeV and picoseconds in physical mode.
    """

    name: str
    params_a: SubsystemParams
    params_b: SubsystemParams
    initial: InitialJointState
    grid: TimeGrid
    unit_mode: UnitMode = "dimensionless"
    outputs: tuple[str, ...] = ("C_q", "C_c", "Q_t", "flux")

    def __post_init__(self):
        if self.unit_mode not in ("dimensionless", "physical"):
            raise ConfigError("unit_mode", f"unknown unit mode {self.unit_mode!r}")
        for label, p in (("params_a", self.params_a), ("params_b", self.params_b)):
            if p.g <= 0:
                raise ConfigError("g", f"{label}.g must be positive")

    @property
    def unit(self) -> float:
        """Coupling of subsystem A, the unit rates are scaled by internally."""
        return self.params_a.g

    def grid_in_gt(self) -> TimeGrid:
        if self.unit_mode == "physical":
            return TimeGrid(self.grid.t_end * self.unit / HBAR_UEV_PS, self.grid.n_samples)
        return self.grid

    def with_value(self, param: str, value: float) -> Scenario:
        """Copy with one swept parameter replaced in both subsystems."""
        if param == "alpha":
            phase = np.angle(self.initial.beta) if self.initial.beta else 0.0
            init = InitialJointState.with_phase(value, float(phase), self.initial.family)
            return replace(self, initial=init)
        if param not in SWEEPABLE:
            raise ConfigError("param", f"cannot sweep {param!r}; expected one of {SWEEPABLE}")
        return replace(
            self,
            params_a=replace(self.params_a, **{param: value}),
            params_b=replace(self.params_b, **{param: value}),
        )


def _physical(g, gamma_c, gamma_q, gamma_d):
    return SubsystemParams(g, gamma_c, gamma_q, gamma_d, omega0=QD_OMEGA0_UEV)


def _preset(name, params, alpha, unit_mode) -> Scenario:
    t_end, n = DEFAULT_GRID[unit_mode]
    return Scenario(name, params, params, InitialJointState(alpha), TimeGrid(t_end, n), unit_mode)


PRESETS = MappingProxyType({
    "fig2a": _preset("fig2a", SubsystemParams(1.0, 0.3, 0.3, 0.0), 0.8, "dimensionless"),
    "fig2b": _preset("fig2b", SubsystemParams(1.0, 0.3, 0.0, 0.3), 0.8, "dimensionless"),
    "fig3": _preset("fig3", SubsystemParams(1.0, 0.17, 0.0, 0.0), 1 / math.sqrt(2), "dimensionless"),
    "fig4a": _preset("fig4a", _physical(110.0, 100.0, 10.0, 30.0), 0.8, "physical"),
    "fig4b": _preset("fig4b", _physical(16.0, 20.0, 4.0, 12.0), 0.8, "physical"),
})


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    t_g: np.ndarray = field(repr=False)
    t_ps: np.ndarray | None = field(repr=False)
    C_q: np.ndarray = field(repr=False)
    C_c: np.ndarray = field(repr=False)
    Q_t: np.ndarray = field(repr=False)
    flux: np.ndarray = field(repr=False)
    coeffs_a: CoefficientTrajectory = field(repr=False)
    coeffs_b: CoefficientTrajectory = field(repr=False)

    def qubit_series(self) -> ConcurrenceSeries:
        """Qubit-pair concurrence on the scenario's native time axis."""
        return ConcurrenceSeries.from_values(self.scenario.grid, self.C_q)

    def cavity_series(self) -> ConcurrenceSeries:
        return ConcurrenceSeries.from_values(self.scenario.grid, self.C_c)

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_rows(buf, self)
        return buf.getvalue()


def format_number(x: float) -> str:
    """Decimal notation with 12 significant digits and no exponent."""
    x = float(x)
    if x == 0 or not math.isfinite(x):
        return "0" if x == 0 else repr(x)
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="-")


def write_rows(out, result: ScenarioResult, header: bool = True, prefix: Sequence[str] = ()):
    if header:
        out.write(",".join(CSV_HEADER) + "\n")
    pre = "".join(p + "," for p in prefix)
    for k in range(len(result.t_g)):
        t_ps = "" if result.t_ps is None else format_number(result.t_ps[k])
        cells = (
            format_number(result.t_g[k]), t_ps,
            format_number(result.C_q[k]), format_number(result.C_c[k]),
            format_number(result.Q_t[k]), format_number(result.flux[k]),
        )
        out.write(pre + ",".join(cells) + "\n")


def _pair_concurrence(init: InitialJointState, ca, cb, which: str) -> np.ndarray:
    if which == "q":
        a_pop, a_coh, b_pop, b_coh = ca.P, ca.p, cb.P, cb.p
        builder = two_qubit_state
    else:
        a_pop, a_coh, b_pop, b_coh = ca.Q, ca.q, cb.Q, cb.q
        builder = two_cavity_state
    if init.family == "two-excitation":
        b2 = abs(init.beta) ** 2
        rho14 = init.beta * np.conj(init.alpha) * a_coh * b_coh
        # clip round-off before the square root; populations are checked upstream
        rho22 = np.clip(b2 * a_pop * (1 - b_pop), 0.0, None)
        rho33 = np.clip(b2 * (1 - a_pop) * b_pop, 0.0, None)
        return xstate_concurrence(rho14, rho22, rho33)
    return np.array([wootters_concurrence(builder(init, ca, cb, k)) for k in range(len(ca.P))])


def run_scenario(s: Scenario, trunc: TruncationSpec = TruncationSpec(), *,
                 refine: int = 1) -> ScenarioResult:
    """Concurrences, photon number and output flux on the scenario grid."""
    grid_g = s.grid_in_gt()
    pa = s.params_a.scaled(1 / s.unit)
    pb = s.params_b.scaled(1 / s.unit)
    ca = extract_coefficients(pa, grid_g, trunc, refine=refine)
    cb = ca if pb == pa else extract_coefficients(pb, grid_g, trunc, refine=refine)
    c_q = _pair_concurrence(s.initial, ca, cb, "q")
    c_c = _pair_concurrence(s.initial, ca, cb, "c")
    flux = output_flux(ca, s.params_a.gamma_c)
    t_g = grid_g.times
    t_ps = None
    if s.unit_mode == "physical":
        t_ps = np.asarray(time_to_physical(t_g, s.unit, UnitContext("physical")))
    return ScenarioResult(s, t_g, t_ps, c_q, c_c, flux.photon_number, flux.output_flux, ca, cb)


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int
    base: Scenario

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ConfigError("param", f"cannot sweep {self.param!r}; expected one of {SWEEPABLE}")
        if not self.start <= self.stop:
            raise ConfigError("from", f"from={self.start} exceeds to={self.stop}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError("steps", f"steps must be an integer >= 2, got {self.steps}")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.steps))


@dataclass(frozen=True)
class SweepResult:
    param: str
    values: np.ndarray
    rows: tuple[ScenarioResult, ...] = field(repr=False)

    @property
    def C_q(self) -> np.ndarray:
        """Qubit-pair concurrence, one row per swept value."""
        return np.stack([r.C_q for r in self.rows])

    @property
    def C_c(self) -> np.ndarray:
        return np.stack([r.C_c for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join((self.param,) + CSV_HEADER) + "\n")
        for v, row in zip(self.values, self.rows):
            write_rows(buf, row, header=False, prefix=(format_number(v),))
        return buf.getvalue()


def sweep_values(base: Scenario, param: str, values: Sequence[float], *,
                 max_workers: int | None = None) -> SweepResult:
    """Run ``base`` once per value of ``param``; rows keep the given order."""
    scenarios = [base.with_value(param, float(v)) for v in values]
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            rows = tuple(pool.map(run_scenario, scenarios))
    else:
        rows = tuple(run_scenario(s) for s in scenarios)
    return SweepResult(param, np.asarray(values, dtype=float), rows)


def run_sweep(spec: SweepSpec, *, max_workers: int | None = None) -> SweepResult:
    return sweep_values(spec.base, spec.param, spec.values, max_workers=max_workers)


_UNIT_ALIASES = {
    "dimensionless": "dimensionless",
    "dimensionless-in-g": "dimensionless",
    "physical": "physical",
    "physical-ueV": "physical",
    "physical-μeV": "physical",
}


def parse_config(text: str, name: str = "config") -> Scenario:
    """Build a scenario from ``key = value`` lines.

    Blank lines and ``#`` comments are ignored; unknown or repeated keys are
    errors.  ``g`` is required; other keys fall back to zero rates,
    ``alpha = 1/sqrt(2)``, dimensionless units and the default grid.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(key, f"unknown key on line {lineno}")
        if key in raw:
            raise ConfigError(key, f"repeated on line {lineno}")
        raw[key] = value

    def number(key, default=None):
        if key not in raw:
            if default is None:
                raise ConfigError(key, "required key is missing")
            return default
        try:
            value = float(raw[key])
        except ValueError:
            raise ConfigError(key, f"not a number: {raw[key]!r}") from None
        if not math.isfinite(value):
            raise ConfigError(key, f"not finite: {raw[key]!r}")
        return value

    unit_mode = _UNIT_ALIASES.get(raw.get("unit_mode", "dimensionless"))
    if unit_mode is None:
        raise ConfigError("unit_mode", f"unknown unit mode {raw['unit_mode']!r}")
    family = raw.get("family", "two-excitation")
    if family not in ("two-excitation", "one-excitation"):
        raise ConfigError("family", f"unknown family {family!r}")

    rates = {}
    for key in ("g", "gamma_c", "gamma_q", "gamma_d"):
        rates[key] = number(key, None if key == "g" else 0.0)
        if rates[key] < 0:
            raise ConfigError(key, "rates must be non-negative")
    if rates["g"] <= 0:
        raise ConfigError("g", "must be positive")
    alpha = number("alpha", 1 / math.sqrt(2))
    if not 0 <= alpha <= 1:
        raise ConfigError("alpha", "must lie in [0, 1]")
    t_end_default, n_default = DEFAULT_GRID[unit_mode]
    t_end = number("t_end", t_end_default)
    if t_end <= 0:
        raise ConfigError("t_end", "must be positive")
    n_samples = number("n_samples", float(n_default))
    if n_samples != int(n_samples) or n_samples < 2:
        raise ConfigError("n_samples", "must be an integer >= 2")

    params = SubsystemParams(**rates)
    init = InitialJointState.with_phase(alpha, number("beta_phase", 0.0), family)
    return Scenario(name, params, params, init, TimeGrid(t_end, int(n_samples)), unit_mode)

import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from qdcavity import cli
from qdcavity.dynamics import NumericalInvariantError, TimeGrid
from qdcavity.experiments import (
    CSV_HEADER,
    PRESETS,
    ConfigError,
    SweepSpec,
    format_number,
    get_preset,
    parse_config,
    run_scenario,
    run_sweep,
    sweep_values,
)
from qdcavity.model import HBAR_UEV_PS

SMALL = TimeGrid(5.0, 51)


def small(name):
    from dataclasses import replace
    s = PRESETS[name]
    grid = TimeGrid(10.0, 201) if s.unit_mode == "physical" else SMALL
    return replace(s, grid=grid)


class TestPresets:
    def test_registry(self):
        assert sorted(PRESETS) == ["fig2a", "fig2b", "fig3", "fig4a", "fig4b"]

    @pytest.mark.parametrize("name, rates, alpha", [
        ("fig2a", (1, 0.3, 0.3, 0), 0.8),
        ("fig2b", (1, 0.3, 0, 0.3), 0.8),
        ("fig3", (1, 0.17, 0, 0), 1 / math.sqrt(2)),
        ("fig4a", (110, 100, 10, 30), 0.8),
        ("fig4b", (16, 20, 4, 12), 0.8),
    ])
    def test_parameters(self, name, rates, alpha):
        s = PRESETS[name]
        p = s.params_a
        assert (p.g, p.gamma_c, p.gamma_q, p.gamma_d) == pytest.approx(rates)
        assert s.params_b == p
        assert s.initial.alpha == pytest.approx(alpha)
        assert s.unit_mode == ("physical" if name.startswith("fig4") else "dimensionless")

    def test_unknown(self):
        with pytest.raises(ConfigError, match="fig9"):
            get_preset("fig9")


class TestRunScenario:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_initial_values(self, name):
        r = run_scenario(small(name))
        assert r.C_q[0] == pytest.approx(2 * r.scenario.initial.alpha * abs(r.scenario.initial.beta))
        assert r.C_c[0] == 0.0
        assert r.Q_t[0] == 0.0 and r.flux[0] == 0.0

    def test_physical_time_axis(self):
        r = run_scenario(small("fig4a"))
        np.testing.assert_allclose(r.t_ps, np.linspace(0, 10, 201), atol=1e-12)
        np.testing.assert_allclose(r.t_g, r.t_ps * 110 / HBAR_UEV_PS, rtol=1e-14)

    def test_flux_in_native_units(self):
        r = run_scenario(small("fig4b"))
        np.testing.assert_allclose(r.flux, 20.0 * r.Q_t)

    def test_scale_invariance(self):
        # doubling every rate and halving the time axis leaves the physics unchanged
        base = small("fig2b")
        from dataclasses import replace
        doubled = replace(base, params_a=base.params_a.scaled(2), params_b=base.params_b.scaled(2))
        a, b = run_scenario(base), run_scenario(doubled)
        np.testing.assert_allclose(a.C_q, b.C_q, atol=1e-12)

    def test_one_excitation_family(self):
        s = parse_config("g = 1\ngamma_c = 0.3\ngamma_q = 0.3\nalpha = 0.8\nfamily = one-excitation\nt_end = 5\nn_samples = 11")
        r = run_scenario(s)
        np.testing.assert_allclose(r.C_q, np.abs(r.coeffs_a.p) ** 2 * 0.96, atol=1e-9)


class TestCSV:
    def test_header_and_rows(self):
        text = run_scenario(small("fig2a")).to_csv()
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 1 + 51
        assert all(r[1] == "" for r in rows[1:])
        assert rows[1][0] == "0" and float(rows[-1][0]) == 5.0

    def test_physical_rows(self):
        rows = list(csv.reader(io.StringIO(run_scenario(small("fig4b")).to_csv())))
        assert float(rows[-1][1]) == pytest.approx(10.0)

    def test_byte_identical(self):
        assert run_scenario(small("fig2b")).to_csv() == run_scenario(small("fig2b")).to_csv()

    @pytest.mark.parametrize("x, text", [
        (0.0, "0"), (1.0, "1"), (0.25, "0.25"), (1 / 3, "0.333333333333"), (1e-15, "0.000000000000001"),
    ])
    def test_format_number(self, x, text):
        assert format_number(x) == text

    def test_no_exponent(self):
        assert "e" not in format_number(1.234e-20).lower()


class TestSweeps:
    def test_degenerate_row_matches_single_run(self):
        base = small("fig3")
        sweep = sweep_values(base, "gamma_d", [0.3])
        single = run_scenario(base.with_value("gamma_d", 0.3))
        np.testing.assert_array_equal(sweep.rows[0].C_q, single.C_q)

    def test_order_independent(self):
        base = small("fig3")
        a = sweep_values(base, "gamma_d", [0.0, 0.5, 1.0])
        b = sweep_values(base, "gamma_d", [1.0, 0.0, 0.5], max_workers=3)
        np.testing.assert_array_equal(a.C_q[0], b.C_q[1])
        np.testing.assert_array_equal(a.C_q[2], b.C_q[0])

    def test_alpha_sweep(self):
        res = sweep_values(small("fig2a"), "alpha", [0.0, 0.6, 1.0])
        np.testing.assert_allclose(res.C_q[:, 0], [0.0, 0.96, 0.0], atol=1e-12)

    def test_dephasing_sweep_ordering(self):
        res = run_sweep(SweepSpec("gamma_d", 0.0, 1.0, 5, PRESETS["fig3"]))
        integrals = np.trapezoid(res.C_q, PRESETS["fig3"].grid.times, axis=1)
        assert np.argmax(integrals) == 0
        assert np.all(np.diff(integrals) <= 0)

    def test_csv_long_format(self):
        res = sweep_values(small("fig3"), "gamma_d", [0.0, 0.1])
        rows = list(csv.reader(io.StringIO(res.to_csv())))
        assert rows[0] == ["gamma_d", *CSV_HEADER]
        assert len(rows) == 1 + 2 * 51
        assert rows[1][0] == "0" and rows[-1][0] == "0.1"

    @pytest.mark.parametrize("kwargs", [
        dict(param="g", start=0, stop=1, steps=3),
        dict(param="gamma_d", start=1, stop=0, steps=3),
        dict(param="gamma_d", start=0, stop=1, steps=1),
    ])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ConfigError):
            SweepSpec(base=PRESETS["fig3"], **kwargs)


class TestConfig:
    def test_minimal(self):
        s = parse_config("g = 2  # coupling\n\n")
        assert s.params_a.g == 2 and s.params_a.gamma_c == 0
        assert s.initial.alpha == pytest.approx(1 / math.sqrt(2))
        assert (s.grid.t_end, s.grid.n_samples) == (20.0, 2001)

    def test_physical_default_grid(self):
        s = parse_config("g = 16\nunit_mode = physical")
        assert (s.grid.t_end, s.grid.n_samples) == (100.0, 4001)

    @pytest.mark.parametrize("text, key", [
        ("gamma_c = 1", "g"),
        ("g = 1\ncolour = red", "colour"),
        ("g = 1\ng = 2", "g"),
        ("g = 1\ngamma_c = -1", "gamma_c"),
        ("g = 1\nalpha = 1.5", "alpha"),
        ("g = one", "g"),
        ("g = 0", "g"),
        ("g = 1\nunit_mode = furlongs", "unit_mode"),
        ("g = 1\nn_samples = 2.5", "n_samples"),
        ("g = 1\nfamily = three", "family"),
    ])
    def test_errors_name_key(self, text, key):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.key == key
        assert key in str(info.value)

    def test_malformed_line(self):
        with pytest.raises(ConfigError):
            parse_config("g 1")


class TestCLI:
    def test_simulate_preset(self, tmp_path):
        out = tmp_path / "fig2a.csv"
        assert cli.main(["simulate", "--preset", "fig2a", "--out", str(out)]) == 0
        assert out.read_text() == run_scenario(PRESETS["fig2a"]).to_csv()

    def test_simulate_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("g = 1\ngamma_c = 0.3\nt_end = 2\nn_samples = 5\n")
        out = tmp_path / "run.csv"
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 6

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("g = 1\nbogus = 3\n")
        assert cli.main(["simulate", "--config", str(cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_numerical_error_exit(self, monkeypatch, capsys):
        def boom(*args, **kwargs):
            raise NumericalInvariantError("trace drifted")
        monkeypatch.setattr(cli, "run_scenario", boom)
        assert cli.main(["simulate", "--preset", "fig2a"]) == 3
        assert "trace drifted" in capsys.readouterr().err

    def test_sweep(self, tmp_path):
        out = tmp_path / "s.csv"
        argv = ["sweep", "--preset", "fig3", "--param", "gamma_d", "--from", "0", "--to", "1",
                "--steps", "3", "--workers", "2", "--out", str(out)]
        assert cli.main(argv) == 0
        assert len(out.read_text().splitlines()) == 1 + 3 * 2001

    def test_sweep_bad_range(self):
        argv = ["sweep", "--preset", "fig3", "--param", "gamma_d", "--from", "1", "--to", "0"]
        assert cli.main(argv) == 2

    def test_validate(self):
        proc = subprocess.run([sys.executable, "-m", "qdcavity", "--validate"],
                              capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        lines = proc.stdout.strip().splitlines()
        assert len(lines) == 6 and all(line.startswith("[PASS]") for line in lines)

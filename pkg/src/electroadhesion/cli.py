"""Command-line interface.

Every subcommand writes its CSV atomically; on failure it prints exactly one
line ``error: <kind>: <message>`` to stderr and exits with status 1 (2 for
usage errors).  Set ``EA_LOG`` to error, info or debug for log output.
"""

from __future__ import annotations

import logging
import os
import re
import sys
import warnings

import click
import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .electrostatics import SENSITIVITY_PARAMS, force_sweep, friction_inferred_force, sensitivity_analysis
from .errors import ElectroadhesionError, ParseError, ValidationError
from .impedance import (
    CAPACITIVE_F_MAX,
    CAPACITIVE_F_MIN,
    contribution_metrics,
    fit_polarization,
    gap_capacitance,
    gap_voltage_and_force,
    load_sweep,
    remaining_impedance,
    sweep_rows,
)
from .io import atomic_write_csv
from .materials import AIR_REL_PERMITTIVITY
from .surface_energy import load_angles, load_liquids, solve_components

log = logging.getLogger("electroadhesion")

SWEEP_COLUMNS = ("freq_hz", "pe_pa", "fe_n", "mean_sep_m", "area_ratio", "loss_tangent")


def _configure_logging():
    level = os.environ.get("EA_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise click.UsageError(f"EA_LOG must be one of {', '.join(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("electroadhesion").setLevel(levels[level])
    logging.captureWarnings(True)


def _run_config(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


@click.group()
@click.version_option(__version__, prog_name="electroadhesion")
def cli():
    """Electroadhesion force modeling and impedance analysis."""


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Run configuration file.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output sweep CSV.")
@click.option("--no-leakage", is_flag=True, help="Drop interface charges and leakage from the gap field.")
@click.option("--workers", type=int, default=None, help="Frequencies evaluated in parallel.")
def sweep(config_path, out, no_leakage, workers):
    """Electrostatic force versus stimulation frequency."""
    rc = _run_config(config_path)
    sim = rc.simulation()
    if no_leakage:
        sim = sim.with_changes(leakage=False)
    result = force_sweep(sim, rc.roughness(), rc.layers(), max_workers=workers or rc.workers)
    if not result.ok:
        raise ElectroadhesionError("; ".join(result.failures.values()))
    rows = [(p.freq_hz, p.pe_pa, p.fe_n, p.mean_sep_m, p.area_ratio, p.loss_tangent) for p in result]
    atomic_write_csv(out, SWEEP_COLUMNS, rows)
    click.echo(f"wrote {len(rows)} frequencies to {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--param", type=click.Choice(SENSITIVITY_PARAMS), required=True)
@click.option("--delta", type=float, required=True, help="Fractional change, e.g. -0.5 or 0.5.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--workers", type=int, default=None)
def sensitivity(config_path, param, delta, out, workers):
    """Percent change of the force after scaling one parameter by (1 + delta)."""
    rc = _run_config(config_path)
    res = sensitivity_analysis(rc.simulation(), rc.roughness(), rc.layers(), param, delta,
                               max_workers=workers or rc.workers)
    rows = list(zip(res.freq_hz, res.base_fe, res.perturbed_fe, res.percent))
    atomic_write_csv(out, ("freq_hz", "fe_base_n", "fe_perturbed_n", "change_pct"), rows)
    click.echo(f"wrote {len(rows)} frequencies to {out}")


@cli.group()
def impedance():
    """Remaining-impedance analysis of measured sweeps."""


def _three_sweeps(total, skin, screen):
    return (load_sweep(total, "total_sliding"), load_sweep(skin, "skin"), load_sweep(screen, "touchscreen"))


_sweep_options = [
    click.option("--total", type=click.Path(dir_okay=False), required=True, help="Total (sliding) impedance CSV."),
    click.option("--skin", type=click.Path(dir_okay=False), required=True, help="Skin impedance CSV."),
    click.option("--screen", type=click.Path(dir_okay=False), required=True, help="Touchscreen impedance CSV."),
    click.option("--area", type=float, required=True, help="Apparent contact area (m^2)."),
    click.option("--eps-gap", type=float, default=AIR_REL_PERMITTIVITY, show_default=True),
    click.option("--f-min", type=float, default=CAPACITIVE_F_MIN, show_default=True),
    click.option("--f-max", type=float, default=CAPACITIVE_F_MAX, show_default=True),
]


def sweep_inputs(func):
    for opt in reversed(_sweep_options):
        func = opt(func)
    return func


@impedance.command("analyze")
@sweep_inputs
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Remaining impedance CSV.")
def impedance_analyze(total, skin, screen, area, eps_gap, f_min, f_max, out):
    """Remaining impedance, gap capacitance, gap thickness and polarization fit."""
    t, s, ts = _three_sweeps(total, skin, screen)
    rem = remaining_impedance(t, s, ts)
    est = gap_capacitance(rem, f_min, f_max).with_thickness(area, eps_gap)
    model = fit_polarization(rem, est.c_gap, f_max=f_min)
    atomic_write_csv(out, ("freq_hz", "z_real_ohm", "z_imag_ohm"), sweep_rows(rem))
    click.echo(f"c_gap_f={est.c_gap:.9g}")
    click.echo(f"gap_m={est.u:.9g}")
    click.echo(f"admittance_slope={est.slope:.9g}")
    click.echo(f"r_ep_ohm={model.r_ep:.9g}")
    click.echo(f"c_ep_f={model.c_ep:.9g}")
    for note in est.warnings:
        click.echo(f"warning={note}")


@impedance.command("force")
@sweep_inputs
@click.option("--v0", type=float, required=True, help="Voltage amplitude (V).")
@click.option("--gap", "gap_m", type=float, default=None, help="Gap thickness (m); estimated if omitted.")
@click.option("--implicit", is_flag=True, help="Drive capacitive currents by the gap voltage itself.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def impedance_force(total, skin, screen, area, eps_gap, f_min, f_max, v0, gap_m, implicit, out):
    """Gap voltage and electrostatic force per frequency."""
    t, s, ts = _three_sweeps(total, skin, screen)
    rem = remaining_impedance(t, s, ts)
    est = gap_capacitance(rem, f_min, f_max).with_thickness(area, eps_gap)
    model = fit_polarization(rem, est.c_gap, f_max=f_min)
    u = est.u if gap_m is None else gap_m
    spec = gap_voltage_and_force(t, s, ts, model, v0, area, u, implicit=implicit)
    rows = list(zip(spec.freq_hz, np.abs(spec.dv_gap), spec.fe, spec.fe_nopol))
    atomic_write_csv(out, ("freq_hz", "dv_gap_v", "fe_n", "fe_nopol_n"), rows)
    click.echo(f"wrote {len(rows)} frequencies to {out}")


@impedance.command("metrics")
@click.option("--total", type=click.Path(dir_okay=False), required=True)
@click.option("--part", "parts", multiple=True, required=True, metavar="NAME=PATH",
              help="Component sweep, repeatable.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def impedance_metrics(total, parts, out):
    """Magnitude ratio and percent phase synchronization of each part."""
    t = load_sweep(total, "total_sliding")
    named = {}
    for item in parts:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise click.UsageError(f"--part expects NAME=PATH, got {item!r}")
        named[name] = load_sweep(path, "remaining")
    m = contribution_metrics(t, named)
    atomic_write_csv(out, ("freq_hz", "part", "mr", "pps"), list(m.rows()))
    click.echo(f"wrote {len(m.freq_hz) * len(m.parts)} rows to {out}")


@cli.group()
def friction():
    """Friction-based force inference."""


@friction.command("infer")
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True,
              help="CSV with columns freq_hz,mu_off,mu_on.")
@click.option("--fn", type=float, required=True, help="Normal force (N).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def friction_infer(input_path, fn, out):
    """Electrostatic force from friction coefficients with and without voltage."""
    rows = _read_table(input_path, ("freq_hz", "mu_off", "mu_on"))
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fe = np.atleast_1d(friction_inferred_force(arr[:, 1], arr[:, 2], fn))
    for w in caught:
        log.warning(str(w.message))
    atomic_write_csv(out, ("freq_hz", "fe_n"), list(zip(arr[:, 0], fe)))
    click.echo(f"wrote {len(fe)} rows to {out}")


@cli.command("surface-energy")
@click.option("--angles", type=click.Path(dir_okay=False), required=True, help="CSV sample,liquid,theta_deg.")
@click.option("--liquids", type=click.Path(dir_okay=False), default=None, help="Liquids CSV (bundled if omitted).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def surface_energy_cmd(angles, liquids, out):
    """Acid-base surface energy components per sample."""
    table = load_liquids(liquids)
    data = load_angles(angles)
    rows = []
    for sample, per_liquid in data.items():
        missing = [name for name in per_liquid if name not in table]
        if missing:
            raise ValidationError(f"sample {sample}: unknown liquid(s) {', '.join(missing)}")
        names = list(per_liquid)
        res = solve_components([table[n] for n in names], [per_liquid[n] for n in names])
        rows.append((sample, res.gamma_lw, res.gamma_plus, res.gamma_minus, res.gamma_total, res.residual))
    atomic_write_csv(out, ("sample", "gamma_lw", "gamma_plus", "gamma_minus", "gamma_total", "residual"), rows)
    click.echo(f"wrote {len(rows)} samples to {out}")


@cli.command()
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--r-ep", type=float, default=5e8, show_default=True, help="Polarization resistance (ohm).")
@click.option("--c-ep", type=float, default=2e-12, show_default=True, help="Polarization capacitance (F).")
@click.option("--c-gap", type=float, default=413e-12, show_default=True, help="Gap capacitance (F).")
@click.option("--per-decade", type=int, default=10, show_default=True)
def synth(out_dir, r_ep, c_ep, c_gap, per_decade):
    """Write synthetic skin / touchscreen / total sweeps of a known circuit."""
    from .impedance import RemainingModel
    from .synth import log_grid, write_fixture

    paths = write_fixture(out_dir, RemainingModel(r_ep, c_ep, c_gap), log_grid(1.0, 1e6, per_decade))
    click.echo(" ".join(str(p) for p in paths.values()))


def _read_table(path, header):
    from pathlib import Path

    text = Path(path).read_text(encoding="utf-8")
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or tuple(c.strip() for c in lines[0][1].split(",")) != header:
        raise ParseError(f"expected header {','.join(header)}", path, lines[0][0] if lines else None)
    rows = []
    for lineno, ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ParseError(f"expected {len(header)} columns", path, lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError("non-numeric value", path, lineno) from None
    return rows


def _kind(exc):
    name = type(exc).__name__
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def _one_line(text):
    return " ".join(str(text).split())


def main(argv=None) -> int:
    """Run the CLI and return the process exit status."""
    try:
        _configure_logging()
        cli.main(args=argv, prog_name="electroadhesion", standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("error: aborted", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: usage: {_one_line(exc.format_message())}", err=True)
        return 2
    except (ElectroadhesionError, OSError, ValueError) as exc:
        click.echo(f"error: {_kind(exc)}: {_one_line(exc)}", err=True)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Forward synthesis of impedance sweeps from known equivalent circuits.

Used to build test fixtures with known answers for the impedance pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .impedance import ImpedanceSweep, RemainingModel, write_sweep


def log_grid(f_lo=1.0, f_hi=1e6, per_decade=10):
    """Log-spaced frequencies including both ends."""
    n = int(round(math.log10(f_hi / f_lo) * per_decade)) + 1
    return np.logspace(math.log10(f_lo), math.log10(f_hi), n)


def series_rc(freq_hz, r, c):
    """Z of a resistor in series with a capacitor."""
    w = 2 * math.pi * np.asarray(freq_hz, dtype=float)
    return r + 1.0 / (1j * w * c)


def parallel_rc(freq_hz, r, c):
    """Z of a resistor in parallel with a capacitor (r = inf drops the resistor)."""
    w = 2 * math.pi * np.asarray(freq_hz, dtype=float)
    g = 0.0 if math.isinf(r) else 1.0 / r
    return 1.0 / (g + 1j * w * c)


@dataclass(frozen=True)
class SkinCircuit:
    """Deep-tissue resistance in series with the stratum corneum R || C."""

    r_series: float = 2e3
    r_sc: float = 5e5
    c_sc: float = 20e-9

    def impedance(self, freq_hz):
        return self.r_series + parallel_rc(freq_hz, self.r_sc, self.c_sc)


@dataclass(frozen=True)
class ScreenCircuit:
    """Electrode sheet resistance in series with the insulator capacitance."""

    r_electrode: float = 500.0
    c_insulator: float = 4.5e-9

    def impedance(self, freq_hz):
        return series_rc(freq_hz, self.r_electrode, self.c_insulator)


def remaining_model_impedance(freq_hz, model: RemainingModel):
    return 1.0 / model.admittance(freq_hz)


def three_part_fixture(freq_hz, model: RemainingModel, skin: SkinCircuit = SkinCircuit(),
                       screen: ScreenCircuit = ScreenCircuit()):
    """Skin, touchscreen, remaining and total sweeps of a series interface."""
    f = np.asarray(freq_hz, dtype=float)
    z_skin = skin.impedance(f)
    z_screen = screen.impedance(f)
    z_rem = remaining_model_impedance(f, model)
    return {
        "skin": ImpedanceSweep(f, z_skin, "skin"),
        "touchscreen": ImpedanceSweep(f, z_screen, "touchscreen"),
        "remaining": ImpedanceSweep(f, z_rem, "remaining"),
        "total": ImpedanceSweep(f, z_skin + z_screen + z_rem, "total_sliding"),
    }


def write_fixture(directory, model: RemainingModel, freq_hz=None, skin=SkinCircuit(), screen=ScreenCircuit()):
    """Write skin.csv, touchscreen.csv, total.csv and remaining.csv into `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    f = log_grid() if freq_hz is None else freq_hz
    parts = three_part_fixture(f, model, skin, screen)
    paths = {}
    for name, sweep in parts.items():
        paths[name] = directory / f"{name}.csv"
        write_sweep(sweep, paths[name])
    return paths

"""Impedance-sweep analysis of the finger / air gap / touchscreen interface.

The remaining impedance (total minus skin minus touchscreen) is modeled as
the air-gap capacitance in parallel with an electrode-polarization branch
R_EP || C_EP.  From it we extract the gap capacitance and thickness, fit the
polarization elements, and estimate the gap voltage and force.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from .errors import AlignmentError, DomainError, FitInfeasibleError, ParseError, ValidationError
from .materials import AIR_REL_PERMITTIVITY, EPS0

log = logging.getLogger(__name__)

SWEEP_HEADER = ("freq_hz", "z_real_ohm", "z_imag_ohm")
CONDITIONS = ("skin", "touchscreen", "total_sliding", "total_stationary", "remaining")
OFFSETS = ("none", "positive_dc", "negative_dc")
CAPACITIVE_F_MIN = 30.0
CAPACITIVE_F_MAX = 1e5
SLOPE_TOLERANCE = 0.15


@dataclass(frozen=True)
class ImpedanceSweep:
    """Complex impedance versus frequency.

    Measured sweeps additionally satisfy |Z| > 0 (checked by `load_sweep`);
    derived sweeps such as a remaining impedance may vanish.
    """

    freq_hz: np.ndarray
    z: np.ndarray
    condition: str = "total_sliding"
    offset: str = "none"
    area: float | None = None

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float)
        z = np.asarray(self.z, dtype=complex)
        if f.ndim != 1 or f.shape != z.shape:
            raise ValidationError("frequency and impedance arrays must be 1-D and equal length")
        if f.size and (np.any(f <= 0) or np.any(np.diff(f) <= 0)):
            raise ValidationError("frequencies must be positive, unique and strictly increasing")
        if self.condition not in CONDITIONS:
            raise ValidationError(f"unknown condition {self.condition!r}")
        if self.offset not in OFFSETS:
            raise ValidationError(f"unknown offset {self.offset!r}")
        if self.area is not None and not self.area > 0:
            raise ValidationError("area must be > 0")
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "z", z)

    def __len__(self):
        return self.freq_hz.size

    @property
    def omega(self):
        return 2 * math.pi * self.freq_hz

    @property
    def admittance(self):
        return 1.0 / self.z

    @property
    def phase(self):
        """Phase angle atan2(Im Z, Re Z) in radians."""
        return np.arctan2(self.z.imag, self.z.real)

    def with_z(self, z, condition=None):
        return ImpedanceSweep(self.freq_hz, z, condition or self.condition, self.offset, self.area)


def load_sweep(path, condition="total_sliding", offset="none", area=None) -> ImpedanceSweep:
    """Read a ``freq_hz,z_real_ohm,z_imag_ohm`` CSV (``#`` lines are comments)."""
    path = Path(path)
    source = str(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [(i, ln) for i, ln in enumerate(lines, start=1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty impedance file", source)
    hline, header = rows[0]
    cols = tuple(c.strip() for c in next(csv.reader([header])))
    if cols != SWEEP_HEADER:
        raise ParseError(f"expected header {','.join(SWEEP_HEADER)}, got {header.strip()}", source, hline)
    data = []
    for lineno, ln in rows[1:]:
        parts = next(csv.reader([ln]))
        if len(parts) != 3:
            raise ParseError("expected 3 columns", source, lineno)
        try:
            f, zr, zi = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"non-numeric value in {ln.strip()!r}", source, lineno) from None
        if not all(map(math.isfinite, (f, zr, zi))):
            raise ParseError("non-finite value", source, lineno)
        if zr == 0 and zi == 0:
            raise ValidationError(f"{source}:{lineno}: |Z| must be > 0")
        data.append((f, zr, zi))
    if len(data) < 2:
        raise ValidationError(f"{source}: at least 2 records required")
    arr = np.array(data)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ValidationError(f"{source}: frequencies must be strictly increasing without duplicates")
    return ImpedanceSweep(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], condition, offset, area)


def sweep_rows(sweep: ImpedanceSweep):
    """Rows (freq, Re Z, Im Z) as Python floats."""
    return [(float(f), float(z.real), float(z.imag)) for f, z in zip(sweep.freq_hz, sweep.z)]


def write_sweep(sweep: ImpedanceSweep, path, fmt=None):
    """Write a sweep CSV.  The default uses shortest round-trip float text."""
    from .io import atomic_write_csv

    atomic_write_csv(path, SWEEP_HEADER, sweep_rows(sweep), fmt=fmt)


def _interp_complex(f_src, z_src, f_dst):
    lf = np.log(f_src)
    ld = np.log(f_dst)
    return np.interp(ld, lf, z_src.real) + 1j * np.interp(ld, lf, z_src.imag)


def align(*sweeps: ImpedanceSweep):
    """Resample sweeps onto the grid of the first one, restricted to the common range.

    Real and imaginary parts are interpolated linearly in log frequency.
    Sweeps already on the reference grid are returned unchanged.
    """
    if not sweeps:
        return ()
    lo = max(s.freq_hz[0] for s in sweeps)
    hi = min(s.freq_hz[-1] for s in sweeps)
    if lo > hi:
        raise AlignmentError("sweeps have disjoint frequency ranges")
    ref = sweeps[0].freq_hz
    grid = ref[(ref >= lo) & (ref <= hi)]
    if grid.size == 0:
        raise AlignmentError("no reference frequency lies inside the common range")
    out = []
    for s in sweeps:
        if s.freq_hz.shape == grid.shape and np.array_equal(s.freq_hz, grid):
            out.append(s)
        else:
            out.append(ImpedanceSweep(grid, _interp_complex(s.freq_hz, s.z, grid), s.condition, s.offset, s.area))
    return tuple(out)


def remaining_impedance(total: ImpedanceSweep, skin: ImpedanceSweep, screen: ImpedanceSweep) -> ImpedanceSweep:
    """Z_R = Z_total - Z_skin - Z_touchscreen on the common grid."""
    t, s, ts = align(total, skin, screen)
    return ImpedanceSweep(t.freq_hz, t.z - s.z - ts.z, "remaining", t.offset, t.area)


@dataclass(frozen=True)
class GapEstimate:
    """Air-gap capacitance, optionally with the thickness it implies."""

    c_gap: float
    u: float | None = None
    area: float | None = None
    eps_gap: float = AIR_REL_PERMITTIVITY
    slope: float = math.nan
    freq_hz: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    c_per_freq: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    warnings: tuple = ()

    def with_thickness(self, area, eps_gap=AIR_REL_PERMITTIVITY):
        u = gap_thickness(self.c_gap, area, eps_gap)
        return GapEstimate(self.c_gap, u, area, eps_gap, self.slope, self.freq_hz, self.c_per_freq, self.warnings)


def gap_capacitance(remaining: ImpedanceSweep, f_min: float = CAPACITIVE_F_MIN,
                    f_max: float = CAPACITIVE_F_MAX) -> GapEstimate:
    """Gap capacitance as the median of |Y_R|/w over [f_min, f_max].

    The log-log slope of |Y_R| over the same band is reported; a deviation
    from 1 by more than 0.15 attaches a non-capacitive-regime warning.
    """
    band = (remaining.freq_hz >= f_min) & (remaining.freq_hz <= f_max)
    if band.sum() < 3:
        raise FitInfeasibleError(f"need >= 3 records in [{f_min:g}, {f_max:g}] Hz, got {int(band.sum())}")
    f = remaining.freq_hz[band]
    y = np.abs(1.0 / remaining.z[band])
    c = y / (2 * math.pi * f)
    slope = float(np.polyfit(np.log10(f), np.log10(y), 1)[0])
    notes = ()
    if abs(slope - 1.0) > SLOPE_TOLERANCE:
        msg = f"admittance slope {slope:.3f} decade/decade: band is not capacitive"
        log.warning(msg)
        notes = (msg,)
    return GapEstimate(float(np.median(c)), slope=slope, freq_hz=f, c_per_freq=c, warnings=notes)


def gap_thickness(c_gap: float, area: float, eps_gap: float = AIR_REL_PERMITTIVITY) -> float:
    """Parallel-plate gap u = eps0 eps_gap A / C_gap (m)."""
    if not c_gap > 0 or not area > 0:
        raise DomainError("C_gap and area must be > 0")
    return EPS0 * eps_gap * area / c_gap


def capacitance_from_gap(u: float, area: float, eps_gap: float = AIR_REL_PERMITTIVITY) -> float:
    """Inverse of `gap_thickness`."""
    if not u > 0 or not area > 0:
        raise DomainError("u and area must be > 0")
    return EPS0 * eps_gap * area / u


@dataclass(frozen=True)
class RemainingModel:
    """Gap capacitance with a parallel R_EP || C_EP polarization branch.

    ``r_ep = inf`` means no resistive polarization path was detected.
    """

    r_ep: float
    c_ep: float
    c_gap: float
    residual: float = 0.0

    def __post_init__(self):
        if self.r_ep < 0 or self.c_ep < 0 or self.c_gap < 0:
            raise ValidationError("circuit elements must be >= 0")

    @property
    def has_polarization(self):
        return math.isfinite(self.r_ep)

    def admittance(self, freq_hz):
        w = 2 * math.pi * np.asarray(freq_hz, dtype=float)
        g = 0.0 if not self.has_polarization else (math.inf if self.r_ep == 0 else 1.0 / self.r_ep)
        return g + 1j * w * (self.c_ep + self.c_gap)


def fit_polarization(remaining: ImpedanceSweep, c_gap: float, f_max: float = CAPACITIVE_F_MIN,
                     min_points: int = 3) -> RemainingModel:
    """Fit R_EP and C_EP below `f_max` with C_gap held fixed.

    Solves min || W (A x - b) || with x = (1/R_EP, C_EP) >= 0 for the model
    Y_R = 1/R_EP + jw(C_EP + C_gap); rows are weighted by 1/|Y_R| so every
    frequency counts relatively.
    """
    if c_gap < 0:
        raise DomainError("C_gap must be >= 0")
    band = remaining.freq_hz < f_max
    if band.sum() < min_points:
        raise FitInfeasibleError(f"need >= {min_points} records below {f_max:g} Hz, got {int(band.sum())}")
    w = remaining.omega[band]
    y = 1.0 / remaining.z[band]
    weight = 1.0 / np.abs(y)
    # real rows: Re Y = g ; imaginary rows: Im Y - w C_gap = w C_EP
    a = np.zeros((2 * w.size, 2))
    a[: w.size, 0] = weight
    a[w.size:, 1] = w * weight
    b = np.concatenate([y.real * weight, (y.imag - w * c_gap) * weight])
    # scale columns to unit norm for conditioning
    scale = np.linalg.norm(a, axis=0)
    scale[scale == 0] = 1.0
    x, resid = nnls(a / scale, b)
    g, c_ep = x / scale
    g_floor = 1e-12 * float(np.max(np.abs(y)))
    r_ep = math.inf if g <= g_floor else float(1.0 / g)
    return RemainingModel(r_ep, float(c_ep), float(c_gap), float(resid))


@dataclass(frozen=True)
class ForceSpectrum:
    """Gap voltage (complex amplitude, V) and force (N) per frequency."""

    freq_hz: np.ndarray
    dv: np.ndarray
    dv_gap: np.ndarray
    dv_gap_nopol: np.ndarray
    dv_gap_implicit: np.ndarray
    fe: np.ndarray
    fe_nopol: np.ndarray
    fe_implicit: np.ndarray
    variants_differ: np.ndarray


def maxwell_force(dv_gap, area: float, u: float):
    """Parallel-plate force 1/2 eps0 A |dV|^2 / u^2 (N)."""
    if not u > 0 or not area > 0:
        raise DomainError("u and area must be > 0")
    return 0.5 * EPS0 * area * np.abs(dv_gap) ** 2 / u**2


def gap_voltage_and_force(total: ImpedanceSweep, skin: ImpedanceSweep, screen: ImpedanceSweep,
                          model: RemainingModel, v0: float, area: float, u: float,
                          implicit: bool = False) -> ForceSpectrum:
    """Voltage across the air gap and the resulting electrostatic force.

    Node analysis gives I = V/Z_total, dV = (V - Z_ts I) - Z_skin I and the
    gap voltage dV_gap = dV - R_EP [I - jw(C_gap + C_EP) dV].  With
    `implicit` the capacitive currents are driven by dV_gap instead, which
    has the closed form dV_gap = (dV - R_EP I) / (1 - jw R_EP (C_gap + C_EP)).
    Both readings are always computed; `dv_gap`/`fe` hold the selected one.
    An absent polarization branch (R_EP = inf) leaves dV_gap = dV.
    """
    if v0 < 0:
        raise DomainError("V0 must be >= 0")
    t, s, ts = align(total, skin, screen)
    if np.any(t.z == 0):
        raise DomainError("Z_total vanishes at some frequency")
    w = t.omega
    current = v0 / t.z
    dv = (v0 - ts.z * current) - s.z * current
    c_tot = model.c_gap + model.c_ep
    if model.has_polarization:
        r = model.r_ep
        explicit = dv - r * (current - 1j * w * c_tot * dv)
        implicit_v = (dv - r * current) / (1 - 1j * w * r * c_tot)
    else:
        explicit = dv.copy()
        implicit_v = dv.copy()
    nopol = dv.copy()
    f_exp = maxwell_force(explicit, area, u)
    f_imp = maxwell_force(implicit_v, area, u)
    f_nopol = maxwell_force(nopol, area, u)
    scale = np.maximum(np.abs(explicit), np.abs(implicit_v))
    with np.errstate(invalid="ignore", divide="ignore"):
        differ = np.where(scale > 0, np.abs(explicit - implicit_v) / np.where(scale > 0, scale, 1.0) > 1e-3, False)
    if np.any(differ):
        log.info("explicit and implicit gap-voltage readings differ by > 0.1%% at %d frequencies", int(differ.sum()))
    sel_v, sel_f = (implicit_v, f_imp) if implicit else (explicit, f_exp)
    return ForceSpectrum(t.freq_hz, dv, sel_v, nopol, implicit_v, sel_f, f_nopol, f_imp, differ)


@dataclass(frozen=True)
class ContributionMetrics:
    """Magnitude ratio and percent phase synchronization of each part."""

    freq_hz: np.ndarray
    parts: tuple
    mr: np.ndarray  # shape (n_parts, n_freq)
    pps: np.ndarray  # NaN where undefined
    pps_defined: np.ndarray

    def rows(self):
        for j, name in enumerate(self.parts):
            for i, f in enumerate(self.freq_hz):
                yield f, name, self.mr[j, i], self.pps[j, i]


def contribution_metrics(total: ImpedanceSweep, parts) -> ContributionMetrics:
    """MR_i = |Z_i|/|Z_total| and PPS_i = [1 - |phi_i - phi_t|/|phi_t|] * 100.

    Parameters
    ----------
    parts : mapping of name -> ImpedanceSweep, or sequence of sweeps
        Sequence entries are named by their condition label.
    """
    if hasattr(parts, "items"):
        names, sweeps = zip(*parts.items()) if parts else ((), ())
    else:
        sweeps = tuple(parts)
        names = tuple(s.condition for s in sweeps)
    aligned = align(total, *sweeps)
    t = aligned[0]
    mag_t = np.abs(t.z)
    if np.any(mag_t == 0):
        raise DomainError("|Z_total| vanishes at some frequency")
    phi_t = t.phase
    defined = phi_t != 0
    mr = np.array([np.abs(s.z) / mag_t for s in aligned[1:]]).reshape(len(names), -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pps = np.array([np.where(defined, (1 - np.abs(s.phase - phi_t) / np.abs(phi_t)) * 100.0, np.nan)
                        for s in aligned[1:]]).reshape(len(names), -1)
    return ContributionMetrics(t.freq_hz, tuple(names), mr, pps, np.broadcast_to(defined, pps.shape).copy())


def normalize_by_area(sweep: ImpedanceSweep, from_area: float, to_area: float) -> ImpedanceSweep:
    """Scale every impedance by from_area / to_area (phase unchanged)."""
    if not from_area > 0 or not to_area > 0:
        raise DomainError("areas must be > 0")
    k = from_area / to_area
    return ImpedanceSweep(sweep.freq_hz, sweep.z * k, sweep.condition, sweep.offset, to_area)

"""Frequency-dependent dielectric and mechanical layer properties.

All internal quantities are SI with *absolute* permittivity (F/m).  Layer
definitions accept relative permittivity and convert on evaluation.
Tabulated properties interpolate piecewise-linearly in log(frequency) versus
log(value).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np
from scipy.constants import epsilon_0

from .errors import DomainError, ParseError, RangeError, ValidationError

EPS0 = epsilon_0
AIR_REL_PERMITTIVITY = 1.00059
AIR_CONDUCTIVITY = 1e-14

DISPERSION_HEADER = ("freq_hz", "eps_r", "sigma_s_per_m")


@dataclass(frozen=True)
class TabulatedProperty:
    """A positive material property sampled on a frequency grid.

    Parameters
    ----------
    freq_hz : array_like
        Strictly increasing, positive frequencies (Hz).
    values : array_like
        Property values at those frequencies; must be positive because the
        interpolation works in log space.
    clamp : bool
        If True, frequencies outside the table return the nearest end value
        instead of raising `RangeError`.
    """

    freq_hz: np.ndarray
    values: np.ndarray
    clamp: bool = False
    _log_f: np.ndarray = field(init=False, repr=False, compare=False)
    _log_v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.ndim != 1 or f.shape != v.shape or f.size < 2:
            raise ValidationError("tabulated property needs >= 2 matching (freq, value) pairs")
        if np.any(f <= 0) or np.any(np.diff(f) <= 0):
            raise ValidationError("tabulated frequencies must be positive and strictly increasing")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValidationError("tabulated values must be finite and positive")
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_log_f", np.log(f))
        object.__setattr__(self, "_log_v", np.log(v))

    def __call__(self, freq_hz):
        f = np.asarray(freq_hz, dtype=float)
        lo, hi = self.freq_hz[0], self.freq_hz[-1]
        # relative slack so that 2*pi*f/(2*pi) round trips stay inside the table
        slack = 1e-12
        if not self.clamp and (np.any(f < lo * (1 - slack)) or np.any(f > hi * (1 + slack))):
            raise RangeError(
                f"frequency outside tabulated range [{lo:g}, {hi:g}] Hz and extrapolation is disabled"
            )
        fc = np.clip(f, lo, hi)
        out = np.exp(np.interp(np.log(fc), self._log_f, self._log_v))
        # exact table values at the nodes (and at the ends when clamping)
        idx = np.searchsorted(self.freq_hz, fc)
        idx = np.clip(idx, 0, self.freq_hz.size - 1)
        hit = self.freq_hz[idx] == fc
        out = np.where(hit, self.values[idx], out)
        return out if out.ndim else float(out)

    def scaled(self, factor):
        """Return a copy with every value multiplied by `factor`."""
        return TabulatedProperty(self.freq_hz, self.values * factor, clamp=self.clamp)


Property = Union[float, TabulatedProperty]


def _evaluate(prop, freq_hz):
    if isinstance(prop, TabulatedProperty):
        return prop(freq_hz)
    return float(prop)


@dataclass(frozen=True)
class DielectricLayer:
    """A material slab of the finger/screen stack.

    Parameters
    ----------
    name : str
    thickness : float
        Slab thickness d (m).
    rel_permittivity : float or TabulatedProperty
        Real relative permittivity, constant or tabulated over frequency.
    conductivity : float or TabulatedProperty
        Conductivity (S/m), constant or tabulated over frequency.
    elastic_modulus : float
        Young's modulus (Pa).
    poisson : float
        Poisson's ratio.
    """

    name: str
    thickness: float
    rel_permittivity: Property
    conductivity: Property
    elastic_modulus: float = math.inf
    poisson: float = 0.0

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValidationError(f"{self.name}: thickness must be > 0")
        if not 0.0 <= self.poisson <= 0.5:
            raise ValidationError(f"{self.name}: Poisson ratio must lie in [0, 0.5]")
        if not self.elastic_modulus > 0:
            raise ValidationError(f"{self.name}: elastic modulus must be > 0")
        eps = self.rel_permittivity
        eps_min = eps.values.min() if isinstance(eps, TabulatedProperty) else eps
        if eps_min < 1:
            raise ValidationError(f"{self.name}: relative permittivity must be >= 1")
        sig = self.conductivity
        sig_min = sig.values.min() if isinstance(sig, TabulatedProperty) else sig
        if sig_min < 0:
            raise ValidationError(f"{self.name}: conductivity must be >= 0")

    def rel_permittivity_at(self, freq_hz):
        return _evaluate(self.rel_permittivity, freq_hz)

    def conductivity_at(self, freq_hz):
        return _evaluate(self.conductivity, freq_hz)

    def permittivity_at(self, freq_hz):
        """Absolute real permittivity (F/m)."""
        return EPS0 * self.rel_permittivity_at(freq_hz)

    def with_changes(self, **changes):
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return DielectricLayer(**values)


@dataclass(frozen=True)
class GapMedium:
    """The air filling the gap between screen and finger."""

    rel_permittivity: float = AIR_REL_PERMITTIVITY
    conductivity: float = AIR_CONDUCTIVITY

    def __post_init__(self):
        if self.rel_permittivity < 1:
            raise ValidationError("gap permittivity must be >= 1")
        if self.conductivity < 0:
            raise ValidationError("gap conductivity must be >= 0")

    @property
    def permittivity(self):
        return EPS0 * self.rel_permittivity


@dataclass(frozen=True)
class ComplexPermittivity:
    """Absolute complex permittivity ``real - 1j * imag`` (F/m)."""

    real: float
    imag: float

    @property
    def value(self):
        return complex(self.real, -self.imag)


def _check_omega(omega):
    if not omega > 0:
        raise DomainError("angular frequency must be > 0")
    return omega / (2.0 * math.pi)


def complex_permittivity_at(layer: DielectricLayer, omega: float) -> ComplexPermittivity:
    """Absolute complex permittivity eps0*eps_r(w) - j*sigma(w)/w of a layer."""
    f = _check_omega(omega)
    return ComplexPermittivity(layer.permittivity_at(f), layer.conductivity_at(f) / omega)


def loss_tangent_at(layer: DielectricLayer, omega: float) -> float:
    """Dielectric loss tangent eps''/eps' at angular frequency `omega`."""
    eps = complex_permittivity_at(layer, omega)
    if eps.real == 0:
        raise DomainError("loss tangent undefined for zero storage permittivity")
    return eps.imag / eps.real


def relaxation_time(layer: DielectricLayer, omega: float) -> float:
    """Charge relaxation time eps/sigma (s) at angular frequency `omega`."""
    f = _check_omega(omega)
    sigma = layer.conductivity_at(f)
    if sigma == 0:
        raise DomainError(f"{layer.name}: zero conductivity gives an infinite relaxation time")
    return layer.permittivity_at(f) / sigma


def load_dispersion_csv(path, clamp=False):
    """Read a ``freq_hz,eps_r,sigma_s_per_m`` table.

    Returns
    -------
    (TabulatedProperty, TabulatedProperty)
        Relative permittivity and conductivity tables.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    return _parse_dispersion(text.splitlines(), str(path), clamp)


def _parse_dispersion(lines, source, clamp):
    rows = [(i, ln) for i, ln in enumerate(lines, start=1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty dispersion table", source)
    header_line, header = rows[0]
    cols = tuple(c.strip() for c in next(csv.reader([header])))
    if cols != DISPERSION_HEADER:
        raise ParseError(f"expected header {','.join(DISPERSION_HEADER)}, got {header.strip()}", source, header_line)
    data = []
    for lineno, ln in rows[1:]:
        parts = next(csv.reader([ln]))
        if len(parts) != 3:
            raise ParseError("expected 3 columns", source, lineno)
        try:
            data.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"non-numeric value in {ln.strip()!r}", source, lineno) from None
    arr = np.array(data, dtype=float).reshape(-1, 3)
    try:
        return (
            TabulatedProperty(arr[:, 0], arr[:, 1], clamp=clamp),
            TabulatedProperty(arr[:, 0], arr[:, 2], clamp=clamp),
        )
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def placeholder_sc_dispersion(clamp=False):
    """Bundled *synthetic* stratum corneum table for smoke tests.

    The numbers are smooth power laws (permittivity falling, conductivity
    rising over 1 Hz - 1 MHz) and are not measurement data.
    """
    text = resources.files("electroadhesion.data").joinpath("sc_placeholder.csv").read_text(encoding="utf-8")
    return _parse_dispersion(text.splitlines(), "sc_placeholder.csv", clamp)


def stratum_corneum(thickness, elastic_modulus, poisson, dispersion=None, clamp=False):
    """Build the SC layer from a dispersion table (placeholder if None)."""
    if dispersion is None:
        eps, sigma = placeholder_sc_dispersion(clamp=clamp)
    elif isinstance(dispersion, (str, Path)):
        eps, sigma = load_dispersion_csv(dispersion, clamp=clamp)
    else:
        eps, sigma = dispersion
    return DielectricLayer("stratum corneum", thickness, eps, sigma, elastic_modulus, poisson)

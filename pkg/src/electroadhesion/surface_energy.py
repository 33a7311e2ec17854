"""Acid-base surface free energy from contact angles.

For a liquid L on a solid S,

    gamma_L (1 + cos theta) = 2 sqrt(gLW_S gLW_L) + 2 sqrt(g+_S g-_L) + 2 sqrt(g-_S g+_L),

which is linear in the square roots of the three solid components.  With
three or more liquids the system is solved by nonnegative least squares.
All energies are in mJ/m^2 and angles in degrees.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from .errors import IllPosedError, ParseError, ValidationError

log = logging.getLogger(__name__)

LIQUIDS_HEADER = ("name", "gamma_lw", "gamma_plus", "gamma_minus", "gamma_total")
ANGLES_HEADER = ("sample", "liquid", "theta_deg")
TOTAL_TOLERANCE = 0.1


@dataclass(frozen=True)
class ProbeLiquid:
    """Surface tension components of a probe liquid (mJ/m^2)."""

    name: str
    gamma_lw: float
    gamma_plus: float
    gamma_minus: float
    gamma_total: float

    def __post_init__(self):
        parts = (self.gamma_lw, self.gamma_plus, self.gamma_minus, self.gamma_total)
        if any(not math.isfinite(x) or x < 0 for x in parts):
            raise ValidationError(f"{self.name}: surface tension components must be finite and >= 0")
        if abs(self.consistency_gap) > TOTAL_TOLERANCE:
            raise ValidationError(
                f"{self.name}: gamma_lw + 2 sqrt(gamma+ gamma-) = {self.composed_total:.3f} "
                f"differs from gamma_total = {self.gamma_total:.3f} by more than {TOTAL_TOLERANCE}"
            )

    @property
    def composed_total(self):
        """gamma_lw + 2 sqrt(gamma+ gamma-)."""
        return total_energy(self.gamma_lw, self.gamma_plus, self.gamma_minus)

    @property
    def consistency_gap(self):
        return self.composed_total - self.gamma_total


@dataclass(frozen=True)
class SurfaceEnergyResult:
    """Solid surface energy components (mJ/m^2) and the fit residual."""

    gamma_lw: float
    gamma_plus: float
    gamma_minus: float
    residual: float = 0.0
    relative_residual: float = 0.0
    warnings: tuple = ()

    @property
    def gamma_acid_base(self):
        return 2.0 * math.sqrt(self.gamma_plus * self.gamma_minus)

    @property
    def gamma_total(self):
        return total_energy(self.gamma_lw, self.gamma_plus, self.gamma_minus)


def total_energy(gamma_lw, gamma_plus, gamma_minus):
    """Total surface energy from its apolar and acid-base parts."""
    return gamma_lw + 2.0 * math.sqrt(gamma_plus * gamma_minus)


def load_liquids(path=None):
    """Read a liquids CSV; None loads the bundled standard probe liquids."""
    if path is None:
        text = resources.files("electroadhesion.data").joinpath("probe_liquids.csv").read_text(encoding="utf-8")
        source = "probe_liquids.csv"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    rows = _csv_rows(text, source, LIQUIDS_HEADER)
    liquids = []
    for lineno, parts in rows:
        try:
            vals = [float(p) for p in parts[1:]]
        except ValueError:
            raise ParseError("non-numeric surface tension value", source, lineno) from None
        try:
            liquids.append(ProbeLiquid(parts[0].strip(), *vals))
        except ValidationError as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
    return {liq.name: liq for liq in liquids}


def load_angles(path):
    """Read ``sample,liquid,theta_deg`` rows into {sample: {liquid: [angles]}}."""
    source = str(path)
    rows = _csv_rows(Path(path).read_text(encoding="utf-8"), source, ANGLES_HEADER)
    out: dict = {}
    for lineno, (sample, liquid, theta) in rows:
        try:
            value = float(theta)
        except ValueError:
            raise ParseError(f"non-numeric angle {theta!r}", source, lineno) from None
        out.setdefault(sample.strip(), {}).setdefault(liquid.strip(), []).append(value)
    return out


def _csv_rows(text, source, header):
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty file", source)
    hline, first = lines[0]
    cols = tuple(c.strip() for c in next(csv.reader([first])))
    if cols != header:
        raise ParseError(f"expected header {','.join(header)}, got {first.strip()}", source, hline)
    rows = []
    for lineno, ln in lines[1:]:
        parts = next(csv.reader([ln]))
        if len(parts) != len(header):
            raise ParseError(f"expected {len(header)} columns", source, lineno)
        rows.append((lineno, parts))
    return rows


def _system(liquids, angles_deg):
    a = np.array([[2 * math.sqrt(liq.gamma_lw), 2 * math.sqrt(liq.gamma_minus), 2 * math.sqrt(liq.gamma_plus)]
                  for liq in liquids])
    theta = np.radians(np.asarray(angles_deg, dtype=float))
    b = np.array([liq.gamma_total for liq in liquids]) * (1 + np.cos(theta))
    return a, b


def _mean_angle(value):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 0:
        raise ValidationError("empty angle list")
    return float(arr.mean())


def solve_components(liquids, angles_deg, per_replicate: bool = False):
    """Solid surface energy components from contact angles of >= 3 liquids.

    Parameters
    ----------
    liquids : sequence of ProbeLiquid
    angles_deg : sequence
        One entry per liquid: an angle or a list of replicate angles
        (averaged unless `per_replicate`).
    per_replicate : bool
        Solve once per replicate index instead; returns a list of results.

    Returns
    -------
    SurfaceEnergyResult or list of SurfaceEnergyResult
    """
    liquids = list(liquids)
    if len(liquids) != len(angles_deg):
        raise ValidationError("one angle entry per liquid is required")
    if len(liquids) < 3:
        raise IllPosedError("at least 3 probe liquids are needed")
    if per_replicate:
        reps = [np.atleast_1d(np.asarray(a, dtype=float)) for a in angles_deg]
        n = {r.size for r in reps}
        if len(n) != 1:
            raise ValidationError("per-replicate solves need the same number of replicates for every liquid")
        return [solve_components(liquids, [r[i] for r in reps]) for i in range(n.pop())]
    angles = [_mean_angle(a) for a in angles_deg]
    if any(not 0.0 < t < 180.0 for t in angles):
        raise ValidationError("contact angles must lie in (0, 180) degrees")
    a, b = _system(liquids, angles)
    if np.linalg.matrix_rank(a) < 3:
        raise IllPosedError("probe liquid components are linearly dependent (rank < 3)")
    x, resid = nnls(a, b)
    notes = []
    if all(t > 90.0 for t in angles):
        msg = "all contact angles are obtuse; components are poorly constrained"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    lw, plus, minus = x**2
    rel = resid / float(np.linalg.norm(b)) if np.any(b) else 0.0
    return SurfaceEnergyResult(float(lw), float(plus), float(minus), float(resid), rel, tuple(notes))


def forward_angles(liquids, surface: SurfaceEnergyResult):
    """Contact angles (degrees) a surface would show with each liquid."""
    out = []
    for liq in liquids:
        cos_t = adhesive_work_components(liq, surface) / liq.gamma_total - 1.0
        out.append(math.degrees(math.acos(min(1.0, max(-1.0, cos_t)))))
    return out


def adhesive_work(liquid: ProbeLiquid, theta_deg: float) -> float:
    """Work of adhesion gamma_L (1 + cos theta) (mJ/m^2)."""
    if not 0.0 <= theta_deg <= 180.0:
        raise ValidationError("contact angle must lie in [0, 180] degrees")
    return liquid.gamma_total * (1.0 + math.cos(math.radians(theta_deg)))


def adhesive_work_components(liquid: ProbeLiquid, surface: SurfaceEnergyResult) -> float:
    """Work of adhesion from the component interaction terms (mJ/m^2)."""
    return 2.0 * (math.sqrt(liquid.gamma_lw * surface.gamma_lw)
                  + math.sqrt(liquid.gamma_plus * surface.gamma_minus)
                  + math.sqrt(liquid.gamma_minus * surface.gamma_plus))


def hysteresis(advancing_deg: float, receding_deg: float) -> float:
    """Contact angle hysteresis (degrees); negative values are flagged, not rejected."""
    h = advancing_deg - receding_deg
    if h < 0:
        warnings.warn("receding angle exceeds advancing angle: check the measurement", RuntimeWarning,
                      stacklevel=2)
    return h

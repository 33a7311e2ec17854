"""Flat ``key = value`` run configuration for the force model.

Lines starting with ``#`` and trailing ``# ...`` comments are ignored.
Keys carry their unit as a suffix (``_m``, ``_pa``, ``_m2``, ``_v``,
``_hz``, ``_r`` for relative quantities); a recognized parameter written
with a different suffix is rejected rather than silently converted.
Permittivities are given relative to vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .electrostatics import LEAK_MODES, SWEEP_FREQUENCIES_HZ, LayerSet, SimulationConfig
from .errors import ConfigError
from .materials import AIR_REL_PERMITTIVITY, DielectricLayer, GapMedium, stratum_corneum
from .rough_contact import RoughnessSpec


@dataclass(frozen=True)
class RunConfig:
    """All model inputs; defaults are the nominal fingertip-on-screen values."""

    d1_m: float = 1e-6
    d2_m: float = 200e-6
    eps1_r: float = 3.9
    sigma1: float = 1e-13
    sigma_air: float = 1e-14
    eps_gap_r: float = AIR_REL_PERMITTIVITY
    Y1_pa: float = 70e9
    Y2_pa: float = 10e6
    nu1: float = 0.15
    nu2: float = 0.5
    h_rms_m: float = 22e-6
    hurst: float = 0.86
    q_l: float = 9e2
    q_0: float = 8e3
    q_1: float = 1e10
    p0_pa: float = 5e3
    a0_m2: float = 100e-6
    V0_v: float = 75.0
    frequencies_hz: tuple = SWEEP_FREQUENCIES_HZ
    sc_dispersion: str | None = None
    sc_clamp: bool = False
    cutoff_m: float = 10e-9
    damping: float = 0.5
    rel_tol: float = 1e-6
    max_iter: int = 200
    leakage: bool = True
    leak_mode: str = "reduction"
    gamma: float = 0.45
    points_per_decade: int = 400
    n_u: int = 600
    workers: int = 1

    def layers(self) -> LayerSet:
        insulator = DielectricLayer("SiO2", self.d1_m, self.eps1_r, self.sigma1, self.Y1_pa, self.nu1)
        skin = stratum_corneum(self.d2_m, self.Y2_pa, self.nu2, self.sc_dispersion, clamp=self.sc_clamp)
        return LayerSet(insulator, skin, GapMedium(self.eps_gap_r, self.sigma_air))

    def roughness(self) -> RoughnessSpec:
        return RoughnessSpec(self.h_rms_m, self.hurst, self.q_l, self.q_0, self.q_1)

    def simulation(self) -> SimulationConfig:
        return SimulationConfig(
            v0=self.V0_v, frequencies_hz=self.frequencies_hz, p0=self.p0_pa, a0=self.a0_m2,
            cutoff=self.cutoff_m, damping=self.damping, rel_tol=self.rel_tol, max_iter=self.max_iter,
            leakage=self.leakage, leak_mode=self.leak_mode, gamma=self.gamma,
            points_per_decade=self.points_per_decade, n_u=self.n_u,
        )


_FIELDS = {f.name: f for f in fields(RunConfig)}
_UNIT_SUFFIXES = ("m", "m2", "pa", "v", "hz", "r")


def _stem(key):
    head, _, tail = key.rpartition("_")
    return head if head and tail.lower() in _UNIT_SUFFIXES + ("mm", "um", "nm", "kpa", "mpa", "gpa", "mv", "khz",
                                                             "mm2", "cm2") else None


def _convert(key, raw, source, lineno):
    where = f"{source}:{lineno}: " if lineno else ""
    f = _FIELDS[key]
    default = f.default
    text = raw.strip()
    try:
        if key == "frequencies_hz":
            vals = tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
            if not vals:
                raise ValueError
            return vals
        if key == "sc_dispersion":
            if not text or text.lower() == "placeholder":
                return None
            p = Path(text)
            if not p.is_absolute() and source:
                p = Path(source).parent / p
            return str(p)
        if key == "leak_mode":
            if text not in LEAK_MODES:
                raise ValueError
            return text
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError
        if isinstance(default, int):
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}invalid value {text!r} for {key}") from None


def parse_config(text: str, source: str | None = None, base: RunConfig | None = None) -> RunConfig:
    """Parse configuration text, starting from `base` (defaults if None)."""
    values = {}
    label = source or "<config>"
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{label}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            stem = _stem(key)
            match = [k for k in _FIELDS if stem is not None and _stem(k) == stem]
            if match:
                raise ConfigError(f"{label}:{lineno}: unit suffix mismatch for {key} (expected {match[0]})")
            raise ConfigError(f"{label}:{lineno}: unknown key {key}")
        if key in values:
            raise ConfigError(f"{label}:{lineno}: duplicate key {key}")
        values[key] = _convert(key, raw, source, lineno)
    base = base or RunConfig()
    merged = {k: getattr(base, k) for k in _FIELDS}
    merged.update(values)
    return RunConfig(**merged)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return parse_config(text, str(path))


def render_config(cfg: RunConfig) -> str:
    """Config text that parses back to `cfg`."""
    lines = []
    for key in _FIELDS:
        v = getattr(cfg, key)
        if key == "frequencies_hz":
            v = ", ".join(repr(float(x)) for x in v)
        elif key == "sc_dispersion":
            v = v or "placeholder"
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"

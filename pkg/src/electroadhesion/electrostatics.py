"""Electrostatic pressure and force between a rough fingerpad and a screen.

The field in the air gap (charges evaluated at the mean gap, separation
dependence kept explicit) is squared in the Maxwell stress, averaged over
the rough-contact separation distribution, and fed back into the contact load
until the total pressure p = p0 + p_e is self-consistent.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .charges import ChargeState, InterfaceStack, gap_field, steady_state_charges
from .errors import ConvergenceError, DomainError, ElectroadhesionError
from .materials import EPS0, DielectricLayer, GapMedium, loss_tangent_at
from .rough_contact import (
    ElasticPair,
    RoughnessSpec,
    SeparationDistribution,
    characteristic_length,
    contact_conductivity,
    effective_conductivity,
    effective_modulus,
    separation_distribution,
)

log = logging.getLogger(__name__)

SWEEP_FREQUENCIES_HZ = (1.0, 10.0, 50.0, 100.0, 250.0, 500.0, 1e3, 1e4, 1e5, 1e6)
LEAK_MODES = ("reduction", "literal")
SENSITIVITY_PARAMS = ("d1", "d2", "eps1", "Y2")


@dataclass(frozen=True)
class SimulationConfig:
    """Drive, load and solver settings of a force computation.

    Parameters
    ----------
    v0 : float
        Voltage amplitude (V).
    frequencies_hz : tuple of float
    p0 : float
        Nominal finger pressure (Pa).
    a0 : float
        Apparent contact area (m^2).
    cutoff : float
        Separation below which the leakage term is not applied (m).
    damping : float
        Fixed-point relaxation factor in (0, 1].
    rel_tol : float
        Relative residual of the load balance at convergence.
    max_iter : int
    leakage : bool
        Include interface charges and leakage; False gives the no-leak field.
    leak_mode : {"reduction", "literal"}
        How the leakage field enters.  "reduction" lowers the magnitude of
        the gap field by |E_L| without reversing it; "literal" uses
        E_g - E_L as a signed difference.
    gamma : float
        Weight of the correction factor in the separation integral.
    points_per_decade, n_u : int
        Resolution of the separation distribution.
    """

    v0: float = 75.0
    frequencies_hz: tuple = SWEEP_FREQUENCIES_HZ
    p0: float = 5e3
    a0: float = 100e-6
    cutoff: float = 10e-9
    damping: float = 0.5
    rel_tol: float = 1e-6
    max_iter: int = 200
    leakage: bool = True
    leak_mode: str = "reduction"
    gamma: float = 0.45
    points_per_decade: int = 400
    n_u: int = 600

    def __post_init__(self):
        if self.v0 < 0:
            raise DomainError("V0 must be >= 0")
        if not self.p0 > 0:
            raise DomainError("p0 must be > 0")
        if not self.a0 > 0:
            raise DomainError("A0 must be > 0")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")
        if self.cutoff < 0:
            raise DomainError("cutoff must be >= 0")
        if self.leak_mode not in LEAK_MODES:
            raise DomainError(f"leak_mode must be one of {LEAK_MODES}")
        if any(f <= 0 for f in self.frequencies_hz):
            raise DomainError("frequencies must be > 0")
        object.__setattr__(self, "frequencies_hz", tuple(float(f) for f in self.frequencies_hz))

    def with_changes(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class LayerSet:
    """The touchscreen insulator, the air gap and the stratum corneum."""

    insulator: DielectricLayer
    skin: DielectricLayer
    gap: GapMedium = field(default_factory=GapMedium)

    def elastic_pair(self, freq_hz: float) -> ElasticPair:
        """Effective modulus and contact conductivity pair at `freq_hz`."""
        y = effective_modulus(self.insulator.elastic_modulus, self.insulator.poisson,
                              self.skin.elastic_modulus, self.skin.poisson)
        s = effective_conductivity(self.insulator.conductivity_at(freq_hz), self.skin.conductivity_at(freq_hz))
        return ElasticPair(y, s)


@dataclass(frozen=True)
class LoadState:
    """Electrostatic state of the contact at one total pressure."""

    pressure: float
    dist: SeparationDistribution
    pe: float
    charges: ChargeState
    j_leak: float
    alpha: float


@dataclass(frozen=True)
class LoadSolution:
    pressure: float
    dist: SeparationDistribution
    pe: float
    iterations: int
    history: tuple
    state: LoadState


@dataclass(frozen=True)
class ForceSweepPoint:
    """Force-model output at one stimulation frequency."""

    freq_hz: float
    pe_pa: float
    fe_n: float
    mean_sep_m: float
    area_ratio: float
    loss_tangent: float
    total_pressure_pa: float = math.nan
    iterations: int = 0
    rho1: float = 0.0
    rho2: float = 0.0
    j_leak: float = 0.0


@dataclass
class SweepResult:
    """Sweep points in input order plus any per-frequency failures."""

    points: list
    failures: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def fe(self):
        return np.array([pt.fe_n for pt in self.points])


def combine_fields(e_gap, e_leak, mode="reduction"):
    """Total gap field from the gap term and the leakage term.

    In "reduction" mode the leakage lowers the field magnitude and cannot
    reverse its direction: E = sign(E_g) max(|E_g| - |E_L|, 0).
    """
    e_gap = np.asarray(e_gap, dtype=float)
    e_leak = np.asarray(e_leak, dtype=float)
    if mode == "literal":
        return e_gap - e_leak
    if mode == "reduction":
        return np.sign(e_gap) * np.maximum(np.abs(e_gap) - np.abs(e_leak), 0.0)
    raise DomainError(f"unknown leak mode {mode!r}")


def electrostatic_pressure(dist: SeparationDistribution, e_gap, e_leak=None, cutoff: float = 10e-9,
                           mode: str = "reduction") -> float:
    """Ensemble-averaged Maxwell stress 1/2 eps0 <E_tot^2> (Pa).

    Parameters
    ----------
    dist : SeparationDistribution
    e_gap, e_leak : array_like or callable
        Field terms on ``dist.u`` (arrays) or as functions of separation.
        The leakage term only acts above `cutoff`.
    """
    u = dist.u

    def on_grid(x):
        if x is None:
            return np.zeros_like(u)
        vals = x(u) if callable(x) else np.asarray(x, dtype=float)
        return np.broadcast_to(vals, u.shape).astype(float)

    eg = on_grid(e_gap)
    el = np.where(u > cutoff, on_grid(e_leak), 0.0)
    e_tot = combine_fields(eg, el, mode)
    return 0.5 * EPS0 * dist.integrate(e_tot * e_tot)


def _relaxation(layer, freq_hz):
    sigma = layer.conductivity_at(freq_hz)
    return math.inf if sigma == 0 else layer.permittivity_at(freq_hz) / sigma


class FrequencyModel:
    """Electrostatic pressure as a function of total load at one frequency."""

    def __init__(self, cfg: SimulationConfig, spec: RoughnessSpec, layers: LayerSet, freq_hz: float,
                 pair: ElasticPair | None = None):
        self.cfg = cfg
        self.spec = spec
        self.layers = layers
        self.freq_hz = float(freq_hz)
        self.omega = 2 * math.pi * self.freq_hz
        self.pair = pair or layers.elastic_pair(self.freq_hz)
        self.length = characteristic_length(spec)
        self.tau1 = _relaxation(layers.insulator, self.freq_hz)
        self.tau2 = _relaxation(layers.skin, self.freq_hz)

    def stack(self, separation):
        return InterfaceStack.from_layers(self.layers.insulator, self.layers.gap, self.layers.skin,
                                          separation, self.cfg.v0, self.omega)

    def distribution(self, p):
        return separation_distribution(self.spec, self.pair, p, gamma=self.cfg.gamma,
                                       points_per_decade=self.cfg.points_per_decade, n_u=self.cfg.n_u)

    def evaluate(self, p: float) -> LoadState:
        dist = self.distribution(p)
        stack = self.stack(dist.mean_separation)
        alpha = contact_conductivity(self.pair, p, self.length)
        if self.cfg.leakage:
            rho = steady_state_charges(stack)
            if self.tau1 == self.tau2 or math.isinf(self.tau1) or math.isinf(self.tau2):
                j = 0.0
            else:
                j = rho.leakage_charge / (self.tau2 - self.tau1)
        else:
            rho, j = ChargeState(0.0, 0.0, math.inf), 0.0
        e_gap = gap_field(stack, rho, dist.u)
        e_leak = None
        if j != 0.0:
            if alpha <= 0:
                raise DomainError("leakage present but contact conductivity is zero")
            e_leak = j / (alpha * dist.u)
        pe = electrostatic_pressure(dist, e_gap, e_leak, self.cfg.cutoff, self.cfg.leak_mode)
        return LoadState(p, dist, pe, rho, j, alpha)


def self_consistent_load(cfg: SimulationConfig, evaluate) -> LoadSolution:
    """Damped fixed point of p = p0 + p_e(p).

    Parameters
    ----------
    evaluate : callable
        Maps a total pressure to a `LoadState` (for instance
        ``FrequencyModel.evaluate``).
    """
    p = cfg.p0
    history = []
    for k in range(1, cfg.max_iter + 1):
        state = evaluate(p)
        target = cfg.p0 + state.pe
        resid = abs(p - target) / p
        history.append((p, state.pe, resid))
        log.debug("load iteration %d: p=%.9g pe=%.9g resid=%.3g", k, p, state.pe, resid)
        if resid <= cfg.rel_tol:
            return LoadSolution(p, state.dist, state.pe, k, tuple(history), state)
        if not math.isfinite(target):
            break
        p = (1 - cfg.damping) * p + cfg.damping * target
    raise ConvergenceError(f"load fixed point did not converge in {cfg.max_iter} iterations",
                           {"history": history})


def evaluate_frequency(cfg: SimulationConfig, spec: RoughnessSpec, layers: LayerSet, freq_hz: float,
                       pair: ElasticPair | None = None) -> ForceSweepPoint:
    """Self-consistent force at one frequency."""
    model = FrequencyModel(cfg, spec, layers, freq_hz, pair)
    sol = self_consistent_load(cfg, model.evaluate)
    area = sol.dist.area_ratio
    return ForceSweepPoint(
        freq_hz=model.freq_hz,
        pe_pa=sol.pe,
        fe_n=sol.pe * area * cfg.a0,
        mean_sep_m=sol.dist.mean_separation,
        area_ratio=area,
        loss_tangent=loss_tangent_at(layers.skin, model.omega),
        total_pressure_pa=sol.pressure,
        iterations=sol.iterations,
        rho1=sol.state.charges.rho1,
        rho2=sol.state.charges.rho2,
        j_leak=sol.state.j_leak,
    )


def force_sweep(cfg: SimulationConfig, spec: RoughnessSpec, layers: LayerSet,
                max_workers: int = 1) -> SweepResult:
    """Evaluate the force model on every frequency of `cfg`.

    Failures are collected per frequency; successful points are kept in
    input order.
    """

    def run(f):
        try:
            return f, evaluate_frequency(cfg, spec, layers, f), None
        except ElectroadhesionError as exc:
            return f, None, exc

    freqs = cfg.frequencies_hz
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, freqs))
    else:
        results = [run(f) for f in freqs]
    out = SweepResult([])
    for f, pt, err in results:
        if err is None:
            out.points.append(pt)
        else:
            out.failures[f] = f"{f:g} Hz: {type(err).__name__}: {err}"
    return out


def perturb_layers(layers: LayerSet, param: str, delta: float) -> LayerSet:
    """Scale one model parameter by (1 + delta)."""
    if not delta > -1:
        raise DomainError("fractional delta must be > -1")
    k = 1.0 + delta
    ins, skin = layers.insulator, layers.skin
    if param == "d1":
        ins = ins.with_changes(thickness=ins.thickness * k)
    elif param == "d2":
        skin = skin.with_changes(thickness=skin.thickness * k)
    elif param == "eps1":
        eps = ins.rel_permittivity
        ins = ins.with_changes(rel_permittivity=eps.scaled(k) if hasattr(eps, "scaled") else eps * k)
    elif param == "Y2":
        skin = skin.with_changes(elastic_modulus=skin.elastic_modulus * k)
    else:
        raise DomainError(f"unknown sensitivity parameter {param!r}; expected one of {SENSITIVITY_PARAMS}")
    return LayerSet(ins, skin, layers.gap)


@dataclass(frozen=True)
class SensitivityResult:
    param: str
    delta: float
    freq_hz: np.ndarray
    base_fe: np.ndarray
    perturbed_fe: np.ndarray
    percent: np.ndarray
    undefined: np.ndarray


def sensitivity_analysis(cfg: SimulationConfig, spec: RoughnessSpec, layers: LayerSet, param: str,
                         delta: float, base: SweepResult | None = None, max_workers: int = 1) -> SensitivityResult:
    """Relative change (%) of the force per frequency after perturbing `param`.

    Frequencies where the base force is zero are flagged in `undefined` and
    carry NaN.
    """
    pert_layers = perturb_layers(layers, param, delta)
    if base is None:
        base = force_sweep(cfg, spec, layers, max_workers)
    pert = force_sweep(cfg, spec, pert_layers, max_workers) if delta != 0 else base
    for res in (base, pert):
        if not res.ok:
            raise ElectroadhesionError("; ".join(res.failures.values()))
    f = np.array([pt.freq_hz for pt in base.points])
    fb = base.fe()
    fp = pert.fe()
    undefined = fb == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        pct = np.where(undefined, np.nan, 100.0 * (fp - fb) / np.where(undefined, 1.0, fb))
    return SensitivityResult(param, delta, f, fb, fp, pct, undefined)


def friction_inferred_force(mu_off, mu_on, fn):
    """Electrostatic force inferred from friction coefficients: (1 - mu_off/mu_on) Fn.

    A negative result (mu_on < mu_off) is returned unclamped with a warning.
    """
    mu_off = np.asarray(mu_off, dtype=float)
    mu_on = np.asarray(mu_on, dtype=float)
    fn = np.asarray(fn, dtype=float)
    if np.any(mu_on == 0):
        raise DomainError("mu_on must be nonzero")
    if np.any(mu_on < 0) or np.any(fn < 0):
        raise DomainError("mu_on must be > 0 and Fn >= 0")
    # (mu_on - mu_off) / mu_on keeps equal coefficients at exactly zero
    fe = (mu_on - mu_off) / mu_on * fn
    if np.any(fe < 0):
        warnings.warn("negative inferred electrostatic force (mu_on < mu_off)", RuntimeWarning, stacklevel=2)
    return float(fe) if fe.ndim == 0 else fe

"""Interface charge dynamics of the SiO2 / air / stratum corneum stack.

The two interface charge densities obey

    -d rho1/dt = a rho1 + b rho2 + c V(t)
    -d rho2/dt = d rho1 + e rho2 + f V(t)

with coefficients fixed by thicknesses, absolute permittivities and
conductivities of the three media and the gap separation u.  Closed forms
exist for DC (steady state) and for V(t) = V0 cos(wt); a numerical
integrator is provided as an independent check of both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DegenerateStackError, DomainError, SingularSystemError
from .materials import DielectricLayer, GapMedium


@dataclass(frozen=True)
class InterfaceStack:
    """Scalar electrical description of the stack at one frequency.

    Permittivities are absolute (F/m).  ``omega = 0`` encodes DC.
    """

    d1: float
    eps1: float
    sigma1: float
    eps_g: float
    sigma_g: float
    separation: float
    d2: float
    eps2: float
    sigma2: float
    v0: float
    omega: float = 0.0

    def __post_init__(self):
        if not self.separation > 0:
            raise DomainError("gap separation must be > 0")
        if self.v0 < 0:
            raise DomainError("voltage amplitude must be >= 0")
        if self.omega < 0:
            raise DomainError("angular frequency must be >= 0")

    @classmethod
    def from_layers(cls, layer1: DielectricLayer, gap: GapMedium, layer2: DielectricLayer,
                    separation: float, v0: float, omega: float = 0.0):
        """Evaluate layer properties at `omega`.

        For DC, tabulated properties are read at the lowest tabulated frequency.
        """
        f = omega / (2 * math.pi) if omega > 0 else None

        def at(layer):
            if f is None:
                probe = _lowest_frequency(layer)
            else:
                probe = f
            return layer.permittivity_at(probe), layer.conductivity_at(probe)

        e1, s1 = at(layer1)
        e2, s2 = at(layer2)
        return cls(layer1.thickness, e1, s1, gap.permittivity, gap.conductivity, separation,
                   layer2.thickness, e2, s2, v0, omega)

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return InterfaceStack(**values)

    @property
    def effective_thickness(self):
        """h0 = d1/eps1 + d2/eps2 (m per F/m)."""
        return self.d1 / self.eps1 + self.d2 / self.eps2

    @property
    def tau1(self):
        return relaxation(self.eps1, self.sigma1)

    @property
    def tau2(self):
        return relaxation(self.eps2, self.sigma2)


def _lowest_frequency(layer):
    for prop in (layer.rel_permittivity, layer.conductivity):
        if hasattr(prop, "freq_hz"):
            return float(prop.freq_hz[0])
    return 1.0


def relaxation(eps, sigma):
    if sigma == 0:
        raise DomainError("zero conductivity gives an infinite relaxation time")
    return eps / sigma


@dataclass(frozen=True)
class ChargeCoefficients:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.d, self.e]])


@dataclass(frozen=True)
class ChargeState:
    """Surface charge densities (C/m^2) at time `t` (inf for steady state)."""

    rho1: float
    rho2: float
    t: float = 0.0

    @property
    def leakage_charge(self):
        return self.rho2 - self.rho1

    def scaled(self, k):
        return ChargeState(self.rho1 * k, self.rho2 * k, self.t)


def coefficients(stack: InterfaceStack) -> ChargeCoefficients:
    """Coefficients a..f of the coupled interface-charge equations."""
    s = stack
    gap_side = s.separation / s.eps_g + s.d2 / s.eps2
    den1 = s.d1 + s.eps1 * gap_side
    den_g = s.separation + s.eps_g * (s.d1 / s.eps1 + s.d2 / s.eps2)
    den2 = s.d2 + s.eps2 * (s.d1 / s.eps1 + s.separation / s.eps_g)
    if den1 == 0 or den_g == 0 or den2 == 0:
        raise DegenerateStackError("a field denominator vanishes for this stack")
    h1 = s.d1 / s.eps1
    h2 = s.d2 / s.eps2
    a = s.sigma1 * gap_side / den1 + s.sigma_g * h1 / den_g
    b = s.sigma1 * h2 / den1 - s.sigma_g * h2 / den_g
    c = -s.sigma1 / den1 + s.sigma_g / den_g
    d = s.sigma2 * h1 / den2 - s.sigma_g * h1 / den_g
    e = s.sigma2 * (h1 + s.separation / s.eps_g) / den2 + s.sigma_g * h2 / den_g
    f = s.sigma2 / den2 - s.sigma_g / den_g
    return ChargeCoefficients(a, b, c, d, e, f)


def steady_state_dc(stack: InterfaceStack) -> ChargeState:
    """Charges after all transients of a DC step V0 have decayed."""
    k = coefficients(stack)
    det = k.a * k.e - k.b * k.d
    if det == 0:
        raise SingularSystemError("ae - bd = 0: no unique DC steady state")
    v = stack.v0
    rho1 = -(k.c * k.e - k.b * k.f) * v / det
    rho2 = -(k.a * k.f - k.c * k.d) * v / det
    return ChargeState(rho1, rho2, math.inf)


@dataclass(frozen=True)
class AcResponse:
    """Closed-form response coefficients to V(t) = V0 cos(wt), per volt."""

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    eta: float
    kappa: float
    lam: float
    delta: float
    theta_sq: float
    psi: float
    decay: float  # (a + e) / 2


def ac_response(k: ChargeCoefficients, omega: float) -> AcResponse:
    """Coefficient set of the cosine-drive solution, as printed for the model."""
    a, b, c, d, e, f = k.a, k.b, k.c, k.d, k.e, k.f
    w2 = omega * omega
    psi = w2 * w2 + (a * a + e * e + 2 * b * d) * w2 + (a * e - b * d) ** 2
    if psi == 0:
        raise SingularSystemError("psi = 0: resonant degeneracy of the AC solution")
    n1 = (a * c + b * f) * w2 + a * c * e * e + b * b * d * f - a * b * e * f - b * c * d * e
    n2 = (c * d + e * f) * w2 + b * c * d * d + a * a * e * f - a * b * d * f - a * c * d * e
    alpha1 = -n1 / psi
    alpha2 = -(c * omega**3 + (c * e * e - a * b * f + b * c * d - b * e * f) * omega) / psi
    beta1 = -n2 / psi
    beta2 = -(f * omega**3 + (f * a * a - a * c * d + b * d * f - c * d * e) * omega) / psi
    eta = n1 / psi
    kappa = n2 / psi
    lam = ((c * a * e - c * b * d) * w2 + c * a * e**3 - c * b * d * e * e - f * a * b * e * e
           - f * b * e * a * a + f * a * d * b * b + c * a * b * d * e - c * b * b * d * d
           + f * d * e * b * b) / psi
    delta = ((f * a * e - f * b * d) * w2 + f * e * a**3 - f * b * d * a * a - c * d * e * a * a
             - c * a * d * e * e + c * a * b * d * d + f * a * b * d * e - f * b * b * d * d
             + c * b * e * d * d) / psi
    theta_sq = ((a - e) / 2) ** 2 + b * d
    return AcResponse(alpha1, alpha2, beta1, beta2, eta, kappa, lam, delta, theta_sq, psi, (a + e) / 2)


def _homogeneous_parts(theta_sq, decay, t):
    """exp(-decay t) cosh(theta t) and exp(-decay t) sinh(theta t)/theta.

    Real theta uses combined exponents (no overflow), negative theta^2 the
    trigonometric form, and small |theta^2 t^2| a series in theta^2 shared by
    both branches.
    """
    t = np.asarray(t, dtype=float)
    z = theta_sq * t * t
    damp = np.exp(-decay * t)
    small = np.abs(z) < 1e-4
    # series: cosh = 1 + z/2 + z^2/24 + z^3/720 ; sinh/theta = t (1 + z/6 + z^2/120 + z^3/5040)
    c_ser = damp * (1 + z / 2 + z * z / 24 + z**3 / 720)
    s_ser = damp * t * (1 + z / 6 + z * z / 120 + z**3 / 5040)
    if theta_sq > 0:
        th = math.sqrt(theta_sq)
        ep = np.exp((th - decay) * t)
        em = np.exp(-(th + decay) * t)
        c_full = 0.5 * (ep + em)
        s_full = 0.5 * (ep - em) / th
    elif theta_sq < 0:
        ph = math.sqrt(-theta_sq)
        c_full = damp * np.cos(ph * t)
        s_full = damp * np.sin(ph * t) / ph
    else:
        c_full, s_full = c_ser, s_ser
    return np.where(small, c_ser, c_full), np.where(small, s_ser, s_full)


def transient_ac_analytic(stack: InterfaceStack, t):
    """Closed-form charges for V(t) = V0 cos(wt) starting from neutral interfaces.

    Returns
    -------
    (ndarray, ndarray)
        rho1(t), rho2(t) in C/m^2, same shape as `t`.
    """
    if stack.omega <= 0:
        raise DomainError("AC solution needs omega > 0")
    r = ac_response(coefficients(stack), stack.omega)
    t = np.asarray(t, dtype=float)
    ch, sh = _homogeneous_parts(r.theta_sq, r.decay, t)
    wt = stack.omega * t
    cos, sin = np.cos(wt), np.sin(wt)
    rho1 = r.alpha1 * cos + r.alpha2 * sin + r.eta * ch + (r.lam - r.eta * r.decay) * sh
    rho2 = r.beta1 * cos + r.beta2 * sin + r.kappa * ch + (r.delta - r.kappa * r.decay) * sh
    return stack.v0 * rho1, stack.v0 * rho2


def steady_state_ac_envelope(stack: InterfaceStack):
    """Amplitudes (|rho1|, |rho2|) of the sinusoidal steady state (C/m^2)."""
    if stack.omega <= 0:
        raise DomainError("AC envelope needs omega > 0")
    r = ac_response(coefficients(stack), stack.omega)
    return stack.v0 * math.hypot(r.alpha1, r.alpha2), stack.v0 * math.hypot(r.beta1, r.beta2)


def steady_state_charges(stack: InterfaceStack) -> ChargeState:
    """Signed steady-state charges used by the force model.

    DC returns the steady state of the step response.  AC returns the
    envelope amplitudes carrying the sign of each charge's in-phase
    component, so the result tends continuously to the DC values as w -> 0.
    """
    if stack.omega == 0:
        return steady_state_dc(stack)
    r = ac_response(coefficients(stack), stack.omega)
    amp1 = stack.v0 * math.hypot(r.alpha1, r.alpha2)
    amp2 = stack.v0 * math.hypot(r.beta1, r.beta2)
    return ChargeState(math.copysign(amp1, r.alpha1), math.copysign(amp2, r.beta1), math.inf)


def integrate_charges_numeric(stack: InterfaceStack, t_end: float, dt: float | None = None,
                              rtol: float = 1e-10, atol: float | None = None):
    """Integrate the charge equations from neutral interfaces.

    Uses an explicit adaptive Runge-Kutta scheme (DOP853) and reports the
    solution every `dt` seconds.

    Returns
    -------
    (ndarray, ndarray, ndarray)
        Times, rho1 and rho2.
    """
    k = coefficients(stack)
    rate = max(abs(k.a), abs(k.e), stack.omega, 1e-300)
    if dt is None:
        dt = min(0.1 / rate, t_end / 1000.0)
    if dt <= 0 or t_end <= 0:
        raise DomainError("t_end and dt must be > 0")
    m = k.matrix
    drive = np.array([k.c, k.f])
    v0, w = stack.v0, stack.omega

    def rhs(t, y):
        v = v0 * math.cos(w * t) if w > 0 else v0
        return -(m @ y) - drive * v

    n = int(math.floor(t_end / dt + 1e-9)) + 1
    t_eval = np.linspace(0.0, (n - 1) * dt, n)
    if atol is None:
        scale = abs(v0) * (abs(k.c) + abs(k.f)) / rate if v0 else 1.0
        atol = max(rtol * scale * 1e-3, 1e-300)
    sol = solve_ivp(rhs, (0.0, t_eval[-1]), [0.0, 0.0], method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol, max_step=np.inf if w == 0 else 0.5 / w)
    if not sol.success:
        raise ConvergenceError(f"charge integration failed: {sol.message}",
                               {"t_reached": float(sol.t[-1]) if sol.t.size else 0.0})
    return sol.t, sol.y[0], sol.y[1]


@dataclass(frozen=True)
class GapFieldBreakdown:
    """Gap field terms (V/m) and leakage current density (A/m^2)."""

    e_gap: float
    e_leak: float
    e_total: float
    j_leak: float


def leakage_current(rho: ChargeState, tau1: float, tau2: float) -> float:
    """J_L = (rho2 - rho1) / (tau2 - tau1)."""
    if tau2 == tau1:
        raise DomainError("equal relaxation times: no interfacial charging (caller treats J_L = 0)")
    return rho.leakage_charge / (tau2 - tau1)


def leakage_field(stack: InterfaceStack, rho: ChargeState, alpha: float, tau1: float, tau2: float):
    """Leakage current density and the gap-field reduction it causes.

    Returns
    -------
    (float, float)
        J_L (A/m^2) and E_L = J_L / (alpha u) (V/m).
    """
    if alpha <= 0:
        raise DomainError("contact conductivity must be > 0")
    j = leakage_current(rho, tau1, tau2)
    return j, j / (alpha * stack.separation)


def gap_field(stack: InterfaceStack, rho: ChargeState, separation=None):
    """Gap field including the interface-charge terms, at `separation` (scalar or array)."""
    u = stack.separation if separation is None else np.asarray(separation, dtype=float)
    num = stack.v0 + stack.d1 / stack.eps1 * rho.rho1 - stack.d2 / stack.eps2 * rho.rho2
    return num / (u + stack.eps_g * stack.effective_thickness)


def total_gap_field(stack: InterfaceStack, rho: ChargeState, j_leak: float = 0.0,
                    alpha: float | None = None) -> GapFieldBreakdown:
    """E_tot = E_g - E_L at the stack separation.

    With zero charges and zero leakage this is V / (u + eps_g h0).
    """
    e_g = gap_field(stack, rho)
    if j_leak == 0:
        e_l = 0.0
    else:
        if alpha is None or alpha <= 0:
            raise DomainError("a positive contact conductivity is needed when J_L != 0")
        e_l = j_leak / (alpha * stack.separation)
    return GapFieldBreakdown(float(e_g), float(e_l), float(e_g - e_l), float(j_leak))

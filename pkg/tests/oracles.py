"""Independent reference computations used by the tests.

Each function re-derives a quantity by a route that shares no code with the
package: direct transcription, phasor algebra, closed forms or brute-force
quadrature.
"""

import math

import numpy as np
from scipy import integrate, special

EPS0 = 8.8541878128e-12


def coefficients_transcribed(d1, e1, s1, eg, sg, u, d2, e2, s2):
    """a..f written out term by term from the continuity equations."""
    D1 = d1 + e1 * (u / eg + d2 / e2)
    Dg = u + eg * (d1 / e1 + d2 / e2)
    D2 = d2 + e2 * (d1 / e1 + u / eg)
    a = (s1 / D1) * (u / eg + d2 / e2) + (sg / Dg) * (d1 / e1)
    b = (s1 / D1) * (d2 / e2) - (sg / Dg) * (d2 / e2)
    c = -(s1 / D1) + (sg / Dg)
    d = (s2 / D2) * (d1 / e1) - (sg / Dg) * (d1 / e1)
    e = (s2 / D2) * (d1 / e1 + u / eg) + (sg / Dg) * (d2 / e2)
    f = (s2 / D2) - (sg / Dg)
    return a, b, c, d, e, f


def phasor_steady_state(coeffs, omega):
    """Complex amplitudes R with rho(t) = Re(R V0 e^{jwt}) per volt."""
    a, b, c, d, e, f = coeffs
    m = np.array([[a, b], [d, e]], dtype=complex)
    return -np.linalg.solve(1j * omega * np.eye(2) + m, np.array([c, f], dtype=complex))


def matrix_exponential_response(coeffs, v0, omega, t):
    """Exact solution from zero state via eigen-decomposition (phasor + homogeneous)."""
    a, b, c, d, e, f = coeffs
    m = np.array([[a, b], [d, e]], dtype=float)
    r = phasor_steady_state(coeffs, omega) * v0
    p0 = r.real  # particular solution at t = 0
    lam, vec = np.linalg.eig(-m)
    coef = np.linalg.solve(vec, -p0)
    t = np.asarray(t, dtype=float)
    hom = (vec @ (coef[:, None] * np.exp(np.outer(lam, t)))).real
    part = np.real(np.outer(r, np.exp(1j * omega * t)))
    return part + hom


def g_closed_form(h_rms, hurst, q0, modulus, zeta):
    """(pi/4) Y*^2 int_{q0}^{zeta q0} q^3 C(q) dq for the pure power law."""
    c0 = hurst * h_rms**2 / (math.pi * q0**2)
    k = 2 - 2 * hurst
    return math.pi / 4 * modulus**2 * c0 * q0**4 * (zeta**k - 1) / k


def r_of_h_closed(hurst):
    """H/(2(1-H)) * B(1/2, k - 1/2) with k = 1/(2(1-H))."""
    k = 1 / (2 * (1 - hurst))
    return hurst / (2 * (1 - hurst)) * special.beta(0.5, k - 0.5)


def r_of_h_quad(hurst):
    k = 1 / (2 * (1 - hurst))
    val, _ = integrate.quad(lambda x: (x - 1) ** -0.5 * x**-k, 1, np.inf, limit=200)
    return hurst / (2 * (1 - hurst)) * val


def acid_base_rhs(liq, lw, plus, minus):
    return 2 * (math.sqrt(liq.gamma_lw * lw) + math.sqrt(liq.gamma_minus * plus) + math.sqrt(liq.gamma_plus * minus))


def random_stacks(n, seed=0):
    """Physical stacks with bounded stiffness, for analytic-vs-numeric checks.

    Ranges: insulator 0.5-2 um, eps_r 2-10; gap 1-50 um; skin layer
    50-400 um, eps_r 10-1000; the skin relaxes 1-100x faster than the
    insulator; the drive frequency sits within a decade of the fast rate.
    """
    from electroadhesion.charges import InterfaceStack, coefficients

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        d1 = rng.uniform(0.5e-6, 2e-6)
        e1 = EPS0 * rng.uniform(2, 10)
        s1 = 10 ** rng.uniform(-12, -10)
        u = rng.uniform(1e-6, 50e-6)
        eg = EPS0 * 1.00059
        sg = 10 ** rng.uniform(-15, -13)
        d2 = rng.uniform(50e-6, 400e-6)
        e2 = EPS0 * 10 ** rng.uniform(1, 3)
        s2 = s1 * (e2 / e1) * 10 ** rng.uniform(0, 2)
        v0 = rng.uniform(10, 300)
        stack = InterfaceStack(d1, e1, s1, eg, sg, u, d2, e2, s2, v0, 1.0)
        k = coefficients(stack)
        lam = np.abs(np.linalg.eigvals(k.matrix))
        if lam.max() / lam.min() > 300:
            continue
        omega = lam.max() * 10 ** rng.uniform(-1, 1)
        out.append(stack.replace(omega=omega))
    return out

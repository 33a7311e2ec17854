"""Multi-scale contact mechanics of a self-affine rough fingerpad on a flat screen.

Implements the power spectrum, the stress variance G(zeta), the real contact
area, the distribution of interfacial separations P(u), and the electrical
contact conductivity.  Integrals over wavevector use the trapezoid rule on
logarithmic grids (integrating ``q * f(q)`` against ``ln q``).

Magnification is handled through ``t = zeta - 1`` so that the region just
above zeta = 1, where the contact area drops from one, can be resolved to
well below double-precision spacing of zeta itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError, ValidationError

DEFAULT_GAMMA = 0.45
# the inner p' integral stops where exp(-x^2) has dropped by this factor
INNER_TRUNCATION = 1e-12


@dataclass(frozen=True)
class RoughnessSpec:
    """Self-affine roughness of the fingerpad.

    Parameters
    ----------
    h_rms : float
        RMS roughness amplitude (m).
    hurst : float
        Hurst exponent H, 0 < H < 1.
    q_l, q_0, q_1 : float
        Smallest wavevector, roll-off wavevector and short-distance cut-off (1/m).
    rolloff : bool
        Hold C(q) at C(q_0) for q_L <= q < q_0 instead of rejecting such q.
    """

    h_rms: float
    hurst: float
    q_l: float
    q_0: float
    q_1: float
    rolloff: bool = True

    def __post_init__(self):
        if not self.h_rms > 0:
            raise ValidationError("h_rms must be > 0")
        if not 0 < self.hurst < 1:
            raise ValidationError("Hurst exponent must lie in (0, 1)")
        if not 0 < self.q_l <= self.q_0 < self.q_1:
            raise ValidationError("wavevectors must satisfy 0 < q_L <= q_0 < q_1")

    @property
    def zeta_max(self):
        return self.q_1 / self.q_0

    @property
    def c0(self):
        """Spectrum value at the roll-off wavevector (m^4)."""
        return self.hurst * self.h_rms**2 / (math.pi * self.q_0**2)


@dataclass(frozen=True)
class ElasticPair:
    """Effective contact modulus Y* (Pa) and conductivity sigma* (S/m)."""

    modulus: float
    conductivity: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise ValidationError("effective modulus must be > 0")
        if not self.conductivity > 0:
            raise ValidationError("effective conductivity must be > 0")


def effective_modulus(y1, nu1, y2, nu2):
    """Combined plane-strain modulus of two elastic solids."""
    return 1.0 / ((1 - nu1**2) / y1 + (1 - nu2**2) / y2)


def effective_conductivity(sigma1, sigma2):
    """Series combination of two conductivities."""
    return 1.0 / (1.0 / sigma1 + 1.0 / sigma2)


def power_spectrum(spec: RoughnessSpec, q):
    """Isotropic roughness power spectrum C(q) in m^4.

    Zero above q_1 and below q_L.  Between q_L and q_0 the roll-off plateau
    C(q_0) is used when ``spec.rolloff`` is set; otherwise such q raise.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise DomainError("wavevector must be > 0")
    if not spec.rolloff and np.any(q < spec.q_0):
        raise DomainError("q < q_0 and the roll-off plateau is disabled")
    ratio = np.maximum(q, spec.q_0) / spec.q_0
    c = spec.c0 * ratio ** (-2.0 * (1.0 + spec.hurst))
    c = np.where((q < spec.q_l * (1 - 1e-12)) | (q > spec.q_1 * (1 + 1e-12)), 0.0, c)
    return c if c.ndim else float(c)


def _log_nodes(span, points_per_decade):
    """Nodes of ln(zeta) from 0 to `span` with the requested density."""
    n = max(2, int(math.ceil(span / math.log(10) * points_per_decade)) + 1)
    return np.linspace(0.0, span, n)


def _check_zeta(spec, zeta):
    if zeta < 1:
        raise DomainError("magnification must be >= 1")
    if zeta > spec.zeta_max * (1 + 1e-12):
        raise DomainError("magnification beyond q_1 / q_0")


def _g_prefactor(pair):
    return math.pi / 4.0 * pair.modulus**2


def _moment3(spec, ln_zeta):
    """Cumulative int_{q0}^{q} q'^3 C(q') dq' on nodes of ln(q/q0)."""
    q = spec.q_0 * np.exp(ln_zeta)
    f = q**4 * power_spectrum(spec, q)
    return integrate.cumulative_trapezoid(f, ln_zeta, initial=0.0)


def magnification_variance(spec: RoughnessSpec, pair: ElasticPair, zeta: float,
                           points_per_decade: int = 400, rel_tol: float = 1e-4,
                           max_refinements: int = 4) -> float:
    """Stress variance G(zeta) = (pi/4) Y*^2 int_{q0}^{zeta q0} q^3 C(q) dq.

    The quadrature is repeated on a grid twice as dense; if the two disagree
    by more than `rel_tol` the grid keeps doubling up to `max_refinements`
    times before `ConvergenceError` is raised.
    """
    _check_zeta(spec, zeta)
    if zeta == 1:
        return 0.0
    span = math.log(zeta)
    history = []
    ppd = points_per_decade
    coarse = _g_prefactor(pair) * _moment3(spec, _log_nodes(span, ppd))[-1]
    for _ in range(max_refinements):
        ppd *= 2
        fine = _g_prefactor(pair) * _moment3(spec, _log_nodes(span, ppd))[-1]
        history.append((ppd, fine))
        if abs(fine - coarse) <= rel_tol * abs(fine):
            return float(fine)
        coarse = fine
    raise ConvergenceError("G(zeta) quadrature did not converge", {"history": history})


def area_ratio(spec: RoughnessSpec, pair: ElasticPair, p: float, zeta: float, **kwargs) -> float:
    """Fraction of the nominal area in contact at magnification `zeta`."""
    if p < 0:
        raise DomainError("pressure must be >= 0")
    g = magnification_variance(spec, pair, zeta, **kwargs)
    return _area_from_g(p, g)


def _area_from_g(p, g):
    p = np.asarray(p, dtype=float)
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = special.erf(p / (2.0 * np.sqrt(g)))
    a = np.where(g == 0, np.where(p > 0, 1.0, 0.0), a)
    return a if a.ndim else float(a)


def roughness_factor(hurst: float) -> float:
    """r(H) = H/(2(1-H)) int_1^inf (x-1)^(-1/2) x^(-1/(2(1-H))) dx.

    Evaluated by adaptive quadrature after substituting x = 1 + s^2, which
    removes the endpoint singularity.
    """
    if not 0 < hurst < 1:
        raise DomainError("Hurst exponent must lie in (0, 1)")
    k = 1.0 / (2.0 * (1.0 - hurst))
    integral, abserr = integrate.quad(lambda s: 2.0 * (1.0 + s * s) ** (-k), 0.0, np.inf,
                                      epsabs=0.0, epsrel=1e-11, limit=500)
    if not np.isfinite(integral) or abserr > 1e-7 * abs(integral):
        raise DomainError(f"r(H) integral does not converge for H = {hurst}")
    return hurst / (2.0 * (1.0 - hurst)) * integral


def characteristic_length(spec: RoughnessSpec) -> float:
    """Length L0 (m) entering the contact conductivity of a self-affine surface."""
    h = spec.hurst
    pref = math.sqrt(2.0 * (1.0 - h) / (math.pi * h)) * spec.h_rms
    return pref * (roughness_factor(h) - (spec.q_0 / spec.q_1) ** h)


def contact_conductivity(pair: ElasticPair, p: float, length: float) -> float:
    """Electrical contact conductivity alpha = 2 sigma* p / (Y* L0)."""
    if length <= 0:
        raise DomainError("characteristic length must be > 0")
    if p < 0:
        raise DomainError("pressure must be >= 0")
    return 2.0 * pair.conductivity * p / (pair.modulus * length)


# --- separation distribution -------------------------------------------------


class _InnerIntegral:
    """I(x0) = int_{x0}^{X} dx/x [g + 3(1-g) erf(x)^2] exp(-x^2).

    X is where exp(-x^2) has fallen to INNER_TRUNCATION of exp(-x0^2).
    Tabulated once on a dense ln(x) grid and interpolated; below the table
    the integrand tends to g/x so I continues with slope -g in ln(x).

    Also tabulates the antiderivative M(y) = int_0^y I(1/s) ds used for the
    first wavevector cell, where I rises from zero.
    """

    LN_X_MIN = math.log(1e-12)
    LN_X_MAX = math.log(7.0)

    def __init__(self, gamma, n=40001):
        self.gamma = gamma
        ln_t = np.linspace(self.LN_X_MIN - 1.0, math.log(12.0), 2 * n)
        t = np.exp(ln_t)
        g = (gamma + 3.0 * (1.0 - gamma) * special.erf(t) ** 2) * np.exp(-t * t)
        # K(x) = int_x^inf g(t)/t dt = int g d(ln t)
        tail = integrate.cumulative_simpson(g[::-1], x=-ln_t[::-1], initial=0.0)[::-1]
        self._ln_t, self._tail = ln_t, tail
        self.ln_x = np.linspace(self.LN_X_MIN, self.LN_X_MAX, n)
        x = np.exp(self.ln_x)
        upper = np.sqrt(x * x - math.log(INNER_TRUNCATION))
        self.values = self._k(self.ln_x) - self._k(np.log(upper))
        # M(y) on ln y = -ln x; I(1/s) ds = I(1/s) s d(ln s)
        ln_y = -self.ln_x[::-1]
        integrand = self.values[::-1] * np.exp(ln_y)
        self.ln_y = ln_y
        self.m_values = integrate.cumulative_simpson(integrand, x=ln_y, initial=0.0)

    def _k(self, ln_x):
        return np.interp(ln_x, self._ln_t, self._tail, right=0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = (x > 0) & np.isfinite(x)
        ln_x = np.log(np.where(pos, x, 1.0))
        vals = np.interp(ln_x, self.ln_x, self.values, right=0.0)
        below = ln_x < self.LN_X_MIN
        vals = np.where(below, self.values[0] - self.gamma * (ln_x - self.LN_X_MIN), vals)
        out[pos] = vals[pos]
        return out

    def antiderivative(self, y):
        """M(y) = int_0^y I(1/s) ds."""
        y = np.asarray(y, dtype=float)
        ln_y = np.log(np.maximum(y, 1e-300))
        out = np.interp(ln_y, self.ln_y, self.m_values, left=0.0)
        y_top = math.exp(self.ln_y[-1])
        above = y > y_top
        if np.any(above):
            i_top = self.values[0]
            ya = y[above]
            out[above] = (self.m_values[-1] + (ya - y_top) * i_top
                          + self.gamma * (ya * np.log(ya / y_top) - ya + y_top))
        return out


@lru_cache(maxsize=8)
def _inner_integral(gamma):
    return _InnerIntegral(gamma)


@dataclass(frozen=True)
class SeparationDistribution:
    """Distribution of interfacial separations at nominal pressure `pressure`.

    `density` is the continuous part of P(u) on the grid `u`; the fraction
    `area_ratio` of the nominal area is in real contact (u = 0) and is not
    part of `density`, so ``integral(density) = 1 - area_ratio``.

    The Gaussian mixture behind `density` is kept in `centers`, `widths`
    and `weights` so the density can be re-evaluated on any grid.
    """

    u: np.ndarray
    density: np.ndarray
    pressure: float
    area_ratio: float
    mean_separation: float | None
    in_contact: bool = True
    centers: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    widths: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    weights: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if u.ndim != 1 or u.shape != d.shape:
            raise ValidationError("u grid and density must be 1-D arrays of equal length")
        if np.any(np.diff(u) <= 0) or np.any(u < 0):
            raise ValidationError("u grid must be non-negative and strictly increasing")
        if np.any(d < 0):
            raise ValidationError("separation density must be non-negative")
        if not 0.0 <= self.area_ratio <= 1.0:
            raise ValidationError("area ratio must lie in [0, 1]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "density", d)

    def density_at(self, u):
        """Evaluate the mixture density at arbitrary separations."""
        return _mixture(np.asarray(u, dtype=float), self.centers, self.widths, self.weights)

    def integrate(self, values=None):
        """Trapezoid integral of ``density * values`` over the grid (log-u form)."""
        y = self.density if values is None else self.density * values
        return float(np.trapezoid(y * self.u, np.log(self.u))) if self.u[0] > 0 else float(np.trapezoid(y, self.u))

    @property
    def total_probability(self):
        return self.integrate()


def _mixture(u, centers, widths, weights, chunk=256):
    out = np.zeros_like(u)
    norm = 1.0 / math.sqrt(2.0 * math.pi)
    for s in range(0, centers.size, chunk):
        c = centers[s:s + chunk, None]
        w = widths[s:s + chunk, None]
        m = weights[s:s + chunk, None]
        z1 = (u[None, :] - c) / w
        z2 = (u[None, :] + c) / w
        out += np.sum(m * norm / w * (np.exp(-0.5 * z1 * z1) + np.exp(-0.5 * z2 * z2)), axis=0)
    return out


@dataclass(frozen=True)
class _Grid:
    t: np.ndarray          # zeta - 1
    ln_zeta: np.ndarray
    q: np.ndarray
    c: np.ndarray
    s3: np.ndarray          # cumulative int q^3 C dq from q0
    h2: np.ndarray          # h_rms(zeta)^2


def _build_grid(spec, pair, p, points_per_decade, dense_per_decade):
    span = math.log(spec.zeta_max)
    ln_main = _log_nodes(span, points_per_decade)
    t_join = math.expm1(ln_main[1])
    # G(zeta) ~ G'(1) t near zeta = 1; start where erf(p / 2 sqrt G) is 1 to ~1e-17
    slope = _g_prefactor(pair) * spec.q_0**4 * spec.c0
    t_min = max(p * p / (4.0 * slope) / 36.0 / 100.0, 1e-15)
    t_min = min(t_min, t_join / 10.0)
    n_dense = max(2, int(math.ceil(math.log10(t_join / t_min) * dense_per_decade)))
    t_dense = np.geomspace(t_min, t_join, n_dense, endpoint=False)
    ln_dense = np.log1p(t_dense)
    ln_zeta = np.concatenate(([0.0], ln_dense, ln_main[1:]))
    t = np.expm1(ln_zeta)
    q = spec.q_0 * np.exp(ln_zeta)
    c = power_spectrum(spec, q)
    s3 = integrate.cumulative_trapezoid(q**4 * c, ln_zeta, initial=0.0)
    s1 = integrate.cumulative_trapezoid(q**2 * c, ln_zeta, initial=0.0)
    h2 = 2.0 * math.pi * (s1[-1] - s1)
    return _Grid(t, ln_zeta, q, c, s3, h2)


def _cell_weight(dl):
    """exp(dl) - expm1(dl)/dl, evaluated without cancellation for small dl."""
    small = dl < 1e-3
    d = np.where(small, 1.0, dl)
    direct = np.exp(d) - np.expm1(d) / d
    series = dl / 2.0 + dl * dl / 3.0 + dl**3 / 8.0
    return np.where(small, series, direct)


def _mean_separation_rows(grid, rows, p_local, modulus, inner, chunk=128):
    """ubar(zeta_j) for node indices `rows`.

    ubar = sqrt(pi) int_{zeta q0}^{q1} q^2 C w I(w p(zeta)/Y*) dq with
    w = (pi int_{zeta q0}^{q} q'^3 C dq')^(-1/2).  Substituting
    v = sqrt(int_{zeta q0}^{q} q'^3 C dq') gives int (2/q) I(c/v) dv with
    c = p(zeta) / (Y* sqrt(pi)), free of the endpoint singularity.  On each
    cell I is taken linear in ln v and integrated exactly; the first cell
    (v from 0) uses the antiderivative of I.
    """
    inv_q = 1.0 / grid.q
    q_mid = 0.5 * (inv_q[1:] + inv_q[:-1])
    n = grid.q.size
    out = np.zeros(len(rows))
    for s in range(0, len(rows), chunk):
        r = np.asarray(rows[s:s + chunk])
        c = p_local[s:s + chunk] / (modulus * math.sqrt(math.pi))
        ds = grid.s3[None, :] - grid.s3[r][:, None]
        valid = ds > 0
        v = np.sqrt(np.where(valid, ds, 0.0))
        with np.errstate(divide="ignore"):
            x = np.where(valid, c[:, None] / np.where(valid, v, 1.0), np.inf)
        i_val = inner(x)
        v0, v1 = v[:, :-1], v[:, 1:]
        both = valid[:, :-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            dl = np.where(both, np.log(np.where(both, v1 / np.where(both, v0, 1.0), 2.0)), 1.0)
        cell = i_val[:, :-1] * (v1 - v0) + (i_val[:, 1:] - i_val[:, :-1]) * v0 * _cell_weight(dl)
        cell = np.where(both, cell, 0.0)
        total = 2.0 * np.sum(cell * q_mid[None, :], axis=1)
        first = r + 1
        has_first = first < n
        k1 = np.minimum(first, n - 1)
        v_first = v[np.arange(r.size), k1]
        with np.errstate(invalid="ignore", divide="ignore"):
            head = 2.0 * q_mid[np.minimum(r, n - 2)] * c * inner.antiderivative(
                np.where(c > 0, v_first / np.where(c > 0, c, 1.0), 0.0))
        total += np.where(has_first & np.isfinite(c), head, 0.0)
        out[s:s + chunk] = total
    return out


def separation_distribution(spec: RoughnessSpec, pair: ElasticPair, p: float, *,
                            gamma: float = DEFAULT_GAMMA,
                            points_per_decade: int = 400,
                            dense_per_decade: int = 40,
                            zeta_stride: int = 4,
                            u_min: float = 1e-10,
                            u_max_factor: float = 50.0,
                            n_u: int = 600,
                            rel_tol: float = 1e-4,
                            max_refinements: int = 2) -> SeparationDistribution:
    """Distribution of interfacial separations under nominal pressure `p`.

    Parameters
    ----------
    spec, pair : RoughnessSpec, ElasticPair
    p : float
        Nominal contact pressure (Pa).  ``p = 0`` yields a flagged
        no-contact result.
    gamma : float
        Weight of the correction factor gamma + 3(1-gamma) P^2.
    points_per_decade : int
        Density of the logarithmic wavevector grid.
    dense_per_decade : int
        Density of the extra nodes in zeta - 1 just above zeta = 1.
    zeta_stride : int
        Mixture components are taken at every `zeta_stride`-th main-grid node
        (all dense nodes are kept).
    u_min, u_max_factor, n_u : float, float, int
        Output grid: `n_u` log-spaced separations from `u_min` to
        ``u_max_factor * h_rms``.
    rel_tol : float
        Tolerance of the grid-refinement check on the mean separation.
    max_refinements : int
        Grid doublings allowed before `ConvergenceError`.

    Returns
    -------
    SeparationDistribution
    """
    if p < 0:
        raise DomainError("pressure must be >= 0")
    u_grid = np.geomspace(u_min, u_max_factor * spec.h_rms, n_u)
    if p == 0:
        return SeparationDistribution(u_grid, np.zeros_like(u_grid), 0.0, 0.0, None, in_contact=False,
                                      diagnostics={"reason": "no contact at zero pressure"})

    inner = _inner_integral(gamma)
    g_pref = _g_prefactor(pair)

    def mean_sep(ppd, dpd):
        grid = _build_grid(spec, pair, p, ppd, dpd)
        return grid, _mean_separation_rows(grid, np.array([0]), np.array([p]), pair.modulus, inner)[0]

    grid, ubar0 = mean_sep(points_per_decade, dense_per_decade)
    history = [(points_per_decade, ubar0)]
    ppd, dpd = points_per_decade, dense_per_decade
    for k in range(max_refinements + 1):
        _, fine = mean_sep(2 * ppd, 2 * dpd)
        history.append((2 * ppd, fine))
        if abs(fine - ubar0) <= rel_tol * abs(fine):
            break
        if k == max_refinements:
            raise ConvergenceError("mean separation did not converge under grid refinement",
                                   {"history": history, "pressure": p})
        ppd, dpd = 2 * ppd, 2 * dpd
        grid, ubar0 = mean_sep(ppd, dpd)

    n_dense = int(np.searchsorted(grid.ln_zeta, _log_nodes(math.log(spec.zeta_max), ppd)[1]))
    rows = np.unique(np.concatenate((np.arange(n_dense + 1),
                                     np.arange(n_dense, grid.t.size, zeta_stride),
                                     [grid.t.size - 1])))
    g = g_pref * grid.s3[rows]
    area = _area_from_g(p, g)
    t = grid.t[rows]
    p_local = np.where(area > 0, p / np.where(area > 0, area, 1.0), np.inf)
    ubar = _mean_separation_rows(grid, rows, p_local, pair.modulus, inner)
    ubar[0] = ubar0

    # central differences on the (non-uniform) zeta grid
    d_ubar = np.gradient(ubar, t)
    d_area = np.gradient(area, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        u1 = ubar + d_ubar * area / d_area
    h = np.sqrt(grid.h2[rows])
    # trapezoid weights in A: int (-A') dzeta f = sum of nodal halves of -dA
    da = -np.diff(area)
    weights = np.zeros_like(area)
    weights[:-1] += 0.5 * da
    weights[1:] += 0.5 * da
    ok = np.isfinite(u1) & (u1 >= 0) & (h > 0) & (weights > 0)
    dropped = float(weights[~ok].sum())
    centers, widths, weights = u1[ok], h[ok], weights[ok]
    density = _mixture(u_grid, centers, widths, weights)

    diagnostics = {
        "points_per_decade": ppd,
        "n_wavevector_nodes": int(grid.t.size),
        "n_components": int(centers.size),
        "dropped_weight": dropped,
        "refinement_history": history,
        "zeta_minus_one": t,
        "ubar": ubar,
        "area": area,
    }
    return SeparationDistribution(u_grid, density, float(p), float(area[-1]), float(ubar0),
                                  True, centers, widths, weights, diagnostics)

"""Coupling-singularity analysis.

The inverse dynamics divide by the coupling inertia ``M12``; it must stay
positive for every rotor angle. This module evaluates that condition
pointwise, maps the singular band of the classic circular rotor, evaluates
the closed-form wave design inequalities and cross-checks them against a
brute-force scan of ``M12`` over a full revolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AssumptionViolated, ConfigError, NoFeasibleAmplitude
from .model import GeometricParams, WaveParams, coupling_inertia, mu_terms

TWO_PI = 2.0 * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DeltaMu:
    dmu1: float
    dmu2: float
    dmu3: float
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class FeasibilityVerdict:
    cond1: bool
    cond2: bool
    cond3: bool
    lhs: float
    rhs1: float
    rhs2: float
    rhs3: float

    @property
    def feasible(self):
        return self.cond1 and self.cond2 and self.cond3

    @property
    def margins(self):
        return (self.lhs - self.rhs1, self.lhs - self.rhs2, self.lhs - self.rhs3)

    def as_dict(self):
        return {
            "lhs": self.lhs,
            "rhs1": self.rhs1,
            "rhs2": self.rhs2,
            "rhs3": self.rhs3,
            "cond1": self.cond1,
            "cond2": self.cond2,
            "cond3": self.cond3,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class SingularBand:
    """Singular rotor angles of the classic mass-point model, one per period.

    The band is ``|gamma - center| <= half_width`` modulo ``2 pi``; an
    ``empty`` band means the geometry is singularity free.
    """

    center: float
    half_width: float
    empty: bool

    def contains(self, gamma):
        if self.empty:
            return False
        offset = math.remainder(gamma - self.center, TWO_PI)
        return abs(offset) <= self.half_width

    def intervals(self):
        """Band as a list of ``(lo, hi)`` gamma intervals centred in ``(-pi, pi]``."""
        if self.empty:
            return []
        return [(self.center - self.half_width, self.center + self.half_width)]


@dataclass(frozen=True)
class RegionMap:
    """Singularity map over (swept parameter, rotor angle).

    ``margin`` holds ``M12 / m_c`` per cell and ``mask`` marks the singular
    cells (``margin <= 0``). Rows follow ``values``, columns follow ``gamma``;
    the world angle of a column is ``gamma + theta``.
    """

    param: str
    values: np.ndarray
    gamma: np.ndarray
    theta: float
    margin: np.ndarray
    mask: np.ndarray

    @property
    def zeta(self):
        return self.gamma + self.theta

    def band_half_widths(self):
        """Half-width of the contiguous singular band around each row's minimum."""
        dg = self.gamma[1] - self.gamma[0] if self.gamma.size > 1 else 0.0
        return self.mask.sum(axis=1) * dg / 2.0


@dataclass(frozen=True)
class AmplitudeDesign:
    a_min: float
    binding: int | None
    verdict: FeasibilityVerdict
    safety_factor: float

    @property
    def recommended(self):
        return self.a_min * self.safety_factor


def coupling_margin(zeta, wave, geom):
    """``mu1a^2 + mu1b^2 + I_c/m_c - R (mu1a sin zeta + mu1b cos zeta)`` (vectorised)."""
    mu = mu_terms(zeta, wave, geom)
    lhs = mu.mu1a ** 2 + mu.mu1b ** 2 + geom.I_c / geom.m_c
    return lhs - geom.R * (mu.mu1a * np.sin(zeta) + mu.mu1b * np.cos(zeta))


def coupling_condition(state, wave, geom):
    """Return ``(satisfied, margin)``; satisfied iff M12 > 0 at this configuration."""
    margin = float(coupling_margin(state.zeta, wave, geom))
    return margin > 0.0, margin


def classic_masspoint_region(geom, theta=0.0):
    """Singular band of the circular rotor (``a = 0``, ``I_c = 0``).

    Singular where ``cos(gamma + theta) >= r / R``.
    """
    ratio = geom.r / geom.R
    center = math.remainder(-theta, TWO_PI)
    if ratio > 1.0:
        return SingularBand(center, 0.0, True)
    return SingularBand(center, math.acos(ratio), False)


def classic_inertia_threshold(geom):
    """Rotor inertia above which the circular model is singularity free."""
    return geom.m_c * geom.r * (geom.R - geom.r)


def delta_mu(wave, geom):
    if not wave.n > 0:
        raise ConfigError("delta_mu requires n > 0")
    a, n, r, R = wave.a, wave.n, geom.r, geom.R
    s2 = math.sqrt(2.0)
    gamma1 = math.atan(-2.0 * r / (R * n))
    gamma2 = math.atan((R - 2.0 * s2 * r) / (R * n))
    dmu1 = a * abs(2.0 * r * math.sin(gamma1) - R * n * math.cos(gamma1))
    dmu2 = (s2 * a / 2.0) * abs((2.0 * s2 * r - R) * math.sin(gamma2) - R * n * math.cos(gamma2))
    dmu3 = a * abs(2.0 * r - R)
    return DeltaMu(dmu1, dmu2, dmu3, gamma1, gamma2)


def design_lhs(wave, geom):
    a, n = wave.a, wave.n
    return (
        geom.r ** 2
        + 0.5 * a * a * (n * n + (n * n - 1.0) * math.cos(2.0 * wave.eps) + 1.0)
        + geom.I_c / geom.m_c
    )


def theorem_feasible(wave, geom):
    """Evaluate the three wave-design inequalities."""
    if wave.a > 0 and not wave.n > 2:
        raise AssumptionViolated("design inequalities require n > 2")
    lhs = design_lhs(wave, geom)
    dm = delta_mu(wave, geom) if wave.n > 0 else DeltaMu(0.0, 0.0, 0.0, 0.0, 0.0)
    Rr = geom.R * geom.r
    rhs1 = dm.dmu1
    rhs2 = math.sqrt(2.0) / 2.0 * Rr + dm.dmu2
    rhs3 = Rr + dm.dmu3
    return FeasibilityVerdict(lhs > rhs1, lhs > rhs2, lhs > rhs3, lhs, rhs1, rhs2, rhs3)


def design_wave_amplitude(n, eps, geom, bracket=None, tol=1e-10, safety_factor=1.12,
                          scan=1000):
    """Smallest amplitude ``a`` satisfying all design inequalities.

    Each condition can fail on a window of amplitudes, so the feasible set
    is not always an upper ray. A uniform scan of ``scan`` cells locates the
    first feasible cell and bisection then refines its lower edge to ``tol``.

    ``bracket`` defaults to ``(0, min(r, R) / 2)``. ``binding`` names the
    condition (1-3) that fails just below ``a_min``, or None when the
    wave-free model is already feasible.
    """
    if not n > 2:
        raise AssumptionViolated(f"wave frequency n={n} must exceed 2")
    lo, hi = bracket if bracket is not None else (0.0, 0.5 * min(geom.r, geom.R))
    if not 0.0 <= lo < hi:
        raise ConfigError("bracket must satisfy 0 <= lo < hi")

    def verdict(a):
        return theorem_feasible(WaveParams(a, n, eps), geom)

    grid = np.linspace(lo, hi, scan + 1)
    first = next((i for i, a in enumerate(grid) if verdict(float(a)).feasible), None)
    if first is None:
        raise NoFeasibleAmplitude(f"no feasible amplitude in [{lo}, {hi}]")
    if first == 0:
        return AmplitudeDesign(lo, None, verdict(lo), safety_factor)

    lo, hi = float(grid[first - 1]), float(grid[first])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict(mid).feasible:
            hi = mid
        else:
            lo = mid
    below = verdict(lo)
    failing = [i + 1 for i, ok in enumerate((below.cond1, below.cond2, below.cond3)) if not ok]
    binding = min(failing, key=lambda i: below.margins[i - 1]) if failing else None
    return AmplitudeDesign(hi, binding, verdict(hi), safety_factor)


def _golden_min(f, lo, hi, xtol):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def min_coupling_scan(wave, geom, grid=4096, refinements=2, xtol=1e-10):
    """Global minimum of ``M12(zeta)`` over one revolution.

    A uniform grid locates candidate minima; the ``refinements`` lowest grid
    minima are polished by golden-section search within one grid cell on
    each side. Returns ``(min_M12, argmin_zeta)`` with ``zeta`` in ``[0, 2 pi)``.
    """
    if grid < 1000:
        raise ConfigError("grid must have at least 1000 samples")
    zeta = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    values = coupling_inertia(zeta, wave, geom)
    step = TWO_PI / grid
    order = np.argsort(values, kind="stable")

    def f(z):
        return float(coupling_inertia(z, wave, geom))

    best_z, best_v = float(zeta[order[0]]), float(values[order[0]])
    seen = []
    for idx in order:
        if len(seen) >= refinements:
            break
        if any(abs(math.remainder(zeta[idx] - zeta[j], TWO_PI)) <= 2 * step for j in seen):
            continue
        seen.append(idx)
        z, v = _golden_min(f, zeta[idx] - step, zeta[idx] + step, xtol)
        if v < best_v:
            best_z, best_v = z, v
    return best_v, best_z % TWO_PI


def theorem_audit(wave, geom, grid=4096):
    """Pair the closed-form verdict with the brute-force scan and flag disagreement."""
    verdict = theorem_feasible(wave, geom)
    min_m12, argmin = min_coupling_scan(wave, geom, grid=grid)
    scan_ok = min_m12 > 0.0
    return {
        "theorem": verdict.as_dict(),
        "scan_min_M12": min_m12,
        "scan_argmin_zeta": argmin,
        "scan_singularity_free": scan_ok,
        "agree": verdict.feasible == scan_ok,
    }


SWEEPABLE = ("m_c", "M_b", "R", "r", "g", "I_b", "I_c", "a", "n", "eps")


def region_map(param, values, geom=None, wave=None, theta=0.0, n_gamma=720):
    """Evaluate the coupling margin over a parameter sweep and a full gamma circle.

    Args:
        param: name of a GeometricParams or WaveParams field to sweep.
        values: swept values; must be strictly positive.
        theta: fixed carrier angle.
        n_gamma: number of gamma samples over ``[-pi, pi)``.
    """
    geom = geom or GeometricParams()
    wave = wave or WaveParams()
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}")
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0 or not np.all(values > 0):
        raise ConfigError("swept values must be a non-empty positive 1-D sequence")
    if n_gamma < 1:
        raise ConfigError("n_gamma must be positive")
    gamma = -math.pi + TWO_PI * np.arange(n_gamma) / n_gamma
    zeta = gamma + theta
    margin = np.empty((values.size, n_gamma))
    for i, v in enumerate(values):
        if param in ("a", "n", "eps"):
            g_i, w_i = geom, replace(wave, **{param: float(v)})
        else:
            g_i, w_i = replace(geom, **{param: float(v)}), wave
        margin[i] = coupling_margin(zeta, w_i, g_i)
    return RegionMap(param, values, gamma, theta, margin, margin <= 0.0)

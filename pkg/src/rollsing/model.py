"""Closed-form model of a rolling spherical carrier with a wave-guided rotor.

The rotor (mass ``m_c``) travels around the carrier centre along a circle of
radius ``r`` with a superposed sine wave ``a*sin(n*zeta + eps)``, where
``zeta = gamma + theta`` is the rotor angle in the world frame. Everything in
this module is a pure function of immutable parameters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolated, ConfigError, DegenerateInertia

# relative determinant floor for the 2x2 inertia solve
TOL_DET = 1e-12
# strict-mode cap on a relative to min(r, R)
SMALL_AMPLITUDE_RATIO = 0.1


@dataclass(frozen=True)
class GeometricParams:
    """Masses, radii and inertias of the carrier/rotor system (SI units).

    Defaults describe the reference test rig: a 1 kg carrier of radius
    0.145 m, a 0.4 kg rotor on a 0.131 m circle, no rotor inertia.
    """

    m_c: float = 0.4
    M_b: float = 1.0
    R: float = 0.145
    r: float = 0.131
    g: float = 9.8
    I_b: float = 0.0140
    I_c: float = 0.0

    def __post_init__(self):
        values = (self.m_c, self.M_b, self.R, self.r, self.g, self.I_b, self.I_c)
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("geometric parameters must be finite")
        if not (self.m_c > 0 and self.M_b > 0 and self.R > 0 and self.r > 0 and self.g > 0):
            raise ConfigError("m_c, M_b, R, r and g must be positive")
        if self.I_b < 0 or self.I_c < 0:
            raise ConfigError("I_b and I_c must be non-negative")

    @classmethod
    def consistent_carrier(cls, **kwargs):
        """Build with ``I_b = 2 M_b R^2 / 3`` (thin spherical shell)."""
        if "I_b" in kwargs:
            raise ConfigError("I_b is derived in consistent-carrier mode")
        M_b = kwargs.get("M_b", cls.M_b)
        R = kwargs.get("R", cls.R)
        return cls(I_b=2.0 * M_b * R * R / 3.0, **kwargs)

    def validate_inside(self):
        """Raise unless the rotor circle lies inside the carrier (r < R)."""
        if not self.r < self.R:
            raise ConfigError(f"rotor radius r={self.r} must be smaller than R={self.R}")


@dataclass(frozen=True)
class WaveParams:
    """Sine wave superposed on the rotor circle; ``a == 0`` is the classic model."""

    a: float = 0.0
    n: float = 10.0
    eps: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.n, self.eps)):
            raise ConfigError("wave parameters must be finite")
        if self.a < 0:
            raise ConfigError("wave amplitude a must be non-negative")
        if self.a > 0 and not self.n > 2:
            raise AssumptionViolated(f"wave frequency n={self.n} must exceed 2 when a > 0")
        if self.a > 0 and self.n != round(self.n):
            warnings.warn(
                f"non-integer wave frequency n={self.n}: path is not closed over one revolution",
                stacklevel=2,
            )

    @property
    def classic(self):
        return self.a == 0.0

    def check_amplitude(self, geom, strict=True):
        """Enforce the small-amplitude assumption ``a < 0.1 min(r, R)``.

        In permissive mode a violation only warns.
        """
        limit = SMALL_AMPLITUDE_RATIO * min(geom.r, geom.R)
        if self.a >= limit:
            msg = f"wave amplitude a={self.a} is not small against min(r, R) (limit {limit:.6g})"
            if strict:
                raise AssumptionViolated(msg)
            warnings.warn(msg, stacklevel=2)


@dataclass(frozen=True)
class SystemState:
    theta: float = 0.0
    gamma: float = 0.0
    theta_dot: float = 0.0
    gamma_dot: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.theta, self.gamma, self.theta_dot, self.gamma_dot)):
            raise ConfigError("state must be finite")

    @property
    def zeta(self):
        return self.gamma + self.theta

    @property
    def zeta_dot(self):
        return self.gamma_dot + self.theta_dot


@dataclass(frozen=True)
class MuTerms:
    mu1a: float
    mu1b: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float


@dataclass(frozen=True)
class DynamicsTerms:
    """Entries of ``M q'' + N + G = [0, tau_gamma]``; M is symmetric so M21 = M12."""

    M11: float
    M12: float
    M22: float
    N1: float
    N2: float
    G1: float
    G2: float

    @property
    def M21(self):
        return self.M12

    @property
    def det(self):
        return self.M11 * self.M22 - self.M12 * self.M12


def mu_terms(zeta, wave, geom):
    """Geometric mu factors of the wavy rotor path at world angle ``zeta``.

    With ``rho = r + a sin(n zeta + eps)`` the rotor distance from the carrier
    centre, ``mu1a = d rho / d zeta`` and ``mu1b = rho``. Works elementwise on
    numpy arrays as well as on floats.
    """
    a, n, eps, r = wave.a, wave.n, wave.eps, geom.r
    phase = n * zeta + eps
    s_ph, c_ph = np.sin(phase), np.cos(phase)
    s_z, c_z = np.sin(zeta), np.cos(zeta)
    mu1a = a * n * c_ph
    mu1b = r + a * s_ph
    mu1 = mu1a * s_z + mu1b * c_z
    mu2 = (a * n * c_ph) ** 2 + mu1b ** 2
    mu3 = -a * n * n * s_ph * s_z + 2.0 * a * n * c_ph * c_z - mu1b * s_z
    mu4 = -a * a * n ** 3 * s_ph * c_ph + a * n * c_ph * mu1b
    mu5 = a * n * c_ph * (1.0 - c_z) + mu1b * s_z
    return MuTerms(mu1a, mu1b, mu1, mu2, mu3, mu4, mu5)


def coupling_inertia(zeta, wave, geom):
    """M12 as a function of the world angle only (vectorised)."""
    mu = mu_terms(zeta, wave, geom)
    return geom.I_c - geom.m_c * geom.R * mu.mu1 + geom.m_c * mu.mu2


def _terms_from(zeta, zeta_dot, wave, geom):
    mu = mu_terms(zeta, wave, geom)
    m_c, R = geom.m_c, geom.R
    w2 = zeta_dot * zeta_dot
    M22 = geom.I_c + m_c * mu.mu2
    M12 = M22 - m_c * R * mu.mu1
    M11 = geom.I_c + geom.M_b * R * R + geom.I_b + m_c * R * R - 2.0 * m_c * R * mu.mu1 + m_c * mu.mu2
    N2 = m_c * w2 * mu.mu4
    N1 = -m_c * R * w2 * mu.mu3 + N2
    G = m_c * geom.g * mu.mu5
    return M11, M12, M22, N1, N2, G, G


def dynamics_terms(state, wave, geom):
    """Evaluate M, N, G at ``state``."""
    return DynamicsTerms(*_terms_from(state.zeta, state.zeta_dot, wave, geom))


def mass_trajectory_point(state, wave, geom):
    """World-frame rotor position ``(y, z)`` and velocity ``(vy, vz)``.

    The carrier centre sits at ``(R*theta, R)`` (rolling without slip) and
    the rotor hangs at ``-rho*(sin zeta, cos zeta)`` from it.
    """
    mu = mu_terms(state.zeta, wave, geom)
    zd = state.zeta_dot
    s_z, c_z = math.sin(state.zeta), math.cos(state.zeta)
    y = geom.R * state.theta - mu.mu1b * s_z
    z = geom.R - mu.mu1b * c_z
    vy = geom.R * state.theta_dot - zd * mu.mu1
    vz = -zd * (mu.mu1a * c_z - mu.mu1b * s_z)
    return (y, z), (vy, vz)


def trajectory_deviation(zeta, wave):
    """Radial offset ``a sin(n zeta + eps)`` of the rotor from its circle."""
    return wave.a * np.sin(wave.n * zeta + wave.eps)


def body_kinematics(state, geom):
    """Return ``(omega_b, V_b, omega_c)``: carrier spin, carrier speed, rotor spin."""
    return state.theta_dot, geom.R * state.theta_dot, state.gamma_dot + state.theta_dot


def total_energy(state, wave, geom):
    """Kinetic and potential energy ``(K, P)`` in joules.

    P is measured from the rotor's lowest point on the circle and follows
    ``m_c g rho (1 - cos zeta)``; the generalized forces G1, G2 are exactly
    its gradient, so ``d(K + P)/dt = tau_gamma * gamma_dot`` holds along
    solutions.
    """
    mu = mu_terms(state.zeta, wave, geom)
    td, zd = state.theta_dot, state.zeta_dot
    R = geom.R
    rotor_v2 = (R * td) ** 2 - 2.0 * R * td * zd * mu.mu1 + zd * zd * mu.mu2
    kinetic = 0.5 * (
        (geom.M_b * R * R + geom.I_b) * td * td
        + geom.I_c * zd * zd
        + geom.m_c * rotor_v2
    )
    potential = geom.m_c * geom.g * mu.mu1b * (1.0 - math.cos(state.zeta))
    return kinetic, potential


def solve_accelerations(terms, tau_gamma):
    """Solve the 2x2 system ``M q'' = [0, tau] - N - G`` by Cramer's rule."""
    det = terms.det
    if not det > TOL_DET * terms.M11 * terms.M22:
        raise DegenerateInertia(f"inertia determinant {det!r} not positive")
    b1 = -terms.N1 - terms.G1
    b2 = tau_gamma - terms.N2 - terms.G2
    theta_ddot = (terms.M22 * b1 - terms.M12 * b2) / det
    gamma_ddot = (terms.M11 * b2 - terms.M12 * b1) / det
    return theta_ddot, gamma_ddot


def forward_dynamics(state, tau_gamma, wave, geom):
    """Accelerations ``(theta_ddot, gamma_ddot)`` under rotor torque ``tau_gamma``."""
    return solve_accelerations(dynamics_terms(state, wave, geom), tau_gamma)

"""Feed-forward experiments on the rolling carrier.

The carrier angle follows the Beta profile exactly; the rotor angle is found
by integrating the rolling constraint (first row of the equations of motion)
and the rotor torque follows from the second row. The forward round trip
feeds that torque back through the full two-degree-of-freedom dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, SingularityHit
from .integrator import IntegratorConfig, integrate_adaptive
from .model import (
    GeometricParams,
    SystemState,
    WaveParams,
    _terms_from,
    dynamics_terms,
    mass_trajectory_point,
    solve_accelerations,
    total_energy,
)
from .profile import RestToRestSpec, beta_profile

MODES = ("inverse-feedforward", "forward-roundtrip", "compare-classic")

TRACE_COLUMNS = (
    "t", "theta", "theta_dot", "theta_ddot_cmd", "gamma", "gamma_dot", "gamma_ddot",
    "zeta", "tau_gamma", "M12", "M_bar", "kinetic", "potential", "power_residual",
    "mass_y", "mass_z", "mass_vy", "mass_vz",
)


@dataclass(frozen=True)
class ScenarioConfig:
    geom: GeometricParams = field(default_factory=GeometricParams)
    wave: WaveParams = field(default_factory=lambda: WaveParams(a=0.0055, n=10.0, eps=0.0))
    profile: RestToRestSpec = field(default_factory=RestToRestSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    mode: str = "inverse-feedforward"
    singularity_guard: float = 1e-8
    sample_dt: float | None = None
    name: str = "scenario"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.singularity_guard > 0:
            raise ConfigError("singularity_guard must be positive")
        if self.sample_dt is not None and not self.sample_dt > 0:
            raise ConfigError("sample_dt must be positive")

    @property
    def dt(self):
        return self.profile.T / 600.0 if self.sample_dt is None else self.sample_dt


@dataclass
class SimulationTrace:
    """Uniformly sampled record of one run.

    ``columns`` maps every name in TRACE_COLUMNS to an array; ``summary``
    holds scalar diagnostics. A trace with ``singularity_hit`` stops at the
    last sample before the flagged time.
    """

    columns: dict
    summary: dict
    config: ScenarioConfig

    def __getitem__(self, name):
        return self.columns[name]

    def __len__(self):
        return len(self.columns["t"])

    @property
    def singularity_hit(self):
        return self.summary["singularity_hit"]


class InverseStep(NamedTuple):
    gamma_ddot: float
    tau_gamma: float
    M12: float

    @property
    def negative_coupling(self):
        return self.M12 < 0.0


class ReducedInverse(NamedTuple):
    tau_bar: float
    M_bar: float
    N_bar: float
    G_bar: float


def _guard(M12, guard, zeta, t=None):
    if abs(M12) <= guard:
        raise SingularityHit(
            f"coupling inertia M12={M12:.3e} inside guard {guard:.1e} at zeta={zeta:.6f}",
            t=t, zeta=zeta, M12=M12,
        )


def inverse_step(state, theta_ddot, wave, geom, guard=1e-8, t=None):
    """Rotor acceleration and torque that realise ``theta_ddot``.

    Raises SingularityHit when ``|M12| <= guard``. A negative but non-zero
    M12 still returns values; check ``negative_coupling`` on the result.
    """
    d = dynamics_terms(state, wave, geom)
    _guard(d.M12, guard, state.zeta, t)
    gamma_ddot = -(d.M11 * theta_ddot + d.N1 + d.G1) / d.M12
    tau = d.M21 * theta_ddot + d.M22 * gamma_ddot + d.N2 + d.G2
    return InverseStep(gamma_ddot, tau, d.M12)


def reduced_inverse(state, theta_ddot, wave, geom, guard=1e-8, t=None):
    """Scalar inverse form ``tau_bar = M_bar theta_ddot + N_bar + G_bar``; ``tau_bar = -tau_gamma``."""
    d = dynamics_terms(state, wave, geom)
    _guard(d.M12, guard, state.zeta, t)
    M_bar = (d.M11 * d.M22 - d.M12 * d.M21) / d.M12
    N_bar = d.M22 * d.N1 / d.M12 - d.N2
    G_bar = d.M22 * d.G1 / d.M12 - d.G2
    return ReducedInverse(M_bar * theta_ddot + N_bar + G_bar, M_bar, N_bar, G_bar)


def _inverse_rhs(cfg, sign_ref):
    wave, geom, spec, guard = cfg.wave, cfg.geom, cfg.profile, cfg.singularity_guard

    def rhs(t, y):
        theta, theta_dot, theta_ddot = beta_profile(t, spec)
        zeta = y[0] + theta
        M11, M12, M22, N1, N2, G1, G2 = _terms_from(zeta, y[1] + theta_dot, wave, geom)
        _guard(M12, guard, zeta, t)
        if M12 * sign_ref < 0.0:
            raise SingularityHit(
                f"coupling inertia changed sign (M12={M12:.3e}) at t={t:.6f}",
                t=t, zeta=zeta, M12=M12,
            )
        return np.array([y[1], -(M11 * theta_ddot + N1 + G1) / M12])

    return rhs


def power_residual(t, kinetic, potential, tau_gamma, gamma_dot):
    """``d(K + P)/dt - tau_gamma * gamma_dot`` with second-order differences."""
    t = np.asarray(t, dtype=float)
    energy = np.asarray(kinetic) + np.asarray(potential)
    if t.size < 3:
        return np.zeros_like(energy)
    return np.gradient(energy, t, edge_order=2) - np.asarray(tau_gamma) * np.asarray(gamma_dot)


def power_balance_residual(trace):
    """Largest absolute power residual over the trace (W)."""
    res = trace["power_residual"]
    return float(np.max(np.abs(res))) if res.size else 0.0


def _build_trace(cfg, t, y, negative_start):
    wave, geom, spec = cfg.wave, cfg.geom, cfg.profile
    n = t.size
    cols = {name: np.zeros(n) for name in TRACE_COLUMNS}
    cols["t"] = t.copy()
    theta, theta_dot, theta_ddot = beta_profile(t, spec)
    cols["theta"], cols["theta_dot"], cols["theta_ddot_cmd"] = (
        np.atleast_1d(theta), np.atleast_1d(theta_dot), np.atleast_1d(theta_ddot),
    )
    cols["gamma"], cols["gamma_dot"] = y[:, 0].copy(), y[:, 1].copy()
    cols["zeta"] = cols["gamma"] + cols["theta"]
    for i in range(n):
        state = SystemState(cols["theta"][i], cols["gamma"][i], cols["theta_dot"][i], cols["gamma_dot"][i])
        d = dynamics_terms(state, wave, geom)
        gamma_ddot = -(d.M11 * cols["theta_ddot_cmd"][i] + d.N1 + d.G1) / d.M12
        cols["gamma_ddot"][i] = gamma_ddot
        cols["tau_gamma"][i] = d.M21 * cols["theta_ddot_cmd"][i] + d.M22 * gamma_ddot + d.N2 + d.G2
        cols["M12"][i] = d.M12
        cols["M_bar"][i] = d.det / d.M12
        cols["kinetic"][i], cols["potential"][i] = total_energy(state, wave, geom)
        (py, pz), (vy, vz) = mass_trajectory_point(state, wave, geom)
        cols["mass_y"][i], cols["mass_z"][i] = py, pz
        cols["mass_vy"][i], cols["mass_vz"][i] = vy, vz
    cols["power_residual"] = power_residual(
        t, cols["kinetic"], cols["potential"], cols["tau_gamma"], cols["gamma_dot"],
    )
    summary = {
        "scenario": cfg.name,
        "samples": int(n),
        "t_final": float(t[-1]),
        "min_abs_M12": float(np.min(np.abs(cols["M12"]))),
        "min_M12": float(np.min(cols["M12"])),
        "max_abs_tau_gamma": float(np.max(np.abs(cols["tau_gamma"]))),
        "max_abs_gamma": float(np.max(np.abs(cols["gamma"]))),
        "zeta_range": [float(np.min(cols["zeta"])), float(np.max(cols["zeta"]))],
        "final_state": {
            "theta": float(cols["theta"][-1]),
            "theta_dot": float(cols["theta_dot"][-1]),
            "gamma": float(cols["gamma"][-1]),
            "gamma_dot": float(cols["gamma_dot"][-1]),
        },
        "final_errors": {
            "theta": float(abs(cols["theta"][-1] - spec.k)),
            "theta_dot": float(abs(cols["theta_dot"][-1])),
            "gamma_dot": float(abs(cols["gamma_dot"][-1])),
        },
        "max_power_residual": float(np.max(np.abs(cols["power_residual"]))),
        "negative_M12": bool(negative_start or np.any(cols["M12"] < 0.0)),
        "singularity_hit": False,
        "singularity": None,
    }
    return SimulationTrace(cols, summary, cfg)


def simulate_inverse(cfg):
    """Run the feed-forward experiment described by ``cfg``.

    The rotor starts at rest at ``gamma = 0``. Raises SingularityHit with the
    truncated trace attached as ``exc.partial`` when the coupling inertia
    enters the guard band or changes sign.
    """
    spec = cfg.profile
    theta0, theta_dot0, _ = beta_profile(0.0, spec)
    start = SystemState(theta0, 0.0, theta_dot0, 0.0)
    M12_0 = dynamics_terms(start, cfg.wave, cfg.geom).M12
    _guard(M12_0, cfg.singularity_guard, start.zeta, 0.0)
    sign_ref = 1.0 if M12_0 > 0 else -1.0

    rhs = _inverse_rhs(cfg, sign_ref)
    try:
        sol = integrate_adaptive(rhs, [0.0, 0.0], (0.0, spec.T), cfg.integrator, cfg.dt)
    except SingularityHit as exc:
        sol = exc.solution
        partial = _build_trace(cfg, sol.t, sol.y, sign_ref < 0)
        partial.summary["singularity_hit"] = True
        partial.summary["singularity"] = {"t": exc.t, "zeta": exc.zeta, "M12": exc.M12}
        exc.partial = partial
        raise
    trace = _build_trace(cfg, sol.t, sol.y, sign_ref < 0)
    trace.summary["steps"] = int(sol.steps.size)
    trace.summary["rejected_steps"] = int(sol.flags["rejected"])
    trace.summary["sign_reversals_gamma_dot"] = count_sign_reversals(trace["gamma_dot"])
    trace.summary["sign_changes_zeta"] = count_sign_reversals(trace["zeta"])
    return trace


def count_sign_reversals(values, threshold=None):
    """Sign changes of ``values`` after discarding entries with ``|v| <= threshold``.

    The default threshold is 5% of the peak magnitude, which filters small
    ripples around zero.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return 0
    threshold = 0.05 * peak if threshold is None else threshold
    signs = np.sign(values[np.abs(values) > threshold])
    return int(np.count_nonzero(np.diff(signs)))


def torque_interpolant(trace):
    """Monotone cubic interpolant of the recorded rotor torque."""
    t = trace["t"]
    if t.size < 2:
        value = float(trace["tau_gamma"][0]) if t.size else 0.0
        return lambda _t: value
    pchip = PchipInterpolator(t, trace["tau_gamma"], extrapolate=True)
    t_end = float(t[-1])
    return lambda s: float(pchip(min(max(s, 0.0), t_end)))


def simulate_forward(tau_of_t, cfg, t_end, sample_dt):
    """Integrate the full 2-DOF dynamics from rest under ``tau_of_t``.

    Returns the integrator SolutionTrace with state ``[theta, gamma, theta_dot, gamma_dot]``.
    """
    wave, geom = cfg.wave, cfg.geom

    def rhs(t, y):
        d = dynamics_terms(SystemState(y[0], y[1], y[2], y[3]), wave, geom)
        theta_ddot, gamma_ddot = solve_accelerations(d, tau_of_t(t))
        return np.array([y[2], y[3], theta_ddot, gamma_ddot])

    theta0, theta_dot0, _ = beta_profile(0.0, cfg.profile)
    return integrate_adaptive(rhs, [theta0, 0.0, theta_dot0, 0.0], (0.0, t_end), cfg.integrator, sample_dt)


@dataclass(frozen=True)
class RoundTripReport:
    max_theta_deviation: float
    max_gamma_deviation: float
    final_theta_deviation: float
    samples: int


def roundtrip_forward_check(trace, cfg=None):
    """Drive the forward dynamics with the trace's torque and compare states.

    Deviations are measured on the trace's own sample times: ``theta``
    against the Beta profile and ``gamma`` against the inverse solution.
    """
    cfg = cfg or trace.config
    t = trace["t"]
    if t.size < 2 or t[-1] <= 0.0:
        return RoundTripReport(0.0, 0.0, 0.0, int(t.size))
    dt = float(t[1] - t[0])
    sol = simulate_forward(torque_interpolant(trace), cfg, float(t[-1]), dt)
    n = min(sol.t.size, t.size)
    theta_ref = np.atleast_1d(beta_profile(t[:n], cfg.profile)[0])
    dtheta = np.abs(sol.y[:n, 0] - theta_ref)
    dgamma = np.abs(sol.y[:n, 1] - trace["gamma"][:n])
    return RoundTripReport(float(dtheta.max()), float(dgamma.max()), float(dtheta[-1]), int(n))


@dataclass(frozen=True)
class Comparison:
    classic: SimulationTrace
    modified: SimulationTrace
    metrics: dict


def _diff_metrics(x, y):
    d = np.asarray(x) - np.asarray(y)
    if d.size == 0:
        return 0.0, 0.0
    return float(np.max(np.abs(d))), float(math.sqrt(np.mean(d * d)))


def compare_classic_modified(cfg_classic, cfg_modified):
    """Run both inverse experiments and measure how far the models disagree.

    Besides the direct state differences (theta is prescribed in both runs,
    so its direct difference vanishes) both torque histories are fed through
    the classic forward dynamics; ``cross_theta`` measures how far the carrier
    driven by the modified torque strays from the one driven by the classic
    torque. Integration error is common to both legs and cancels.
    """
    if cfg_classic.geom != cfg_modified.geom or cfg_classic.profile != cfg_modified.profile:
        raise ConfigError("compared scenarios must share geometry and motion profile")
    if cfg_classic.dt != cfg_modified.dt:
        raise ConfigError("compared scenarios must share the sampling interval")
    classic = simulate_inverse(cfg_classic)
    modified = simulate_inverse(cfg_modified)
    n = min(len(classic), len(modified))
    metrics = {}
    for name in ("theta", "gamma", "gamma_dot", "tau_gamma"):
        mx, rms = _diff_metrics(classic[name][:n], modified[name][:n])
        metrics[f"max_abs_d{name}"] = mx
        metrics[f"rms_d{name}"] = rms
    t_end = float(modified["t"][n - 1])
    own = simulate_forward(torque_interpolant(classic), cfg_classic, t_end, cfg_classic.dt)
    cross = simulate_forward(torque_interpolant(modified), cfg_classic, t_end, cfg_classic.dt)
    m = min(own.t.size, cross.t.size)
    mx, rms = _diff_metrics(cross.y[:m, 0], own.y[:m, 0])
    metrics["max_abs_dtheta_cross"] = mx
    metrics["rms_dtheta_cross"] = rms
    return Comparison(classic, modified, metrics)

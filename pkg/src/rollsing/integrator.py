"""Adaptive Dormand-Prince 5(4) integration with uniform dense output.

The pair is the classic Dormand-Prince one: seven stages with the FSAL
property, fifth-order propagation (local extrapolation) and a fourth-order
embedded error estimate. Output samples on a uniform grid are produced with
the pair's quartic continuous extension, so they never require extra
right-hand-side evaluations and never come from rejected steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, ConfigError, RhsFailure, StepUnderflow

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between 5th and embedded 4th order weights
E = np.array([
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
])
# Shampine's continuous extension, columns multiply s, s^2, s^3, s^4
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
FACTOR_MIN = 0.2
FACTOR_MAX = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-control settings.

    When left as None, ``h_init`` defaults to a thousandth of the
    integration span and ``h_max`` to a tenth of it.
    """

    rel_tol: float = 1e-4
    abs_tol: float = 1e-4
    h_init: float | None = None
    h_min: float = 1e-12
    h_max: float | None = None
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("rel_tol and abs_tol must be positive")
        if not self.h_min > 0:
            raise ConfigError("h_min must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        lo = self.h_min
        if self.h_init is not None and self.h_init < lo:
            raise ConfigError("h_init must be >= h_min")
        if self.h_max is not None:
            if self.h_max < lo:
                raise ConfigError("h_max must be >= h_min")
            if self.h_init is not None and self.h_init > self.h_max:
                raise ConfigError("h_init must be <= h_max")

    def resolved(self, span):
        """Return (h_init, h_max) with defaults filled in for ``span``."""
        h_max = span / 10.0 if self.h_max is None else self.h_max
        h_init = span / 1000.0 if self.h_init is None else self.h_init
        return min(max(h_init, self.h_min), h_max), h_max


@dataclass
class SolutionTrace:
    """Integrator output.

    Attributes:
        t: sample times, strictly increasing, ``t[0]`` is the start time
        y: states, shape (len(t), dim)
        steps: accepted step sizes in order
        flags: diagnostics (rejected step count, rhs evaluations, status)
    """

    t: np.ndarray
    y: np.ndarray
    steps: np.ndarray
    flags: dict = field(default_factory=dict)


def sample_times(t0, t1, sample_dt):
    """Uniform grid from t0 with spacing sample_dt; the last point is t1."""
    span = t1 - t0
    count = int(math.ceil(span / sample_dt - 1e-9))
    count = max(count, 1)
    times = t0 + sample_dt * np.arange(count + 1, dtype=float)
    times[-1] = t1
    return times


def _check_finite(values, t):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise RhsFailure(f"right-hand side returned non-finite values at t={t!r}", t=t)
    return values


def integrate_adaptive(rhs, y0, t_span, cfg=None, sample_dt=None):
    """Integrate ``y' = rhs(t, y)`` over ``t_span``.

    Args:
        rhs: callable ``rhs(t, y) -> array``; must be pure.
        y0: initial state vector.
        t_span: ``(t0, t1)`` with ``t1 >= t0``.
        cfg: IntegratorConfig, defaults to rel/abs tolerance 1e-4.
        sample_dt: uniform output spacing. When None the trace holds the
            accepted step endpoints instead.

    Returns:
        SolutionTrace with samples that only come from accepted steps.

    Raises:
        StepUnderflow, BudgetExceeded, RhsFailure. Any exception raised while
        stepping (including ones thrown by ``rhs``) carries the partial
        trace as ``exc.solution``.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 >= t0:
        raise ConfigError("t_span must satisfy t1 >= t0")
    y = np.array(y0, dtype=float).reshape(-1)
    dim = y.size

    if sample_dt is not None and not sample_dt > 0:
        raise ConfigError("sample_dt must be positive")

    out_t = [t0]
    out_y = [y.copy()]
    steps = []
    flags = {"rejected": 0, "nfev": 0, "status": "running"}

    def snapshot():
        return SolutionTrace(
            np.array(out_t), np.array(out_y).reshape(len(out_t), dim),
            np.array(steps), dict(flags),
        )

    span = t1 - t0
    if span == 0.0:
        flags["status"] = "done"
        return snapshot()

    grid = sample_times(t0, t1, sample_dt) if sample_dt is not None else None
    next_idx = 1

    h, h_max = cfg.resolved(span)
    t = t0
    K = np.empty((7, dim))
    try:
        K[0] = _check_finite(rhs(t, y), t)
        flags["nfev"] += 1
        accepted = 0
        while t < t1:
            if accepted >= cfg.max_steps:
                raise BudgetExceeded(f"max_steps={cfg.max_steps} reached at t={t!r}", t=t)
            last = False
            if t + h >= t1 or (t1 - (t + h)) < cfg.h_min:
                h = t1 - t
                last = True
            while True:
                if h < cfg.h_min and not last:
                    raise StepUnderflow(f"step {h!r} below h_min at t={t!r}", t=t)
                for s in range(1, 7):
                    ys = y + h * (A[s] @ K[:s])
                    K[s] = _check_finite(rhs(t + C[s] * h, ys), t + C[s] * h)
                flags["nfev"] += 6
                y_new = y + h * (B5 @ K)
                err_vec = h * (E @ K)
                scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
                err = float(np.max(np.abs(err_vec) / scale)) if dim else 0.0
                if err <= 1.0:
                    break
                flags["rejected"] += 1
                factor = max(FACTOR_MIN, SAFETY * err ** -0.2)
                h = h * min(1.0, factor)
                last = False
                if h < cfg.h_min:
                    raise StepUnderflow(f"step {h!r} below h_min at t={t!r}", t=t)

            t_new = t1 if last else t + h
            if grid is None:
                out_t.append(t_new)
                out_y.append(y_new.copy())
            else:
                Q = K.T @ P
                while next_idx < grid.size and grid[next_idx] <= t_new:
                    tau = grid[next_idx]
                    if tau == t_new:
                        out_y.append(y_new.copy())
                    else:
                        s = (tau - t) / h
                        out_y.append(y + h * (Q @ np.array([s, s * s, s ** 3, s ** 4])))
                    out_t.append(tau)
                    next_idx += 1
            steps.append(h)
            accepted += 1

            factor = FACTOR_MAX if err == 0.0 else SAFETY * err ** -0.2
            factor = min(FACTOR_MAX, max(FACTOR_MIN, factor))
            t, y = t_new, y_new
            K[0] = K[6]
            h = min(h * factor, h_max)
    except Exception as exc:
        flags["status"] = type(exc).__name__
        exc.solution = snapshot()
        raise

    flags["status"] = "done"
    return snapshot()

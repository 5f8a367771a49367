"""Rest-to-rest carrier motion from the 7th-degree Beta polynomial."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec


@dataclass(frozen=True)
class RestToRestSpec:
    """Move the carrier by ``k`` radians in ``T`` seconds, starting and ending at rest."""

    k: float = math.pi / 2
    T: float = 6.0

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise InvalidSpec("k must be finite")
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidSpec(f"duration T={self.T} must be positive")


def beta_profile(t, spec):
    """Return ``(theta, theta_dot, theta_ddot)`` at time ``t``.

    ``theta = k (35 s^4 - 84 s^5 + 70 s^6 - 20 s^7)`` with ``s = t / T``;
    the first three derivatives vanish at both ends. Times outside ``[0, T]``
    are clamped, so the profile holds its rest pose after ``T``. Accepts
    scalars or numpy arrays.
    """
    k, T = spec.k, spec.T
    s = np.clip(np.asarray(t, dtype=float) / T, 0.0, 1.0)
    s2 = s * s
    s3 = s2 * s
    s4 = s2 * s2
    theta = k * s4 * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)))
    theta_dot = k / T * 140.0 * s3 * (1.0 + s * (-3.0 + s * (3.0 - s)))
    theta_ddot = k / (T * T) * 420.0 * s2 * (1.0 + s * (-4.0 + s * (5.0 - 2.0 * s)))
    if np.ndim(theta) == 0:
        return float(theta), float(theta_dot), float(theta_ddot)
    return theta, theta_dot, theta_ddot

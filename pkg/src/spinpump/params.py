"""Physical parameters and polarization-modulation schedules.

All frequencies and rates are angular (rad/s).  The level scheme is the
four-state toy model {|1>, |0>, |-1>, |e>}: a spin-1 ground manifold split
by a transverse magnetic field plus one optically excited state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysicalParams",
    "Constant",
    "ArccosSqrtRamp",
    "PiecewiseLinear",
    "ModulationSchedule",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Rates and fields of the toy model.

    Attributes
    ----------
    omega_B : float
        Larmor frequency (rad/s) set by the transverse magnetic field.
    Omega : float
        Pump Rabi frequency (rad/s).
    gamma_e : float
        Spontaneous-emission rate of the excited state (rad/s).
    gamma : float
        Ground-state spin-destruction rate (rad/s).
    """

    omega_B: float
    Omega: float
    gamma_e: float
    gamma: float

    def __post_init__(self):
        if not (self.gamma_e > 0):
            raise ValueError("gamma_e must be > 0")
        if self.Omega < 0 or self.gamma < 0:
            raise ValueError("rates must be >= 0")

    @property
    def Gamma(self) -> float:
        """Characteristic optical pumping rate Omega^2 / gamma_e."""
        return self.Omega**2 / self.gamma_e

    @property
    def below_saturation(self) -> bool:
        """True when Omega <= 0.1 * gamma_e, the regime where the reduced
        moment model is expected to track the master equation."""
        return self.Omega <= 0.1 * self.gamma_e


@dataclass(frozen=True)
class Constant:
    """Fixed modulation depth theta."""

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2):
            raise ValueError("theta must lie in [0, pi/2]")

    def __call__(self, t):
        return self.theta if np.isscalar(t) else np.full(np.shape(t), self.theta)


@dataclass(frozen=True)
class ArccosSqrtRamp:
    """theta(t) = arccos sqrt(t/T): pi/2 at t=0, 0 at t=T, clamped outside."""

    T: float

    def __post_init__(self):
        if not (self.T > 0):
            raise ValueError("ramp duration T must be > 0")

    def __call__(self, t):
        x = np.clip(np.asarray(t, dtype=float) / self.T, 0.0, 1.0)
        out = np.arccos(np.sqrt(x))
        return float(out) if np.isscalar(t) else out


@dataclass(frozen=True)
class PiecewiseLinear:
    """theta(t) linearly interpolated through a table of (t, theta) knots."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(t), float(th)) for t, th in self.points)
        object.__setattr__(self, "points", pts)
        ts = [p[0] for p in pts]
        if len(pts) < 2:
            raise ValueError("need at least two knots")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(not (0.0 <= th <= math.pi / 2) for _, th in pts):
            raise ValueError("theta values must lie in [0, pi/2]")

    def __call__(self, t):
        ts = np.array([p[0] for p in self.points])
        ths = np.array([p[1] for p in self.points])
        out = np.interp(t, ts, ths)
        return float(out) if np.isscalar(t) else out


# profile kind codes shared with the compiled backend
_PROFILE_KIND = {Constant: 0, ArccosSqrtRamp: 1, PiecewiseLinear: 2}


@dataclass(frozen=True)
class ModulationSchedule:
    """Polarization modulation: angular frequency omega and depth profile theta(t)."""

    omega: float
    profile: Constant | ArccosSqrtRamp | PiecewiseLinear = field(
        default_factory=lambda: Constant(0.0)
    )

    def theta(self, t):
        return self.profile(t)

    def theta_dot(self, t, dt=None):
        """Central-difference d(theta)/dt, used by the adiabaticity diagnostic."""
        if dt is None:
            scale = getattr(self.profile, "T", None) or 1.0
            dt = 1e-6 * scale
        return (self.profile(t + dt) - self.profile(t - dt)) / (2 * dt)

    def kernel_args(self):
        """Encode the profile for the integrator backends.

        Returns (kind, p0, knot_times, knot_thetas).
        """
        kind = _PROFILE_KIND[type(self.profile)]
        if kind == 0:
            return kind, self.profile.theta, np.zeros(0), np.zeros(0)
        if kind == 1:
            return kind, self.profile.T, np.zeros(0), np.zeros(0)
        ts = np.array([p[0] for p in self.profile.points], dtype=float)
        ths = np.array([p[1] for p in self.profile.points], dtype=float)
        return kind, 0.0, ts, ths

"""Operators, polarization decomposition, and observable extraction.

Basis ordering everywhere: index 0 = |1>, 1 = |0>, 2 = |-1>, 3 = |e>.
Matrix elements are written rho_ab = <a|rho|b> with a, b state labels.

Sign conventions (fixed once, used consistently across the package):

* Stokes components of the modulated polarization
  e(t) = cos(theta) z + i e^{i w t} sin(theta) y are
  s1 = cos(2 theta), s2 = sin(2 theta) sin(w t), s3 = sin(2 theta) cos(w t),
  so that s3 is the circular (longitudinal-pumping) component and s2 the
  +-45-degree linear (tensor light shift) component.

* The rotating-frame drive carries the modulation phase e^{-i w t} on the
  |g><e| side: with this choice the dark superpositions
  d+- ~ cos(theta)|+-1> - (1/sqrt2) e^{i w t} sin(theta)|0> have exactly
  zero excitation amplitude at every instant, and d+ (d-) remains dark
  under free evolution at w = +omega_B (w = -omega_B).  The opposite phase
  choice would move the d+ resonance to -omega_B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ModulationSchedule, PhysicalParams

__all__ = [
    "IDX_P1",
    "IDX_0",
    "IDX_M1",
    "IDX_E",
    "KET_P1",
    "KET_0",
    "KET_M1",
    "KET_E",
    "FX",
    "FY",
    "FZ",
    "FZ2",
    "AZX",
    "AZY",
    "StokesComponents",
    "BlochMoments",
    "polarization_vector",
    "stokes",
    "hamiltonian_rotating",
    "hamiltonian_lab",
    "se_superop",
    "sd_superop",
    "moments_from_rho",
    "ground_maximally_mixed",
    "pure_state",
    "hermiticity_residual",
    "min_eigenvalue",
    "validate_density",
    "validate_ket",
]

IDX_P1, IDX_0, IDX_M1, IDX_E = 0, 1, 2, 3

_SQRT2 = math.sqrt(2.0)

KET_P1 = np.array([1, 0, 0, 0], dtype=complex)
KET_0 = np.array([0, 1, 0, 0], dtype=complex)
KET_M1 = np.array([0, 0, 1, 0], dtype=complex)
KET_E = np.array([0, 0, 0, 1], dtype=complex)

# Spin-1 operators on the ground block {|1>,|0>,|-1>}, zero on |e>.
FZ = np.diag([1.0, 0.0, -1.0, 0.0]).astype(complex)
FX = np.zeros((4, 4), dtype=complex)
FX[0, 1] = FX[1, 0] = FX[1, 2] = FX[2, 1] = 1.0 / _SQRT2
FY = np.zeros((4, 4), dtype=complex)
FY[0, 1] = FY[1, 2] = -1j / _SQRT2
FY[1, 0] = FY[2, 1] = 1j / _SQRT2

FZ2 = FZ @ FZ
AZX = FZ @ FX + FX @ FZ
AZY = FZ @ FY + FY @ FZ


@dataclass(frozen=True)
class StokesComponents:
    """Stokes vector of fully polarized light; s1^2 + s2^2 + s3^2 = 1."""

    s1: float
    s2: float
    s3: float

    def as_array(self):
        return np.array([self.s1, self.s2, self.s3])


@dataclass(frozen=True)
class BlochMoments:
    """Orientation (Fx, Fy, Fz) and alignment (Fzz, Azx, Azy) moments.

    Azx and Azy are the anticommutator expectations <{Fz,Fx}> and <{Fz,Fy}>.
    F+- = (Fx +- i Fy)/sqrt(2) are derived, not stored.
    """

    Fx: float
    Fy: float
    Fz: float
    Fzz: float
    Azx: float
    Azy: float

    def as_array(self):
        return np.array([self.Fx, self.Fy, self.Fz, self.Fzz, self.Azx, self.Azy])

    @classmethod
    def from_array(cls, m):
        return cls(*(float(x) for x in m))

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def orientation_norm(self):
        return math.sqrt(self.Fx**2 + self.Fy**2 + self.Fz**2)

    def check_bounds(self, tol=1e-6):
        """Spin-1 moment bounds: |<F>| <= 1 and 0 <= <Fz^2> <= 1."""
        if self.orientation_norm() ** 2 > 1.0 + tol:
            raise ValueError(f"orientation norm exceeds spin-1 bound: {self}")
        if not (-tol <= self.Fzz <= 1.0 + tol):
            raise ValueError(f"Fzz out of [0, 1]: {self}")


def polarization_vector(t, sched: ModulationSchedule):
    """Polarization amplitudes (e_y, e_z) of the modulated pump beam.

    e(t) = cos(theta) z + i e^{i omega t} sin(theta) y, unit norm.
    """
    th = sched.theta(t)
    return 1j * np.exp(1j * sched.omega * t) * np.sin(th), np.cos(th) + 0j


def stokes(t, sched: ModulationSchedule) -> StokesComponents:
    """Stokes decomposition of the pump polarization at time t."""
    ey, ez = polarization_vector(t, sched)
    s1 = abs(ez) ** 2 - abs(ey) ** 2
    cross = ey * np.conj(ez)
    return StokesComponents(float(s1), float(-2 * cross.real), float(2 * cross.imag))


def hamiltonian_rotating(t, p: PhysicalParams, sched: ModulationSchedule):
    """Rotating-frame Hamiltonian (resonant laser, omega_L = omega_0).

    H = omega_B (|1><1| - |-1><-1|)
        + Omega [cos(theta)|0><e|
                 + (1/sqrt2) sin(theta) e^{-i omega t} (|1><e| + |-1><e|) + h.c.]
    """
    th = sched.theta(t)
    H = np.zeros((4, 4), dtype=complex)
    H[IDX_P1, IDX_P1] = p.omega_B
    H[IDX_M1, IDX_M1] = -p.omega_B
    H[IDX_0, IDX_E] = p.Omega * np.cos(th)
    drive = p.Omega * np.sin(th) / _SQRT2 * np.exp(-1j * sched.omega * t)
    H[IDX_P1, IDX_E] = drive
    H[IDX_M1, IDX_E] = drive
    return H + H.conj().T - np.diag(H.diagonal())


def hamiltonian_lab(t, p: PhysicalParams, sched: ModulationSchedule, omega_L, omega_0):
    """Lab-frame Hamiltonian with explicit optical phases.

    Transforming with U = exp(i omega_L t |e><e|) at omega_L = omega_0
    reproduces :func:`hamiltonian_rotating`.
    """
    th = sched.theta(t)
    H = np.zeros((4, 4), dtype=complex)
    H[IDX_E, IDX_E] = omega_0
    H[IDX_P1, IDX_P1] = p.omega_B
    H[IDX_M1, IDX_M1] = -p.omega_B
    H[IDX_0, IDX_E] = p.Omega * np.cos(th) * np.exp(1j * omega_L * t)
    drive = p.Omega * np.sin(th) / _SQRT2 * np.exp(1j * (omega_L - sched.omega) * t)
    H[IDX_P1, IDX_E] = drive
    H[IDX_M1, IDX_E] = drive
    return H + H.conj().T - np.diag(H.diagonal())


def se_superop(rho, gamma_e):
    """Spontaneous-emission contribution to d(rho)/dt.

    The excited population decays at gamma_e, feeding each ground state at
    gamma_e/3; optical coherences decay at gamma_e/2; ground-ground
    coherences are untouched.  Traceless for every input.
    """
    out = np.zeros((4, 4), dtype=complex)
    ree = rho[IDX_E, IDX_E]
    out[IDX_P1, IDX_P1] = out[IDX_0, IDX_0] = out[IDX_M1, IDX_M1] = gamma_e * ree / 3
    out[IDX_E, IDX_E] = -gamma_e * ree
    for g in (IDX_P1, IDX_0, IDX_M1):
        out[g, IDX_E] = -0.5 * gamma_e * rho[g, IDX_E]
        out[IDX_E, g] = -0.5 * gamma_e * rho[IDX_E, g]
    return out


def sd_superop(rho, gamma):
    """Spin-destruction contribution to d(rho)/dt on the ground manifold.

    Implements the S-operator Lindblad term entrywise, including the
    constant feed terms (1/8, 1/4, 1/8) on the diagonal, which assume unit
    ground-state trace.  With excited population present the total trace
    drifts at (gamma/2)(1 - Tr_ground rho); this drift is a property of the
    model and is monitored, not corrected, by the integrator.
    """
    r = rho
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = -r[0, 0] + 0.5 * r[1, 1] + 0.125
    out[0, 1] = -1.5 * r[0, 1] + 0.5 * r[1, 2]
    out[0, 2] = -2.0 * r[0, 2]
    out[1, 0] = -1.5 * r[1, 0] + 0.5 * r[2, 1]
    out[1, 1] = -1.5 * r[1, 1] + 0.5 * (r[0, 0] + r[2, 2]) + 0.25
    out[1, 2] = -1.5 * r[1, 2] + 0.5 * r[0, 1]
    out[2, 0] = -2.0 * r[2, 0]
    out[2, 1] = -1.5 * r[2, 1] + 0.5 * r[1, 0]
    out[2, 2] = -r[2, 2] + 0.5 * r[1, 1] + 0.125
    return gamma * out


def moments_from_rho(rho) -> BlochMoments:
    """Operator-trace extraction of the Bloch moments from a density matrix."""
    return BlochMoments(
        Fx=float(np.trace(rho @ FX).real),
        Fy=float(np.trace(rho @ FY).real),
        Fz=float(np.trace(rho @ FZ).real),
        Fzz=float(np.trace(rho @ FZ2).real),
        Azx=float(np.trace(rho @ AZX).real),
        Azy=float(np.trace(rho @ AZY).real),
    )


def ground_maximally_mixed():
    """Unpolarized vapor: rho = (|1><1| + |0><0| + |-1><-1|)/3."""
    return np.diag([1 / 3, 1 / 3, 1 / 3, 0]).astype(complex)


def pure_state(ket):
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def hermiticity_residual(rho):
    return float(np.max(np.abs(rho - rho.conj().T)))


def min_eigenvalue(rho):
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())


def validate_density(rho, herm_tol=1e-12, eig_tol=1e-8, trace_tol=1e-9):
    """Check the density-matrix invariants; raises ValueError on violation."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("density matrix must be 4x4")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError("density matrix has non-finite entries")
    if hermiticity_residual(rho) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ValueError("density matrix trace differs from 1")
    if min_eigenvalue(rho) < -eig_tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def validate_ket(ket, tol=1e-12):
    ket = np.asarray(ket, dtype=complex)
    if ket.shape != (4,):
        raise ValueError("ket must have 4 amplitudes")
    if abs(np.linalg.norm(ket) - 1.0) > tol:
        raise ValueError("ket is not normalized")
    return ket

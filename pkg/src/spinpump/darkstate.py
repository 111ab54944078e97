"""CPT dark states of the two Lambda systems and related diagnostics.

The modulated pump couples two Lambda systems, {|1>,|e>,|0>} and
{|-1>,|e>,|0>}.  Each has an instantaneous dark superposition

    d+-(theta, t) ~ cos(theta)|+-1> - (1/sqrt2) e^{i omega t} sin(theta)|0>,

with zero excitation amplitude at every instant.  Under free Zeeman
evolution d+ remains dark at omega = +omega_B and d- at omega = -omega_B
(negative modulation frequencies are legal inputs throughout).
"""

from __future__ import annotations

import math

import numpy as np

from .operators import IDX_0, IDX_E, IDX_M1, IDX_P1, hamiltonian_rotating
from .params import ModulationSchedule, PhysicalParams

__all__ = ["dark_state", "pump_coupling", "fidelity", "depopulation_rate"]


def dark_state(theta, t, omega, branch="plus"):
    """Normalized dark state of the Lambda_+ or Lambda_- system.

    The amplitude on |+-1> is real positive (global phase convention),
    which keeps fidelity time series stable.
    """
    if not (0.0 <= theta <= math.pi / 2):
        raise ValueError("theta must lie in [0, pi/2]")
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    ket = np.zeros(4, dtype=complex)
    idx = IDX_P1 if branch == "plus" else IDX_M1
    ket[idx] = math.cos(theta)
    ket[IDX_0] = -math.sin(theta) / math.sqrt(2) * np.exp(1j * omega * t)
    return ket / np.linalg.norm(ket)


def pump_coupling(ket, t, p: PhysicalParams, sched: ModulationSchedule):
    """Excitation amplitude <e|H_rot(t)|ket>; zero for the dark states."""
    return complex(hamiltonian_rotating(t, p, sched)[IDX_E] @ ket)


def fidelity(rho, ket):
    """<ket|rho|ket>, clipped to real."""
    return float(np.real(np.conj(ket) @ rho @ ket))


def depopulation_rate(theta, p: PhysicalParams):
    """Gamma sin^2(theta): the scale of the rate at which the off-resonant
    dark state (the bright state of the pumped Lambda system) is emptied.
    A scale, not an exact rate."""
    if not (0.0 <= theta <= math.pi / 2):
        raise ValueError("theta must lie in [0, pi/2]")
    return p.Gamma * math.sin(theta) ** 2

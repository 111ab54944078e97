import numpy as np
import pytest

from spinpump.darkstate import dark_state, depopulation_rate, fidelity, pump_coupling
from spinpump.operators import KET_0, KET_M1, KET_P1, pure_state
from spinpump.params import Constant, ModulationSchedule, PhysicalParams


def test_dark_state_limits():
    # theta = 0: all population in the stretched state; theta = pi/2: in |0>
    assert np.allclose(dark_state(0.0, 0.3, 2.0), KET_P1)
    assert np.allclose(dark_state(0.0, 0.3, 2.0, branch="minus"), KET_M1)
    d = dark_state(np.pi / 2, 0.0, 2.0)
    assert abs(abs(np.vdot(KET_0, d)) - 1.0) < 1e-12


def test_dark_state_normalized_and_phase_convention():
    rng = np.random.default_rng(5)
    for _ in range(50):
        th = rng.uniform(0, np.pi / 2)
        t = rng.uniform(0, 20)
        d = dark_state(th, t, 1.3)
        assert abs(np.linalg.norm(d) - 1) < 1e-12
        assert d[0].imag == 0 and d[0].real >= 0


def test_pump_coupling_vanishes_for_dark_states():
    p = PhysicalParams(omega_B=0.7, Omega=0.23, gamma_e=1.0, gamma=0.0)
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        th = rng.uniform(0, np.pi / 2)
        t = rng.uniform(0, 50)
        sched = ModulationSchedule(omega=1.3, profile=Constant(th))
        for branch in ("plus", "minus"):
            amp = pump_coupling(dark_state(th, t, 1.3, branch), t, p, sched)
            worst = max(worst, abs(amp))
    assert worst < 1e-12


def test_bright_state_couples():
    # the orthogonal (bright) superposition has coupling Omega at theta=pi/4
    p = PhysicalParams(omega_B=0.0, Omega=0.4, gamma_e=1.0, gamma=0.0)
    th = np.pi / 4
    sched = ModulationSchedule(omega=0.0, profile=Constant(th))
    bright = np.zeros(4, dtype=complex)
    bright[1] = np.cos(th)  # |0> amplitude
    bright[0] = np.sin(th) / np.sqrt(2)
    bright /= np.linalg.norm(bright)
    assert abs(pump_coupling(bright, 0.0, p, sched)) > 0.1 * p.Omega


def test_fidelity():
    d = dark_state(0.3, 0.0, 1.0)
    assert fidelity(pure_state(d), d) == pytest.approx(1.0)
    assert fidelity(pure_state(KET_M1), d) == pytest.approx(0.0, abs=1e-15)


def test_depopulation_rate():
    p = PhysicalParams(omega_B=0.0, Omega=0.1, gamma_e=1.0, gamma=0.0)
    assert depopulation_rate(0.0, p) == 0.0
    assert depopulation_rate(np.pi / 2, p) == pytest.approx(p.Gamma)
    with pytest.raises(ValueError):
        depopulation_rate(2.0, p)


def test_dark_state_input_validation():
    with pytest.raises(ValueError):
        dark_state(-0.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        dark_state(0.3, 0.0, 1.0, branch="sideways")

"""Pure-numpy integrator backend.

Implements the same Dormand-Prince 5(4) adaptive pair and classical
fixed-step RK4 as the compiled core (`_core.pyx`), with identical
coefficients and step control, so both backends produce closely matching
trajectories.  Used when the Cython extension is unavailable or when
SPINPUMP_BACKEND=python is set.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

STATUS_OK = 0
STATUS_UNDERFLOW = 1

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

_MIN_STEP_FRAC = 1e-14


def _theta_of(t, kind, p0, ts, ths):
    if kind == 0:
        return p0
    if kind == 1:
        x = min(max(t / p0, 0.0), 1.0)
        return math.acos(math.sqrt(x))
    return float(np.interp(t, ts, ths))


def dp54(rhs, y0, t_grid, rtol, atol, max_step, fixed_dt=0.0):
    """Integrate dy/dt = rhs(t, y) over t_grid, returning y at each grid time.

    y is a flat complex vector.  fixed_dt > 0 selects deterministic RK4
    with steps clipped to each sample boundary.  Returns
    (ys, status, t_fail, n_steps).
    """
    y = np.array(y0, dtype=complex)
    n = len(t_grid)
    ys = np.empty((n, y.size), dtype=complex)
    ys[0] = y
    nsteps = 0

    if fixed_dt > 0.0:
        for i in range(n - 1):
            t, t_end = t_grid[i], t_grid[i + 1]
            eps = 1e-12 * max(1.0, abs(t_end))
            while t_end - t > eps:
                h = min(fixed_dt, t_end - t)
                k1 = rhs(t, y)
                k2 = rhs(t + h / 2, y + h / 2 * k1)
                k3 = rhs(t + h / 2, y + h / 2 * k2)
                k4 = rhs(t + h, y + h * k3)
                y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
                nsteps += 1
            ys[i + 1] = y
        return ys, STATUS_OK, 0.0, nsteps

    h = max_step
    k = [None] * 7
    for i in range(n - 1):
        t, t_end = t_grid[i], t_grid[i + 1]
        eps = 1e-12 * max(1.0, abs(t_end))
        while t_end - t > eps:
            h = min(h, max_step, t_end - t)
            if h < _MIN_STEP_FRAC * max(1.0, abs(t)):
                return ys, STATUS_UNDERFLOW, t, nsteps
            k[0] = rhs(t, y)
            for s in range(1, 7):
                dy = sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0.0)
                k[s] = rhs(t + _C[s] * h, y + h * dy)
            y5 = y + h * sum(b * ki for b, ki in zip(_B5, k) if b != 0.0)
            err_vec = h * sum(e * ki for e, ki in zip(_E, k) if e != 0.0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
            err = math.sqrt(float(np.mean((np.abs(err_vec) / scale) ** 2)))
            nsteps += 1
            if err <= 1.0:
                t += h
                y = y5
                h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
            else:
                h *= max(0.2, 0.9 * err**-0.2)
        ys[i + 1] = y
    return ys, STATUS_OK, 0.0, nsteps


def _master_rhs_factory(omega_B, Omega, gamma_e, gamma, mod_omega, kind, p0, ts, ths):
    third = gamma_e / 3.0
    half = 0.5 * gamma_e
    s2 = math.sqrt(2.0)

    def rhs(t, y):
        rho = y.reshape(4, 4)
        th = _theta_of(t, kind, p0, ts, ths)
        H = np.zeros((4, 4), dtype=complex)
        H[0, 0] = omega_B
        H[2, 2] = -omega_B
        H[1, 3] = Omega * math.cos(th)
        d = Omega * math.sin(th) / s2 * np.exp(-1j * mod_omega * t)
        H[0, 3] = d
        H[2, 3] = d
        H[3, 1] = H[1, 3].conjugate()
        H[3, 0] = d.conjugate()
        H[3, 2] = d.conjugate()

        out = -1j * (H @ rho - rho @ H)

        ree = rho[3, 3]
        out[0, 0] += third * ree
        out[1, 1] += third * ree
        out[2, 2] += third * ree
        out[3, 3] -= gamma_e * ree
        out[0, 3] -= half * rho[0, 3]
        out[1, 3] -= half * rho[1, 3]
        out[2, 3] -= half * rho[2, 3]
        out[3, 0] -= half * rho[3, 0]
        out[3, 1] -= half * rho[3, 1]
        out[3, 2] -= half * rho[3, 2]

        if gamma != 0.0:
            out[0, 0] += gamma * (-rho[0, 0] + 0.5 * rho[1, 1] + 0.125)
            out[0, 1] += gamma * (-1.5 * rho[0, 1] + 0.5 * rho[1, 2])
            out[0, 2] += gamma * (-2.0 * rho[0, 2])
            out[1, 0] += gamma * (-1.5 * rho[1, 0] + 0.5 * rho[2, 1])
            out[1, 1] += gamma * (-1.5 * rho[1, 1] + 0.5 * (rho[0, 0] + rho[2, 2]) + 0.25)
            out[1, 2] += gamma * (-1.5 * rho[1, 2] + 0.5 * rho[0, 1])
            out[2, 0] += gamma * (-2.0 * rho[2, 0])
            out[2, 1] += gamma * (-1.5 * rho[2, 1] + 0.5 * rho[1, 0])
            out[2, 2] += gamma * (-rho[2, 2] + 0.5 * rho[1, 1] + 0.125)
        return out.reshape(16)

    return rhs


def integrate_master_grid(
    rho0,
    t_grid,
    omega_B,
    Omega,
    gamma_e,
    gamma,
    mod_omega,
    sched_kind,
    sched_p0,
    sched_ts,
    sched_thetas,
    rtol,
    atol,
    max_step,
    fixed_dt,
):
    """Master-equation trajectory sampled on t_grid; returns (rhos, status, t_fail, n_steps)."""
    rhs = _master_rhs_factory(
        omega_B, Omega, gamma_e, gamma, mod_omega, sched_kind, sched_p0, sched_ts, sched_thetas
    )
    ys, status, t_fail, nsteps = dp54(
        rhs, np.asarray(rho0, dtype=complex).reshape(16), np.asarray(t_grid, float),
        rtol, atol, max_step, fixed_dt,
    )
    return ys.reshape(-1, 4, 4), status, t_fail, nsteps


def _bloch_rhs_factory(
    omega_B, Gamma, gamma, mod_omega, kind, p0, ts, ths,
    simplified, fz_sign, inc_fminus, inc_align,
):
    def rhs(t, y):
        Fx, Fy, Fz, Fzz, Azx, Azy = y.real
        th = _theta_of(t, kind, p0, ts, ths)
        c2 = math.cos(th) ** 2
        s2 = math.sin(th) ** 2
        s2t = math.sin(2 * th)
        cwt = math.cos(mod_omega * t)
        swt = math.sin(mod_omega * t)
        drive = Gamma * s2t

        if simplified:
            Fzz = 1.0
        gperp = gamma + Gamma * (2 * c2 if simplified else 2 * c2 + s2)

        dFx = -gperp * Fx - omega_B * Fy - drive * cwt * (2.0 - Fzz)
        dFy = -gperp * Fy + omega_B * Fx - drive * swt * Fz
        if inc_fminus:
            dFx -= Gamma * s2 * Fx
            dFy += Gamma * s2 * Fy
        dFz = -(gamma + 2 * Gamma * s2) * Fz - drive * (swt * Fy + fz_sign * cwt * Azx)
        dAzx = -2 * (gamma + Gamma) * Azx - omega_B * Azy - drive * cwt * Fz
        dAzy = -2 * (gamma + Gamma) * Azy + omega_B * Azx - drive * swt * (2.0 - Fzz)
        if simplified:
            dFzz = 0.0
        else:
            dFzz = (8 / 3 * Gamma * c2 + 1.5 * gamma) - (
                2 * gamma + 2 / 3 * Gamma * (4 * c2 + s2)
            ) * Fzz
            if inc_align:
                dFzz += (Gamma / 3) * s2t * (cwt * Fx + swt * Azy)
        return np.array([dFx, dFy, dFz, dFzz, dAzx, dAzy], dtype=complex)

    return rhs


def integrate_bloch_grid(
    m0,
    t_grid,
    omega_B,
    Gamma,
    gamma,
    mod_omega,
    sched_kind,
    sched_p0,
    sched_ts,
    sched_thetas,
    simplified,
    fz_sign,
    inc_fminus,
    inc_align,
    rtol,
    atol,
    max_step,
    fixed_dt,
):
    """Reduced-model trajectory sampled on t_grid; returns (moments, status, t_fail, n_steps)."""
    rhs = _bloch_rhs_factory(
        omega_B, Gamma, gamma, mod_omega, sched_kind, sched_p0, sched_ts, sched_thetas,
        simplified, fz_sign, inc_fminus, inc_align,
    )
    m0 = np.asarray(m0, dtype=complex).copy()
    if simplified:
        m0[3] = 1.0
    ys, status, t_fail, nsteps = dp54(
        rhs, m0, np.asarray(t_grid, float), rtol, atol, max_step, fixed_dt
    )
    out = ys.real.copy()
    if simplified:
        out[:, 3] = 1.0
    return out, status, t_fail, nsteps

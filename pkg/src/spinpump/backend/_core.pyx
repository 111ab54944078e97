# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled integrator core.

Same Dormand-Prince 5(4) pair and fixed-step RK4 as the numpy fallback
(`_fallback.py`), specialized for the 4x4 master equation and the 6-moment
reduced model.  Keep the two implementations in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, cos, fabs, fmax, fmin, sin, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

STATUS_OK = 0
STATUS_UNDERFLOW = 1

cdef int _ST_OK = 0
cdef int _ST_UNDERFLOW = 1
cdef double _MIN_STEP_FRAC = 1e-14
cdef double _SQRT2 = sqrt(2.0)

cdef struct Params:
    double omega_B, Omega, gamma_e, gamma, Gamma, mod_omega
    int sched_kind
    double sched_p0
    int n_knots
    double* kts
    double* kths
    int simplified, inc_fminus, inc_align
    double fz_sign

ctypedef void (*rhs_t)(double, double complex*, double complex*, Params*) noexcept nogil


cdef inline double _theta_of(double t, Params* P) noexcept nogil:
    cdef double x
    cdef int i
    if P.sched_kind == 0:
        return P.sched_p0
    if P.sched_kind == 1:
        x = t / P.sched_p0
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
        return acos(sqrt(x))
    # piecewise linear, clamped at the ends
    if t <= P.kts[0]:
        return P.kths[0]
    if t >= P.kts[P.n_knots - 1]:
        return P.kths[P.n_knots - 1]
    i = 1
    while P.kts[i] < t:
        i += 1
    return P.kths[i - 1] + (P.kths[i] - P.kths[i - 1]) * (t - P.kts[i - 1]) / (
        P.kts[i] - P.kts[i - 1]
    )


cdef void _master_rhs(double t, double complex* y, double complex* out, Params* P) noexcept nogil:
    # y is rho, row-major 4x4: y[4*i + j] = <i|rho|j>
    cdef double th = _theta_of(t, P)
    cdef double wt = P.mod_omega * t
    cdef double complex H[16]
    cdef double complex acc
    cdef int i, j, k
    cdef double complex d = (
        P.Omega * sin(th) / _SQRT2 * (cos(wt) - 1j * sin(wt))
    )
    for i in range(16):
        H[i] = 0
    H[0] = P.omega_B
    H[10] = -P.omega_B
    H[7] = P.Omega * cos(th)       # |0><e|
    H[3] = d                        # |1><e|
    H[11] = d                       # |-1><e|
    H[13] = H[7].conjugate()
    H[12] = d.conjugate()
    H[14] = d.conjugate()

    # -i (H rho - rho H)
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc += H[4 * i + k] * y[4 * k + j] - y[4 * i + k] * H[4 * k + j]
            out[4 * i + j] = -1j * acc

    # spontaneous emission
    cdef double complex ree = y[15]
    cdef double third = P.gamma_e / 3.0
    cdef double half = 0.5 * P.gamma_e
    out[0] += third * ree
    out[5] += third * ree
    out[10] += third * ree
    out[15] -= P.gamma_e * ree
    out[3] -= half * y[3]
    out[7] -= half * y[7]
    out[11] -= half * y[11]
    out[12] -= half * y[12]
    out[13] -= half * y[13]
    out[14] -= half * y[14]

    # spin destruction (ground block only)
    cdef double g = P.gamma
    if g != 0.0:
        out[0] += g * (-y[0] + 0.5 * y[5] + 0.125)
        out[1] += g * (-1.5 * y[1] + 0.5 * y[6])
        out[2] += g * (-2.0 * y[2])
        out[4] += g * (-1.5 * y[4] + 0.5 * y[9])
        out[5] += g * (-1.5 * y[5] + 0.5 * (y[0] + y[10]) + 0.25)
        out[6] += g * (-1.5 * y[6] + 0.5 * y[1])
        out[8] += g * (-2.0 * y[8])
        out[9] += g * (-1.5 * y[9] + 0.5 * y[4])
        out[10] += g * (-y[10] + 0.5 * y[5] + 0.125)


cdef void _bloch_rhs(double t, double complex* y, double complex* out, Params* P) noexcept nogil:
    cdef double Fx = y[0].real, Fy = y[1].real, Fz = y[2].real
    cdef double Fzz = y[3].real, Azx = y[4].real, Azy = y[5].real
    cdef double th = _theta_of(t, P)
    cdef double c2 = cos(th) * cos(th)
    cdef double s2 = sin(th) * sin(th)
    cdef double s2t = sin(2.0 * th)
    cdef double cwt = cos(P.mod_omega * t)
    cdef double swt = sin(P.mod_omega * t)
    cdef double drive = P.Gamma * s2t
    cdef double gperp, dFx, dFy, dFz, dFzz, dAzx, dAzy

    if P.simplified:
        Fzz = 1.0
        gperp = P.gamma + P.Gamma * 2.0 * c2
    else:
        gperp = P.gamma + P.Gamma * (2.0 * c2 + s2)

    dFx = -gperp * Fx - P.omega_B * Fy - drive * cwt * (2.0 - Fzz)
    dFy = -gperp * Fy + P.omega_B * Fx - drive * swt * Fz
    if P.inc_fminus:
        dFx -= P.Gamma * s2 * Fx
        dFy += P.Gamma * s2 * Fy
    dFz = -(P.gamma + 2.0 * P.Gamma * s2) * Fz - drive * (swt * Fy + P.fz_sign * cwt * Azx)
    dAzx = -2.0 * (P.gamma + P.Gamma) * Azx - P.omega_B * Azy - drive * cwt * Fz
    dAzy = -2.0 * (P.gamma + P.Gamma) * Azy + P.omega_B * Azx - drive * swt * (2.0 - Fzz)
    if P.simplified:
        dFzz = 0.0
    else:
        dFzz = (8.0 / 3.0 * P.Gamma * c2 + 1.5 * P.gamma) - (
            2.0 * P.gamma + 2.0 / 3.0 * P.Gamma * (4.0 * c2 + s2)
        ) * Fzz
        if P.inc_align:
            dFzz += (P.Gamma / 3.0) * s2t * (cwt * Fx + swt * Azy)

    out[0] = dFx
    out[1] = dFy
    out[2] = dFz
    out[3] = dFzz
    out[4] = dAzx
    out[5] = dAzy


# Dormand-Prince 5(4) tableau (flattened lower triangle)
cdef double _C[7]
cdef double _A[21]
cdef double _B5[7]
cdef double _E[7]
_C[0] = 0.0; _C[1] = 1.0 / 5; _C[2] = 3.0 / 10; _C[3] = 4.0 / 5
_C[4] = 8.0 / 9; _C[5] = 1.0; _C[6] = 1.0
_A[0] = 1.0 / 5
_A[1] = 3.0 / 40; _A[2] = 9.0 / 40
_A[3] = 44.0 / 45; _A[4] = -56.0 / 15; _A[5] = 32.0 / 9
_A[6] = 19372.0 / 6561; _A[7] = -25360.0 / 2187; _A[8] = 64448.0 / 6561; _A[9] = -212.0 / 729
_A[10] = 9017.0 / 3168; _A[11] = -355.0 / 33; _A[12] = 46732.0 / 5247
_A[13] = 49.0 / 176; _A[14] = -5103.0 / 18656
_A[15] = 35.0 / 384; _A[16] = 0.0; _A[17] = 500.0 / 1113
_A[18] = 125.0 / 192; _A[19] = -2187.0 / 6784; _A[20] = 11.0 / 84
_B5[0] = 35.0 / 384; _B5[1] = 0.0; _B5[2] = 500.0 / 1113; _B5[3] = 125.0 / 192
_B5[4] = -2187.0 / 6784; _B5[5] = 11.0 / 84; _B5[6] = 0.0
_E[0] = _B5[0] - 5179.0 / 57600; _E[1] = 0.0; _E[2] = _B5[2] - 7571.0 / 16695
_E[3] = _B5[3] - 393.0 / 640; _E[4] = _B5[4] + 92097.0 / 339200
_E[5] = _B5[5] - 187.0 / 2100; _E[6] = -1.0 / 40


cdef int _integrate(
    rhs_t rhs,
    int n,
    double complex* y,
    double[:] t_grid,
    double complex[:, :] out,
    double rtol,
    double atol,
    double max_step,
    double fixed_dt,
    Params* P,
    double* t_fail,
    long* nsteps,
) noexcept nogil:
    cdef double complex k[7][16]
    cdef double complex ytmp[16]
    cdef double complex y5[16]
    cdef double complex errv
    cdef int n_samples = t_grid.shape[0]
    cdef int i, s, j, m, ai
    cdef double t, t_end, h, err, scale, factor, mag, eps

    for j in range(n):
        out[0, j] = y[j]

    if fixed_dt > 0.0:
        # classical RK4, deterministic
        for i in range(n_samples - 1):
            t = t_grid[i]
            t_end = t_grid[i + 1]
            eps = 1e-12 * fmax(1.0, fabs(t_end))
            while t_end - t > eps:
                h = fixed_dt
                if t + h > t_end:
                    h = t_end - t
                rhs(t, y, k[0], P)
                for j in range(n):
                    ytmp[j] = y[j] + 0.5 * h * k[0][j]
                rhs(t + 0.5 * h, ytmp, k[1], P)
                for j in range(n):
                    ytmp[j] = y[j] + 0.5 * h * k[1][j]
                rhs(t + 0.5 * h, ytmp, k[2], P)
                for j in range(n):
                    ytmp[j] = y[j] + h * k[2][j]
                rhs(t + h, ytmp, k[3], P)
                for j in range(n):
                    y[j] = y[j] + (h / 6.0) * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j])
                t += h
                nsteps[0] += 1
            for j in range(n):
                out[i + 1, j] = y[j]
        return _ST_OK

    h = max_step
    for i in range(n_samples - 1):
        t = t_grid[i]
        t_end = t_grid[i + 1]
        eps = 1e-12 * fmax(1.0, fabs(t_end))
        while t_end - t > eps:
            if h > max_step:
                h = max_step
            if t + h > t_end:
                h = t_end - t
            if h < _MIN_STEP_FRAC * fmax(1.0, fabs(t)):
                t_fail[0] = t
                return _ST_UNDERFLOW
            rhs(t, y, k[0], P)
            ai = 0
            for s in range(1, 7):
                for j in range(n):
                    ytmp[j] = y[j]
                for m in range(s):
                    if _A[ai + m] != 0.0:
                        for j in range(n):
                            ytmp[j] = ytmp[j] + h * _A[ai + m] * k[m][j]
                ai += s
                rhs(t + _C[s] * h, ytmp, k[s], P)
            err = 0.0
            for j in range(n):
                y5[j] = y[j]
                errv = 0
                for s in range(7):
                    if _B5[s] != 0.0:
                        y5[j] = y5[j] + h * _B5[s] * k[s][j]
                    if _E[s] != 0.0:
                        errv = errv + h * _E[s] * k[s][j]
                mag = fmax(abs(y[j]), abs(y5[j]))
                scale = atol + rtol * mag
                err += (abs(errv) / scale) ** 2
            err = sqrt(err / n)
            nsteps[0] += 1
            if err <= 1.0:
                t += h
                for j in range(n):
                    y[j] = y5[j]
                if err > 0.0:
                    factor = 0.9 * err ** -0.2
                    if factor > 5.0:
                        factor = 5.0
                    elif factor < 0.2:
                        factor = 0.2
                else:
                    factor = 5.0
                h *= factor
            else:
                factor = 0.9 * err ** -0.2
                if factor < 0.2:
                    factor = 0.2
                h *= factor
        for j in range(n):
            out[i + 1, j] = y[j]
    return _ST_OK


cdef void _fill_params(
    Params* P,
    double omega_B, double Omega, double gamma_e, double gamma, double Gamma,
    double mod_omega, int sched_kind, double sched_p0,
    double[:] kts, double[:] kths,
):
    P.omega_B = omega_B
    P.Omega = Omega
    P.gamma_e = gamma_e
    P.gamma = gamma
    P.Gamma = Gamma
    P.mod_omega = mod_omega
    P.sched_kind = sched_kind
    P.sched_p0 = sched_p0
    P.n_knots = kts.shape[0]
    P.kts = &kts[0] if kts.shape[0] > 0 else NULL
    P.kths = &kths[0] if kths.shape[0] > 0 else NULL
    P.simplified = 0
    P.inc_fminus = 0
    P.inc_align = 0
    P.fz_sign = 1.0


def integrate_master_grid(
    rho0,
    t_grid,
    double omega_B,
    double Omega,
    double gamma_e,
    double gamma,
    double mod_omega,
    int sched_kind,
    double sched_p0,
    sched_ts,
    sched_thetas,
    double rtol,
    double atol,
    double max_step,
    double fixed_dt,
):
    """Master-equation trajectory sampled on t_grid; returns (rhos, status, t_fail, n_steps)."""
    cdef cnp.ndarray[double complex, ndim=1] y = np.ascontiguousarray(
        np.asarray(rho0, dtype=complex).reshape(16)
    ).copy()
    cdef double[:] grid = np.ascontiguousarray(t_grid, dtype=float)
    cdef double[:] kts = np.ascontiguousarray(sched_ts, dtype=float)
    cdef double[:] kths = np.ascontiguousarray(sched_thetas, dtype=float)
    out_arr = np.empty((grid.shape[0], 16), dtype=complex)
    cdef double complex[:, :] out = out_arr
    cdef Params P
    _fill_params(&P, omega_B, Omega, gamma_e, gamma, 0.0, mod_omega,
                 sched_kind, sched_p0, kts, kths)
    cdef double t_fail = 0.0
    cdef long nsteps = 0
    cdef int status
    with nogil:
        status = _integrate(_master_rhs, 16, &y[0], grid, out, rtol, atol,
                            max_step, fixed_dt, &P, &t_fail, &nsteps)
    return out_arr.reshape(-1, 4, 4), status, t_fail, nsteps


def integrate_bloch_grid(
    m0,
    t_grid,
    double omega_B,
    double Gamma,
    double gamma,
    double mod_omega,
    int sched_kind,
    double sched_p0,
    sched_ts,
    sched_thetas,
    int simplified,
    double fz_sign,
    int inc_fminus,
    int inc_align,
    double rtol,
    double atol,
    double max_step,
    double fixed_dt,
):
    """Reduced-model trajectory sampled on t_grid; returns (moments, status, t_fail, n_steps)."""
    m0 = np.asarray(m0, dtype=complex).copy()
    if simplified:
        m0[3] = 1.0
    cdef cnp.ndarray[double complex, ndim=1] y = np.ascontiguousarray(m0)
    cdef double[:] grid = np.ascontiguousarray(t_grid, dtype=float)
    cdef double[:] kts = np.ascontiguousarray(sched_ts, dtype=float)
    cdef double[:] kths = np.ascontiguousarray(sched_thetas, dtype=float)
    out_arr = np.empty((grid.shape[0], 6), dtype=complex)
    cdef double complex[:, :] out = out_arr
    cdef Params P
    _fill_params(&P, omega_B, 0.0, 0.0, gamma, Gamma, mod_omega,
                 sched_kind, sched_p0, kts, kths)
    P.simplified = simplified
    P.inc_fminus = inc_fminus
    P.inc_align = inc_align
    P.fz_sign = fz_sign
    cdef double t_fail = 0.0
    cdef long nsteps = 0
    cdef int status
    with nogil:
        status = _integrate(_bloch_rhs, 6, &y[0], grid, out, rtol, atol,
                            max_step, fixed_dt, &P, &t_fail, &nsteps)
    res = out_arr.real.copy()
    if simplified:
        res[:, 3] = 1.0
    return res, status, t_fail, nsteps

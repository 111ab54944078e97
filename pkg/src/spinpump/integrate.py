"""Master-equation integration: the numerical oracle of the package.

Integrates d(rho)/dt = -i[H_rot(t), rho] + SE + SD on a user-supplied
sample grid with an embedded Dormand-Prince 5(4) pair (default) or a
fixed-step classical RK4 for deterministic regression runs.  The heavy
stepping lives in :mod:`spinpump.backend`; this module owns the contract:
validation, re-symmetrization at sample points, diagnostics, and the
trace-drift policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import backend
from .darkstate import dark_state, fidelity
from .operators import (
    AZX,
    AZY,
    FX,
    FY,
    FZ,
    FZ2,
    IDX_E,
    hamiltonian_lab,
    hamiltonian_rotating,
    sd_superop,
    se_superop,
    validate_density,
)
from .params import ModulationSchedule, PhysicalParams

__all__ = [
    "IntegrationError",
    "IntegratorConfig",
    "Trajectory",
    "default_max_step",
    "liouville_rhs",
    "integrate_master",
    "integrate_master_lab",
    "excited_state_check",
    "sample_grid",
]

_MOMENT_OPS = np.stack([FX, FY, FZ, FZ2, AZX, AZY])


class IntegrationError(RuntimeError):
    """Integrator failure: step-size underflow or trace-drift policy violation."""


def default_max_step(p: PhysicalParams, sched: ModulationSchedule) -> float:
    """min(0.05 * 2pi / max(|omega|, |omega_B|, 1), 0.1 / gamma_e)."""
    fast = max(abs(sched.omega), abs(p.omega_B), 1.0)
    return min(0.05 * 2 * math.pi / fast, 0.1 / p.gamma_e)


def sample_grid(t0, t1, n):
    """Convenience: n strictly increasing sample times from t0 to t1."""
    return np.linspace(t0, t1, n)


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration controls.

    method is "adaptive" (embedded RK 5(4)) or "rk4" (fixed step, for
    deterministic goldens and convergence checks).  max_step defaults to
    :func:`default_max_step`; fixed_dt defaults to max_step for rk4.
    """

    sample_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 101))
    method: str = "adaptive"
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: Optional[float] = None
    fixed_dt: Optional[float] = None

    def __post_init__(self):
        grid = np.asarray(self.sample_grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("sample_grid must be strictly increasing with >= 2 points")
        object.__setattr__(self, "sample_grid", grid)
        if self.method not in ("adaptive", "rk4"):
            raise ValueError("method must be 'adaptive' or 'rk4'")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")

    def resolve_steps(self, p, sched):
        max_step = self.max_step if self.max_step is not None else default_max_step(p, sched)
        if self.method == "rk4":
            return max_step, (self.fixed_dt if self.fixed_dt is not None else max_step)
        return max_step, 0.0


@dataclass
class Trajectory:
    """Time series of Bloch moments plus per-sample diagnostics.

    moments has shape (n, 6) with columns (Fx, Fy, Fz, Fzz, Azx, Azy).
    For master-engine runs, rho holds the (re-symmetrized) density-matrix
    samples and the diagnostic arrays are filled; reduced-engine runs leave
    them as None/NaN.
    """

    times: np.ndarray
    moments: np.ndarray
    engine: str
    rho: Optional[np.ndarray] = None
    trace: Optional[np.ndarray] = None
    rho_ee: Optional[np.ndarray] = None
    herm_residual: Optional[np.ndarray] = None
    fid_dplus: Optional[np.ndarray] = None
    fid_dminus: Optional[np.ndarray] = None
    n_steps: int = 0
    backend_name: str = backend.BACKEND_NAME

    @property
    def Fx(self):
        return self.moments[:, 0]

    @property
    def Fy(self):
        return self.moments[:, 1]

    @property
    def Fz(self):
        return self.moments[:, 2]

    @property
    def Fzz(self):
        return self.moments[:, 3]

    @property
    def Azx(self):
        return self.moments[:, 4]

    @property
    def Azy(self):
        return self.moments[:, 5]

    def transverse(self):
        return np.hypot(self.Fx, self.Fy)

    def moment_bound_violation(self, tol=1e-6):
        """Largest violation of the spin-1 moment bounds along the trajectory
        (0.0 when all bounds hold)."""
        r2 = self.Fx**2 + self.Fy**2 + self.Fz**2
        v = max(float(np.max(r2) - 1.0), float(np.max(self.Fzz) - 1.0), float(-np.min(self.Fzz)))
        return max(0.0, v) if v > tol else 0.0


def liouville_rhs(t, rho, p: PhysicalParams, sched: ModulationSchedule):
    """Right-hand side of the Liouville equation (reference implementation).

    The compiled backend inlines the same expression; this version is used
    by tests and by the lab-frame cross-check.
    """
    rho = np.asarray(rho, dtype=complex)
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError("non-finite entries in rho")
    H = hamiltonian_rotating(t, p, sched)
    return -1j * (H @ rho - rho @ H) + se_superop(rho, p.gamma_e) + sd_superop(rho, p.gamma)


def _moments_of(rhos):
    # Tr(rho O) for the six moment operators, vectorized over samples
    return np.einsum("nij,oji->no", rhos, _MOMENT_OPS).real


def _assemble_master(times, rhos, p, sched, n_steps):
    herm = np.max(np.abs(rhos - rhos.conj().transpose(0, 2, 1)), axis=(1, 2))
    rhos = 0.5 * (rhos + rhos.conj().transpose(0, 2, 1))
    trace = np.einsum("nii->n", rhos).real
    rho_ee = rhos[:, IDX_E, IDX_E].real

    fid_p = np.empty(len(times))
    fid_m = np.empty(len(times))
    for i, t in enumerate(times):
        th = sched.theta(t)
        fid_p[i] = fidelity(rhos[i], dark_state(th, t, sched.omega, "plus"))
        fid_m[i] = fidelity(rhos[i], dark_state(th, t, sched.omega, "minus"))

    traj = Trajectory(
        times=times,
        moments=_moments_of(rhos),
        engine="master",
        rho=rhos,
        trace=trace,
        rho_ee=rho_ee,
        herm_residual=herm,
        fid_dplus=fid_p,
        fid_dminus=fid_m,
        n_steps=n_steps,
    )

    # Trace-drift policy: the SD term conserves trace only at unit ground
    # trace, so |Tr rho - 1| growing like (gamma/2) int rho_ee dt is
    # expected.  Exceeding 10x that bound signals misuse outside the
    # rho_ee << 1 regime.
    drift_pred = 0.5 * p.gamma * np.concatenate(
        [[0.0], np.cumsum(0.5 * (rho_ee[1:] + rho_ee[:-1]) * np.diff(times))]
    )
    bound = 10.0 * (np.abs(drift_pred) + 1e-6)
    bad = np.abs(trace - 1.0) > bound
    if np.any(bad):
        i = int(np.argmax(bad))
        raise IntegrationError(
            f"trace drift |Tr rho - 1| = {abs(trace[i]-1.0):.3e} at t = {times[i]:.6g} "
            f"exceeds policy bound {bound[i]:.3e}"
        )
    return traj


def integrate_master(rho0, p: PhysicalParams, sched: ModulationSchedule, cfg: IntegratorConfig):
    """Integrate the Liouville equation from rho0 over cfg.sample_grid."""
    rho0 = validate_density(rho0)
    times = cfg.sample_grid
    max_step, fixed_dt = cfg.resolve_steps(p, sched)
    kind, p0, ts, ths = sched.kernel_args()
    rhos, status, t_fail, n_steps = backend.integrate_master_grid(
        rho0, times, p.omega_B, p.Omega, p.gamma_e, p.gamma,
        sched.omega, kind, p0, ts, ths, cfg.rtol, cfg.atol, max_step, fixed_dt,
    )
    if status == backend.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t = {t_fail:.6g}")
    return _assemble_master(times, rhos, p, sched, n_steps)


def integrate_master_lab(
    rho0, p, sched, cfg: IntegratorConfig, omega_L, omega_0
):
    """Lab-frame integration with the explicit optical phases.

    Slow (generic python RHS); intended for validating the rotating-frame
    transformation, not for production runs.
    """
    rho0 = validate_density(rho0)
    times = cfg.sample_grid
    max_step, fixed_dt = cfg.resolve_steps(p, sched)
    # the lab-frame Hamiltonian oscillates at omega_L; resolve it
    max_step = min(max_step, 0.05 * 2 * math.pi / max(abs(omega_L), abs(omega_0), 1.0))

    def rhs(t, y):
        rho = y.reshape(4, 4)
        H = hamiltonian_lab(t, p, sched, omega_L, omega_0)
        out = -1j * (H @ rho - rho @ H) + se_superop(rho, p.gamma_e) + sd_superop(rho, p.gamma)
        return out.reshape(16)

    ys, status, t_fail, n_steps = backend.dp54(
        rhs, rho0.reshape(16), times, cfg.rtol, cfg.atol, max_step, fixed_dt
    )
    if status == backend.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t = {t_fail:.6g}")
    return _assemble_master(times, ys.reshape(-1, 4, 4), p, sched, n_steps)


def excited_state_check(traj: Trajectory, p: PhysicalParams, sched: ModulationSchedule):
    """Compare stored excited-state coherences/population with the
    adiabatic-elimination predictions computed from the ground block.

    Returns a dict with per-sample deviations and their maxima.
    """
    if traj.rho is None:
        raise ValueError("trajectory has no stored density matrices")
    r = traj.rho
    t = traj.times
    th = np.asarray(sched.theta(t), dtype=float)
    c = np.cos(th)
    s = np.sin(th) / math.sqrt(2)
    phase = np.exp(1j * sched.omega * t)
    k = -2j * p.Omega / p.gamma_e
    ree = r[:, 3, 3]

    pred_e1 = k * (c * r[:, 1, 0] + s * phase * (r[:, 0, 0] + r[:, 2, 0] - ree))
    pred_e0 = k * (c * (r[:, 1, 1] - ree) + s * phase * (r[:, 0, 1] + r[:, 2, 1]))
    pred_em1 = k * (c * r[:, 1, 2] + s * phase * (r[:, 2, 2] + r[:, 0, 2] - ree))
    pred_ee = (2 * p.Omega / p.gamma_e) * np.imag(
        c * r[:, 1, 3] + s * phase * (r[:, 0, 3] + r[:, 2, 3])
    )

    dev_e1 = np.abs(r[:, 3, 0] - pred_e1)
    dev_e0 = np.abs(r[:, 3, 1] - pred_e0)
    dev_em1 = np.abs(r[:, 3, 2] - pred_em1)
    dev_ee = np.abs(ree.real - pred_ee)

    return {
        "times": t,
        "pred_rho_e1": pred_e1,
        "pred_rho_e0": pred_e0,
        "pred_rho_em1": pred_em1,
        "pred_rho_ee": pred_ee,
        "dev_rho_e1": dev_e1,
        "dev_rho_e0": dev_e0,
        "dev_rho_em1": dev_em1,
        "dev_rho_ee": dev_ee,
        "max_dev_coherence": float(max(dev_e1.max(), dev_e0.max(), dev_em1.max())),
        "max_dev_population": float(dev_ee.max()),
    }

"""Transverse optical pumping of spin-1 atoms by polarization-modulated light.

A Lindblad master-equation integrator for the four-level toy model (the
numerical oracle) plus a reduced Bloch-moment ODE model, with experiment
drivers for resonance scans, depth scans, and adiabatic-passage ramps.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME, available_backends
from .darkstate import dark_state, depopulation_rate, fidelity, pump_coupling
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    excited_state_check,
    integrate_master,
    integrate_master_lab,
    liouville_rhs,
    sample_grid,
)
from .operators import (
    BlochMoments,
    StokesComponents,
    ground_maximally_mixed,
    hamiltonian_lab,
    hamiltonian_rotating,
    moments_from_rho,
    polarization_vector,
    pure_state,
    sd_superop,
    se_superop,
    stokes,
)
from .params import (
    ArccosSqrtRamp,
    Constant,
    ModulationSchedule,
    PhysicalParams,
    PiecewiseLinear,
)
from .reduced import (
    DerivedRates,
    ReducedVariant,
    SignResolution,
    bloch_rhs,
    integrate_bloch,
    resolve_fz_sign,
)
from .experiments import (
    ComparisonReport,
    ScanResult,
    ScanSpec,
    Scenario,
    adiabatic_passage,
    compare_engines,
    figure_preset,
    gauss_to_larmor,
    scan_omega,
    scan_theta,
)

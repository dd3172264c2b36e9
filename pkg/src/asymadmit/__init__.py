"""Stability toolkit for planar admittance control with asymmetric stiffness."""

from .eigen import (
    EigenSet,
    StabilityReport,
    critical_damping,
    eigenvalues_closed_form,
    eigenvalues_oracle,
    max_real_part,
    min_damping_exact,
    min_damping_sufficient,
    root_locus,
    stability_report,
)
from .energy import EnergyBreakdown, energy_breakdown, passivity_violations, power
from .simulator import (
    Scenario,
    SimState,
    Trajectory,
    damping_from_zeta,
    detect_convergence,
    detect_spiral,
    overshoot,
    simulate,
    step,
)
from .stiffness import (
    AdmittanceParams,
    StiffnessMatrix,
    decompose,
    force_field,
    is_spiral_free,
    spiral_free_bound,
    stiffness_eigenvalues,
)
from .sweep import SweepGrid, analytic_map, simulated_map

__version__ = "0.1.0"

"""Point-nonlinear Dirac dynamics through the amplitude delay equation."""
from .config import RunConfig, Scenario, load_config, parse_config
from .dirac_algebra import DiracRep, apply_inverse_symbol, apply_propagator, apply_symbol
from .field_energy import (
    SimulationReport,
    VerificationRecord,
    assemble_psi_reg_hat,
    boundary_residual,
    energy,
    energy_series,
    evaluate_field_point,
)
from .free_field import GaussianProfile, RadialInitialData, build_lambda_table, lambda_of_t
from .kernels import KernelSet
from .nonlinearity import PotentialSpec, build_cutoff, lambda_threshold
from .zeta_solver import DelayRHSContext, ZetaTrajectory, extend_globally, solve_picard, solve_stepping

__version__ = "0.1.0"

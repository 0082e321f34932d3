"""Steady-state size distributions for a microbial flocculation population
balance model, computed by Chebyshev spectral collocation."""

from ._backend import HAVE_COMPILED, active_backend, set_backend
from .assembly import (DiscreteModel, SpectralWorkspace, apply_aggregation,
                       apply_breakage, apply_growth_removal, build_model,
                       jacobian, jacobian_fd, residual)
from .rates import (ModelRates, ParamSet, build_rates, removal_coefficient,
                    validate_rates)
from .solver import (BlowUpError, SolverConfig, SteadyState, compute_cq,
                     evolve, solve_newton, solve_picard)
from .spectral import (Grid, SpectralOperators, build_grid, build_operators,
                       cumulative_matrix, diff_matrix, interp_tensor,
                       interpolate, quad_weights)
from .studies import (SweepRow, SweepSpec, average_floc_size,
                      run_convergence_study, run_sweep)
from .theory import TheoremReport, check_theorem1, linear_exact

__version__ = "0.1.0"

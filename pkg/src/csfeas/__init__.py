"""Compressed sensing as a convex feasibility problem, solved by cyclic and
simultaneous subgradient projections."""

from .baselines import OmpConfig, omp
from .constraints import (
    ConvexConstraint,
    HalfspaceConstraint,
    HyperplaneConstraint,
    L1BallConstraint,
    hyperplane_step,
    l1_step,
    l1_subgradient,
    sign_convention,
)
from .errors import (
    CSFeasError,
    DegenerateConstraintError,
    DivergenceError,
    ProblemFormatError,
    UndefinedMetricError,
    UsageError,
)
from .metrics import aggregate_error, error_std, recovery_error, recovery_index
from .model import COMPRESSIBLE, SPARSE, DenseMatrix, Problem, Signal, load_problem, residual, row_dot, save_problem
from .presets import PaperSchedule, paper_config
from .refine import (
    RefinePolicy,
    csp_then_ssp,
    gauss_csp,
    gauss_csp_alternating,
    ls_augment,
    ls_refine,
)
from .scenarios import (
    CompressibleModel,
    ScenarioSpec,
    effective_sparseness,
    gen_compressible,
    gen_dft_undersampled,
    gen_gaussian_sparse,
    gen_phantom_radial,
    generate,
    recovery_index_to_s,
)
from .solvers import SolveReport, SolverConfig, csp_cs, csp_generic, kaczmarz, should_stop, ssp_cs, ssp_generic

__version__ = "0.1.0"

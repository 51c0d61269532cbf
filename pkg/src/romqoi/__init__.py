"""POD/DEIM reduced models with adjoint-based QoI error estimates and
dual-weighted-residual adaptive DEIM."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateInputError,
    InvalidArgumentError,
    LinearSolveError,
    MissingArtifactError,
    SelectionError,
)
from .model import (
    DiscreteModel,
    FunctionModel,
    NewtonSettings,
    TimeGrid,
    Trajectory,
    integrate,
    newton_solve,
    step_explicit,
    step_implicit,
)
from .burgers import BurgersModel, build_burgers, initial_condition
from .pod import PodBasis, SnapshotMatrix, collect_snapshots, pod_basis, project, lift
from .deim import (
    DeimApproximation,
    adaptive_deim_indices,
    approximate_nonlinear,
    build_deim_operator,
    deim_indices,
    selection_condition_number,
)
from .rom import ReducedModel, integrate_rom, lift_trajectory, rom_step_explicit, rom_step_implicit
from .adjoint import (
    QuantityOfInterest,
    burgers_qoi,
    full_adjoint_explicit,
    full_adjoint_implicit,
    qoi_eval,
    qoi_gradient,
    reduced_adjoint,
)
from .estimation import (
    ErrorReport,
    dual_weighted_residuals,
    dwr_basis,
    estimate_error_fast_explicit,
    estimate_error_fast_implicit,
    estimate_error_oracle,
    residuals_explicit,
    residuals_implicit,
    true_error,
)

__version__ = "0.1.0"

"""Lie-Trotter-Suzuki simulation engine for time-dependent Hamiltonians.

Plans product-formula evolutions (constant, adaptive, or discontinuity-aware
step selection), executes them at small qubit counts through bit-discretized
oracles, and reconciles measured oracle-query counts against the closed-form
bounds.
"""

from .adaptive import (
    AdaptiveSchedule,
    ScheduleBlowupError,
    ScheduleInvariantError,
    build_schedule,
    guess_r,
    optimize_adaptive_k,
    refine_r_iteratively,
    split_discontinuities,
)
from .catalog import CatalogEntry, get_entry
from .costs import (
    CostReport,
    adaptive_oracle_bound,
    constant_step_oracle_bound,
    near_linear_k,
    one_sparse_query_cost,
    piecewise_oracle_bound,
    z_chain,
)
from .decomposition import (
    DecomposedHamiltonian,
    OneSparseTerm,
    SubspaceRecord,
    classify_subspace,
    decompose_one_sparse,
)
from .executor import (
    apply_one_sparse_exponential,
    apply_transform,
    rotation_angles,
)
from .integrator import (
    ExponentialPlan,
    PlanStep,
    Segment,
    build_segment_plan,
    build_subdivided_plan,
    constant_step_count,
    execute_plan,
    plan_as_matrix,
    suzuki_fractions,
)
from .model import (
    HamiltonianTerm,
    SmoothnessProfile,
    TabulatedBound,
    check_upsilon_derivative_bound,
    estimate_derivative_norm,
    sparsity_degree,
    upsilon_floor,
)
from .oracle import (
    OracleConfig,
    QueryLedger,
    column_index_bit,
    matrix_value_polar,
    mesh_time,
    precision_requirements,
    round_time,
)
from .pipeline import PlanBundle, RunSettings, plan_run, run_and_measure, simulate_unitary
from .reference import exact_propagator, operator_error, order_scaling_probe

__version__ = "0.1.0"

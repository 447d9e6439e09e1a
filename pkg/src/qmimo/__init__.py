"""Diversity vs multiplexing over noisy parallel quantum channels.

Simulates and analyzes qubit transmission through arrays of channels with
probabilistic crosstalk, erasure, and depolarizing noise, comparing direct
parallel (multiplexed) transmission against cloning-based redundant
transmission.  Three independent engines — closed forms, exact
density-matrix evolution, and a stochastic trajectory sampler — cross-check
each other; see the ``verify`` CLI command.
"""

from .backend import active_backend
from .channels import (
    Branch,
    BranchEnsemble,
    ChannelParams,
    CrosstalkStage,
    DepolarizeStage,
    EraseStage,
    PipelineOrderError,
    apply_pipeline,
    crosstalk_dilation,
    crosstalk_mixture,
    depolarize,
    erase,
    mode_fidelity,
)
from .cloning import CloneBatch, clone_1to2, clone_1toM, clone_fidelity_law
from .experiments import (
    DmtPoint,
    GridSpec,
    RegionScan,
    VerifyRow,
    dmt_sweep,
    iter_region_rows,
    mc_verify,
    region_scan,
)
from .linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    RandomSource,
    fidelity_pure,
    haar_state,
    maximally_mixed,
    orthogonal_complement,
    partial_trace,
    permute_subsystems,
    sym_projector,
    tensor_product,
)
from .mimo import (
    DENSITY_M_CAP,
    TRAJECTORY_M_CAP,
    EngineCapacityError,
    FidelityReport,
    MimoConfig,
    analytic_div_fidelity,
    analytic_general_fidelity,
    analytic_mux_fidelity,
    post_channel_clone_state,
    receiver_select,
    simulate_2x2_div,
    simulate_2x2_mux,
    simulate_2x2_mux_exact,
    simulate_general_density,
    trajectory_estimate,
)
from .selfcheck import CheckResult, SuiteResult, run_suite

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "Branch",
    "BranchEnsemble",
    "ChannelParams",
    "CrosstalkStage",
    "DepolarizeStage",
    "EraseStage",
    "PipelineOrderError",
    "apply_pipeline",
    "crosstalk_dilation",
    "crosstalk_mixture",
    "depolarize",
    "erase",
    "mode_fidelity",
    "CloneBatch",
    "clone_1to2",
    "clone_1toM",
    "clone_fidelity_law",
    "DmtPoint",
    "GridSpec",
    "RegionScan",
    "VerifyRow",
    "dmt_sweep",
    "iter_region_rows",
    "mc_verify",
    "region_scan",
    "DensityMatrix",
    "DimensionError",
    "PureState",
    "RandomSource",
    "fidelity_pure",
    "haar_state",
    "maximally_mixed",
    "orthogonal_complement",
    "partial_trace",
    "permute_subsystems",
    "sym_projector",
    "tensor_product",
    "DENSITY_M_CAP",
    "TRAJECTORY_M_CAP",
    "EngineCapacityError",
    "FidelityReport",
    "MimoConfig",
    "analytic_div_fidelity",
    "analytic_general_fidelity",
    "analytic_mux_fidelity",
    "post_channel_clone_state",
    "receiver_select",
    "simulate_2x2_div",
    "simulate_2x2_mux",
    "simulate_2x2_mux_exact",
    "simulate_general_density",
    "trajectory_estimate",
    "CheckResult",
    "SuiteResult",
    "run_suite",
    "__version__",
]

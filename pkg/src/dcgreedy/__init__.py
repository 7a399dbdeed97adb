"""dcgreedy: distributed continuous greedy maximization of monotone
submodular set functions under one-choice-per-agent constraints, over a
communication graph.

The package splits into: ground-set primitives (`ground`), value oracles and
coverage scenarios (`oracle`), multilinear-extension machinery
(`multilinear`), the communication layer (`network`), the optimization
algorithms and their invariant audit (`algorithms`), and the batch
experiment harness (`experiments`).
"""

from .algorithms import (
    AuditReport,
    BoundPair,
    CentralTrace,
    RunConfig,
    RunTrace,
    StepRecord,
    SuccessProbability,
    approximation_bound,
    audit_trace,
    brute_force_optimum,
    central_continuous_greedy,
    default_orders,
    distributed_continuous_greedy,
    sequential_greedy,
    success_probability,
)
from .errors import (
    Disconnected,
    GroundSetTooLarge,
    InfeasibleOutput,
    MassNotOne,
    MassOverflow,
    SearchSpaceTooLarge,
    UnknownAgent,
    UnknownPolicy,
)
from .experiments import (
    ExperimentSpec,
    ResultRow,
    SensitivityReport,
    generate_scenario,
    run_experiment,
    sequence_sensitivity_report,
    write_csv,
)
from .ground import (
    InfoSet,
    MASS_TOL,
    Partition,
    add_mass,
    block_mass,
    max_merge,
    sample_one_from_block,
    sample_set,
    to_membership_vector,
)
from .multilinear import (
    GradientEstimate,
    estimate_gradient_block,
    estimate_value,
    exact_gradient,
    exact_hessian_entry,
    exact_value,
    required_samples,
)
from .network import (
    CommGraph,
    complete_graph,
    exchange_round,
    path_graph,
    ring_graph,
    star_graph,
)
from .oracle import (
    CoverageOracle,
    CoverageScenario,
    OracleCheckReport,
    check_monotone_submodular,
    coverage_eval,
    load_scenario,
    marginal,
    modular_oracle,
    paper_scale_scenario,
    save_scenario,
    scenario_from_dict,
    two_cluster_scenario,
    uniform_points,
)

__version__ = "0.1.0"

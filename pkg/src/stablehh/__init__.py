"""Stability analysis and intrahousehold allocation bounds for marriage markets.

The package encodes linear revealed-preference stability conditions for
marriage markets with children under joint- and sole-custody rules,
solves for stability indices by linear programming, and set-identifies
the female private-consumption share and sharing rule with verified
bounds.
"""

from .errors import (
    AdjustmentError,
    EmptyMarketError,
    InconsistentRegionError,
    InvalidInputError,
    ModelError,
    ModelMismatchError,
    SolverFailureError,
    StablehhError,
    UnsupportedError,
)
from .market import (
    Agent,
    ChildSupportSchedule,
    ConsiderationSets,
    Couple,
    HouseholdBundle,
    MarriageMarket,
    PriceIncomeGrid,
    TIME_ENDOWMENT,
    Violation,
    dump_markets,
    load_markets,
    option_key,
    read_markets,
    save_markets,
    validate_market,
)
from .ingest import (
    IngestConfig,
    build_bundle,
    build_consideration_sets,
    compute_child_support,
    compute_incomes,
    impute_children_expenditure,
    ingest_markets,
    partition_markets,
)
from .lp import LinearProgram, LPBuilder, Solution, check_feasibility, solve, to_mps
from .stability import (
    BuiltSystem,
    ExitOption,
    JointCustody,
    ModelKind,
    SoleCustody,
    StabilityReport,
    adjust_incomes,
    build_jc_constraints,
    build_spc_constraints,
    build_system,
    exit_options,
    model_from_string,
    solve_stability_indices,
    summarize,
)
from .identification import (
    BoundsReport,
    Interval,
    bound_private_share,
    bound_sharing_rule,
    compute_bounds,
    naive_bounds,
)
from .oracle import brute_force_rationalizable, generate_stable_market, perturb_incomes

__version__ = "0.1.0"

__all__ = [
    "AdjustmentError",
    "Agent",
    "BoundsReport",
    "BuiltSystem",
    "ChildSupportSchedule",
    "ConsiderationSets",
    "Couple",
    "EmptyMarketError",
    "ExitOption",
    "HouseholdBundle",
    "IngestConfig",
    "InconsistentRegionError",
    "Interval",
    "InvalidInputError",
    "JointCustody",
    "LPBuilder",
    "LinearProgram",
    "MarriageMarket",
    "ModelError",
    "ModelKind",
    "ModelMismatchError",
    "PriceIncomeGrid",
    "SoleCustody",
    "Solution",
    "SolverFailureError",
    "StabilityReport",
    "StablehhError",
    "TIME_ENDOWMENT",
    "UnsupportedError",
    "Violation",
    "adjust_incomes",
    "bound_private_share",
    "bound_sharing_rule",
    "brute_force_rationalizable",
    "build_bundle",
    "build_consideration_sets",
    "build_jc_constraints",
    "build_spc_constraints",
    "build_system",
    "check_feasibility",
    "compute_bounds",
    "compute_child_support",
    "compute_incomes",
    "dump_markets",
    "exit_options",
    "generate_stable_market",
    "impute_children_expenditure",
    "ingest_markets",
    "load_markets",
    "model_from_string",
    "naive_bounds",
    "option_key",
    "partition_markets",
    "perturb_incomes",
    "read_markets",
    "save_markets",
    "solve",
    "solve_stability_indices",
    "summarize",
    "to_mps",
    "validate_market",
]

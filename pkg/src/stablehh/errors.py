"""Exception types shared across the package."""


class StablehhError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(StablehhError):
    """Malformed or out-of-contract input data."""


class InconsistentRegionError(InvalidInputError):
    """Spouses assigned to different marriage markets."""


class ModelMismatchError(StablehhError):
    """Operation invoked under the wrong custody model or with missing model data."""


class UnsupportedError(StablehhError):
    """Requested configuration intentionally outside the supported envelope."""


class EmptyMarketError(StablehhError):
    """Market has no matched couples, so data-driven steps cannot run."""


class SolverFailureError(StablehhError):
    """Numerical breakdown inside an LP backend."""


class ModelError(StablehhError):
    """The stability system is infeasible even with indices driven to zero."""


class AdjustmentError(StablehhError):
    """Income adjustment failed its feasibility re-check."""

"""MatrixIRLS low-rank matrix completion."""

from ._core import (
    CoverageInfeasible,
    CoverageUnattainable,
    NumericalError,
    Solution,
    complete,
    ground_truth,
    interpolated_spectrum,
    oversampling_to_m,
    run_sweep,
    sample_omega,
)

__all__ = [
    "CoverageInfeasible",
    "CoverageUnattainable",
    "NumericalError",
    "Solution",
    "complete",
    "ground_truth",
    "interpolated_spectrum",
    "oversampling_to_m",
    "run_sweep",
    "sample_omega",
]

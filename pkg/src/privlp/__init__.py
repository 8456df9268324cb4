"""Differentially private linear programming.

Solvers for every way an LP can depend on private data, the mechanisms they
are built from, reconstruction attacks that show the limits, and brute-force
checks of the guarantees.
"""

from .attacks import (BitDatabase, GadgetInstance, gadget_constraint, gadget_objective,
                      gadget_scalar, reconstruct_by_rounding, reconstruction_bound,
                      run_attack_experiment)
from .constraint import (ConstraintPrivateLP, ConstraintPrivateParams, SetCoverOracle,
                         VertexArgminOracle, solve_constraint_private)
from .io import load_instance, dump_instance
from .lowsens import (ColumnPrivateLP, LowSensParams, RowPrivateLP, ScalarPrivateLP,
                      VacuousBoundError, accuracy_bound, solve_column_private,
                      solve_row_private, solve_scalar_private)
from .lp import (FeasibilityLp, LpInstance, PublicRegion, SensitivityModel, Sense, Solution,
                 canonicalize)
from .mechanisms import (BudgetExhausted, PrivacyBudget, QualityScore, exponential_mechanism,
                         laplace_sample)
from .mw import DenseMultiplicativeWeights, MultiplicativeWeights, bregman_project
from .objective import ObjectivePrivateLP, solve_exact_lp, solve_objective_private

__version__ = "0.1.0"

__all__ = [
    "BitDatabase", "BudgetExhausted", "ColumnPrivateLP", "ConstraintPrivateLP",
    "ConstraintPrivateParams", "DenseMultiplicativeWeights", "FeasibilityLp", "GadgetInstance",
    "LowSensParams", "LpInstance", "MultiplicativeWeights", "ObjectivePrivateLP",
    "PrivacyBudget", "PublicRegion", "QualityScore", "RowPrivateLP", "ScalarPrivateLP",
    "Sense", "SensitivityModel", "SetCoverOracle", "Solution", "VacuousBoundError",
    "VertexArgminOracle", "accuracy_bound", "bregman_project", "canonicalize",
    "dump_instance", "exponential_mechanism", "gadget_constraint", "gadget_objective",
    "gadget_scalar", "laplace_sample", "load_instance", "reconstruct_by_rounding",
    "reconstruction_bound", "run_attack_experiment", "solve_column_private",
    "solve_constraint_private", "solve_exact_lp", "solve_objective_private",
    "solve_row_private", "solve_scalar_private",
]

"""Information-disturbance tradeoff simulation for quantum seals."""

from .attack import (
    AttackReport,
    MeasurementChannel,
    TradeoffPoint,
    ab_coefficients,
    asymmetric_counterexample,
    attack_for,
    average_fidelity,
    build_attack,
    conditional_fidelity,
    evaluate_attack,
    he_mixed_attack,
    mutual_information,
    nu,
    outcome_probabilities,
    tradeoff_point,
)
from .discrimination import OptimalityReport, Povm, SolverSettings, check_optimality, solve_discrimination, success_probability
from .seal import SealScheme, canonical_constants, canonical_scheme, load_scheme, reduced_states, save_scheme

__version__ = "0.1.0"

"""Dissipative geometric phase gates for trapped ions.

Coherent-state trajectories under damping, phase bookkeeping, force design,
two-qubit gate fidelity at zero and finite temperature, and a truncated
Fock-space master-equation oracle.
"""
__version__ = "0.1.0"

from .dynamics import (FunctionForce, LinearCombination, ModeParams, Path, SampledForce, ScaledSine,
                       TimeGrid, check_cyclic, propagate_closed_form, propagate_ode, sum_paths,
                       zero_force)
from .errors import (ConditioningError, DegenerateSeedError, GridMismatchError, InvalidInputError,
                     NoSolutionError, NumericalError, PhaseGateError, StepSizeError, TruncationError)
from .fidelity import fidelity_bound, fidelity_realization
from .forces import (ConstraintSet, InnerProductRule, compensate_damping, gram_schmidt_force,
                     kappa_for_phase, least_dephasing_force, offset_derivative, offset_sensitivity)
from .gate import (DEFAULT_OMEGA, GateConfig, GateOutcome, SpinCombo, build_gate,
                   least_dephasing_drive, mode_forces, run_gate)
from .phases import PhaseLedger, dissipative_term, isolated_phase, ledger, wrap_phase
from .thermal import (MCEstimate, NoiseRealization, cumulant_fidelity, monte_carlo_fidelity,
                      sample_noisy_path)

__all__ = [
    "ConditioningError", "ConstraintSet", "DEFAULT_OMEGA", "DegenerateSeedError", "FunctionForce",
    "GateConfig", "GateOutcome", "GridMismatchError", "InnerProductRule", "InvalidInputError",
    "LinearCombination", "MCEstimate", "ModeParams", "NoSolutionError", "NoiseRealization",
    "NumericalError", "Path", "PhaseGateError", "PhaseLedger", "SampledForce", "ScaledSine",
    "SpinCombo", "StepSizeError", "TimeGrid", "TruncationError", "build_gate", "check_cyclic",
    "compensate_damping", "cumulant_fidelity", "dissipative_term", "fidelity_bound",
    "fidelity_realization", "gram_schmidt_force", "isolated_phase", "kappa_for_phase",
    "least_dephasing_drive", "least_dephasing_force", "ledger", "mode_forces", "monte_carlo_fidelity",
    "offset_derivative", "offset_sensitivity", "propagate_closed_form", "propagate_ode", "run_gate",
    "sample_noisy_path", "sum_paths", "wrap_phase", "zero_force",
]

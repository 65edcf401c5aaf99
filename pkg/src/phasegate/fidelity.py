"""Gate fidelity formulas for the a = b = 1/sqrt(2) superposition of a
parallel (P) and an anti-parallel (A) spin configuration."""
from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def fidelity_bound(Gamma: float) -> float:
    """(1 + e^{-Gamma}) / 2, the closed-path, exact-phase fidelity."""
    if not Gamma >= 0:
        raise InvalidInputError(f"Gamma must be non-negative, got {Gamma}")
    return 0.5 * (1.0 + np.exp(-Gamma))


def fidelity_realization(labels_P, labels_A, phase_total, target_phase: float):
    """Fidelity with respect to the target spin state times motional vacuum.

    Parameters
    ----------
    labels_P, labels_A : sequence of complex (or arrays)
        Final labels z_m(T) of every mode for the P and A configurations.
    phase_total : complex (or array)
        Phi + i Gamma, with Phi the accumulated P-vs-A phase.
    target_phase : float
        Phase the gate should produce; Delta phi = Re(phase_total) - target.

    Returns
    -------
    F = 1/4 [e^{-S_P} + e^{-S_A} + 2 Re e^{i Delta phi - Gamma - (S_P + S_A)/2}],
    S = sum_m |z_m(T)|^2. Vectorizes over realizations.
    """
    sP = sum(np.abs(np.asarray(z)) ** 2 for z in labels_P)
    sA = sum(np.abs(np.asarray(z)) ** 2 for z in labels_A)
    phase_total = np.asarray(phase_total, dtype=complex)
    exponent = 1j * (phase_total.real - target_phase) - phase_total.imag - 0.5 * (sP + sA)
    return 0.25 * (np.exp(-sP) + np.exp(-sA) + 2.0 * np.real(np.exp(exponent)))

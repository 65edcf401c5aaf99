"""Phase bookkeeping for pairs of coherent-state paths.

For internal states 0 and 1 carrying labels z0(t), z1(t) the relative phase
splits into a dynamical part, a geometric part and a complex dissipative
exponent xi = phi_L + i eta. The damped master equation with jump operator
sqrt(2 gamma) a gives

    d(xi)/dt = -i gamma (2 z0 z1* - |z0|^2 - |z1|^2),

so phi_L = 2 gamma int Im(z0 z1*) dt and eta = gamma int |z1 - z0|^2 dt.
Time derivatives come from the stored equation-of-motion values on the path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ModeParams, Path, require_same_grid


@dataclass(frozen=True)
class PhaseLedger:
    """Relative phase contributions of state 0 against state 1 (radians)."""

    phi_d: float
    phi_g: float
    phi_isol: float
    phi_L: float
    eta: float

    @property
    def phi_total(self) -> complex:
        return complex(self.phi_isol + self.phi_L, self.eta)

    def __add__(self, other: "PhaseLedger") -> "PhaseLedger":
        return PhaseLedger(self.phi_d + other.phi_d, self.phi_g + other.phi_g,
                           self.phi_isol + other.phi_isol, self.phi_L + other.phi_L,
                           self.eta + other.eta)

    def as_dict(self) -> dict:
        return {"phi_d": self.phi_d, "phi_g": self.phi_g, "phi_isol": self.phi_isol,
                "phi_L": self.phi_L, "eta": self.eta}


def _circulation(path: Path) -> np.ndarray:
    return np.imag(path.zdot * np.conj(path.z))


def dynamical_phase(path: Path, params: ModeParams) -> float:
    """int 2 Im(zdot z*) - omega |z|^2 dt."""
    integrand = 2 * _circulation(path) - params.omega * np.abs(path.z) ** 2
    return float(path.grid.integrate(integrand))


def geometric_phase(path: Path, params: ModeParams) -> float:
    """int -Im(zdot z*) + omega |z|^2 dt."""
    integrand = -_circulation(path) + params.omega * np.abs(path.z) ** 2
    return float(path.grid.integrate(integrand))


def circulation_phase(path: Path) -> float:
    """int Im(zdot z*) dt, the single-path isolated contribution."""
    return float(path.grid.integrate(_circulation(path)))


def isolated_phase(path0: Path, path1: Path) -> float:
    """int Im(zdot0 z0* - zdot1 z1*) dt = 2 (A0 - A1) for closed paths."""
    grid = require_same_grid(path0, path1)
    return float(grid.integrate(_circulation(path0) - _circulation(path1)))


def enclosed_area(path: Path) -> float:
    """Signed shoelace area of the sample polygon, closing edge included."""
    x, y = path.z.real, path.z.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def dissipative_term(path0: Path, path1: Path, gamma: float) -> tuple[float, float]:
    """Return (phi_L, eta) for the pair."""
    grid = require_same_grid(path0, path1)
    if gamma == 0:
        return 0.0, 0.0
    phi_L = 2 * gamma * grid.integrate(np.imag(path0.z * np.conj(path1.z)))
    eta = gamma * grid.integrate(np.abs(path1.z - path0.z) ** 2)
    return float(phi_L), max(float(eta), 0.0)


def ledger(path0: Path, path1: Path, params: ModeParams) -> PhaseLedger:
    require_same_grid(path0, path1)
    phi_d = dynamical_phase(path0, params) - dynamical_phase(path1, params)
    phi_g = geometric_phase(path0, params) - geometric_phase(path1, params)
    phi_L, eta = dissipative_term(path0, path1, params.gamma)
    return PhaseLedger(phi_d, phi_g, phi_d + phi_g, phi_L, eta)


def wrap_phase(phi: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = float(np.angle(np.exp(1j * phi)))
    return np.pi if w == -np.pi else w

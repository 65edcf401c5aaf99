"""Two-ion phase gate on the stretch (+) and centre-of-mass (-) modes.

The spin-dependent force F(t) couples to the modes with amplitude
c = 2 / sqrt(2 m); in the interaction picture

    P configurations (up-up, down-down):  f+ = 0,  f- = -/+ c F e^{i omega t}
    A configurations (up-down, down-up):  f- = 0,  f+ = -/+ c F e^{i sqrt3 omega t}

Both modes see the same damping rate. The gate phase is the P-vs-A ledger
summed over modes and Gamma = gamma int sum_m |z_m(A) - z_m(P)|^2 dt.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .dynamics import (ForceProfile, ModeParams, Path, TimeGrid, check_cyclic,
                       propagate_closed_form, zero_force)
from .errors import InvalidInputError
from .fidelity import fidelity_bound, fidelity_realization
from .forces import ConstraintSet, compensate_damping, kappa_from_phases, least_dephasing_force
from .phases import PhaseLedger, ledger, wrap_phase

SQRT3 = np.sqrt(3.0)
MODES = ("+", "-")
TWO_PI = 2 * np.pi
DEFAULT_OMEGA = TWO_PI * 2.0  # omega / 2pi = 2 MHz in rad/us


class SpinCombo(Enum):
    UU = "↑↑"
    DD = "↓↓"
    UD = "↑↓"
    DU = "↓↑"

    @property
    def parallel(self) -> bool:
        return self in (SpinCombo.UU, SpinCombo.DD)

    @property
    def sign(self) -> int:
        return 1 if self in (SpinCombo.UU, SpinCombo.UD) else -1

    @property
    def ascii(self) -> str:
        return self.name.lower()


P, A = SpinCombo.UU, SpinCombo.UD


@dataclass(frozen=True, eq=False)
class GateConfig:
    """Physical and numerical parameters of one gate run."""

    omega: float
    gamma: float
    duration: float
    drive: ForceProfile
    nbar: float = 0.0
    n_steps: int = 4096
    mass_scale: float = 2.0
    target_phase: float = np.pi / 2
    omega_plus: float | None = None

    def __post_init__(self):
        ModeParams(self.omega, self.gamma, self.duration)
        if self.omega_plus is None:
            object.__setattr__(self, "omega_plus", SQRT3 * self.omega)
        if abs(self.omega_plus / self.omega - SQRT3) > 1e-12:
            raise InvalidInputError("omega_plus / omega must equal sqrt(3)")
        if not np.isfinite(self.nbar) or self.nbar < 0:
            raise InvalidInputError(f"nbar must be non-negative, got {self.nbar}")
        if not self.mass_scale > 0:
            raise InvalidInputError("mass_scale must be positive")
        if self.drive.duration < self.duration * (1 - 1e-12):
            raise InvalidInputError("drive does not cover the gate duration")
        TimeGrid(self.duration, self.n_steps)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.duration, self.n_steps)

    @property
    def coupling(self) -> float:
        return 2.0 / np.sqrt(2.0 * self.mass_scale)

    def frequency(self, mode: str) -> float:
        return self.omega_plus if mode == "+" else self.omega

    def mode_params(self, mode: str) -> ModeParams:
        return ModeParams(self.frequency(mode), self.gamma, self.duration)

    def replace(self, **changes) -> "GateConfig":
        if "omega" in changes and "omega_plus" not in changes:
            changes["omega_plus"] = None
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class ModeForce:
    """Interaction-picture mode force envelope(t) e^{i frequency t}."""

    frequency: float
    envelope: ForceProfile
    is_zero: bool

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.envelope(t) * np.exp(1j * self.frequency * t)


def mode_forces(combo: SpinCombo, drive: ForceProfile, config: GateConfig) -> tuple[ModeForce, ModeForce]:
    """Return (f_plus, f_minus) for a spin configuration."""
    driven = drive.scaled(-config.coupling * combo.sign)
    idle = zero_force(config.duration)
    if combo.parallel:
        return (ModeForce(config.omega_plus, idle, True), ModeForce(config.omega, driven, False))
    return (ModeForce(config.omega_plus, driven, False), ModeForce(config.omega, idle, True))


def gamma_exponent(paths: Mapping, gamma: float, pair=(P, A)) -> float:
    """gamma int sum_m |z_m(A) - z_m(P)|^2 dt; equals gamma int (|z+(A)|^2 +
    |z-(P)|^2) dt for a ground-state start."""
    if gamma == 0:
        return 0.0
    p, a = pair
    total = 0.0
    for m in MODES:
        zp, za = paths[(m, p)], paths[(m, a)]
        total += zp.grid.integrate(np.abs(za.z - zp.z) ** 2)
    return max(float(gamma * total), 0.0)


def pair_ledger(paths: Mapping, config: GateConfig, j: SpinCombo, k: SpinCombo) -> PhaseLedger:
    out = None
    for m in MODES:
        led = ledger(paths[(m, j)], paths[(m, k)], config.mode_params(m))
        out = led if out is None else out + led
    return out


def coherent_overlap(beta: complex, alpha: complex) -> complex:
    """<beta|alpha> for normalized coherent states."""
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(beta) * alpha)


@dataclass(frozen=True, eq=False)
class GateOutcome:
    config: GateConfig
    paths: dict
    ledger: PhaseLedger
    Gamma: float
    delta_phi: float
    fidelity_bound: float
    fidelity: float
    closure_residuals: dict

    @property
    def closure_residual_max(self) -> float:
        return max(self.closure_residuals.values())

    def final_labels(self, combo: SpinCombo) -> tuple[complex, complex]:
        return tuple(self.paths[(m, combo)].final for m in MODES)

    def channel_factors(self, order=(SpinCombo.UU, SpinCombo.UD, SpinCombo.DU, SpinCombo.DD)) -> np.ndarray:
        """E[j, k] such that rho_spin(T) = rho_spin(0) * E elementwise (motion traced out)."""
        E = np.ones((4, 4), dtype=complex)
        for a, j in enumerate(order):
            for b, k in enumerate(order):
                if a == b:
                    continue
                led = pair_ledger(self.paths, self.config, j, k)
                ov = np.prod([coherent_overlap(self.paths[(m, k)].final, self.paths[(m, j)].final)
                              for m in MODES])
                E[a, b] = np.exp(1j * (led.phi_isol + led.phi_L) - led.eta) * ov
        return E

    def spin_state(self, amplitudes=None) -> np.ndarray:
        """Reduced spin density matrix at T in the order (uu, ud, du, dd)."""
        c = np.full(4, 0.5, dtype=complex) if amplitudes is None else np.asarray(amplitudes, dtype=complex)
        return np.outer(c, np.conj(c)) * self.channel_factors()

    def summary(self) -> dict:
        out = self.ledger.as_dict()
        out.update(Gamma=self.Gamma, delta_phi=self.delta_phi, fidelity=self.fidelity,
                   fidelity_bound=self.fidelity_bound, closure_residual_max=self.closure_residual_max)
        return out


def run_gate(config: GateConfig, initial: tuple[complex, complex] = (0j, 0j)) -> GateOutcome:
    """Evolve all (mode, spin configuration) paths and assemble the outcome."""
    z0 = dict(zip(MODES, (complex(initial[0]), complex(initial[1]))))
    if not all(np.isfinite(v) for v in z0.values()):
        raise InvalidInputError("initial labels must be finite")
    grid = config.grid
    paths = {}
    for combo in SpinCombo:
        for m, mf in zip(MODES, mode_forces(combo, config.drive, config)):
            paths[(m, combo)] = propagate_closed_form(z0[m], mf.envelope, config.mode_params(m), grid)
    led = pair_ledger(paths, config, P, A)
    Gamma = gamma_exponent(paths, config.gamma)
    delta_phi = wrap_phase(led.phi_isol + led.phi_L - config.target_phase)
    fid = float(fidelity_realization([paths[(m, P)].final for m in MODES],
                                     [paths[(m, A)].final for m in MODES],
                                     complex(led.phi_isol + led.phi_L, Gamma), config.target_phase))
    residuals = {key: check_cyclic(p).residual for key, p in paths.items()}
    return GateOutcome(config, paths, led, Gamma, delta_phi, fidelity_bound(Gamma), fid, residuals)


def gate_phase(drive: ForceProfile, config: GateConfig) -> float:
    """phi_isol + phi_L of the P-vs-A pair from the ground state."""
    return run_gate(config.replace(drive=drive)).ledger.phi_total.real


def least_dephasing_drive(omega: float, duration: float, n_steps: int = 4096,
                          max_frequency_ratio: float = 4.0, sign: int = 1,
                          endpoint: bool = True) -> ForceProfile:
    """Unnormalized two-mode least-dephasing Gram-Schmidt drive."""
    wp = SQRT3 * omega
    cons = ConstraintSet.two_mode(omega, 0.0, duration, wp)
    # P drives the com mode, A the stretch mode: phase = q(-) - q(+)
    return least_dephasing_force([(omega, 1.0), (wp, -1.0)], duration,
                                 max_frequency_ratio * omega, n_steps, endpoint, sign, cons)


def normalize_drive(drive: ForceProfile, config: GateConfig, target: float | None = None) -> ForceProfile:
    """Scale ``drive`` so the gate phase at config.gamma equals the target."""
    target = config.target_phase if target is None else target
    return drive.scaled(kappa_from_phases(gate_phase(drive, config), target))


def build_gate(omega: float = DEFAULT_OMEGA, gamma: float = 0.0, duration: float = 0.8,
               nbar: float = 0.0, target_phase: float = np.pi / 2, compensate: bool = True,
               base_drive: ForceProfile | None = None, n_steps: int = 4096,
               mass_scale: float = 2.0, max_frequency_ratio: float = 4.0) -> GateConfig:
    """Gate configuration with a drive normalized to the target phase.

    The base drive (least-dephasing family unless given) is first normalized
    without damping, giving F_nd. With ``compensate`` the applied drive is
    kappa e^{-gamma t} F_nd with kappa restoring the target under damping;
    otherwise F_nd is applied as is.
    """
    if base_drive is None:
        base_drive = least_dephasing_drive(omega, duration, n_steps, max_frequency_ratio,
                                           sign=1 if target_phase >= 0 else -1)
    cfg = GateConfig(omega, 0.0, duration, base_drive, nbar, n_steps, mass_scale, target_phase)
    f_nd = normalize_drive(base_drive, cfg)
    cfg = cfg.replace(gamma=gamma, drive=f_nd)
    if compensate and gamma > 0:
        cfg = cfg.replace(drive=normalize_drive(compensate_damping(f_nd, gamma), cfg))
    return cfg


SWEEP_COLUMNS = ("gamma_over_omega", "T_us", "nbar", "Gamma", "delta_phi_rad", "fidelity",
                 "closure_residual_max")


def sweep_row(config: GateConfig) -> dict:
    out = run_gate(config)
    return {"gamma_over_omega": config.gamma / config.omega, "T_us": config.duration,
            "nbar": config.nbar, "Gamma": out.Gamma, "delta_phi_rad": out.delta_phi,
            "fidelity": out.fidelity, "closure_residual_max": out.closure_residual_max}

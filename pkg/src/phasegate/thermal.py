"""Finite-temperature gate: noisy trajectories, Monte Carlo fidelity and the
second-order cumulant approximation.

Thermal noise enters each mode as

    dz = (-gamma z - i f~) dt - i sqrt(2 gamma nbar) dW,

with complex increments of variance dt (real and imaginary parts dt/2 each).
Because the equation is linear and the noise does not depend on the spin
configuration, a noisy label splits into z = w + zeta: the deterministic
path w plus an Ornstein-Uhlenbeck process zeta shared by all spin
configurations. Differences z_P - z_A (and hence Gamma) are noise free.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.signal import lfilter

from .dynamics import ForceProfile, ModeParams, Path, TimeGrid, propagate_closed_form
from .errors import GridMismatchError, InvalidInputError
from .fidelity import fidelity_realization
from .gate import MODES, A, GateConfig, GateOutcome, P, run_gate

DEFAULT_SAMPLES = 5000


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """Complex Gaussian increments for every mode of one realization.

    The generator for (seed, index, mode) is seeded from
    ``SeedSequence(seed, spawn_key=(index, mode_index))`` so any realization
    can be regenerated independently of execution order.
    """

    seed: int
    index: int
    grid: TimeGrid
    increments: dict

    @classmethod
    def draw(cls, seed: int, index: int, grid: TimeGrid, modes=MODES) -> "NoiseRealization":
        inc = {m: draw_increments(seed, index, k, grid) for k, m in enumerate(modes)}
        return cls(int(seed), int(index), grid, inc)

    def stream(self, mode: str) -> np.ndarray:
        return self.increments[mode]


def draw_increments(seed: int, index: int, mode_index: int, grid: TimeGrid) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index), int(mode_index))))
    x = rng.standard_normal((2, grid.n_steps))
    return (x[0] + 1j * x[1]) * np.sqrt(grid.dt / 2)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int


def ou_noise(increments: np.ndarray, gamma: float, nbar: float, dt: float) -> np.ndarray:
    """Exact discrete OU recursion zeta_{k+1} = e^{-gamma dt} zeta_k - i sqrt(2 gamma nbar) dW_k,
    zeta_0 = 0. Works along the last axis."""
    increments = np.asarray(increments, dtype=complex)
    shape = increments.shape[:-1] + (increments.shape[-1] + 1,)
    zeta = np.zeros(shape, dtype=complex)
    if nbar == 0 or gamma == 0:
        return zeta
    drive = -1j * np.sqrt(2 * gamma * nbar) * increments
    zeta[..., 1:] = lfilter([1.0], [1.0, -np.exp(-gamma * dt)], drive, axis=-1)
    return zeta


def sample_noisy_path(z0: complex, force: ForceProfile, params: ModeParams, noise,
                      nbar: float, grid: TimeGrid | None = None, scheme: str = "split",
                      mode: str = "-") -> Path:
    """One noisy trajectory.

    ``noise`` is a NoiseRealization (``mode`` selects its stream) or an array
    of increments. Schemes: ``split`` (closed-form drift plus exact OU noise,
    default), ``exponential`` (z_{k+1} = e^{-g dt} z_k - i dt f~(t_k) e^{-g dt/2}
    - i sqrt(2 g nbar) dW_k) and ``euler`` (Euler-Maruyama).
    """
    if nbar < 0 or not np.isfinite(nbar):
        raise InvalidInputError("nbar must be non-negative")
    grid = grid or TimeGrid(params.duration)
    if isinstance(noise, NoiseRealization):
        if noise.grid != grid:
            raise GridMismatchError("noise realization lives on a different grid")
        dW = noise.stream(mode)
    else:
        dW = np.asarray(noise, dtype=complex)
    if dW.shape != (grid.n_steps,):
        raise GridMismatchError("noise increments do not match the time grid")
    g, h, t = params.gamma, grid.dt, grid.t
    ft = force(t) * np.exp(1j * params.omega * t)
    if scheme == "split":
        det = propagate_closed_form(z0, force, params, grid)
        z = det.z + ou_noise(dW, g, nbar, h)
    elif scheme in ("exponential", "euler"):
        kick = -1j * np.sqrt(2 * g * nbar) * dW
        if scheme == "exponential":
            decay, inc = np.exp(-g * h), -1j * h * ft[:-1] * np.exp(-0.5 * g * h) + kick
        else:
            decay, inc = 1 - g * h, -1j * h * ft[:-1] + kick
        z = np.empty(len(grid), dtype=complex)
        z[0] = 0
        z[1:] = lfilter([1.0], [1.0, -decay], inc)
        z = z + complex(z0) * decay ** np.arange(len(grid))
    else:
        raise InvalidInputError(f"unknown SDE scheme {scheme!r}")
    # drift part only: white noise has no pointwise derivative
    return Path(grid, z, -g * z - 1j * ft)


def _trapezoid_weights(grid: TimeGrid) -> np.ndarray:
    w = np.full(len(grid), grid.dt)
    w[0] = w[-1] = 0.5 * grid.dt
    return w


class _NoisyGate:
    """Precomputed deterministic data for per-realization fidelities."""

    def __init__(self, config: GateConfig, outcome: GateOutcome):
        self.config = config
        self.outcome = outcome
        grid = config.grid
        g = config.gamma
        wt = _trapezoid_weights(grid)
        self.linear, self.mid = {}, {}
        for m in MODES:
            wp, wa = outcome.paths[(m, P)], outcome.paths[(m, A)]
            D = wp.z - wa.z
            Ddot = wp.zdot - wa.zdot
            # phase terms linear in zeta:
            # int Im((D' + 2 g D) zeta*) dt + sum_k Im(conj(D_mid) dzeta_k)
            self.linear[m] = wt * (Ddot + 2 * g * D)
            self.mid[m] = 0.5 * (D[1:] + D[:-1])
        self.base_phase = outcome.ledger.phi_isol + outcome.ledger.phi_L
        self.final_P = {m: outcome.paths[(m, P)].final for m in MODES}
        self.final_A = {m: outcome.paths[(m, A)].final for m in MODES}

    def fidelities(self, indices, seed: int) -> np.ndarray:
        cfg = self.config
        grid = cfg.grid
        phase = np.full(len(indices), self.base_phase)
        labels_P, labels_A = [], []
        for k, m in enumerate(MODES):
            dW = np.array([draw_increments(seed, i, k, grid) for i in indices])
            zeta = ou_noise(dW, cfg.gamma, cfg.nbar, grid.dt)
            phase += np.imag(np.conj(zeta) @ self.linear[m])
            phase += np.imag(np.diff(zeta, axis=1) @ np.conj(self.mid[m]))
            labels_P.append(self.final_P[m] + zeta[:, -1])
            labels_A.append(self.final_A[m] + zeta[:, -1])
        total = phase + 1j * self.outcome.Gamma
        return fidelity_realization(labels_P, labels_A, total, cfg.target_phase)


def fidelity_samples(config: GateConfig, n_samples: int, seed: int = 0, threads: int = 1,
                     chunk_size: int = 250) -> np.ndarray:
    """Per-realization fidelities, indexed by realization number."""
    if n_samples < 1:
        raise InvalidInputError("n_samples must be positive")
    outcome = run_gate(config)
    if config.nbar == 0 or config.gamma == 0:
        return np.full(n_samples, outcome.fidelity)
    gate = _NoisyGate(config, outcome)
    chunks = [np.arange(s, min(s + chunk_size, n_samples)) for s in range(0, n_samples, chunk_size)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: gate.fidelities(idx, seed), chunks))
    else:
        parts = [gate.fidelities(idx, seed) for idx in chunks]
    return np.concatenate(parts)


def noisy_labels(config: GateConfig, seed: int, index: int,
                 outcome: GateOutcome | None = None) -> dict:
    """Noisy (mode, spin configuration) label paths of one realization, using
    the same noise streams as the Monte Carlo average."""
    outcome = outcome or run_gate(config)
    grid = config.grid
    out = {}
    for k, m in enumerate(MODES):
        zeta = ou_noise(draw_increments(seed, index, k, grid), config.gamma, config.nbar, grid.dt)
        for (mode, combo), path in outcome.paths.items():
            if mode == m:
                out[(m, combo)] = path.z + zeta
    return out


def monte_carlo_fidelity(config: GateConfig, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                         threads: int = 1) -> MCEstimate:
    """Average fidelity over independent noise realizations."""
    if n_samples < 2:
        raise InvalidInputError("n_samples must be at least 2")
    if config.nbar == 0 or config.gamma == 0:
        return MCEstimate(float(run_gate(config).fidelity), 0.0, int(n_samples), int(seed))
    F = fidelity_samples(config, n_samples, seed, threads)
    std_error = float(np.std(F, ddof=1) / np.sqrt(n_samples))
    return MCEstimate(float(np.mean(F)), std_error, int(n_samples), int(seed))


def thermal_exposure(config: GateConfig, linearized: bool = False) -> float:
    """s = nbar (1 - e^{-2 gamma T}), the thermal variance of each mode label at T."""
    gT = config.gamma * config.duration
    return 2 * config.nbar * gT if linearized else config.nbar * -np.expm1(-2 * gT)


def cumulant_fidelity(config: GateConfig, linearized: bool = True,
                      outcome: GateOutcome | None = None) -> float:
    """Second-order cumulant approximation of the thermal average fidelity.

    With s the thermal variance, Delta = w_P - w_A and S = w_P(T) + w_A(T)
    per mode,

        <e^{-|w + zeta|^2}> ~ exp(-|w|^2 (1 - s) - s + s^2/2)

    and the interference term acquires, per mode,
    -s + s^2/2 - gamma nbar/2 int |h|^2 + s |S|^2/4 - i gamma nbar int Im(h S*) e^{-gamma(T-tau)},
    h(tau) = Delta(T) e^{-gamma(T-tau)} - 2 Delta(tau) + 4 gamma int_tau^T Delta(t) e^{-gamma(t-tau)} dt.
    The linearized variant keeps first order in nbar gamma T: s -> 2 nbar gamma T,
    no s^2 terms and unit exponential kernels.
    """
    outcome = outcome or run_gate(config)
    grid = config.grid
    t, T, g, nbar = grid.t, config.duration, config.gamma, config.nbar
    s = thermal_exposure(config, linearized)
    sq = 0.0 if linearized else 0.5 * s * s
    diag_P = diag_A = 0.0
    cross = 1j * (outcome.ledger.phi_isol + outcome.ledger.phi_L - config.target_phase) - outcome.Gamma
    for m in MODES:
        wp, wa = outcome.paths[(m, P)], outcome.paths[(m, A)]
        zP, zA = wp.final, wa.final
        diag_P += -abs(zP) ** 2 * (1 - s) - s + sq
        diag_A += -abs(zA) ** 2 * (1 - s) - s + sq
        D = wp.z - wa.z
        S = zP + zA
        if linearized:
            h = D[-1] - 2 * D
            kernel = np.ones_like(t)
        else:
            kernel = np.exp(-g * (T - t))
            # K(tau) = e^{g tau} int_tau^T D e^{-g t} dt
            y = D * np.exp(-g * t)
            partial = (cumulative_simpson(y.real, dx=grid.dt, initial=0)
                       + 1j * cumulative_simpson(y.imag, dx=grid.dt, initial=0))
            tail = partial[-1] - partial
            h = D[-1] * kernel - 2 * D + 4 * g * np.exp(g * t) * tail
        var_A = g * nbar * grid.integrate(np.abs(h) ** 2)
        cov_AB = g * nbar * grid.integrate(np.imag(h * np.conj(S)) * kernel)
        cross += -0.5 * (abs(zP) ** 2 + abs(zA) ** 2) - s + sq - 0.5 * var_A + 0.25 * s * abs(S) ** 2 - 1j * cov_AB
    return float(0.25 * (np.exp(diag_P) + np.exp(diag_A) + 2 * np.real(np.exp(cross))))


def nbar_for_exposure(gamma_nbar_T: float, config: GateConfig) -> float:
    """nbar giving the requested gamma * nbar * T."""
    if config.gamma == 0:
        raise InvalidInputError("gamma nbar T is undefined without damping")
    return gamma_nbar_T / (config.gamma * config.duration)

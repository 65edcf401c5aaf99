"""Coherent-state label dynamics of a damped, driven harmonic mode.

In the interaction picture a coherent state |z> driven by the scaled force
f(t) and damped at rate gamma obeys

    dz/dt = -gamma z - i f(t) exp(i omega t)

with hbar = 1, time in microseconds and angular frequencies in rad/us. Two
integrators are provided: the closed-form solution evaluated by panel-wise
Simpson quadrature with exact exponential weights, and a fixed-step RK4
integration of the ODE. Both advance a linear recurrence, which is run
through ``scipy.signal.lfilter``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.signal import lfilter

from .errors import GridMismatchError, InvalidInputError

DEFAULT_STEPS = 4096
CLOSURE_TOL = 1e-8


@dataclass(frozen=True)
class ModeParams:
    """Frequency, damping and protocol time of one motional mode."""

    omega: float
    gamma: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise InvalidInputError(f"omega must be positive, got {self.omega}")
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise InvalidInputError(f"gamma must be non-negative, got {self.gamma}")
        if not np.isfinite(self.duration) or self.duration <= 0:
            raise InvalidInputError(f"duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k T / n_steps, k = 0..n_steps."""

    duration: float
    n_steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not np.isfinite(self.duration) or self.duration <= 0:
            raise InvalidInputError(f"grid duration must be positive, got {self.duration}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def __len__(self) -> int:
        return self.n_steps + 1

    def integrate(self, y, axis: int = -1):
        """Composite Simpson integral of samples ``y`` over the grid."""
        return simpson(y, dx=self.dt, axis=axis)


# --------------------------------------------------------------------------
# Force profiles


class ForceProfile:
    """Real drive force f(t) on [0, duration].

    Subclasses implement ``_evaluate``; calling the profile validates the
    domain and rejects non-finite values.
    """

    duration: float
    family: str = "custom"

    def _evaluate(self, t: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"family": self.family, "params": self.params()}

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        span = self.duration * (1 + 1e-12) + 1e-15
        if np.any(t < -1e-15) or np.any(t > span):
            raise InvalidInputError(f"{self.family} force evaluated outside [0, {self.duration}]")
        values = np.asarray(self._evaluate(t), dtype=float)
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(f"{self.family} force produced non-finite samples")
        return values

    def scaled(self, factor: float) -> "ForceProfile":
        return Modulated(self, scale=float(factor))

    def damped(self, gamma: float) -> "ForceProfile":
        return Modulated(self, gamma=float(gamma))


@dataclass(frozen=True)
class ScaledSine(ForceProfile):
    """A exp(-gamma t) sin(frequency t)."""

    amplitude: float
    frequency: float
    duration: float
    gamma: float = 0.0
    family = "scaled-sine"

    def __post_init__(self):
        for name in ("amplitude", "frequency", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInputError(f"scaled-sine {name} must be finite")
        if not self.duration > 0:
            raise InvalidInputError("force duration must be positive")

    def _evaluate(self, t):
        return self.amplitude * np.exp(-self.gamma * t) * np.sin(self.frequency * t)

    def params(self):
        return {"amplitude": self.amplitude, "frequency": self.frequency, "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class SampledForce(ForceProfile):
    """Uniformly or irregularly sampled table, linearly interpolated."""

    times: np.ndarray
    values: np.ndarray
    family = "sampled"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise InvalidInputError("sampled force needs >= 2 matching time/value samples")
        if not np.all(np.diff(times) > 0):
            raise InvalidInputError("sampled force time stamps must be strictly increasing")
        if abs(times[0]) > 1e-12:
            raise InvalidInputError("sampled force must start at t = 0")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InvalidInputError("sampled force contains non-finite entries")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def duration(self):
        return float(self.times[-1])

    def _evaluate(self, t):
        return np.interp(t, self.times, self.values)

    def params(self):
        return {"n_samples": int(self.times.size)}


@dataclass(frozen=True, eq=False)
class FunctionForce(ForceProfile):
    """Wrap a vectorized callable."""

    func: Callable[[np.ndarray], np.ndarray]
    duration: float
    family: str = "custom"

    def _evaluate(self, t):
        return np.broadcast_to(self.func(t), np.shape(t))


@dataclass(frozen=True, eq=False)
class LinearCombination(ForceProfile):
    """sum_i coefficients[i] * functions[i](t)."""

    functions: tuple
    coefficients: tuple
    duration: float
    family: str = "linear-combination"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.functions) != len(self.coefficients):
            raise InvalidInputError("coefficient count does not match function count")

    def _evaluate(self, t):
        out = np.zeros(np.shape(t))
        for c, fn in zip(self.coefficients, self.functions):
            if c != 0.0:
                out = out + c * np.asarray(fn(t), dtype=float)
        return out

    def params(self):
        return dict(self.meta, n_terms=len(self.functions))


@dataclass(frozen=True, eq=False)
class Modulated(ForceProfile):
    """scale * exp(-gamma t) * base(t)."""

    base: ForceProfile
    scale: float = 1.0
    gamma: float = 0.0

    @property
    def duration(self):
        return self.base.duration

    @property
    def family(self):
        return self.base.family

    def _evaluate(self, t):
        return self.scale * (np.exp(-self.gamma * t) * self.base(t))

    def params(self):
        return dict(self.base.params(), scale=self.scale, damping_compensation=self.gamma)

    def scaled(self, factor):
        return Modulated(self.base, scale=self.scale * float(factor), gamma=self.gamma)

    def damped(self, gamma):
        return Modulated(self.base, scale=self.scale, gamma=self.gamma + float(gamma))


def zero_force(duration: float) -> ForceProfile:
    return ScaledSine(0.0, 0.0, duration)


# --------------------------------------------------------------------------
# Paths


def _fd_derivative(z: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative (used only for paths
    without known dynamics)."""
    n = z.size
    if n < 5:
        return np.gradient(z, h)
    d = np.empty_like(z)
    d[2:-2] = (-z[4:] + 8 * z[3:-1] - 8 * z[1:-3] + z[:-4]) / (12 * h)
    d[0] = (-25 * z[0] + 48 * z[1] - 36 * z[2] + 16 * z[3] - 3 * z[4]) / (12 * h)
    d[1] = (-3 * z[0] - 10 * z[1] + 18 * z[2] - 6 * z[3] + z[4]) / (12 * h)
    d[-1] = (25 * z[-1] - 48 * z[-2] + 36 * z[-3] - 16 * z[-4] + 3 * z[-5]) / (12 * h)
    d[-2] = (3 * z[-1] + 10 * z[-2] - 18 * z[-3] + 6 * z[-4] - z[-5]) / (12 * h)
    return d


@dataclass(frozen=True, eq=False)
class Path:
    """Coherent-state labels z(t) on a TimeGrid.

    ``zdot`` holds the time derivative taken from the equation of motion when
    the path was produced by an integrator; for externally supplied samples
    it is estimated by fourth-order finite differences.
    """

    grid: TimeGrid
    z: np.ndarray
    zdot: np.ndarray | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.shape != (len(self.grid),):
            raise GridMismatchError(f"path has {z.size} samples, grid has {len(self.grid)}")
        if not np.all(np.isfinite(z)):
            raise InvalidInputError("path contains non-finite samples")
        zdot = _fd_derivative(z, self.grid.dt) if self.zdot is None else np.asarray(self.zdot, dtype=complex)
        if zdot.shape != z.shape:
            raise GridMismatchError("zdot shape does not match path")
        z.setflags(write=False)
        zdot.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "zdot", zdot)

    @property
    def t(self):
        return self.grid.t

    @property
    def final(self) -> complex:
        return complex(self.z[-1])

    def __add__(self, other: "Path") -> "Path":
        require_same_grid(self, other)
        return Path(self.grid, self.z + other.z, self.zdot + other.zdot)

    def rotated(self, angle: float) -> "Path":
        r = np.exp(1j * angle)
        return Path(self.grid, self.z * r, self.zdot * r)


def require_same_grid(*paths: Path) -> TimeGrid:
    grid = paths[0].grid
    for p in paths[1:]:
        if p.grid != grid:
            raise GridMismatchError("paths live on different time grids")
    return grid


class CyclicCheck(NamedTuple):
    closed: bool
    residual: float


def _check_inputs(z0, force: ForceProfile, params: ModeParams, grid: TimeGrid):
    if not np.isfinite(complex(z0)):
        raise InvalidInputError("initial label must be finite")
    if abs(grid.duration - params.duration) > 1e-12 * params.duration:
        raise GridMismatchError("grid duration differs from the protocol time")
    if force.duration < params.duration * (1 - 1e-12):
        raise InvalidInputError("force is not defined on the whole protocol interval")


def _run_recurrence(z0: complex, decay: complex, increments: np.ndarray, grid: TimeGrid,
                    homogeneous: np.ndarray) -> np.ndarray:
    """z_{k+1} = decay z_k + increments_k with z_0 = z0."""
    z = np.empty(len(grid), dtype=complex)
    z[0] = 0.0
    z[1:] = lfilter([1.0], [1.0, -decay], increments)
    return z + complex(z0) * homogeneous


def propagate_closed_form(z0: complex, force: ForceProfile, params: ModeParams,
                          grid: TimeGrid | None = None) -> Path:
    """Closed-form solution z(t) = z0 e^{-gamma t} - i int_0^t f~ e^{-gamma(t-tau)} dtau.

    Each panel [t_k, t_k+h] is integrated by Simpson's rule (force sampled at
    both ends and the midpoint) with the exponential kernel evaluated
    exactly, so the homogeneous part is exact.
    """
    grid = grid or TimeGrid(params.duration)
    _check_inputs(z0, force, params, grid)
    t, h, g = grid.t, grid.dt, params.gamma
    ft = force(t) * np.exp(1j * params.omega * t)
    tm = t[:-1] + 0.5 * h
    fm = force(tm) * np.exp(1j * params.omega * tm)
    panel = (h / 6.0) * (ft[:-1] * np.exp(-g * h) + 4.0 * fm * np.exp(-0.5 * g * h) + ft[1:])
    z = _run_recurrence(z0, np.exp(-g * h), -1j * panel, grid, np.exp(-g * t))
    return Path(grid, z, -g * z - 1j * ft)


def propagate_ode(z0: complex, force: ForceProfile, params: ModeParams,
                  grid: TimeGrid | None = None) -> Path:
    """Classical RK4 on the linear ODE, written as z_{k+1} = P z_k + q_k."""
    grid = grid or TimeGrid(params.duration)
    _check_inputs(z0, force, params, grid)
    t, h, lam = grid.t, grid.dt, -params.gamma
    ft = force(t) * np.exp(1j * params.omega * t)
    tm = t[:-1] + 0.5 * h
    b0, bm, b1 = -1j * ft[:-1], -1j * force(tm) * np.exp(1j * params.omega * tm), -1j * ft[1:]
    x = lam * h
    amp = 1 + x + x**2 / 2 + x**3 / 6 + x**4 / 24
    # stage values for z = 0 give the inhomogeneous increment
    k1 = b0
    k2 = lam * (0.5 * h * k1) + bm
    k3 = lam * (0.5 * h * k2) + bm
    k4 = lam * (h * k3) + b1
    q = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    z = _run_recurrence(z0, amp, q, grid, amp ** np.arange(len(grid)))
    return Path(grid, z, lam * z - 1j * ft)


def check_cyclic(path: Path, tol: float = CLOSURE_TOL) -> CyclicCheck:
    """Return whether |z(T) - z(0)| <= tol, together with the residual."""
    residual = float(abs(path.z[-1] - path.z[0]))
    return CyclicCheck(residual <= tol, residual)


def sum_paths(paths: Sequence[Path]) -> Path:
    out = paths[0]
    for p in paths[1:]:
        out = out + p
    return out

"""Drive-force construction.

* ``compensate_damping`` multiplies a force that closes the undamped path by
  exp(-gamma t), which closes the damped path as well.
* ``kappa_for_phase`` finds the amplitude factor that restores a target
  phase (the phase scales as kappa^2).
* ``gram_schmidt_force`` removes from a seed its projection onto a constraint
  set: orthogonality to e^{gamma t} sin/cos(omega t) closes the path from the
  origin, orthogonality to 1 removes first-order offset sensitivity.
* ``least_dephasing_force`` combines Gram-Schmidt forces so that the ratio of
  phase to integrated excursion sum |z|^2 is maximal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .dynamics import (ForceProfile, FunctionForce, LinearCombination, ModeParams,
                       TimeGrid, propagate_closed_form)
from .errors import (ConditioningError, DegenerateSeedError, InvalidInputError,
                     NoSolutionError)
from .phases import circulation_phase

COND_MAX = 1e12
DEGENERATE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Real functions on [0, T] a force must be orthogonal to."""

    functions: tuple
    labels: tuple
    duration: float

    @classmethod
    def for_frequencies(cls, frequencies: Sequence[float], gamma: float, duration: float,
                        zero_mean: bool = True) -> "ConstraintSet":
        funcs, labels = [], []
        for k, w in enumerate(frequencies):
            funcs.append(lambda t, w=w: np.exp(gamma * t) * np.sin(w * t))
            funcs.append(lambda t, w=w: np.exp(gamma * t) * np.cos(w * t))
            labels += [f"exp(gt)sin(w{k}t)", f"exp(gt)cos(w{k}t)"]
        if zero_mean:
            funcs.append(lambda t: np.ones_like(np.asarray(t, dtype=float)))
            labels.append("1")
        return cls(tuple(funcs), tuple(labels), float(duration))

    @classmethod
    def single_mode(cls, omega: float, gamma: float, duration: float) -> "ConstraintSet":
        return cls.for_frequencies([omega], gamma, duration)

    @classmethod
    def two_mode(cls, omega: float, gamma: float, duration: float,
                 omega_plus: float | None = None) -> "ConstraintSet":
        wp = np.sqrt(3.0) * omega if omega_plus is None else omega_plus
        return cls.for_frequencies([wp, omega], gamma, duration)

    def sample(self, t: np.ndarray) -> np.ndarray:
        return np.array([np.asarray(f(t), dtype=float) * np.ones_like(t) for f in self.functions])

    def __len__(self):
        return len(self.functions)


@dataclass(frozen=True)
class InnerProductRule:
    """<g, h> = int_0^T g h dt by composite Simpson on ``grid``."""

    grid: TimeGrid

    def __post_init__(self):
        if self.grid.n_steps % 2:
            raise InvalidInputError("the Simpson inner product needs an even number of steps")

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(len(self.grid))
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * self.grid.dt / 3.0

    def samples(self, fn) -> np.ndarray:
        if callable(fn):
            return np.asarray(fn(self.grid.t), dtype=float) * np.ones(len(self.grid))
        arr = np.asarray(fn, dtype=float)
        if arr.shape != (len(self.grid),):
            raise InvalidInputError("sample vector does not match the inner-product grid")
        return arr

    def inner(self, g, h) -> float:
        return float(np.sum(self.weights * self.samples(g) * self.samples(h)))

    def norm(self, g) -> float:
        return float(np.sqrt(max(self.inner(g, g), 0.0)))

    def gram(self, constraints: ConstraintSet) -> np.ndarray:
        C = constraints.sample(self.grid.t)
        return (C * self.weights) @ C.T


def compensate_damping(force_nd: ForceProfile, gamma: float) -> ForceProfile:
    """t -> exp(-gamma t) force_nd(t) (no kappa factor)."""
    if gamma < 0 or not np.isfinite(gamma):
        raise InvalidInputError("gamma must be finite and non-negative")
    return force_nd.damped(gamma)


def kappa_from_phases(achieved: float, target: float) -> float:
    """sqrt(target / achieved); raises when no real factor exists."""
    if achieved == 0 or not np.isfinite(achieved) or achieved * target < 0:
        raise NoSolutionError(
            f"achieved phase {achieved!r} cannot be scaled to target {target!r}")
    return float(np.sqrt(target / achieved))


def kappa_for_phase(force: ForceProfile, params: ModeParams, target_phase: float,
                    grid: TimeGrid | None = None) -> float:
    """Amplitude factor restoring ``target_phase`` for a single mode driven from
    the origin against an undriven partner. Scaling the force by kappa scales
    the phase by kappa^2."""
    path = propagate_closed_form(0j, force, params, grid)
    return kappa_from_phases(circulation_phase(path), target_phase)


def _projection(seed_samples: np.ndarray, C: np.ndarray, weights: np.ndarray,
                cond_max: float) -> np.ndarray:
    """Least-squares coefficients of the weighted projection onto span(C)."""
    sw = np.sqrt(weights)
    A = (C * sw).T
    Q, R, perm = sla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and (diag[-1] == 0 or (diag[0] / diag[-1]) ** 2 > cond_max):
        cond = np.inf if diag[-1] == 0 else (diag[0] / diag[-1]) ** 2
        raise ConditioningError(f"constraint Gram matrix condition ~{cond:.3g} exceeds {cond_max:.1g}")
    y = sla.solve_triangular(R, Q.T @ (sw * seed_samples))
    coef = np.empty_like(y)
    coef[perm] = y
    return coef


def gram_schmidt_force(seed_fn: ForceProfile, constraints: ConstraintSet,
                       rule: InnerProductRule | None = None,
                       cond_max: float = COND_MAX) -> LinearCombination:
    """Remove from ``seed_fn`` its projection onto span(constraints)."""
    rule = rule or InnerProductRule(TimeGrid(constraints.duration))
    t = rule.grid.t
    s = rule.samples(seed_fn)
    C = constraints.sample(t)
    coef = _projection(s, C, rule.weights, cond_max)
    residual = s - coef @ C
    seed_norm = np.sqrt(np.sum(rule.weights * s * s))
    res_norm = np.sqrt(np.sum(rule.weights * residual * residual))
    if seed_norm == 0 or res_norm <= DEGENERATE_TOL * seed_norm:
        raise DegenerateSeedError("seed lies in the span of the constraint set")
    return LinearCombination((seed_fn,) + tuple(constraints.functions),
                             (1.0,) + tuple(-coef), constraints.duration,
                             family="gram-schmidt",
                             meta={"constraints": list(constraints.labels)})


def offset_sensitivity(force: ForceProfile, params: ModeParams,
                       grid: TimeGrid | None = None) -> float:
    """int_0^T Re(e^{-i omega t} z(t)) dt for the path driven from the origin."""
    path = propagate_closed_form(0j, force, params, grid)
    zs = np.exp(-1j * params.omega * path.t) * path.z
    return float(path.grid.integrate(zs.real))


def offset_derivative(force: ForceProfile, params: ModeParams,
                      grid: TimeGrid | None = None) -> float:
    """Exact d(phi)/d(delta f) of int Im(zdot z*) dt for f -> f + delta f.

    Adds the response of the path itself, -int f Re(e^{-i omega t} z_1) dt with
    z_1 the path driven by a unit constant force, to -offset_sensitivity.
    """
    grid = grid or TimeGrid(params.duration)
    unit = FunctionForce(lambda t: np.ones_like(np.asarray(t, dtype=float)), params.duration, "constant")
    z1 = propagate_closed_form(0j, unit, params, grid).z
    response = -grid.integrate(force(grid.t) * np.real(np.exp(-1j * params.omega * grid.t) * z1))
    return float(-offset_sensitivity(force, params, grid) + response)


def sine_seed(k: int, duration: float) -> FunctionForce:
    return FunctionForce(lambda t, k=k: np.sin(k * np.pi * np.asarray(t) / duration),
                         duration, family=f"sin({k} pi t/T)")


def least_dephasing_force(modes: Sequence[tuple[float, float]], duration: float,
                          max_frequency: float, n_steps: int = 4096,
                          endpoint: bool = True, sign: int = 1,
                          constraints: ConstraintSet | None = None) -> LinearCombination:
    """Gram-Schmidt force with the largest phase per unit of dephasing.

    Parameters
    ----------
    modes : sequence of (frequency, weight)
        Mode frequencies the force couples to. The phase functional is
        sum_m weight_m * int Im(zdot_m z_m*) dt for the undamped path of each
        mode driven from the origin; dephasing is int sum_m |z_m|^2 dt.
    max_frequency : float
        Seeds are sin(k pi t / T) for k pi / T <= max_frequency.
    endpoint : bool
        Impose f(0) = f(T) = 0 by superposition.
    sign : +1 or -1
        Pick the eigenvector with the largest positive (or most negative)
        phase ratio.
    """
    K = int(np.floor(max_frequency * duration / np.pi + 1e-9))
    grid = TimeGrid(duration, n_steps)
    rule = InnerProductRule(grid)
    cons = constraints or ConstraintSet.for_frequencies([w for w, _ in modes], 0.0, duration)
    projected = []
    for k in range(1, K + 1):
        try:
            projected.append(gram_schmidt_force(sine_seed(k, duration), cons, rule))
        except DegenerateSeedError:
            continue
    if not projected:
        raise NoSolutionError("no admissible seed below the frequency cap")
    t = grid.t
    B = np.array([p(t) for p in projected])
    G = (B * rule.weights) @ B.T
    ev, U = np.linalg.eigh(G)
    keep = ev > 1e-10 * ev.max()
    coords = U[:, keep] / np.sqrt(ev[keep])  # columns: orthonormal combinations
    if endpoint:
        ends = np.array([B[:, 0], B[:, -1]])
        coords = coords @ sla.null_space(ends @ coords)
    if coords.shape[1] == 0:
        raise NoSolutionError("no force left after imposing the endpoint conditions")
    n = coords.shape[1]
    Ph = np.zeros((n, n))
    Q = np.zeros((n, n))
    for w, weight in modes:
        params = ModeParams(w, 0.0, duration)
        # paths are linear in the force: propagate the analytic projections once
        Zp = np.array([propagate_closed_form(0j, p, params, grid).z for p in projected])
        Z = coords.T @ Zp
        F = (coords.T @ B) * np.exp(1j * w * t)
        # phase = int Im(-i f~ z*) = -int Re(f~ z*), symmetrized bilinear form
        M = -np.real((F * rule.weights) @ np.conj(Z).T)
        Ph += weight * 0.5 * (M + M.T)
        Q += np.real((np.conj(Z) * rule.weights) @ Z.T)
    lam, V = sla.eigh(Ph, Q)
    v = V[:, -1] if sign > 0 else V[:, 0]
    coef = coords @ v
    if lam[-1 if sign > 0 else 0] * sign <= 0:
        raise NoSolutionError("no combination produces a phase of the requested sign")
    # constraint functions are shared between projections: merge their weights
    funcs, weights = [], []
    for c, p in zip(coef, projected):
        for fn, a in zip(p.functions, p.coefficients):
            for i, g in enumerate(funcs):
                if g is fn:
                    weights[i] += c * a
                    break
            else:
                funcs.append(fn)
                weights.append(c * a)
    return LinearCombination(tuple(funcs), tuple(weights), duration, family="least-dephasing",
                             meta={"n_seeds": len(projected), "max_frequency": max_frequency,
                                   "endpoint": endpoint})

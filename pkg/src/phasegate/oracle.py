"""Truncated Fock-space master-equation oracle.

Integrates

    drho/dt = -i [H(t), rho] + sum_k r_k (2 L_k rho L_k^+ - L_k^+ L_k rho - rho L_k^+ L_k)

with dense matrices and classical RK4, where H(t) = conj(f~) a + f~ a^+ and
the thermal bath contributes (gamma (nbar + 1), a) and (gamma nbar, a^+).

For spin-dependent drives the density matrix is handled in spin blocks:
X_jk = <j| rho |k> evolves as dX/dt = -i (H_j X - X H_k) + D[X], and for two
uncoupled modes each block factorizes into a product of single-mode blocks.
A dense joint solver (spin x mode+ x mode-) is provided for small
truncations to check that factorization.
"""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dynamics import ForceProfile, ModeParams, TimeGrid
from .errors import InvalidInputError, StepSizeError, TruncationError
from .gate import MODES, A, GateConfig, P, SpinCombo, mode_forces

log = logging.getLogger(__name__)

TRACE_DRIFT_MAX = 1e-6
DUMP_MAGIC = b"PGRHO\x00\x01\x00"
SPIN_ORDER = (SpinCombo.UU, SpinCombo.UD, SpinCombo.DU, SpinCombo.DD)


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock cutoff n_max (dimension n_max + 1) and allowed top-two-level population."""

    n_max: int = 32
    tail_threshold: float = 1e-8
    n_max_cap: int = 256
    phase_step: float = 0.02  # target max |f~| * dt per RK4 step

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 4:
            raise InvalidInputError("n_max must be an integer >= 4")
        if not 0 < self.tail_threshold < 1:
            raise InvalidInputError("tail_threshold must lie in (0, 1)")

    @classmethod
    def default(cls, nbar: float = 0.0) -> "TruncationPolicy":
        return cls(n_max=64 if nbar > 0 else 32)


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def coherent_state(z: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    logfact = np.cumsum(np.log(np.maximum(n, 1)))
    amp = np.exp(-0.5 * abs(z) ** 2 - 0.5 * logfact) * np.power(complex(z), n)
    return np.outer(amp, np.conj(amp))


def thermal_state(nbar: float, n_max: int) -> np.ndarray:
    if nbar == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1
    else:
        q = nbar / (nbar + 1)
        p = q ** np.arange(n_max + 1) / (nbar + 1)
    return np.diag(p).astype(complex)


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                         pos_tol: float = 1e-8) -> None:
    """Raise InvalidInputError unless rho is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise InvalidInputError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -pos_tol:
        raise InvalidInputError("density matrix has negative eigenvalues")


def thermal_dissipators(gamma: float, nbar: float, a: np.ndarray) -> list:
    ops = []
    if gamma > 0:
        ops.append((gamma * (nbar + 1), a))
        if nbar > 0:
            ops.append((gamma * nbar, a.conj().T))
    return ops


def lindblad_rhs(rho: np.ndarray, H_left: np.ndarray, ops, H_right: np.ndarray | None = None) -> np.ndarray:
    """-i (H_l rho - rho H_r) + sum_k r_k (2 L rho L^+ - L^+L rho - rho L^+L)."""
    H_right = H_left if H_right is None else H_right
    out = -1j * (H_left @ rho - rho @ H_right)
    for rate, L in ops:
        Ld = L.conj().T
        LdL = Ld @ L
        out += rate * (2 * L @ rho @ Ld - LdL @ rho - rho @ LdL)
    return out


def step_master_equation(rho: np.ndarray, hamiltonian, ops, dt: float, t: float = 0.0) -> np.ndarray:
    """One RK4 step. ``hamiltonian`` is a matrix or a callable of time.

    Trace drift beyond 1e-6 raises StepSizeError; smaller drift is logged and
    left in place.
    """
    H = hamiltonian if callable(hamiltonian) else (lambda _t, M=hamiltonian: M)
    k1 = lindblad_rhs(rho, H(t), ops)
    Hm = H(t + 0.5 * dt)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, Hm, ops)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, Hm, ops)
    k4 = lindblad_rhs(rho + dt * k3, H(t + dt), ops)
    new = rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    tr0 = np.trace(rho)
    drift = abs(np.trace(new) - tr0)
    # RK4 on a GKSL generator keeps the trace exactly, so an unstable step
    # shows up as entries exceeding the trace bound |rho_ij| <= tr rho
    if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > abs(tr0) * (1 + TRACE_DRIFT_MAX) + 1e-12:
        raise StepSizeError(f"unstable step at t={t:.6g}: entries exceed the trace; reduce dt")
    if drift > TRACE_DRIFT_MAX:
        raise StepSizeError(f"trace drift {drift:.3g} in one step; reduce dt")
    if drift > 1e-14:
        log.debug("trace drift %.3g at t=%.6g", drift, t)
    return new


# --------------------------------------------------------------------------
# Batched spin-block engine for one mode


class _BlockEngine:
    """Evolve a stack of blocks X_b under H_left = s_l[b] V(t), H_right = s_r[b] V(t),
    V(t) = conj(f~) a + f~ a^+, with the thermal dissipator.

    Blocks are stored row-major vectorized as columns of a (d^2, B) array and
    every operator acts as a sparse superoperator.
    """

    def __init__(self, n_max: int, gamma: float, nbar: float, left, right):
        d = n_max + 1
        self.d = d
        self.a = annihilation(n_max)
        a = sp.csr_matrix(self.a)
        ad = sp.csr_matrix(self.a.conj().T)
        I = sp.identity(d, format="csr")
        # vec(A X) = (A kron I) vec X, vec(X A) = (I kron A^T) vec X
        self.aL, self.adL = sp.kron(a, I, "csr"), sp.kron(ad, I, "csr")
        self.aR, self.adR = sp.kron(I, a.T, "csr"), sp.kron(I, ad.T, "csr")
        D = sp.csr_matrix((d * d, d * d), dtype=complex)
        for r, L in thermal_dissipators(gamma, nbar, self.a):
            Ls, Ld = sp.csr_matrix(L), sp.csr_matrix(L.conj().T)
            LdL = Ld @ Ls
            D = D + r * (2 * sp.kron(Ls, Ld.T) - sp.kron(LdL, I) - sp.kron(I, LdL.T))
        self.D = D.tocsr()
        self.sl = -1j * np.asarray(left, dtype=float)[None, :]
        self.sr = 1j * np.asarray(right, dtype=float)[None, :]

    def to_vec(self, X: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(X.reshape(X.shape[0], -1).T)

    def to_blocks(self, Y: np.ndarray) -> np.ndarray:
        return Y.T.reshape(-1, self.d, self.d)

    def rhs(self, Y, f):
        fc = np.conj(f)
        out = self.D @ Y
        out += (fc * (self.aL @ Y) + f * (self.adL @ Y)) * self.sl
        out += (fc * (self.aR @ Y) + f * (self.adR @ Y)) * self.sr
        return out

    def step(self, Y, f0, fm, f1, dt):
        k1 = self.rhs(Y, f0)
        k2 = self.rhs(Y + 0.5 * dt * k1, fm)
        k3 = self.rhs(Y + 0.5 * dt * k2, fm)
        k4 = self.rhs(Y + dt * k3, f1)
        return Y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _substeps(force_values: np.ndarray, dt: float, policy: TruncationPolicy) -> int:
    peak = float(np.max(np.abs(force_values))) if force_values.size else 0.0
    return max(1, int(np.ceil(peak * dt / policy.phase_step)))


@dataclass
class BlockRun:
    """Result of a block evolution on one mode."""

    times: np.ndarray
    n_max: int
    final: np.ndarray          # (B, d, d)
    expect_a: np.ndarray       # (B, n_grid) tr(a X_b)
    expect_n: np.ndarray       # (B, n_grid) tr(a^+a X_b)
    trace: np.ndarray          # (B, n_grid)
    purity: np.ndarray         # (B, n_grid) tr(X X^+)
    tail: float
    max_hermiticity_error: float
    states: np.ndarray | None = None


def evolve_blocks(envelope: ForceProfile, params: ModeParams, nbar: float, initial: np.ndarray,
                  left, right, policy: TruncationPolicy, grid: TimeGrid | None = None,
                  store_states: bool = False) -> BlockRun:
    """Evolve spin blocks of one mode with auto-escalating truncation.

    ``initial`` is a (B, d, d) stack (or a callable n_max -> stack);
    blocks with left == right are density matrices.
    """
    grid = grid or TimeGrid(params.duration)
    n_max = policy.n_max
    while True:
        X0 = initial(n_max) if callable(initial) else _pad(np.asarray(initial, dtype=complex), n_max)
        run = _evolve_fixed(envelope, params, nbar, X0, left, right, n_max, policy, grid, store_states)
        if run.tail <= policy.tail_threshold:
            return run
        if n_max * 2 > policy.n_max_cap:
            raise TruncationError(
                f"top-level population {run.tail:.3g} exceeds {policy.tail_threshold:.1g} at n_max={n_max}")
        log.info("escalating truncation %d -> %d (tail %.3g)", n_max, 2 * n_max, run.tail)
        n_max *= 2


def _pad(X: np.ndarray, n_max: int) -> np.ndarray:
    d = n_max + 1
    if X.ndim == 2:
        X = X[None]
    if X.shape[-1] > d:
        raise InvalidInputError("initial state does not fit the truncation")
    out = np.zeros(X.shape[:-2] + (d, d), dtype=complex)
    out[..., :X.shape[-2], :X.shape[-1]] = X
    return out


def _evolve_fixed(envelope, params, nbar, X0, left, right, n_max, policy, grid, store_states):
    eng = _BlockEngine(n_max, params.gamma, nbar, left, right)
    t = grid.t
    probe = np.linspace(0, params.duration, 4 * grid.n_steps + 1)
    sub = _substeps(envelope(probe), grid.dt, policy)
    h = grid.dt / sub
    fine = np.linspace(0, params.duration, 2 * sub * grid.n_steps + 1)
    ff = envelope(fine) * np.exp(1j * params.omega * fine)
    a = eng.a
    n_op = np.diag(np.arange(n_max + 1)).astype(complex)
    B = X0.shape[0]
    n = len(grid)
    ea, en, tr, pur = (np.empty((B, n), dtype=complex) for _ in range(4))
    states = np.empty((n,) + X0.shape, dtype=complex) if store_states else None
    X = X0.copy()
    tail = 0.0
    herm = 0.0
    diag_blocks = np.flatnonzero(np.asarray(left) == np.asarray(right))

    def record(k, X):
        nonlocal tail, herm
        ea[:, k] = np.einsum("ij,bji->b", a, X)
        en[:, k] = np.einsum("ij,bji->b", n_op, X)
        tr[:, k] = np.einsum("bii->b", X)
        pur[:, k] = np.einsum("bij,bij->b", X, X.conj())
        if diag_blocks.size:
            Xd = X[diag_blocks]
            tail = max(tail, float(np.max(np.abs(Xd[:, -2:, -2:].diagonal(axis1=1, axis2=2)).sum(axis=1))))
            herm = max(herm, float(np.max(np.abs(Xd - np.conj(np.swapaxes(Xd, 1, 2))))))
        if states is not None:
            states[k] = X

    record(0, X)
    Y = eng.to_vec(X)
    diag_idx = np.arange(n_max + 1) * (n_max + 2)  # positions of X_ii in vec X
    for k in range(grid.n_steps):
        prev = Y[np.ix_(diag_idx, diag_blocks)].sum(axis=0) if diag_blocks.size else None
        for j in range(sub):
            i = 2 * (k * sub + j)
            Y = eng.step(Y, ff[i], ff[i + 1], ff[i + 2], h)
        if prev is not None:
            drift = float(np.max(np.abs(Y[np.ix_(diag_idx, diag_blocks)].sum(axis=0) - prev)))
            if drift > TRACE_DRIFT_MAX * sub:
                raise StepSizeError(f"trace drift {drift:.3g} at t={t[k]:.6g}; refine the grid")
        X = eng.to_blocks(Y)
        record(k + 1, X)
    return BlockRun(t, n_max, X, ea, en.real, tr, pur.real, tail, herm, states)


# --------------------------------------------------------------------------
# Public solvers


@dataclass
class SingleModeTrajectory:
    times: np.ndarray
    n_max: int
    expect_a: np.ndarray
    expect_n: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    final: np.ndarray
    states: np.ndarray | None = None


def solve_single_mode(force: ForceProfile, params: ModeParams, nbar: float = 0.0,
                      policy: TruncationPolicy | None = None, initial=0j,
                      grid: TimeGrid | None = None, store_states: bool = False) -> SingleModeTrajectory:
    """Evolve one driven, damped mode. ``initial`` is a coherent label or a
    density matrix."""
    policy = policy or TruncationPolicy.default(nbar)
    if np.ndim(initial) == 0:
        init = lambda n: coherent_state(complex(initial), n)[None]  # noqa: E731
    else:
        check_density_matrix(initial)
        init = np.asarray(initial, dtype=complex)[None]
    run = evolve_blocks(force, params, nbar, init, [1.0], [1.0], policy, grid, store_states)
    return SingleModeTrajectory(run.times, run.n_max, run.expect_a[0], run.expect_n[0, :].real,
                                run.trace[0].real, run.purity[0], run.final[0],
                                None if run.states is None else run.states[:, 0])


@dataclass
class SpinCoherenceResult:
    """Two-state spin coupled to one mode."""

    n_max: int
    coherence: complex        # tr X_01(T) / (a b*), i.e. the multiplier of the initial coherence
    spin_state: np.ndarray    # reduced 2x2 spin state at T
    expect_a: tuple           # <a>(t) for spin state 0 and 1


def solve_spin_mode(force0: ForceProfile, force1: ForceProfile, params: ModeParams,
                    nbar: float = 0.0, policy: TruncationPolicy | None = None, z0: complex = 0j,
                    amplitudes=(2 ** -0.5, 2 ** -0.5), grid: TimeGrid | None = None) -> SpinCoherenceResult:
    """Dense spin x mode evolution, H = |0><0| x V0 + |1><1| x V1.

    Uses the generic RK4 step on the full joint density matrix.
    """
    policy = policy or TruncationPolicy.default(nbar)
    grid = grid or TimeGrid(params.duration)
    n_max = policy.n_max
    c = np.asarray(amplitudes, dtype=complex)
    while True:
        a = annihilation(n_max)
        ad = a.conj().T
        d = n_max + 1
        I2 = np.eye(2)
        P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        ops = [(r, np.kron(I2, L)) for r, L in thermal_dissipators(params.gamma, nbar, a)]
        spin0 = np.outer(c, np.conj(c))
        rho = np.kron(spin0, coherent_state(z0, n_max))
        sub = _substeps(np.concatenate([force0(grid.t), force1(grid.t)]), grid.dt, policy)
        h = grid.dt / sub

        def H(t):
            ph = np.exp(1j * params.omega * t)
            f0, f1 = float(force0(t)) * ph, float(force1(t)) * ph
            return (np.kron(P0, np.conj(f0) * a + f0 * ad) + np.kron(P1, np.conj(f1) * a + f1 * ad))

        ea = np.empty((2, len(grid)), dtype=complex)
        tail = 0.0

        def record(k, rho):
            nonlocal tail
            for j in range(2):
                blk = rho[j * d:(j + 1) * d, j * d:(j + 1) * d]
                ea[j, k] = np.trace(a @ blk) / max(abs(c[j]) ** 2, 1e-300)
                tail = max(tail, float(np.abs(np.diag(blk)[-2:]).sum()) / max(abs(c[j]) ** 2, 1e-300))

        record(0, rho)
        for k in range(grid.n_steps):
            for j in range(sub):
                rho = step_master_equation(rho, H, ops, h, grid.t[k] + j * h)
            record(k + 1, rho)
        if tail <= policy.tail_threshold:
            break
        if 2 * n_max > policy.n_max_cap:
            raise TruncationError(f"top-level population {tail:.3g} at n_max={n_max}")
        n_max *= 2
    spin = np.array([[np.trace(rho[i * d:(i + 1) * d, j * d:(j + 1) * d]) for j in range(2)] for i in range(2)])
    coherence = spin[0, 1] / (c[0] * np.conj(c[1]))
    return SpinCoherenceResult(n_max, complex(coherence), spin, (ea[0], ea[1]))


@dataclass
class GateOracleResult:
    """Two-mode gate solved block by block.

    ``factors[j, k]`` multiplies the initial spin coherence rho_jk (motion
    traced out); ``vacuum[j, k]`` is the same block projected on the motional
    vacuum of both modes. Order: uu, ud, du, dd.
    """

    n_max: dict
    factors: np.ndarray
    vacuum: np.ndarray
    expect_a: dict            # (mode, combo) -> <a>(t)
    target_phase: float

    def spin_state(self, amplitudes=None) -> np.ndarray:
        c = np.full(4, 0.5, dtype=complex) if amplitudes is None else np.asarray(amplitudes, dtype=complex)
        return np.outer(c, np.conj(c)) * self.factors

    def fidelity(self, projected: bool = True) -> float:
        """Overlap with (|P> + e^{i target}|A>)/sqrt(2) [times motional vacuum]."""
        M = self.vacuum if projected else self.factors
        p, q = SPIN_ORDER.index(P), SPIN_ORDER.index(A)
        return float(0.25 * (M[p, p].real + M[q, q].real
                             + 2 * np.real(M[p, q] * np.exp(-1j * self.target_phase))))


def solve_two_mode_gate(config: GateConfig, policy: TruncationPolicy | None = None,
                        initial=(0j, 0j)) -> GateOracleResult:
    """Solve every spin block of the gate in both modes and assemble the
    spin channel."""
    policy = policy or TruncationPolicy.default(config.nbar)
    grid = config.grid
    signs = {}
    envelopes = {}
    for combo in SPIN_ORDER:
        for m, mf in zip(MODES, mode_forces(combo, config.drive, config)):
            signs[(m, combo)] = 0.0 if mf.is_zero else float(combo.sign)
            if not mf.is_zero and combo.sign > 0:
                envelopes[m] = mf.envelope
    pairs = [(j, k) for j in range(4) for k in range(j, 4)]
    factors = np.ones((4, 4), dtype=complex)
    vacuum = np.ones((4, 4), dtype=complex)
    expect_a, n_used = {}, {}
    for m, z0 in zip(MODES, initial):
        params = config.mode_params(m)
        # blocks depend only on their (left, right) sign pair: solve each once
        key = [(signs[(m, SPIN_ORDER[j])], signs[(m, SPIN_ORDER[k])]) for j, k in pairs]
        unique = sorted(set(key))
        left, right = zip(*unique)
        B = len(unique)
        start = lambda n, z0=z0: np.repeat(coherent_state(z0, n)[None], B, axis=0)  # noqa: E731
        run = evolve_blocks(envelopes[m], params, config.nbar, start, left, right, policy, grid)
        n_used[m] = run.n_max
        for (j, k), kk in zip(pairs, key):
            b = unique.index(kk)
            factors[j, k] *= run.trace[b, -1]
            vacuum[j, k] *= run.final[b, 0, 0]
            if j == k:
                expect_a[(m, SPIN_ORDER[j])] = run.expect_a[b]
    for j, k in pairs:
        factors[k, j] = np.conj(factors[j, k])
        vacuum[k, j] = np.conj(vacuum[j, k])
    return GateOracleResult(n_used, factors, vacuum, expect_a, config.target_phase)


def _superop(left, right):
    """Sparse matrix of X -> left X right acting on row-major vec X."""
    return sp.kron(left, right.T, "csr")


def solve_joint_gate(config: GateConfig, n_max: int = 4, grid: TimeGrid | None = None,
                     policy: TruncationPolicy | None = None) -> np.ndarray:
    """Joint spin x mode+ x mode- evolution from the motional ground state at a
    small truncation; returns the 4x4 channel factors (order uu, ud, du, dd).

    The full Liouvillian is assembled as a sparse superoperator, linear in
    the force samples, and stepped with the same RK4 substeps as the block
    solver. Intended only for checking mode decoupling.
    """
    grid = grid or config.grid
    policy = policy or TruncationPolicy(max(n_max, 4))
    a = sp.csr_matrix(annihilation(n_max))
    d = n_max + 1
    I = sp.identity(d, format="csr")
    lowering = {"+": sp.kron(a, I, "csr"), "-": sp.kron(I, a, "csr")}
    dim = 4 * d * d
    Id = sp.identity(dim, format="csr")
    L0 = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for low in lowering.values():
        for r, L in thermal_dissipators(config.gamma, config.nbar, low.toarray()):
            L = sp.kron(sp.identity(4), sp.csr_matrix(L), "csr")
            Ld = L.conj().T.tocsr()
            LdL = Ld @ L
            L0 = L0 + r * (2 * _superop(L, Ld) - _superop(LdL, Id) - _superop(Id, LdL))
    # -i [H, rho] with H = sum_{j,m} |j><j| x (conj(f_mj) a_m + f_mj a_m^+)
    terms, samples = [], []
    sub = _substeps(config.drive(grid.t) * config.coupling, grid.dt, policy)
    h = grid.dt / sub
    fine = np.linspace(0, config.duration, 2 * sub * grid.n_steps + 1)
    for i, m in enumerate(MODES):
        for j, combo in enumerate(SPIN_ORDER):
            force = mode_forces(combo, config.drive, config)[i]
            if force.is_zero:
                continue
            proj = sp.csr_matrix(([1.0], ([j], [j])), shape=(4, 4))
            op = sp.kron(proj, lowering[m], "csr")
            opd = op.conj().T.tocsr()
            terms.append((-1j * (_superop(op, Id) - _superop(Id, op)),
                          -1j * (_superop(opd, Id) - _superop(Id, opd))))
            samples.append(force(fine))
    samples = np.array(samples)

    def rhs(v, i):
        out = L0 @ v
        for (lo, hi), f in zip(terms, samples[:, i]):
            out += np.conj(f) * (lo @ v) + f * (hi @ v)
        return out

    spin0 = np.full((4, 4), 0.25, dtype=complex)
    vac = np.zeros((d * d, d * d), dtype=complex)
    vac[0, 0] = 1.0
    v = np.kron(spin0, vac).ravel()
    for k in range(grid.n_steps * sub):
        i = 2 * k
        k1 = rhs(v, i)
        k2 = rhs(v + 0.5 * h * k1, i + 1)
        k3 = rhs(v + 0.5 * h * k2, i + 1)
        k4 = rhs(v + h * k3, i + 2)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    rho = v.reshape(dim, dim)
    D = d * d
    spin = np.array([[np.trace(rho[i * D:(i + 1) * D, j * D:(j + 1) * D]) for j in range(4)] for i in range(4)])
    return spin / spin0


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(0.5 * ((rho - sigma) + (rho - sigma).conj().T))
    return 0.5 * float(np.sum(np.abs(ev)))


def dump_density_matrix(path, rho: np.ndarray) -> None:
    """Write rho as a 16-byte header (8-byte magic, uint64 dim) followed by
    row-major little-endian complex128 entries."""
    rho = np.asarray(rho, dtype="<c16")
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError("only square matrices can be dumped")
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC + struct.pack("<Q", rho.shape[0]))
        fh.write(np.ascontiguousarray(rho).tobytes(order="C"))


def load_density_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != DUMP_MAGIC:
            raise InvalidInputError("not a density-matrix dump")
        (dim,) = struct.unpack("<Q", head[8:])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != dim * dim:
        raise InvalidInputError("truncated density-matrix dump")
    return data.reshape(dim, dim).astype(complex)

import numpy as np
import pytest

from phasegate.dynamics import ModeParams, ScaledSine, TimeGrid, propagate_closed_form, propagate_ode, zero_force
from phasegate.errors import GridMismatchError, InvalidInputError
from phasegate.fidelity import fidelity_bound, fidelity_realization
from phasegate.gate import MODES, SpinCombo, build_gate, run_gate
from phasegate.oracle import solve_two_mode_gate
from phasegate.thermal import (NoiseRealization, cumulant_fidelity, draw_increments, fidelity_samples,
                               monte_carlo_fidelity, nbar_for_exposure, noisy_labels, ou_noise,
                               sample_noisy_path, thermal_exposure)

P, A = SpinCombo.UU, SpinCombo.UD


@pytest.fixture(scope="module")
def fig6_gate(omega):
    """T = 0.3 us, gamma = 0.2 omega, compensated, coarse grid for speed."""
    return build_gate(omega, 0.2 * omega, 0.3, n_steps=1024)


def at_exposure(cfg, gnt):
    return cfg.replace(nbar=nbar_for_exposure(gnt, cfg))


# -- noise -------------------------------------------------------------------------

def test_increment_moments():
    grid = TimeGrid(1.0, 100_000)
    dW = draw_increments(7, 0, 0, grid)
    dt = grid.dt
    n = dW.size
    assert np.mean(np.abs(dW) ** 2) / dt == pytest.approx(1.0, abs=4 / np.sqrt(n))
    assert abs(np.mean(dW ** 2)) / dt < 4 * np.sqrt(2 / n)
    assert np.var(dW.real) / (dt / 2) == pytest.approx(1.0, abs=4 * np.sqrt(2 / n))
    assert np.var(dW.imag) / (dt / 2) == pytest.approx(1.0, abs=4 * np.sqrt(2 / n))


def test_keyed_streams_reproducible_and_independent():
    grid = TimeGrid(1.0, 64)
    a = NoiseRealization.draw(3, 5, grid)
    for i in range(5):
        NoiseRealization.draw(3, i, grid)
    b = NoiseRealization.draw(3, 5, grid)
    for m in MODES:
        assert np.array_equal(a.stream(m), b.stream(m))
    assert not np.array_equal(a.stream("+"), a.stream("-"))
    assert not np.array_equal(draw_increments(3, 5, 0, grid), draw_increments(3, 6, 0, grid))
    assert not np.array_equal(draw_increments(3, 5, 0, grid), draw_increments(4, 5, 0, grid))


def test_noise_grid_mismatch():
    params = ModeParams(4.0, 0.2, 1.0)
    noise = NoiseRealization.draw(0, 0, TimeGrid(1.0, 128))
    with pytest.raises(GridMismatchError):
        sample_noisy_path(0j, zero_force(1.0), params, noise, 0.1, TimeGrid(1.0, 256))
    with pytest.raises(GridMismatchError):
        sample_noisy_path(0j, zero_force(1.0), params, np.zeros(10), 0.1, TimeGrid(1.0, 256))
    with pytest.raises(InvalidInputError):
        sample_noisy_path(0j, zero_force(1.0), params, noise, -1.0, TimeGrid(1.0, 128))


# -- noisy paths ---------------------------------------------------------------------

def test_zero_temperature_schemes():
    params = ModeParams(4.0, 0.4, np.pi)
    force = ScaledSine(1.0, 2.0, np.pi, 0.4)
    errs = {"exponential": [], "euler": []}
    for n in (512, 1024, 2048):
        grid = TimeGrid(np.pi, n)
        noise = NoiseRealization.draw(1, 0, grid)
        ref = propagate_ode(0.2j, force, params, grid)
        split = sample_noisy_path(0.2j, force, params, noise, 0.0, grid)
        assert np.array_equal(split.z, propagate_closed_form(0.2j, force, params, grid).z)
        for scheme in errs:
            p = sample_noisy_path(0.2j, force, params, noise, 0.0, grid, scheme=scheme)
            errs[scheme].append(np.max(np.abs(p.z - ref.z)))
    for scheme, e in errs.items():
        ratios = np.array(e[:-1]) / np.array(e[1:])
        assert np.all((ratios > 1.8) & (ratios < 2.2)), (scheme, e)


def test_exponential_scheme_exact_for_undriven_decay():
    params = ModeParams(4.0, 0.7, 2.0)
    grid = TimeGrid(2.0, 64)
    p = sample_noisy_path(1.0, zero_force(2.0), params, np.zeros(64), 0.0, grid, scheme="exponential")
    assert np.allclose(p.z, np.exp(-0.7 * p.t), rtol=1e-13, atol=0)


@pytest.mark.parametrize("scheme", ["split", "exponential", "euler"])
def test_thermalization_variance(scheme):
    gamma, nbar, T = 0.5, 0.4, 1.5
    params = ModeParams(4.0, gamma, T)
    grid = TimeGrid(T, 256)
    n = 5000
    finals = np.array([sample_noisy_path(0j, zero_force(T), params, NoiseRealization.draw(11, i, grid),
                                         nbar, grid, scheme=scheme).final for i in range(n)])
    x = np.abs(finals) ** 2
    expected = nbar * (1 - np.exp(-2 * gamma * T))
    assert abs(x.mean() - expected) < 3 * x.std(ddof=1) / np.sqrt(n)


def test_ou_noise_vectorizes():
    grid = TimeGrid(1.0, 32)
    dW = np.array([draw_increments(0, i, 0, grid) for i in range(3)])
    block = ou_noise(dW, 0.3, 0.2, grid.dt)
    for i in range(3):
        assert np.allclose(block[i], ou_noise(dW[i], 0.3, 0.2, grid.dt), rtol=1e-15, atol=0)
    assert np.all(ou_noise(dW, 0.3, 0.0, grid.dt) == 0)


# -- fidelity ------------------------------------------------------------------------

def test_fidelity_realization_examples():
    zeros = [0j, 0j]
    assert fidelity_realization(zeros, zeros, 0j, 0.0) == 1.0
    for G in (0.1, 1.0, 3.0):
        assert fidelity_realization(zeros, zeros, 1.2 + 1j * G, 1.2) == pytest.approx(fidelity_bound(G), abs=1e-15)
    assert fidelity_realization(zeros, zeros, np.pi, 0.0) == pytest.approx(0.0, abs=1e-16)


def test_fidelity_realization_vectorizes():
    zP = [np.array([0.1, 0.2j]), np.array([0.0, 0.3])]
    zA = [np.array([0.0, 0.1]), np.array([0.05j, 0.0])]
    phase = np.array([1.0 + 0.1j, 1.3 + 0.2j])
    vec = fidelity_realization(zP, zA, phase, 1.1)
    for i in range(2):
        assert vec[i] == fidelity_realization([z[i] for z in zP], [z[i] for z in zA], phase[i], 1.1)


# -- Monte Carlo ---------------------------------------------------------------------

def test_mc_at_zero_temperature_is_exact(fig6_gate):
    est = monte_carlo_fidelity(fig6_gate, 10, seed=1)
    assert est.mean == run_gate(fig6_gate).fidelity
    assert est.std_error == 0.0 and est.n_samples == 10
    with pytest.raises(InvalidInputError):
        monte_carlo_fidelity(fig6_gate, 1)


def test_samples_independent_of_threads_and_chunking(fig6_gate):
    cfg = at_exposure(fig6_gate, 0.05)
    a = fidelity_samples(cfg, 300, seed=4)
    b = fidelity_samples(cfg, 300, seed=4, threads=2)
    c = fidelity_samples(cfg, 300, seed=4, chunk_size=7)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    # the first realizations do not depend on how many follow
    assert np.array_equal(fidelity_samples(cfg, 50, seed=4), a[:50])


def test_gamma_noise_cancellation(fig6_gate):
    cfg = at_exposure(fig6_gate, 0.1)
    out = run_gate(cfg)
    grid = cfg.grid
    for index in range(5):
        labels = noisy_labels(cfg, 9, index, out)
        assert np.max(np.abs(labels[("+", P)] - out.paths[("+", P)].z)) > 1e-3
        G = cfg.gamma * sum(grid.integrate(np.abs(labels[(m, A)] - labels[(m, P)]) ** 2) for m in MODES)
        assert G == pytest.approx(out.Gamma, rel=1e-13)


def test_std_error_scaling(fig6_gate):
    cfg = at_exposure(fig6_gate, 0.05)
    small = monte_carlo_fidelity(cfg, 500, seed=21)
    large = monte_carlo_fidelity(cfg, 2000, seed=21)
    assert small.std_error / large.std_error == pytest.approx(2.0, rel=0.2)


def test_disjoint_seeds_agree(fig6_gate):
    cfg = at_exposure(fig6_gate, 0.05)
    a = monte_carlo_fidelity(cfg, 1000, seed=100)
    b = monte_carlo_fidelity(cfg, 1000, seed=200)
    assert a.mean != b.mean
    assert abs(a.mean - b.mean) < 3 * np.hypot(a.std_error, b.std_error)


def test_fig5_labels_fluctuate(omega):
    cfg = build_gate(omega, 0.1 * omega, 0.8, n_steps=1024)
    cfg = at_exposure(cfg, 0.03)
    out = run_gate(cfg)
    n = 400
    finals = []
    for i in range(n):
        labels = noisy_labels(cfg, 5, i, out)
        # the stretch mode is not driven for P: its label wanders off the origin
        finals.append(labels[("+", P)][-1])
        assert np.max(np.abs(labels[("-", P)] - out.paths[("-", P)].z)) > 0
    x = np.abs(np.array(finals)) ** 2
    assert abs(x.mean() - thermal_exposure(cfg)) < 3 * x.std(ddof=1) / np.sqrt(n)


# -- cumulant ------------------------------------------------------------------------

def test_nbar_for_exposure(fig6_gate):
    nbar = nbar_for_exposure(0.1, fig6_gate)
    assert nbar * fig6_gate.gamma * fig6_gate.duration == pytest.approx(0.1, rel=1e-14)
    with pytest.raises(InvalidInputError):
        nbar_for_exposure(0.1, fig6_gate.replace(gamma=0.0))


@pytest.mark.parametrize("linearized", [True, False])
def test_cumulant_at_zero_temperature(fig3c, linearized):
    cfg, out = fig3c
    assert cumulant_fidelity(cfg, linearized, out) == pytest.approx(fidelity_bound(out.Gamma), abs=1e-12)


def test_cumulant_tracks_mc_at_small_exposure(fig6_gate):
    cfg = at_exposure(fig6_gate, 0.02)
    est = monte_carlo_fidelity(cfg, 2000, seed=8)
    assert abs(cumulant_fidelity(cfg, linearized=False) - est.mean) < 3 * est.std_error
    assert cumulant_fidelity(cfg) < run_gate(cfg).fidelity


@pytest.mark.slow
def test_mc_converges_to_master_equation(fig3c):
    cfg, _ = fig3c
    cfg = cfg.replace(n_steps=1024, nbar=0.05)
    oracle = solve_two_mode_gate(cfg).fidelity(projected=True)
    est = monte_carlo_fidelity(cfg, 5000, seed=3)
    assert abs(est.mean - oracle) < 3 * est.std_error

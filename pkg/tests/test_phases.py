import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasegate.dynamics import (ModeParams, Path, ScaledSine, TimeGrid, propagate_closed_form,
                                zero_force)
from phasegate.errors import GridMismatchError
from phasegate.phases import (PhaseLedger, circulation_phase, dissipative_term, dynamical_phase,
                              enclosed_area, geometric_phase, isolated_phase, ledger, wrap_phase)

OMEGA_D = 2.0
T_PERIOD = 2 * np.pi / OMEGA_D


def driven(gamma=0.0, amplitude=1.0, n_steps=4096, omega=2 * OMEGA_D):
    params = ModeParams(omega, gamma, T_PERIOD)
    force = ScaledSine(amplitude, OMEGA_D, T_PERIOD, gamma)
    return propagate_closed_form(0j, force, params, TimeGrid(T_PERIOD, n_steps)), params


def polar_path(T, n, r, rdot, theta, thetadot):
    """Path z = r e^{i theta} with the exact derivative."""
    grid = TimeGrid(T, n)
    t = grid.t
    z = r(t) * np.exp(1j * theta(t))
    zdot = (rdot(t) + 1j * r(t) * thetadot(t)) * np.exp(1j * theta(t))
    return Path(grid, z, zdot)


def origin(grid):
    return Path(grid, np.zeros(len(grid)), np.zeros(len(grid)))


# -- single-path phases -------------------------------------------------------

def test_ground_state_accrues_nothing():
    params = ModeParams(3.0, 0.2, 1.0)
    p = propagate_closed_form(0j, zero_force(1.0), params)
    assert dynamical_phase(p, params) == 0.0
    assert geometric_phase(p, params) == 0.0


def test_constant_label_phases():
    z0, params = 0.7 - 0.4j, ModeParams(3.0, 0.0, 1.3)
    p = propagate_closed_form(z0, zero_force(1.3), params)
    assert dynamical_phase(p, params) == pytest.approx(-3.0 * abs(z0) ** 2 * 1.3, rel=1e-13)
    assert geometric_phase(p, params) == pytest.approx(3.0 * abs(z0) ** 2 * 1.3, rel=1e-13)


@pytest.mark.parametrize("gamma", [0.0, 0.4])
def test_dynamical_phase_against_dense_grid(gamma):
    coarse, params = driven(gamma)
    fine, _ = driven(gamma, n_steps=4096 * 16)
    assert dynamical_phase(coarse, params) == pytest.approx(dynamical_phase(fine, params), abs=1e-10)
    assert geometric_phase(coarse, params) == pytest.approx(geometric_phase(fine, params), abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_dynamical_plus_geometric_is_circulation(gamma, amp, x, y):
    params = ModeParams(4.0, gamma, T_PERIOD)
    p = propagate_closed_form(complex(x, y), ScaledSine(amp, OMEGA_D, T_PERIOD), params,
                              TimeGrid(T_PERIOD, 256))
    total = dynamical_phase(p, params) + geometric_phase(p, params)
    assert total == pytest.approx(circulation_phase(p), abs=1e-12 * (1 + abs(total)))


# -- isolated phase and area ---------------------------------------------------

def test_identical_paths_have_no_relative_phase():
    p, _ = driven(0.4)
    assert isolated_phase(p, p) == 0.0


def test_closed_loop_against_origin_is_twice_area():
    p, _ = driven(0.0)
    assert isolated_phase(p, origin(p.grid)) == pytest.approx(2 * enclosed_area(p), rel=1e-5)


@pytest.mark.parametrize("r,nu", [(1.0, 2.0), (0.5, -3.0), (1.7, 0.5)])
def test_circle_phase_matches_area_formula(r, nu):
    T = 2 * np.pi / abs(nu)
    p = polar_path(T, 4096, lambda t: np.full_like(t, r), lambda t: np.zeros_like(t),
                   lambda t: nu * t, lambda t: np.full_like(t, nu))
    assert isolated_phase(p, origin(p.grid)) == pytest.approx(2 * np.pi * r * r * np.sign(nu), abs=1e-6)


def test_unit_circle_area():
    grid = TimeGrid(1.0)
    circle = Path(grid, np.exp(2j * np.pi * grid.t))
    assert enclosed_area(circle) == pytest.approx(np.pi, abs=1e-4)
    assert enclosed_area(Path(grid, np.zeros(len(grid)))) == 0.0


@pytest.mark.parametrize("gamma", [0.0, 0.4])
def test_greens_theorem(gamma):
    force = ScaledSine(1.0, OMEGA_D, T_PERIOD, gamma)
    params = ModeParams(2 * OMEGA_D, gamma, T_PERIOD)
    p = propagate_closed_form(0j, force, params)
    # shoelace polygon error is O(dt^2)
    assert 2 * enclosed_area(p) == pytest.approx(circulation_phase(p), rel=1e-5)


def test_grid_mismatch_rejected():
    a, _ = driven(0.0, n_steps=128)
    b, _ = driven(0.0, n_steps=256)
    with pytest.raises(GridMismatchError):
        isolated_phase(a, b)
    with pytest.raises(GridMismatchError):
        dissipative_term(a, b, 0.1)


def test_reparametrization_invariance():
    # Lissajous-type closed loop traversed once with two different time laws
    def shape(u):
        return np.cos(u) + 0.5j * np.sin(u) + 0.2 * np.cos(2 * u)

    def dshape(u):
        return -np.sin(u) + 0.5j * np.cos(u) - 0.4 * np.sin(2 * u)

    T = 1.0
    grid = TimeGrid(T, 4096)
    t = grid.t
    u1, du1 = 2 * np.pi * t / T, np.full_like(t, 2 * np.pi / T)
    u2 = 2 * np.pi * t / T + 0.6 * np.sin(2 * np.pi * t / T)
    du2 = 2 * np.pi / T * (1 + 0.6 * np.cos(2 * np.pi * t / T))
    p1 = Path(grid, shape(u1), dshape(u1) * du1)
    p2 = Path(grid, shape(u2), dshape(u2) * du2)
    assert circulation_phase(p1) == pytest.approx(circulation_phase(p2), rel=1e-8)


def test_scaling_force_by_sqrt2_doubles_phase():
    a, _ = driven(0.0)
    b, _ = driven(0.0, amplitude=np.sqrt(2))
    zero = origin(a.grid)
    assert isolated_phase(b, zero) == pytest.approx(2 * isolated_phase(a, zero), rel=1e-12)


# -- dissipative term ------------------------------------------------------------

def test_dissipative_identical_paths():
    p, _ = driven(0.4)
    phi_L, eta = dissipative_term(p, p, 0.4)
    assert abs(phi_L) < 1e-18 and eta == 0.0


def test_dissipative_partner_pinned_at_origin():
    p, params = driven(0.4)
    phi_L, eta = dissipative_term(origin(p.grid), p, 0.4)
    assert phi_L == 0.0
    assert eta == pytest.approx(0.4 * p.grid.integrate(np.abs(p.z) ** 2), rel=1e-14)


def test_mirror_time_symmetric_path_has_no_dissipative_phase():
    # z1(T - t) = conj(z1(t)) against a real constant label: Im(z0 z1*) is odd about T/2
    T = 1.0
    grid = TimeGrid(T, 2048)
    t = grid.t
    z1 = 0.3 + np.sin(np.pi * t / T) + 1j * np.sin(2 * np.pi * t / T)
    assert np.allclose(z1[::-1], np.conj(z1))
    p1 = Path(grid, z1)
    p0 = Path(grid, np.full(len(grid), 0.8 + 0j))
    phi_L, eta = dissipative_term(p0, p1, 0.3)
    assert abs(phi_L) < 1e-14
    assert eta > 0


def test_dissipative_form_polar():
    # closed single path, partner at origin: phi_isol = int theta' r^2, eta = gamma int r^2
    T, gamma = 2.0, 0.25
    p = polar_path(T, 4096, lambda t: np.sin(np.pi * t / T), lambda t: np.pi / T * np.cos(np.pi * t / T),
                   lambda t: 3 * t, lambda t: np.full_like(t, 3.0))
    params = ModeParams(5.0, gamma, T)
    led = ledger(p, origin(p.grid), params)
    assert led.phi_isol == pytest.approx(3 * T / 2, rel=1e-10)
    assert led.eta == pytest.approx(gamma * T / 2, rel=1e-10)
    assert led.phi_L == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(0, 2), st.floats(0, 2 * np.pi))
def test_eta_nonnegative_and_rotation_invariant(c, gamma, angle):
    T = 1.0
    grid = TimeGrid(T, 256)
    t = grid.t
    a = Path(grid, c[0] * np.sin(3 * t) + 1j * c[1] * t)
    b = Path(grid, c[2] * np.cos(t) + 1j * c[3] * t * t)
    _, eta = dissipative_term(a, b, gamma)
    _, eta_rot = dissipative_term(a.rotated(angle), b.rotated(angle), gamma)
    assert eta >= 0
    assert eta_rot == pytest.approx(eta, rel=1e-12, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.floats(0, 2))
def test_phi_L_vanishes_with_pinned_partner(c, gamma):
    grid = TimeGrid(1.0, 128)
    t = grid.t
    p = Path(grid, c[0] * np.sin(5 * t) + 1j * (c[1] * t + c[2]))
    assert dissipative_term(p, origin(grid), gamma)[0] == 0.0
    assert dissipative_term(origin(grid), p, gamma)[0] == 0.0


# -- ledger ----------------------------------------------------------------------

def test_ledger_undamped_pair():
    p, params = driven(0.0)
    led = ledger(p, origin(p.grid), params)
    assert led.phi_L == 0.0 and led.eta == 0.0
    assert led.phi_total.imag == 0.0
    assert led.phi_isol == pytest.approx(led.phi_d + led.phi_g, abs=1e-15)


def test_ledger_identical_paths_is_zero():
    p, params = driven(0.4)
    led = ledger(p, p, params)
    assert (led.phi_d, led.phi_g, led.phi_isol, led.eta) == (0.0, 0.0, 0.0, 0.0)
    assert abs(led.phi_L) < 1e-18


def test_ledger_addition_and_total():
    a = PhaseLedger(1.0, 2.0, 3.0, 0.5, 0.25)
    b = a + a
    assert b.phi_total == complex(7.0, 0.5)


def test_wrap_phase():
    assert wrap_phase(np.pi) == np.pi
    assert wrap_phase(-np.pi) == np.pi
    assert wrap_phase(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert wrap_phase(0.1) == pytest.approx(0.1)

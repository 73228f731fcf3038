"""Jost solutions, scattering Wronskians and zero-energy resonances."""

import numpy as np
import pytest

from pphi2.grids import Grid
from pphi2.potential import builtin_potential
from pphi2.schrodinger.jost import (
    Side,
    detect_resonance,
    jost_family,
    jost_solve,
    scattering_data,
)


def well_transmission_sq(V0, a, k):
    """Closed-form |T(k)|^2 for the finite square well (textbook matching)."""
    q = np.sqrt(k ** 2 + V0)
    return 1.0 / (1.0 + V0 ** 2 * np.sin(2 * q * a) ** 2 / (4 * k ** 2 * q ** 2))


@pytest.fixture(scope="module")
def grid():
    return Grid.uniform(-15.0, 15.0, 3001)


def test_free_jost_is_plane_wave(grid):
    V = builtin_potential("Zero", [])
    sol = jost_solve(V, 1.0, Side.PLUS, grid, validate=False)
    assert np.max(np.abs(sol.theta - np.exp(1j * grid.x))) < 1e-12
    solm = jost_solve(V, 1.0, Side.MINUS, grid, validate=False)
    assert np.max(np.abs(solm.theta - np.exp(-1j * grid.x))) < 1e-12


def test_free_scattering_data(grid):
    V = builtin_potential("Zero", [])
    ks = np.linspace(0.1, 5.0, 20)
    sd = scattering_data(V, ks, grid)
    assert np.max(np.abs(sd.w - 2j * ks)) < 1e-10
    assert np.max(np.abs(sd.m - 1.0)) < 1e-10
    assert np.max(np.abs(sd.m_pp)) < 1e-10
    assert np.max(np.abs(sd.m_mm)) < 1e-10


def test_square_well_transmission_oracle(grid):
    V = builtin_potential("SquareWell", [2.0, 1.0])
    ks = np.linspace(0.2, 6.0, 30)
    sd = scattering_data(V, ks, grid)
    exact = well_transmission_sq(2.0, 1.0, ks)
    assert np.max(np.abs(1.0 / np.abs(sd.m) ** 2 - exact)) < 1e-6


def test_unitarity_and_wronskian_constancy(grid):
    V = builtin_potential("SquareWell", [2.0, 1.0])
    ks = np.geomspace(1e-3, 50.0, 40)
    sd = scattering_data(V, ks, grid)
    assert sd.max_unitarity_defect() < 1e-6
    assert sd.wronskian_spread < 1e-8
    # |m| >= 1 follows from unitarity; asserted directly
    assert np.all(np.abs(sd.m) >= 1.0 - 1e-9)


def test_jost_conjugation_identity(grid):
    V = builtin_potential("Gaussian", [1.0, 1.0])
    k = 0.7
    plus = jost_family(V, [k, -k], Side.PLUS, grid)[0]
    assert np.max(np.abs(plus[:, 1] - np.conj(plus[:, 0]))) < 1e-10


def test_jost_eigen_residual():
    # residual via 3-point differences needs h^2 k^4 / 12 below tolerance
    V = builtin_potential("Gaussian", [-1.0, 1.0])
    fine = Grid.uniform(-12.0, 12.0, 24001)
    sol = jost_solve(V, 1.3, Side.PLUS, fine, validate=False)
    assert sol.residual(V.V) < 1e-6


def test_jost_picard_cross_check(grid):
    # window [x_match - 5, x_match] crosses the well where V != 0, so the
    # Volterra iterates provide a genuine independent check
    V = builtin_potential("SquareWell", [2.0, 1.0])
    sol = jost_solve(V, 1.3, Side.PLUS, grid)
    assert np.isfinite(sol.picard_gap)
    assert sol.picard_gap > 0.0
    assert sol.picard_bound < 1.0


def test_jost_asymptotic_estimate_quick_decay(grid):
    # |theta_+ - e^{ikx}| <= C <x>^{1-mu} for x >= x_match side; checked on
    # the decaying right tail of a power potential with mu = 3
    V = builtin_potential("PowerTail", [1.0, 3.0, 1.0])
    sol = jost_solve(V, 1.0, Side.PLUS, grid, validate=False)
    xs = grid.x[grid.x > 4.0]
    dev = np.abs(sol.theta[grid.x > 4.0] - np.exp(1j * sol.zeta * xs))
    slope = np.polyfit(np.log(xs), np.log(dev + 1e-300), 1)[0]
    assert slope < -(V.mu - 1) * 0.8


def test_free_case_has_zero_energy_resonance():
    V = builtin_potential("Zero", [])
    w0, is_res = detect_resonance(V)
    assert abs(w0) < 1e-8
    assert is_res


def test_well_resonance_at_emergence_threshold():
    # odd bound state emerges at sqrt(V0) a = pi/2
    V0_star = (np.pi / 2) ** 2
    V = builtin_potential("SquareWell", [V0_star, 1.0])
    w0, is_res = detect_resonance(V)
    assert is_res
    V_off = builtin_potential("SquareWell", [2.0, 1.0])
    w0_off, is_res_off = detect_resonance(V_off)
    assert not is_res_off
    assert abs(w0_off) > abs(w0)


def test_resonance_bisection_matches_threshold():
    """Depth of resonance onset located by bisection on w(0)."""
    from pphi2.schrodinger.jost import resonance_threshold_bisection

    a = 1.0
    target = (np.pi / 2) ** 2
    found = resonance_threshold_bisection(
        lambda V0: builtin_potential("SquareWell", [V0, a]), 2.0, 3.0)
    assert abs(found - target) / target < 1e-4


def test_sech2_potential_resonance():
    # V = -2 sech^2 x is reflectionless with a threshold structure at the
    # band edge; the zero-energy Jost solutions are u_+ = tanh shifted,
    # giving w(0) = 0
    V0 = builtin_potential("Zero", [])

    def sech2(x):
        x = np.asarray(x, dtype=float)
        return -2.0 / np.cosh(x) ** 2

    from pphi2.potential import ReducedPotential, SignProfile
    V = ReducedPotential(V=sech2, mu=np.inf, profile=SignProfile.QUICK_DECAY)
    w0, is_res = detect_resonance(V)
    assert is_res

"""Bound states against closed-form oracles."""

import numpy as np
import pytest
from scipy.optimize import brentq

from pphi2.grids import Grid
from pphi2.potential import ReducedPotential, SignProfile, builtin_potential
from pphi2.schrodinger.boundstates import bound_states, orthonormality_defect


def well_levels(V0, a):
    """Eigenvalues lambda < 0 of -u'' - V0 1_{|x|<=a} u = lambda u.

    Independent oracle: bisection on the even/odd transcendental matching
    equations q tan(qa) = kap and -q cot(qa) = kap, q^2 + kap^2 = V0.
    """
    levels = []

    def even_f(lam):
        q = np.sqrt(V0 + lam)
        kap = np.sqrt(-lam)
        return q * np.tan(q * a) - kap

    def odd_f(lam):
        q = np.sqrt(V0 + lam)
        kap = np.sqrt(-lam)
        return q / np.tan(q * a) + kap

    # scan branches between tangent poles
    qs = np.linspace(1e-9, np.sqrt(V0) - 1e-12, 20001)
    lams = qs ** 2 - V0
    for f in (even_f, odd_f):
        vals = np.array([f(l) for l in lams])
        finite = np.isfinite(vals)
        for i in range(len(lams) - 1):
            if not (finite[i] and finite[i + 1]):
                continue
            if vals[i] == 0.0:
                levels.append(lams[i])
            if vals[i] * vals[i + 1] < 0 and abs(vals[i + 1] - vals[i]) < 1e3:
                levels.append(brentq(f, lams[i], lams[i + 1], xtol=1e-13))
    return sorted(levels)


@pytest.mark.parametrize("V0", [0.3, 1.0, 2.0, 4.0, 7.5, 12.0, 20.0, 33.0, 50.0, 80.0])
def test_square_well_count_matches_oracle(V0):
    a = 1.0
    V = builtin_potential("SquareWell", [V0, a])
    grid = Grid.uniform(-30.0, 30.0, 20001)
    m_inf = 1.0
    states = bound_states(V, grid, m_inf)
    oracle = well_levels(V0, a)
    assert len(states) == len(oracle)
    # closed-form count 1 + floor(2 a sqrt(V0) / pi) away from thresholds
    assert len(states) == 1 + int(np.floor(2 * a * np.sqrt(V0) / np.pi))
    got = np.array([s.lam for s in states])
    # FD eigenvalue error is O(h^2 kappa^4) with kappa^2 <= V0
    tol = 0.06 * grid.h ** 2 * (1.0 + V0) ** 2 + 1e-5
    assert np.max(np.abs(got - np.array(oracle))) < tol


def test_zero_potential_has_no_bound_states():
    V = builtin_potential("Zero", [])
    grid = Grid.uniform(-20.0, 20.0, 2001)
    assert bound_states(V, grid, 1.0) == []


def test_poschl_teller_level():
    # V = -2 sech^2 x has the single level lambda = -1 (reflectionless)
    def sech2(x):
        x = np.asarray(x, dtype=float)
        return -2.0 / np.cosh(x) ** 2

    V = ReducedPotential(V=sech2, mu=np.inf, profile=SignProfile.QUICK_DECAY)
    grid = Grid.uniform(-16.0, 16.0, 16001)
    states = bound_states(V, grid, 1.0)
    assert len(states) == 1
    s = states[0]
    assert abs(s.lam - (-1.0)) < 1e-6
    assert abs(s.epsilon - (1.0 - 1.0)) < 1e-6
    # ground state of sech^2 is even and positive after sign fixing
    assert s.psi[grid.n // 2] > 0
    assert s.eigen_residual(V.V, grid, 1.0) < 1e-6


def test_orthonormality_and_normalization():
    V = builtin_potential("SquareWell", [20.0, 1.0])
    grid = Grid.uniform(-25.0, 25.0, 10001)
    states = bound_states(V, grid, 1.0)
    assert len(states) >= 3
    assert orthonormality_defect(states, grid) < 1e-8
    for s in states:
        assert abs(np.trapezoid(s.psi ** 2, grid.x) - 1.0) < 1e-10

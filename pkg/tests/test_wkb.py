"""Quasiclassical solutions for slowly decaying potentials."""

import numpy as np
import pytest

from pphi2.errors import ZetaTooSmall
from pphi2.potential import builtin_potential
from pphi2.schrodinger.jost import Side
from pphi2.schrodinger.wkb import (
    wkb_factored_sweep,
    wkb_resonance,
    wkb_scattering,
    wkb_solve,
)


@pytest.fixture(scope="module")
def v_neg():
    return builtin_potential("PowerTail", [1.0, 1.5, -1.0])


@pytest.fixture(scope="module")
def v_pos():
    return builtin_potential("PowerTail", [1.0, 1.5, 1.0])


def test_zeta_floor(v_neg):
    with pytest.raises(ZetaTooSmall):
        wkb_solve(v_neg, 0.05, Side.PLUS, eps=0.1)


def test_representation_identity(v_neg):
    sol = wkb_solve(v_neg, 0.5, Side.PLUS, eps=0.3)
    assert sol.representation_identity_defect() < 1e-8


def test_conjugation_identity(v_neg):
    sp = wkb_solve(v_neg, 0.5, Side.PLUS, eps=0.3)
    sm = wkb_solve(v_neg, -0.5 + 0.0j, Side.PLUS, eps=0.3)
    # eta_bar(x, zeta) = eta(x, -conj zeta); for real k: conj(eta(k)) = eta(-k)
    common = np.intersect1d(sp.x, sm.x)
    ip = np.searchsorted(sp.x, common)
    im = np.searchsorted(sm.x, common)
    assert np.max(np.abs(np.conj(sp.eta[ip]) - sm.eta[im])) < 1e-8


def test_eigen_residual_volterra(v_neg):
    sol = wkb_solve(v_neg, 0.5, Side.PLUS, eps=0.3)
    assert sol.eigen_residual(v_neg) < 1e-6


def test_volterra_vs_factored_oracle(v_neg):
    """Two independent constructions of eta_+ agree."""
    k = 0.5
    sol = wkb_solve(v_neg, k, Side.PLUS, eps=0.3)
    xs = sol.x[(sol.x >= sol.R) & (sol.x <= sol.R + 8.0)][::5]
    eta_o, eta_po, _ = wkb_factored_sweep(v_neg, [k], 0.3, xs, R=sol.R)
    mine = np.interp(xs, sol.x, sol.eta.real) + 1j * np.interp(xs, sol.x, sol.eta.imag)
    assert np.max(np.abs(mine - eta_o[:, 0])) < 1e-6


def test_wkb_amplitude_bounds(v_neg):
    # |eta_+| <= C |k|^{-1/2}, |eta_+'| <= C |k|^{1/2} beyond R
    for k in (0.4, 1.0, 3.0):
        sol = wkb_solve(v_neg, k, Side.PLUS, eps=0.3)
        tail = sol.x >= sol.R
        assert np.max(np.abs(sol.eta[tail])) < 4.0 * k ** -0.5
        assert np.max(np.abs(sol.eta_prime[tail])) < 4.0 * k ** 0.5


def test_wkb_scattering_identities(v_neg):
    ks = np.geomspace(0.3, 50.0, 12)
    sd = wkb_scattering(v_neg, ks, eps=0.3)
    assert sd.max_unitarity_defect() < 1e-6
    assert np.max(sd.normalization_defect) < 1e-6
    assert np.all(np.abs(sd.m) >= 1.0 - 1e-9)
    # |w(k)| ~ 2|k| at large k
    assert abs(np.abs(sd.w[-1]) / (2 * ks[-1]) - 1.0) < 1e-2


def test_wkb_scattering_small_k(v_neg):
    # negative tails keep the construction usable at small momenta
    ks = np.geomspace(1e-3, 0.1, 6)
    sd = wkb_scattering(v_neg, ks, eps=1e-3)
    assert sd.max_unitarity_defect() < 1e-6


def test_theta_uniform_bound(v_neg):
    from pphi2.schrodinger.wkb import _theta_family

    ks = np.geomspace(0.3, 20.0, 8)
    xeval = np.linspace(0.0, 6.0, 13)
    th, _ = _theta_family(v_neg, ks, 0.3, xeval, Side.PLUS)
    assert np.max(np.abs(th)) < 10.0


def test_positive_tail_no_resonance(v_pos):
    m0, is_res, spread = wkb_resonance(v_pos)
    assert not is_res
    assert spread < 1e-8
    # stability under doubling of the initialization radius
    from pphi2.schrodinger.wkb import init_radius, pick_radius_zero
    x_far = init_radius(v_pos, 0.0 + 0.0j, pick_radius_zero(v_pos))
    m0a, _, _ = wkb_resonance(v_pos, x_far=x_far)
    m0b, _, _ = wkb_resonance(v_pos, x_far=2 * x_far)
    assert abs(m0b - m0a) / abs(m0a) < 1e-4


def test_negative_tail_wronskian_constancy(v_neg):
    m0, is_res, spread = wkb_resonance(v_neg)
    assert spread < 1e-8


def test_positive_tail_resonance_sweep():
    """is_resonance flips at an amplitude where a zero-energy solution
    with the decaying asymptotics on both sides exists."""

    def make(c):
        base = builtin_potential("PowerTail", [1.0, 1.5, 1.0])
        well = builtin_potential("Gaussian", [-c, 1.0])
        from pphi2.potential import ReducedPotential, SignProfile
        return ReducedPotential(
            V=lambda x: base.V(x) + well.V(x),
            dV=lambda x: base.dV(x) + well.dV(x),
            d2V=lambda x: base.d2V(x) + well.d2V(x),
            mu=1.5, profile=SignProfile.SLOW_POSITIVE)

    def m0_of(c):
        return np.real(wkb_resonance(make(c), x_far=600.0)[0])

    lo, hi = 1.0, 4.0
    f_lo = m0_of(lo)
    assert np.sign(f_lo) != np.sign(m0_of(hi))
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        fm = m0_of(mid)
        if np.sign(fm) == np.sign(f_lo):
            lo, f_lo = mid, fm
        else:
            hi = mid
    c_star = 0.5 * (lo + hi)
    m0_at, is_res_at, _ = wkb_resonance(make(c_star), x_far=600.0)
    assert is_res_at
    assert not wkb_resonance(make(c_star + 0.5), x_far=600.0)[1]

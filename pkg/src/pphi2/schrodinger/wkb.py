"""Quasiclassical (WKB) solutions for slowly decaying potentials (mu <= 2).

With F(x, zeta) = (V - zeta^2)^{1/2} (principal branch, -pi < arg <= pi) and
S(a, x) = int_a^x F dy, the solutions eta_+- with asymptotics
F^{-1/2} e^{-+S(0,x)} are built two independent ways:

* Picard iteration of the Volterra system for (u1, u2),

      u1(x) = -int_x^inf e^{-2S(x,y)} M(y)(u1+u2) dy,
      u2(x) = 1 + int_x^inf M(y)(u1+u2) dy,
      M = (4 V'' F^{-3} - 5 (V')^2 F^{-5}) / 32,

  with eta_+ = F^{-1/2} e^{-S(0,x)} (u1 + u2) and the matching derivative
  combination; the oscillatory kernel is integrated with exact exponential
  weights per panel on a grid graded by the local wavelength.

* Direct integration of the phase-factored ODE w'' = 2 F w' + F' w
  (eta = e^{-S} w) inward from x_far with quasiclassical initial data; the
  factored form stays smooth at every momentum, so this route serves as the
  independent oracle for the Volterra construction and as the precision
  path for scattering data.

The potential tail beyond x_far is effectively dropped; x_far is pushed
until the initialization error int_{x_far}^inf |M| dy is below tolerance
(capped for tails decaying slower than any budget), and every internal
identity (Wronskian normalization, unitarity, conjugation) is exact for
the truncated dynamics because the normalizing phase integrals reuse the
same cumulative quadrature as the amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    IndefiniteTailSign,
    KernelNotContractive,
    SlowDecayProfile,
    ZetaTooSmall,
)
from ..grids import panel_quadrature
from ..potential import ReducedPotential, SignProfile
from .integrate import schrodinger_rk4, wronskian
from .jost import ScatteringData, Side, TOL_RES

INIT_TOL = 1e-7       # WKB initialization error budget at x_far
X_FAR_CAP = 2.0e6


def principal_sqrt(z):
    """z^{1/2} with branch -pi < arg z <= pi (negative reals map to +i)."""
    z = np.asarray(z, dtype=complex)
    out = np.sqrt(z)
    neg_cut = (z.real < 0) & (z.imag == 0) & (np.copysign(1.0, z.imag) < 0)
    return np.where(neg_cut, -out, out)


def F_of(V: ReducedPotential, x, zeta):
    """F(x, zeta) = (V - zeta^2)^{1/2} as the boundary value from Im zeta > 0.

    For real k the sector limit puts V - k^2 on the -i0 side of the cut when
    k > 0 (so F -> -ik in the free region, eta_+ ~ e^{+ikx}) and on the +i0
    side when k < 0; zeta = 0 is taken as the k -> 0+ limit.
    """
    zeta = complex(zeta)
    q = np.asarray(V.V(np.asarray(x, dtype=float)) - zeta ** 2, dtype=complex)
    if zeta.imag == 0.0 and zeta.real >= 0.0:
        on_cut = (q.real < 0) & (q.imag == 0)
        return np.where(on_cut, -1j * np.sqrt(np.maximum(-q.real, 0.0)),
                        principal_sqrt(q))
    return principal_sqrt(q)


def F_multi(V: ReducedPotential, x, zetas):
    """F(x, zeta_j) for a batch, scalar or array x broadcast against zetas."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    q = np.asarray(V.V(np.asarray(x, dtype=float)), dtype=complex)
    q = q[..., None] - zetas ** 2 if q.ndim else q - zetas ** 2
    F = principal_sqrt(q)
    s = np.where(zetas.real >= 0.0, 1.0, -1.0)
    real_zeta = zetas.imag == 0.0
    on_cut = (q.real < 0) & (q.imag == 0) & real_zeta
    return np.where(on_cut, -1j * s * np.sqrt(np.maximum(-q.real, 0.0)), F)


def M_of(V: ReducedPotential, x, zeta):
    """Volterra kernel M = (4 V'' F^-3 - 5 V'^2 F^-5) / 32."""
    x = np.asarray(x, dtype=float)
    F = F_of(V, x, zeta)
    return (4.0 * V.d2V(x) * F ** -3 - 5.0 * V.dV(x) ** 2 * F ** -5) / 32.0


def _reflect(V: ReducedPotential) -> ReducedPotential:
    return ReducedPotential(
        V=lambda x: V.V(-np.asarray(x, dtype=float)),
        mu=V.mu, profile=V.profile,
        dV=lambda x: -V.dV(-np.asarray(x, dtype=float)),
        d2V=lambda x: V.d2V(-np.asarray(x, dtype=float)),
        breakpoints=tuple(sorted(-b for b in V.breakpoints)))


def pick_radius(V: ReducedPotential, eps: float) -> float:
    """Base radius R(eps) of the quasiclassical construction.

    Positive or indefinite tails use the |V| <= eps^2/2 rule so that F is
    comparable to |zeta| beyond R for every |zeta| >= eps.  Definitely
    negative tails never produce a turning point, so R only needs to reach
    the region where the tail sign is locked; this keeps R bounded as
    eps -> 0 (the route of the small-momentum bounds for negative tails).
    """
    xs = np.geomspace(0.5, X_FAR_CAP, 1200)
    vr, vl = V.V(xs), V.V(-xs)
    if V.profile is SignProfile.SLOW_NEGATIVE:
        neg = (vr < 0) & (vl < 0)
        locked = np.logical_and.accumulate(neg[::-1])[::-1]
        if not locked.any():
            raise IndefiniteTailSign("tail sign never locks negative")
        return float(max(1.0, xs[np.argmax(locked)]))
    mag = np.maximum(np.abs(vr), np.abs(vl))
    ok = np.maximum.accumulate(mag[::-1])[::-1] <= eps ** 2 / 2
    if not ok.any():
        raise ZetaTooSmall(f"|V| <= eps^2/2 = {eps**2/2:.3e} is never reached")
    return float(max(1.0, xs[np.argmax(ok)]))


def init_radius(V: ReducedPotential, zeta, R: float,
                tol: float = INIT_TOL) -> float:
    """x_far with int_{x_far}^inf |M(y, zeta)| dy below tol (capped)."""
    X = max(2 * R, 8.0)
    while X < X_FAR_CAP:
        probe = np.geomspace(X, 4 * X, 48)
        m = np.abs(M_of(V, probe, zeta))
        tail = float(np.trapezoid(m, probe))
        slope = np.polyfit(np.log(probe[-16:]), np.log(m[-16:] + 1e-300), 1)[0]
        ext = m[-1] * probe[-1] / max(-slope - 1.0, 0.1)
        if tail + ext < tol:
            return float(X)
        X *= 2.0
    return float(X_FAR_CAP)


def graded_nodes(V: ReducedPotential, zeta, x_lo: float, x_far: float,
                 forced=(), df_max: float = 0.03, rel_max: float = 0.04,
                 h_min: float = 5e-4):
    """Ascending nodes with |F| h <= df_max and h <= rel_max * (1 + |y|)."""
    nodes = [x_far]
    y = x_far
    while y > x_lo:
        f = float(np.max(np.abs(F_of(V, np.array([y]), zeta))))
        h = max(min(df_max / max(f, 1e-12), rel_max * (1.0 + abs(y))), h_min)
        y = max(x_lo, y - h)
        nodes.append(y)
    return np.unique(np.concatenate([
        nodes, np.asarray(forced, dtype=float),
        [b for b in V.breakpoints if x_lo < b < x_far]]))


@dataclass
class WkbSolution:
    side: Side
    zeta: complex
    x: np.ndarray                 # ascending sample points
    eta: np.ndarray
    eta_prime: np.ndarray
    u1: np.ndarray                # Volterra unknowns on the tail nodes
    u2: np.ndarray
    tail_x: np.ndarray
    F: np.ndarray                 # F(x, zeta) at sample points
    S: np.ndarray                 # S(0, x, zeta) at sample points
    R: float
    x_far: float
    kernel_mass: float = np.nan   # int_R^{x_far} |M| dy
    iterations: int = 0

    def representation_identity_defect(self) -> float:
        """sup |eta - F^{-1/2} e^{-S} (u1 + u2)| over the tail nodes."""
        idx = np.searchsorted(self.x, self.tail_x)
        F, S = self.F[idx], self.S[idx]
        rec = F ** -0.5 * np.exp(-S) * (self.u1 + self.u2)
        return float(np.max(np.abs(self.eta[idx] - rec)))

    def eigen_residual(self, V: ReducedPotential) -> float:
        """sup-norm ODE residual via 3-point differences.

        Evaluated on the uniformly sampled extension segment (x < R), whose
        data were integrated from the Volterra-assembled boundary values, so
        errors in either zone surface here.
        """
        d = np.diff(self.x)
        if d.size < 8:
            return np.nan
        if self.side is Side.PLUS:
            ref = d[0]
            bad = np.abs(d - ref) > 1e-12 * max(1.0, abs(ref))
            n = int(np.argmax(bad)) if bad.any() else d.size
            xu, eu, h = self.x[:n + 1], self.eta[:n + 1], ref
        else:
            ref = d[-1]
            bad = np.abs(d[::-1] - ref) > 1e-12 * max(1.0, abs(ref))
            n = int(np.argmax(bad)) if bad.any() else d.size
            xu, eu, h = self.x[-n - 1:], self.eta[-n - 1:], ref
        if xu.size < 8:
            return np.nan
        d2 = (eu[2:] - 2 * eu[1:-1] + eu[:-2]) / h ** 2
        res = -d2 + (V.V(xu[1:-1]) - self.zeta ** 2) * eu[1:-1]
        return float(np.max(np.abs(res)) / np.max(np.abs(eu)))


def _cumulative_phase(V, zeta, xs):
    """S(xs[0], x) along ascending nodes by 5-point Gauss per interval."""
    t, w = np.polynomial.legendre.leggauss(5)
    a, b = xs[:-1], xs[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    acc = np.zeros(len(a), dtype=complex)
    for ti, wi in zip(t, w):
        acc = acc + wi * F_of(V, mid + half * ti, zeta)
    return np.concatenate([[0.0], np.cumsum(acc * half)])


def _filon_weights(dtau):
    """Moments of e^{-2 tau} against linear interpolation on [0, d]."""
    d = np.asarray(dtau, dtype=complex)
    small = np.abs(d) < 1e-6
    ds = np.where(small, 1.0, d)
    e = np.exp(-2.0 * ds)
    A = np.where(small, d * (1.0 - d), (1.0 - e) / 2.0)
    B = np.where(small, d * (0.5 - 2.0 * d / 3.0),
                 (1.0 - (1.0 + 2.0 * ds) * e) / (4.0 * ds))
    return A, B


def _volterra_solve(V, zeta, xs, S_rel, tol=1e-10, max_iter=200):
    """Picard iteration for (u1, u2) on ascending tail nodes xs."""
    Fv = F_of(V, xs, zeta)
    Mv = M_of(V, xs, zeta)
    dS = np.diff(S_rel)
    A, B = _filon_weights(dS)
    decay = np.exp(-2.0 * dS)
    u1 = np.zeros(len(xs), dtype=complex)
    u2 = np.ones(len(xs), dtype=complex)
    mass = float(np.trapezoid(np.abs(Mv), xs))
    dx = np.diff(xs)
    for it in range(max_iter):
        g = Mv * (u1 + u2)
        G = g / Fv
        seg2 = 0.5 * (g[1:] + g[:-1]) * dx
        I2 = np.zeros_like(u2)
        I2[:-1] = np.cumsum(seg2[::-1])[::-1]
        new2 = 1.0 + I2
        panels = G[:-1] * A + (G[1:] - G[:-1]) * B
        J = np.zeros_like(u1)
        for i in range(len(xs) - 2, -1, -1):
            J[i] = decay[i] * J[i + 1] + panels[i]
        new1 = -J
        change = max(float(np.max(np.abs(new1 - u1))),
                     float(np.max(np.abs(new2 - u2))))
        u1, u2 = new1, new2
        if change < tol:
            return u1, u2, mass, it + 1
    raise KernelNotContractive(
        f"Volterra iteration stalled (kernel mass {mass:.3f})")


def _phase_from_zero(V, zeta, x):
    return complex(panel_quadrature(
        lambda y: F_of(V, y, zeta), 0.0, float(x),
        breakpoints=V.breakpoints, n=10, max_panel=0.25))


def wkb_solve(V: ReducedPotential, zeta: complex, side: Side, eps: float,
              x_lo: float = -2.0) -> WkbSolution:
    """Quasiclassical solution eta_side(x, zeta), Volterra construction."""
    if V.profile not in (SignProfile.SLOW_NEGATIVE, SignProfile.SLOW_POSITIVE):
        raise SlowDecayProfile("wkb_solve requires a slow-decay profile")
    zeta = complex(zeta)
    if abs(zeta) < eps:
        raise ZetaTooSmall(f"|zeta| = {abs(zeta):.3e} < eps = {eps:.3e}")
    if side is Side.MINUS:
        sol = wkb_solve(_reflect(V), zeta, Side.PLUS, eps, x_lo=x_lo)
        return WkbSolution(side=Side.MINUS, zeta=zeta, x=-sol.x[::-1],
                           eta=sol.eta[::-1], eta_prime=-sol.eta_prime[::-1],
                           u1=sol.u1[::-1], u2=sol.u2[::-1],
                           tail_x=-sol.tail_x[::-1], F=sol.F[::-1],
                           S=sol.S[::-1], R=sol.R, x_far=sol.x_far,
                           kernel_mass=sol.kernel_mass,
                           iterations=sol.iterations)

    R = pick_radius(V, eps)
    x_far = init_radius(V, zeta, R)
    xs = graded_nodes(V, zeta, R, x_far, df_max=0.008, rel_max=0.005,
                      h_min=2e-4)
    S_rel = _cumulative_phase(V, zeta, xs)
    try:
        u1, u2, mass, iters = _volterra_solve(V, zeta, xs, S_rel)
    except KernelNotContractive:
        R *= 2.0
        xs = graded_nodes(V, zeta, R, x_far, df_max=0.008, rel_max=0.005,
                          h_min=2e-4)
        S_rel = _cumulative_phase(V, zeta, xs)
        u1, u2, mass, iters = _volterra_solve(V, zeta, xs, S_rel)

    S = _phase_from_zero(V, zeta, R) + S_rel       # S(0, x) on tail nodes
    Fv = F_of(V, xs, zeta)
    dV = V.dV(xs)
    eta = Fv ** -0.5 * np.exp(-S) * (u1 + u2)
    eta_p = Fv ** -0.5 * np.exp(-S) * ((Fv - dV / (4 * Fv ** 2)) * u1
                                       - (Fv + dV / (4 * Fv ** 2)) * u2)
    if x_lo < R:
        n_ext = max(48, int((R - x_lo) * 1000))
        x_ext = np.linspace(x_lo, R, n_ext, endpoint=False)
        hmax = min(2e-3, 0.3 / max(1.0, abs(zeta)))
        ev, evp = schrodinger_rk4(V.V, np.array([zeta]), float(R),
                                  float(x_lo), (eta[0], eta_p[0]),
                                  sample_at=x_ext,
                                  breakpoints=V.breakpoints, hmax=hmax)
        S_ext = np.array([_phase_from_zero(V, zeta, t) for t in x_ext])
        x_all = np.concatenate([x_ext, xs])
        eta_all = np.concatenate([ev[:, 0], eta])
        etap_all = np.concatenate([evp[:, 0], eta_p])
        F_all = np.concatenate([F_of(V, x_ext, zeta), Fv])
        S_all = np.concatenate([S_ext, S])
    else:
        x_all, eta_all, etap_all, F_all, S_all = xs, eta, eta_p, Fv, S
    return WkbSolution(side=Side.PLUS, zeta=zeta, x=x_all, eta=eta_all,
                       eta_prime=etap_all, u1=u1, u2=u2, tail_x=xs,
                       F=F_all, S=S_all, R=R, x_far=x_far,
                       kernel_mass=mass, iterations=iters)


# -- factored-ODE route (oracle for wkb_solve, workhorse for scattering) -----

def wkb_factored_sweep(V: ReducedPotential, zetas, eps: float,
                       x_samples, R: float = None, df_max: float = 0.25):
    """eta_+(x, zeta) for a momentum batch via w'' = 2 F w' + F' w.

    Returns (eta, eta_prime, S_far) where S_far[j] = S(0, x_far) for
    zeta_j; eta = e^{-S(0,x)} w with the same cumulative quadrature, so
    downstream normalizations cancel the S errors exactly.
    """
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    x_samples = np.asarray(x_samples, dtype=float)
    if R is None:
        R = pick_radius(V, eps)
    x_far = max(init_radius(V, z, R) for z in zetas)
    zmax = zetas[np.argmax(np.abs(zetas))]
    nodes = graded_nodes(V, zmax, float(np.min(x_samples)), x_far,
                         forced=x_samples, df_max=df_max, rel_max=0.04,
                         h_min=2e-4)
    def coeffs(x):
        F = F_multi(V, float(x), zetas)
        Fp = V.dV(np.asarray(x, dtype=float)) / (2.0 * F)
        return 2.0 * F, Fp

    Ffar = F_multi(V, x_far, zetas)
    dVfar = float(V.dV(np.array([x_far]))[0])
    w = Ffar ** -0.5
    wp = -dVfar * Ffar ** -1.5 / 4.0
    out_w = np.empty((len(nodes), len(zetas)), dtype=complex)
    out_wp = np.empty_like(out_w)
    out_w[-1], out_wp[-1] = w, wp
    for i in range(len(nodes) - 1, 0, -1):
        x1, x0 = nodes[i], nodes[i - 1]
        h = x0 - x1
        pad = 1e-12 * max(1.0, abs(h))
        def f(x, wv, wpv):
            c, d = coeffs(np.clip(x, x0 + pad, x1 - pad))
            return wpv, c * wpv + d * wv
        k1w, k1p = f(x1, w, wp)
        k2w, k2p = f(x1 + h / 2, w + h / 2 * k1w, wp + h / 2 * k1p)
        k3w, k3p = f(x1 + h / 2, w + h / 2 * k2w, wp + h / 2 * k2p)
        k4w, k4p = f(x0, w + h * k3w, wp + h * k3p)
        w = w + h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        wp = wp + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        out_w[i - 1], out_wp[i - 1] = w, wp

    S_rel = np.stack([_cumulative_phase(V, z, nodes) for z in zetas], axis=1)
    S00 = np.array([_phase_from_zero(V, z, nodes[0]) for z in zetas])
    S_abs = S00[None, :] + S_rel
    Fmat = np.stack([F_of(V, nodes, z) for z in zetas], axis=1)
    amp = np.exp(-S_abs)
    eta = amp * out_w
    eta_p = amp * (out_wp - Fmat * out_w)
    sel = np.searchsorted(nodes, x_samples)
    return eta[sel], eta_p[sel], S_abs[-1]


def _theta_family(V: ReducedPotential, ks, eps, xeval, side: Side):
    """theta_side(x, k) = |k|^{1/2} e^{+Re S(0,x_far)} eta_side for k > 0."""
    ks = np.asarray(ks, dtype=float)
    if side is Side.MINUS:
        th, thd = _theta_family(_reflect(V), ks, eps, -xeval[::-1], Side.PLUS)
        return th[::-1], -thd[::-1]
    theta = np.empty((len(xeval), len(ks)), dtype=complex)
    theta_d = np.empty_like(theta)
    R = pick_radius(V, eps)
    order = np.argsort(ks)
    groups, current = [], [int(order[0])]
    for idx in order[1:]:
        if ks[idx] <= 3.0 * ks[current[0]]:
            current.append(int(idx))
        else:
            groups.append(current)
            current = [int(idx)]
    groups.append(current)
    for g in groups:
        eta, eta_p, S_far = wkb_factored_sweep(V, ks[g], eps, xeval, R=R)
        fac = np.sqrt(np.abs(ks[g])) * np.exp(np.real(S_far))
        theta[:, g] = eta * fac[None, :]
        theta_d[:, g] = eta_p * fac[None, :]
    return theta, theta_d


def wkb_scattering(V: ReducedPotential, k_grid, eps: float) -> ScatteringData:
    """Scattering data for slow decay from normalized quasiclassical thetas."""
    if V.profile not in (SignProfile.SLOW_NEGATIVE, SignProfile.SLOW_POSITIVE):
        raise SlowDecayProfile("wkb_scattering requires a slow-decay profile")
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid < eps):
        raise ZetaTooSmall("min k_grid must be >= eps")
    xeval = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    theta_p, theta_p_d = _theta_family(V, k_grid, eps, xeval, Side.PLUS)
    theta_m, theta_m_d = _theta_family(V, k_grid, eps, xeval, Side.MINUS)
    i0 = 2
    w_rows = np.stack([wronskian(theta_p[i], theta_p_d[i],
                                 theta_m[i], theta_m_d[i])
                       for i in range(len(xeval))])
    w = w_rows[i0]
    spread = np.max(np.abs(w_rows - w_rows[i0])) / max(np.max(np.abs(w)), 1e-300)
    m = w / (2j * k_grid)
    m_pp = -wronskian(np.conj(theta_p[i0]), np.conj(theta_p_d[i0]),
                      theta_m[i0], theta_m_d[i0]) / (2j * k_grid)
    m_mm = -wronskian(theta_p[i0], theta_p_d[i0],
                      np.conj(theta_m[i0]), np.conj(theta_m_d[i0])) / (2j * k_grid)
    uni = np.maximum(np.abs(np.abs(m) ** 2 - 1 - np.abs(m_pp) ** 2),
                     np.abs(np.abs(m) ** 2 - 1 - np.abs(m_mm) ** 2))
    norm_defect = np.abs(wronskian(theta_p[i0], theta_p_d[i0],
                                   np.conj(theta_p[i0]), np.conj(theta_p_d[i0]))
                         - 2j * k_grid) / (2 * k_grid)
    sd = ScatteringData(k_grid=k_grid, w=w, m=m, m_pp=m_pp, m_mm=m_mm,
                        w0=complex("nan"), resonance_flag=False,
                        wronskian_spread=float(spread), unitarity_defect=uni)
    sd.normalization_defect = norm_defect
    return sd


# -- zero-energy limit --------------------------------------------------------

def _tail_sign_locked(V: ReducedPotential):
    xs = np.geomspace(4.0, 4096.0, 300)
    for vals in (V.V(xs), V.V(-xs)):
        if not (np.all(vals > 0) or np.all(vals < 0)):
            raise IndefiniteTailSign("tail sign changes arbitrarily far out")


def _zero_energy_eta_plus(V: ReducedPotential, x_lo: float, x_far: float):
    """eta_+(x, 0) by inward integration with Lemma-type asymptotic data."""
    nodes = graded_nodes(V, 0.0 + 0.0j, x_lo, x_far, df_max=0.25,
                         rel_max=0.04, h_min=2e-4)
    vfar = float(V.V(np.array([x_far]))[0])
    dvfar = float(V.dV(np.array([x_far]))[0])
    if vfar > 0:
        u0 = vfar ** -0.25 + 0.0j
        up0 = -(vfar ** 0.25) - 0.25 * dvfar * vfar ** -1.25 + 0.0j
    else:
        u0 = (-vfar) ** -0.25 + 0.0j
        up0 = 0.25 * dvfar * (-vfar) ** -1.25 + 1j * (-vfar) ** 0.25
    u = u0
    up = up0
    out_u = np.empty(len(nodes), dtype=complex)
    out_up = np.empty_like(out_u)
    out_u[-1], out_up[-1] = u, up
    for i in range(len(nodes) - 1, 0, -1):
        x1, x0 = nodes[i], nodes[i - 1]
        h = x0 - x1
        def f(x, uv, upv):
            return upv, complex(V.V(np.asarray([x], dtype=float))[0]) * uv
        k1u, k1p = f(x1, u, up)
        k2u, k2p = f(x1 + h / 2, u + h / 2 * k1u, up + h / 2 * k1p)
        k3u, k3p = f(x1 + h / 2, u + h / 2 * k2u, up + h / 2 * k2p)
        k4u, k4p = f(x0, u + h * k3u, up + h * k3p)
        u = u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        up = up + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        out_u[i - 1], out_up[i - 1] = u, up
    return nodes, out_u, out_up


def wkb_resonance(V: ReducedPotential, x_far: float = None):
    """Zero-energy Wronskian (normalized) and the resonance verdict.

    m0 is proportional to W(eta_+(., 0), eta_-(., 0)); the unknown absolute
    constant is irrelevant for the zero test, so the Wronskian is reported
    normalized by the solution sizes at x = 0.
    """
    if V.profile not in (SignProfile.SLOW_NEGATIVE, SignProfile.SLOW_POSITIVE):
        raise SlowDecayProfile("wkb_resonance requires a slow-decay profile")
    _tail_sign_locked(V)
    if x_far is None:
        x_far = init_radius(V, 0.0 + 0.0j, pick_radius_zero(V))
    xsp, up, upp = _zero_energy_eta_plus(V, -1.5, x_far)
    Vm = _reflect(V)
    xsm, um, ump = _zero_energy_eta_plus(Vm, -1.5, x_far)

    def sample(xs, f, x0):
        return np.interp(x0, xs, f.real) + 1j * np.interp(x0, xs, f.imag)

    def w_at(x0):
        p, pd = sample(xsp, up, x0), sample(xsp, upp, x0)
        q, qd = sample(xsm, um, -x0), -sample(xsm, ump, -x0)
        scale = (abs(p) + abs(pd)) * (abs(q) + abs(qd))
        return (pd * q - p * qd), scale

    w0, scale = w_at(0.0)
    scale = max(scale, 1e-300)
    m0 = complex(w0 / scale)
    # raw Wronskian constancy probe at x = +-1, relative to the central scale
    wp1, _ = w_at(1.0)
    wm1, _ = w_at(-1.0)
    spread = max(abs(wp1 - w0), abs(wm1 - w0)) / scale
    is_res = abs(m0) < TOL_RES
    return m0, is_res, spread


def pick_radius_zero(V: ReducedPotential) -> float:
    """Radius where the tail sign locks (zero-energy construction base)."""
    xs = np.geomspace(0.5, X_FAR_CAP, 1200)
    vr, vl = V.V(xs), V.V(-xs)
    same = (np.sign(vr) == np.sign(vr[-1])) & (np.sign(vl) == np.sign(vl[-1]))
    locked = np.logical_and.accumulate(same[::-1])[::-1]
    return float(max(1.0, xs[np.argmax(locked)]))

"""Piecewise RK4 drivers for -u'' + V u = zeta^2 u.

Jost solutions are integrated in factored form theta_+ = e^{ikx} v(x), where
v solves v'' = -2ik v' + V v and stays smooth for every k, so oscillation at
large |k| never limits the step.  Potentials may carry jump discontinuities;
integration is split at the listed breakpoints and the potential is sampled
strictly inside each smooth piece, keeping RK4 at full order.
"""

from __future__ import annotations

import numpy as np

from ..errors import IntegratorDiverged

_BLOWUP = 1e150


def _pieces(lo: float, hi: float, breakpoints):
    cuts = sorted({float(lo), float(hi)} | {float(b) for b in breakpoints
                                            if lo < float(b) < hi})
    return list(zip(cuts[:-1], cuts[1:]))


def _clamped(V, lo, hi):
    eps = 1e-12 * max(1.0, hi - lo)

    def Vc(x):
        return V(np.clip(x, lo + eps, hi - eps))

    return Vc


def rk4_linear_second_order(coeff_vp, coeff_v, x_from, x_to, y0, hmax,
                            sample_at=None, breakpoints=()):
    """Integrate y'' + p(x) y' + q(x) y = 0 written as coeff callables.

    The system is y' = (v, vp) with vp' = coeff_vp(x) vp + coeff_v(x) v; the
    coefficient callables receive scalars or arrays and may return arrays
    broadcastable with the state (vectorization over a parameter axis).
    Returns the state at `sample_at` (must lie between x_from and x_to,
    inclusive) plus the final state.
    """
    going_up = x_to > x_from
    lo, hi = (x_from, x_to) if going_up else (x_to, x_from)
    samples = np.asarray(sample_at if sample_at is not None else [], dtype=float)
    checkpoints = np.unique(np.concatenate([samples, [lo, hi]]))
    if checkpoints[0] < lo - 1e-12 or checkpoints[-1] > hi + 1e-12:
        raise ValueError("sample points outside integration range")
    if not going_up:
        checkpoints = checkpoints[::-1]

    v, vp = y0
    v = np.asarray(v, dtype=complex)
    vp = np.asarray(vp, dtype=complex)
    stored = {}

    pieces = _pieces(lo, hi, breakpoints)

    # precompile per-piece clamped coefficient evaluators
    compiled = []
    for plo, phi_ in pieces:
        cp = _clamped(lambda t: np.asarray(coeff_vp(t)), plo, phi_)
        cv = _clamped(lambda t: np.asarray(coeff_v(t)), plo, phi_)
        compiled.append((plo, phi_, lambda t, cp=cp, cv=cv: (cp(t), cv(t))))

    def find_piece(x0, x1):
        mid = 0.5 * (x0 + x1)
        for plo, phi_, f in compiled:
            if plo <= mid <= phi_:
                return f
        return compiled[0][2]

    x = checkpoints[0]
    stored[x] = (v.copy(), vp.copy())
    for target in checkpoints[1:]:
        # split the leg at interior breakpoints
        legs = _pieces(min(x, target), max(x, target), breakpoints)
        if not going_up:
            legs = [(b, a) for a, b in reversed(legs)]
        for a, b in legs:
            f = find_piece(min(a, b), max(a, b))
            span = b - a
            nstep = max(1, int(np.ceil(abs(span) / hmax)))
            h = span / nstep
            xx = a
            for _ in range(nstep):
                c1, d1 = f(xx)
                k1v, k1p = vp, c1 * vp + d1 * v
                c2, d2 = f(xx + h / 2)
                v2, p2 = v + h / 2 * k1v, vp + h / 2 * k1p
                k2v, k2p = p2, c2 * p2 + d2 * v2
                v3, p3 = v + h / 2 * k2v, vp + h / 2 * k2p
                k3v, k3p = p3, c2 * p3 + d2 * v3
                c4, d4 = f(xx + h)
                v4, p4 = v + h * k3v, vp + h * k3p
                k4v, k4p = p4, c4 * p4 + d4 * v4
                v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
                vp = vp + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
                xx += h
            x = b
        if np.any(~np.isfinite(v)) or np.max(np.abs(v)) > _BLOWUP:
            raise IntegratorDiverged(f"state blew up near x = {x}")
        stored[target] = (v.copy(), vp.copy())

    if sample_at is None:
        return stored[checkpoints[-1]]
    out_v = np.stack([stored[t][0] for t in samples])
    out_vp = np.stack([stored[t][1] for t in samples])
    return out_v, out_vp


def jost_factored(V, ks, x_eval, x_start, breakpoints=(), hmax_core=2e-3,
                  core=None):
    """theta_+ = e^{ikx} v integrated downward from x_start where v = 1.

    ks: array of momenta (real or complex, zeta in the closed upper half
    plane).  Returns (theta, theta_prime) with shape (len(x_eval), len(ks)).
    Outside `core` (an interval containing the support-effective region of
    V) the step is relaxed since v is nearly constant there.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    x_eval = np.asarray(x_eval, dtype=float)
    if x_eval.max() > x_start:
        raise ValueError("evaluation points must lie below x_start")
    kmax = float(np.max(np.abs(ks))) if ks.size else 1.0
    hmax_out = min(0.05, 0.4 / max(1.0, kmax))
    hmax_in = min(hmax_core, 0.4 / max(1.0, kmax))

    if core is None:
        core = (x_eval.min(), x_eval.max())

    coeff_vp = lambda x: np.full(ks.shape, -2j, dtype=complex) * ks
    coeff_v = lambda x: V(np.asarray(x, dtype=float)) + np.zeros(ks.shape)

    samples_sorted = np.unique(x_eval)
    stored_v = np.empty((samples_sorted.size, ks.size), dtype=complex)
    stored_vp = np.empty_like(stored_v)
    state = (np.ones_like(ks), np.zeros_like(ks))

    # coarse stepping above the core (v nearly constant), fine inside
    split = min(x_start, max(core[1], samples_sorted[0]))
    hi_mask = samples_sorted >= split
    hi_zone = samples_sorted[hi_mask]
    lo_zone = samples_sorted[~hi_mask]

    if x_start > split or hi_zone.size:
        leg = np.unique(np.append(hi_zone, split))
        sv, svp = rk4_linear_second_order(
            coeff_vp, coeff_v, x_start, float(split), state, hmax_out,
            sample_at=leg, breakpoints=breakpoints)
        for i, t in enumerate(leg):
            j = np.searchsorted(samples_sorted, t)
            if j < samples_sorted.size and samples_sorted[j] == t:
                stored_v[j], stored_vp[j] = sv[i], svp[i]
            if t == split:
                state = (sv[i], svp[i])
    if lo_zone.size:
        sv, svp = rk4_linear_second_order(
            coeff_vp, coeff_v, float(split), float(lo_zone.min()), state,
            hmax_in, sample_at=lo_zone, breakpoints=breakpoints)
        for i, t in enumerate(lo_zone):
            j = np.searchsorted(samples_sorted, t)
            stored_v[j], stored_vp[j] = sv[i], svp[i]

    # map back to the requested (possibly repeated/unsorted) x_eval
    order = np.searchsorted(samples_sorted, x_eval)
    v = stored_v[order]
    vp = stored_vp[order]
    phase = np.exp(1j * np.outer(x_eval, ks))
    theta = phase * v
    theta_prime = phase * (1j * ks[None, :] * v + vp)
    return theta, theta_prime


def schrodinger_rk4(V, zeta, x_from, x_to, y0, sample_at=None,
                    breakpoints=(), hmax=2e-3):
    """Direct integration of u'' = (V - zeta^2) u for one or few zeta."""
    zeta = np.asarray(zeta, dtype=complex)
    z2 = zeta ** 2

    coeff_vp = lambda x: np.zeros(zeta.shape, dtype=complex)
    coeff_v = lambda x: V(np.asarray(x, dtype=float)) - z2

    return rk4_linear_second_order(coeff_vp, coeff_v, x_from, x_to, y0,
                                   hmax, sample_at=sample_at,
                                   breakpoints=breakpoints)


def wronskian(f, fp, g, gp):
    """W(f, g) = f' g - f g'."""
    return fp * g - f * gp


def second_difference_residual(theta, x, V, zeta2):
    """sup |(-D2 + V - zeta^2) theta| / sup|theta| on interior nodes.

    D2 is the 3-point second difference; meaningful when the grid resolves
    the oscillation (error ~ (kh)^2 * k^2 / 12).
    """
    h = x[1] - x[0]
    d2 = (theta[2:] - 2 * theta[1:-1] + theta[:-2]) / (h * h)
    res = -d2 + (V(x[1:-1]) - zeta2) * theta[1:-1]
    return float(np.max(np.abs(res)) / max(np.max(np.abs(theta)), 1e-300))

"""Uniform spatial grids and small quadrature helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid on [lo, hi]."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValidationError("grid needs at least 3 points")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("grid must be strictly increasing")
        object.__setattr__(self, "x", x)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(np.linspace(lo, hi, n))

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def lo(self) -> float:
        return float(self.x[0])

    @property
    def hi(self) -> float:
        return float(self.x[-1])

    @property
    def n(self) -> int:
        return self.x.size

    def trapezoid_weights(self) -> np.ndarray:
        w = np.empty_like(self.x)
        w[1:-1] = (self.x[2:] - self.x[:-2]) / 2
        w[0] = (self.x[1] - self.x[0]) / 2
        w[-1] = (self.x[-1] - self.x[-2]) / 2
        return w


def trapezoid_inner(grid: Grid, f: np.ndarray, g: np.ndarray) -> complex:
    """L2 inner product (f|g) = int conj(f) g dx by the trapezoid rule."""
    w = grid.trapezoid_weights()
    return complex(np.sum(w * np.conj(f) * g))


def gauss_legendre_panel(a: float, b: float, n: int):
    """Nodes and weights of n-point Gauss-Legendre on [a, b]."""
    t, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (b - a) * t + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return nodes, weights


def panel_quadrature(f, a: float, b: float, breakpoints=(), n: int = 12,
                     max_panel: float = 1.0) -> float:
    """Composite Gauss-Legendre quadrature splitting panels at breakpoints.

    One refinement pass doubles the panel count and checks agreement to
    2e-12 relative; discontinuities must be listed in `breakpoints`.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = sorted({a, b} | {float(c) for c in breakpoints if a < c < b})

    def composite(scale):
        total = 0.0 + 0.0j
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(np.ceil((hi - lo) / (max_panel / scale))))
            edges = np.linspace(lo, hi, m + 1)
            for p0, p1 in zip(edges[:-1], edges[1:]):
                xs, ws = gauss_legendre_panel(p0, p1, n)
                total += complex(np.sum(ws * f(xs)))
        return total

    coarse = composite(1)
    fine = composite(2)
    if abs(fine - coarse) > 2e-12 * max(1.0, abs(fine)):
        fine = composite(4)
    out = sign * fine
    return out if out.imag != 0.0 else out.real


def decaying_integral(f, lo: float = 0.0, tol: float = 1e-13,
                      x0: float = 8.0, max_doublings: int = 24) -> float:
    """Integral of a decaying f over [lo, +inf) by doubling the domain."""
    hi = max(lo + 1.0, x0)
    total = panel_quadrature(f, lo, hi, max_panel=max(1.0, (hi - lo) / 16))
    for _ in range(max_doublings):
        inc = panel_quadrature(f, hi, 2 * hi, max_panel=max(1.0, hi / 16))
        total += inc
        hi *= 2
        if abs(inc) < tol * max(1.0, abs(total)):
            break
    return total


@dataclass
class TailReport:
    """Convergence diagnosis of an integral over the real line."""

    value: float
    converged: bool
    tail_slope: float = field(default=np.nan)


def tail_integral(f, tol: float = 1e-10, x0: float = 4.0,
                  max_doublings: int = 18) -> TailReport:
    """Integrate f >= 0 over R with a tail-slope convergence test.

    The increments over doubling windows [X, 2X] are fitted against log X;
    slope >= -1 + margin flags divergence (an x^-1 tail integrates to a log).
    """
    total = panel_quadrature(f, -x0, x0)
    his, incs = [], []
    hi = x0
    converged = False
    for _ in range(max_doublings):
        mp = max(1.0, hi / 16)
        inc = panel_quadrature(f, hi, 2 * hi, max_panel=mp) \
            + panel_quadrature(f, -2 * hi, -hi, max_panel=mp)
        total += inc
        his.append(hi)
        incs.append(max(inc, 0.0))
        hi *= 2
        if inc < tol * max(1.0, total):
            converged = True
            break
    slope = np.nan
    pos = [(h, i) for h, i in zip(his, incs) if i > 0]
    if len(pos) >= 3:
        lh = np.log([p[0] for p in pos[-4:]])
        li = np.log([p[1] for p in pos[-4:]])
        slope = float(np.polyfit(lh, li, 1)[0])
        # increment over [X,2X] of an x^-p tail scales like X^(1-p); the
        # integral converges iff p > 1, i.e. slope < 0
        if not converged and slope < -0.05:
            converged = True
    return TailReport(value=total, converged=converged, tail_slope=slope)

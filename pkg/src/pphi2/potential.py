"""Variable-metric coefficient pairs (a, c) and their Schrodinger reduction.

The second order operator D a(x) D + c(x) is unitarily equivalent to
D^2 + V(x) + m_inf^2 through the Liouville change of variables built from
g = sqrt(a): with phi(x) = int_0^x ds/g(s) and psi = phi^{-1},

    D a D + c = T_psi^* (D^2 + c~) T_psi,
    c~ = c(psi) + (g'^2/4 + g g''/2)(psi),      V = c~ - m_inf^2,

where T_psi u = (psi')^{1/2} u(psi).  Built-in analytic families provide a
test corpus with exact derivatives and known decay profiles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BadParams, DerivativeUnavailable, NonPositiveMetric, UnknownFamily
from .grids import Grid, panel_quadrature

Sampler = Callable[[np.ndarray], np.ndarray]


class SignProfile(Enum):
    QUICK_DECAY = "quick_decay"        # mu > 2
    SLOW_NEGATIVE = "slow_negative"    # mu <= 2, V < 0 near infinity
    SLOW_POSITIVE = "slow_positive"    # mu <= 2, V > 0 near infinity
    INDEFINITE = "indefinite"


def fd_derivative(f: Sampler, order: int = 1) -> Sampler:
    """5-point central finite difference with step h = 1e-4 * <x>."""
    if order not in (1, 2):
        raise DerivativeUnavailable(f"finite differences of order {order}")

    def df(x):
        x = np.asarray(x, dtype=float)
        h = 1e-4 * np.sqrt(1.0 + x * x)
        fm2, fm1 = f(x - 2 * h), f(x - h)
        fp1, fp2 = f(x + h), f(x + 2 * h)
        if order == 1:
            return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
        f0 = f(x)
        return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)

    return df


def _as_sampler(value) -> Sampler:
    if callable(value):
        return value
    const = float(value)
    return lambda x: np.full_like(np.asarray(x, dtype=float), const)


def fit_decay_exponent(V: Sampler, x_lo: float, x_hi: float,
                       floor: float = 1e-13) -> float:
    """Least-squares slope of log|V| against log<x> over [x_lo, x_hi].

    Returns the decay exponent mu (so |V| ~ <x>^-mu); +inf when the tail
    is below the floor (compact support, super-polynomial decay).
    """
    xs = np.geomspace(max(x_lo, 1.0), x_hi, 24)
    vals = np.maximum(np.abs(V(xs)), np.abs(V(-xs)))
    mask = vals > floor
    if mask.sum() < 4:
        return math.inf
    lx = np.log(np.sqrt(1.0 + xs[mask] ** 2))
    lv = np.log(vals[mask])
    slope = np.polyfit(lx, lv, 1)[0]
    return float(-slope)


def classify_profile(V: Sampler, mu: float, x_probe: float = 40.0) -> SignProfile:
    if mu > 2:
        return SignProfile.QUICK_DECAY
    xs = np.geomspace(x_probe / 4, x_probe * 4, 17)
    right = V(xs)
    left = V(-xs)
    if np.all(right < 0) and np.all(left < 0):
        return SignProfile.SLOW_NEGATIVE
    if np.all(right > 0) and np.all(left > 0):
        return SignProfile.SLOW_POSITIVE
    return SignProfile.INDEFINITE


@dataclass
class MetricSpec:
    """Metric coefficient pair a, c with mass at infinity and decay rate."""

    a: Sampler
    c: Sampler
    m_inf: float
    mu: float
    da: Optional[Sampler] = None
    d2a: Optional[Sampler] = None
    dc: Optional[Sampler] = None

    def __post_init__(self):
        self.a = _as_sampler(self.a)
        self.c = _as_sampler(self.c)
        if self.m_inf < 0:
            raise NonPositiveMetric("mass at infinity must be >= 0")
        if self.mu <= 0:
            raise BadParams("decay exponent mu must be > 0")
        if self.da is None:
            self.da = fd_derivative(self.a, 1)
        if self.d2a is None:
            self.d2a = fd_derivative(self.a, 2)

    def validate_on(self, grid: Grid):
        """Positivity of a, c on the grid; warn when c dips near zero."""
        av, cv = self.a(grid.x), self.c(grid.x)
        if np.any(av <= 0):
            raise NonPositiveMetric("a(x) <= 0 at a grid node")
        if np.any(cv <= 0):
            raise NonPositiveMetric("c(x) <= 0 at a grid node")
        if self.m_inf > 0 and np.min(cv) < 1e-6 * self.m_inf ** 2:
            warnings.warn("c(x) dips below 1e-6 * m_inf^2; reduction may be "
                          "ill-conditioned", stacklevel=2)

    def fitted_decay(self, grid: Grid) -> tuple[float, float]:
        """Fitted decay exponents of a-1 and c-m_inf^2 over the outer grid."""
        hi = grid.hi
        lo = 0.75 * hi
        mu_a = fit_decay_exponent(lambda x: self.a(x) - 1.0, lo, hi)
        mu_c = fit_decay_exponent(lambda x: self.c(x) - self.m_inf ** 2, lo, hi)
        return mu_a, mu_c


@dataclass
class PsiMap:
    """Diffeomorphism data of the Liouville reduction."""

    psi: Sampler                 # psi = phi^{-1}
    phi: Sampler                 # phi(x) = int_0^x ds/g(s)
    jacobian_weight: Sampler     # (psi')^{-1/2}

    def weight_transfer(self, m_tilde: Sampler) -> Sampler:
        """M(x) = ((psi')^{-1/2} M~) o psi^{-1}(x)."""
        def M(x):
            y = self.phi(np.asarray(x, dtype=float))
            return self.jacobian_weight(y) * m_tilde(y)
        return M


def _identity_psi_map() -> PsiMap:
    ident = lambda x: np.asarray(x, dtype=float).copy()
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))
    return PsiMap(psi=ident, phi=ident, jacobian_weight=one)


@dataclass
class ReducedPotential:
    """Potential V so that the reduced operator is D^2 + V + m_inf^2."""

    V: Sampler
    mu: float
    psi_map: PsiMap = field(default_factory=_identity_psi_map)
    profile: SignProfile = SignProfile.QUICK_DECAY
    dV: Optional[Sampler] = None
    d2V: Optional[Sampler] = None
    breakpoints: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.dV is None:
            self.dV = fd_derivative(self.V, 1)
        if self.d2V is None:
            self.d2V = fd_derivative(self.V, 2)

    def __call__(self, x):
        return self.V(np.asarray(x, dtype=float))


def liouville_reduce(spec: MetricSpec, grid: Grid) -> ReducedPotential:
    """Reduce D a D + c to D^2 + V + m_inf^2 by the Liouville transformation."""
    spec.validate_on(grid)

    a, da, d2a = spec.a, spec.da, spec.d2a

    def g(x):
        return np.sqrt(a(x))

    def dg(x):
        return da(x) / (2.0 * np.sqrt(a(x)))

    def d2g(x):
        av = a(x)
        return d2a(x) / (2.0 * np.sqrt(av)) - da(x) ** 2 / (4.0 * av ** 1.5)

    def correction(x):
        return 0.25 * dg(x) ** 2 + 0.5 * g(x) * d2g(x)

    def phi_scalar(x: float) -> float:
        return panel_quadrature(lambda s: 1.0 / g(s), 0.0, x)

    def phi(x):
        x = np.asarray(x, dtype=float)
        return np.array([phi_scalar(float(t)) for t in np.atleast_1d(x)]).reshape(x.shape)

    # psi = phi^{-1} by bisection-seeded Newton; phi' = 1/g > 0 is monotone
    def psi_scalar(y: float) -> float:
        # bracket: g is bounded on compacts, expand until phi covers y
        lo, hi = -1.0, 1.0
        while phi_scalar(lo) > y:
            lo *= 2.0
        while phi_scalar(hi) < y:
            hi *= 2.0
        x = brentq(lambda t: phi_scalar(t) - y, lo, hi, xtol=1e-13, rtol=8.9e-16)
        for _ in range(4):  # Newton polish, phi' = 1/g
            step = (phi_scalar(x) - y) * g(x)
            x -= step
            if abs(step) <= 1e-12 * max(1.0, abs(x)):
                break
        return x

    def psi(y):
        y = np.asarray(y, dtype=float)
        return np.array([psi_scalar(float(t)) for t in np.atleast_1d(y)]).reshape(y.shape)

    def jacobian_weight(y):
        # psi'(y) = g(psi(y))
        return g(psi(y)) ** (-0.5)

    m2 = spec.m_inf ** 2

    def V(y):
        xs = psi(y)
        return spec.c(xs) + correction(xs) - m2

    mu_fit = fit_decay_exponent(V, 0.75 * grid.hi, grid.hi)
    mu = spec.mu if math.isinf(mu_fit) else mu_fit
    profile = classify_profile(V, mu, x_probe=max(20.0, grid.hi))
    return ReducedPotential(V=V, mu=mu, psi_map=PsiMap(psi, phi, jacobian_weight),
                            profile=profile, name="liouville")


# -- built-in analytic families ----------------------------------------------

def builtin_potential(name: str, params: Sequence[float]) -> ReducedPotential:
    """Analytic test potentials with exact derivatives and profiles.

    Families: Zero; SquareWell(V0, a); Gaussian(amplitude, width);
    PowerTail(q0, mu, sign) with V ~ sign * q0 |x|^-mu at infinity.
    """
    key = name.strip().lower().replace("_", "").replace("-", "")
    params = [float(p) for p in params]

    if key == "zero":
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return ReducedPotential(V=zero, mu=math.inf, profile=SignProfile.QUICK_DECAY,
                                dV=zero, d2V=zero, name="Zero")

    if key == "squarewell":
        if len(params) != 2:
            raise BadParams("SquareWell needs (V0, a)")
        v0, a = params
        if a <= 0:
            raise BadParams("well half-width must be positive")

        def V(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= a, -v0, 0.0)

        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return ReducedPotential(V=V, mu=math.inf, profile=SignProfile.QUICK_DECAY,
                                dV=zero, d2V=zero, breakpoints=(-a, a),
                                name=f"SquareWell({v0},{a})")

    if key == "gaussian":
        if len(params) != 2:
            raise BadParams("Gaussian needs (amplitude, width)")
        amp, w = params
        if w <= 0:
            raise BadParams("width must be positive")

        def V(x):
            x = np.asarray(x, dtype=float)
            return amp * np.exp(-(x / w) ** 2)

        def dV(x):
            x = np.asarray(x, dtype=float)
            return amp * np.exp(-(x / w) ** 2) * (-2 * x / w ** 2)

        def d2V(x):
            x = np.asarray(x, dtype=float)
            return amp * np.exp(-(x / w) ** 2) * (4 * x ** 2 / w ** 4 - 2 / w ** 2)

        return ReducedPotential(V=V, mu=math.inf, profile=SignProfile.QUICK_DECAY,
                                dV=dV, d2V=d2V, name=f"Gaussian({amp},{w})")

    if key == "powertail":
        if len(params) != 3:
            raise BadParams("PowerTail needs (q0, mu, sign)")
        q0, mu, sign = params
        if q0 <= 0 or mu <= 0:
            raise BadParams("q0 and mu must be positive")
        if sign not in (-1.0, 1.0):
            raise BadParams("sign must be +1 or -1")

        def V(x):
            x = np.asarray(x, dtype=float)
            return sign * q0 * (1.0 + x * x) ** (-mu / 2)

        def dV(x):
            x = np.asarray(x, dtype=float)
            return sign * q0 * (-mu) * x * (1.0 + x * x) ** (-mu / 2 - 1)

        def d2V(x):
            x = np.asarray(x, dtype=float)
            u = 1.0 + x * x
            return sign * q0 * (-mu) * (u ** (-mu / 2 - 1)
                                        + x * x * (-mu - 2) * u ** (-mu / 2 - 2))

        if mu > 2:
            profile = SignProfile.QUICK_DECAY
        else:
            profile = SignProfile.SLOW_POSITIVE if sign > 0 else SignProfile.SLOW_NEGATIVE
        return ReducedPotential(V=V, mu=mu, profile=profile, dV=dV, d2V=d2V,
                                name=f"PowerTail({q0},{mu},{sign:+.0f})")

    raise UnknownFamily(f"unknown potential family {name!r}")

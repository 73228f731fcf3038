"""Bound states of h = D^2 + V + m_inf^2 below m_inf^2.

Finite differences give a symmetric tridiagonal matrix whose eigenvalues
below the continuum threshold are found by Sturm-sequence bisection
(LAPACK stebz via eigh_tridiagonal) and whose eigenvectors come from
inverse iteration, so the count is exact for the discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import GridTooNarrow
from ..grids import Grid
from ..potential import ReducedPotential


def node_values(V, x: np.ndarray, h: float) -> np.ndarray:
    """Potential at grid nodes with jumps replaced by their cell average.

    The node whose cell [x_i - h/2, x_i + h/2] contains a jump receives the
    exact average of the two one-sided values over the cell; anything else
    biases the effective interface by up to h/2 and degrades the finite
    difference eigenvalues to first order.
    """
    vx = V(x)
    for b in getattr(V, "breakpoints", ()):
        i = int(np.argmin(np.abs(x - b)))
        if abs(x[i] - b) <= h / 2 + 1e-15:
            left = float(V.V(np.full(1, b - 1e-9 * max(1.0, abs(b))))[0])
            right = float(V.V(np.full(1, b + 1e-9 * max(1.0, abs(b))))[0])
            frac_left = (b - (x[i] - h / 2)) / h
            vx[i] = frac_left * left + (1.0 - frac_left) * right
    return vx


@dataclass
class BoundState:
    """Eigenpair h psi_l = eps_l psi_l with eps_l < m_inf^2."""

    epsilon: float          # eigenvalue of h
    lam: float              # lambda_l = eps_l - m_inf^2 < 0
    psi: np.ndarray         # unit L2 norm on the grid
    index: int

    def eigen_residual(self, V, grid: Grid, m_inf: float) -> float:
        """||h psi - eps psi||_2 via the same 3-point discretization."""
        x, h = grid.x, grid.h
        d2 = np.zeros_like(self.psi)
        d2[1:-1] = (self.psi[2:] - 2 * self.psi[1:-1] + self.psi[:-2]) / h ** 2
        hpsi = -d2 + (V(x) + m_inf ** 2) * self.psi
        r = hpsi - self.epsilon * self.psi
        return float(np.sqrt(np.sum(r[1:-1] ** 2) * h))


def bound_states(V: ReducedPotential, grid: Grid, m_inf: float,
                 endpoint_tol: float = 1e-6) -> list[BoundState]:
    """All eigenvalues of the discretized h below m_inf^2, refined pairs.

    Dirichlet conditions at the grid ends; raises GridTooNarrow when any
    eigenfunction has not decayed below endpoint_tol at the boundary.
    """
    x, h = grid.x, grid.h
    vx = node_values(V, x, h)
    # interior nodes only (Dirichlet)
    diag = 2.0 / h ** 2 + vx[1:-1] + m_inf ** 2
    off = np.full(x.size - 3, -1.0 / h ** 2)
    threshold = m_inf ** 2 - 1e-12 * max(1.0, m_inf ** 2)
    try:
        vals, vecs = eigh_tridiagonal(diag, off, select="v",
                                      select_range=(-np.inf, threshold))
    except Exception:
        vals = np.empty(0)
        vecs = np.empty((diag.size, 0))
    states = []
    for i in range(vals.size):
        psi = np.zeros(x.size)
        psi[1:-1] = vecs[:, i]
        norm = np.sqrt(np.trapezoid(psi ** 2, x))
        psi /= norm
        # sign convention: positive at the leftmost maximum of |psi|
        peaks = np.flatnonzero(np.isclose(np.abs(psi), np.max(np.abs(psi)),
                                          rtol=1e-9))
        if psi[peaks[0]] < 0:
            psi = -psi
        eps = float(vals[i])
        if max(abs(psi[0]), abs(psi[-1]), abs(psi[1]), abs(psi[-2])) > endpoint_tol:
            raise GridTooNarrow(
                f"bound state {i} has amplitude > {endpoint_tol} at the grid edge")
        states.append(BoundState(epsilon=eps, lam=eps - m_inf ** 2, psi=psi,
                                 index=i))
    return states


def orthonormality_defect(states: list[BoundState], grid: Grid) -> float:
    """max |<psi_i, psi_j> - delta_ij| with the trapezoid inner product."""
    if not states:
        return 0.0
    P = np.stack([s.psi for s in states])
    w = grid.trapezoid_weights()
    G = (P * w) @ P.T
    return float(np.max(np.abs(G - np.eye(len(states)))))

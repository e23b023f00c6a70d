"""Discretized minimization of J_gamma over piecewise-constant densities.

The energy

    J_gamma[phi] = (gamma/2) int phi^2 + (1/2) iint G(|t-s|) phi(t) phi(s)

restricted to functions that are constant on m uniform cells of [0, T] is a
quadratic form phi' H phi whose coefficients are *exact* cell integrals of
the kernel (no quadrature error enters the discretization).  Minimizing it
under the unit-mass constraint  sum_k phi_k (T/m) = 1  is a saddle-point
linear system; the Lagrange multiplier is the free constant sigma of the
equivalent second-kind integral equation

    gamma phi(t) + int_0^T G(|t-s|) phi(s) ds = sigma,

and equals twice the minimal energy.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .errors import IndefiniteKernelError
from .kernels import Kernel

__all__ = [
    "Problem",
    "SolutionGrid",
    "DiscreteKernelRow",
    "discretize",
    "kernel_row",
    "solve",
    "gamma_sweep",
    "endpoint_mass",
]


@dataclass(frozen=True)
class Problem:
    """Instance data: weight gamma > 0, horizon T > 0, and a kernel."""

    gamma: float
    horizon: float
    kernel: Kernel

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "horizon", float(self.horizon))


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """Piecewise-constant minimizer on m uniform cells.

    ``values[k]`` is the density on [k*T/m, (k+1)*T/m).  ``sigma`` is the
    constraint multiplier (= 2 * energy), ``residual_max`` the largest
    pointwise defect of the integral equation at cell midpoints, computed
    with exact single-cell integrals.
    """

    cells: int
    values: np.ndarray
    sigma: float
    energy: float
    residual_max: float
    horizon: float

    @property
    def spacing(self):
        return self.horizon / self.cells

    def midpoints(self):
        return (np.arange(self.cells) + 0.5) * self.spacing


@dataclass(frozen=True, eq=False)
class DiscreteKernelRow:
    """Lag sequence G_n of the discretized kernel.

    ``Gn0`` is the value at lag 0 (it absorbs the gamma ridge of the
    diagonal), ``Gn[k-1]`` the value at lag t_k = k*T/m.  The quadratic
    form of :func:`discretize` is H_ii = (Gn0 + gamma*T/(2m))/2 and
    H_ij = Gn[|i-j|-1]/2.
    """

    Gn0: float
    Gn: np.ndarray


def discretize(problem: Problem, m: int):
    """Assemble (H, w) with J_gamma[phi] = phi' H phi and constraint w' phi = 1.

    H_{ij} = (1/2) * iint_{cell_i x cell_j} G(|t-s|) for i != j, and the
    diagonal carries the extra (gamma/2)(T/m) from the gamma-term.  H is
    symmetric Toeplitz, so only the first row is integrated.
    """
    if m < 2:
        raise ValueError("need at least two cells")
    h = problem.horizon / m
    row = np.empty(m)
    for k in range(m):
        row[k] = problem.kernel.cell_double_integral(0.0, h, k * h, (k + 1) * h)
    H = 0.5 * linalg.toeplitz(row)
    H[np.diag_indices(m)] += 0.5 * problem.gamma * h
    w = np.full(m, h)
    return H, w


def kernel_row(problem: Problem, m: int) -> DiscreteKernelRow:
    """Lag sequence of the discretized kernel (diagonal value plus off-diagonals)."""
    h = problem.horizon / m
    row = np.empty(m)
    for k in range(m):
        row[k] = problem.kernel.cell_double_integral(0.0, h, k * h, (k + 1) * h)
    return DiscreteKernelRow(Gn0=0.5 * problem.gamma * h + row[0], Gn=row[1:])


def solve(problem: Problem, m: int) -> SolutionGrid:
    """Minimize the discretized energy under unit mass.

    Solves the saddle system [[2H, w], [w', 0]] [phi; -sigma] = [0; 1] by LU
    with partial pivoting plus two steps of iterative refinement, then
    renormalizes the mass exactly.  Raises
    :class:`~fredholm.errors.IndefiniteKernelError` when H is not positive
    definite (the kernel is not of positive type at this resolution).
    """
    H, w = discretize(problem, m)
    if not np.all(np.isfinite(H)):
        raise ValueError("kernel produced non-finite cell integrals")

    # Cholesky as the definiteness certificate; info is the offending pivot.
    _, info = linalg.lapack.dpotrf(H, lower=1)
    if info != 0:
        raise IndefiniteKernelError(int(info))

    n = m + 1
    A = np.zeros((n, n))
    A[:m, :m] = 2.0 * H
    A[:m, m] = w
    A[m, :m] = w
    rhs = np.zeros(n)
    rhs[m] = 1.0

    lu, piv = linalg.lu_factor(A)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-13 * np.abs(A).max():
        raise IndefiniteKernelError(int(np.argmin(pivots)) + 1)
    x = linalg.lu_solve((lu, piv), rhs)
    for _ in range(2):
        x += linalg.lu_solve((lu, piv), rhs - A @ x)

    h = problem.horizon / m
    phi = x[:m].copy()
    sigma = -float(x[m])
    mass = math.fsum(phi * h)
    phi /= mass
    sigma /= mass

    energy = float(phi @ H @ phi)
    mids = (np.arange(m) + 0.5) * h
    conv = np.zeros(m)
    for j in range(m):
        conv += phi[j] * problem.kernel.cell_integral(j * h, (j + 1) * h, mids)
    resid = problem.gamma * phi + conv - sigma
    return SolutionGrid(
        cells=m,
        values=phi,
        sigma=sigma,
        energy=energy,
        residual_max=float(np.max(np.abs(resid))),
        horizon=problem.horizon,
    )


def gamma_sweep(problem: Problem, m: int, gammas) -> list:
    """Solve a strictly decreasing sequence of gamma values on a fixed grid.

    Used to watch mass migrate toward the endpoints as the quadratic
    penalty vanishes; no convergence claim is attached.
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("gamma sweep needs at least one value")
    if any(g <= 0 for g in gammas):
        raise ValueError("sweep gammas must be positive")
    if any(x <= y for x, y in zip(gammas[:-1], gammas[1:])):
        raise ValueError("sweep gammas must be strictly decreasing")
    return [solve(replace(problem, gamma=g), m) for g in gammas]


def endpoint_mass(grid: SolutionGrid) -> float:
    """Mass carried by the first and last cell."""
    return float((grid.values[0] + grid.values[-1]) * grid.spacing)

"""Closed-form minimizers for two non-smooth/oscillatory kernel families.

Capped linear, G(t) = (1 - t)^+, integer horizon T = n: on each unit
segment the integral equation collapses to a linear ODE system driven by
the tridiagonal (2, -1) matrix, so phi restricted to segment i is a
combination of e^{+-b_j s} with b_j = sqrt(lambda_j / gamma) and
lambda_j = 2(1 - cos(j pi/(n+1))).  The segment functions are glued by a
single n x n solve; continuity at the integer junctions is not imposed but
*emerges*, which makes the junction gap a sharp self-check of the
implementation (and of the sign conventions in J and K).

Trigonometric, G(t) = cos(rho t): the minimizer is an explicit cosine
expression.  It is of positive type but not monotone, and for small gamma
the minimizer dips below zero -- the standing counterexample that positive
type alone does not buy nonnegative solutions.

Both solvers normalize to unit mass and report sigma (= 2 J_gamma).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._quad import panel_gauss

__all__ = [
    "CappedLinearSolution",
    "TrigSolution",
    "capped_linear_solve",
    "eval_capped_linear",
    "capped_linear_residual_max",
    "capped_linear_energy",
    "trig_solve",
    "eval_trig",
    "trig_residual_max",
    "trig_energy",
]


@dataclass(frozen=True, eq=False)
class CappedLinearSolution:
    """Closed form on [0, n] for the unit-cap linear kernel.

    ``a_vec`` is the solved coefficient vector (the x0 of the derivation,
    rescaled to unit mass), ``Q`` the sine eigenvector matrix
    Q_ij = sin(ij pi/(n+1)), and ``junction_gap`` the largest observed
    mismatch |phi(i-) - phi(i+)| at the interior integer points.
    """

    n: int
    gamma: float
    sigma: float
    a_vec: np.ndarray
    lambda_vec: np.ndarray
    b_vec: np.ndarray
    Q: np.ndarray
    junction_gap: float

    @property
    def horizon(self):
        return float(self.n)


@dataclass(frozen=True)
class TrigSolution:
    """phi(t) = (sigma/gamma) (1 - beta (cos(rho t) + cos(rho (T-t))))."""

    rho: float
    gamma: float
    horizon: float
    sigma: float
    beta: float


def _alternating(n):
    return (-1.0) ** (np.arange(1, n + 1) + 1)


def capped_linear_solve(n, gamma) -> CappedLinearSolution:
    """Solve the capped-linear problem on [0, n] with unit cap.

    Builds the n x n junction system

        (gamma Q (E(1) + J) + K Q ((E(1)-I)(J-I) + B(E(1)-J)) B^{-2}) x0 = sigma 1

    with sigma = 1 provisionally, then rescales (a, sigma) jointly so the
    mass 1' Q diag(expm1(b)/b) (I + J) a equals one.  K adds row n-i to
    row i for i < n (the two segments adjacent to junction i), doubling the
    central diagonal entry when n is even.
    """
    if not (isinstance(n, (int, np.integer)) and not isinstance(n, bool) and n >= 1):
        raise ValueError("capped-linear closed form needs a positive integer horizon")
    n = int(n)
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError("gamma must be positive")

    i = np.arange(1, n + 1)
    lam = 2.0 * (1.0 - np.cos(i * np.pi / (n + 1)))
    b = np.sqrt(lam / gamma)
    if b.max() > 700.0:
        raise ValueError(
            "gamma too small for the closed form: exp(sqrt(lambda_max/gamma)) overflows"
        )
    Q = np.sin(np.outer(i, i) * np.pi / (n + 1))
    Jd = _alternating(n)
    E1 = np.exp(b)

    inner = ((E1 - 1.0) * (Jd - 1.0) + b * (E1 - Jd)) / b**2
    K = np.eye(n)
    for row in range(1, n):  # 1-based junction i pairs segments i and n-i
        K[row - 1, n - row - 1] += 1.0
    S = gamma * (Q * (E1 + Jd)[None, :]) + K @ (Q * inner[None, :])
    x0 = np.linalg.solve(S, np.ones(n))

    mass = float(np.ones(n) @ (Q * (np.expm1(b) / b * (1.0 + Jd))[None, :]) @ x0)
    a = x0 / mass
    sigma = 1.0 / mass

    # continuity at the interior junctions is implied, not imposed: measure it
    end_vals = Q @ ((E1 + Jd) * a)        # phi_i(1)
    start_vals = Q @ ((1.0 + Jd * E1) * a)  # phi_i(0)
    gap = float(np.max(np.abs(end_vals[:-1] - start_vals[1:]))) if n > 1 else 0.0

    return CappedLinearSolution(
        n=n,
        gamma=gamma,
        sigma=sigma,
        a_vec=a,
        lambda_vec=lam,
        b_vec=b,
        Q=Q,
        junction_gap=gap,
    )


def eval_capped_linear(sol: CappedLinearSolution, t):
    """phi(t) for t in [0, n]: segment i = min(floor(t)+1, n), local clock s = t-(i-1)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > sol.n):
        raise ValueError("evaluation point outside [0, n]")
    idx = np.minimum(np.floor(t_arr).astype(int), sol.n - 1)
    s = t_arr - idx
    Jd = _alternating(sol.n)
    basis = np.exp(np.multiply.outer(s, sol.b_vec)) + Jd * np.exp(
        np.multiply.outer(1.0 - s, sol.b_vec)
    )
    out = np.einsum("...j,...j->...", sol.Q[idx], basis * sol.a_vec)
    return float(out) if np.ndim(t) == 0 else out


def _capped_convolution(sol: CappedLinearSolution, t):
    """int_0^n (1 - |t-s|)^+ phi(s) ds by panel quadrature with kink breakpoints."""
    lo = max(0.0, t - 1.0)
    hi = min(float(sol.n), t + 1.0)
    cuts = {float(j) for j in range(math.ceil(lo), math.floor(hi) + 1)}
    cuts.add(t)
    return panel_gauss(
        lambda s: (1.0 - np.abs(t - s)) * eval_capped_linear(sol, s),
        lo,
        hi,
        breakpoints=sorted(c for c in cuts if lo < c < hi),
        max_panel=0.25,
    )


def capped_linear_residual_max(sol: CappedLinearSolution, samples=500):
    """max_t |gamma phi(t) + (G * phi)(t) - sigma| on an inclusive sample grid."""
    ts = np.linspace(0.0, float(sol.n), samples)
    conv = np.array([_capped_convolution(sol, float(t)) for t in ts])
    resid = sol.gamma * eval_capped_linear(sol, ts) + conv - sol.sigma
    return float(np.max(np.abs(resid)))


def capped_linear_energy(sol: CappedLinearSolution):
    """J_gamma[phi] by quadrature, independent of the sigma = 2 J identity."""
    n = float(sol.n)
    cuts = list(range(1, sol.n))

    def sq(ts):
        return eval_capped_linear(sol, ts) ** 2

    def cross(ts):
        return eval_capped_linear(sol, ts) * np.array(
            [_capped_convolution(sol, float(t)) for t in ts]
        )

    quad_sq = panel_gauss(sq, 0.0, n, breakpoints=cuts, max_panel=0.5)
    quad_cross = panel_gauss(cross, 0.0, n, breakpoints=cuts, max_panel=0.5)
    return 0.5 * sol.gamma * quad_sq + 0.5 * quad_cross


def trig_solve(rho, gamma, horizon) -> TrigSolution:
    """Closed form for G(t) = cos(rho t); fails near the tan singularity.

    beta = 2 tan(rho T/2) / (rho (2 gamma + T) + sin(rho T)), then sigma is
    fixed by unit mass through the analytic integral of the cosine terms.
    """
    rho = float(rho)
    gamma = float(gamma)
    horizon = float(horizon)
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not horizon > 0:
        raise ValueError("horizon must be positive")

    x = 0.5 * rho * horizon
    nearest_pole = 0.5 * math.pi + math.pi * round((x - 0.5 * math.pi) / math.pi)
    if abs(x - nearest_pole) <= 1e-8 * max(1.0, abs(x)):
        raise ValueError("trig solution singular at rho*T/2 ~ pi/2 + k*pi")

    beta = 2.0 * math.tan(x) / (rho * (2.0 * gamma + horizon) + math.sin(rho * horizon))
    mass_per_sigma = horizon - 2.0 * beta * math.sin(rho * horizon) / rho
    sigma = gamma / mass_per_sigma
    return TrigSolution(rho=rho, gamma=gamma, horizon=horizon, sigma=sigma, beta=beta)


def eval_trig(sol: TrigSolution, t):
    """phi(t) = (sigma/gamma)(1 - beta (cos(rho t) + cos(rho (T - t))))."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > sol.horizon):
        raise ValueError("evaluation point outside [0, T]")
    out = (sol.sigma / sol.gamma) * (
        1.0
        - sol.beta * (np.cos(sol.rho * t_arr) + np.cos(sol.rho * (sol.horizon - t_arr)))
    )
    return float(out) if np.ndim(t) == 0 else out


def _trig_moments(sol: TrigSolution):
    """Mc = int cos(rho s) phi(s) ds and Ms = int sin(rho s) phi(s) ds by quadrature."""
    mp = min(sol.horizon / 8.0, 1.0 / sol.rho)
    Mc = panel_gauss(
        lambda s: np.cos(sol.rho * s) * eval_trig(sol, s), 0.0, sol.horizon, max_panel=mp
    )
    Ms = panel_gauss(
        lambda s: np.sin(sol.rho * s) * eval_trig(sol, s), 0.0, sol.horizon, max_panel=mp
    )
    return Mc, Ms


def trig_residual_max(sol: TrigSolution, samples=500):
    """Residual of the integral equation; the convolution folds to two moments.

    cos(rho(t-s)) = cos(rho t)cos(rho s) + sin(rho t)sin(rho s), so
    (G * phi)(t) = Mc cos(rho t) + Ms sin(rho t) with the moments computed
    by quadrature (independent of the closed-form derivation).
    """
    Mc, Ms = _trig_moments(sol)
    ts = np.linspace(0.0, sol.horizon, samples)
    conv = Mc * np.cos(sol.rho * ts) + Ms * np.sin(sol.rho * ts)
    resid = sol.gamma * eval_trig(sol, ts) + conv - sol.sigma
    return float(np.max(np.abs(resid)))


def trig_energy(sol: TrigSolution):
    """J_gamma[phi] via iint cos(rho(t-s)) phi phi = Mc^2 + Ms^2."""
    Mc, Ms = _trig_moments(sol)
    mp = min(sol.horizon / 8.0, 1.0 / sol.rho)
    quad_sq = panel_gauss(lambda s: eval_trig(sol, s) ** 2, 0.0, sol.horizon, max_panel=mp)
    return 0.5 * sol.gamma * quad_sq + 0.5 * (Mc**2 + Ms**2)

"""Fixed-order composite Gauss-Legendre quadrature on panels.

The closed-form modules need integrals of smooth-between-breakpoints
integrands (products of exponentials, trig polynomials, piecewise kernels).
A 24-point Gauss rule per panel is effectively exact for those once panels
are short enough that the integrand's variation per panel stays moderate,
so we expose a single helper that splits [a, b] at caller-supplied
breakpoints, subdivides long panels, and sums the panel rules.
"""

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(24)


def panel_gauss(f, a, b, breakpoints=(), max_panel=None):
    """Integrate ``f`` over [a, b].

    ``f`` must accept a 1-D ndarray of abscissae and return values of the
    same shape.  ``breakpoints`` are points where the integrand loses
    smoothness; panels never straddle them.  ``max_panel`` caps the panel
    length (useful when ``f`` contains steep exponentials).
    """
    if b <= a:
        return 0.0
    cuts = [a, b]
    cuts.extend(p for p in breakpoints if a < p < b)
    cuts = sorted(set(cuts))
    edges = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if max_panel is not None and hi - lo > max_panel:
            k = int(np.ceil((hi - lo) / max_panel))
            edges.append(np.linspace(lo, hi, k + 1))
        else:
            edges.append(np.array([lo, hi]))
    total = 0.0
    for seg in edges:
        los, his = seg[:-1], seg[1:]
        half = 0.5 * (his - los)
        mid = 0.5 * (his + los)
        # abscissae for all panels of this segment at once: (panels, nodes)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = f(x.ravel()).reshape(x.shape)
        total += float(np.sum(half[:, None] * _WEIGHTS[None, :] * vals))
    return total

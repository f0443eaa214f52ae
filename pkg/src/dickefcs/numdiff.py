"""Central finite differences with Richardson extrapolation and error estimates.

Used to differentiate dominant eigenvalues in the counting field.  The
stencils are symmetric and at least 4th-order accurate; a small Neville
tableau over contracting steps picks the entry with the smallest estimated
error, which self-balances truncation against roundoff (Ridders' idea).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_DEFAULT_LEVELS = 3


@lru_cache(maxsize=None)
def _stencil(order: int, half_width: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-step central-difference weights for the requested derivative order."""
    offsets = np.arange(-half_width, half_width + 1)
    n = offsets.size
    # Vandermonde system sum_j c_j o_j^i = i! delta_{i,order}
    vander = np.vander(offsets.astype(float), n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    coeffs = np.linalg.solve(vander, rhs)
    return offsets, coeffs


def _half_width(order: int) -> int:
    # smallest symmetric stencil with >= 4th-order accuracy
    return order // 2 + (2 if order % 2 == 0 else 1) if order > 2 else 2


def derivative_at_zero(
    f,
    order: int,
    h: float = 1e-2,
    levels: int = _DEFAULT_LEVELS,
    value_eps: float = 2.5e-16,
):
    """k-th derivative of f at 0 with an error estimate.

    Evaluates f on symmetric grids with steps h, h/2, ..., extrapolates the
    (even-power) error series, and returns the tableau entry of minimum
    estimated error together with that estimate and a diagnostics dict.

    value_eps is the absolute evaluation noise of f; it sets an analytic
    roundoff floor eps * sum|c| / step^order per tableau row so that the
    selection cannot be fooled by coincidentally agreeing noisy entries.
    """
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    half = max(2, _half_width(order))
    offsets, coeffs = _stencil(order, half)
    coeff_mass = float(np.abs(coeffs).sum())
    cache: dict[float, complex] = {}

    def feval(x: float):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    def fd(step: float):
        return sum(c * feval(o * step) for o, c in zip(offsets, coeffs) if c != 0.0) / step**order

    steps = [h / 2**i for i in range(levels)]
    floors = [value_eps * coeff_mass / s**order for s in steps]
    table = [[fd(steps[0])]]
    best = table[0][0]
    best_err = np.inf
    for i in range(1, levels):
        row = [fd(steps[i])]
        for j in range(1, i + 1):
            factor = 4.0 ** (j + 1)  # error powers h^4, h^6, ...
            row.append((factor * row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
            err = max(
                abs(row[j] - row[j - 1]), abs(row[j] - table[i - 1][j - 1]), floors[i]
            )
            if err < best_err:
                best, best_err = row[j], err
        table.append(row)
    if not np.isfinite(best_err):
        best_err = max(abs(table[-1][0] - table[0][0]), floors[-1])
        best = table[-1][-1]
    diagnostics = {}
    if levels >= 3:
        d01 = abs(table[1][0] - table[0][0])
        d12 = abs(table[2][0] - table[1][0])
        if d12 > d01 > 0:
            diagnostics["roundoff_suspected"] = True  # differences should shrink with h
        elif best_err > 0 and abs(best) > 0 and best_err > 1e-3 * abs(best):
            diagnostics["truncation_suspected"] = True
    return best, float(best_err), diagnostics

"""Stationary counting statistics by two independent numerical routes.

Route 1 (eigenvalue): finite differences of the dominant eigenvalue of the
dressed generator in the counting field.

Route 2 (resolvent): chi-derivatives of the Laplace-transformed moment
generating function tr[(z - L(chi))^-1 rho_bar], expanded as a Laurent
series around z = 0.  The pole coefficients give the long-time polynomial
growth of the moments, which standard moment-cumulant relations convert to
the cumulant rates C_k and shifts S_k.  All linear solves with the singular
chi = 0 generator are done on the complement of the stationary direction
(group-inverse contract) through a bordered LU factorization.

Neither route is trusted alone; cross_validate runs both plus the closed
forms and fails loudly on disagreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
import scipy.linalg as la

from . import analytics
from .errors import NonUniqueStationaryStateError, SingularSolveError, ValidationFailure
from .liouvillian import (
    SMALL_CHI_CUTOFF,
    CountingAssignment,
    LadderGenerator,
    build_generator,
    counting_derivative,
    dress_with_counting,
    dominant_eigenvalue,
)
from .model import SystemParams, effective_occupation
from .numdiff import derivative_at_zero

MAX_ORDER = 4
_COND_LIMIT = 1e12

# default relative tolerances used by cross_validate (documented contract)
METHOD_AGREEMENT_TOL = 1e-6
CLOSED_FORM_TOL = 1e-8
REGIME_TOL = 0.05


@dataclass(frozen=True)
class CumulantSet:
    """Cumulant rates C_k (and optional shifts S_k) with per-entry error estimates."""

    cumulants: dict[int, float]
    errors: dict[int, float]
    method: str
    shifts: dict[int, float] | None = None
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, order: int) -> float:
        return self.cumulants[order]


def stationary_state_numeric(gen: LadderGenerator) -> np.ndarray:
    """Null vector of the chi = 0 generator, normalized and nonnegative.

    Solves the rate-scaled system with one row replaced by the normalization
    constraint (the rows of a generator are linearly dependent), then does
    two rounds of iterative refinement.  Guards against a multi-dimensional
    null space, which valid ladder rates cannot produce.
    """
    scale = gen.max_rate()
    mat = gen.matrix() / scale
    n = mat.shape[0]
    bordered = mat.copy()
    bordered[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    lu = la.lu_factor(bordered)
    x = la.lu_solve(lu, rhs)
    for _ in range(2):
        x += la.lu_solve(lu, rhs - bordered @ x)
    if not np.all(np.isfinite(x)):
        raise NonUniqueStationaryStateError("stationary solve produced non-finite entries")
    if n <= 257:
        sv = la.svdvals(mat)
        if sv[-2] < 1e-10:  # second-smallest singular value: null space must be 1-D
            raise NonUniqueStationaryStateError(
                f"generator null space is (numerically) degenerate, sigma={sv[-2]:.2e}"
            )
    if x.min() < -1e-10:
        raise NonUniqueStationaryStateError(f"stationary vector has negative weight {x.min():.2e}")
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def current_numeric(params: SystemParams, counted: str = "drain") -> float:
    """Stationary photon current into the counted reservoir.

    Emission minus absorption traces over the stationary state; positive for
    net flow into the counted reservoir.
    """
    gen = build_generator(params)
    rho = stationary_state_numeric(gen)
    return float(gen.down_parts[counted] @ rho - gen.up_parts[counted] @ rho)


def _refine_eigenvalue_mp(bands, chi: float, lam0: complex, dps: int = 40, iters: int = 4) -> complex:
    """Newton-polish the dominant eigenvalue on mpmath-built tridiagonal bands.

    The counting phases exp(-+ i chi) are formed in high precision, so
    lambda(chi) comes back smooth in chi down to the float64 rounding of the
    returned value.  Without this, phase rounding in the assembled matrix
    (relative 1e-16, but multiplied by huge absorption rates) caps the
    accuracy of high-order chi-derivatives.  Iterates lam -= p/p' on the
    scaled three-term determinant recurrence.
    """
    diag, up_unc, up_cnt, dn_unc, dn_cnt = bands
    n = diag.size
    with mpmath.workdps(dps):
        e_absorb = mpmath.exp(mpmath.mpc(0, -chi))
        e_emit = mpmath.exp(mpmath.mpc(0, +chi))
        sub = [up_unc[k] + up_cnt[k] * e_absorb for k in range(n - 1)]
        sup = [dn_unc[k + 1] + dn_cnt[k + 1] * e_emit for k in range(n - 1)]
        lam = mpmath.mpc(lam0)
        tiny = mpmath.mpf("1e-1000")
        tol = mpmath.mpf("1e-35")
        for _ in range(iters):
            d_prev, dp_prev = mpmath.mpc(1), mpmath.mpc(0)
            d, dp = diag[0] - lam, mpmath.mpc(-1)
            for k in range(1, n):
                a = sub[k - 1] * sup[k - 1]
                dk = diag[k] - lam
                d_new = dk * d - a * d_prev
                dp_new = dk * dp - d - a * dp_prev
                c = 1 / max(abs(d_new), abs(dp_new), tiny)
                d_prev, dp_prev = d * c, dp * c
                d, dp = d_new * c, dp_new * c
            step = d / dp
            lam = lam - step
            if abs(step) < tol * (1 + abs(lam)):
                break
        return complex(lam)


def _scaled_eigenvalue_fn(gen: LadderGenerator, counted: str, scale: float):
    """lambda(chi)/scale as a plain callable, fast path for small real chi."""
    diag = gen.diagonal() / scale
    up_cnt = gen.up_parts[counted] / scale
    dn_cnt = gen.down_parts[counted] / scale
    up_unc = gen.up_total() / scale - up_cnt
    dn_unc = gen.down_total() / scale - dn_cnt
    bands = (diag, up_unc, up_cnt, dn_unc, dn_cnt)

    def lam(chi: float) -> complex:
        dressed = dress_with_counting(gen, CountingAssignment(phases={counted: chi}))
        if abs(chi) <= SMALL_CHI_CUTOFF:
            vals = la.eigvals(dressed.matrix / scale)
            lam0 = vals[int(np.argmax(vals.real))]
        else:
            lam0 = dominant_eigenvalue(dressed) / scale
        return _refine_eigenvalue_mp(bands, chi, lam0)

    return lam


# base steps tried per derivative order; the generator is rate-scaled, so
# the optimal dimensionless step is essentially parameter-independent
_STEP_BASKET = (5e-3, 1e-2, 3e-2, 8e-2)


def cumulants_eigenvalue(
    params: SystemParams,
    orders: tuple[int, ...] = (1, 2, 3, 4),
    counted: str = "drain",
    h: float | None = None,
    levels: int = 6,
) -> CumulantSet:
    """C_k from (-i d/dchi)^k of the dominant eigenvalue at chi = 0.

    Central differences of order >= 4 with Richardson extrapolation.  By
    default a small basket of base steps is tried per order and the result
    with the smallest estimated error wins (higher orders need coarser
    steps before roundoff takes over).  The reported error combines the
    extrapolation residual with any leftover imaginary part (cumulants of
    a counting variable are real).
    """
    if max(orders) > MAX_ORDER:
        raise ValueError(f"cumulant orders are capped at {MAX_ORDER}")
    gen = build_generator(params)
    scale = gen.max_rate()
    lam = _scaled_eigenvalue_fn(gen, counted, scale)
    cache: dict[float, complex] = {}

    def lam_cached(chi: float) -> complex:
        if chi not in cache:
            cache[chi] = lam(chi)
        return cache[chi]

    basket = _STEP_BASKET if h is None else (h,)
    cumulants, errors, diags = {}, {}, {}
    for k in orders:
        half = 3 if k >= 3 else 2
        candidates = []
        for h0 in basket:
            # returned eigenvalues are float64-rounded; noise scales with |lambda|
            veps = 1e-16 * abs(lam_cached(half * h0)) + 1e-30
            candidates.append(derivative_at_zero(lam_cached, k, h=h0, levels=levels, value_eps=veps))
        value, err, diag = min(candidates, key=lambda t: t[1])
        ck = (-1j) ** k * value
        cumulants[k] = float(ck.real) * scale
        errors[k] = (err + abs(ck.imag)) * scale
        if diag:
            diags[k] = diag
    return CumulantSet(cumulants=cumulants, errors=errors, method="eigenvalue", diagnostics=diags)


class _GroupInverseSolver:
    """Applies the group inverse of the scaled generator via a bordered LU solve.

    D y solves  L x = (1 - P) y  with  1^T x = 0,  P = rho_bar 1^T.
    """

    def __init__(self, mat_scaled: np.ndarray, rho: np.ndarray):
        n = mat_scaled.shape[0]
        bordered = np.zeros((n + 1, n + 1))
        bordered[:n, :n] = mat_scaled
        bordered[:n, n] = rho
        bordered[n, :n] = 1.0
        cond = np.linalg.cond(bordered) if n <= 600 else 0.0
        if cond > _COND_LIMIT:
            raise SingularSolveError(f"projected solve too ill-conditioned (cond ~ {cond:.2e})")
        self._lu = la.lu_factor(bordered)
        self._rho = rho
        self._n = n

    def apply(self, y: np.ndarray) -> np.ndarray:
        rhs = np.zeros(self._n + 1, dtype=complex)
        rhs[: self._n] = y - self._rho * y.sum()
        return la.lu_solve(self._lu, rhs)[: self._n]


def _chain_moment_table(gen: LadderGenerator, counted: str, max_order: int):
    """chi^p / z^w coefficient table of tr[(z - L(chi))^-1 rho_bar].

    Truncated-polynomial arithmetic in chi (degree <= max_order) with the
    resolvent of the undressed generator expanded as P/z + D + z D^2 + ...
    """
    scale = gen.max_rate()
    mat = gen.matrix() / scale
    rho = stationary_state_numeric(gen).astype(complex)
    dinv = _GroupInverseSolver(mat, rho.real)
    lp = {
        p: counting_derivative(gen, counted, p) / (scale * math.factorial(p))
        for p in range(1, max_order + 1)
    }
    w_min, w_max = -(max_order + 1), max_order

    def apply_resolvent(state):
        # R(z) = P/z - D - z D^2 - z^2 D^3 - ...  with P = rho_bar 1^T
        out = {}
        for (p, w), vec in state.items():
            if w - 1 >= w_min:
                key = (p, w - 1)
                out[key] = out.get(key, 0.0) + rho * vec.sum()
            dv = vec
            for j in range(w_max - w + 1):
                dv = dinv.apply(dv)
                key = (p, w + j)
                out[key] = out.get(key, 0.0) - dv
        return out

    def apply_jump_expansion(state):
        out = {}
        for (p, w), vec in state.items():
            for r in range(1, max_order - p + 1):
                key = (p + r, w)
                out[key] = out.get(key, 0.0) + lp[r] @ vec
        return out

    current = {(0, -1): rho}  # R rho_bar is exactly rho_bar / z
    totals = dict(current)
    for _ in range(max_order):
        current = apply_resolvent(apply_jump_expansion(current))
        for key, vec in current.items():
            totals[key] = totals.get(key, 0.0) + vec
    table = {key: complex(vec.sum()) for key, vec in totals.items()}
    return table, scale


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(a.size, b.size)
    out = np.zeros(n, dtype=np.result_type(a, b))
    out[: a.size] += a
    out[: b.size] += b
    return out


def cumulants_resolvent(
    params: SystemParams,
    orders: tuple[int, ...] = (1, 2, 3, 4),
    counted: str = "drain",
) -> CumulantSet:
    """C_k and S_k from the Laplace transform of the moment generating function.

    The z -> 0 Laurent coefficients (pole order <= k+1) give each moment's
    long-time polynomial; moment-cumulant relations reduce those to linear
    growth C_k t + S_k.  The quadratic-and-higher residuals of the cumulant
    polynomials must cancel and their leftovers feed the error estimate.
    """
    if max(orders) > MAX_ORDER:
        raise ValueError(f"cumulant orders are capped at {MAX_ORDER}")
    max_order = max(orders)
    gen = build_generator(params)
    table, scale = _chain_moment_table(gen, counted, max_order)

    # moment polynomials in scaled time tau = scale * t
    moment_polys = {}
    imag_residual = {}
    for k in range(1, max_order + 1):
        coeffs = np.zeros(k + 1, dtype=complex)
        for j in range(k + 1):
            raw = table.get((k, -(j + 1)), 0.0)
            coeffs[j] = raw * (-1j) ** k * math.factorial(k) / math.factorial(j)
        moment_polys[k] = coeffs.real
        imag_residual[k] = float(np.abs(coeffs.imag).max(initial=0.0))

    m1 = moment_polys.get(1, np.zeros(2))
    kappa = {1: m1}
    if max_order >= 2:
        kappa[2] = _poly_add(moment_polys[2], -_poly_mul(m1, m1))
    if max_order >= 3:
        kappa[3] = _poly_add(
            _poly_add(moment_polys[3], -3.0 * _poly_mul(m1, moment_polys[2])),
            2.0 * _poly_mul(m1, _poly_mul(m1, m1)),
        )
    if max_order >= 4:
        m1_sq = _poly_mul(m1, m1)
        kappa[4] = _poly_add(
            _poly_add(moment_polys[4], -4.0 * _poly_mul(m1, moment_polys[3])),
            _poly_add(
                -3.0 * _poly_mul(moment_polys[2], moment_polys[2]),
                _poly_add(
                    12.0 * _poly_mul(m1_sq, moment_polys[2]),
                    -6.0 * _poly_mul(m1_sq, m1_sq),
                ),
            ),
        )

    cumulants, shifts, errors = {}, {}, {}
    for k in orders:
        poly = kappa[k]
        cumulants[k] = float(poly[1]) * scale
        shifts[k] = float(poly[0])
        residual = float(np.abs(poly[2:]).sum()) if poly.size > 2 else 0.0
        errors[k] = scale * (residual + imag_residual[k] + 1e-15 * max(1.0, abs(poly[1])))
    return CumulantSet(cumulants=cumulants, errors=errors, method="resolvent", shifts=shifts)


@dataclass(frozen=True)
class ValidationEntry:
    name: str
    value_a: float
    value_b: float
    rel_discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_discrepancy <= self.tolerance


@dataclass(frozen=True)
class CrossValidationReport:
    entries: tuple[ValidationEntry, ...]
    max_method_discrepancy: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def worst(self) -> ValidationEntry | None:
        failing = [e for e in self.entries if not e.passed]
        if not failing:
            return None
        return max(failing, key=lambda e: e.rel_discrepancy / e.tolerance)


def _rel(a: float, b: float, floor: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def cross_validate(
    params: SystemParams,
    counted: str = "drain",
    raise_on_failure: bool = True,
) -> CrossValidationReport:
    """Run both cumulant routes plus applicable closed forms; fail loudly.

    Method agreement is held to METHOD_AGREEMENT_TOL; exact closed forms to
    CLOSED_FORM_TOL; asymptotic regime formulas (only checked when the
    parameters sit inside the regime) to REGIME_TOL.
    """
    res = cumulants_resolvent(params, counted=counted)
    eig = cumulants_eigenvalue(params, counted=counted)
    scale = max(abs(v) for v in res.cumulants.values())
    floor = max(1e-9 * scale, 1e-300)
    entries = []
    for k in sorted(res.cumulants):
        entries.append(
            ValidationEntry(
                name=f"C{k} eigenvalue-vs-resolvent",
                value_a=eig[k],
                value_b=res[k],
                rel_discrepancy=_rel(eig[k], res[k], floor),
                tolerance=METHOD_AGREEMENT_TOL,
            )
        )
    method_max = max(e.rel_discrepancy for e in entries)

    if len(params.reservoirs) == 2:
        closed = analytics.current_closed_form(params)
        signed = closed if counted == "drain" else -closed
        entries.append(
            ValidationEntry(
                name="C1 vs closed-form current",
                value_a=res[1],
                value_b=signed,
                # floor on the cumulant scale keeps the exact-zero-bias case meaningful
                rel_discrepancy=_rel(res[1], signed, max(1e-3 * scale, floor)),
                tolerance=CLOSED_FORM_TOL,
            )
        )
        n_s = params.reservoir("source").occupation
        n_d = params.reservoir("drain").occupation
        n_m = effective_occupation(params).occupation
        if n_d == 0 and 0 < n_s <= 1e-2:
            for k in sorted(res.cumulants):
                limit = analytics.limit_cumulants("poisson_small_bias", params, k)
                entries.append(
                    ValidationEntry(
                        name=f"C{k} vs Poisson limit",
                        value_a=res[k],
                        value_b=limit,
                        rel_discrepancy=_rel(res[k], limit, floor),
                        tolerance=REGIME_TOL,
                    )
                )
        if n_s >= 1e4 * max(1.0, n_d) and n_s >= 100.0 * params.n_atoms * (params.n_atoms + 2):
            for k in sorted(res.cumulants):
                limit = analytics.limit_cumulants("large_bias", params, k)
                entries.append(
                    ValidationEntry(
                        name=f"C{k} vs large-bias limit",
                        value_a=res[k],
                        value_b=limit,
                        rel_discrepancy=_rel(res[k], limit, floor),
                        tolerance=REGIME_TOL,
                    )
                )
        if n_s == n_d and n_s > 0:
            g_s = params.reservoir("source").gamma
            g_d = params.reservoir("drain").gamma
            for k in (1, 3):
                if k in res.cumulants:
                    entries.append(
                        ValidationEntry(
                            name=f"C{k} vanishes at zero bias",
                            value_a=res[k],
                            value_b=0.0,
                            rel_discrepancy=abs(res[k]) / max(res[2], floor),
                            tolerance=1e-9,
                        )
                    )
            if g_s == g_d and n_s >= analytics.ZERO_BIAS_LARGE_MIN_PER_ATOM * params.n_atoms:
                c2, c4 = analytics.zero_bias_noise(params.n_atoms, n_s, g_s, "large")
                for k, ref in ((2, c2), (4, c4)):
                    if k in res.cumulants:
                        entries.append(
                            ValidationEntry(
                                name=f"C{k} vs zero-bias asymptote",
                                value_a=res[k],
                                value_b=ref,
                                rel_discrepancy=_rel(res[k], ref, floor),
                                tolerance=REGIME_TOL,
                            )
                        )

    report = CrossValidationReport(entries=tuple(entries), max_method_discrepancy=method_max)
    if raise_on_failure and not report.passed:
        worst = report.worst()
        raise ValidationFailure(
            f"{worst.name}: {worst.value_a:.12g} vs {worst.value_b:.12g} "
            f"(rel {worst.rel_discrepancy:.3e} > tol {worst.tolerance:.1e})"
        )
    return report

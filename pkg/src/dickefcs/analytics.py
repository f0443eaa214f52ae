"""Closed-form reference results: currents, collectivity factor, limits, series.

These are the analytic ground truth the numerical engines are validated
against.  Everything here is a pure function of scenario parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import SeriesBranchError
from .model import SystemParams, classical_rate, effective_occupation, thermal_occupation

# validity heuristics for the zero-bias series branches (test-tunable)
ZERO_BIAS_SMALL_MAX = 0.1
ZERO_BIAS_LARGE_MIN_PER_ATOM = 10.0

# regime-tag thresholds on n_M / N
REGIME_LINEAR_MAX = 0.1
REGIME_COLLECTIVE_MIN = 10.0


def _coth(x: float) -> float:
    """coth with a series branch for small argument to avoid cancellation."""
    if x < 0.1:
        x2 = x * x
        return 1.0 / x + x / 3.0 - x * x2 / 45.0 + 2.0 * x2 * x2 * x / 945.0
    return 1.0 / math.tanh(x)


def sigma_n(n_atoms: int, n_m: float) -> float:
    """Degree of collectivity of the stationary transport at effective occupation n_m.

    The defining ratio of (N+1)-th powers is evaluated through the
    equivalent cancellation-free form

        sigma_N = (N+1) * coth((N+1)/2 * ln(1 + 1/n_m)) - (1 + 2 n_m),

    which never overflows.  When the remaining subtraction would still lose
    more than ~3 digits (deep collective regime, n_m >> N) the evaluation
    falls back to 50-digit arithmetic.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if n_m < 0:
        raise ValueError("n_m must be >= 0")
    if n_m == 0:
        return float(n_atoms)
    big = n_atoms + 1
    x = 0.5 * big * math.log1p(1.0 / n_m)
    lead = big * _coth(x)
    result = lead - (1.0 + 2.0 * n_m)
    # cancellation guard: absolute rounding is ~eps * lead
    if result <= 0 or 4e-16 * lead > 1e-13 * abs(result):
        with mpmath.workdps(50):
            n = mpmath.mpf(n_m)
            xx = mpmath.mpf(big) / 2 * mpmath.log1p(1 / n)
            result = float(big * mpmath.coth(xx) - (1 + 2 * n))
    return result


def sigma_asymptotic(n_atoms: int, n_m: float) -> float:
    """Large-N single-parameter scaling form N*coth(N/(2 n_m)) - 2 n_m."""
    if n_m <= 0:
        raise ValueError("the scaling form needs n_m > 0")
    x = n_atoms / (2.0 * n_m)
    return n_atoms * _coth(x) - 2.0 * n_m


@dataclass(frozen=True)
class ScalingRegimeReport:
    """Collectivity factor together with the regime tag and its asymptote."""

    sigma_n: float
    regime: str  # linear | crossover | collective
    asymptote: float


def classify_regime(
    n_atoms: int,
    n_m: float,
    linear_max: float = REGIME_LINEAR_MAX,
    collective_min: float = REGIME_COLLECTIVE_MIN,
) -> str:
    ratio = n_m / n_atoms
    if ratio <= linear_max:
        return "linear"
    if ratio >= collective_min:
        return "collective"
    return "crossover"


def scaling_report(n_atoms: int, n_m: float) -> ScalingRegimeReport:
    asym = sigma_asymptotic(n_atoms, n_m) if n_m > 0 else float(n_atoms)
    return ScalingRegimeReport(
        sigma_n=sigma_n(n_atoms, n_m),
        regime=classify_regime(n_atoms, n_m),
        asymptote=asym,
    )


def current_closed_form(params: SystemParams) -> float:
    """Stationary photon current (n_S - n_D) * gamma_cl * sigma_N."""
    if len(params.reservoirs) != 2:
        raise ValueError("the closed-form current needs a source and a drain")
    n_s = params.reservoir("source").occupation
    n_d = params.reservoir("drain").occupation
    n_m = effective_occupation(params).occupation
    return (n_s - n_d) * classical_rate(params) * sigma_n(params.n_atoms, n_m)


def thermal_conductance(
    n_atoms: int,
    omega: float,
    temperature: float,
    gamma_source: float,
    gamma_drain: float,
    branch: str = "exact",
) -> float:
    """Linear thermal conductance omega * dI/dT between thermal baths at T.

    branch "exact" differentiates the closed-form current numerically at
    delta_T -> 0; "high_T" and "low_T" return the printed asymptotes
    gamma_cl*(omega/T)*N(N+2)/6 and gamma_cl*(omega/T)^2*N*exp(-omega/T).
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    gcl = gamma_source * gamma_drain / (gamma_source + gamma_drain)
    if branch == "high_T":
        return gcl * (omega / temperature) * n_atoms * (n_atoms + 2) / 6.0
    if branch == "low_T":
        return gcl * (omega / temperature) ** 2 * n_atoms * math.exp(-omega / temperature)
    if branch != "exact":
        raise ValueError(f"unknown branch {branch!r}")

    def current_at(delta: float) -> float:
        p = SystemParams.source_drain(
            n_atoms,
            gamma_source,
            thermal_occupation(1.0 / (temperature + delta / 2), omega),
            gamma_drain,
            thermal_occupation(1.0 / (temperature - delta / 2), omega),
            omega=omega,
        )
        return current_closed_form(p)

    h = 1e-4 * temperature
    d_h = current_at(h) / h
    d_h2 = current_at(h / 2) / (h / 2)
    # symmetric difference quotient has O(h^2) error; one Richardson level
    return omega * (4.0 * d_h2 - d_h) / 3.0


def equilibrium_moments(n_atoms: int, beta_omega: float, order: int) -> float:
    """Stationary emitted-photon moments against a single thermal bath.

    <n^k> = sum_{m=1..N} m^k e^{m x} / sum_{m=0..N} e^{m x} with x = beta*omega,
    evaluated with the dominant exponential factored out.
    """
    if order < 1:
        raise ValueError("moment order must be >= 1")
    if math.isinf(beta_omega):
        return float(n_atoms) ** order
    m = np.arange(n_atoms + 1, dtype=float)
    expo = m * beta_omega
    weights = np.exp(expo - expo.max())
    return float((m**order @ weights) / weights.sum())


def equilibrium_cumulants_high_t(n_atoms: int) -> tuple[float, float, float, float]:
    """First four cumulants of the emitted-photon count in the hot-bath limit.

    The limiting count distribution is uniform on {0, ..., N}; the even
    cumulants grow super-linearly with N while all odd ones past the first
    vanish.
    """
    n = float(n_atoms)
    q = n * (n + 2.0)
    return (n / 2.0, q / 12.0, 0.0, -q * (q + 2.0) / 120.0)


def zero_bias_noise(
    n_atoms: int, n_env: float, gamma: float, branch: str
) -> tuple[float, float]:
    """(C2, C4) at zero bias, symmetric coupling, environment occupation n_env.

    branch "small" uses the leading series in n_env (valid for
    n_env <= ZERO_BIAS_SMALL_MAX), branch "large" the collective asymptotes
    (valid for n_env >= ZERO_BIAS_LARGE_MIN_PER_ATOM * N).
    """
    n = float(n_env)
    big = n_atoms
    if branch == "small":
        if n > ZERO_BIAS_SMALL_MAX:
            raise SeriesBranchError(
                f"small-occupation series used at n_env={n} > {ZERO_BIAS_SMALL_MAX}"
            )
        if n == 0:
            return (0.0, 0.0)
        # B = (1+n)^(N+1) - n^(N+1), evaluated via the factored form
        log_lead = (big + 1) * math.log1p(n)
        u = -math.expm1((big + 1) * (math.log(n) - math.log1p(n)))
        log_b = log_lead + math.log(u)
        pref = gamma * n * (1.0 + n)
        c2 = pref * math.exp(-log_b) * (big + (big + 2) * (big - 1) * n)
        c4 = pref * math.exp(-3.0 * log_b) * (big + (3 * big * (big + 2) - 8) * n)
        return (c2, c4)
    if branch == "large":
        if n < ZERO_BIAS_LARGE_MIN_PER_ATOM * big:
            raise SeriesBranchError(
                f"collective asymptote used at n_env={n} < {ZERO_BIAS_LARGE_MIN_PER_ATOM * big}"
            )
        q = big * (big + 2.0)
        return (gamma * n * q / 6.0, gamma * n * q * (q + 12.0) / 360.0)
    raise ValueError(f"unknown branch {branch!r}")


def limit_cumulants(kind: str, params: SystemParams, order: int) -> float:
    """Closed-form cumulant limits: Poissonian small bias or large bias.

    Poisson branch (n_D = 0, n_S small): every cumulant equals
    gamma_cl * N * n_S.  Large-bias branch: Gamma_D * N(N+2)/6, with even
    cumulants boosted by (1 + 2 n_D).
    """
    if order < 1 or order > 4:
        raise ValueError("cumulant order must be 1..4")
    if kind == "poisson_small_bias":
        n_s = params.reservoir("source").occupation
        return classical_rate(params) * params.n_atoms * n_s
    if kind == "large_bias":
        drain = params.reservoir("drain")
        base = drain.gamma * params.n_atoms * (params.n_atoms + 2) / 6.0
        if order % 2 == 0:
            return base * (1.0 + 2.0 * drain.occupation)
        return base
    raise ValueError(f"unknown limit kind {kind!r}")

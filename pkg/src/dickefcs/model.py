"""Scenario parameters and the closed-form thermalization quantities.

A scenario is N identical two-level atoms with level splitting omega,
collectively coupled to one or two bosonic reservoirs.  Units use
hbar = k_B = 1 throughout; rates are in whatever reference unit the
caller picks for the couplings.

The collective state ladder |j m>, j = N/2, is indexed internally by the
integer offset k = m + N/2 in {0, ..., N}, so k = 0 is the ground state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCouplingsError

RESERVOIR_LABELS = ("source", "drain", "single")


@dataclass(frozen=True)
class ReservoirParams:
    """One bosonic reservoir: coupling rate and photon occupation at omega."""

    label: str
    gamma: float
    occupation: float

    def __post_init__(self):
        if self.label not in RESERVOIR_LABELS:
            raise ValueError(f"unknown reservoir label {self.label!r}")
        if self.gamma < 0:
            raise ValueError(f"reservoir coupling must be >= 0, got {self.gamma}")
        if self.occupation < 0:
            raise ValueError(f"reservoir occupation must be >= 0, got {self.occupation}")


@dataclass(frozen=True)
class SystemParams:
    """Full scenario: atom count, level splitting, and 1 or 2 reservoirs."""

    n_atoms: int
    omega: float
    reservoirs: tuple[ReservoirParams, ...]

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("need at least one atom")
        if not self.omega > 0:
            raise ValueError("level splitting must be positive")
        labels = [r.label for r in self.reservoirs]
        if len(labels) != len(set(labels)):
            raise ValueError("reservoir labels must be unique")
        if len(self.reservoirs) == 1:
            pass
        elif len(self.reservoirs) == 2:
            if set(labels) != {"source", "drain"}:
                raise ValueError("two-reservoir scenarios must have a source and a drain")
        else:
            raise ValueError("only 1 or 2 reservoirs are supported")

    @classmethod
    def source_drain(cls, n_atoms, gamma_source, n_source, gamma_drain, n_drain, omega=1.0):
        return cls(
            n_atoms=n_atoms,
            omega=omega,
            reservoirs=(
                ReservoirParams("source", gamma_source, n_source),
                ReservoirParams("drain", gamma_drain, n_drain),
            ),
        )

    @classmethod
    def single_bath(cls, n_atoms, gamma, occupation, omega=1.0):
        return cls(
            n_atoms=n_atoms,
            omega=omega,
            reservoirs=(ReservoirParams("single", gamma, occupation),),
        )

    def reservoir(self, label: str) -> ReservoirParams:
        for r in self.reservoirs:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.reservoirs)


@dataclass(frozen=True)
class EffectiveBath:
    """The single fictitious reservoir the medium actually thermalizes with."""

    occupation: float  # n_M
    beta: float        # inverse temperature; +inf for a vacuum bath


@dataclass(frozen=True)
class CavitySource:
    """Laser-driven lossy cavity used as a tunable photon source."""

    pump: float
    loss: float
    laser_frequency: float

    def __post_init__(self):
        if self.pump < 0:
            raise ValueError("pump rate must be >= 0")
        if not self.loss > 0:
            raise ValueError("cavity loss rate must be positive")
        if not self.laser_frequency > 0:
            raise ValueError("laser frequency must be positive")


def effective_occupation(params: SystemParams) -> EffectiveBath:
    """Coupling-weighted occupation n_M and the matching inverse temperature.

    For two reservoirs n_M = (G_S n_S + G_D n_D)/(G_S + G_D); a single
    reservoir is its own effective bath.  beta is +inf when n_M = 0 by
    convention, so vacuum scenarios flow through all code paths.
    """
    if len(params.reservoirs) == 1:
        n_m = params.reservoirs[0].occupation
    else:
        gtot = sum(r.gamma for r in params.reservoirs)
        if gtot <= 0:
            raise DegenerateCouplingsError("both reservoir couplings vanish")
        n_m = sum(r.gamma * r.occupation for r in params.reservoirs) / gtot
    if n_m > 0:
        beta = math.log1p(1.0 / n_m) / params.omega
    else:
        beta = math.inf
    return EffectiveBath(occupation=n_m, beta=beta)


def thermal_occupation(beta: float, omega: float) -> float:
    """Bose-Einstein occupation 1/(exp(beta*omega) - 1)."""
    x = beta * omega
    if not x > 0:
        raise ValueError(f"beta*omega must be positive, got {x}")
    return 1.0 / math.expm1(x)


def cavity_source_occupation(src: CavitySource, omega: float) -> float:
    """Stationary cavity photon number seen by atoms at transition frequency omega.

    Lorentzian in the laser detuning: |p|^2 / ((omega - omega_L)^2 + kappa^2).
    """
    detuning = omega - src.laser_frequency
    return src.pump**2 / (detuning**2 + src.loss**2)


def classical_rate(params: SystemParams) -> float:
    """Series transfer rate gamma_cl = G_S G_D / (G_S + G_D) between the two reservoirs."""
    if len(params.reservoirs) != 2:
        raise DegenerateCouplingsError("classical transfer rate needs a source and a drain")
    g_s = params.reservoir("source").gamma
    g_d = params.reservoir("drain").gamma
    if g_s + g_d <= 0:
        raise DegenerateCouplingsError("both reservoir couplings vanish")
    return g_s * g_d / (g_s + g_d)


def stationary_distribution(params: SystemParams) -> np.ndarray:
    """Stationary ladder populations, ordered from m = -N/2 to m = +N/2.

    Geometric on the ladder: rho[k+1]/rho[k] = n_M/(1 + n_M).  All weight
    sits on the ground state for a vacuum effective bath; the distribution
    is uniform in the infinite-occupation limit.
    """
    n_m = effective_occupation(params).occupation
    n_states = params.n_atoms + 1
    if n_m == 0:
        dist = np.zeros(n_states)
        dist[0] = 1.0
        return dist
    ratio = 1.0 if math.isinf(n_m) else n_m / (1.0 + n_m)
    weights = ratio ** np.arange(n_states)
    return weights / weights.sum()

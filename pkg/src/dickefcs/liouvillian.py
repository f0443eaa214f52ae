"""Ladder-basis rate generator, counting-field dressing, and spectral primitives.

The collective dissipative dynamics restricted to the ladder populations
rho_k (k = m + N/2) is a birth-death chain.  Per reservoir the upward
(absorption) link k -> k+1 carries gamma*n*A(m) and the downward
(emission) link k -> k-1 carries gamma*(1+n)*E(m), with the collective
matrix elements

    A(m) = j(j+1) - m(m+1),    E(m) = j(j+1) - m(m-1),    j = N/2.

Counting convention: a photon EMITTED into a counted reservoir increments
the detector count n, so emission links pick up exp(+i*chi) and
absorption links exp(-i*chi).  With the drain counted, the stationary
current is positive for n_S > n_D.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg as la

from .errors import EigenvalueCrossingError, UnknownReservoirError
from .model import SystemParams

# |chi| below which the dominant eigenvalue is safely the one of largest
# real part; beyond it we track the branch by continuation from chi = 0.
SMALL_CHI_CUTOFF = 0.35
CONTINUATION_STEP = 0.05


def ladder_weights(n_atoms: int) -> tuple[np.ndarray, np.ndarray]:
    """Collective absorption/emission weights A(m), E(m) indexed by k = m + N/2.

    A vanishes at the top of the ladder and E at the bottom, so arrays of
    length N+1 carry no leakage off the ladder by construction.
    """
    j = n_atoms / 2.0
    m = np.arange(n_atoms + 1) - j
    absorption = j * (j + 1) - m * (m + 1)
    emission = j * (j + 1) - m * (m - 1)
    return absorption, emission


@dataclass(frozen=True)
class LadderGenerator:
    """Tridiagonal rate generator with per-reservoir link attribution.

    up_parts[label][k]   : rate of k -> k+1 fed by absorption from that reservoir
    down_parts[label][k] : rate of k -> k-1 fed by emission into that reservoir
    Edge entries are exactly zero.  Columns of the assembled chi = 0 matrix
    sum to zero because the diagonal is built from the same partial rates.
    """

    n_atoms: int
    up_parts: Mapping[str, np.ndarray]
    down_parts: Mapping[str, np.ndarray]

    @property
    def size(self) -> int:
        return self.n_atoms + 1

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.up_parts.keys())

    def up_total(self) -> np.ndarray:
        return sum(self.up_parts.values())

    def down_total(self) -> np.ndarray:
        return sum(self.down_parts.values())

    def diagonal(self) -> np.ndarray:
        return -(self.up_total() + self.down_total())

    def max_rate(self) -> float:
        return max(float(self.up_total().max()), float(self.down_total().max()), 1e-300)

    def matrix(self, phases: Mapping[str, complex] | None = None) -> np.ndarray:
        """Dense generator; complex when any counting phase is nonzero."""
        n = self.size
        counted = {k: v for k, v in (phases or {}).items() if v != 0}
        dtype = complex if counted else float
        mat = np.zeros((n, n), dtype=dtype)
        mat[np.arange(n), np.arange(n)] = self.diagonal()
        rows = np.arange(n)
        for label in self.labels:
            chi = counted.get(label, 0.0)
            up = self.up_parts[label]
            down = self.down_parts[label]
            absorb = cmath.exp(-1j * chi) if chi != 0 else 1.0
            emit = cmath.exp(+1j * chi) if chi != 0 else 1.0
            # gain of k+1 from k (absorption), gain of k-1 from k (emission)
            mat[rows[1:], rows[:-1]] += absorb * up[:-1]
            mat[rows[:-1], rows[1:]] += emit * down[1:]
        return mat


def build_generator(params: SystemParams) -> LadderGenerator:
    """Assemble the ladder-basis generator from the scenario parameters."""
    absorption, emission = ladder_weights(params.n_atoms)
    up = {}
    down = {}
    for res in params.reservoirs:
        up[res.label] = res.gamma * res.occupation * absorption
        down[res.label] = res.gamma * (1.0 + res.occupation) * emission
    return LadderGenerator(n_atoms=params.n_atoms, up_parts=up, down_parts=down)


@dataclass(frozen=True)
class CountingAssignment:
    """Counting-field phase per reservoir; uncounted reservoirs stay at zero."""

    phases: Mapping[str, complex]

    @classmethod
    def drain(cls, chi: complex) -> "CountingAssignment":
        return cls(phases={"drain": chi})

    @classmethod
    def source(cls, chi: complex) -> "CountingAssignment":
        return cls(phases={"source": chi})

    @classmethod
    def single(cls, chi: complex) -> "CountingAssignment":
        return cls(phases={"single": chi})

    def scaled(self, s: float) -> "CountingAssignment":
        return CountingAssignment(phases={k: s * v for k, v in self.phases.items()})


@dataclass(frozen=True)
class CountedGenerator:
    """Counting-field-dressed generator; keeps its parent for continuation in chi."""

    generator: LadderGenerator
    assignment: CountingAssignment
    matrix: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.generator.size

    def at_scale(self, s: float) -> np.ndarray:
        """Matrix with every counting phase multiplied by s (path from chi = 0)."""
        return self.generator.matrix(self.assignment.scaled(s).phases)


def dress_with_counting(gen: LadderGenerator, assignment: CountingAssignment) -> CountedGenerator:
    """Attach counting phases to the jump terms of a generator."""
    unknown = set(assignment.phases) - set(gen.labels)
    if unknown:
        raise UnknownReservoirError(f"counting assignment references unknown reservoirs {sorted(unknown)}")
    return CountedGenerator(generator=gen, assignment=assignment, matrix=gen.matrix(assignment.phases))


def counting_derivative(gen: LadderGenerator, label: str, order: int) -> np.ndarray:
    """Analytic d^p L(chi)/dchi^p at any chi = 0 for a single counted reservoir.

    Only the counted off-diagonal links survive: emission entries pick up
    (+i)^p and absorption entries (-i)^p.
    """
    if label not in gen.labels:
        raise UnknownReservoirError(f"unknown reservoir {label!r}")
    n = gen.size
    rows = np.arange(n)
    mat = np.zeros((n, n), dtype=complex)
    up = gen.up_parts[label]
    down = gen.down_parts[label]
    mat[rows[1:], rows[:-1]] = (-1j) ** order * up[:-1]
    mat[rows[:-1], rows[1:]] = (+1j) ** order * down[1:]
    return mat


def _eig_sorted(mat: np.ndarray):
    vals, vecs = la.eig(mat)
    return vals, vecs


def _max_abs_phase(assignment: CountingAssignment) -> float:
    return max((abs(v) for v in assignment.phases.values()), default=0.0)


def dominant_eigenvalue(
    counted: CountedGenerator,
    *,
    step: float = CONTINUATION_STEP,
    return_vector: bool = False,
):
    """Eigenvalue of L(chi) continuously connected to 0 at chi = 0.

    For small |chi| this is the eigenvalue of largest real part.  For larger
    (or complex) arguments the branch is tracked by continuation from
    chi = 0 in steps of at most `step`, matching eigenvectors by overlap.
    Raises EigenvalueCrossingError if two branches become indistinguishable.
    """
    total = _max_abs_phase(counted.assignment)
    if total <= SMALL_CHI_CUTOFF and all(
        abs(complex(v).imag) == 0 for v in counted.assignment.phases.values()
    ):
        vals, vecs = _eig_sorted(counted.matrix)
        idx = int(np.argmax(vals.real))
        if return_vector:
            return vals[idx], vecs[:, idx]
        return vals[idx]
    return _continued_eigenvalue(counted, step=step, return_vector=return_vector)


def _continued_eigenvalue(counted: CountedGenerator, *, step: float, return_vector: bool):
    total = _max_abs_phase(counted.assignment)
    n_steps = max(1, int(np.ceil(total / step)))
    # seed with the exact chi = 0 eigenpair: eigenvalue 0, stationary direction
    vals, vecs = _eig_sorted(counted.at_scale(0.0))
    idx0 = int(np.argmax(vals.real))
    lam, prev_vec = vals[idx0], vecs[:, idx0] / la.norm(vecs[:, idx0])
    s = 0.0
    ds = 1.0 / n_steps
    halvings_left = 6
    while s < 1.0:
        s_next = min(1.0, s + ds)
        mat = counted.matrix if s_next == 1.0 else counted.at_scale(s_next)
        try:
            lam, prev_vec = _match_branch(mat, prev_vec)
        except EigenvalueCrossingError:
            if halvings_left == 0:
                raise
            halvings_left -= 1
            ds /= 2.0
            continue
        s = s_next
    if return_vector:
        return lam, prev_vec
    return lam


def _match_branch(mat: np.ndarray, ref_vec: np.ndarray):
    """One continuation step: pick the eigenpair with maximal overlap with ref_vec."""
    vals, vecs = _eig_sorted(mat)
    norms = la.norm(vecs, axis=0)
    overlaps = np.abs(ref_vec.conj() @ vecs) / norms
    order = np.argsort(overlaps)[::-1]
    best = overlaps[order[0]]
    second = overlaps[order[1]] if len(order) > 1 else 0.0
    # a near-tie is harmless if both candidates carry the same eigenvalue
    degenerate_pair = len(order) > 1 and abs(vals[order[0]] - vals[order[1]]) < 1e-12 * max(
        1.0, float(np.abs(vals).max())
    )
    if not (best > 0.6 and (best - second) > 1e-3) and not degenerate_pair:
        raise EigenvalueCrossingError(
            f"eigenvalue branch ambiguous (overlaps {best:.3f}/{second:.3f})"
        )
    idx = int(order[0])
    return vals[idx], vecs[:, idx] / norms[idx]


def characteristic_polynomial(counted: CountedGenerator) -> np.ndarray:
    """Coefficients (ascending in lambda) of det(L(chi) - lambda*I).

    Uses the standard three-term determinant recurrence for tridiagonal
    matrices with exact polynomial arithmetic on the coefficient arrays.
    """
    mat = counted.matrix
    n = mat.shape[0]
    # D_k = det of leading k x k block, as a coefficient array of length k+1
    d_prev = np.array([1.0 + 0.0j])                      # D_0 = 1
    d_cur = np.array([mat[0, 0], -1.0 + 0.0j])           # D_1 = d_0 - lambda
    for k in range(1, n):
        # (d_k - lambda) * D_k
        term = np.zeros(k + 2, dtype=complex)
        term[: k + 1] += mat[k, k] * d_cur
        term[1:] -= d_cur
        # - a_{k-1} b_{k-1} * D_{k-1}
        term[: k] -= mat[k, k - 1] * mat[k - 1, k] * d_prev
        d_prev, d_cur = d_cur, term
    return d_cur

"""Brute-force oracle: the full Lindblad generator on the 2^N product space.

Everything else in the package works in the (N+1)-dimensional ladder
basis.  This module builds the same master equation with collective
operators J+- = sum_i sigma_i^+- on the complete product space (vectorized
density matrices, column stacking), dresses the counted reservoir's jump
terms with the counting phase, and extracts current and cumulants from the
dominant eigenvalue branch connected to the symmetric-sector stationary
state.  Agreement with the ladder reduction is the central anti-bug check
of the package; the cost caps the atom count at 3 (64 x 64 generators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .engine import CumulantSet
from .errors import EigenvalueCrossingError, SizeCapError
from .model import SystemParams, effective_occupation
from .numdiff import derivative_at_zero

MAX_FULLSPACE_ATOMS = 3

_SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])   # basis order (ground, excited)
_SIGMA_MINUS = _SIGMA_PLUS.T.copy()
_SIGMA_Z = np.diag([-1.0, 1.0])


def _site_operator(op: np.ndarray, site: int, n_atoms: int) -> np.ndarray:
    mat = np.array([[1.0]])
    for i in range(n_atoms):
        mat = np.kron(mat, op if i == site else np.eye(2))
    return mat


def collective_operators(n_atoms: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J+, J-, Jz) on the 2^N product space."""
    dim = 2**n_atoms
    jp = np.zeros((dim, dim))
    jz = np.zeros((dim, dim))
    for site in range(n_atoms):
        jp += _site_operator(_SIGMA_PLUS, site, n_atoms)
        jz += _site_operator(_SIGMA_Z, site, n_atoms)
    return jp, jp.T.copy(), jz


def _left_mult(op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(op.shape[0]), op)


def _right_mult(op: np.ndarray) -> np.ndarray:
    return np.kron(op.T, np.eye(op.shape[0]))


def _sandwich(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    # vec(A rho B) = (B^T kron A) vec(rho), column stacking
    return np.kron(right.T, left)


@dataclass(frozen=True)
class FullSpaceGenerator:
    """Vectorized product-space generator with counting on one reservoir."""

    params: SystemParams
    counted: str
    chi: complex
    matrix: np.ndarray = field(repr=False)
    trace_vector: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def build_full_generator(
    params: SystemParams, counted: str | None = None, chi: complex = 0.0
) -> FullSpaceGenerator:
    """Assemble the full 4^N x 4^N generator, phases on the counted reservoir."""
    if params.n_atoms > MAX_FULLSPACE_ATOMS:
        raise SizeCapError(
            f"full product-space treatment is capped at N = {MAX_FULLSPACE_ATOMS}"
        )
    if counted is None:
        counted = params.reservoirs[0].label if len(params.reservoirs) == 1 else "drain"
    jp, jm, jz = collective_operators(params.n_atoms)
    dim = jp.shape[0]
    mat = np.zeros((dim * dim, dim * dim), dtype=complex)
    # coherent part: -i (omega/2) [Jz, rho]; diagonal in the product basis
    mat += -1j * params.omega / 2.0 * (_left_mult(jz) - _right_mult(jz))
    for res in params.reservoirs:
        phase_absorb = np.exp(-1j * chi) if res.label == counted else 1.0
        phase_emit = np.exp(+1j * chi) if res.label == counted else 1.0
        g_abs = res.gamma * res.occupation
        g_emit = res.gamma * (1.0 + res.occupation)
        mat += g_abs * (
            phase_absorb * _sandwich(jp, jm)
            - 0.5 * (_left_mult(jm @ jp) + _right_mult(jm @ jp))
        )
        mat += g_emit * (
            phase_emit * _sandwich(jm, jp)
            - 0.5 * (_left_mult(jp @ jm) + _right_mult(jp @ jm))
        )
    trace_vec = np.eye(dim).flatten(order="F")
    return FullSpaceGenerator(
        params=params, counted=counted, chi=chi, matrix=mat, trace_vector=trace_vec
    )


def dicke_states(n_atoms: int) -> np.ndarray:
    """Symmetric (j = N/2) basis vectors, rows ordered from m = -N/2 to +N/2."""
    dim = 2**n_atoms
    states = np.zeros((n_atoms + 1, dim))
    for idx in range(dim):
        k = bin(idx).count("1")
        states[k, idx] = 1.0
    norms = np.sqrt((states**2).sum(axis=1))
    return states / norms[:, None]


def symmetric_stationary_matrix(params: SystemParams) -> np.ndarray:
    """Stationary density matrix: geometric weights over the Dicke ladder."""
    n_m = effective_occupation(params).occupation
    basis = dicke_states(params.n_atoms)
    ratio = n_m / (1.0 + n_m) if np.isfinite(n_m) else 1.0
    weights = ratio ** np.arange(params.n_atoms + 1) if n_m > 0 else np.eye(1, params.n_atoms + 1)[0]
    weights = weights / weights.sum()
    return (basis.T * weights) @ basis


def stationary_populations_fullspace(params: SystemParams, t_relax: float | None = None) -> np.ndarray:
    """Ladder populations of the long-time full-space state from the all-excited start."""
    full = build_full_generator(params)
    dim = 2**params.n_atoms
    rho0 = np.zeros((dim, dim))
    rho0[-1, -1] = 1.0  # every atom excited
    vec = rho0.flatten(order="F").astype(complex)
    gen_scale = max(np.abs(full.matrix).max(), 1e-300)
    t = t_relax if t_relax is not None else 20.0 / gen_scale * dim
    prop = la.expm(full.matrix * t)
    vec = prop @ vec
    for _ in range(60):
        nxt = prop @ vec
        if np.abs(nxt - vec).max() < 1e-14:
            vec = nxt
            break
        vec = nxt
    rho = vec.reshape(dim, dim, order="F")
    basis = dicke_states(params.n_atoms)
    return np.real(np.einsum("ki,ij,kj->k", basis, rho, basis))


def _lu_extended(mat: np.ndarray):
    """Pivoted LU factorization in 80-bit precision (LAPACK lacks clongdouble)."""
    a = mat.astype(np.clongdouble).copy()
    n = a.shape[0]
    piv = np.arange(n)
    # relative pivot floor keeps exactly-singular shifts from breeding NaNs;
    # inverse iteration only needs the factors to be astronomically ill-conditioned
    floor = np.longdouble(1e-28) * max(np.abs(a).max(), np.longdouble(1e-300))
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        if abs(a[k, k]) < floor:
            a[k, k] = np.clongdouble(floor)
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    if abs(a[n - 1, n - 1]) < floor:
        a[n - 1, n - 1] = np.clongdouble(floor)
    return a, piv


def _lu_solve_extended(factors, b):
    a, piv = factors
    n = a.shape[0]
    x = b.astype(np.clongdouble)[piv].copy()
    for i in range(1, n):  # L y = P b, unit lower triangular
        x[i] -= a[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):  # U x = y
        x[i] = (x[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    return x


def _lu_solve_adjoint_extended(factors, b):
    a, piv = factors
    n = a.shape[0]
    z = b.astype(np.clongdouble).copy()
    for i in range(n):  # U^H z = b, lower triangular
        z[i] = (z[i] - a[: i, i].conj() @ z[:i]) / a[i, i].conj()
    for i in range(n - 1, -1, -1):  # L^H w = z, unit upper triangular
        z[i] -= a[i + 1 :, i].conj() @ z[i + 1 :]
    x = np.empty_like(z)
    x[piv] = z
    return x


def _counted_jump_parts(params: SystemParams, counted: str, scale: float):
    """(M0, J_absorb, J_emit)/scale with M(chi) = M0 + (e^{-i chi}-1) J_a + (e^{+i chi}-1) J_e.

    The parts are real float64 matrices with exactly representable entries,
    so the extended-precision assembly below is smooth in chi at the 80-bit
    level (float64 phase rounding would otherwise cap derivative accuracy).
    """
    m0 = np.real(build_full_generator(params, counted, 0.0).matrix) / scale
    jp, jm, _ = collective_operators(params.n_atoms)
    res = params.reservoir(counted)
    j_absorb = res.gamma * res.occupation * _sandwich(jp, jm) / scale
    j_emit = res.gamma * (1.0 + res.occupation) * _sandwich(jm, jp) / scale
    return m0, j_absorb, j_emit


def _assemble_extended(parts, chi: float) -> np.ndarray:
    m0, j_absorb, j_emit = parts
    xl = np.longdouble(chi)
    cos_x, sin_x = np.cos(xl), np.sin(xl)
    one = np.clongdouble(1.0)
    phase_emit = np.clongdouble(cos_x) + np.clongdouble(1j) * np.clongdouble(sin_x)
    phase_absorb = np.clongdouble(cos_x) - np.clongdouble(1j) * np.clongdouble(sin_x)
    out = m0.astype(np.clongdouble)
    out += (phase_absorb - one) * j_absorb.astype(np.clongdouble)
    out += (phase_emit - one) * j_emit.astype(np.clongdouble)
    return out


def _refine_eigenpair_extended(mat_ext: np.ndarray, lam0: complex, vec0: np.ndarray) -> complex:
    """Polish an eigenvalue by inverse iteration + two-sided Rayleigh quotient.

    All arithmetic runs in 80-bit precision, pushing the eigenvalue's
    absolute error well under float64 roundoff so that high-order finite
    differences in the counting field stay truncation-limited.
    """
    n = mat_ext.shape[0]
    shifted = mat_ext - np.clongdouble(lam0) * np.eye(n, dtype=np.clongdouble)
    factors = _lu_extended(shifted)
    v = vec0.astype(np.clongdouble)
    u = vec0.astype(np.clongdouble)
    for _ in range(2):
        v = _lu_solve_extended(factors, v)
        v /= np.sqrt((np.abs(v) ** 2).sum())
        u = _lu_solve_adjoint_extended(factors, u)
        u /= np.sqrt((np.abs(u) ** 2).sum())
    denom = u.conj() @ v
    if abs(complex(denom)) < 1e-12:
        return complex(lam0)
    lam = (u.conj() @ (mat_ext @ v)) / denom
    if abs(complex(lam) - complex(lam0)) > 1e-6:
        return complex(lam0)  # refinement wandered off; keep the LAPACK value
    return complex(lam)


def _tracked_full_eigenvalue(params, counted, chi, scale, ref_vec, step=0.05, parts=None):
    """Dominant-branch eigenvalue of the full generator, continued from chi = 0.

    The chi = 0 null space is degenerate (one stationary state per spin
    sector), so the branch is pinned by overlap with the symmetric-sector
    stationary state and followed stepwise to the requested chi.  The final
    eigenpair is polished in extended precision on the smoothly assembled
    matrix.
    """
    n_steps = max(1, int(math.ceil(abs(chi) / step)))
    prev = ref_vec / la.norm(ref_vec)
    lam = 0.0 + 0.0j
    for i in range(1, n_steps + 1):
        mat = build_full_generator(params, counted, chi * i / n_steps).matrix / scale
        vals, vecs = la.eig(mat)
        norms = la.norm(vecs, axis=0)
        overlaps = np.abs(prev.conj() @ vecs) / norms
        order = np.argsort(overlaps)[::-1]
        best, second = overlaps[order[0]], overlaps[order[1]]
        if best < 0.5 or (best - second) < 1e-6:
            raise EigenvalueCrossingError(
                f"full-space branch tracking ambiguous at chi = {chi * i / n_steps}"
            )
        idx = int(order[0])
        lam = vals[idx]
        prev = vecs[:, idx] / norms[idx]
    if parts is None:
        parts = _counted_jump_parts(params, counted, scale)
    return _refine_eigenpair_extended(_assemble_extended(parts, chi), lam, prev)


def oracle_current_and_cumulants(
    params: SystemParams,
    orders: tuple[int, ...] = (1, 2, 3, 4),
    counted: str = "drain",
    levels: int = 5,
) -> CumulantSet:
    """C_k from the full product-space generator (N <= 3).

    Same finite-difference machinery as the ladder engine, applied to the
    symmetric-sector branch of the 4^N-dimensional generator.
    """
    if params.n_atoms > MAX_FULLSPACE_ATOMS:
        raise SizeCapError(
            f"full product-space treatment is capped at N = {MAX_FULLSPACE_ATOMS}"
        )
    if len(params.reservoirs) == 1:
        counted = params.reservoirs[0].label
    base = build_full_generator(params, counted)
    scale = float(np.abs(base.matrix).max())
    ref = symmetric_stationary_matrix(params).flatten(order="F").astype(complex)
    parts = _counted_jump_parts(params, counted, scale)

    cache: dict[float, complex] = {}

    def lam(chi: float) -> complex:
        if chi not in cache:
            cache[chi] = _tracked_full_eigenvalue(params, counted, chi, scale, ref, parts=parts)
        return cache[chi]

    cumulants, errors, diags = {}, {}, {}
    for k in orders:
        half = 3 if k >= 3 else 2
        candidates = []
        for h0 in (1e-2, 3e-2, 8e-2):
            veps = 1e-16 * abs(lam(half * h0)) + 1e-26
            candidates.append(derivative_at_zero(lam, k, h=h0, levels=levels, value_eps=veps))
        value, err, diag = min(candidates, key=lambda t: t[1])
        ck = (-1j) ** k * value
        cumulants[k] = float(ck.real) * scale
        errors[k] = (err + abs(ck.imag)) * scale
        if diag:
            diags[k] = diag
    return CumulantSet(cumulants=cumulants, errors=errors, method="fullspace", diagnostics=diags)


def population_block(params: SystemParams) -> np.ndarray:
    """Action of the full chi = 0 generator restricted to product-basis populations.

    For N = 1 this is exactly the two-state ladder generator.
    """
    full = build_full_generator(params)
    dim = 2**params.n_atoms
    idx = [i + dim * i for i in range(dim)]
    return np.real(full.matrix[np.ix_(idx, idx)])
